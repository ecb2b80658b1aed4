//! Formal elements of the Cohn-Leavitt algebra of a separated graph: words
//! over vertex, edge and ghost-edge generators with rational coefficients,
//! the involution, and a terminating rewriting engine.
//!
//! The rewrite rules are exactly the defining relations read left to right:
//! vertex orthogonality, unit absorption and composability zeros, ghost-edge
//! orthogonality within a group, and the summation rule for groups in `S`
//! (rearranged so the selected pair `e_X e_X*` is eliminated in favor of the
//! other pairs of its group). Every rewrite strictly decreases the pair
//! (number of selected generators, word length) lexicographically, which the
//! engine asserts at each step, so reduction terminates on every input.

use std::collections::BTreeMap;
use std::fmt;

use num::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::graph::{EdgeId, FaithfulClassError, GroupId, SeparatedGraph, VertexId};
use crate::rational::{rat, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Generator {
    Vertex(VertexId),
    Edge(EdgeId),
    Ghost(EdgeId),
}

impl Generator {
    /// The vertex acting as a left unit for this generator.
    fn left_unit(self, g: &SeparatedGraph) -> VertexId {
        match self {
            Generator::Vertex(v) => v,
            Generator::Edge(e) => g.source(e),
            Generator::Ghost(e) => g.range(e),
        }
    }

    /// The vertex acting as a right unit for this generator.
    fn right_unit(self, g: &SeparatedGraph) -> VertexId {
        match self {
            Generator::Vertex(v) => v,
            Generator::Edge(e) => g.range(e),
            Generator::Ghost(e) => g.source(e),
        }
    }

    fn star(self) -> Self {
        match self {
            Generator::Vertex(v) => Generator::Vertex(v),
            Generator::Edge(e) => Generator::Ghost(e),
            Generator::Ghost(e) => Generator::Edge(e),
        }
    }
}

/// A nonempty word over the generators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    word: Vec<Generator>,
}

impl Monomial {
    pub fn new(word: Vec<Generator>) -> Self {
        assert!(!word.is_empty(), "the empty word is not a monomial");
        Self { word }
    }

    pub fn word(&self) -> &[Generator] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn star(&self) -> Self {
        Self::new(self.word.iter().rev().map(|g| g.star()).collect())
    }
}

// Length-lexicographic order; used only for canonical term collection.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.word
            .len()
            .cmp(&other.word.len())
            .then_with(|| self.word.cmp(&other.word))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// A finite rational-linear combination of monomials; coefficients are never
/// zero and keys are kept in length-lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    terms: BTreeMap<Monomial, Rational>,
}

impl Element {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(monomial: Monomial, coefficient: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(monomial, coefficient);
        out
    }

    pub fn monomial(monomial: Monomial) -> Self {
        Self::term(monomial, Rational::one())
    }

    pub fn vertex(v: VertexId) -> Self {
        Self::monomial(Monomial::new(vec![Generator::Vertex(v)]))
    }

    pub fn edge(e: EdgeId) -> Self {
        Self::monomial(Monomial::new(vec![Generator::Edge(e)]))
    }

    pub fn ghost(e: EdgeId) -> Self {
        Self::monomial(Monomial::new(vec![Generator::Ghost(e)]))
    }

    pub fn word(word: Vec<Generator>) -> Self {
        Self::monomial(Monomial::new(word))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, monomial: Monomial, coefficient: Rational) {
        if coefficient.is_zero() {
            return;
        }
        let entry = self.terms.entry(monomial);
        match entry {
            std::collections::btree_map::Entry::Vacant(slot) => {
                slot.insert(coefficient);
            }
            std::collections::btree_map::Entry::Occupied(mut slot) => {
                *slot.get_mut() += coefficient;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * factor))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    /// Bilinear concatenation of words; the result is not reduced.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in self.terms() {
            for (m2, c2) in other.terms() {
                let mut word = m1.word.clone();
                word.extend_from_slice(&m2.word);
                out.add_term(Monomial::new(word), c1 * c2);
            }
        }
        out
    }

    /// The involution: reverses words, swaps edges with ghosts, fixes
    /// vertices and coefficients.
    pub fn star(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.star(), c.clone())).collect(),
        }
    }

    /// Renders with graph names in the CLI element syntax.
    pub fn display<'a>(&'a self, g: &'a SeparatedGraph) -> ElementDisplay<'a> {
        ElementDisplay { graph: g, element: self }
    }
}

/// One selected edge per group in `S`, as required to state the summation
/// rewrite; defaults to the first edge of each group in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectedEdges {
    choice: BTreeMap<GroupId, EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SelectionError {
    #[error("group {group} is not a member of S")]
    NotInS { group: GroupId },
    #[error("edge {edge} does not belong to group {group}")]
    ForeignEdge { group: GroupId, edge: String },
}

impl SelectedEdges {
    pub fn first_edges(g: &SeparatedGraph) -> Self {
        let choice = g
            .s_groups()
            .map(|gid| (gid, g.group_edges(gid)[0]))
            .collect();
        Self { choice }
    }

    /// Defaults overridden by explicit `(group, edge)` choices.
    pub fn with_overrides(
        g: &SeparatedGraph,
        overrides: &[(GroupId, EdgeId)],
    ) -> Result<Self, SelectionError> {
        let mut sel = Self::first_edges(g);
        for &(gid, edge) in overrides {
            if !g.in_s(gid) {
                return Err(SelectionError::NotInS { group: gid });
            }
            if !g.group_edges(gid).contains(&edge) {
                return Err(SelectionError::ForeignEdge {
                    group: gid,
                    edge: g.edge_name(edge).to_owned(),
                });
            }
            sel.choice.insert(gid, edge);
        }
        Ok(sel)
    }

    pub fn selected(&self, group: GroupId) -> Option<EdgeId> {
        self.choice.get(&group).copied()
    }

    fn is_selected(&self, g: &SeparatedGraph, e: EdgeId) -> bool {
        g.group_of_edge(e)
            .is_some_and(|gid| self.selected(gid) == Some(e))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReduceStats {
    pub steps: usize,
    /// Number of summation (selected-pair) rewrites applied.
    pub s_rewrites: usize,
}

/// Reduces to the fixed point of the rewriting system, leftmost rule first,
/// collecting like terms and dropping zero coefficients.
pub fn reduce(g: &SeparatedGraph, sel: &SelectedEdges, a: &Element) -> Element {
    reduce_with_stats(g, sel, a).0
}

/// As [`reduce`], also reporting how many steps ran and whether any
/// summation rewrite fired (normal forms are not star-symmetric once the
/// summation rule is involved, so some callers need to know).
pub fn reduce_with_stats(g: &SeparatedGraph, sel: &SelectedEdges, a: &Element) -> (Element, ReduceStats) {
    let mut stats = ReduceStats::default();
    let mut out = Element::zero();
    for (m, c) in a.terms() {
        reduce_word(g, sel, m.word.clone(), c.clone(), &mut out, &mut stats);
    }
    (out, stats)
}

/// Termination measure: (selected generators in the word, word length),
/// compared lexicographically.
fn measure(g: &SeparatedGraph, sel: &SelectedEdges, word: &[Generator]) -> (usize, usize) {
    let selected = word
        .iter()
        .filter(|gen| match gen {
            Generator::Edge(e) | Generator::Ghost(e) => sel.is_selected(g, *e),
            Generator::Vertex(_) => false,
        })
        .count();
    (selected, word.len())
}

enum Step {
    /// The whole term vanishes.
    Zero,
    /// Replace the matched pair by a single generator.
    Collapse(Generator),
    /// Summation rewrite: full replacement words with coefficient factors.
    Branch(Vec<(Rational, Vec<Generator>)>),
}

fn find_redex(g: &SeparatedGraph, sel: &SelectedEdges, word: &[Generator]) -> Option<(usize, Step)> {
    for i in 0..word.len().saturating_sub(1) {
        let (a, b) = (word[i], word[i + 1]);
        // composability zero: mismatched units annihilate every pair
        if a.right_unit(g) != b.left_unit(g) {
            return Some((i, Step::Zero));
        }
        match (a, b) {
            (Generator::Vertex(_), Generator::Vertex(u)) => {
                return Some((i, Step::Collapse(Generator::Vertex(u))));
            }
            (Generator::Vertex(_), other) | (other, Generator::Vertex(_)) => {
                return Some((i, Step::Collapse(other)));
            }
            (Generator::Ghost(e), Generator::Edge(f)) => {
                if g.group_of_edge(e) == g.group_of_edge(f) {
                    let step = if e == f {
                        Step::Collapse(Generator::Vertex(g.range(e)))
                    } else {
                        Step::Zero
                    };
                    return Some((i, step));
                }
            }
            (Generator::Edge(e), Generator::Ghost(f)) => {
                if e == f && sel.is_selected(g, e) {
                    let gid = g.group_of_edge(e).expect("selected edge has a group");
                    let prefix = &word[..i];
                    let suffix = &word[i + 2..];
                    let mut branches = Vec::new();
                    let mut with_middle = |middle: &[Generator], coeff: Rational| {
                        let mut w = Vec::with_capacity(prefix.len() + middle.len() + suffix.len());
                        w.extend_from_slice(prefix);
                        w.extend_from_slice(middle);
                        w.extend_from_slice(suffix);
                        branches.push((coeff, w));
                    };
                    with_middle(&[Generator::Vertex(g.source(e))], Rational::one());
                    for &other in g.group_edges(gid) {
                        if other != e {
                            with_middle(
                                &[Generator::Edge(other), Generator::Ghost(other)],
                                -Rational::one(),
                            );
                        }
                    }
                    return Some((i, Step::Branch(branches)));
                }
            }
            _ => {}
        }
    }
    None
}

fn reduce_word(
    g: &SeparatedGraph,
    sel: &SelectedEdges,
    word: Vec<Generator>,
    coefficient: Rational,
    out: &mut Element,
    stats: &mut ReduceStats,
) {
    let mut pending = vec![(coefficient, word)];
    while let Some((coeff, word)) = pending.pop() {
        match find_redex(g, sel, &word) {
            None => out.add_term(Monomial::new(word), coeff),
            Some((i, step)) => {
                stats.steps += 1;
                let before = measure(g, sel, &word);
                match step {
                    Step::Zero => {}
                    Step::Collapse(gen) => {
                        let mut w = word;
                        w[i] = gen;
                        w.remove(i + 1);
                        assert!(measure(g, sel, &w) < before, "non-decreasing rewrite");
                        pending.push((coeff, w));
                    }
                    Step::Branch(branches) => {
                        stats.s_rewrites += 1;
                        for (factor, w) in branches {
                            assert!(measure(g, sel, &w) < before, "non-decreasing rewrite");
                            pending.push((&coeff * factor, w));
                        }
                    }
                }
            }
        }
    }
}

/// Enumerates the irreducible words of length at most `length_bound`
/// (vertices count as length zero), in a deterministic order: all vertices,
/// then vertex-free irreducible words by length and generator id.
///
/// Requires a graph in the faithful class (one common source, injective
/// range, no loops), where these words form a linear basis of the
/// abelianized algebra.
pub fn spanning_set(
    g: &SeparatedGraph,
    sel: &SelectedEdges,
    length_bound: usize,
) -> Result<Vec<Element>, FaithfulClassError> {
    g.classify().require_faithful_class()?;
    let mut result: Vec<Element> = g.vertex_ids().map(Element::vertex).collect();
    let mut frontier: Vec<Vec<Generator>> = Vec::new();
    if length_bound >= 1 {
        for e in g.edge_ids() {
            frontier.push(vec![Generator::Edge(e)]);
            frontier.push(vec![Generator::Ghost(e)]);
        }
    }
    let mut level = 1;
    while !frontier.is_empty() {
        result.extend(frontier.iter().cloned().map(Element::word));
        level += 1;
        if level > length_bound {
            break;
        }
        let mut next = Vec::new();
        for word in &frontier {
            let last = *word.last().expect("frontier words are nonempty");
            for e in g.edge_ids() {
                for cand in [Generator::Edge(e), Generator::Ghost(e)] {
                    if pair_is_irreducible(g, sel, last, cand) {
                        let mut w = word.clone();
                        w.push(cand);
                        next.push(w);
                    }
                }
            }
        }
        frontier = next;
    }
    Ok(result)
}

/// True when the adjacent pair `(a, b)` admits no rewrite.
fn pair_is_irreducible(g: &SeparatedGraph, sel: &SelectedEdges, a: Generator, b: Generator) -> bool {
    if a.right_unit(g) != b.left_unit(g) {
        return false;
    }
    match (a, b) {
        (Generator::Vertex(_), _) | (_, Generator::Vertex(_)) => false,
        (Generator::Ghost(e), Generator::Edge(f)) => g.group_of_edge(e) != g.group_of_edge(f),
        (Generator::Edge(e), Generator::Ghost(f)) => !(e == f && sel.is_selected(g, e)),
        _ => true,
    }
}

/// All commutators `w w* u u* - u u* w w*` over semigroup words `w, u` of
/// length at most `length_bound`, unreduced and with like terms collected
/// (so the element for `w == u` is zero).
pub fn commutator_sample(g: &SeparatedGraph, length_bound: usize) -> Vec<Element> {
    let words = semigroup_words(g, length_bound);
    let mut out = Vec::with_capacity(words.len() * words.len());
    for lambda in &words {
        let ll = range_projection_word(lambda);
        for beta in &words {
            let bb = range_projection_word(beta);
            let mut forward = ll.clone();
            forward.extend_from_slice(&bb);
            let mut backward = bb;
            backward.extend_from_slice(&ll);
            let mut element = Element::zero();
            element.add_term(Monomial::new(forward), Rational::one());
            element.add_term(Monomial::new(backward), -Rational::one());
            out.push(element);
        }
    }
    out
}

/// `w w*` as a word.
fn range_projection_word(w: &[Generator]) -> Vec<Generator> {
    let mut word = w.to_vec();
    word.extend(w.iter().rev().map(|g| g.star()));
    word
}

/// All words over the edge and ghost generators of length `1..=bound`.
pub fn semigroup_words(g: &SeparatedGraph, bound: usize) -> Vec<Vec<Generator>> {
    let symbols: Vec<Generator> = g
        .edge_ids()
        .flat_map(|e| [Generator::Edge(e), Generator::Ghost(e)])
        .collect();
    let mut out = Vec::new();
    let mut frontier: Vec<Vec<Generator>> = vec![Vec::new()];
    for _ in 0..bound {
        let mut next = Vec::with_capacity(frontier.len() * symbols.len());
        for word in &frontier {
            for &s in &symbols {
                let mut w = word.clone();
                w.push(s);
                next.push(w);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Every defining relation of the algebra as a labelled `lhs - rhs` element:
/// vertex idempotence and orthogonality, unit absorption for edges and
/// ghosts, ghost-edge orthogonality within each group, and the summation
/// relation for each group in `S`.
pub fn defining_relations(g: &SeparatedGraph) -> Vec<(String, Element)> {
    let mut out = Vec::new();
    for u in g.vertex_ids() {
        for v in g.vertex_ids() {
            let product = Element::vertex(u).multiply(&Element::vertex(v));
            let rhs = if u == v { Element::vertex(u) } else { Element::zero() };
            let label = format!("{u_name}.{v_name}", u_name = g.vertex_name(u), v_name = g.vertex_name(v));
            out.push((format!("(P) {label}"), product.sub(&rhs)));
        }
    }
    for e in g.edge_ids() {
        let name = g.edge_name(e);
        let source = Element::vertex(g.source(e));
        let range = Element::vertex(g.range(e));
        let edge = Element::edge(e);
        let ghost = Element::ghost(e);
        out.push((format!("(E1) s.{name}"), source.multiply(&edge).sub(&edge)));
        out.push((format!("(E1) {name}.r"), edge.multiply(&range).sub(&edge)));
        out.push((format!("(E2) r.{name}^"), range.multiply(&ghost).sub(&ghost)));
        out.push((format!("(E2) {name}^.s"), ghost.multiply(&source).sub(&ghost)));
    }
    for gid in g.all_groups() {
        for &e in g.group_edges(gid) {
            for &f in g.group_edges(gid) {
                let product = Element::ghost(e).multiply(&Element::edge(f));
                let rhs = if e == f { Element::vertex(g.range(e)) } else { Element::zero() };
                let label = format!("(SCK1) {}^.{}", g.edge_name(e), g.edge_name(f));
                out.push((label, product.sub(&rhs)));
            }
        }
    }
    for gid in g.s_groups() {
        let mut sum = Element::zero();
        for &e in g.group_edges(gid) {
            sum = sum.add(&Element::edge(e).multiply(&Element::ghost(e)));
        }
        let label = format!("(SCK2) group {gid} at {}", g.vertex_name(gid.vertex));
        out.push((label, sum.sub(&Element::vertex(gid.vertex))));
    }
    out
}

/// Coefficient draw for randomized harnesses: `{-5..5} \ {0}` over
/// denominators `1..3`.
pub fn random_coefficient<R: Rng>(rng: &mut R) -> Rational {
    let numer = loop {
        let n: i64 = rng.gen_range(-5..=5);
        if n != 0 {
            break n;
        }
    };
    rat(numer, rng.gen_range(1..=3))
}

/// A random element with up to `max_terms` terms over words of length up to
/// `max_word_len`, mixing vertex, edge and ghost generators.
pub fn random_element<R: Rng>(
    g: &SeparatedGraph,
    rng: &mut R,
    max_terms: usize,
    max_word_len: usize,
) -> Element {
    let mut out = Element::zero();
    for _ in 0..rng.gen_range(1..=max_terms.max(1)) {
        let len = rng.gen_range(1..=max_word_len.max(1));
        let word: Vec<Generator> = (0..len)
            .map(|_| {
                if g.edge_count() == 0 || rng.gen_range(0..3) == 0 {
                    Generator::Vertex(VertexId(rng.gen_range(0..g.vertex_count())))
                } else if rng.gen_range(0..2) == 0 {
                    Generator::Edge(EdgeId(rng.gen_range(0..g.edge_count())))
                } else {
                    Generator::Ghost(EdgeId(rng.gen_range(0..g.edge_count())))
                }
            })
            .collect();
        out.add_term(Monomial::new(word), random_coefficient(rng));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("element parse error at byte {pos}: {message}")]
pub struct ElementParseError {
    pub pos: usize,
    pub message: String,
}

/// Parses the CLI element syntax: terms like `3/2*e1.e1^.v0` joined by `+`
/// or `-`, where `.` concatenates generators and a trailing `^` marks a
/// ghost edge. Names refer to the graph's declared vertex and edge names.
pub fn parse_element(g: &SeparatedGraph, input: &str) -> Result<Element, ElementParseError> {
    Parser {
        graph: g,
        bytes: input.as_bytes(),
        pos: 0,
    }
    .parse()
}

struct Parser<'a> {
    graph: &'a SeparatedGraph,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ElementParseError> {
        Err(ElementParseError {
            pos: self.pos,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse(mut self) -> Result<Element, ElementParseError> {
        let mut out = Element::zero();
        self.skip_ws();
        if self.peek().is_none() {
            return self.error("empty element");
        }
        let mut negative = self.eat(b'-');
        if !negative {
            self.eat(b'+');
        }
        loop {
            self.skip_ws();
            let (monomial, coefficient) = self.parse_term()?;
            let signed = if negative { -coefficient } else { coefficient };
            out.add_term(monomial, signed);
            self.skip_ws();
            match self.peek() {
                None => return Ok(out),
                Some(b'+') => {
                    self.pos += 1;
                    negative = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    negative = true;
                }
                Some(other) => {
                    return self.error(format!("expected '+' or '-', found {:?}", other as char))
                }
            }
        }
    }

    fn parse_term(&mut self) -> Result<(Monomial, Rational), ElementParseError> {
        let coefficient = self.try_parse_coefficient()?.unwrap_or_else(Rational::one);
        self.skip_ws();
        let mut word = vec![self.parse_atom()?];
        loop {
            self.skip_ws();
            if self.eat(b'.') {
                self.skip_ws();
                word.push(self.parse_atom()?);
            } else {
                return Ok((Monomial::new(word), coefficient));
            }
        }
    }

    /// Consumes `p` or `p/q` only when followed by `*`; otherwise leaves the
    /// input untouched so digit-leading names still parse.
    fn try_parse_coefficient(&mut self) -> Result<Option<Rational>, ElementParseError> {
        let start = self.pos;
        if !self.peek().is_some_and(|b| b.is_ascii_digit()) {
            return Ok(None);
        }
        let numer = self.take_digits();
        self.skip_ws();
        let denom = if self.eat(b'/') {
            self.skip_ws();
            let digits = self.take_digits();
            if digits.is_empty() {
                return self.error("expected a denominator");
            }
            Some(digits)
        } else {
            None
        };
        self.skip_ws();
        if !self.eat(b'*') {
            self.pos = start;
            return Ok(None);
        }
        let numer: num::BigInt = numer.parse().expect("digits parse as an integer");
        let denom: num::BigInt = denom
            .unwrap_or_else(|| "1".to_owned())
            .parse()
            .expect("digits parse as an integer");
        if denom.is_zero() {
            self.pos = start;
            return self.error("coefficient denominator is zero");
        }
        Ok(Some(Rational::new(numer, denom)))
    }

    fn take_digits(&mut self) -> String {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned()
    }

    fn parse_atom(&mut self) -> Result<Generator, ElementParseError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return self.error("expected a vertex or edge name");
        }
        let name = String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned();
        let ghost = self.eat(b'^');
        if let Some(e) = self.graph.edge_id(&name) {
            Ok(if ghost { Generator::Ghost(e) } else { Generator::Edge(e) })
        } else if let Some(v) = self.graph.vertex_id(&name) {
            if ghost {
                self.pos = start;
                self.error(format!("vertex {name} cannot carry the ghost marker"))
            } else {
                Ok(Generator::Vertex(v))
            }
        } else {
            self.pos = start;
            self.error(format!("unknown vertex or edge name {name}"))
        }
    }
}

pub struct ElementDisplay<'a> {
    graph: &'a SeparatedGraph,
    element: &'a Element,
}

impl fmt::Display for ElementDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.element.is_zero() {
            return write!(f, "0");
        }
        for (i, (monomial, coefficient)) in self.element.terms().enumerate() {
            let negative = coefficient.is_negative();
            if i == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else if negative {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let magnitude = coefficient.abs();
            if !magnitude.is_one() {
                write!(f, "{magnitude}*")?;
            }
            for (k, gen) in monomial.word().iter().enumerate() {
                if k > 0 {
                    write!(f, ".")?;
                }
                match gen {
                    Generator::Vertex(v) => write!(f, "{}", self.graph.vertex_name(*v))?,
                    Generator::Edge(e) => write!(f, "{}", self.graph.edge_name(*e))?,
                    Generator::Ghost(e) => write!(f, "{}^", self.graph.edge_name(*e))?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const FAN_GRAPH: &str = include_str!("../../../golden/example1.json");

    fn fan() -> (SeparatedGraph, SelectedEdges) {
        let g = SeparatedGraph::load(FAN_GRAPH).unwrap();
        let sel = SelectedEdges::first_edges(&g);
        (g, sel)
    }

    fn elem(g: &SeparatedGraph, text: &str) -> Element {
        parse_element(g, text).unwrap()
    }

    #[test]
    fn multiply_concatenates_bilinearly() {
        let (g, _) = fan();
        let product = elem(&g, "e1").multiply(&elem(&g, "e1^"));
        assert_eq!(product, elem(&g, "e1.e1^"));
        let sum = elem(&g, "2*e1+3*e2").multiply(&elem(&g, "e2^"));
        assert_eq!(sum, elem(&g, "2*e1.e2^+3*e2.e2^"));
    }

    #[test]
    fn multiply_is_associative_on_random_triples() {
        let (g, _) = fan();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_element(&g, &mut rng, 3, 3);
            let b = random_element(&g, &mut rng, 3, 3);
            let c = random_element(&g, &mut rng, 3, 3);
            assert_eq!(a.multiply(&b.multiply(&c)), a.multiply(&b).multiply(&c));
        }
    }

    #[test]
    fn star_reverses_and_swaps() {
        let (g, _) = fan();
        assert_eq!(elem(&g, "e1.e2^").star(), elem(&g, "e2.e1^"));
        assert_eq!(elem(&g, "v0").star(), elem(&g, "v0"));
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let a = random_element(&g, &mut rng, 3, 4);
            assert_eq!(a.star().star(), a);
        }
    }

    #[test]
    fn summation_rewrite_collapses_the_s_group() {
        let (g, sel) = fan();
        assert_eq!(sel.selected(GroupId { vertex: VertexId(0), index: 1 }), Some(EdgeId(2)));
        let sum = elem(&g, "e3.e3^+e4.e4^");
        assert_eq!(reduce(&g, &sel, &sum), elem(&g, "v0"));
    }

    #[test]
    fn ghost_edge_orthogonality_within_a_group() {
        let (g, sel) = fan();
        assert!(reduce(&g, &sel, &elem(&g, "e1^.e2")).is_zero());
        assert_eq!(reduce(&g, &sel, &elem(&g, "e1^.e1")), elem(&g, "v1"));
    }

    #[test]
    fn cross_group_ghost_edge_words_are_irreducible() {
        let (g, sel) = fan();
        let x = elem(&g, "e1^.e3");
        assert_eq!(reduce(&g, &sel, &x), x);
    }

    #[test]
    fn unit_absorption_and_composability_zeros() {
        let (g, sel) = fan();
        assert_eq!(reduce(&g, &sel, &elem(&g, "v0.e1")), elem(&g, "e1"));
        assert_eq!(reduce(&g, &sel, &elem(&g, "e1.v1")), elem(&g, "e1"));
        assert!(reduce(&g, &sel, &elem(&g, "v1.e1")).is_zero());
        assert!(reduce(&g, &sel, &elem(&g, "e1.e2")).is_zero());
        assert!(reduce(&g, &sel, &elem(&g, "e1.e2^")).is_zero());
        assert_eq!(reduce(&g, &sel, &elem(&g, "v0.v0")), elem(&g, "v0"));
        assert!(reduce(&g, &sel, &elem(&g, "v0.v1")).is_zero());
    }

    #[test]
    fn reduce_is_idempotent_on_random_elements() {
        let (g, sel) = fan();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = random_element(&g, &mut rng, 3, 4);
            let once = reduce(&g, &sel, &a);
            assert_eq!(reduce(&g, &sel, &once), once);
        }
    }

    #[test]
    fn reduce_commutes_with_star_without_summation_rewrites() {
        let (g, sel) = fan();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut covered = 0;
        for _ in 0..500 {
            let a = random_element(&g, &mut rng, 3, 4);
            let (reduced, stats) = reduce_with_stats(&g, &sel, &a);
            let (star_reduced, star_stats) = reduce_with_stats(&g, &sel, &a.star());
            if stats.s_rewrites == 0 && star_stats.s_rewrites == 0 {
                assert_eq!(star_reduced, reduced.star());
                covered += 1;
            }
        }
        assert!(covered > 100, "too few summation-free samples: {covered}");
    }

    #[test]
    fn spanning_set_small_bounds() {
        let (g, sel) = fan();
        let bound0 = spanning_set(&g, &sel, 0).unwrap();
        assert_eq!(bound0.len(), 5);
        let bound1 = spanning_set(&g, &sel, 1).unwrap();
        assert_eq!(bound1.len(), 13);
        let bound2 = spanning_set(&g, &sel, 2).unwrap();
        assert_eq!(bound2.len(), 24);
        assert!(bound2.contains(&elem(&g, "e1.e1^")));
        assert!(!bound2.contains(&elem(&g, "e3.e3^")));
        assert!(bound2.contains(&elem(&g, "e4.e4^")));
        assert!(bound2.contains(&elem(&g, "e1^.e3")));
        assert!(!bound2.contains(&elem(&g, "e1^.e2")));
    }

    #[test]
    fn spanning_set_words_are_irreducible() {
        let (g, sel) = fan();
        for element in spanning_set(&g, &sel, 3).unwrap() {
            assert_eq!(reduce(&g, &sel, &element), element);
        }
    }

    #[test]
    fn spanning_set_respects_overridden_selection() {
        let (g, _) = fan();
        let gid = GroupId { vertex: VertexId(0), index: 1 };
        let sel = SelectedEdges::with_overrides(&g, &[(gid, EdgeId(3))]).unwrap();
        let bound2 = spanning_set(&g, &sel, 2).unwrap();
        assert!(bound2.contains(&elem(&g, "e3.e3^")));
        assert!(!bound2.contains(&elem(&g, "e4.e4^")));
    }

    #[test]
    fn spanning_set_rejects_graphs_outside_the_class() {
        let text = r#"{
            "vertices": ["v0", "v1"],
            "edges": [
                { "name": "a", "source": "v0", "range": "v1" },
                { "name": "b", "source": "v0", "range": "v1" }
            ],
            "groups": { "v0": [["a", "b"]] },
            "S": []
        }"#;
        let g = SeparatedGraph::load(text).unwrap();
        let sel = SelectedEdges::first_edges(&g);
        assert!(spanning_set(&g, &sel, 2).is_err());
    }

    #[test]
    fn selection_overrides_are_validated() {
        let (g, _) = fan();
        let outside = GroupId { vertex: VertexId(0), index: 0 };
        assert_eq!(
            SelectedEdges::with_overrides(&g, &[(outside, EdgeId(0))]),
            Err(SelectionError::NotInS { group: outside })
        );
        let in_s = GroupId { vertex: VertexId(0), index: 1 };
        assert_eq!(
            SelectedEdges::with_overrides(&g, &[(in_s, EdgeId(0))]),
            Err(SelectionError::ForeignEdge { group: in_s, edge: "e1".into() })
        );
    }

    #[test]
    fn commutator_sample_shapes() {
        let (g, _) = fan();
        let sample = commutator_sample(&g, 1);
        // one generator per ordered pair of one-letter semigroup words
        assert_eq!(sample.len(), 64);
        // self-commutators vanish after collection
        let zeros = sample.iter().filter(|e| e.is_zero()).count();
        assert_eq!(zeros, 8);
        // nonzero commutators come in +/- pairs: 28 unordered distinct pairs
        assert_eq!((sample.len() - zeros) / 2, 28);
        // the plain-edge subfamily: one nonzero generator per unordered pair
        // of distinct edges
        let mut edge_pairs = 0;
        let names = ["e1", "e2", "e3", "e4"];
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                let forward = elem(&g, &format!("{a}.{a}^.{b}.{b}^"));
                let backward = elem(&g, &format!("{b}.{b}^.{a}.{a}^"));
                let commutator = forward.sub(&backward);
                assert!(!commutator.is_zero());
                assert!(sample.contains(&commutator));
                edge_pairs += 1;
            }
        }
        assert_eq!(edge_pairs, 6);
    }

    #[test]
    fn defining_relations_counts() {
        let (g, _) = fan();
        let relations = defining_relations(&g);
        // 25 vertex pairs + 16 unit absorptions + 8 ghost-edge pairs + 1 summation
        assert_eq!(relations.len(), 25 + 16 + 8 + 1);
    }

    #[test]
    fn parse_and_display_round_trip() {
        let (g, _) = fan();
        for text in ["e1.e1^ + e2.e2^ - v0", "3/2*e1.e1^.v0", "-e3^ + 5*v2"] {
            let parsed = elem(&g, text);
            let rendered = parsed.display(&g).to_string();
            assert_eq!(elem(&g, &rendered), parsed, "round trip failed for {text}");
        }
        // terms render in length-lexicographic order
        assert_eq!(
            elem(&g, "e1.e1^+e2.e2^-v0").display(&g).to_string(),
            "-v0 + e1.e1^ + e2.e2^"
        );
    }

    #[test]
    fn parser_reports_positions() {
        let (g, _) = fan();
        let err = parse_element(&g, "e1 + zz").unwrap_err();
        assert_eq!(err.pos, 5);
        assert!(err.message.contains("zz"));
        let err = parse_element(&g, "v0^").unwrap_err();
        assert_eq!(err.pos, 0);
        let err = parse_element(&g, "").unwrap_err();
        assert!(err.message.contains("empty"));
        let err = parse_element(&g, "e1 & e2").unwrap_err();
        assert_eq!(err.pos, 3);
    }

    #[test]
    fn parser_handles_coefficients() {
        let (g, _) = fan();
        let x = elem(&g, "3/2*e1 - 2*e2 + e3");
        let coeffs: Vec<Rational> = x.terms().map(|(_, c)| c.clone()).collect();
        assert_eq!(coeffs, vec![rat(3, 2), int(-2), int(1)]);
        // like terms collect and cancel
        assert!(elem(&g, "e1 - e1").is_zero());
        assert_eq!(elem(&g, "1/2*e1 + 1/2*e1"), elem(&g, "e1"));
    }
}
