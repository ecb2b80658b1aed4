//! The representation of algebra elements as operators on finitely supported
//! rational-valued functions, together with an exact decision procedure for
//! operator vanishing.
//!
//! Every generator acts on a delta function by a partial injective
//! piecewise-affine map with rational breakpoints: a vertex acts as the
//! identity on its interval, an edge by its bijection `f_e`, and a ghost edge
//! by the inverse of `f_e`. A monomial therefore acts by one such map, and an
//! element by a finite rational combination of them.
//!
//! Soundness of the zero decision: collect every domain breakpoint of the
//! monomial maps. On each cell between consecutive breakpoints every map is
//! either undefined or affine, so the pattern of coincidences among the image
//! points `g_w(p)` is constant except at the finitely many points where two
//! non-identical affine pieces cross. Evaluating the combination at every
//! breakpoint, at every crossing point, and at one interior point of every
//! crossing-free segment between them therefore exhausts all possible
//! cancellation patterns; the combination vanishes at those sample points if
//! and only if it vanishes at every rational point. Vanishing is decided on
//! the finitely supported module only.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    random_coefficient, random_element, reduce, defining_relations, spanning_set, Element,
    Generator, Monomial, SelectedEdges,
};
use crate::branching::BranchingSystem;
use crate::graph::{FaithfulClassError, SeparatedGraph};
use crate::interval::{IntervalUnion, PiecewiseLinearMap};
use crate::rational::{midpoint, Rational};

/// A finitely supported rational-valued function on rational points.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DeltaVector {
    support: BTreeMap<Rational, Rational>,
}

impl DeltaVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The delta function at `point`.
    pub fn delta(point: Rational) -> Self {
        let mut out = Self::zero();
        out.add_point(point, Rational::one());
        out
    }

    pub fn add_point(&mut self, point: Rational, coefficient: Rational) {
        if coefficient.is_zero() {
            return;
        }
        match self.support.entry(point) {
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

    pub fn add_scaled(&self, other: &Self, factor: &Rational) -> Self {
        let mut out = self.clone();
        for (p, c) in other.support() {
            out.add_point(p.clone(), c * factor);
        }
        out
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        Self {
            support: self
                .support
                .iter()
                .map(|(p, c)| (p.clone(), c * factor))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.support.iter()
    }

    pub fn coefficient(&self, point: &Rational) -> Option<&Rational> {
        self.support.get(point)
    }
}

impl fmt::Display for DeltaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.support.is_empty() {
            return write!(f, "0");
        }
        for (i, (point, coefficient)) in self.support.iter().enumerate() {
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
            write!(f, "delta({point})")?;
        }
        Ok(())
    }
}

/// The point action of a single generator: vertex as restricted identity,
/// edge as `f_e`, ghost edge as `f_e` inverted.
pub fn act_generator(gen: Generator, p: &Rational, bs: &BranchingSystem) -> Option<Rational> {
    match gen {
        Generator::Vertex(v) => bs.d(v).contains(p).then(|| p.clone()),
        Generator::Edge(e) => bs.f(e).apply(p),
        Generator::Ghost(e) => bs.f(e).invert().apply(p),
    }
}

/// Applies an element to a finitely supported function, composing generator
/// actions right to left and collecting like points.
pub fn apply(x: &Element, phi: &DeltaVector, bs: &BranchingSystem) -> DeltaVector {
    let mut out = DeltaVector::zero();
    for (monomial, coefficient) in x.terms() {
        'points: for (p, weight) in phi.support() {
            let mut q = p.clone();
            for gen in monomial.word().iter().rev() {
                match act_generator(*gen, &q, bs) {
                    Some(next) => q = next,
                    None => continue 'points,
                }
            }
            out.add_point(q, coefficient * weight);
        }
    }
    out
}

/// The exact partial piecewise-affine map realizing one monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialAction {
    map: PiecewiseLinearMap,
}

impl MonomialAction {
    pub fn map(&self) -> &PiecewiseLinearMap {
        &self.map
    }

    pub fn into_map(self) -> PiecewiseLinearMap {
        self.map
    }

    pub fn defined_domain(&self) -> IntervalUnion {
        self.map.domain()
    }

    pub fn apply_point(&self, p: &Rational) -> Option<Rational> {
        self.map.apply(p)
    }
}

fn generator_map(gen: Generator, bs: &BranchingSystem) -> PiecewiseLinearMap {
    match gen {
        Generator::Vertex(v) => PiecewiseLinearMap::identity_on(&bs.d_union(v)),
        Generator::Edge(e) => bs.f(e).clone(),
        Generator::Ghost(e) => bs.f(e).invert(),
    }
}

/// Symbolic composition of the generator maps of a word, right to left,
/// refining domains so every piece stays affine with rational breakpoints.
pub fn monomial_action(m: &Monomial, bs: &BranchingSystem) -> MonomialAction {
    let mut rev = m.word().iter().rev();
    let first = generator_map(*rev.next().expect("monomials are nonempty"), bs);
    let map = rev.fold(first, |acc, gen| generator_map(*gen, bs).compose(&acc));
    MonomialAction { map }
}

/// Outcome of the vanishing decision: a definite zero, or a rational witness
/// point whose image is nonzero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZeroDecision {
    Zero,
    NonZero { witness: Rational, image: DeltaVector },
}

impl ZeroDecision {
    pub fn is_zero(&self) -> bool {
        matches!(self, ZeroDecision::Zero)
    }
}

/// Sample points that exhaust every cancellation pattern of the maps: all
/// domain breakpoints, all pairwise crossing points inside each breakpoint
/// cell, and one interior point of each crossing-free segment.
fn sample_points(maps: &[PiecewiseLinearMap]) -> Vec<Rational> {
    let mut breakpoints: BTreeSet<Rational> = BTreeSet::new();
    for map in maps {
        for piece in map.pieces() {
            breakpoints.insert(piece.domain().lo().clone());
            breakpoints.insert(piece.domain().hi().clone());
        }
    }
    let mut samples: BTreeSet<Rational> = breakpoints.clone();
    let cuts: Vec<&Rational> = breakpoints.iter().collect();
    for window in cuts.windows(2) {
        let (lo, hi) = (window[0], window[1]);
        let mid = midpoint(lo, hi);
        // each piece either covers the whole cell or misses it
        let affine: Vec<(&Rational, &Rational)> = maps
            .iter()
            .filter_map(|map| map.piece_at(&mid))
            .map(|piece| (piece.slope(), piece.offset()))
            .collect();
        let mut specials: BTreeSet<Rational> = BTreeSet::new();
        for (i, &(s1, o1)) in affine.iter().enumerate() {
            for &(s2, o2) in &affine[i + 1..] {
                if s1 != s2 {
                    let crossing = (o2 - o1) / (s1 - s2);
                    if &crossing > lo && &crossing < hi {
                        specials.insert(crossing);
                    }
                }
            }
        }
        let mut boundary: Vec<Rational> = Vec::with_capacity(specials.len() + 2);
        boundary.push(lo.clone());
        boundary.extend(specials.iter().cloned());
        boundary.push(hi.clone());
        for segment in boundary.windows(2) {
            samples.insert(midpoint(&segment[0], &segment[1]));
        }
        samples.extend(specials);
    }
    samples.into_iter().collect()
}

fn evaluate(terms: &[(Rational, PiecewiseLinearMap)], p: &Rational) -> DeltaVector {
    let mut out = DeltaVector::zero();
    for (coefficient, map) in terms {
        if let Some(q) = map.apply(p) {
            out.add_point(q, coefficient.clone());
        }
    }
    out
}

/// Decides exactly whether the element acts as the zero operator on all
/// finitely supported functions. Returns the smallest sampled witness point
/// with its nonzero image otherwise.
pub fn is_zero(x: &Element, bs: &BranchingSystem) -> ZeroDecision {
    let terms: Vec<(Rational, PiecewiseLinearMap)> = x
        .terms()
        .map(|(m, c)| (c.clone(), monomial_action(m, bs).into_map()))
        .collect();
    let maps: Vec<PiecewiseLinearMap> = terms.iter().map(|(_, m)| m.clone()).collect();
    for p in sample_points(&maps) {
        let image = evaluate(&terms, &p);
        if !image.is_zero() {
            return ZeroDecision::NonZero { witness: p, image };
        }
    }
    ZeroDecision::Zero
}

/// Result of checking every defining relation as an exact operator identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl RelationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies that the representation kills every defining relation of the
/// algebra, including vertex idempotence and orthogonality.
pub fn relation_check(g: &SeparatedGraph, bs: &BranchingSystem) -> RelationReport {
    let relations = defining_relations(g);
    let checks = relations.len();
    let mut failures = Vec::new();
    for (label, element) in &relations {
        if let ZeroDecision::NonZero { witness, image } = is_zero(element, bs) {
            failures.push(format!("{label}: image {image} at witness {witness}"));
        }
    }
    RelationReport { checks, failures }
}

/// Outcome of the randomized faithfulness harness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialReport {
    pub forward_trials: usize,
    pub forward_nonzero: usize,
    pub converse_trials: usize,
    pub converse_zero: usize,
    pub counterexamples: Vec<String>,
}

impl TrialReport {
    pub fn is_ok(&self) -> bool {
        self.forward_nonzero == self.forward_trials && self.converse_zero == self.converse_trials
    }
}

/// Randomized faithfulness check on a graph with one common source,
/// injective range and no loops: nonzero combinations of the irreducible
/// spanning words must act nontrivially, and elements that reduce to zero
/// must act trivially.
pub fn faithfulness_trial(
    g: &SeparatedGraph,
    bs: &BranchingSystem,
    sel: &SelectedEdges,
    length_bound: usize,
    trials: usize,
    seed: u64,
) -> Result<TrialReport, FaithfulClassError> {
    let spanning = spanning_set(g, sel, length_bound)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = TrialReport {
        forward_trials: trials,
        forward_nonzero: 0,
        converse_trials: trials,
        converse_zero: 0,
        counterexamples: Vec::new(),
    };
    for _ in 0..trials {
        let x = loop {
            let k = rand::Rng::gen_range(&mut rng, 1..=spanning.len().min(5));
            let picked = rand::seq::index::sample(&mut rng, spanning.len(), k);
            let mut x = Element::zero();
            for idx in picked.iter() {
                x = x.add(&spanning[idx].scale(&random_coefficient(&mut rng)));
            }
            if !x.is_zero() {
                break x;
            }
        };
        match is_zero(&x, bs) {
            ZeroDecision::NonZero { .. } => report.forward_nonzero += 1,
            ZeroDecision::Zero => report
                .counterexamples
                .push(format!("vanishing spanning combination: {}", x.display(g))),
        }
    }
    for _ in 0..trials {
        let x = loop {
            let raw = random_element(g, &mut rng, 3, 4);
            let candidate = raw.sub(&reduce(g, sel, &raw));
            if !candidate.is_zero() {
                break candidate;
            }
        };
        match is_zero(&x, bs) {
            ZeroDecision::Zero => report.converse_zero += 1,
            ZeroDecision::NonZero { witness, image } => report.counterexamples.push(format!(
                "reducible element acts nontrivially: {} maps delta({witness}) to {image}",
                x.display(g)
            )),
        }
    }
    Ok(report)
}

/// Verifies the non-vanishing statements that hold in every algebra of a
/// valid graph: edges and vertices act nontrivially, ghost-edge products
/// across distinct groups at one vertex act nontrivially, the range sum of a
/// group outside `S` differs from its vertex, and range sums of distinct
/// groups outside `S` differ from each other.
pub fn nonvanishing_checks(g: &SeparatedGraph, bs: &BranchingSystem) -> RelationReport {
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut expect_nonzero = |element: &Element, label: String| {
        checks += 1;
        if is_zero(element, bs).is_zero() {
            failures.push(format!("{label} acts as zero"));
        }
    };
    for e in g.edge_ids() {
        expect_nonzero(&Element::edge(e), format!("edge {}", g.edge_name(e)));
    }
    for v in g.vertex_ids() {
        expect_nonzero(&Element::vertex(v), format!("vertex {}", g.vertex_name(v)));
    }
    for v in g.vertex_ids() {
        let group_count = g.groups_at(v).len();
        for a in 0..group_count {
            for b in 0..group_count {
                if a == b {
                    continue;
                }
                for &e in g.group_edges(crate::graph::GroupId { vertex: v, index: a }) {
                    for &f in g.group_edges(crate::graph::GroupId { vertex: v, index: b }) {
                        let product = Element::ghost(e).multiply(&Element::edge(f));
                        expect_nonzero(
                            &product,
                            format!("cross-group {}^.{}", g.edge_name(e), g.edge_name(f)),
                        );
                    }
                }
            }
        }
    }
    let range_sum = |gid: crate::graph::GroupId| {
        g.group_edges(gid).iter().fold(Element::zero(), |acc, &e| {
            acc.add(&Element::edge(e).multiply(&Element::ghost(e)))
        })
    };
    let outside_s: Vec<crate::graph::GroupId> =
        g.all_groups().filter(|&gid| !g.in_s(gid)).collect();
    for &gid in &outside_s {
        let strict = range_sum(gid).sub(&Element::vertex(gid.vertex));
        expect_nonzero(&strict, format!("range sum of group {gid} against its vertex"));
    }
    for (i, &a) in outside_s.iter().enumerate() {
        for &b in &outside_s[i + 1..] {
            let difference = range_sum(a).sub(&range_sum(b));
            expect_nonzero(&difference, format!("range sums of groups {a} and {b}"));
        }
    }
    RelationReport { checks, failures }
}

/// Exact rank of the operator family realized by `words`, computed over the
/// sampling basis: one coordinate per (sample point, image point) pair.
pub fn image_rank(words: &[Monomial], bs: &BranchingSystem) -> usize {
    let maps: Vec<PiecewiseLinearMap> = words
        .iter()
        .map(|w| monomial_action(w, bs).into_map())
        .collect();
    let samples = sample_points(&maps);
    let mut column_index: BTreeMap<(Rational, Rational), usize> = BTreeMap::new();
    let mut rows: Vec<BTreeMap<usize, Rational>> = Vec::new();
    for map in &maps {
        let mut row = BTreeMap::new();
        for p in &samples {
            if let Some(q) = map.apply(p) {
                let next = column_index.len();
                let column = *column_index.entry((p.clone(), q)).or_insert(next);
                row.insert(column, Rational::one());
            }
        }
        rows.push(row);
    }
    rank_of_sparse_rows(rows)
}

/// Whether the operators realized by `words` are linearly independent.
pub fn images_independent(words: &[Monomial], bs: &BranchingSystem) -> bool {
    image_rank(words, bs) == words.len()
}

/// Fraction-free enough for exact rationals: plain Gaussian elimination with
/// normalized pivot rows, reducing each row by the pivots in creation order.
fn rank_of_sparse_rows(rows: Vec<BTreeMap<usize, Rational>>) -> usize {
    let mut pivots: Vec<(usize, BTreeMap<usize, Rational>)> = Vec::new();
    for mut row in rows {
        for (pivot_column, pivot_row) in &pivots {
            if let Some(factor) = row.get(pivot_column).cloned() {
                for (column, value) in pivot_row {
                    let delta = value * &factor;
                    match row.entry(*column) {
                        std::collections::btree_map::Entry::Vacant(slot) => {
                            slot.insert(-delta);
                        }
                        std::collections::btree_map::Entry::Occupied(mut slot) => {
                            *slot.get_mut() -= delta;
                            if slot.get().is_zero() {
                                slot.remove();
                            }
                        }
                    }
                }
            }
        }
        if let Some((&column, value)) = row.iter().next() {
            let inverse = Rational::one() / value;
            let normalized: BTreeMap<usize, Rational> =
                row.iter().map(|(c, v)| (*c, v * &inverse)).collect();
            pivots.push((column, normalized));
        }
    }
    pivots.len()
}
