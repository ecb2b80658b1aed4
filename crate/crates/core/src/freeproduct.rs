//! Color decomposition of a separated graph and the presentation-level check
//! that the algebra is the amalgamated free product of its per-group factor
//! algebras, glued along shared vertex idempotents.
//!
//! Each group `X` of the separation yields a factor: a copy of the vertex
//! set, the edges of `X` (all sharing one source), and the group's own
//! relations. The amalgamation identifies the vertex copies across factors.
//! The product's term model is realized by rewriting every vertex copy to a
//! fixed representative color and reusing the ambient rewriting engine; the
//! generator maps in both directions are checked on every relation instance.

use std::collections::BTreeSet;

use num::{One, Zero};

use crate::algebra::{defining_relations, reduce, Element, Generator, Monomial, SelectedEdges};
use crate::graph::{Edge, EdgeId, GroupId, SeparatedGraph, VertexId};
use crate::rational::Rational;

/// One factor of the decomposition: the group it came from, its single-group
/// separated graph over a copy of the vertex set, and whether the summation
/// relation applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorFactor {
    pub group: GroupId,
    pub graph: SeparatedGraph,
    pub in_s: bool,
}

/// One generator of the amalgamation ideal: the copies of `vertex` in two
/// factors are identified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Identification {
    pub vertex: VertexId,
    pub color_a: usize,
    pub color_b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AmalgamationData {
    pub identifications: Vec<Identification>,
}

/// Splits the graph into one factor per group, in declaration order, plus
/// the identification pairs for every vertex across every pair of colors.
pub fn decompose(g: &SeparatedGraph) -> (Vec<ColorFactor>, AmalgamationData) {
    let vertices: Vec<String> = g.vertex_ids().map(|v| g.vertex_name(v).to_owned()).collect();
    let mut factors = Vec::new();
    for gid in g.all_groups() {
        let edges: Vec<Edge> = g
            .group_edges(gid)
            .iter()
            .map(|&e| g.edge(e).clone())
            .collect();
        let mut groups = vec![Vec::new(); vertices.len()];
        groups[gid.vertex.0] = vec![(0..edges.len()).map(EdgeId).collect()];
        let in_s = g.in_s(gid);
        let s_members: BTreeSet<GroupId> = if in_s {
            std::iter::once(GroupId {
                vertex: gid.vertex,
                index: 0,
            })
            .collect()
        } else {
            BTreeSet::new()
        };
        let graph = SeparatedGraph::from_parts(vertices.clone(), edges, groups, s_members)
            .expect("factor graphs reuse validated names");
        debug_assert!(graph.validate().is_empty());
        factors.push(ColorFactor {
            group: gid,
            graph,
            in_s,
        });
    }
    let mut identifications = Vec::new();
    for v in g.vertex_ids() {
        for a in 0..factors.len() {
            for b in (a + 1)..factors.len() {
                identifications.push(Identification {
                    vertex: v,
                    color_a: a,
                    color_b: b,
                });
            }
        }
    }
    (factors, AmalgamationData { identifications })
}

/// A generator of the free product: an edge or ghost of some factor, or a
/// per-factor vertex copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FpGenerator {
    VertexCopy(VertexId, usize),
    Edge(EdgeId),
    Ghost(EdgeId),
}

/// An unreduced formal combination of free-product words.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FpElement {
    terms: Vec<(Rational, Vec<FpGenerator>)>,
}

impl FpElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(coefficient: Rational, word: Vec<FpGenerator>) -> Self {
        Self {
            terms: vec![(coefficient, word)],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self { terms }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|(c, w)| (-c.clone(), w.clone())));
        Self { terms }
    }

    /// The image of an ambient element under the canonical map: vertices go
    /// to their copy in the representative factor, edges and ghosts to
    /// themselves inside their own factor.
    pub fn from_ambient(x: &Element, representative_color: usize) -> Self {
        let terms = x
            .terms()
            .map(|(m, c)| {
                let word = m
                    .word()
                    .iter()
                    .map(|gen| match gen {
                        Generator::Vertex(v) => FpGenerator::VertexCopy(*v, representative_color),
                        Generator::Edge(e) => FpGenerator::Edge(*e),
                        Generator::Ghost(e) => FpGenerator::Ghost(*e),
                    })
                    .collect();
                (c.clone(), word)
            })
            .collect();
        Self { terms }
    }

    /// The amalgamation rewrite: every vertex copy collapses to the shared
    /// idempotent, after which the word lives in the ambient algebra.
    pub fn normalize_to_ambient(&self) -> Element {
        let mut out = Element::zero();
        for (coefficient, word) in &self.terms {
            if word.is_empty() {
                assert!(coefficient.is_zero(), "scalars have no ambient image");
                continue;
            }
            let ambient = word
                .iter()
                .map(|gen| match gen {
                    FpGenerator::VertexCopy(v, _) => Generator::Vertex(*v),
                    FpGenerator::Edge(e) => Generator::Edge(*e),
                    FpGenerator::Ghost(e) => Generator::Ghost(*e),
                })
                .collect();
            out.add_term(Monomial::new(ambient), coefficient.clone());
        }
        out
    }
}

/// Reduction in the free-product term model: identify vertex copies, then
/// apply the per-factor relations (which, color by color, are exactly the
/// ambient rewrite rules).
pub fn fp_reduce(g: &SeparatedGraph, sel: &SelectedEdges, x: &FpElement) -> Element {
    reduce(g, sel, &x.normalize_to_ambient())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoReport {
    pub forward_checks: usize,
    pub backward_checks: usize,
    pub roundtrip_checks: usize,
    pub failures: Vec<String>,
}

impl IsoReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Verifies the isomorphism at presentation level:
///
/// * forward: the image of every ambient defining relation reduces to zero
///   in the free-product term model;
/// * backward: the image of every factor relation and every identification
///   generator reduces to zero in the ambient algebra;
/// * round trips: the generator maps invert each other (exactly on ambient
///   generators, modulo identification on vertex copies).
pub fn check_iso_on_relations(
    g: &SeparatedGraph,
    factors: &[ColorFactor],
    amalgamation: &AmalgamationData,
    sel: &SelectedEdges,
) -> IsoReport {
    let mut report = IsoReport {
        forward_checks: 0,
        backward_checks: 0,
        roundtrip_checks: 0,
        failures: Vec::new(),
    };
    if factors.is_empty() {
        // no groups means no factor algebras; nothing to compare
        return report;
    }

    for (label, relation) in defining_relations(g) {
        report.forward_checks += 1;
        let image = FpElement::from_ambient(&relation, 0);
        if !fp_reduce(g, sel, &image).is_zero() {
            report
                .failures
                .push(format!("forward {label}: image does not vanish in the product"));
        }
    }

    for (color, factor) in factors.iter().enumerate() {
        for (label, relation) in defining_relations(&factor.graph) {
            report.backward_checks += 1;
            let pulled = pull_back(g, factor, &relation);
            if !reduce(g, sel, &pulled).is_zero() {
                report
                    .failures
                    .push(format!("backward factor {color} {label}: image does not vanish"));
            }
        }
    }
    for ident in &amalgamation.identifications {
        report.backward_checks += 1;
        let difference = FpElement::term(
            Rational::one(),
            vec![FpGenerator::VertexCopy(ident.vertex, ident.color_a)],
        )
        .sub(&FpElement::term(
            Rational::one(),
            vec![FpGenerator::VertexCopy(ident.vertex, ident.color_b)],
        ));
        if !fp_reduce(g, sel, &difference).is_zero() {
            report.failures.push(format!(
                "identification of vertex {} across colors {} and {} does not vanish",
                g.vertex_name(ident.vertex),
                ident.color_a,
                ident.color_b
            ));
        }
    }

    // round trip on ambient generators: psi then its inverse is the identity
    for v in g.vertex_ids() {
        report.roundtrip_checks += 1;
        let image = FpElement::from_ambient(&Element::vertex(v), 0);
        if image.normalize_to_ambient() != Element::vertex(v) {
            report
                .failures
                .push(format!("round trip failed on vertex {}", g.vertex_name(v)));
        }
    }
    for e in g.edge_ids() {
        report.roundtrip_checks += 1;
        let image = FpElement::from_ambient(&Element::edge(e), 0);
        if image.normalize_to_ambient() != Element::edge(e) {
            report
                .failures
                .push(format!("round trip failed on edge {}", g.edge_name(e)));
        }
    }
    // round trip on factor vertex copies: inverse then psi equals the
    // original modulo identification
    for (color, _) in factors.iter().enumerate() {
        for v in g.vertex_ids() {
            report.roundtrip_checks += 1;
            let copy = FpElement::term(Rational::one(), vec![FpGenerator::VertexCopy(v, color)]);
            let back = copy.normalize_to_ambient();
            let forward = FpElement::from_ambient(&back, 0);
            if forward.normalize_to_ambient() != copy.normalize_to_ambient() {
                report.failures.push(format!(
                    "round trip failed on vertex copy {}@{color}",
                    g.vertex_name(v)
                ));
            }
        }
    }
    report
}

/// The inverse generator map on one factor: edges by name, vertex copies to
/// the shared vertex.
fn pull_back(g: &SeparatedGraph, factor: &ColorFactor, x: &Element) -> Element {
    let mut out = Element::zero();
    for (m, c) in x.terms() {
        let word = m
            .word()
            .iter()
            .map(|gen| match gen {
                Generator::Vertex(v) => Generator::Vertex(*v),
                Generator::Edge(e) => Generator::Edge(
                    g.edge_id(factor.graph.edge_name(*e))
                        .expect("factor edges exist in the ambient graph"),
                ),
                Generator::Ghost(e) => Generator::Ghost(
                    g.edge_id(factor.graph.edge_name(*e))
                        .expect("factor edges exist in the ambient graph"),
                ),
            })
            .collect();
        out.add_term(Monomial::new(word), c.clone());
    }
    out
}
