//! Construction of the interval branching system of a separated graph, plus
//! machine checks for every axiom the system must satisfy.
//!
//! The construction is fully deterministic: vertex intervals are unit
//! intervals in declaration order, each group refines the current partition
//! of its vertex interval into equal-width half-open slots (with one extra
//! phantom slot, rightmost, for groups outside `S`), and every bijection
//! `f_e` is the increasing equal-width piecewise-affine map onto `R_e`.

use thiserror::Error;

use crate::graph::{EdgeId, GroupId, SeparatedGraph, VertexId};
use crate::interval::{AffinePiece, HalfOpenInterval, IntervalUnion, PiecewiseLinearMap};
use crate::rational::Rational;

/// The data `(X, {D_v}, {R_e}, {f_e})` realized over rational intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchingSystem {
    d: Vec<HalfOpenInterval>,
    r: Vec<IntervalUnion>,
    f: Vec<PiecewiseLinearMap>,
    x_carrier: IntervalUnion,
}

impl BranchingSystem {
    pub fn d(&self, v: VertexId) -> &HalfOpenInterval {
        &self.d[v.0]
    }

    pub fn d_union(&self, v: VertexId) -> IntervalUnion {
        self.d[v.0].clone().into()
    }

    pub fn r(&self, e: EdgeId) -> &IntervalUnion {
        &self.r[e.0]
    }

    pub fn f(&self, e: EdgeId) -> &PiecewiseLinearMap {
        &self.f[e.0]
    }

    /// The union of all vertex intervals.
    pub fn carrier(&self) -> &IntervalUnion {
        &self.x_carrier
    }

    /// Union of `R_e` over one group.
    pub fn group_range_union(&self, g: &SeparatedGraph, gid: GroupId) -> IntervalUnion {
        g.group_edges(gid)
            .iter()
            .fold(IntervalUnion::empty(), |acc, &e| acc.union(self.r(e)))
    }
}

/// Builds the branching system of a valid finite graph.
pub fn construct(g: &SeparatedGraph) -> BranchingSystem {
    let d: Vec<HalfOpenInterval> = g
        .vertex_ids()
        .map(|v| {
            let lo = Rational::from_integer(v.0.into());
            let hi = Rational::from_integer((v.0 + 1).into());
            HalfOpenInterval::new(lo, hi)
        })
        .collect();

    let mut r_parts: Vec<Vec<HalfOpenInterval>> = vec![Vec::new(); g.edge_count()];
    for v in g.vertex_ids() {
        let mut current: Vec<HalfOpenInterval> = vec![d[v.0].clone()];
        for (index, group) in g.groups_at(v).iter().enumerate() {
            let gid = GroupId { vertex: v, index };
            let slots = group.len() + usize::from(!g.in_s(gid));
            let mut next = Vec::with_capacity(current.len() * slots);
            for cell in &current {
                let sub = cell.split_equal(slots);
                for (k, &edge) in group.iter().enumerate() {
                    r_parts[edge.0].push(sub[k].clone());
                }
                next.extend(sub);
            }
            current = next;
        }
    }
    let r: Vec<IntervalUnion> = r_parts.into_iter().map(IntervalUnion::from_parts).collect();

    let f: Vec<PiecewiseLinearMap> = g
        .edge_ids()
        .map(|e| {
            let range_interval = &d[g.range(e).0];
            let targets = r[e.0].parts();
            let sources = range_interval.split_equal(targets.len());
            PiecewiseLinearMap::new(
                sources
                    .into_iter()
                    .zip(targets)
                    .map(|(from, onto)| AffinePiece::mapping(from, onto))
                    .collect(),
            )
        })
        .collect();

    let x_carrier = IntervalUnion::from_parts(d.clone());
    BranchingSystem { d, r, f, x_carrier }
}

/// Outcome of the axiom suite; `failures` is empty when everything holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl AxiomReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the five branching-system axioms and the three extra properties of
/// the constructed instance (group ranges meet across groups, groups outside
/// `S` cover strictly less than `D_v`, and distinct non-`S` groups have
/// distinct range unions).
pub fn verify_axioms(g: &SeparatedGraph, bs: &BranchingSystem) -> AxiomReport {
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut check = |ok: bool, label: String| {
        checks += 1;
        if !ok {
            failures.push(label);
        }
    };

    // (1) ranges within a group are pairwise disjoint
    for gid in g.all_groups() {
        let edges = g.group_edges(gid);
        for (i, &e) in edges.iter().enumerate() {
            for &d in &edges[i + 1..] {
                check(
                    bs.r(e).intersect(bs.r(d)).is_empty(),
                    format!("axiom 1: R[{}] meets R[{}]", g.edge_name(e), g.edge_name(d)),
                );
            }
        }
    }
    // (2) vertex intervals pairwise disjoint
    for u in g.vertex_ids() {
        for v in g.vertex_ids() {
            if u < v {
                check(
                    bs.d_union(u).intersect(&bs.d_union(v)).is_empty(),
                    format!("axiom 2: D[{}] meets D[{}]", g.vertex_name(u), g.vertex_name(v)),
                );
            }
        }
    }
    // (3) R_e inside the source interval
    for e in g.edge_ids() {
        check(
            bs.r(e).is_subset_of(&bs.d_union(g.source(e))),
            format!("axiom 3: R[{}] escapes D[{}]", g.edge_name(e), g.vertex_name(g.source(e))),
        );
    }
    // (4) groups in S cover their vertex interval exactly
    for gid in g.s_groups() {
        check(
            bs.group_range_union(g, gid) == bs.d_union(gid.vertex),
            format!("axiom 4: group {gid} in S does not cover D[{}]", g.vertex_name(gid.vertex)),
        );
    }
    // (5) f_e is a bijection from D_{r(e)} onto R_e
    for e in g.edge_ids() {
        check(
            bs.f(e).domain() == bs.d_union(g.range(e)),
            format!("axiom 5: f[{}] domain differs from D[{}]", g.edge_name(e), g.vertex_name(g.range(e))),
        );
        check(
            bs.f(e).image() == *bs.r(e),
            format!("axiom 5: f[{}] image differs from R[{}]", g.edge_name(e), g.edge_name(e)),
        );
    }
    // extra 1: ranges meet across distinct groups at the same vertex
    for v in g.vertex_ids() {
        let group_count = g.groups_at(v).len();
        for a in 0..group_count {
            for b in (a + 1)..group_count {
                for &e in g.group_edges(GroupId { vertex: v, index: a }) {
                    for &f in g.group_edges(GroupId { vertex: v, index: b }) {
                        check(
                            !bs.r(e).intersect(bs.r(f)).is_empty(),
                            format!("extra 1: R[{}] misses R[{}]", g.edge_name(e), g.edge_name(f)),
                        );
                    }
                }
            }
        }
    }
    // extras 2 and 3: strictness and distinctness for groups outside S
    for v in g.vertex_ids() {
        let outside: Vec<GroupId> = (0..g.groups_at(v).len())
            .map(|index| GroupId { vertex: v, index })
            .filter(|&gid| !g.in_s(gid))
            .collect();
        for &gid in &outside {
            let covered = bs.group_range_union(g, gid);
            check(
                covered.is_subset_of(&bs.d_union(v)) && covered != bs.d_union(v),
                format!("extra 2: group {gid} outside S covers all of D[{}]", g.vertex_name(v)),
            );
        }
        for (i, &a) in outside.iter().enumerate() {
            for &b in &outside[i + 1..] {
                check(
                    bs.group_range_union(g, a) != bs.group_range_union(g, b),
                    format!("extra 3: groups {a} and {b} outside S have equal range unions"),
                );
            }
        }
    }
    AxiomReport { checks, failures }
}

/// One selection inside a group: a member edge, or the complement of the
/// whole group's range union (only meaningful for groups outside `S`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pick {
    Edge(EdgeId),
    Complement,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PickError {
    #[error("group index {index} out of range at vertex {vertex}")]
    UnknownGroup { vertex: String, index: usize },
    #[error("group index {index} picked twice")]
    DuplicateGroup { index: usize },
    #[error("edge {edge} does not belong to group {index}")]
    ForeignEdge { edge: String, index: usize },
    #[error("complement picked for group {index}, which lies in S")]
    ComplementInS { index: usize },
}

/// The region `(∩ picked R_e) ∩ (∩ complements)` inside `D_v`.
///
/// With distinct groups and complements only outside `S` this region is
/// always non-empty for constructed systems; an empty pick list yields `D_v`.
pub fn r1_region(
    g: &SeparatedGraph,
    bs: &BranchingSystem,
    vertex: VertexId,
    picks: &[(usize, Pick)],
) -> Result<IntervalUnion, PickError> {
    let groups = g.groups_at(vertex);
    let mut seen = std::collections::BTreeSet::new();
    for &(index, pick) in picks {
        if index >= groups.len() {
            return Err(PickError::UnknownGroup {
                vertex: g.vertex_name(vertex).to_owned(),
                index,
            });
        }
        if !seen.insert(index) {
            return Err(PickError::DuplicateGroup { index });
        }
        let gid = GroupId { vertex, index };
        match pick {
            Pick::Edge(e) => {
                if !g.group_edges(gid).contains(&e) {
                    return Err(PickError::ForeignEdge {
                        edge: g.edge_name(e).to_owned(),
                        index,
                    });
                }
            }
            Pick::Complement => {
                if g.in_s(gid) {
                    return Err(PickError::ComplementInS { index });
                }
            }
        }
    }
    let d_v = bs.d_union(vertex);
    let mut region = d_v.clone();
    for &(index, pick) in picks {
        let gid = GroupId { vertex, index };
        let factor = match pick {
            Pick::Edge(e) => bs.r(e).clone(),
            Pick::Complement => d_v.difference(&bs.group_range_union(g, gid)),
        };
        region = region.intersect(&factor);
    }
    Ok(region)
}

/// The textual interval dump: one line per vertex interval and per edge
/// range union, then one block per bijection listing its pieces as
/// `(domain, slope, offset)`. This is the golden-file format.
pub fn render_intervals(g: &SeparatedGraph, bs: &BranchingSystem) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for v in g.vertex_ids() {
        writeln!(out, "D[{}] = {}", g.vertex_name(v), bs.d(v)).unwrap();
    }
    for e in g.edge_ids() {
        writeln!(out, "R[{}] = {}", g.edge_name(e), bs.r(e)).unwrap();
    }
    for e in g.edge_ids() {
        writeln!(out, "f[{}]:", g.edge_name(e)).unwrap();
        for piece in bs.f(e).pieces() {
            writeln!(out, "  {piece}").unwrap();
        }
    }
    out
}

/// Every pick combination at `vertex`: each group is skipped, contributes
/// one member edge, or contributes its complement when outside `S`.
pub fn pick_combinations(g: &SeparatedGraph, vertex: VertexId) -> Vec<Vec<(usize, Pick)>> {
    let mut combos: Vec<Vec<(usize, Pick)>> = vec![Vec::new()];
    for (index, group) in g.groups_at(vertex).iter().enumerate() {
        let mut options: Vec<Option<Pick>> = vec![None];
        options.extend(group.iter().map(|&e| Some(Pick::Edge(e))));
        if !g.in_s(GroupId { vertex, index }) {
            options.push(Some(Pick::Complement));
        }
        let mut next = Vec::with_capacity(combos.len() * options.len());
        for combo in &combos {
            for option in &options {
                let mut extended = combo.clone();
                if let Some(pick) = option {
                    extended.push((index, *pick));
                }
                next.push(extended);
            }
        }
        combos = next;
    }
    combos
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    const FAN_GRAPH: &str = include_str!("../../../golden/example1.json");

    fn fan() -> (SeparatedGraph, BranchingSystem) {
        let g = SeparatedGraph::load(FAN_GRAPH).unwrap();
        let bs = construct(&g);
        (g, bs)
    }

    fn union(parts: &[((i64, i64), (i64, i64))]) -> IntervalUnion {
        IntervalUnion::from_parts(
            parts
                .iter()
                .map(|&((a, b), (c, d))| HalfOpenInterval::new(rat(a, b), rat(c, d)))
                .collect(),
        )
    }

    #[test]
    fn fan_graph_intervals_match_published_values() {
        let (g, bs) = fan();
        for v in g.vertex_ids() {
            assert_eq!(bs.d(v), &HalfOpenInterval::new(int(v.0 as i64), int(v.0 as i64 + 1)));
        }
        assert_eq!(bs.r(EdgeId(0)), &union(&[((0, 1), (1, 3))]));
        assert_eq!(bs.r(EdgeId(1)), &union(&[((1, 3), (2, 3))]));
        assert_eq!(
            bs.r(EdgeId(2)),
            &union(&[((0, 1), (1, 6)), ((1, 3), (1, 2)), ((2, 3), (5, 6))])
        );
        assert_eq!(
            bs.r(EdgeId(3)),
            &union(&[((1, 6), (1, 3)), ((1, 2), (2, 3)), ((5, 6), (1, 1))])
        );
    }

    #[test]
    fn fan_graph_bijections_follow_the_equal_width_rule() {
        let (_, bs) = fan();
        let f3 = bs.f(EdgeId(2));
        assert_eq!(f3.pieces().len(), 3);
        let expected = [
            ((3, 1), (10, 3), (0, 1)),
            ((10, 3), (11, 3), (1, 3)),
            ((11, 3), (4, 1), (2, 3)),
        ];
        for (piece, &((a, b), (c, d), (lo_n, lo_d))) in f3.pieces().iter().zip(&expected) {
            assert_eq!(piece.domain(), &HalfOpenInterval::new(rat(a, b), rat(c, d)));
            assert_eq!(piece.slope(), &rat(1, 2));
            assert_eq!(piece.image().lo(), &rat(lo_n, lo_d));
        }
    }

    #[test]
    fn single_edge_graph_in_s_covers_everything() {
        let text = r#"{
            "vertices": ["v0", "v1"],
            "edges": [{ "name": "e", "source": "v0", "range": "v1" }],
            "groups": { "v0": [["e"]] },
            "S": [{ "vertex": "v0", "group_index": 0 }]
        }"#;
        let g = SeparatedGraph::load(text).unwrap();
        let bs = construct(&g);
        assert_eq!(bs.r(EdgeId(0)), &union(&[((0, 1), (1, 1))]));
        let f = bs.f(EdgeId(0));
        assert_eq!(f.pieces().len(), 1);
        assert_eq!(f.pieces()[0].slope(), &int(1));
        assert_eq!(f.pieces()[0].offset(), &int(-1));
        assert!(verify_axioms(&g, &bs).is_ok());
    }

    #[test]
    fn axioms_pass_on_the_fan_graph() {
        let (g, bs) = fan();
        let report = verify_axioms(&g, &bs);
        assert!(report.is_ok(), "failures: {:?}", report.failures);
        assert!(report.checks > 20);
    }

    #[test]
    fn strictness_region_for_the_group_outside_s() {
        let (g, bs) = fan();
        let covered = bs.group_range_union(&g, GroupId { vertex: VertexId(0), index: 0 });
        let leftover = bs.d_union(VertexId(0)).difference(&covered);
        assert_eq!(leftover, union(&[((2, 3), (1, 1))]));
    }

    #[test]
    fn r1_region_reproduces_published_value() {
        let (g, bs) = fan();
        let region = r1_region(
            &g,
            &bs,
            VertexId(0),
            &[(1, Pick::Edge(EdgeId(2))), (0, Pick::Complement)],
        )
        .unwrap();
        assert_eq!(region, union(&[((2, 3), (5, 6))]));
    }

    #[test]
    fn r1_region_edge_intersection() {
        let (g, bs) = fan();
        let region = r1_region(
            &g,
            &bs,
            VertexId(0),
            &[(0, Pick::Edge(EdgeId(0))), (1, Pick::Edge(EdgeId(2)))],
        )
        .unwrap();
        assert_eq!(region, union(&[((0, 1), (1, 6))]));
    }

    #[test]
    fn r1_region_empty_picks_gives_vertex_interval() {
        let (g, bs) = fan();
        let region = r1_region(&g, &bs, VertexId(0), &[]).unwrap();
        assert_eq!(region, bs.d_union(VertexId(0)));
    }

    #[test]
    fn r1_region_rejects_bad_picks() {
        let (g, bs) = fan();
        assert_eq!(
            r1_region(&g, &bs, VertexId(0), &[(9, Pick::Complement)]),
            Err(PickError::UnknownGroup { vertex: "v0".into(), index: 9 })
        );
        assert_eq!(
            r1_region(&g, &bs, VertexId(0), &[(1, Pick::Complement)]),
            Err(PickError::ComplementInS { index: 1 })
        );
        assert_eq!(
            r1_region(&g, &bs, VertexId(0), &[(0, Pick::Edge(EdgeId(2)))]),
            Err(PickError::ForeignEdge { edge: "e3".into(), index: 0 })
        );
        assert_eq!(
            r1_region(
                &g,
                &bs,
                VertexId(0),
                &[(0, Pick::Edge(EdgeId(0))), (0, Pick::Edge(EdgeId(1)))]
            ),
            Err(PickError::DuplicateGroup { index: 0 })
        );
    }

    #[test]
    fn full_sweep_of_pick_regions_is_nonempty() {
        // every subset of the groups at v0, every choice function, with
        // complements allowed exactly on the group outside S
        let (g, bs) = fan();
        let picks_x1 = [
            None,
            Some(Pick::Edge(EdgeId(0))),
            Some(Pick::Edge(EdgeId(1))),
            Some(Pick::Complement),
        ];
        let picks_x2 = [None, Some(Pick::Edge(EdgeId(2))), Some(Pick::Edge(EdgeId(3)))];
        let mut cases = 0;
        for a in &picks_x1 {
            for b in &picks_x2 {
                let mut picks = Vec::new();
                if let Some(p) = a {
                    picks.push((0, *p));
                }
                if let Some(p) = b {
                    picks.push((1, *p));
                }
                let region = r1_region(&g, &bs, VertexId(0), &picks).unwrap();
                assert!(!region.is_empty(), "empty region for picks {picks:?}");
                cases += 1;
            }
        }
        assert_eq!(cases, 12);
    }

    #[test]
    fn rendered_intervals_match_the_golden_file() {
        let (g, bs) = fan();
        let golden = include_str!("../../../golden/example1.intervals.txt");
        assert_eq!(render_intervals(&g, &bs), golden);
    }

    #[test]
    fn pick_combinations_cover_the_whole_lattice() {
        let (g, bs) = fan();
        let combos = pick_combinations(&g, VertexId(0));
        assert_eq!(combos.len(), 12);
        for combo in &combos {
            let region = r1_region(&g, &bs, VertexId(0), combo).unwrap();
            assert!(!region.is_empty());
        }
        // sinks admit only the empty combination
        assert_eq!(pick_combinations(&g, VertexId(1)), vec![vec![]]);
    }

    #[test]
    fn bijections_round_trip_at_breakpoints_and_midpoints() {
        let (g, bs) = fan();
        for e in g.edge_ids() {
            let f = bs.f(e);
            let inv = f.invert();
            for piece in f.pieces() {
                for x in [piece.domain().lo().clone(), piece.domain().midpoint()] {
                    let y = f.apply(&x).unwrap();
                    assert_eq!(inv.apply(&y), Some(x));
                }
            }
        }
    }

    #[test]
    fn construct_is_deterministic() {
        let g1 = SeparatedGraph::load(FAN_GRAPH).unwrap();
        let g2 = SeparatedGraph::load(FAN_GRAPH).unwrap();
        assert_eq!(construct(&g1), construct(&g2));
    }

    #[test]
    fn group_length_bookkeeping() {
        // per group: sum of range lengths = |Y| / |Y~| (group outside S gets
        // one phantom slot), taken over the unit vertex interval
        let (g, bs) = fan();
        let x1 = GroupId { vertex: VertexId(0), index: 0 };
        let x2 = GroupId { vertex: VertexId(0), index: 1 };
        assert_eq!(bs.group_range_union(&g, x1).total_length(), rat(2, 3));
        assert_eq!(bs.group_range_union(&g, x2).total_length(), int(1));
    }
}
