//! Cross-module invariants: the representation is a homomorphism, the
//! constructed systems are deterministic and well-measured, and the on-disk
//! graph format round-trips.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use leavitt_core::algebra::{random_coefficient, random_element, Element};
use leavitt_core::branching::construct;
use leavitt_core::graph::SeparatedGraph;
use leavitt_core::rational::{rat, Rational};
use leavitt_core::representation::{apply, DeltaVector};

use common::{acceptance_graphs, fan_graph, random_valid_graph};

fn sample_points(rng: &mut ChaCha8Rng, vertex_count: usize, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| {
            let denominator = rng.gen_range(1..=20);
            let numerator = rng.gen_range(0..vertex_count as i64 * denominator);
            rat(numerator, denominator)
        })
        .collect()
}

#[test]
fn representation_is_multiplicative_on_random_pairs() {
    let g = fan_graph();
    let bs = construct(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..500 {
        let a = random_element(&g, &mut rng, 2, 3);
        let b = random_element(&g, &mut rng, 2, 3);
        let product = a.multiply(&b);
        for p in sample_points(&mut rng, g.vertex_count(), 10) {
            let phi = DeltaVector::delta(p);
            let direct = apply(&product, &phi, &bs);
            let composed = apply(&a, &apply(&b, &phi, &bs), &bs);
            assert_eq!(direct, composed);
        }
    }
}

#[test]
fn representation_is_linear() {
    let g = fan_graph();
    let bs = construct(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..200 {
        let a = random_element(&g, &mut rng, 3, 3);
        let b = random_element(&g, &mut rng, 3, 3);
        let alpha = random_coefficient(&mut rng);
        let beta = random_coefficient(&mut rng);
        let mut phi = DeltaVector::zero();
        for p in sample_points(&mut rng, g.vertex_count(), 3) {
            phi.add_point(p, random_coefficient(&mut rng));
        }
        let combined = a.scale(&alpha).add(&b.scale(&beta));
        let lhs = apply(&combined, &phi, &bs);
        let rhs = apply(&a, &phi, &bs)
            .scale(&alpha)
            .add_scaled(&apply(&b, &phi, &bs), &beta);
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn ghost_edge_undoes_its_edge_pointwise() {
    let g = fan_graph();
    let bs = construct(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for e in g.edge_ids() {
        let undo = Element::ghost(e).multiply(&Element::edge(e));
        let range_vertex = Element::vertex(g.range(e));
        for p in sample_points(&mut rng, g.vertex_count(), 25) {
            let phi = DeltaVector::delta(p);
            assert_eq!(apply(&undo, &phi, &bs), apply(&range_vertex, &phi, &bs));
        }
    }
}

#[test]
fn graph_round_trips_through_the_file_format() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut graphs = vec![fan_graph()];
    for _ in 0..30 {
        graphs.push(random_valid_graph(&mut rng, 8, 12));
    }
    for g in &graphs {
        let reloaded = SeparatedGraph::load(&g.save()).expect("saved graphs reload");
        assert_eq!(&reloaded, g);
    }
}

#[test]
fn group_multiset_matches_outgoing_edges() {
    for g in acceptance_graphs() {
        let total_outgoing: usize = g.vertex_ids().map(|v| g.outgoing(v).count()).sum();
        assert_eq!(total_outgoing, g.edge_count());
        let mut grouped: Vec<_> = g
            .all_groups()
            .flat_map(|gid| g.group_edges(gid).to_vec())
            .collect();
        grouped.sort();
        let mut outgoing: Vec<_> = g
            .vertex_ids()
            .filter(|&v| !g.is_sink(v))
            .flat_map(|v| g.outgoing(v))
            .collect();
        outgoing.sort();
        assert_eq!(grouped, outgoing);
    }
}

#[test]
fn construction_is_deterministic_and_length_balanced() {
    for g in acceptance_graphs() {
        let bs = construct(&g);
        assert_eq!(bs, construct(&g), "construction must be reproducible");
        // per group: total range length = |Y| / |Y~| of the unit interval
        for gid in g.all_groups() {
            let union = bs.group_range_union(&g, gid);
            let member_count = g.group_edges(gid).len() as i64;
            let slots = member_count + i64::from(!g.in_s(gid));
            assert_eq!(union.total_length(), rat(member_count, slots));
        }
    }
}

#[test]
fn bijections_round_trip_on_random_graphs() {
    for g in acceptance_graphs() {
        let bs = construct(&g);
        for e in g.edge_ids() {
            let f = bs.f(e);
            let inv = f.invert();
            for piece in f.pieces() {
                for x in [piece.domain().lo().clone(), piece.domain().midpoint()] {
                    let y = f.apply(&x).expect("breakpoints lie in the domain");
                    assert_eq!(inv.apply(&y), Some(x));
                }
            }
        }
    }
}

#[test]
fn membership_oracle_agreement_on_constructed_sets() {
    let g = fan_graph();
    let bs = construct(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut unions: Vec<_> = g.edge_ids().map(|e| bs.r(e).clone()).collect();
    unions.push(bs.carrier().clone());
    for p in sample_points(&mut rng, g.vertex_count(), 1000) {
        for u in &unions {
            let linear = u.parts().iter().any(|part| part.contains(&p));
            assert_eq!(u.contains(&p), linear, "membership mismatch at {p}");
        }
    }
}
