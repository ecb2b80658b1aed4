//! Shared fixtures for the integration suites: the shipped fan graph and a
//! seeded generator of random valid separated graphs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use leavitt_core::graph::{Edge, EdgeId, GroupId, SeparatedGraph, VertexId};

pub const FAN_GRAPH_JSON: &str = include_str!("../../../../golden/example1.json");

pub fn fan_graph() -> SeparatedGraph {
    SeparatedGraph::load(FAN_GRAPH_JSON).expect("the shipped graph is valid")
}

/// A random valid separated graph: arbitrary sources and ranges (loops
/// allowed), a random partition of each vertex's outgoing edges, and each
/// group placed in `S` with probability one half.
pub fn random_valid_graph<R: Rng>(rng: &mut R, max_vertices: usize, max_edges: usize) -> SeparatedGraph {
    let vertex_count = rng.gen_range(2..=max_vertices);
    let edge_count = rng.gen_range(1..=max_edges);
    let vertices: Vec<String> = (0..vertex_count).map(|i| format!("v{i}")).collect();
    let edges: Vec<Edge> = (0..edge_count)
        .map(|i| Edge {
            name: format!("e{i}"),
            source: VertexId(rng.gen_range(0..vertex_count)),
            range: VertexId(rng.gen_range(0..vertex_count)),
        })
        .collect();
    let mut groups = vec![Vec::new(); vertex_count];
    for v in 0..vertex_count {
        let mut outgoing: Vec<EdgeId> = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.source == VertexId(v))
            .map(|(i, _)| EdgeId(i))
            .collect();
        if outgoing.is_empty() {
            continue;
        }
        outgoing.shuffle(rng);
        let group_count = rng.gen_range(1..=outgoing.len());
        let mut parts: Vec<Vec<EdgeId>> = vec![Vec::new(); group_count];
        for (i, e) in outgoing.into_iter().enumerate() {
            if i < group_count {
                parts[i].push(e);
            } else {
                parts[rng.gen_range(0..group_count)].push(e);
            }
        }
        groups[v] = parts;
    }
    let mut s_members = BTreeSet::new();
    for (v, per_vertex) in groups.iter().enumerate() {
        for index in 0..per_vertex.len() {
            if rng.gen_bool(0.5) {
                s_members.insert(GroupId {
                    vertex: VertexId(v),
                    index,
                });
            }
        }
    }
    let graph = SeparatedGraph::from_parts(vertices, edges, groups, s_members)
        .expect("generated names are unique");
    assert!(graph.validate().is_empty(), "generator must produce valid graphs");
    graph
}

/// The fixed family of twenty random graphs used across the acceptance
/// criteria, up to 8 vertices and 12 edges each with mixed `S` membership.
pub fn acceptance_graphs() -> Vec<SeparatedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    (0..20).map(|_| random_valid_graph(&mut rng, 8, 12)).collect()
}
