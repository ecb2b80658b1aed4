//! The separated-graph data model: a finite directed graph together with,
//! for each non-sink vertex, an ordered partition of its outgoing edges into
//! nonempty groups, and a designated subfamily `S` of those groups.
//!
//! Every ordering (vertices, edges, groups per vertex, edges within a group)
//! is the declaration order from the input and is preserved exactly; the
//! downstream interval construction depends on it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

/// A group of the separation: the `index`-th member of `C_v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId {
    pub vertex: VertexId,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub source: VertexId,
    pub range: VertexId,
}

/// A finite separated graph `(E, C, S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatedGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    /// Indexed by vertex: the ordered groups of `C_v`; empty for sinks.
    groups: Vec<Vec<Vec<EdgeId>>>,
    s_members: BTreeSet<GroupId>,
    /// Cache: the group containing each edge (first match when invalid).
    edge_group: Vec<Option<GroupId>>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("json parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Name(String),
    #[error("invalid separated graph: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A single failed graph invariant, naming the vertex/group/edge at fault.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("vertex {vertex}: group {group_index} is empty")]
    EmptyGroup { vertex: String, group_index: usize },
    #[error("vertex {vertex}: edge {edge} appears in more than one group")]
    GroupsOverlap { vertex: String, edge: String },
    #[error("vertex {vertex}: outgoing edge {edge} is missing from every group")]
    PartitionIncomplete { vertex: String, edge: String },
    #[error("vertex {vertex}: group {group_index} lists edge {edge} whose source is {actual_source}")]
    ForeignEdge {
        vertex: String,
        group_index: usize,
        edge: String,
        actual_source: String,
    },
    #[error("sink {vertex} declares groups")]
    GroupsAtSink { vertex: String },
    #[error("S references missing group {group_index} at vertex {vertex}")]
    UnknownSMember { vertex: String, group_index: usize },
}

/// Hypothesis report for the faithfulness harness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureReport {
    pub common_source: bool,
    pub injective_range: bool,
    pub loop_free: bool,
    pub sinks: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "graph outside the faithful class (common_source={common_source}, injective_range={injective_range}, loop_free={loop_free})"
)]
pub struct FaithfulClassError {
    pub common_source: bool,
    pub injective_range: bool,
    pub loop_free: bool,
}

impl StructureReport {
    pub fn in_faithful_class(&self) -> bool {
        self.common_source && self.injective_range && self.loop_free
    }

    pub fn require_faithful_class(&self) -> Result<(), FaithfulClassError> {
        if self.in_faithful_class() {
            Ok(())
        } else {
            Err(FaithfulClassError {
                common_source: self.common_source,
                injective_range: self.injective_range,
                loop_free: self.loop_free,
            })
        }
    }
}

// On-disk schema.
#[derive(Serialize, Deserialize)]
struct RawGraph {
    vertices: Vec<String>,
    edges: Vec<RawEdge>,
    #[serde(default)]
    groups: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(rename = "S", default)]
    s: Vec<RawSMember>,
}

#[derive(Serialize, Deserialize)]
struct RawEdge {
    name: String,
    source: String,
    range: String,
}

#[derive(Serialize, Deserialize)]
struct RawSMember {
    vertex: String,
    group_index: usize,
}

impl SeparatedGraph {
    /// Assembles a graph from resolved ids. Duplicate names and out-of-range
    /// ids are rejected here; partition invariants are left to [`validate`].
    pub fn from_parts(
        vertices: Vec<String>,
        edges: Vec<Edge>,
        groups: Vec<Vec<Vec<EdgeId>>>,
        s_members: BTreeSet<GroupId>,
    ) -> Result<Self, LoadError> {
        let mut seen = BTreeSet::new();
        for name in &vertices {
            if !seen.insert(name) {
                return Err(LoadError::Name(format!("duplicate vertex name {name}")));
            }
        }
        let mut seen = BTreeSet::new();
        for edge in &edges {
            if !seen.insert(&edge.name) {
                return Err(LoadError::Name(format!("duplicate edge name {}", edge.name)));
            }
            if edge.source.0 >= vertices.len() || edge.range.0 >= vertices.len() {
                return Err(LoadError::Name(format!("edge {} references a missing vertex", edge.name)));
            }
        }
        if groups.len() != vertices.len() {
            return Err(LoadError::Name("groups must be indexed by vertex".into()));
        }
        for per_vertex in &groups {
            for group in per_vertex {
                for edge in group {
                    if edge.0 >= edges.len() {
                        return Err(LoadError::Name(format!("group references missing edge id {}", edge.0)));
                    }
                }
            }
        }
        let mut edge_group = vec![None; edges.len()];
        for (v, per_vertex) in groups.iter().enumerate() {
            for (idx, group) in per_vertex.iter().enumerate() {
                for &edge in group {
                    edge_group[edge.0].get_or_insert(GroupId {
                        vertex: VertexId(v),
                        index: idx,
                    });
                }
            }
        }
        Ok(Self {
            vertices,
            edges,
            groups,
            s_members,
            edge_group,
        })
    }

    /// Parses the structured text format and validates the result.
    pub fn load(text: &str) -> Result<Self, LoadError> {
        let raw: RawGraph = serde_json::from_str(text)?;
        let vertex_index: BTreeMap<&str, VertexId> = raw
            .vertices
            .iter()
            .enumerate()
            .map(|(i, name)| (name.as_str(), VertexId(i)))
            .collect();
        let lookup_vertex = |name: &str| -> Result<VertexId, LoadError> {
            vertex_index
                .get(name)
                .copied()
                .ok_or_else(|| LoadError::Name(format!("unknown vertex name {name}")))
        };
        let mut edges = Vec::with_capacity(raw.edges.len());
        for raw_edge in &raw.edges {
            edges.push(Edge {
                name: raw_edge.name.clone(),
                source: lookup_vertex(&raw_edge.source)?,
                range: lookup_vertex(&raw_edge.range)?,
            });
        }
        let edge_index: BTreeMap<&str, EdgeId> = raw
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.name.as_str(), EdgeId(i)))
            .collect();
        let mut groups = vec![Vec::new(); raw.vertices.len()];
        for (vertex_name, group_lists) in &raw.groups {
            let v = lookup_vertex(vertex_name)?;
            let mut per_vertex = Vec::with_capacity(group_lists.len());
            for group in group_lists {
                let mut ids = Vec::with_capacity(group.len());
                for edge_name in group {
                    let id = edge_index
                        .get(edge_name.as_str())
                        .copied()
                        .ok_or_else(|| LoadError::Name(format!("unknown edge name {edge_name}")))?;
                    ids.push(id);
                }
                per_vertex.push(ids);
            }
            groups[v.0] = per_vertex;
        }
        let mut s_members = BTreeSet::new();
        for member in &raw.s {
            s_members.insert(GroupId {
                vertex: lookup_vertex(&member.vertex)?,
                index: member.group_index,
            });
        }
        let graph = Self::from_parts(raw.vertices, edges, groups, s_members)?;
        let violations = graph.validate();
        if violations.is_empty() {
            Ok(graph)
        } else {
            Err(LoadError::Invalid(violations))
        }
    }

    /// Serializes back to the on-disk format; `load(save(g)) == g`.
    pub fn save(&self) -> String {
        let raw = RawGraph {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge {
                    name: e.name.clone(),
                    source: self.vertex_name(e.source).to_owned(),
                    range: self.vertex_name(e.range).to_owned(),
                })
                .collect(),
            groups: self
                .groups
                .iter()
                .enumerate()
                .filter(|(_, per_vertex)| !per_vertex.is_empty())
                .map(|(v, per_vertex)| {
                    (
                        self.vertices[v].clone(),
                        per_vertex
                            .iter()
                            .map(|group| group.iter().map(|&e| self.edge_name(e).to_owned()).collect())
                            .collect(),
                    )
                })
                .collect(),
            s: self
                .s_members
                .iter()
                .map(|gid| RawSMember {
                    vertex: self.vertex_name(gid.vertex).to_owned(),
                    group_index: gid.index,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&raw).expect("graph serialization cannot fail");
        text.push('\n');
        text
    }

    /// Checks every partition invariant; an empty list means the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        for (v, per_vertex) in self.groups.iter().enumerate() {
            let vertex = VertexId(v);
            let vertex_name = self.vertices[v].clone();
            let outgoing: Vec<EdgeId> = self.outgoing(vertex).collect();
            if outgoing.is_empty() {
                if !per_vertex.is_empty() {
                    violations.push(Violation::GroupsAtSink { vertex: vertex_name });
                }
                continue;
            }
            let mut covered: BTreeMap<EdgeId, usize> = BTreeMap::new();
            for (idx, group) in per_vertex.iter().enumerate() {
                if group.is_empty() {
                    violations.push(Violation::EmptyGroup {
                        vertex: vertex_name.clone(),
                        group_index: idx,
                    });
                }
                for &edge in group {
                    if self.edges[edge.0].source != vertex {
                        violations.push(Violation::ForeignEdge {
                            vertex: vertex_name.clone(),
                            group_index: idx,
                            edge: self.edge_name(edge).to_owned(),
                            actual_source: self.vertex_name(self.edges[edge.0].source).to_owned(),
                        });
                    }
                    *covered.entry(edge).or_insert(0) += 1;
                }
            }
            for (&edge, &count) in &covered {
                if count > 1 {
                    violations.push(Violation::GroupsOverlap {
                        vertex: vertex_name.clone(),
                        edge: self.edge_name(edge).to_owned(),
                    });
                }
            }
            for &edge in &outgoing {
                if !covered.contains_key(&edge) {
                    violations.push(Violation::PartitionIncomplete {
                        vertex: vertex_name.clone(),
                        edge: self.edge_name(edge).to_owned(),
                    });
                }
            }
        }
        for gid in &self.s_members {
            if gid.vertex.0 >= self.vertices.len() || self.groups[gid.vertex.0].len() <= gid.index {
                violations.push(Violation::UnknownSMember {
                    vertex: self
                        .vertices
                        .get(gid.vertex.0)
                        .cloned()
                        .unwrap_or_else(|| format!("#{}", gid.vertex.0)),
                    group_index: gid.index,
                });
            }
        }
        violations
    }

    /// Detects the hypotheses under which the branching-system
    /// representation is faithful: one common source for all edges,
    /// injective range map, and no loops.
    pub fn classify(&self) -> StructureReport {
        let common_source = self
            .edges
            .windows(2)
            .all(|pair| pair[0].source == pair[1].source);
        let mut ranges: Vec<VertexId> = self.edges.iter().map(|e| e.range).collect();
        ranges.sort();
        let before = ranges.len();
        ranges.dedup();
        let injective_range = ranges.len() == before;
        let loop_free = self.edges.iter().all(|e| e.source != e.range);
        let sinks = (0..self.vertices.len())
            .map(VertexId)
            .filter(|&v| self.is_sink(v))
            .collect();
        StructureReport {
            common_source,
            injective_range,
            loop_free,
            sinks,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.0]
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].name
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].source
    }

    pub fn range(&self, e: EdgeId) -> VertexId {
        self.edges[e.0].range
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertices.iter().position(|v| v == name).map(VertexId)
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name).map(EdgeId)
    }

    pub fn outgoing(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.source == v)
            .map(|(i, _)| EdgeId(i))
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        self.outgoing(v).next().is_none()
    }

    /// The ordered groups of `C_v` (empty slice for sinks).
    pub fn groups_at(&self, v: VertexId) -> &[Vec<EdgeId>] {
        &self.groups[v.0]
    }

    pub fn group_edges(&self, gid: GroupId) -> &[EdgeId] {
        &self.groups[gid.vertex.0][gid.index]
    }

    pub fn all_groups(&self) -> impl Iterator<Item = GroupId> + '_ {
        self.vertex_ids().flat_map(move |v| {
            (0..self.groups[v.0].len()).map(move |index| GroupId { vertex: v, index })
        })
    }

    pub fn in_s(&self, gid: GroupId) -> bool {
        self.s_members.contains(&gid)
    }

    pub fn s_groups(&self) -> impl Iterator<Item = GroupId> + '_ {
        self.s_members.iter().copied()
    }

    /// The unique group containing `e`; `None` only on invalid graphs.
    pub fn group_of_edge(&self, e: EdgeId) -> Option<GroupId> {
        self.edge_group[e.0]
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(v#{}, {})", self.vertex.0, self.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FAN_GRAPH: &str = include_str!("../../../golden/example1.json");

    #[test]
    fn loads_the_shipped_fan_graph() {
        let g = SeparatedGraph::load(FAN_GRAPH).unwrap();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.groups_at(VertexId(0)).len(), 2);
        assert_eq!(g.groups_at(VertexId(0))[0], vec![EdgeId(0), EdgeId(1)]);
        assert_eq!(g.groups_at(VertexId(0))[1], vec![EdgeId(2), EdgeId(3)]);
        assert!(g.in_s(GroupId { vertex: VertexId(0), index: 1 }));
        assert!(!g.in_s(GroupId { vertex: VertexId(0), index: 0 }));
        assert!(g.validate().is_empty());
    }

    #[test]
    fn partition_violations_are_reported() {
        let text = FAN_GRAPH.replace("[\"e1\", \"e2\"]", "[\"e1\"]");
        match SeparatedGraph::load(&text) {
            Err(LoadError::Invalid(violations)) => {
                assert_eq!(
                    violations,
                    vec![Violation::PartitionIncomplete {
                        vertex: "v0".into(),
                        edge: "e2".into()
                    }]
                );
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn overlapping_groups_are_reported() {
        let text = FAN_GRAPH.replace("[\"e3\", \"e4\"]", "[\"e1\", \"e2\"]");
        match SeparatedGraph::load(&text) {
            Err(LoadError::Invalid(violations)) => {
                assert!(violations.iter().any(|v| matches!(v, Violation::GroupsOverlap { .. })));
                assert!(violations
                    .iter()
                    .any(|v| matches!(v, Violation::PartitionIncomplete { .. })));
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_edge_name_is_a_parse_error() {
        let text = FAN_GRAPH.replace(
            "{ \"name\": \"e2\", \"source\": \"v0\", \"range\": \"v2\" }",
            "{ \"name\": \"e1\", \"source\": \"v0\", \"range\": \"v2\" }",
        );
        assert!(matches!(SeparatedGraph::load(&text), Err(LoadError::Name(_))));
    }

    #[test]
    fn s_with_undeclared_group_is_a_validation_error() {
        let text = FAN_GRAPH.replace("\"group_index\": 1", "\"group_index\": 7");
        match SeparatedGraph::load(&text) {
            Err(LoadError::Invalid(violations)) => {
                assert_eq!(
                    violations,
                    vec![Violation::UnknownSMember {
                        vertex: "v0".into(),
                        group_index: 7
                    }]
                );
            }
            other => panic!("expected validation failure, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = SeparatedGraph::load("{\"vertices\": [\"v0\",]}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "missing position info: {msg}");
    }

    #[test]
    fn classify_fan_graph() {
        let g = SeparatedGraph::load(FAN_GRAPH).unwrap();
        let report = g.classify();
        assert!(report.common_source);
        assert!(report.injective_range);
        assert!(report.loop_free);
        assert_eq!(
            report.sinks,
            vec![VertexId(1), VertexId(2), VertexId(3), VertexId(4)]
        );
        assert!(report.require_faithful_class().is_ok());
    }

    #[test]
    fn classify_detects_loop_and_range_collision() {
        let looped = r#"{
            "vertices": ["v0"],
            "edges": [{ "name": "e", "source": "v0", "range": "v0" }],
            "groups": { "v0": [["e"]] },
            "S": []
        }"#;
        let g = SeparatedGraph::load(looped).unwrap();
        assert!(!g.classify().loop_free);

        let collide = r#"{
            "vertices": ["v0", "v1"],
            "edges": [
                { "name": "a", "source": "v0", "range": "v1" },
                { "name": "b", "source": "v0", "range": "v1" }
            ],
            "groups": { "v0": [["a", "b"]] },
            "S": []
        }"#;
        let g = SeparatedGraph::load(collide).unwrap();
        let report = g.classify();
        assert!(!report.injective_range);
        assert!(report.require_faithful_class().is_err());
    }

    #[test]
    fn save_load_round_trip() {
        let g = SeparatedGraph::load(FAN_GRAPH).unwrap();
        let again = SeparatedGraph::load(&g.save()).unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn edge_bookkeeping() {
        let g = SeparatedGraph::load(FAN_GRAPH).unwrap();
        let total: usize = g.vertex_ids().map(|v| g.outgoing(v).count()).sum();
        assert_eq!(total, g.edge_count());
        for e in g.edge_ids() {
            let gid = g.group_of_edge(e).unwrap();
            assert!(g.group_edges(gid).contains(&e));
            assert_eq!(gid.vertex, g.source(e));
        }
    }
}
