//! Finite compact metric graphs with exact edge lengths.
//!
//! Every edge `e` carries a fixed coordinate `s ∈ [0, length]` running from
//! its `from` vertex (`s = 0`) to its `to` vertex (`s = length`). Interior
//! vertices (degree ≥ 3) carry Kirchhoff conditions; boundary vertices have
//! degree 1 and are where controls act.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, VecDeque};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::rational::{format_rational, parse_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed graph document: {0}")]
    Malformed(String),
    #[error("duplicate {kind} id {id:?}")]
    DuplicateId { kind: &'static str, id: String },
    #[error("edge {edge:?} references unknown vertex {vertex:?}")]
    UnknownVertex { edge: String, vertex: String },
    #[error("edge {0:?} is a self-loop; loops are not supported")]
    SelfLoop(String),
    #[error("edge {edge:?} has a non-rational length {text}")]
    NonRationalLength { edge: String, text: String },
    #[error("edge {edge:?} has non-positive length {length}")]
    NonPositiveLength { edge: String, length: String },
    #[error("vertex {0:?} is a multiplicity-2 vertex; two-stars are edges, not vertices")]
    Multiplicity2(String),
    #[error("boundary vertex {id:?} has degree {degree}, expected 1")]
    BoundaryDegree { id: String, degree: usize },
    #[error("interior vertex {id:?} has degree {degree}, expected at least 3")]
    InteriorDegree { id: String, degree: usize },
    #[error("graph is disconnected: vertex {0:?} is unreachable")]
    Disconnected(String),
    #[error("graph has no edges")]
    Empty,
    #[error("unknown vertex {0:?}")]
    NoSuchVertex(String),
    #[error("unknown edge {0:?}")]
    NoSuchEdge(String),
    #[error("edge coordinate {s} lies outside [0, {length}] on edge {edge:?}")]
    CoordinateOutOfRange { edge: String, s: String, length: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub length: Rational,
}

/// Which end of an edge touches a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum End {
    /// `s = 0`, the `from` vertex.
    Start,
    /// `s = length`, the `to` vertex.
    Finish,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeEnd {
    pub edge: usize,
    pub end: End,
}

/// A point of the graph. Edge points are strictly interior to their edge;
/// use [`MetricGraph::edge_point`] to normalise endpoint coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GraphPoint {
    Vertex(usize),
    Edge { edge: usize, s: Rational },
}

impl fmt::Display for GraphPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphPoint::Vertex(v) => write!(f, "v#{v}"),
            GraphPoint::Edge { edge, s } => write!(f, "e#{edge}@{}", format_rational(s)),
        }
    }
}

/// Open subset of the graph: disjoint sorted open intervals on each edge and
/// a set of vertices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Region {
    pub intervals: Vec<Vec<(Rational, Rational)>>,
    pub vertices: BTreeSet<usize>,
}

impl Region {
    pub fn empty(edge_count: usize) -> Self {
        Region {
            intervals: vec![Vec::new(); edge_count],
            vertices: BTreeSet::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty() && self.intervals.iter().all(Vec::is_empty)
    }

    /// Builds a region from arbitrary (possibly overlapping) open intervals.
    pub fn from_intervals(
        mut per_edge: Vec<Vec<(Rational, Rational)>>,
        vertices: BTreeSet<usize>,
    ) -> Self {
        for list in &mut per_edge {
            *list = merge_open(std::mem::take(list));
        }
        Region {
            intervals: per_edge,
            vertices,
        }
    }

    pub fn contains(&self, p: &GraphPoint) -> bool {
        match p {
            GraphPoint::Vertex(v) => self.vertices.contains(v),
            GraphPoint::Edge { edge, s } => self.intervals[*edge]
                .iter()
                .any(|(a, b)| a < s && s < b),
        }
    }

    /// Set inclusion on both the edge parts and the vertex parts.
    pub fn is_subset(&self, other: &Region) -> bool {
        if !self.vertices.is_subset(&other.vertices) {
            return false;
        }
        self.intervals
            .iter()
            .zip(&other.intervals)
            .all(|(mine, theirs)| {
                mine.iter()
                    .all(|(a, b)| theirs.iter().any(|(c, d)| c <= a && b <= d))
            })
    }

    /// Removes finitely many edge points, splitting intervals, and drops the
    /// given vertices.
    pub fn remove_points(&self, points: &BTreeSet<GraphPoint>) -> Region {
        let mut out = self.clone();
        for p in points {
            match p {
                GraphPoint::Vertex(v) => {
                    out.vertices.remove(v);
                }
                GraphPoint::Edge { edge, s } => {
                    let list = std::mem::take(&mut out.intervals[*edge]);
                    for (a, b) in list {
                        if &a < s && s < &b {
                            out.intervals[*edge].push((a, s.clone()));
                            out.intervals[*edge].push((s.clone(), b));
                        } else {
                            out.intervals[*edge].push((a, b));
                        }
                    }
                }
            }
        }
        out
    }

    /// Total length of the edge part.
    pub fn measure(&self) -> Rational {
        self.intervals
            .iter()
            .flatten()
            .fold(Rational::zero(), |acc, (a, b)| acc + (b - a))
    }
}

/// Sorts and merges open intervals. Intervals that only touch at an endpoint
/// stay separate because the shared point belongs to neither.
fn merge_open(mut list: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    list.retain(|(a, b)| a < b);
    list.sort();
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(list.len());
    for (a, b) in list {
        match out.last_mut() {
            Some((_, end)) if a < *end => {
                if b > *end {
                    *end = b;
                }
            }
            _ => out.push((a, b)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<EdgeEnd>>,
}

impl MetricGraph {
    /// Validates and builds a graph from vertex and edge lists.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut seen = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(v.id.as_str()) {
                return Err(GraphError::DuplicateId {
                    kind: "vertex",
                    id: v.id.clone(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (k, e) in edges.iter().enumerate() {
            if !seen.insert(e.id.as_str()) {
                return Err(GraphError::DuplicateId {
                    kind: "edge",
                    id: e.id.clone(),
                });
            }
            if e.from >= vertices.len() || e.to >= vertices.len() {
                return Err(GraphError::UnknownVertex {
                    edge: e.id.clone(),
                    vertex: format!("#{}", e.from.max(e.to)),
                });
            }
            if e.from == e.to {
                return Err(GraphError::SelfLoop(e.id.clone()));
            }
            if !e.length.is_positive() {
                return Err(GraphError::NonPositiveLength {
                    edge: e.id.clone(),
                    length: format_rational(&e.length),
                });
            }
            incidence[e.from].push(EdgeEnd {
                edge: k,
                end: End::Start,
            });
            incidence[e.to].push(EdgeEnd {
                edge: k,
                end: End::Finish,
            });
        }
        for (v, ends) in vertices.iter().zip(&incidence) {
            let degree = ends.len();
            if v.boundary {
                if degree != 1 {
                    return Err(GraphError::BoundaryDegree {
                        id: v.id.clone(),
                        degree,
                    });
                }
            } else if degree == 2 {
                return Err(GraphError::Multiplicity2(v.id.clone()));
            } else if degree < 3 {
                return Err(GraphError::InteriorDegree {
                    id: v.id.clone(),
                    degree,
                });
            }
        }
        let graph = MetricGraph {
            vertices,
            edges,
            incidence,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<(), GraphError> {
        let mut reached = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0usize]);
        reached[0] = true;
        while let Some(v) = queue.pop_front() {
            for end in &self.incidence[v] {
                let w = self.other_vertex(end.edge, v);
                if !reached[w] {
                    reached[w] = true;
                    queue.push_back(w);
                }
            }
        }
        match reached.iter().position(|r| !r) {
            Some(v) => Err(GraphError::Disconnected(self.vertices[v].id.clone())),
            None => Ok(()),
        }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn length(&self, e: usize) -> &Rational {
        &self.edges[e].length
    }

    pub fn vertex_index(&self, id: &str) -> Result<usize, GraphError> {
        self.vertices
            .iter()
            .position(|v| v.id == id)
            .ok_or_else(|| GraphError::NoSuchVertex(id.to_string()))
    }

    pub fn edge_index(&self, id: &str) -> Result<usize, GraphError> {
        self.edges
            .iter()
            .position(|e| e.id == id)
            .ok_or_else(|| GraphError::NoSuchEdge(id.to_string()))
    }

    /// Edge ends incident to `v`, in edge-index order.
    pub fn incident(&self, v: usize) -> &[EdgeEnd] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.vertices[v].boundary
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].boundary)
            .collect()
    }

    pub fn end_vertex(&self, end: EdgeEnd) -> usize {
        let e = &self.edges[end.edge];
        match end.end {
            End::Start => e.from,
            End::Finish => e.to,
        }
    }

    fn other_vertex(&self, edge: usize, v: usize) -> usize {
        let e = &self.edges[edge];
        if e.from == v {
            e.to
        } else {
            e.from
        }
    }

    /// Edge coordinate of an edge end: `0` or `length`.
    pub fn end_coordinate(&self, end: EdgeEnd) -> Rational {
        match end.end {
            End::Start => Rational::zero(),
            End::Finish => self.edges[end.edge].length.clone(),
        }
    }

    /// The point at coordinate `s` on edge `e`; endpoints become vertices.
    pub fn edge_point(&self, e: usize, s: Rational) -> Result<GraphPoint, GraphError> {
        let edge = &self.edges[e];
        if s.is_negative() || s > edge.length {
            return Err(GraphError::CoordinateOutOfRange {
                edge: edge.id.clone(),
                s: format_rational(&s),
                length: format_rational(&edge.length),
            });
        }
        Ok(if s.is_zero() {
            GraphPoint::Vertex(edge.from)
        } else if s == edge.length {
            GraphPoint::Vertex(edge.to)
        } else {
            GraphPoint::Edge { edge: e, s }
        })
    }

    /// Checks that a point refers to this graph.
    pub fn check_point(&self, p: &GraphPoint) -> Result<(), GraphError> {
        match p {
            GraphPoint::Vertex(v) if *v < self.vertices.len() => Ok(()),
            GraphPoint::Vertex(v) => Err(GraphError::NoSuchVertex(format!("#{v}"))),
            GraphPoint::Edge { edge, s } => {
                let Some(e) = self.edges.get(*edge) else {
                    return Err(GraphError::NoSuchEdge(format!("#{edge}")));
                };
                if s.is_positive() && s < &e.length {
                    Ok(())
                } else {
                    Err(GraphError::CoordinateOutOfRange {
                        edge: e.id.clone(),
                        s: format_rational(s),
                        length: format_rational(&e.length),
                    })
                }
            }
        }
    }

    /// Multi-source shortest-path distances from `sources` to every vertex.
    pub fn vertex_distances(&self, sources: &[GraphPoint]) -> Vec<Option<Rational>> {
        let mut dist: Vec<Option<Rational>> = vec![None; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        let relax = |v: usize, d: Rational, dist: &mut Vec<Option<Rational>>, heap: &mut BinaryHeap<_>| {
            if dist[v].as_ref().is_none_or(|old| &d < old) {
                dist[v] = Some(d.clone());
                heap.push(Reverse((d, v)));
            }
        };
        for p in sources {
            match p {
                GraphPoint::Vertex(v) => relax(*v, Rational::zero(), &mut dist, &mut heap),
                GraphPoint::Edge { edge, s } => {
                    let e = &self.edges[*edge];
                    relax(e.from, s.clone(), &mut dist, &mut heap);
                    relax(e.to, &e.length - s, &mut dist, &mut heap);
                }
            }
        }
        while let Some(Reverse((d, v))) = heap.pop() {
            if dist[v].as_ref() != Some(&d) {
                continue;
            }
            for end in &self.incidence[v] {
                let w = self.other_vertex(end.edge, v);
                let nd = &d + &self.edges[end.edge].length;
                relax(w, nd, &mut dist, &mut heap);
            }
        }
        dist
    }

    /// Geodesic distance between two points.
    pub fn distance(&self, x: &GraphPoint, y: &GraphPoint) -> Rational {
        self.distance_to_set(std::slice::from_ref(x), y)
    }

    /// `τ(y, A)` for a finite set `A`; the graph is connected so this is
    /// finite whenever `A` is nonempty.
    pub fn distance_to_set(&self, set: &[GraphPoint], y: &GraphPoint) -> Rational {
        let dist = self.vertex_distances(set);
        self.distance_with(&dist, set, y)
            .expect("distance to an empty set")
    }

    fn distance_with(
        &self,
        dist: &[Option<Rational>],
        set: &[GraphPoint],
        y: &GraphPoint,
    ) -> Option<Rational> {
        match y {
            GraphPoint::Vertex(v) => dist[*v].clone(),
            GraphPoint::Edge { edge, s } => {
                let e = &self.edges[*edge];
                let mut best: Option<Rational> = None;
                let mut take = |c: Rational| {
                    if best.as_ref().is_none_or(|b| &c < b) {
                        best = Some(c);
                    }
                };
                if let Some(d) = &dist[e.from] {
                    take(d + s);
                }
                if let Some(d) = &dist[e.to] {
                    take(d + (&e.length - s));
                }
                for p in set {
                    if let GraphPoint::Edge { edge: pe, s: ps } = p {
                        if pe == edge {
                            take((s - ps).abs());
                        }
                    }
                }
                best
            }
        }
    }

    /// Open metric neighbourhood `{x : τ(x, sources) < radius}`.
    pub fn neighborhood(&self, sources: &[GraphPoint], radius: &Rational) -> Region {
        let mut region = Region::empty(self.edges.len());
        if sources.is_empty() || !radius.is_positive() {
            return region;
        }
        let dist = self.vertex_distances(sources);
        for (v, d) in dist.iter().enumerate() {
            if d.as_ref().is_some_and(|d| d < radius) {
                region.vertices.insert(v);
            }
        }
        let mut per_edge = vec![Vec::new(); self.edges.len()];
        for (k, e) in self.edges.iter().enumerate() {
            let list: &mut Vec<(Rational, Rational)> = &mut per_edge[k];
            let zero = Rational::zero();
            if let Some(d) = &dist[e.from] {
                if d < radius {
                    let reach = radius - d;
                    list.push((zero.clone(), reach.min(e.length.clone())));
                }
            }
            if let Some(d) = &dist[e.to] {
                if d < radius {
                    let reach = radius - d;
                    let start = &e.length - reach;
                    list.push((start.max(zero.clone()), e.length.clone()));
                }
            }
            for p in sources {
                if let GraphPoint::Edge { edge, s } = p {
                    if *edge == k {
                        let lo = (s - radius).max(zero.clone());
                        let hi = (s + radius).min(e.length.clone());
                        list.push((lo, hi));
                    }
                }
            }
        }
        Region::from_intervals(per_edge, region.vertices)
    }

    /// Total length of all edges.
    pub fn total_length(&self) -> Rational {
        self.edges
            .iter()
            .fold(Rational::zero(), |acc, e| acc + &e.length)
    }

    /// Parses the JSON graph document.
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc =
            serde_json::from_str(text).map_err(|e| GraphError::Malformed(e.to_string()))?;
        doc.into_graph()
    }

    /// Canonical JSON document; parsing it back yields an equal graph.
    pub fn to_json(&self) -> String {
        let doc = GraphDoc {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexDoc {
                    id: v.id.clone(),
                    boundary: v.boundary,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    from: self.vertices[e.from].id.clone(),
                    to: self.vertices[e.to].id.clone(),
                    length: Value::String(format_rational(&e.length)),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph document serialises")
    }

    /// JSON description of a point using vertex and edge ids.
    pub fn point_json(&self, p: &GraphPoint) -> Value {
        match p {
            GraphPoint::Vertex(v) => serde_json::json!({ "vertex": self.vertices[*v].id }),
            GraphPoint::Edge { edge, s } => serde_json::json!({
                "edge": self.edges[*edge].id,
                "s": format_rational(s),
            }),
        }
    }

    /// Human-readable label, e.g. `g1` or `e2@1/4`.
    pub fn point_label(&self, p: &GraphPoint) -> String {
        match p {
            GraphPoint::Vertex(v) => self.vertices[*v].id.clone(),
            GraphPoint::Edge { edge, s } => {
                format!("{}@{}", self.edges[*edge].id, format_rational(s))
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: String,
    boundary: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    id: String,
    from: String,
    to: String,
    length: Value,
}

impl GraphDoc {
    fn into_graph(self) -> Result<MetricGraph, GraphError> {
        let vertices: Vec<Vertex> = self
            .vertices
            .into_iter()
            .map(|v| Vertex {
                id: v.id,
                boundary: v.boundary,
            })
            .collect();
        let lookup = |edge: &str, id: &str| {
            vertices
                .iter()
                .position(|v| v.id == id)
                .ok_or_else(|| GraphError::UnknownVertex {
                    edge: edge.to_string(),
                    vertex: id.to_string(),
                })
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            let length = match &e.length {
                Value::String(s) => parse_rational(s),
                Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
                _ => None,
            }
            .ok_or_else(|| GraphError::NonRationalLength {
                edge: e.id.clone(),
                text: e.length.to_string(),
            })?;
            edges.push(Edge {
                from: lookup(&e.id, &e.from)?,
                to: lookup(&e.id, &e.to)?,
                id: e.id,
                length,
            });
        }
        MetricGraph::new(vertices, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g3};
    use crate::rational::{q, qi};

    #[test]
    fn g3_document_shape() {
        let g = g3();
        assert_eq!(g.boundary_vertices().len(), 3);
        assert_eq!(g.vertices().len() - g.boundary_vertices().len(), 1);
        assert_eq!(g.edges().len(), 3);
    }

    #[test]
    fn g1_document_shape() {
        let g = g1();
        assert_eq!(g.boundary_vertices().len(), 2);
        assert_eq!(g.edges().len(), 1);
    }

    fn doc(vertices: &str, edges: &str) -> String {
        format!(r#"{{"vertices": [{vertices}], "edges": [{edges}]}}"#)
    }

    #[test]
    fn rejects_degree_two_vertex() {
        let text = doc(
            r#"{"id":"a","boundary":true},{"id":"m","boundary":false},{"id":"b","boundary":true}"#,
            r#"{"id":"e1","from":"a","to":"m","length":"1"},{"id":"e2","from":"m","to":"b","length":"1"}"#,
        );
        let err = MetricGraph::from_json(&text).unwrap_err();
        assert_eq!(err, GraphError::Multiplicity2("m".into()));
        assert!(err.to_string().contains("multiplicity-2 vertex"));
    }

    #[test]
    fn distinct_diagnostics() {
        let ab = r#"{"id":"a","boundary":true},{"id":"b","boundary":true}"#;
        let cases = vec![
            (String::from("{"), "malformed"),
            (doc(ab, r#"{"id":"e","from":"a","to":"a","length":"1"}"#), "self-loop"),
            (doc(ab, r#"{"id":"e","from":"a","to":"b","length":"0"}"#), "non-positive"),
            (doc(ab, r#"{"id":"e","from":"a","to":"b","length":"1.5"}"#), "non-rational"),
            (doc(ab, r#"{"id":"e","from":"a","to":"b","length":0.5}"#), "non-rational"),
            (
                doc(
                    r#"{"id":"a","boundary":true},{"id":"b","boundary":true},{"id":"c","boundary":true},{"id":"d","boundary":true}"#,
                    r#"{"id":"e","from":"a","to":"b","length":"1"},{"id":"f","from":"c","to":"d","length":"1"}"#,
                ),
                "disconnected",
            ),
            (
                doc(
                    r#"{"id":"a","boundary":true},{"id":"b","boundary":true}"#,
                    r#"{"id":"e","from":"a","to":"b","length":"1"},{"id":"f","from":"a","to":"b","length":"1"}"#,
                ),
                "boundary vertex",
            ),
        ];
        for (text, needle) in cases {
            let err = MetricGraph::from_json(&text).unwrap_err();
            assert!(err.to_string().contains(needle), "{err} should mention {needle}");
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = g3();
        let again = MetricGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, again);
        assert_eq!(g.to_json(), again.to_json());
    }

    #[test]
    fn distances_on_fixtures() {
        let g = g3();
        let (g1v, g2v) = (g.vertex_index("g1").unwrap(), g.vertex_index("g2").unwrap());
        assert_eq!(
            g.distance(&GraphPoint::Vertex(g1v), &GraphPoint::Vertex(g2v)),
            qi(2)
        );
        let e1 = g.edge_index("e1").unwrap();
        let p = g.edge_point(e1, q(1, 4)).unwrap();
        assert_eq!(g.distance(&p, &GraphPoint::Vertex(g1v)), q(1, 4));

        let g = g1();
        assert_eq!(g.distance(&GraphPoint::Vertex(0), &GraphPoint::Vertex(1)), qi(1));
    }

    #[test]
    fn neighborhoods_on_fixtures() {
        let g = g1();
        let r = g.neighborhood(&[GraphPoint::Vertex(0)], &q(1, 2));
        assert_eq!(r.intervals[0], vec![(qi(0), q(1, 2))]);
        assert_eq!(r.vertices, BTreeSet::from([0]));

        let g = g3();
        let g1v = g.vertex_index("g1").unwrap();
        let v = g.vertex_index("v").unwrap();
        let r = g.neighborhood(&[GraphPoint::Vertex(g1v)], &q(3, 2));
        assert_eq!(r.intervals[0], vec![(qi(0), qi(1))]);
        // e2, e3 run from their boundary vertex to v; the half next to v is covered
        assert_eq!(r.intervals[1], vec![(q(1, 2), qi(1))]);
        assert_eq!(r.intervals[2], vec![(q(1, 2), qi(1))]);
        assert_eq!(r.vertices, BTreeSet::from([g1v, v]));

        assert!(g.neighborhood(&[GraphPoint::Vertex(g1v)], &qi(0)).is_empty());
    }

    #[test]
    fn region_point_removal_splits_intervals() {
        let r = Region::from_intervals(vec![vec![(qi(0), qi(1))]], BTreeSet::from([0]));
        let cut = r.remove_points(&BTreeSet::from([
            GraphPoint::Edge { edge: 0, s: q(1, 2) },
            GraphPoint::Vertex(0),
        ]));
        assert_eq!(cut.intervals[0], vec![(qi(0), q(1, 2)), (q(1, 2), qi(1))]);
        assert!(cut.vertices.is_empty());
        assert_eq!(cut.measure(), qi(1));
    }
}
