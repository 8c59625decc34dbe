//! Reference graphs and a seeded generator of small random graphs.
//!
//! `g1` is a single unit edge between boundary vertices `g` and `gp`.
//! `g3` is the unit three-star: edges `e1, e2, e3` run from the boundary
//! vertices `g1, g2, g3` (coordinate 0) to the centre `v` (coordinate 1).

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{Edge, MetricGraph, Vertex};
use crate::rational::{q, qi, Rational};

fn vertex(id: &str, boundary: bool) -> Vertex {
    Vertex {
        id: id.to_string(),
        boundary,
    }
}

fn edge(id: &str, from: usize, to: usize, length: Rational) -> Edge {
    Edge {
        id: id.to_string(),
        from,
        to,
        length,
    }
}

pub fn g1() -> MetricGraph {
    MetricGraph::new(
        vec![vertex("g", true), vertex("gp", true)],
        vec![edge("e", 0, 1, qi(1))],
    )
    .expect("g1 is valid")
}

pub fn g3() -> MetricGraph {
    star(&[qi(1), qi(1), qi(1)])
}

/// Star with one edge per length, edge `ek` running from `gk` to `v`.
pub fn star(lengths: &[Rational]) -> MetricGraph {
    let m = lengths.len();
    let mut vertices: Vec<Vertex> = (1..=m).map(|k| vertex(&format!("g{k}"), true)).collect();
    vertices.push(vertex("v", false));
    let edges = lengths
        .iter()
        .enumerate()
        .map(|(k, l)| edge(&format!("e{}", k + 1), k, m, l.clone()))
        .collect();
    MetricGraph::new(vertices, edges).expect("star is valid")
}

pub const G1_JSON: &str = r#"{
  "vertices": [
    {"id": "g", "boundary": true},
    {"id": "gp", "boundary": true}
  ],
  "edges": [
    {"id": "e", "from": "g", "to": "gp", "length": "1"}
  ]
}"#;

pub const G3_JSON: &str = r#"{
  "vertices": [
    {"id": "g1", "boundary": true},
    {"id": "g2", "boundary": true},
    {"id": "g3", "boundary": true},
    {"id": "v", "boundary": false}
  ],
  "edges": [
    {"id": "e1", "from": "g1", "to": "v", "length": "1"},
    {"id": "e2", "from": "g2", "to": "v", "length": "1"},
    {"id": "e3", "from": "g3", "to": "v", "length": "1"}
  ]
}"#;

/// A random valid graph with at most five edges.
///
/// Topologies: a single edge, stars with 3–5 legs, a dumbbell, and two
/// interior vertices joined by parallel edges. Lengths are rationals with
/// denominators at most `max_den`, between 1/2 and 2.
pub fn random_small_graph(rng: &mut impl Rng, max_den: i64) -> MetricGraph {
    let topology = rng.gen_range(0..7);
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let add_vertex = |vertices: &mut Vec<Vertex>, id: String, boundary: bool| {
        vertices.push(vertex(&id, boundary));
        vertices.len() - 1
    };
    match topology {
        0 => {
            let a = add_vertex(&mut vertices, "g1".into(), true);
            let b = add_vertex(&mut vertices, "g2".into(), true);
            edges.push(edge("e1", a, b, random_length(rng, max_den)));
        }
        1..=3 => {
            let m = 2 + topology as usize;
            let lengths: Vec<Rational> = (0..m).map(|_| random_length(rng, max_den)).collect();
            return star(&lengths);
        }
        _ => {
            // two interior vertices u, w
            let (parallel, legs_u, legs_w) = match topology {
                4 => (1, 2, 2),
                5 => (2, 1, 1),
                _ if rng.gen_bool(0.5) => (3, 1, 1),
                _ => (2, 1, 2),
            };
            let u = add_vertex(&mut vertices, "u".into(), false);
            let w = add_vertex(&mut vertices, "w".into(), false);
            let mut k = 0;
            let mut next_id = || {
                k += 1;
                format!("e{k}")
            };
            for _ in 0..parallel {
                edges.push(edge(&next_id(), u, w, random_length(rng, max_den)));
            }
            let mut g = 0;
            for (hub, count) in [(u, legs_u), (w, legs_w)] {
                for _ in 0..count {
                    g += 1;
                    let b = add_vertex(&mut vertices, format!("g{g}"), true);
                    edges.push(edge(&next_id(), b, hub, random_length(rng, max_den)));
                }
            }
        }
    }
    MetricGraph::new(vertices, edges).expect("generator builds valid graphs")
}

fn random_length(rng: &mut impl Rng, max_den: i64) -> Rational {
    let den = rng.gen_range(1..=max_den);
    let num = rng.gen_range((den + 1) / 2..=2 * den);
    q(num.max(1), den)
}

/// Deterministic generator for test batteries.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
