//! Space-time support of the fundamental solution ("hydra").
//!
//! A unit impulse injected at a boundary vertex `γ` at `t = 0` travels along
//! the edges with unit speed. At an interior vertex of multiplicity `m` an
//! arriving amplitude `a` splits into a reflected part `-a (m-2)/m` and
//! transmitted parts `2a/m`; at a boundary vertex it reflects as `-a`. The
//! construction below replays that process with a time-ordered event queue,
//! merging simultaneous arrivals at a vertex before splitting.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{EdgeEnd, End, GraphError, GraphPoint, MetricGraph};
use crate::rational::{format_rational, Rational};

/// Default cap on processed vertex arrivals.
pub const DEFAULT_MAX_EVENTS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HydraError {
    #[error("vertex {0:?} is not a boundary vertex")]
    NotBoundary(String),
    #[error("horizon must be positive, got {0}")]
    NonPositiveHorizon(String),
    #[error("event cap exceeded: {count} vertex arrivals reached (cap {cap})")]
    EventCapExceeded { count: usize, cap: usize },
    #[error("duplicate source {0:?}")]
    DuplicateSource(String),
    #[error("no sources given")]
    NoSources,
    #[error("point {0} is not on the hydra")]
    NotOnHydra(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Reflection and transmission coefficients at an interior vertex of
/// multiplicity `m`.
pub fn splitting_coefficients(m: usize) -> (Rational, Rational) {
    let m = Rational::from_integer(m.into());
    let two = Rational::from_integer(2.into());
    (-(&m - &two) / &m, two / m)
}

/// A straight piece of the hydra over one graph edge: `t(s) = offset + sigma·s`
/// for `s ∈ [s_lo, s_hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HydraSegment {
    pub source: usize,
    pub edge: usize,
    /// `+1` when the singularity moves towards increasing `s`.
    pub sigma: i8,
    pub offset: Rational,
    pub s_lo: Rational,
    pub s_hi: Rational,
    pub amplitude: Rational,
}

impl HydraSegment {
    pub fn time_at(&self, s: &Rational) -> Rational {
        if self.sigma > 0 {
            &self.offset + s
        } else {
            &self.offset - s
        }
    }

    pub fn position_at(&self, t: &Rational) -> Rational {
        if self.sigma > 0 {
            t - &self.offset
        } else {
            &self.offset - t
        }
    }

    /// Closed time range covered by the segment.
    pub fn time_range(&self) -> (Rational, Rational) {
        let a = self.time_at(&self.s_lo);
        let b = self.time_at(&self.s_hi);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    pub fn covers_s(&self, s: &Rational) -> bool {
        &self.s_lo <= s && s <= &self.s_hi
    }

    pub fn contains(&self, s: &Rational, t: &Rational) -> bool {
        self.covers_s(s) && &self.time_at(s) == t
    }
}

/// Arrival of the singularity at a vertex (or the emission at the root).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexEvent {
    pub vertex: usize,
    pub time: Rational,
    /// Sum of arriving amplitudes; `1` for the root.
    pub incoming: Rational,
    /// Amplitudes sent into each incident edge end, zero merges included.
    /// Empty for arrivals at the horizon.
    pub outgoing: Vec<(EdgeEnd, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceTimePoint {
    pub point: GraphPoint,
    pub time: Rational,
}

impl SpaceTimePoint {
    pub fn new(point: GraphPoint, time: Rational) -> Self {
        SpaceTimePoint { point, time }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hydra {
    graph: MetricGraph,
    pub source: usize,
    pub horizon: Rational,
    pub segments: Vec<HydraSegment>,
    /// Root first, then arrivals in time order.
    pub events: Vec<VertexEvent>,
    by_edge: Vec<Vec<usize>>,
}

impl Hydra {
    /// Builds the truncated hydra `{(x,t) ∈ H_γ : t ≤ horizon}`.
    pub fn build(
        graph: &MetricGraph,
        source: usize,
        horizon: &Rational,
        max_events: usize,
    ) -> Result<Hydra, HydraError> {
        if !graph.is_boundary(source) {
            return Err(HydraError::NotBoundary(graph.vertex(source).id.clone()));
        }
        if !horizon.is_positive() {
            return Err(HydraError::NonPositiveHorizon(format_rational(horizon)));
        }
        let mut builder = Builder {
            graph,
            source,
            horizon,
            segments: Vec::new(),
            queue: BTreeMap::new(),
        };
        let root_end = graph.incident(source)[0];
        builder.spawn(root_end, Rational::zero(), Rational::one());
        let mut events = vec![VertexEvent {
            vertex: source,
            time: Rational::zero(),
            incoming: Rational::one(),
            outgoing: vec![(root_end, Rational::one())],
        }];
        let mut processed = 0usize;
        while let Some(((time, vertex), arrivals)) = builder.queue.pop_first() {
            processed += arrivals.len();
            if processed > max_events {
                return Err(HydraError::EventCapExceeded {
                    count: processed,
                    cap: max_events,
                });
            }
            let incoming = arrivals
                .iter()
                .fold(Rational::zero(), |acc, (_, a)| acc + a);
            let mut outgoing = Vec::new();
            if &time < horizon {
                outgoing = scatter(graph, vertex, &arrivals);
                for (end, amp) in &outgoing {
                    if !amp.is_zero() {
                        builder.spawn(*end, time.clone(), amp.clone());
                    }
                }
            }
            events.push(VertexEvent {
                vertex,
                time,
                incoming,
                outgoing,
            });
        }
        let segments = builder.segments;
        let mut by_edge = vec![Vec::new(); graph.edges().len()];
        for (k, seg) in segments.iter().enumerate() {
            by_edge[seg.edge].push(k);
        }
        Ok(Hydra {
            graph: graph.clone(),
            source,
            horizon: horizon.clone(),
            segments,
            events,
            by_edge,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn segments_on_edge(&self, edge: usize) -> impl Iterator<Item = &HydraSegment> {
        self.by_edge[edge].iter().map(|&k| &self.segments[k])
    }

    /// `π⁻¹(x)`: all hydra points over a graph point.
    pub fn space_fiber(&self, x: &GraphPoint) -> BTreeSet<SpaceTimePoint> {
        let mut out = BTreeSet::new();
        match x {
            GraphPoint::Vertex(v) => {
                for ev in self.events.iter().filter(|ev| ev.vertex == *v) {
                    out.insert(SpaceTimePoint::new(x.clone(), ev.time.clone()));
                }
            }
            GraphPoint::Edge { edge, s } => {
                for seg in self.segments_on_edge(*edge).filter(|seg| seg.covers_s(s)) {
                    out.insert(SpaceTimePoint::new(x.clone(), seg.time_at(s)));
                }
            }
        }
        out
    }

    /// `ρ⁻¹(t)`: all hydra points at a given time.
    pub fn time_fiber(&self, t: &Rational) -> BTreeSet<SpaceTimePoint> {
        let mut out = BTreeSet::new();
        for seg in &self.segments {
            let (lo, hi) = seg.time_range();
            if &lo <= t && t <= &hi {
                let p = self
                    .graph
                    .edge_point(seg.edge, seg.position_at(t))
                    .expect("segment positions stay on their edge");
                out.insert(SpaceTimePoint::new(p, t.clone()));
            }
        }
        for ev in self.events.iter().filter(|ev| &ev.time == t) {
            out.insert(SpaceTimePoint::new(GraphPoint::Vertex(ev.vertex), t.clone()));
        }
        out
    }

    pub fn contains(&self, p: &SpaceTimePoint) -> bool {
        match &p.point {
            GraphPoint::Vertex(v) => self
                .events
                .iter()
                .any(|ev| ev.vertex == *v && ev.time == p.time),
            GraphPoint::Edge { edge, s } => self
                .segments_on_edge(*edge)
                .any(|seg| seg.contains(s, &p.time)),
        }
    }

    /// Amplitude function on the hydra. Edge points sum the branches through
    /// them; boundary vertices carry `1` at the root and `0` afterwards;
    /// interior vertices carry the sum of amplitudes arriving there.
    pub fn amplitude_at(&self, p: &SpaceTimePoint) -> Result<Rational, HydraError> {
        if !self.contains(p) {
            return Err(HydraError::NotOnHydra(format!(
                "({}, {})",
                self.graph.point_label(&p.point),
                format_rational(&p.time)
            )));
        }
        Ok(match &p.point {
            GraphPoint::Vertex(v) if self.graph.is_boundary(*v) => {
                if *v == self.source && p.time.is_zero() {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }
            GraphPoint::Vertex(v) => self
                .events
                .iter()
                .filter(|ev| ev.vertex == *v && ev.time == p.time)
                .fold(Rational::zero(), |acc, ev| acc + &ev.incoming),
            GraphPoint::Edge { edge, s } => self
                .segments_on_edge(*edge)
                .filter(|seg| seg.contains(s, &p.time))
                .fold(Rational::zero(), |acc, seg| acc + &seg.amplitude),
        })
    }

    /// Heads at delay `s`: positions of the hydra at time `horizon - s`.
    pub fn heads(&self, delay: &Rational) -> BTreeSet<GraphPoint> {
        let t = &self.horizon - delay;
        self.time_fiber(&t).into_iter().map(|p| p.point).collect()
    }
}

struct Builder<'a> {
    graph: &'a MetricGraph,
    source: usize,
    horizon: &'a Rational,
    segments: Vec<HydraSegment>,
    queue: BTreeMap<(Rational, usize), Vec<(EdgeEnd, Rational)>>,
}

impl Builder<'_> {
    /// Emits a singularity from the vertex at `end` into its edge at `t0`.
    fn spawn(&mut self, end: EdgeEnd, t0: Rational, amplitude: Rational) {
        let length = self.graph.length(end.edge).clone();
        let remaining = self.horizon - &t0;
        let reach = if remaining < length {
            remaining
        } else {
            length.clone()
        };
        let arrival = &t0 + &length;
        let (sigma, offset, s_lo, s_hi, far_end) = match end.end {
            End::Start => (1, t0, Rational::zero(), reach, End::Finish),
            End::Finish => (-1, &t0 + &length, &length - &reach, length.clone(), End::Start),
        };
        self.segments.push(HydraSegment {
            source: self.source,
            edge: end.edge,
            sigma,
            offset,
            s_lo,
            s_hi,
            amplitude: amplitude.clone(),
        });
        if &arrival <= self.horizon {
            let far = EdgeEnd {
                edge: end.edge,
                end: far_end,
            };
            let vertex = self.graph.end_vertex(far);
            self.queue
                .entry((arrival, vertex))
                .or_default()
                .push((far, amplitude));
        }
    }
}

/// Outgoing amplitudes for simultaneous arrivals at `vertex`.
fn scatter(
    graph: &MetricGraph,
    vertex: usize,
    arrivals: &[(EdgeEnd, Rational)],
) -> Vec<(EdgeEnd, Rational)> {
    let ends = graph.incident(vertex);
    if graph.is_boundary(vertex) {
        let total = arrivals
            .iter()
            .fold(Rational::zero(), |acc, (_, a)| acc + a);
        return vec![(ends[0], -total)];
    }
    let (reflect, transmit) = splitting_coefficients(ends.len());
    ends.iter()
        .map(|out| {
            let amp = arrivals.iter().fold(Rational::zero(), |acc, (inc, a)| {
                let c = if inc == out { &reflect } else { &transmit };
                acc + c * a
            });
            (*out, amp)
        })
        .collect()
}

/// Hydras of several sources sharing one horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HydraUnion {
    graph: MetricGraph,
    pub horizon: Rational,
    /// Sorted by source vertex.
    pub hydras: Vec<Hydra>,
}

impl HydraUnion {
    pub fn build(
        graph: &MetricGraph,
        sources: &[usize],
        horizon: &Rational,
        max_events: usize,
    ) -> Result<HydraUnion, HydraError> {
        if sources.is_empty() {
            return Err(HydraError::NoSources);
        }
        let mut sorted = sources.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(HydraError::DuplicateSource(graph.vertex(w[0]).id.clone()));
            }
        }
        let hydras = sorted
            .iter()
            .map(|&s| Hydra::build(graph, s, horizon, max_events))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HydraUnion {
            graph: graph.clone(),
            horizon: horizon.clone(),
            hydras,
        })
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn sources(&self) -> Vec<usize> {
        self.hydras.iter().map(|h| h.source).collect()
    }

    pub fn hydra(&self, source: usize) -> Option<&Hydra> {
        self.hydras.iter().find(|h| h.source == source)
    }

    pub fn source_points(&self) -> Vec<GraphPoint> {
        self.hydras
            .iter()
            .map(|h| GraphPoint::Vertex(h.source))
            .collect()
    }

    pub fn segments(&self) -> impl Iterator<Item = &HydraSegment> {
        self.hydras.iter().flat_map(|h| h.segments.iter())
    }

    pub fn space_fiber(&self, x: &GraphPoint) -> BTreeSet<SpaceTimePoint> {
        self.hydras.iter().flat_map(|h| h.space_fiber(x)).collect()
    }

    pub fn time_fiber(&self, t: &Rational) -> BTreeSet<SpaceTimePoint> {
        self.hydras.iter().flat_map(|h| h.time_fiber(t)).collect()
    }

    pub fn contains(&self, p: &SpaceTimePoint) -> bool {
        self.hydras.iter().any(|h| h.contains(p))
    }

    /// Amplitude on the union: the sum of per-source amplitudes.
    pub fn amplitude_at(&self, p: &SpaceTimePoint) -> Result<Rational, HydraError> {
        let mut total = Rational::zero();
        let mut found = false;
        for h in &self.hydras {
            if h.contains(p) {
                found = true;
                total += h.amplitude_at(p)?;
            }
        }
        if found {
            Ok(total)
        } else {
            Err(HydraError::NotOnHydra(format!(
                "({}, {})",
                self.graph.point_label(&p.point),
                format_rational(&p.time)
            )))
        }
    }

    /// Crossings of oppositely moving segments over the same edge interior,
    /// including crossings between different sources.
    pub fn crossings(&self) -> BTreeSet<SpaceTimePoint> {
        let mut out = BTreeSet::new();
        for edge in 0..self.graph.edges().len() {
            let length = self.graph.length(edge);
            let (fwd, bwd): (Vec<&HydraSegment>, Vec<&HydraSegment>) = self
                .hydras
                .iter()
                .flat_map(|h| h.segments_on_edge(edge))
                .partition(|seg| seg.sigma > 0);
            for a in &fwd {
                for b in &bwd {
                    // offset_a + s = offset_b - s
                    let s = (&b.offset - &a.offset) / Rational::from_integer(2.into());
                    if s.is_positive() && &s < length && a.covers_s(&s) && b.covers_s(&s) {
                        let t = a.time_at(&s);
                        out.insert(SpaceTimePoint::new(GraphPoint::Edge { edge, s }, t));
                    }
                }
            }
        }
        out
    }

    /// Corner points: everything over vertices, same-edge crossings, and the
    /// top `ρ⁻¹(T)`.
    pub fn corner_points(&self) -> BTreeSet<SpaceTimePoint> {
        let mut out = BTreeSet::new();
        for h in &self.hydras {
            for ev in &h.events {
                out.insert(SpaceTimePoint::new(
                    GraphPoint::Vertex(ev.vertex),
                    ev.time.clone(),
                ));
            }
        }
        out.extend(self.crossings());
        out.extend(self.time_fiber(&self.horizon));
        out
    }

    /// JSON dump of all segments and vertex events with exact rationals.
    pub fn to_json(&self) -> Value {
        let g = &self.graph;
        let hydras: Vec<Value> = self
            .hydras
            .iter()
            .map(|h| {
                let segments: Vec<Value> = h
                    .segments
                    .iter()
                    .map(|seg| {
                        let (t_lo, t_hi) = seg.time_range();
                        json!({
                            "edge": g.edge(seg.edge).id,
                            "sigma": seg.sigma,
                            "offset": format_rational(&seg.offset),
                            "s_lo": format_rational(&seg.s_lo),
                            "s_hi": format_rational(&seg.s_hi),
                            "t_lo": format_rational(&t_lo),
                            "t_hi": format_rational(&t_hi),
                            "amplitude": format_rational(&seg.amplitude),
                        })
                    })
                    .collect();
                let events: Vec<Value> = h
                    .events
                    .iter()
                    .map(|ev| {
                        json!({
                            "vertex": g.vertex(ev.vertex).id,
                            "time": format_rational(&ev.time),
                            "incoming": format_rational(&ev.incoming),
                        })
                    })
                    .collect();
                json!({
                    "source": g.vertex(h.source).id,
                    "segments": segments,
                    "events": events,
                })
            })
            .collect();
        json!({
            "horizon": format_rational(&self.horizon),
            "hydras": hydras,
        })
    }

    /// Graphviz rendering of the space-time graph. Segments are split at the
    /// corner points lying on them; corner points are drawn filled.
    pub fn to_dot(&self) -> String {
        let g = &self.graph;
        let corners = self.corner_points();
        let mut nodes: BTreeMap<SpaceTimePoint, usize> = BTreeMap::new();
        let node_id = |p: SpaceTimePoint, nodes: &mut BTreeMap<SpaceTimePoint, usize>| {
            let next = nodes.len();
            *nodes.entry(p).or_insert(next)
        };
        let mut lines = Vec::new();
        for h in &self.hydras {
            for seg in &h.segments {
                let mut cuts: Vec<Rational> = vec![seg.s_lo.clone(), seg.s_hi.clone()];
                for c in &corners {
                    if let GraphPoint::Edge { edge, s } = &c.point {
                        if *edge == seg.edge && seg.contains(s, &c.time) {
                            cuts.push(s.clone());
                        }
                    }
                }
                cuts.sort();
                cuts.dedup();
                for w in cuts.windows(2) {
                    let a = SpaceTimePoint::new(
                        g.edge_point(seg.edge, w[0].clone()).expect("on edge"),
                        seg.time_at(&w[0]),
                    );
                    let b = SpaceTimePoint::new(
                        g.edge_point(seg.edge, w[1].clone()).expect("on edge"),
                        seg.time_at(&w[1]),
                    );
                    let (ia, ib) = (node_id(a, &mut nodes), node_id(b, &mut nodes));
                    lines.push(format!(
                        "  n{ia} -- n{ib} [label=\"{}\", source=\"{}\"];",
                        format_rational(&seg.amplitude),
                        g.vertex(seg.source).id
                    ));
                }
            }
            for ev in &h.events {
                node_id(
                    SpaceTimePoint::new(GraphPoint::Vertex(ev.vertex), ev.time.clone()),
                    &mut nodes,
                );
            }
        }
        let mut out = String::from("graph hydra {\n  node [shape=circle, fontsize=9];\n");
        for (p, id) in &nodes {
            let label = format!("{} t={}", g.point_label(&p.point), format_rational(&p.time));
            let style = if corners.contains(p) {
                ", style=filled, fillcolor=black, fontcolor=white"
            } else {
                ""
            };
            let _ = writeln!(out, "  n{id} [label=\"{label}\"{style}];");
        }
        for line in lines {
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g3, star};
    use crate::rational::{q, qi};

    fn seg(h: &Hydra, edge: usize, sigma: i8) -> Vec<&HydraSegment> {
        h.segments
            .iter()
            .filter(|s| s.edge == edge && s.sigma == sigma)
            .collect()
    }

    #[test]
    fn coefficients_conserve_amplitude() {
        for m in 3..=10 {
            let (r, t) = splitting_coefficients(m);
            assert_eq!(r + t * Rational::from_integer((m as i64 - 1).into()), qi(1));
        }
    }

    #[test]
    fn g1_short_horizon_single_segment() {
        let h = Hydra::build(&g1(), 0, &q(1, 2), DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(h.segments.len(), 1);
        let s = &h.segments[0];
        assert_eq!((s.sigma, &s.offset, &s.s_lo, &s.s_hi), (1, &qi(0), &qi(0), &q(1, 2)));
        assert_eq!(s.amplitude, qi(1));
    }

    #[test]
    fn g3_four_segments() {
        let g = g3();
        let h = Hydra::build(&g, 0, &q(3, 2), DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(h.segments.len(), 4);
        let direct = seg(&h, 0, 1);
        assert_eq!(direct[0].amplitude, qi(1));
        let back = seg(&h, 0, -1);
        assert_eq!(back[0].amplitude, q(-1, 3));
        assert_eq!((&back[0].s_lo, &back[0].s_hi), (&q(1, 2), &qi(1)));
        assert_eq!(back[0].time_at(&q(3, 4)), q(5, 4));
        for e in [1, 2] {
            let t = seg(&h, e, -1);
            assert_eq!(t[0].amplitude, q(2, 3));
            // time = 1 + distance from v
            assert_eq!(t[0].time_at(&q(3, 4)), q(5, 4));
            assert_eq!((&t[0].s_lo, &t[0].s_hi), (&q(1, 2), &qi(1)));
        }
    }

    #[test]
    fn g1_reflection_flips_sign() {
        let h = Hydra::build(&g1(), 0, &q(3, 2), DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(h.segments.len(), 2);
        let back = seg(&h, 0, -1)[0];
        assert_eq!(back.amplitude, qi(-1));
        assert_eq!(back.time_at(&q(3, 4)), q(5, 4));
        assert_eq!((&back.s_lo, &back.s_hi), (&q(1, 2), &qi(1)));
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = g3();
        assert!(matches!(
            Hydra::build(&g, 3, &qi(1), 10),
            Err(HydraError::NotBoundary(_))
        ));
        assert!(matches!(
            Hydra::build(&g, 0, &qi(0), 10),
            Err(HydraError::NonPositiveHorizon(_))
        ));
        assert!(matches!(
            Hydra::build(&g, 0, &qi(20), 5),
            Err(HydraError::EventCapExceeded { cap: 5, .. })
        ));
    }

    #[test]
    fn amplitude_rules() {
        let g = g1();
        let h = Hydra::build(&g, 0, &q(3, 2), DEFAULT_MAX_EVENTS).unwrap();
        let at = |p: GraphPoint, t: Rational| h.amplitude_at(&SpaceTimePoint::new(p, t));
        assert_eq!(at(GraphPoint::Vertex(0), qi(0)).unwrap(), qi(1));
        assert_eq!(at(GraphPoint::Vertex(1), qi(1)).unwrap(), qi(0));
        assert_eq!(at(GraphPoint::Edge { edge: 0, s: q(1, 2) }, q(3, 2)).unwrap(), qi(-1));
        assert!(at(GraphPoint::Edge { edge: 0, s: q(1, 2) }, qi(1)).is_err());
    }

    #[test]
    fn crossing_amplitude_is_branch_sum() {
        // two branches over one edge with amplitudes -4/9 and 1/3
        let mut h = Hydra::build(&g1(), 0, &qi(2), DEFAULT_MAX_EVENTS).unwrap();
        h.segments = vec![
            HydraSegment {
                source: 0,
                edge: 0,
                sigma: 1,
                offset: qi(0),
                s_lo: qi(0),
                s_hi: qi(1),
                amplitude: q(-4, 9),
            },
            HydraSegment {
                source: 0,
                edge: 0,
                sigma: -1,
                offset: qi(1),
                s_lo: qi(0),
                s_hi: qi(1),
                amplitude: q(1, 3),
            },
        ];
        let p = SpaceTimePoint::new(GraphPoint::Edge { edge: 0, s: q(1, 2) }, q(1, 2));
        assert_eq!(h.amplitude_at(&p).unwrap(), q(-1, 9));
    }

    #[test]
    fn corner_points_examples() {
        let g = g1();
        let u = HydraUnion::build(&g, &[0], &q(3, 2), DEFAULT_MAX_EVENTS).unwrap();
        let expected = BTreeSet::from([
            SpaceTimePoint::new(GraphPoint::Vertex(0), qi(0)),
            SpaceTimePoint::new(GraphPoint::Vertex(1), qi(1)),
            SpaceTimePoint::new(GraphPoint::Edge { edge: 0, s: q(1, 2) }, q(3, 2)),
        ]);
        assert_eq!(u.corner_points(), expected);

        let g = g3();
        let u = HydraUnion::build(&g, &[0], &q(3, 2), DEFAULT_MAX_EVENTS).unwrap();
        let expected = BTreeSet::from([
            SpaceTimePoint::new(GraphPoint::Vertex(0), qi(0)),
            SpaceTimePoint::new(GraphPoint::Vertex(3), qi(1)),
            SpaceTimePoint::new(GraphPoint::Edge { edge: 0, s: q(1, 2) }, q(3, 2)),
            SpaceTimePoint::new(GraphPoint::Edge { edge: 1, s: q(1, 2) }, q(3, 2)),
            SpaceTimePoint::new(GraphPoint::Edge { edge: 2, s: q(1, 2) }, q(3, 2)),
        ]);
        assert_eq!(u.corner_points(), expected);

        let g = g1();
        let u = HydraUnion::build(&g, &[0, 1], &q(3, 4), DEFAULT_MAX_EVENTS).unwrap();
        let e = |s: Rational, t: Rational| SpaceTimePoint::new(GraphPoint::Edge { edge: 0, s }, t);
        let expected = BTreeSet::from([
            SpaceTimePoint::new(GraphPoint::Vertex(0), qi(0)),
            SpaceTimePoint::new(GraphPoint::Vertex(1), qi(0)),
            e(q(3, 4), q(3, 4)),
            e(q(1, 4), q(3, 4)),
            e(q(1, 2), q(1, 2)),
        ]);
        assert_eq!(u.corner_points(), expected);
    }

    #[test]
    fn heads_examples() {
        let g = g3();
        let h = Hydra::build(&g, 0, &q(3, 2), DEFAULT_MAX_EVENTS).unwrap();
        let heads = h.heads(&qi(0));
        let expected: BTreeSet<GraphPoint> = (0..3)
            .map(|e| GraphPoint::Edge { edge: e, s: q(1, 2) })
            .collect();
        assert_eq!(heads, expected);
        assert_eq!(h.heads(&q(3, 2)), BTreeSet::from([GraphPoint::Vertex(0)]));

        let h = Hydra::build(&g1(), 0, &q(1, 2), DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(
            h.heads(&q(1, 4)),
            BTreeSet::from([GraphPoint::Edge { edge: 0, s: q(1, 4) }])
        );
    }

    #[test]
    fn fibers_examples() {
        let g = g1();
        let u = HydraUnion::build(&g, &[0], &q(3, 2), DEFAULT_MAX_EVENTS).unwrap();
        let mid = GraphPoint::Edge { edge: 0, s: q(1, 2) };
        assert_eq!(
            u.space_fiber(&mid),
            BTreeSet::from([
                SpaceTimePoint::new(mid.clone(), q(1, 2)),
                SpaceTimePoint::new(mid.clone(), q(3, 2)),
            ])
        );
        assert_eq!(
            u.time_fiber(&q(1, 2)),
            BTreeSet::from([SpaceTimePoint::new(mid, q(1, 2))])
        );
        let u = HydraUnion::build(&g, &[0, 1], &q(3, 4), DEFAULT_MAX_EVENTS).unwrap();
        assert_eq!(
            u.time_fiber(&qi(0)),
            BTreeSet::from([
                SpaceTimePoint::new(GraphPoint::Vertex(0), qi(0)),
                SpaceTimePoint::new(GraphPoint::Vertex(1), qi(0)),
            ])
        );
    }

    #[test]
    fn interior_events_conserve_amplitude() {
        let g = star(&[qi(1), q(1, 2), q(3, 4), q(5, 4)]);
        let h = Hydra::build(&g, 0, &qi(4), DEFAULT_MAX_EVENTS).unwrap();
        let mut checked = 0;
        for ev in &h.events {
            if !g.is_boundary(ev.vertex) && !ev.outgoing.is_empty() {
                let out = ev.outgoing.iter().fold(qi(0), |acc, (_, a)| acc + a);
                assert_eq!(out, ev.incoming);
                checked += 1;
            }
        }
        assert!(checked > 3);
    }

    #[test]
    fn dot_export_lists_segments() {
        let g = g3();
        let u = HydraUnion::build(&g, &[0], &q(3, 2), DEFAULT_MAX_EVENTS).unwrap();
        let dot = u.to_dot();
        assert!(dot.starts_with("graph hydra {"));
        assert_eq!(dot.matches(" -- ").count(), 4);
        assert!(dot.contains("label=\"-1/3\""));
    }
}
