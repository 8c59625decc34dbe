//! Lattice closures on the hydra, critical points and the family partition.
//!
//! The closure of the corner points under both fibers projects to the finite
//! critical set Θ. Once Θ is known, every hydra segment restricted to the
//! filled region splits into pieces that each cover one whole Θ-free cell,
//! and two cells belong to one family exactly when pieces over them share a
//! time interval. That turns the point-wise sweep into a finite bipartite
//! connectivity problem over cells and time intervals.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{GraphPoint, MetricGraph, Region};
use crate::hydra::{HydraError, HydraUnion, SpaceTimePoint};
use crate::rational::{format_rational, Rational};

/// Default cap on the number of points in a single lattice closure.
pub const DEFAULT_MAX_LATTICE_POINTS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("lattice closure exceeded {cap} points")]
    CapExceeded { cap: usize },
    #[error("seed point {0} is not on the hydra")]
    SeedNotOnHydra(String),
    #[error("internal: conflicting orientations for cell {0}")]
    OrientationConflict(String),
    #[error("internal: trace of source {vertex} is not single-valued on cell {cell}")]
    MultiValued { vertex: String, cell: String },
    #[error("internal: cells of one family have different lengths ({0})")]
    UnequalCells(String),
    #[error("internal: time intervals of family overlap partially ({0})")]
    PartialOverlap(String),
    #[error("point {0} is a critical point")]
    CriticalPoint(String),
    #[error("point {0} lies outside the filled region")]
    OutsideRegion(String),
    #[error("source {0} is not part of the hydra union")]
    UnknownSource(String),
    #[error(transparent)]
    Hydra(#[from] HydraError),
}

/// Smallest superset of `seed` closed under `π⁻¹∘π` and `ρ⁻¹∘ρ`.
pub fn lattice_closure(
    h: &HydraUnion,
    seed: &BTreeSet<SpaceTimePoint>,
    cap: usize,
) -> Result<BTreeSet<SpaceTimePoint>, LatticeError> {
    for p in seed {
        if !h.contains(p) {
            return Err(LatticeError::SeedNotOnHydra(format!(
                "({}, {})",
                h.graph().point_label(&p.point),
                format_rational(&p.time)
            )));
        }
    }
    let mut seen = seed.clone();
    let mut queue: VecDeque<SpaceTimePoint> = seed.iter().cloned().collect();
    let mut done_points = BTreeSet::new();
    let mut done_times = BTreeSet::new();
    while let Some(p) = queue.pop_front() {
        let mut fresh = Vec::new();
        if done_points.insert(p.point.clone()) {
            fresh.extend(h.space_fiber(&p.point));
        }
        if done_times.insert(p.time.clone()) {
            fresh.extend(h.time_fiber(&p.time));
        }
        for n in fresh {
            if seen.insert(n.clone()) {
                if seen.len() > cap {
                    return Err(LatticeError::CapExceeded { cap });
                }
                queue.push_back(n);
            }
        }
    }
    Ok(seen)
}

/// Θ: space projection of the lattice generated by all corner points.
pub fn critical_points(h: &HydraUnion, cap: usize) -> Result<BTreeSet<GraphPoint>, LatticeError> {
    let closure = lattice_closure(h, &h.corner_points(), cap)?;
    Ok(closure.into_iter().map(|p| p.point).collect())
}

/// Affine map `r ↦ constant + slope·r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine {
    pub constant: Rational,
    pub slope: Rational,
}

impl Affine {
    pub fn eval(&self, r: &Rational) -> Rational {
        &self.constant + &self.slope * r
    }
}

/// Open cell `(lo, hi)` on an edge. With orientation `+1` the family
/// parameter is `r = s - lo`, with `-1` it is `r = hi - s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub edge: usize,
    pub lo: Rational,
    pub hi: Rational,
    pub orientation: i8,
}

impl Cell {
    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn s_at(&self, r: &Rational) -> Rational {
        if self.orientation > 0 {
            &self.lo + r
        } else {
            &self.hi - r
        }
    }

    pub fn point_at(&self, r: &Rational) -> GraphPoint {
        GraphPoint::Edge {
            edge: self.edge,
            s: self.s_at(r),
        }
    }

    pub fn r_of(&self, s: &Rational) -> Rational {
        if self.orientation > 0 {
            s - &self.lo
        } else {
            &self.hi - s
        }
    }

    pub fn contains_s(&self, s: &Rational) -> bool {
        &self.lo < s && s < &self.hi
    }
}

/// One time interval `I_i = (start, start + δ)`. Along the family parameter
/// the trace time is `start + r` when `sign = +1` and `start + δ - r` when
/// `sign = -1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeInterval {
    pub start: Rational,
    pub sign: i8,
}

/// A hydra segment restricted to one cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub cell: usize,
    pub interval: usize,
    pub source: usize,
    pub segment: usize,
    pub sigma: i8,
    pub amplitude: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub cells: Vec<Cell>,
    pub delta: Rational,
    /// Sorted by start time.
    pub intervals: Vec<TimeInterval>,
    pub pieces: Vec<Piece>,
}

impl Family {
    pub fn size(&self) -> usize {
        self.cells.len()
    }

    pub fn interval_bounds(&self, i: usize) -> (Rational, Rational) {
        let start = self.intervals[i].start.clone();
        let end = &start + &self.delta;
        (start, end)
    }

    /// The affine trace time over interval `i`.
    pub fn tau(&self, i: usize) -> Affine {
        let iv = &self.intervals[i];
        if iv.sign > 0 {
            Affine {
                constant: iv.start.clone(),
                slope: Rational::one(),
            }
        } else {
            Affine {
                constant: &iv.start + &self.delta,
                slope: -Rational::one(),
            }
        }
    }

    /// Whether the source hydra meets `ρ⁻¹(I_i)` over this family.
    pub fn present(&self, source: usize, i: usize) -> bool {
        self.pieces
            .iter()
            .any(|p| p.source == source && p.interval == i)
    }

    /// `τ_i^{γ,Φ}` for every `i`, `None` where the trace is absent.
    pub fn tau_functions(&self, source: usize) -> Vec<Option<Affine>> {
        (0..self.intervals.len())
            .map(|i| self.present(source, i).then(|| self.tau(i)))
            .collect()
    }

    pub fn piece(&self, source: usize, cell: usize, interval: usize) -> Option<&Piece> {
        self.pieces
            .iter()
            .find(|p| p.source == source && p.cell == cell && p.interval == interval)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    graph: MetricGraph,
    pub horizon: Rational,
    pub sources: Vec<usize>,
    pub critical: BTreeSet<GraphPoint>,
    /// `Ω^T[Σ]`.
    pub filled: Region,
    pub families: Vec<Family>,
}

/// Builds `Π^T_Σ` for the sources of the union.
pub fn build_partition(h: &HydraUnion, cap: usize) -> Result<Partition, LatticeError> {
    let g = h.graph();
    let critical = critical_points(h, cap)?;
    let sources = h.sources();
    let source_points: Vec<GraphPoint> = sources.iter().map(|&s| GraphPoint::Vertex(s)).collect();
    let filled = g.neighborhood(&source_points, &h.horizon);

    // atomic cells
    let mut cells: Vec<(usize, Rational, Rational)> = Vec::new();
    for (edge, list) in filled.intervals.iter().enumerate() {
        let cuts: Vec<&Rational> = critical
            .iter()
            .filter_map(|p| match p {
                GraphPoint::Edge { edge: e, s } if *e == edge => Some(s),
                _ => None,
            })
            .collect();
        for (a, b) in list {
            let mut bounds = vec![a.clone(), b.clone()];
            bounds.extend(cuts.iter().filter(|s| a < **s && **s < b).map(|s| (*s).clone()));
            bounds.sort();
            for w in bounds.windows(2) {
                cells.push((edge, w[0].clone(), w[1].clone()));
            }
        }
    }
    cells.sort();

    // pieces keyed by global cell, grouped by time interval
    struct RawPiece {
        cell: usize,
        key: (Rational, Rational),
        source: usize,
        segment: usize,
        sigma: i8,
        amplitude: Rational,
    }
    let mut raw = Vec::new();
    for hyd in &h.hydras {
        for (k, seg) in hyd.segments.iter().enumerate() {
            for (c, (edge, lo, hi)) in cells.iter().enumerate() {
                if *edge != seg.edge || hi <= &seg.s_lo || lo >= &seg.s_hi {
                    continue;
                }
                let (ta, tb) = (seg.time_at(lo), seg.time_at(hi));
                let key = if ta < tb { (ta, tb) } else { (tb, ta) };
                debug_assert!(seg.covers_s(lo) && seg.covers_s(hi), "segment ends at a cell endpoint");
                raw.push(RawPiece {
                    cell: c,
                    key,
                    source: hyd.source,
                    segment: k,
                    sigma: seg.sigma,
                    amplitude: seg.amplitude.clone(),
                });
            }
        }
    }
    let mut time_keys: BTreeMap<(Rational, Rational), usize> = BTreeMap::new();
    for p in &raw {
        let next = time_keys.len();
        time_keys.entry(p.key.clone()).or_insert(next);
    }
    let key_of: Vec<(Rational, Rational)> = {
        let mut v = vec![(Rational::zero(), Rational::zero()); time_keys.len()];
        for (k, &i) in &time_keys {
            v[i] = k.clone();
        }
        v
    };
    let mut cell_pieces: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
    let mut time_pieces: Vec<Vec<usize>> = vec![Vec::new(); time_keys.len()];
    for (k, p) in raw.iter().enumerate() {
        cell_pieces[p.cell].push(k);
        time_pieces[time_keys[&p.key]].push(k);
    }

    let label = |c: usize| {
        let (e, lo, hi) = &cells[c];
        format!(
            "{}:({}, {})",
            g.edge(*e).id,
            format_rational(lo),
            format_rational(hi)
        )
    };

    // Orientation BFS over the bipartite cell/time graph.
    let mut orient: Vec<Option<i8>> = vec![None; cells.len()];
    let mut sign: Vec<Option<i8>> = vec![None; time_keys.len()];
    let mut families = Vec::new();
    for start in 0..cells.len() {
        if orient[start].is_some() {
            continue;
        }
        orient[start] = Some(1);
        let mut member_cells = vec![start];
        let mut member_times = Vec::new();
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            let o = orient[c].expect("queued cells are oriented");
            for &pk in &cell_pieces[c] {
                let p = &raw[pk];
                let t = time_keys[&p.key];
                let eps = p.sigma * o;
                match sign[t] {
                    Some(e) if e != eps => return Err(LatticeError::OrientationConflict(label(c))),
                    Some(_) => continue,
                    None => {
                        sign[t] = Some(eps);
                        member_times.push(t);
                    }
                }
                for &qk in &time_pieces[t] {
                    let other = &raw[qk];
                    let ob = eps * other.sigma;
                    match orient[other.cell] {
                        Some(x) if x != ob => {
                            return Err(LatticeError::OrientationConflict(label(other.cell)))
                        }
                        Some(_) => {}
                        None => {
                            orient[other.cell] = Some(ob);
                            member_cells.push(other.cell);
                            queue.push_back(other.cell);
                        }
                    }
                }
            }
        }
        member_cells.sort();
        member_times.sort_by(|a, b| key_of[*a].cmp(&key_of[*b]));

        let delta = {
            let (_, lo, hi) = &cells[member_cells[0]];
            hi - lo
        };
        for &c in &member_cells {
            let (_, lo, hi) = &cells[c];
            if hi - lo != delta {
                return Err(LatticeError::UnequalCells(label(c)));
            }
        }
        for w in member_times.windows(2) {
            if key_of[w[1]].0 < key_of[w[0]].1 {
                return Err(LatticeError::PartialOverlap(format!(
                    "({}, {}) and ({}, {})",
                    format_rational(&key_of[w[0]].0),
                    format_rational(&key_of[w[0]].1),
                    format_rational(&key_of[w[1]].0),
                    format_rational(&key_of[w[1]].1)
                )));
            }
        }
        let local_cell: BTreeMap<usize, usize> =
            member_cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let local_time: BTreeMap<usize, usize> =
            member_times.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let family_cells: Vec<Cell> = member_cells
            .iter()
            .map(|&c| {
                let (edge, lo, hi) = &cells[c];
                Cell {
                    edge: *edge,
                    lo: lo.clone(),
                    hi: hi.clone(),
                    orientation: orient[c].expect("member cells are oriented"),
                }
            })
            .collect();
        let intervals: Vec<TimeInterval> = member_times
            .iter()
            .map(|&t| TimeInterval {
                start: key_of[t].0.clone(),
                sign: sign[t].expect("member times are signed"),
            })
            .collect();
        let mut pieces = Vec::new();
        let mut seen = BTreeSet::new();
        for &c in &member_cells {
            for &pk in &cell_pieces[c] {
                let p = &raw[pk];
                let piece = Piece {
                    cell: local_cell[&c],
                    interval: local_time[&time_keys[&p.key]],
                    source: p.source,
                    segment: p.segment,
                    sigma: p.sigma,
                    amplitude: p.amplitude.clone(),
                };
                if !seen.insert((piece.source, piece.cell, piece.interval)) {
                    return Err(LatticeError::MultiValued {
                        vertex: g.vertex(p.source).id.clone(),
                        cell: label(c),
                    });
                }
                pieces.push(piece);
            }
        }
        pieces.sort_by(|a, b| {
            (a.interval, a.source, a.cell).cmp(&(b.interval, b.source, b.cell))
        });
        families.push(Family {
            cells: family_cells,
            delta,
            intervals,
            pieces,
        });
    }

    Ok(Partition {
        graph: g.clone(),
        horizon: h.horizon.clone(),
        sources,
        critical,
        filled,
        families,
    })
}

impl Partition {
    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// Family, cell index and parameter of a non-critical filled point.
    pub fn locate(&self, x: &GraphPoint) -> Result<(usize, usize, Rational), LatticeError> {
        let label = || self.graph.point_label(x);
        if self.critical.contains(x) {
            return Err(LatticeError::CriticalPoint(label()));
        }
        if let GraphPoint::Edge { edge, s } = x {
            for (f, fam) in self.families.iter().enumerate() {
                for (m, cell) in fam.cells.iter().enumerate() {
                    if cell.edge == *edge && cell.contains_s(s) {
                        return Ok((f, m, cell.r_of(s)));
                    }
                }
            }
        }
        Err(LatticeError::OutsideRegion(label()))
    }

    /// `Λ^T_Σ[x]`: one point per cell of x's family, in cell order.
    pub fn determination_set(&self, x: &GraphPoint) -> Result<Vec<GraphPoint>, LatticeError> {
        let (f, _, r) = self.locate(x)?;
        Ok(self.families[f]
            .cells
            .iter()
            .map(|c| c.point_at(&r))
            .collect())
    }

    /// Union of all cells as a region (vertices excluded).
    pub fn cell_region(&self) -> Region {
        let mut per_edge = vec![Vec::new(); self.graph.edges().len()];
        for fam in &self.families {
            for c in &fam.cells {
                per_edge[c.edge].push((c.lo.clone(), c.hi.clone()));
            }
        }
        Region::from_intervals(per_edge, BTreeSet::new())
    }

    /// Cell-by-cell check that cells are disjoint and, together with Θ,
    /// exhaust the filled region.
    pub fn check_cover(&self) -> Result<(), String> {
        let mut per_edge: Vec<Vec<(Rational, Rational)>> = vec![Vec::new(); self.graph.edges().len()];
        for fam in &self.families {
            for c in &fam.cells {
                per_edge[c.edge].push((c.lo.clone(), c.hi.clone()));
            }
        }
        for (e, list) in per_edge.iter_mut().enumerate() {
            list.sort();
            for w in list.windows(2) {
                if w[1].0 < w[0].1 {
                    return Err(format!("overlapping cells on edge {}", self.graph.edge(e).id));
                }
            }
        }
        let expected = self.filled.remove_points(&self.critical);
        for (e, (cells, target)) in per_edge.iter().zip(&expected.intervals).enumerate() {
            if cells != target {
                return Err(format!("cells on edge {} do not match Ω^T minus Θ", self.graph.edge(e).id));
            }
        }
        if !self.filled.vertices.iter().all(|v| self.critical.contains(&GraphPoint::Vertex(*v))) {
            return Err("filled vertex missing from Θ".into());
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let g = &self.graph;
        let families: Vec<Value> = self
            .families
            .iter()
            .map(|fam| {
                let cells: Vec<Value> = fam
                    .cells
                    .iter()
                    .map(|c| {
                        json!({
                            "edge": g.edge(c.edge).id,
                            "lo": format_rational(&c.lo),
                            "hi": format_rational(&c.hi),
                            "orientation": c.orientation,
                        })
                    })
                    .collect();
                let intervals: Vec<Value> = (0..fam.intervals.len())
                    .map(|i| {
                        let (a, b) = fam.interval_bounds(i);
                        let tau = fam.tau(i);
                        json!({
                            "start": format_rational(&a),
                            "end": format_rational(&b),
                            "tau": {
                                "constant": format_rational(&tau.constant),
                                "slope": format_rational(&tau.slope),
                            },
                        })
                    })
                    .collect();
                let traces: Vec<Value> = fam
                    .pieces
                    .iter()
                    .map(|p| {
                        json!({
                            "source": g.vertex(p.source).id,
                            "interval": p.interval,
                            "cell": p.cell,
                            "amplitude": format_rational(&p.amplitude),
                        })
                    })
                    .collect();
                json!({
                    "M": fam.size(),
                    "N": fam.intervals.len(),
                    "delta": format_rational(&fam.delta),
                    "cells": cells,
                    "intervals": intervals,
                    "traces": traces,
                })
            })
            .collect();
        json!({
            "horizon": format_rational(&self.horizon),
            "sources": self.sources.iter().map(|&s| g.vertex(s).id.clone()).collect::<Vec<_>>(),
            "critical_points": self.critical.iter().map(|p| g.point_json(p)).collect::<Vec<_>>(),
            "families": families,
        })
    }

    /// CSV of the critical points: `kind,id,s`.
    pub fn critical_csv(&self) -> String {
        let mut out = String::from("kind,id,s\n");
        for p in &self.critical {
            match p {
                GraphPoint::Vertex(v) => {
                    out.push_str(&format!("vertex,{},\n", self.graph.vertex(*v).id));
                }
                GraphPoint::Edge { edge, s } => {
                    out.push_str(&format!(
                        "edge,{},{}\n",
                        self.graph.edge(*edge).id,
                        format_rational(s)
                    ));
                }
            }
        }
        out
    }
}
