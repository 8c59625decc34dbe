//! Waves driven by boundary controls, evaluated through the hydra.
//!
//! By Duhamel's principle the wave at `(x, t)` is the sum over hydra points
//! above `x` of `a(x, σ)·φ_γ(t - σ)`. Controls are piecewise linear with
//! rational knots, so every value is an exact rational.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::eikonal::{EikonalAlgebra, EikonalError};
use crate::graph::{GraphPoint, MetricGraph};
use crate::hydra::HydraUnion;
use crate::lattice::Partition;
use crate::rational::{format_rational, parse_rational, q, to_f64, Rational};
use crate::sampled::{grid_count, Placement, SampleError, SampledFunction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WaveError {
    #[error("malformed control document: {0}")]
    MalformedControl(String),
    #[error("control for {0:?}, which is not a boundary vertex")]
    NotBoundary(String),
    #[error("control for {0:?} is not among the hydra sources")]
    UnknownSource(String),
    #[error("control knots for {0:?} must have strictly increasing times >= 0")]
    UnsortedKnots(String),
    #[error("time {time} lies outside [0, {horizon}]")]
    TimeOutOfRange { time: String, horizon: String },
    #[error("expected {expected} sample rows of length {length}, got a different shape")]
    LengthMismatch { expected: usize, length: usize },
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Eikonal(#[from] EikonalError),
}

/// Piecewise-linear boundary controls. Zero for negative times; held at the
/// first and last knot values outside the knot range.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Control {
    pub knots: BTreeMap<usize, Vec<(Rational, Rational)>>,
}

impl Control {
    pub fn zero() -> Self {
        Control::default()
    }

    pub fn with(mut self, source: usize, knots: Vec<(Rational, Rational)>) -> Self {
        self.knots.insert(source, knots);
        self
    }

    /// Hat of height one centred at `center` with half-width `width`.
    pub fn hat(source: usize, center: &Rational, width: &Rational) -> Self {
        Control::zero().with(
            source,
            vec![
                (center - width, Rational::zero()),
                (center.clone(), Rational::one()),
                (center + width, Rational::zero()),
            ],
        )
    }

    /// Unit ramp `φ(t) = t`.
    pub fn ramp(source: usize, horizon: &Rational) -> Self {
        Control::zero().with(
            source,
            vec![(Rational::zero(), Rational::zero()), (horizon.clone(), horizon.clone())],
        )
    }

    pub fn value(&self, source: usize, t: &Rational) -> Rational {
        if t < &Rational::zero() {
            return Rational::zero();
        }
        let Some(knots) = self.knots.get(&source) else {
            return Rational::zero();
        };
        match knots.iter().position(|(tk, _)| tk >= t) {
            None => knots.last().map_or_else(Rational::zero, |k| k.1.clone()),
            Some(0) => knots[0].1.clone(),
            Some(k) => {
                let (t0, v0) = &knots[k - 1];
                let (t1, v1) = &knots[k];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    pub fn value_f64(&self, source: usize, t: &Rational) -> f64 {
        to_f64(&self.value(source, t))
    }

    /// Pointwise sum.
    pub fn add(&self, other: &Control) -> Control {
        let mut out = Control::zero();
        let sources: std::collections::BTreeSet<usize> =
            self.knots.keys().chain(other.knots.keys()).copied().collect();
        for s in sources {
            let mut times: Vec<Rational> = self
                .knots
                .get(&s)
                .into_iter()
                .chain(other.knots.get(&s))
                .flatten()
                .map(|k| k.0.clone())
                .collect();
            times.sort();
            times.dedup();
            let knots = times
                .into_iter()
                .map(|t| {
                    let v = self.value(s, &t) + other.value(s, &t);
                    (t, v)
                })
                .collect();
            out.knots.insert(s, knots);
        }
        out
    }

    /// Delay by `shift`: `φ(t - shift)`. Only meaningful when the control
    /// vanishes at its first knot.
    pub fn delayed(&self, shift: &Rational) -> Control {
        Control {
            knots: self
                .knots
                .iter()
                .map(|(s, ks)| (*s, ks.iter().map(|(t, v)| (t + shift, v.clone())).collect()))
                .collect(),
        }
    }

    /// Parses `{"<vertex id>": [{"t": "p/q", "value": "p/q"}, ...], ...}`.
    pub fn from_json(g: &MetricGraph, text: &str) -> Result<Control, WaveError> {
        let doc: BTreeMap<String, Vec<KnotDoc>> =
            serde_json::from_str(text).map_err(|e| WaveError::MalformedControl(e.to_string()))?;
        let mut control = Control::zero();
        for (id, knots) in doc {
            let v = g
                .vertex_index(&id)
                .map_err(|_| WaveError::MalformedControl(format!("unknown vertex {id:?}")))?;
            if !g.is_boundary(v) {
                return Err(WaveError::NotBoundary(id));
            }
            let mut parsed = Vec::with_capacity(knots.len());
            for k in knots {
                let t = json_rational(&k.t).ok_or_else(|| {
                    WaveError::MalformedControl(format!("knot time {} is not a rational", k.t))
                })?;
                let value = json_rational(&k.value).ok_or_else(|| {
                    WaveError::MalformedControl(format!("knot value {} is not a rational", k.value))
                })?;
                parsed.push((t, value));
            }
            let sorted = parsed.windows(2).all(|w| w[0].0 < w[1].0)
                && parsed.first().is_none_or(|k| k.0 >= Rational::zero());
            if !sorted {
                return Err(WaveError::UnsortedKnots(id));
            }
            control.knots.insert(v, parsed);
        }
        Ok(control)
    }

    pub fn to_json(&self, g: &MetricGraph) -> Value {
        let mut map = serde_json::Map::new();
        for (s, knots) in &self.knots {
            map.insert(
                g.vertex(*s).id.clone(),
                Value::Array(
                    knots
                        .iter()
                        .map(|(t, v)| json!({"t": format_rational(t), "value": format_rational(v)}))
                        .collect(),
                ),
            );
        }
        Value::Object(map)
    }
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct KnotDoc {
    t: Value,
    value: Value,
}

fn json_rational(v: &Value) -> Option<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => n.as_i64().map(|i| Rational::from_integer(i.into())),
        _ => None,
    }
}

fn check_control(h: &HydraUnion, f: &Control) -> Result<(), WaveError> {
    for s in f.knots.keys() {
        if h.hydra(*s).is_none() {
            return Err(WaveError::UnknownSource(h.graph().vertex(*s).id.clone()));
        }
    }
    Ok(())
}

/// `u^f(x, t)` for `0 ≤ t ≤ T`.
///
/// At an interior vertex the value is the common one-sided limit along the
/// incident edges; summed over arrivals `σ ≤ t` it equals
/// `(2/m)·a(v,σ)·φ(t - σ)`, which also covers arrivals exactly at `t`.
pub fn evaluate_wave(
    h: &HydraUnion,
    f: &Control,
    x: &GraphPoint,
    t: &Rational,
) -> Result<Rational, WaveError> {
    check_control(h, f)?;
    if t < &Rational::zero() || t > &h.horizon {
        return Err(WaveError::TimeOutOfRange {
            time: format_rational(t),
            horizon: format_rational(&h.horizon),
        });
    }
    Ok(wave_value(h, f, x, t))
}

fn wave_value(h: &HydraUnion, f: &Control, x: &GraphPoint, t: &Rational) -> Rational {
    let g = h.graph();
    let mut total = Rational::zero();
    match x {
        GraphPoint::Vertex(v) if g.is_boundary(*v) => {
            if h.hydra(*v).is_some() {
                total = f.value(*v, t);
            }
        }
        GraphPoint::Vertex(v) => {
            let weight = q(2, g.degree(*v) as i64);
            for hyd in &h.hydras {
                if !f.knots.contains_key(&hyd.source) {
                    continue;
                }
                for ev in hyd.events.iter().filter(|ev| ev.vertex == *v && &ev.time <= t) {
                    total += &weight * &ev.incoming * f.value(hyd.source, &(t - &ev.time));
                }
            }
        }
        GraphPoint::Edge { edge, s } => {
            for hyd in &h.hydras {
                if !f.knots.contains_key(&hyd.source) {
                    continue;
                }
                for seg in hyd.segments_on_edge(*edge).filter(|seg| seg.covers_s(s)) {
                    let sigma = seg.time_at(s);
                    if &sigma <= t {
                        total += &seg.amplitude * f.value(hyd.source, &(t - sigma));
                    }
                }
            }
        }
    }
    total
}

/// `u^f(·, t)` sampled on a grid.
pub fn wave_snapshot(
    h: &HydraUnion,
    f: &Control,
    t: &Rational,
    step: &Rational,
    placement: Placement,
) -> Result<SampledFunction, WaveError> {
    check_control(h, f)?;
    if t < &Rational::zero() || t > &h.horizon {
        return Err(WaveError::TimeOutOfRange {
            time: format_rational(t),
            horizon: format_rational(&h.horizon),
        });
    }
    let g = h.graph();
    Ok(SampledFunction::from_fn(g, step, placement, |e, s| {
        let p = g.edge_point(e, s.clone()).expect("grid point on edge");
        to_f64(&wave_value(h, f, &p, t))
    })?)
}

/// `Σ_i α^i_m ψ_i(r)` on the cells of one family, zero elsewhere. `psi[i]`
/// holds the samples of `ψ_i` at `r = (j + 1/2)·step`.
pub fn represent_on_family(
    p: &Partition,
    family: usize,
    alphas: &[Vec<Rational>],
    psi: &[Vec<f64>],
    step: &Rational,
) -> Result<SampledFunction, WaveError> {
    let fam = &p.families[family];
    let n = grid_count(&fam.delta, step, "a family cell length")?;
    if psi.len() != alphas.len() || psi.iter().any(|row| row.len() != n) {
        return Err(WaveError::LengthMismatch {
            expected: alphas.len(),
            length: n,
        });
    }
    let mut out = SampledFunction::zeros(p.graph(), step, Placement::Midpoints)?;
    for (m, cell) in fam.cells.iter().enumerate() {
        let lo = grid_count(&cell.lo, step, "a cell endpoint")?;
        for j in 0..n {
            let k = if cell.orientation > 0 { lo + j } else { lo + n - 1 - j };
            out.values[cell.edge][k] = alphas
                .iter()
                .zip(psi)
                .map(|(a, row)| to_f64(&a[m]) * row[j])
                .sum();
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reachability {
    pub reachable: bool,
    /// `‖y - Py‖ / ‖y‖`, zero for `y = 0`.
    pub residual: f64,
}

/// Tests membership in the joint reachable set of `sources`.
pub fn is_reachable(
    alg: &EikonalAlgebra,
    sources: &[usize],
    y: &SampledFunction,
    tol: f64,
) -> Result<Reachability, WaveError> {
    let py = alg.apply_joint_projection(sources, y)?;
    let norm = y.norm();
    let residual = if norm == 0.0 {
        0.0
    } else {
        y.zip_with(&py, |a, b| a - b)?.norm() / norm
    };
    Ok(Reachability {
        reachable: residual <= tol,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eikonal::assemble_algebra;
    use crate::fixtures::{g1, g3};
    use crate::hydra::DEFAULT_MAX_EVENTS;
    use crate::lattice::{build_partition, DEFAULT_MAX_LATTICE_POINTS};
    use crate::rational::qi;

    fn union(g: &MetricGraph, sources: &[usize], t: Rational) -> HydraUnion {
        HydraUnion::build(g, sources, &t, DEFAULT_MAX_EVENTS).unwrap()
    }

    fn ep(edge: usize, s: Rational) -> GraphPoint {
        GraphPoint::Edge { edge, s }
    }

    #[test]
    fn control_interpolation() {
        let f = Control::hat(0, &q(1, 2), &q(1, 4));
        assert_eq!(f.value(0, &q(1, 2)), qi(1));
        assert_eq!(f.value(0, &q(3, 8)), q(1, 2));
        assert_eq!(f.value(0, &qi(-1)), qi(0));
        assert_eq!(f.value(0, &qi(5)), qi(0));
        assert_eq!(f.value(1, &q(1, 2)), qi(0));
        let sum = f.add(&Control::ramp(0, &qi(1)));
        assert_eq!(sum.value(0, &q(1, 2)), q(3, 2));
    }

    #[test]
    fn control_json_round_trip() {
        let g = g3();
        let text = r#"{"g1": [{"t": "0", "value": "0"}, {"t": "1/2", "value": 1}]}"#;
        let f = Control::from_json(&g, text).unwrap();
        assert_eq!(f.value(0, &q(1, 4)), q(1, 2));
        let again = Control::from_json(&g, &f.to_json(&g).to_string()).unwrap();
        assert_eq!(again, f);
        assert!(matches!(
            Control::from_json(&g, r#"{"v": []}"#),
            Err(WaveError::NotBoundary(_))
        ));
        assert!(matches!(
            Control::from_json(&g, r#"{"g1": [{"t": "1", "value": "0"}, {"t": "1/2", "value": "0"}]}"#),
            Err(WaveError::UnsortedKnots(_))
        ));
        assert!(matches!(
            Control::from_json(&g, r#"{"g1": [{"t": "0.5", "value": "0"}]}"#),
            Err(WaveError::MalformedControl(_))
        ));
    }

    #[test]
    fn evaluation_examples() {
        let g = g1();
        let h = union(&g, &[0], q(1, 2));
        let f = Control::ramp(0, &qi(1));
        assert_eq!(evaluate_wave(&h, &f, &ep(0, q(1, 4)), &q(1, 2)).unwrap(), q(1, 4));
        assert_eq!(evaluate_wave(&h, &f, &ep(0, q(3, 4)), &q(1, 2)).unwrap(), qi(0));
        assert_eq!(evaluate_wave(&h, &f, &GraphPoint::Vertex(0), &q(1, 2)).unwrap(), q(1, 2));
        assert!(matches!(
            evaluate_wave(&h, &f, &ep(0, q(1, 4)), &qi(1)),
            Err(WaveError::TimeOutOfRange { .. })
        ));

        let g = g3();
        let h = union(&g, &[0], q(3, 2));
        let one = Control::zero().with(0, vec![(qi(0), qi(1))]);
        assert_eq!(evaluate_wave(&h, &one, &ep(1, q(3, 4)), &q(3, 2)).unwrap(), q(2, 3));
    }

    #[test]
    fn interior_vertex_is_continuous() {
        let g = g3();
        let h = union(&g, &[0], qi(3));
        let f = Control::hat(0, &q(1, 2), &q(1, 2));
        for t in [q(5, 4), q(3, 2), q(9, 4), qi(3)] {
            let at_v = evaluate_wave(&h, &f, &GraphPoint::Vertex(3), &t).unwrap();
            for e in 0..3 {
                let near = evaluate_wave(&h, &f, &ep(e, qi(1) - q(1, 1_000_000)), &t).unwrap();
                assert!((to_f64(&at_v) - to_f64(&near)).abs() < 1e-5, "edge {e} t {t}");
            }
        }
    }

    #[test]
    fn snapshot_examples() {
        let g = g1();
        let h = union(&g, &[0], q(1, 2));
        let step = q(1, 16);
        let zero = wave_snapshot(&h, &Control::zero(), &q(1, 2), &step, Placement::Nodes).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        // transport: u(s, 1/2) = φ(1/2 - s)
        let f = Control::hat(0, &q(1, 4), &q(1, 8));
        let snap = wave_snapshot(&h, &f, &q(1, 2), &step, Placement::Nodes).unwrap();
        for (k, v) in snap.values[0].iter().enumerate() {
            let s = snap.position(0, k);
            assert_eq!(*v, f.value_f64(0, &(q(1, 2) - s)));
        }
        let g = g3();
        let h = union(&g, &[0], qi(2));
        let shift = q(1, 4);
        let delayed = wave_snapshot(&h, &f.delayed(&shift), &q(3, 2), &step, Placement::Nodes).unwrap();
        let undelayed = wave_snapshot(&h, &f, &q(5, 4), &step, Placement::Nodes).unwrap();
        assert_eq!(delayed, undelayed);
    }

    #[test]
    fn representation_and_reachability() {
        let g = g3();
        let h = union(&g, &[0], q(3, 2));
        let p = build_partition(&h, DEFAULT_MAX_LATTICE_POINTS).unwrap();
        let alg = assemble_algebra(&p, &h).unwrap();
        let step = q(1, 8);
        let alphas: Vec<Vec<Rational>> = alg.block(1, 0).unwrap().alphas.iter().map(|a| a.entries.clone()).collect();
        let y = represent_on_family(&p, 1, &alphas, &[vec![1.0; 4], vec![0.0; 4]], &step).unwrap();
        for e in 0..3 {
            let want = if e == 0 { 1.0 } else { 0.0 };
            assert!(y.values[e][4..].iter().all(|v| (v - want).abs() < 1e-15));
        }
        let y = represent_on_family(&p, 1, &alphas, &[vec![0.0; 4], vec![3.0; 4]], &step).unwrap();
        assert!(y.values[0][4..].iter().all(|v| (v + 1.0).abs() < 1e-15));
        assert!(y.values[1][4..].iter().all(|v| (v - 2.0).abs() < 1e-15));
        assert!(is_reachable(&alg, &[0], &y, 1e-9).unwrap().reachable);

        let bad = SampledFunction::from_fn(&g, &step, Placement::Midpoints, |e, s| {
            if s > &q(1, 2) { [0.0, 1.0, -1.0][e] } else { 0.0 }
        })
        .unwrap();
        let rep = is_reachable(&alg, &[0], &bad, 1e-9).unwrap();
        assert!(!rep.reachable && (rep.residual - 1.0).abs() < 1e-12);

        let f = Control::hat(0, &q(3, 4), &q(1, 4)).add(&Control::hat(0, &q(1, 4), &q(1, 8)));
        let snap = wave_snapshot(&h, &f, &q(3, 2), &step, Placement::Midpoints).unwrap();
        assert!(is_reachable(&alg, &[0], &snap, 1e-9).unwrap().residual <= 1e-9);
        assert!(represent_on_family(&p, 1, &alphas, &[vec![1.0; 3]], &step).is_err());
    }
}
