//! Functions on the graph sampled on a uniform per-edge grid.
//!
//! Two placements are used. `Nodes` puts samples at `s = k·h` including both
//! edge ends (the finite-difference solver works there). `Midpoints` puts
//! them at `s = (k + 1/2)·h`; this is the placement for the `L₂` pairing
//! `h·Σ` and for block operators, since cell endpoints on the grid are then
//! never sampled.

use thiserror::Error;

use crate::graph::{GraphPoint, MetricGraph};
use crate::rational::{format_rational, q, steps, to_f64, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SampleError {
    #[error("grid step {step} does not divide {what}")]
    Incommensurable { step: String, what: String },
    #[error("grid step must be positive")]
    NonPositiveStep,
    #[error("sampled functions live on different grids")]
    GridMismatch,
    #[error("operation requires {0:?} placement")]
    WrongPlacement(Placement),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Nodes,
    Midpoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub step: Rational,
    pub placement: Placement,
    /// One vector per edge, ordered by increasing `s`.
    pub values: Vec<Vec<f64>>,
}

/// Number of grid intervals of `step` in `value`, or an error naming `what`.
pub fn grid_count(value: &Rational, step: &Rational, what: &str) -> Result<usize, SampleError> {
    steps(value, step).ok_or_else(|| SampleError::Incommensurable {
        step: format_rational(step),
        what: what.to_string(),
    })
}

impl SampledFunction {
    pub fn zeros(g: &MetricGraph, step: &Rational, placement: Placement) -> Result<Self, SampleError> {
        Self::from_fn(g, step, placement, |_, _| 0.0)
    }

    /// Samples `f(edge, s)` at every grid position.
    pub fn from_fn(
        g: &MetricGraph,
        step: &Rational,
        placement: Placement,
        mut f: impl FnMut(usize, &Rational) -> f64,
    ) -> Result<Self, SampleError> {
        if step <= &Rational::from_integer(0.into()) {
            return Err(SampleError::NonPositiveStep);
        }
        let mut values = Vec::with_capacity(g.edges().len());
        for (e, edge) in g.edges().iter().enumerate() {
            grid_count(&edge.length, step, &format!("length of edge {}", edge.id))?;
            let row = positions(&edge.length, step, placement)
                .iter()
                .map(|s| f(e, s))
                .collect();
            values.push(row);
        }
        Ok(SampledFunction {
            step: step.clone(),
            placement,
            values,
        })
    }

    pub fn positions(&self, g: &MetricGraph, edge: usize) -> Vec<Rational> {
        positions(g.length(edge), &self.step, self.placement)
    }

    /// The graph point of sample `k` on `edge` (edge ends become vertices).
    pub fn point(&self, g: &MetricGraph, edge: usize, k: usize) -> GraphPoint {
        let s = self.position(edge, k);
        g.edge_point(edge, s).expect("grid positions lie on the edge")
    }

    pub fn position(&self, _edge: usize, k: usize) -> Rational {
        let k = Rational::from_integer((k as i64).into());
        match self.placement {
            Placement::Nodes => &self.step * k,
            Placement::Midpoints => &self.step * (k + q(1, 2)),
        }
    }

    pub fn len(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.step == other.step
            && self.placement == other.placement
            && self.values.iter().map(Vec::len).eq(other.values.iter().map(Vec::len))
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    /// Inverse of [`flatten`](Self::flatten) on the same grid.
    pub fn with_flat(&self, flat: &[f64]) -> Self {
        assert_eq!(flat.len(), self.len(), "flat vector length");
        let mut out = self.clone();
        let mut it = flat.iter();
        for row in &mut out.values {
            for v in row.iter_mut() {
                *v = *it.next().expect("length checked");
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for v in out.values.iter_mut().flatten() {
            *v = f(*v);
        }
        out
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self, SampleError> {
        if !self.same_grid(other) {
            return Err(SampleError::GridMismatch);
        }
        let mut out = self.clone();
        for (a, b) in out.values.iter_mut().flatten().zip(other.values.iter().flatten()) {
            *a = f(*a, *b);
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, SampleError> {
        Ok(self.zip_with(other, |a, b| a - b)?.max_abs())
    }

    /// `L₂` pairing; on midpoints the midpoint rule `h·Σ`, on nodes the
    /// trapezoid rule.
    pub fn dot(&self, other: &Self) -> Result<f64, SampleError> {
        if !self.same_grid(other) {
            return Err(SampleError::GridMismatch);
        }
        let h = to_f64(&self.step);
        let mut total = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            let n = a.len();
            for k in 0..n {
                let w = match self.placement {
                    Placement::Nodes if k == 0 || k + 1 == n => 0.5,
                    _ => 1.0,
                };
                total += w * a[k] * b[k];
            }
        }
        Ok(h * total)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).expect("same grid").sqrt()
    }

    /// Midpoint samples at spacing `2·step` taken from node samples at `step`.
    pub fn coarse_midpoints(&self) -> Result<Self, SampleError> {
        if self.placement != Placement::Nodes {
            return Err(SampleError::WrongPlacement(Placement::Nodes));
        }
        Ok(SampledFunction {
            step: &self.step * Rational::from_integer(2.into()),
            placement: Placement::Midpoints,
            values: self
                .values
                .iter()
                .map(|row| row.iter().skip(1).step_by(2).copied().collect())
                .collect(),
        })
    }

    /// CSV with columns `edge,s,value`; floats at 17 significant digits.
    pub fn to_csv(&self, g: &MetricGraph) -> String {
        let mut out = String::from("edge,s,value\n");
        for (e, row) in self.values.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{:.16e}\n",
                    g.edge(e).id,
                    format_rational(&self.position(e, k)),
                    v
                ));
            }
        }
        out
    }
}

fn positions(length: &Rational, step: &Rational, placement: Placement) -> Vec<Rational> {
    let n = steps(length, step).expect("commensurability checked");
    match placement {
        Placement::Nodes => (0..=n)
            .map(|k| step * Rational::from_integer((k as i64).into()))
            .collect(),
        Placement::Midpoints => (0..n)
            .map(|k| step * (Rational::from_integer((k as i64).into()) + q(1, 2)))
            .collect(),
    }
}
