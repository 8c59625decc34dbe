//! Numerical cross-checks that share nothing with the hydra construction.
//!
//! The finite-difference solver uses the unit-CFL leapfrog scheme, which is
//! exact for transport along each edge; at an interior vertex the update
//! `u_v⁺ = (2/m)·Σ u_nbr - u_v⁻` reproduces the reflection and transmission
//! coefficients exactly. Reachable projections come from wave snapshots of
//! hat controls, and eikonals from Stieltjes sums over those projections.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use thiserror::Error;

use crate::eikonal::{assemble_algebra, partition_grid, EikonalError};
use crate::graph::{End, MetricGraph};
use crate::hydra::{HydraError, HydraUnion, DEFAULT_MAX_EVENTS};
use crate::lattice::{build_partition, LatticeError, DEFAULT_MAX_LATTICE_POINTS};
use crate::rational::{format_rational, q, rational_gcd, to_f64, Rational};
use crate::sampled::{grid_count, Placement, SampleError, SampledFunction};
use crate::wave::{Control, WaveError};

/// Relative singular-value threshold for numerical ranks.
pub const RANK_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("control is attached to {0:?}, which is not a boundary vertex")]
    NotBoundary(String),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("snapshot spacing {spacing} does not divide {what}")]
    Spacing { spacing: String, what: String },
    #[error("source {0:?} was not recorded")]
    UnknownSource(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Hydra(#[from] HydraError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Eikonal(#[from] EikonalError),
    #[error(transparent)]
    Wave(#[from] WaveError),
}

/// Runs the leapfrog scheme with time step `dt` up to `horizon`, calling
/// `record(n, nodes)` after every level `n = 0..=horizon/dt`. `nodes[e]`
/// holds the values at `s = k·dt`, `k = 0..=L_e/dt`.
pub fn fd_evolve(
    g: &MetricGraph,
    f: &Control,
    horizon: &Rational,
    dt: &Rational,
    mut record: impl FnMut(usize, &[Vec<f64>]),
) -> Result<(), OracleError> {
    if dt <= &Rational::zero() {
        return Err(OracleError::NonPositive("time step"));
    }
    for s in f.knots.keys() {
        if !g.is_boundary(*s) {
            return Err(OracleError::NotBoundary(g.vertex(*s).id.clone()));
        }
    }
    let steps = grid_count(horizon, dt, "the horizon")?;
    let sizes = g
        .edges()
        .iter()
        .map(|e| grid_count(&e.length, dt, &format!("length of edge {}", e.id)))
        .collect::<Result<Vec<_>, _>>()?;
    let nv = g.vertices().len();
    let mut prev: Vec<Vec<f64>> = sizes.iter().map(|&n| vec![0.0; n + 1]).collect();
    let mut cur = prev.clone();
    let mut next = prev.clone();
    let mut prev_v = vec![0.0; nv];
    let mut cur_v = vec![0.0; nv];
    let mut next_v = vec![0.0; nv];

    let boundary_value = |v: usize, n: usize| -> f64 {
        let t = dt * Rational::from_integer((n as i64).into());
        f.value_f64(v, &t)
    };
    let write_vertices = |nodes: &mut [Vec<f64>], values: &[f64]| {
        for (e, edge) in g.edges().iter().enumerate() {
            let last = nodes[e].len() - 1;
            nodes[e][0] = values[edge.from];
            nodes[e][last] = values[edge.to];
        }
    };
    for (v, value) in cur_v.iter_mut().enumerate() {
        if g.is_boundary(v) {
            *value = boundary_value(v, 0);
        }
    }
    write_vertices(&mut cur, &cur_v);
    record(0, &cur);
    for n in 0..steps {
        for (e, row) in next.iter_mut().enumerate() {
            let c = &cur[e];
            let p = &prev[e];
            for j in 1..row.len() - 1 {
                row[j] = c[j + 1] + c[j - 1] - p[j];
            }
        }
        for v in 0..nv {
            next_v[v] = if g.is_boundary(v) {
                boundary_value(v, n + 1)
            } else {
                let ends = g.incident(v);
                let sum: f64 = ends
                    .iter()
                    .map(|end| {
                        let row = &cur[end.edge];
                        match end.end {
                            End::Start => row[1],
                            End::Finish => row[row.len() - 2],
                        }
                    })
                    .sum();
                2.0 / ends.len() as f64 * sum - prev_v[v]
            };
        }
        write_vertices(&mut next, &next_v);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        std::mem::swap(&mut prev_v, &mut cur_v);
        std::mem::swap(&mut cur_v, &mut next_v);
        record(n + 1, &cur);
    }
    Ok(())
}

/// Node values of the finite-difference wave at `horizon`, grid step `h`.
pub fn fd_solve(
    g: &MetricGraph,
    f: &Control,
    horizon: &Rational,
    h: &Rational,
) -> Result<SampledFunction, OracleError> {
    let mut last = Vec::new();
    fd_evolve(g, f, horizon, h, |_, nodes| last = nodes.to_vec())?;
    Ok(SampledFunction {
        step: h.clone(),
        placement: Placement::Nodes,
        values: last,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericProjection {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub controls: usize,
}

/// Orthogonal projection onto the column space, by SVD with a relative
/// threshold of [`RANK_THRESHOLD`].
pub fn column_space_projection(columns: &DMatrix<f64>) -> NumericProjection {
    let n = columns.nrows();
    if columns.ncols() == 0 {
        return NumericProjection {
            matrix: DMatrix::zeros(n, n),
            rank: 0,
            singular_values: Vec::new(),
            controls: 0,
        };
    }
    let svd = columns.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let max = sv.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..sv.len())
        .filter(|&i| max > 0.0 && sv[i] > RANK_THRESHOLD * max)
        .collect();
    let mut basis = DMatrix::zeros(n, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        basis.set_column(k, &u.column(i));
    }
    let mut sorted = sv;
    sorted.sort_by(|a, b| b.total_cmp(a));
    NumericProjection {
        matrix: &basis * basis.transpose(),
        rank: keep.len(),
        singular_values: sorted,
        controls: columns.ncols(),
    }
}

/// Wave snapshots `u^{φ_k}(·, ξ)` of shifted hat controls, sampled at the
/// midpoints of an `L₂` grid.
///
/// By time invariance the snapshot at horizon `ξ` of the hat centred at
/// `k·w` equals the snapshot at time `ξ - (k-1)·w` of the hat centred at `w`,
/// so one solver run per source serves every horizon.
#[derive(Debug, Clone)]
pub struct SnapshotBank {
    pub step: Rational,
    pub spacing: Rational,
    pub horizon: Rational,
    pub sources: Vec<usize>,
    template: SampledFunction,
    /// `snapshots[source][k]` is the base-hat wave at time `(k+1)·w`.
    snapshots: Vec<Vec<DVector<f64>>>,
}

impl SnapshotBank {
    pub fn record(
        g: &MetricGraph,
        sources: &[usize],
        horizon: &Rational,
        step: &Rational,
        spacing: &Rational,
    ) -> Result<SnapshotBank, OracleError> {
        if spacing <= &Rational::zero() {
            return Err(OracleError::NonPositive("snapshot spacing"));
        }
        let count = crate::rational::steps(horizon, spacing).ok_or_else(|| OracleError::Spacing {
            spacing: format_rational(spacing),
            what: "the horizon".into(),
        })?;
        let template = SampledFunction::zeros(g, step, Placement::Midpoints)?;
        let half = step * q(1, 2);
        let mut values: Vec<&Rational> = vec![&half, spacing, horizon];
        values.extend(g.edges().iter().map(|e| &e.length));
        let dt = rational_gcd(values).expect("positive inputs");
        let ratio = grid_count(step, &dt, "the grid step")?;
        let per_spacing = grid_count(spacing, &dt, "the snapshot spacing")?;
        let mut snapshots = Vec::new();
        for &s in sources {
            if !g.is_boundary(s) {
                return Err(OracleError::NotBoundary(g.vertex(s).id.clone()));
            }
            let hat = Control::hat(s, spacing, spacing);
            let mut list = Vec::with_capacity(count);
            fd_evolve(g, &hat, horizon, &dt, |n, nodes| {
                if n == 0 || n % per_spacing != 0 {
                    return;
                }
                let flat: Vec<f64> = nodes
                    .iter()
                    .flat_map(|row| {
                        let cells = (row.len() - 1) / ratio;
                        (0..cells).map(move |k| row[k * ratio + ratio / 2])
                    })
                    .collect();
                list.push(DVector::from_vec(flat));
            })?;
            debug_assert_eq!(list.len(), count);
            snapshots.push(list);
        }
        Ok(SnapshotBank {
            step: step.clone(),
            spacing: spacing.clone(),
            horizon: horizon.clone(),
            sources: sources.to_vec(),
            template,
            snapshots,
        })
    }

    pub fn template(&self) -> &SampledFunction {
        &self.template
    }

    /// Numerical projection onto the span of snapshots at horizon `xi`.
    pub fn projection(&self, sources: &[usize], xi: &Rational) -> Result<NumericProjection, OracleError> {
        let count = crate::rational::steps(xi, &self.spacing).ok_or_else(|| OracleError::Spacing {
            spacing: format_rational(&self.spacing),
            what: format!("the horizon {}", format_rational(xi)),
        })?;
        let mut cols = Vec::new();
        for s in sources {
            let idx = self
                .sources
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| OracleError::UnknownSource(s.to_string()))?;
            cols.extend(self.snapshots[idx].iter().take(count).cloned());
        }
        let n = self.template.len();
        let m = if cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        Ok(column_space_projection(&m))
    }

    /// Midpoint Stieltjes sum `Σ_k (k - 1/2)h·(P^{kh} - P^{(k-1)h})` at grid
    /// step `h`. Jumps of the discrete projections happen only at odd
    /// multiples of `h/2`, so on the grid this sum is the exact eikonal.
    pub fn eikonal(&self, source: usize) -> Result<DMatrix<f64>, OracleError> {
        let h = &self.step;
        let k_max = grid_count(&self.horizon, h, "the horizon")?;
        let n = self.template.len();
        let mut out = DMatrix::zeros(n, n);
        let mut prev = DMatrix::zeros(n, n);
        for k in 1..=k_max {
            let xi = h * Rational::from_integer((k as i64).into());
            let p = self.projection(&[source], &xi)?.matrix;
            let weight = to_f64(&(&xi - h * q(1, 2)));
            out += (&p - &prev) * weight;
            prev = p;
        }
        Ok(out)
    }
}

/// Numerical projection onto the reachable set from `n_controls` hats per
/// source with spacing `horizon / n_controls`.
pub fn numeric_reachable_projection(
    g: &MetricGraph,
    sources: &[usize],
    horizon: &Rational,
    h: &Rational,
    n_controls: usize,
) -> Result<NumericProjection, OracleError> {
    if n_controls == 0 {
        return Err(OracleError::NonPositive("control count"));
    }
    let spacing = horizon / Rational::from_integer((n_controls as i64).into());
    let bank = SnapshotBank::record(g, sources, horizon, h, &spacing)?;
    bank.projection(sources, horizon)
}

/// Matrix of a linear map on midpoint samples, column by column.
pub fn operator_matrix<E>(
    template: &SampledFunction,
    mut op: impl FnMut(&SampledFunction) -> Result<SampledFunction, E>,
) -> Result<DMatrix<f64>, E> {
    let n = template.len();
    let mut m = DMatrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let col = op(&template.with_flat(&unit))?.flatten();
        unit[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    Ok(m)
}

pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Horizons `ξ_k = kT/K`, `k = 1..=K`.
pub fn xi_grid(horizon: &Rational, k: usize) -> Vec<Rational> {
    (1..=k)
        .map(|i| horizon * q(i as i64, k as i64))
        .collect()
}

/// Largest `L₂` grid on which every partition at every `ξ_k` (for each
/// requested `K`) and at `horizon` itself is commensurable.
pub fn stieltjes_grid(
    g: &MetricGraph,
    source: usize,
    horizon: &Rational,
    ks: &[usize],
) -> Result<Rational, OracleError> {
    let mut values = vec![horizon.clone()];
    let mut horizons: Vec<Rational> = ks.iter().flat_map(|&k| xi_grid(horizon, k)).collect();
    horizons.sort();
    horizons.dedup();
    for xi in &horizons {
        let h = HydraUnion::build(g, &[source], xi, DEFAULT_MAX_EVENTS)?;
        let p = build_partition(&h, DEFAULT_MAX_LATTICE_POINTS)?;
        values.push(partition_grid(&p));
    }
    Ok(rational_gcd(values.iter()).expect("positive grid"))
}

/// Right-endpoint Stieltjes sum `Σ_k ξ_k (P^{ξ_k} - P^{ξ_{k-1}}) y` with the
/// analytic projections of the partitions at each `ξ_k`.
pub fn numeric_eikonal(
    g: &MetricGraph,
    source: usize,
    horizon: &Rational,
    k: usize,
    y: &SampledFunction,
) -> Result<SampledFunction, OracleError> {
    if k == 0 {
        return Err(OracleError::NonPositive("partition count"));
    }
    let mut acc = y.map(|_| 0.0);
    let mut prev = y.map(|_| 0.0);
    for xi in xi_grid(horizon, k) {
        let h = HydraUnion::build(g, &[source], &xi, DEFAULT_MAX_EVENTS)?;
        let p = build_partition(&h, DEFAULT_MAX_LATTICE_POINTS)?;
        let alg = assemble_algebra(&p, &h)?;
        let py = alg.apply_projection(source, y)?;
        let w = to_f64(&xi);
        acc = acc.zip_with(&py.zip_with(&prev, |a, b| a - b)?, |a, d| a + w * d)?;
        prev = py;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g3};
    use crate::rational::qi;
    use crate::wave::wave_snapshot;

    #[test]
    fn zero_control_stays_zero() {
        let u = fd_solve(&g3(), &Control::zero(), &q(3, 2), &q(1, 16)).unwrap();
        assert_eq!(u.max_abs(), 0.0);
    }

    #[test]
    fn transport_matches_hydra() {
        let g = g1();
        let t = q(1, 2);
        let f = Control::hat(0, &q(1, 4), &q(1, 8));
        let fd = fd_solve(&g, &f, &t, &q(1, 32)).unwrap();
        let h = HydraUnion::build(&g, &[0], &t, DEFAULT_MAX_EVENTS).unwrap();
        let exact = wave_snapshot(&h, &f, &t, &q(1, 32), Placement::Nodes).unwrap();
        assert!(fd.max_abs_diff(&exact).unwrap() <= 1e-12);
    }

    #[test]
    fn pulse_splits_at_centre() {
        let g = g3();
        // narrow pulse leaves g1, reaches v at t = 1
        let f = Control::hat(0, &q(1, 8), &q(1, 8));
        let u = fd_solve(&g, &f, &q(3, 2), &q(1, 32)).unwrap();
        let peak = |e: usize| u.values[e].iter().copied().fold(0.0, |m: f64, v| if v.abs() > m.abs() { v } else { m });
        let (reflected, transmitted) = (peak(0), peak(1));
        assert!((reflected + 1.0 / 3.0).abs() < 1e-12);
        assert!((transmitted - 2.0 / 3.0).abs() < 1e-12);
        assert!((peak(2) - transmitted).abs() < 1e-12);
    }

    #[test]
    fn incommensurable_grid_rejected() {
        assert!(matches!(
            fd_solve(&g1(), &Control::zero(), &qi(1), &q(2, 3)),
            Err(OracleError::Sample(SampleError::Incommensurable { .. }))
        ));
    }

    #[test]
    fn small_horizon_projection_is_indicator() {
        let g = g1();
        let h = q(1, 16);
        let p = numeric_reachable_projection(&g, &[0], &q(1, 2), &h, 32).unwrap();
        assert_eq!(p.rank, 8);
        for i in 0..16 {
            for j in 0..16 {
                let want = if i == j && i < 8 { 1.0 } else { 0.0 };
                assert!((p.matrix[(i, j)] - want).abs() < 1e-9);
            }
        }
        let few = numeric_reachable_projection(&g, &[0], &q(1, 2), &h, 2).unwrap();
        assert!(few.rank < 8);
    }

    #[test]
    fn stieltjes_small_horizon() {
        let g = g1();
        let t = q(1, 2);
        let k = 16;
        let step = stieltjes_grid(&g, 0, &t, &[k]).unwrap();
        let y = SampledFunction::from_fn(&g, &step, Placement::Midpoints, |_, _| 1.0).unwrap();
        let e = numeric_eikonal(&g, 0, &t, k, &y).unwrap();
        for (j, v) in e.values[0].iter().enumerate() {
            let s = to_f64(&e.position(0, j));
            let want = if s < 0.5 { s } else { 0.0 };
            assert!((v - want).abs() <= 0.5 / k as f64 + 1e-12);
        }
        let zero = numeric_eikonal(&g, 0, &t, k, &y.map(|_| 0.0)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }
}
