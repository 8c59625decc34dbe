//! Measurements comparing the exact constructions against the numerical
//! oracles, and the default verification suite behind `graph-eikonal verify`.

use nalgebra::DMatrix;
use rand::Rng;
use serde_json::{json, Value};

use crate::eikonal::{assemble_algebra, commutator, partition_grid, EikonalAlgebra};
use crate::fixtures::{g1, g3, seeded_rng};
use crate::graph::{GraphPoint, MetricGraph};
use crate::hydra::{HydraUnion, DEFAULT_MAX_EVENTS};
use crate::lattice::{build_partition, critical_points, Partition, DEFAULT_MAX_LATTICE_POINTS};
use crate::oracle::{
    fd_solve, numeric_eikonal, operator_matrix, operator_norm, stieltjes_grid, OracleError,
    SnapshotBank,
};
use crate::rational::{format_rational, q, rational_gcd, Rational};
use crate::sampled::{grid_count, Placement, SampledFunction};
use crate::wave::{wave_snapshot, Control};

/// Hydra union, partition and algebra for one configuration.
pub struct Setup {
    pub hydra: HydraUnion,
    pub partition: Partition,
    pub algebra: EikonalAlgebra,
}

pub fn setup(g: &MetricGraph, sources: &[usize], horizon: &Rational) -> Result<Setup, OracleError> {
    let hydra = HydraUnion::build(g, sources, horizon, DEFAULT_MAX_EVENTS)?;
    let partition = build_partition(&hydra, DEFAULT_MAX_LATTICE_POINTS)?;
    let algebra = assemble_algebra(&partition, &hydra)?;
    Ok(Setup {
        hydra,
        partition,
        algebra,
    })
}

/// Grid-aligned test controls: a hat, a ramp and a two-hat combination.
pub fn test_controls(source: usize, horizon: &Rational) -> Vec<Control> {
    let quarter = horizon * q(1, 4);
    let eighth = horizon * q(1, 8);
    vec![
        Control::hat(source, &quarter, &eighth),
        Control::ramp(source, horizon),
        Control::hat(source, &(horizon * q(1, 2)), &quarter)
            .add(&Control::hat(source, &eighth, &eighth)),
    ]
}

/// Largest node discrepancy between the solver and hydra evaluation.
pub fn fd_discrepancy(
    g: &MetricGraph,
    sources: &[usize],
    f: &Control,
    horizon: &Rational,
    h: &Rational,
) -> Result<f64, OracleError> {
    let union = HydraUnion::build(g, sources, horizon, DEFAULT_MAX_EVENTS)?;
    let exact = wave_snapshot(&union, f, horizon, h, Placement::Nodes)?;
    let fd = fd_solve(g, f, horizon, h)?;
    Ok(fd.max_abs_diff(&exact)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCheck {
    pub difference: f64,
    pub numeric_rank: usize,
    pub analytic_rank: usize,
    pub controls: usize,
    pub asymmetry: f64,
    pub idempotency: f64,
}

/// Rank of the analytic reachable projection on a midpoint grid.
pub fn analytic_grid_rank(alg: &EikonalAlgebra, sources: &[usize], h: &Rational) -> Result<usize, OracleError> {
    let mut rank = 0;
    for fb in &alg.families {
        let fam = &alg.partition.families[fb.family];
        let mut rows = Vec::new();
        for b in fb.blocks.iter().filter(|b| sources.contains(&b.source)) {
            rows.extend(b.alphas.iter().map(|a| a.entries.clone()));
        }
        let r = if rows.is_empty() { 0 } else { crate::matrix::RMatrix::from_rows(rows).rank() };
        rank += r * grid_count(&fam.delta, h, "a family cell length")?;
    }
    Ok(rank)
}

/// Numerical projection from hats spaced `h / oversample` against the
/// analytic projection blocks.
pub fn projection_check(
    g: &MetricGraph,
    sources: &[usize],
    horizon: &Rational,
    h: &Rational,
    oversample: i64,
) -> Result<ProjectionCheck, OracleError> {
    let s = setup(g, sources, horizon)?;
    let spacing = h * q(1, oversample);
    let bank = SnapshotBank::record(g, sources, horizon, h, &spacing)?;
    let numeric = bank.projection(sources, horizon)?;
    let analytic = operator_matrix(bank.template(), |y| s.algebra.apply_joint_projection(sources, y))?;
    let m = &numeric.matrix;
    Ok(ProjectionCheck {
        difference: operator_norm(&(m - &analytic)),
        numeric_rank: numeric.rank,
        analytic_rank: analytic_grid_rank(&s.algebra, sources, h)?,
        controls: numeric.controls,
        asymmetry: (m - m.transpose()).abs().max(),
        idempotency: (m * m - m).abs().max(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StieltjesCheck {
    pub grid: Rational,
    pub error_k: f64,
    pub error_2k: f64,
    pub order: f64,
}

/// Sup-norm error of the Stieltjes sums with `k` and `2k` steps against the
/// closed-form eikonal, for `y ≡ 1` on the graph.
pub fn stieltjes_check(
    g: &MetricGraph,
    source: usize,
    horizon: &Rational,
    k: usize,
) -> Result<StieltjesCheck, OracleError> {
    let grid = stieltjes_grid(g, source, horizon, &[k, 2 * k])?;
    let s = setup(g, &[source], horizon)?;
    let y = SampledFunction::from_fn(g, &grid, Placement::Midpoints, |_, _| 1.0)?;
    let exact = s.algebra.apply_eikonal(source, &y)?;
    let error_k = numeric_eikonal(g, source, horizon, k, &y)?.max_abs_diff(&exact)?;
    let error_2k = numeric_eikonal(g, source, horizon, 2 * k, &y)?.max_abs_diff(&exact)?;
    Ok(StieltjesCheck {
        grid,
        error_k,
        error_2k,
        order: (error_k / error_2k).log2(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCommutator {
    pub family: usize,
    pub is_zero: bool,
    pub difference: f64,
    pub norm: f64,
}

/// For two sources, compares the exact block commutators with the
/// commutator of the midpoint-Stieltjes numerical eikonals on grid `h`.
pub fn commutator_check(
    g: &MetricGraph,
    sources: [usize; 2],
    horizon: &Rational,
    h: &Rational,
    oversample: i64,
) -> Result<Vec<BlockCommutator>, OracleError> {
    let s = setup(g, &sources, horizon)?;
    let bank = SnapshotBank::record(g, &sources, horizon, h, &(h * q(1, oversample)))?;
    let e1 = bank.eikonal(sources[0])?;
    let e2 = bank.eikonal(sources[1])?;
    let numeric = &e1 * &e2 - &e2 * &e1;
    let template = bank.template();
    let offsets: Vec<usize> = template
        .values
        .iter()
        .scan(0, |acc, row| {
            let start = *acc;
            *acc += row.len();
            Some(start)
        })
        .collect();
    let mut out = Vec::new();
    for fb in &s.algebra.families {
        let fam = &s.partition.families[fb.family];
        let c = commutator(&fb.blocks[0], &fb.blocks[1])?;
        let analytic = operator_matrix(template, |y| {
            crate::eikonal::apply_family_operator(&s.partition, y, |f, r| {
                if f == fb.family {
                    c.eval(r).to_f64()
                } else {
                    DMatrix::zeros(s.partition.families[f].size(), s.partition.families[f].size())
                }
            })
        })?;
        let mut idx = Vec::new();
        for cell in &fam.cells {
            let lo = grid_count(&cell.lo, h, "a cell endpoint")?;
            let hi = grid_count(&cell.hi, h, "a cell endpoint")?;
            idx.extend((lo..hi).map(|k| offsets[cell.edge] + k));
        }
        let sub = |m: &DMatrix<f64>| DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
        let a = sub(&analytic);
        out.push(BlockCommutator {
            family: fb.family,
            is_zero: c.is_zero(),
            difference: operator_norm(&(sub(&numeric) - &a)),
            norm: operator_norm(&a),
        });
    }
    Ok(out)
}

/// Greatest violation of `⟨P^{T_k} y, y⟩ ≤ ⟨P^{T_{k+1}} y, y⟩` over random
/// samples `y` (zero means monotone).
pub fn monotonicity_violation(
    g: &MetricGraph,
    source: usize,
    horizons: &[Rational],
    samples: usize,
    seed: u64,
) -> Result<f64, OracleError> {
    let setups = horizons
        .iter()
        .map(|t| setup(g, &[source], t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut grid_values: Vec<Rational> = setups.iter().map(|s| partition_grid(&s.partition)).collect();
    grid_values.extend(g.edges().iter().map(|e| e.length.clone()));
    let grid = rational_gcd(grid_values.iter()).expect("positive") * q(1, 2);
    let mut rng = seeded_rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let y = SampledFunction::from_fn(g, &grid, Placement::Midpoints, |_, _| rng.gen_range(-1.0..1.0))?;
        let mut prev: Option<f64> = None;
        for s in &setups {
            let value = s.algebra.apply_projection(source, &y)?.dot(&y)?;
            if let Some(p) = prev {
                worst = worst.max(p - value);
            }
            prev = Some(value);
        }
    }
    Ok(worst)
}

/// Points of `Θ^{T+ε}` farther than `ε` from `Θ^T`.
pub fn theta_continuity_violations(
    g: &MetricGraph,
    source: usize,
    horizon: &Rational,
    eps: &Rational,
) -> Result<Vec<GraphPoint>, OracleError> {
    let now = critical_points(
        &HydraUnion::build(g, &[source], horizon, DEFAULT_MAX_EVENTS)?,
        DEFAULT_MAX_LATTICE_POINTS,
    )?;
    let later = critical_points(
        &HydraUnion::build(g, &[source], &(horizon + eps), DEFAULT_MAX_EVENTS)?,
        DEFAULT_MAX_LATTICE_POINTS,
    )?;
    let base: Vec<GraphPoint> = now.into_iter().collect();
    Ok(later
        .into_iter()
        .filter(|x| &g.distance_to_set(&base, x) > eps)
        .collect())
}

/// Active intervals `{I_i : ΔP_i ≠ 0}` of one source, merged. A full
/// spectrum gives the single interval `(0, T)`.
pub fn active_spectrum(alg: &EikonalAlgebra, source: usize) -> Vec<(Rational, Rational)> {
    let mut list = Vec::new();
    for fb in &alg.families {
        let fam = &alg.partition.families[fb.family];
        if let Some(b) = fb.blocks.iter().find(|b| b.source == source) {
            for (i, d) in b.projections.deltas.iter().enumerate() {
                if !d.is_zero() {
                    list.push(fam.interval_bounds(i));
                }
            }
        }
    }
    list.sort();
    // closed-interval merge: touching intervals differ by a single point
    let mut merged: Vec<(Rational, Rational)> = Vec::new();
    for (a, b) in list {
        match merged.last_mut() {
            Some((_, end)) if a <= *end => {
                if b > *end {
                    *end = b;
                }
            }
            _ => merged.push((a, b)),
        }
    }
    merged
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            max_error: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            passed: ok,
        }
    }
}

pub fn report_json(checks: &[Check]) -> Value {
    json!({
        "checks": checks.iter().map(|c| json!({
            "name": c.name,
            "max_error": format!("{:.16e}", c.max_error),
            "tolerance": format!("{:.16e}", c.tolerance),
            "passed": c.passed,
        })).collect::<Vec<_>>(),
        "passed": checks.iter().all(|c| c.passed),
    })
}

/// Checks for one configuration: solver agreement for the test controls,
/// projection agreement, exact projector identities, and Stieltjes
/// convergence for each source.
pub fn suite_for(
    name: &str,
    g: &MetricGraph,
    sources: &[usize],
    horizon: &Rational,
    h: &Rational,
    stieltjes_steps: usize,
) -> Result<Vec<Check>, OracleError> {
    let t = format_rational(horizon);
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    for &s in sources {
        for f in test_controls(s, horizon) {
            worst = worst.max(fd_discrepancy(g, sources, &f, horizon, h)?);
        }
    }
    checks.push(Check::new(format!("{name} T={t}: solver vs hydra"), worst, 1e-9));
    let pc = projection_check(g, sources, horizon, h, 8)?;
    checks.push(Check::new(format!("{name} T={t}: numeric vs analytic projection"), pc.difference, 1e-6));
    checks.push(Check::new(format!("{name} T={t}: numeric projection symmetric"), pc.asymmetry, 1e-8));
    checks.push(Check::new(format!("{name} T={t}: numeric projection idempotent"), pc.idempotency, 1e-8));
    let s = setup(g, sources, horizon)?;
    let mut exact_ok = true;
    for fb in &s.algebra.families {
        for b in &fb.blocks {
            let p = b.projection();
            exact_ok &= p.is_idempotent() && p.is_symmetric();
            for (i, di) in b.projections.deltas.iter().enumerate() {
                exact_ok &= di.is_idempotent();
                for dj in &b.projections.deltas[i + 1..] {
                    exact_ok &= (di * dj).is_zero();
                }
            }
        }
    }
    checks.push(Check::flag(format!("{name} T={t}: exact projector identities"), exact_ok));
    for &src in sources {
        let sc = stieltjes_check(g, src, horizon, stieltjes_steps)?;
        let bound = 2.0 * crate::rational::to_f64(horizon) / stieltjes_steps as f64;
        checks.push(Check::new(
            format!("{name} T={t} source {}: Stieltjes error", g.vertex(src).id),
            sc.error_k,
            bound,
        ));
        checks.push(Check::new(
            format!("{name} T={t} source {}: Stieltjes order deficit", g.vertex(src).id),
            (0.9 - sc.order).max(0.0),
            0.0,
        ));
    }
    Ok(checks)
}

/// The built-in suite on the two reference graphs.
pub fn default_suite(stieltjes_steps: usize) -> Result<Vec<Check>, OracleError> {
    let mut checks = Vec::new();
    checks.extend(suite_for("G1", &g1(), &[0], &q(1, 2), &q(1, 32), stieltjes_steps)?);
    checks.extend(suite_for("G1", &g1(), &[0], &q(3, 2), &q(1, 32), stieltjes_steps)?);
    checks.extend(suite_for("G3", &g3(), &[0], &q(3, 2), &q(1, 32), stieltjes_steps)?);
    let blocks = commutator_check(&g3(), [0, 1], &q(3, 2), &q(1, 16), 4)?;
    let worst = blocks.iter().map(|b| b.difference).fold(0.0, f64::max);
    checks.push(Check::new("G3 T=3/2 sources g1,g2: commutator vs oracle", worst, 1e-6));
    Ok(checks)
}
