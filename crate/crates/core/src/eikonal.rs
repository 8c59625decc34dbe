//! Amplitude vectors, nested projections and the eikonal blocks.
//!
//! Over a family with cells `ω_1..ω_M` and intervals `I_1..I_N`, the wave
//! produced by a source restricted to the family is `Σ_i α^i ψ_i(r)`. The
//! reachable projection is therefore the constant projection `p` onto
//! `span{α^i}` and the eikonal acts as `Σ_i τ_i(r) ΔP_i`, where `ΔP_i` are the
//! increments of the Gram–Schmidt flag taken in increasing time order. Both
//! stay rational because `ΔP_i = b bᵀ / ⟨b,b⟩` never needs a square root.

use nalgebra::DMatrix;
use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::GraphPoint;
use crate::hydra::{HydraUnion, SpaceTimePoint};
use crate::lattice::{Affine, Family, LatticeError, Partition};
use crate::matrix::{dot, RMatrix};
use crate::rational::{format_rational, q, to_f64, Rational};
use crate::sampled::{grid_count, Placement, SampleError, SampledFunction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EikonalError {
    #[error("source {0} is not part of the partition")]
    UnknownSource(String),
    #[error("family index {0} out of range")]
    UnknownFamily(usize),
    #[error("internal: amplitude of source {vertex} is not constant over cell {cell} in interval {interval}")]
    NonConstantAmplitude {
        vertex: String,
        cell: usize,
        interval: usize,
    },
    #[error("blocks have different sizes ({0} and {1})")]
    DimensionMismatch(usize, usize),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmplitudeVector {
    pub interval: usize,
    pub source: usize,
    pub entries: Vec<Rational>,
}

/// `α^1..α^N` of one source over a family, read from the pieces and checked
/// against the amplitude function at two parameter values.
pub fn amplitude_vectors(
    fam: &Family,
    h: &HydraUnion,
    source: usize,
) -> Result<Vec<AmplitudeVector>, EikonalError> {
    let hydra = h
        .hydra(source)
        .ok_or_else(|| EikonalError::UnknownSource(h.graph().vertex(source).id.clone()))?;
    let samples = [&fam.delta * q(1, 3), &fam.delta * q(2, 3)];
    let mut out = Vec::with_capacity(fam.intervals.len());
    for i in 0..fam.intervals.len() {
        let tau = fam.tau(i);
        let mut entries = vec![Rational::zero(); fam.size()];
        for (m, cell) in fam.cells.iter().enumerate() {
            let expected = fam.piece(source, m, i).map(|p| p.amplitude.clone());
            for r in &samples {
                let p = SpaceTimePoint::new(cell.point_at(r), tau.eval(r));
                let found = hydra.contains(&p).then(|| hydra.amplitude_at(&p)).transpose();
                let ok = match (&expected, found) {
                    (Some(a), Ok(Some(b))) => *a == b,
                    (None, Ok(None)) => true,
                    _ => false,
                };
                if !ok {
                    return Err(EikonalError::NonConstantAmplitude {
                        vertex: h.graph().vertex(source).id.clone(),
                        cell: m,
                        interval: i,
                    });
                }
            }
            if let Some(a) = expected {
                entries[m] = a;
            }
        }
        out.push(AmplitudeVector {
            interval: i,
            source,
            entries,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedProjections {
    /// Unnormalised Gram–Schmidt residuals `b_i`.
    pub residuals: Vec<Vec<Rational>>,
    pub deltas: Vec<RMatrix>,
    pub ranks: Vec<usize>,
}

impl NestedProjections {
    /// `Σ ΔP_i`, the projection onto the span of all inputs.
    pub fn total(&self, size: usize) -> RMatrix {
        self.deltas
            .iter()
            .fold(RMatrix::zeros(size, size), |acc, d| &acc + d)
    }
}

/// Exact Gram–Schmidt in the given order.
pub fn nested_projections(vectors: &[Vec<Rational>]) -> NestedProjections {
    let mut residuals: Vec<Vec<Rational>> = Vec::with_capacity(vectors.len());
    for a in vectors {
        let mut b = a.clone();
        for prev in &residuals {
            let norm = dot(prev, prev);
            if norm.is_zero() {
                continue;
            }
            let c = dot(a, prev) / norm;
            for (x, y) in b.iter_mut().zip(prev) {
                *x -= &c * y;
            }
        }
        residuals.push(b);
    }
    let deltas: Vec<RMatrix> = residuals
        .iter()
        .map(|b| RMatrix::rank_one_projection(b))
        .collect();
    let ranks = residuals
        .iter()
        .map(|b| usize::from(b.iter().any(|x| !x.is_zero())))
        .collect();
    NestedProjections {
        residuals,
        deltas,
        ranks,
    }
}

/// `p_{γ,Φ}` for one source and family.
pub fn projection_block(fam: &Family, h: &HydraUnion, source: usize) -> Result<RMatrix, EikonalError> {
    let alphas = amplitude_vectors(fam, h, source)?;
    let vectors: Vec<Vec<Rational>> = alphas.into_iter().map(|a| a.entries).collect();
    Ok(nested_projections(&vectors).total(fam.size()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EikonalBlock {
    pub family: usize,
    pub source: usize,
    pub size: usize,
    pub alphas: Vec<AmplitudeVector>,
    pub taus: Vec<Option<Affine>>,
    pub projections: NestedProjections,
    pub c0: RMatrix,
    pub c1: RMatrix,
}

impl EikonalBlock {
    /// `E(r) = C0 + r·C1`.
    pub fn eval(&self, r: &Rational) -> RMatrix {
        &self.c0 + &self.c1.scale(r)
    }

    /// `Σ_{present} τ_i(r) ΔP_i`, evaluated term by term.
    pub fn factorized(&self, r: &Rational) -> RMatrix {
        self.taus
            .iter()
            .zip(&self.projections.deltas)
            .filter_map(|(t, d)| t.as_ref().map(|t| d.scale(&t.eval(r))))
            .fold(RMatrix::zeros(self.size, self.size), |acc, m| &acc + &m)
    }

    pub fn projection(&self) -> RMatrix {
        self.projections.total(self.size)
    }

    /// Rows are the normalised `β^i` (zero rows where `b_i = 0`).
    pub fn beta(&self) -> DMatrix<f64> {
        let n = self.projections.residuals.len();
        let mut b = DMatrix::zeros(n, self.size);
        for (i, res) in self.projections.residuals.iter().enumerate() {
            let v: Vec<f64> = res.iter().map(to_f64).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (m, x) in v.iter().enumerate() {
                    b[(i, m)] = x / norm;
                }
            }
        }
        b
    }

    /// `B* D(r) B` with floating-point `β`.
    pub fn beta_form(&self, r: &Rational) -> DMatrix<f64> {
        let b = self.beta();
        let d = DMatrix::from_fn(self.taus.len(), self.taus.len(), |i, j| {
            if i == j {
                self.taus[i].as_ref().map_or(0.0, |t| to_f64(&t.eval(r)))
            } else {
                0.0
            }
        });
        b.transpose() * d * b
    }
}

/// The eikonal block of one source over family `family` of the partition.
pub fn eikonal_block(
    p: &Partition,
    family: usize,
    h: &HydraUnion,
    source: usize,
) -> Result<EikonalBlock, EikonalError> {
    let fam = p.families.get(family).ok_or(EikonalError::UnknownFamily(family))?;
    let size = fam.size();
    let alphas = amplitude_vectors(fam, h, source)?;
    let taus = fam.tau_functions(source);
    let vectors: Vec<Vec<Rational>> = alphas.iter().map(|a| a.entries.clone()).collect();
    let projections = nested_projections(&vectors);
    let mut c0 = RMatrix::zeros(size, size);
    let mut c1 = RMatrix::zeros(size, size);
    for (tau, delta) in taus.iter().zip(&projections.deltas) {
        match tau {
            Some(t) => {
                c0 = &c0 + &delta.scale(&t.constant);
                c1 = &c1 + &delta.scale(&t.slope);
            }
            // α^i vanishes when the trace is absent, so ΔP_i is zero too.
            None => debug_assert!(delta.is_zero()),
        }
    }
    Ok(EikonalBlock {
        family,
        source,
        size,
        alphas,
        taus,
        projections,
        c0,
        c1,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyBlocks {
    pub family: usize,
    /// One block per source, in source order.
    pub blocks: Vec<EikonalBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EikonalAlgebra {
    pub partition: Partition,
    pub families: Vec<FamilyBlocks>,
}

pub fn assemble_algebra(p: &Partition, h: &HydraUnion) -> Result<EikonalAlgebra, EikonalError> {
    let mut families = Vec::with_capacity(p.families.len());
    for f in 0..p.families.len() {
        let blocks = p
            .sources
            .iter()
            .map(|&s| eikonal_block(p, f, h, s))
            .collect::<Result<Vec<_>, _>>()?;
        families.push(FamilyBlocks { family: f, blocks });
    }
    Ok(EikonalAlgebra {
        partition: p.clone(),
        families,
    })
}

/// Matrix polynomial `Σ_k r^k A_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixPolynomial {
    pub coeffs: Vec<RMatrix>,
}

impl MatrixPolynomial {
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(RMatrix::is_zero)
    }

    pub fn eval(&self, r: &Rational) -> RMatrix {
        let n = self.coeffs[0].rows();
        let mut acc = RMatrix::zeros(n, n);
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(r) + c;
        }
        acc
    }
}

fn bracket(a: &RMatrix, b: &RMatrix) -> RMatrix {
    &(a * b) - &(b * a)
}

/// `[E_a(r), E_b(r)]` as a polynomial of degree at most two.
pub fn commutator(a: &EikonalBlock, b: &EikonalBlock) -> Result<MatrixPolynomial, EikonalError> {
    if a.size != b.size {
        return Err(EikonalError::DimensionMismatch(a.size, b.size));
    }
    Ok(MatrixPolynomial {
        coeffs: vec![
            bracket(&a.c0, &b.c0),
            &bracket(&a.c0, &b.c1) + &bracket(&a.c1, &b.c0),
            bracket(&a.c1, &b.c1),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRank {
    pub family: usize,
    pub size: usize,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllabilityReport {
    pub controllable: bool,
    /// Whether `Ω^T[Σ]` is all of the graph up to finitely many points.
    pub covers_graph: bool,
    pub families: Vec<FamilyRank>,
}

/// Span rank of the amplitude vectors of `sources` on every family.
pub fn controllability(
    p: &Partition,
    h: &HydraUnion,
    sources: &[usize],
) -> Result<ControllabilityReport, EikonalError> {
    for s in sources {
        if !p.sources.contains(s) {
            return Err(EikonalError::UnknownSource(p.graph().vertex(*s).id.clone()));
        }
    }
    let mut families = Vec::new();
    for (f, fam) in p.families.iter().enumerate() {
        let mut rows = Vec::new();
        for &s in sources {
            rows.extend(amplitude_vectors(fam, h, s)?.into_iter().map(|a| a.entries));
        }
        let rank = if rows.is_empty() {
            0
        } else {
            RMatrix::from_rows(rows).rank()
        };
        families.push(FamilyRank {
            family: f,
            size: fam.size(),
            rank,
        });
    }
    let g = p.graph();
    let covers_graph = p.filled.intervals.iter().enumerate().all(|(e, list)| {
        list.len() == 1 && list[0].0.is_zero() && &list[0].1 == g.length(e)
    });
    let controllable = covers_graph && families.iter().all(|f| f.rank == f.size);
    Ok(ControllabilityReport {
        controllable,
        covers_graph,
        families,
    })
}

/// Largest grid step dividing every edge length and every cell endpoint.
pub fn partition_grid(p: &Partition) -> Rational {
    let g = p.graph();
    let mut values: Vec<Rational> = g.edges().iter().map(|e| e.length.clone()).collect();
    for fam in &p.families {
        for c in &fam.cells {
            values.push(c.lo.clone());
            values.push(c.hi.clone());
        }
    }
    crate::rational::rational_gcd(values.iter()).expect("edge lengths are positive")
}

/// Applies a family-wise matrix field `op(family, r)` to midpoint samples.
/// Samples outside every cell are set to zero.
pub fn apply_family_operator(
    p: &Partition,
    y: &SampledFunction,
    mut op: impl FnMut(usize, &Rational) -> DMatrix<f64>,
) -> Result<SampledFunction, EikonalError> {
    if y.placement != Placement::Midpoints {
        return Err(SampleError::WrongPlacement(Placement::Midpoints).into());
    }
    let h = &y.step;
    let mut out = y.map(|_| 0.0);
    for (f, fam) in p.families.iter().enumerate() {
        let n = grid_count(&fam.delta, h, "a family cell length")?;
        let mut index = Vec::with_capacity(fam.size());
        for c in &fam.cells {
            let lo = grid_count(&c.lo, h, "a cell endpoint")?;
            grid_count(&c.hi, h, "a cell endpoint")?;
            index.push((c.edge, lo, c.orientation));
        }
        for j in 0..n {
            let r = h * (Rational::from_integer((j as i64).into()) + q(1, 2));
            let slots: Vec<(usize, usize)> = index
                .iter()
                .map(|&(e, lo, o)| (e, if o > 0 { lo + j } else { lo + n - 1 - j }))
                .collect();
            let v = nalgebra::DVector::from_iterator(
                slots.len(),
                slots.iter().map(|&(e, k)| y.values[e][k]),
            );
            let w = op(f, &r) * v;
            for (m, &(e, k)) in slots.iter().enumerate() {
                out.values[e][k] = w[m];
            }
        }
    }
    Ok(out)
}

impl EikonalAlgebra {
    pub fn block(&self, family: usize, source: usize) -> Option<&EikonalBlock> {
        self.families
            .get(family)?
            .blocks
            .iter()
            .find(|b| b.source == source)
    }

    pub fn block_count(&self) -> usize {
        self.families.iter().map(|f| f.blocks.len()).sum()
    }

    fn source_check(&self, source: usize) -> Result<(), EikonalError> {
        if self.partition.sources.contains(&source) {
            Ok(())
        } else {
            Err(EikonalError::UnknownSource(
                self.partition.graph().vertex(source).id.clone(),
            ))
        }
    }

    /// `P^T_γ y` via the projection blocks.
    pub fn apply_projection(&self, source: usize, y: &SampledFunction) -> Result<SampledFunction, EikonalError> {
        self.source_check(source)?;
        let mats: Vec<DMatrix<f64>> = self
            .families
            .iter()
            .map(|f| self.block(f.family, source).expect("checked").projection().to_f64())
            .collect();
        apply_family_operator(&self.partition, y, |f, _| mats[f].clone())
    }

    /// `E^T_γ y` via the eikonal blocks.
    pub fn apply_eikonal(&self, source: usize, y: &SampledFunction) -> Result<SampledFunction, EikonalError> {
        self.source_check(source)?;
        apply_family_operator(&self.partition, y, |f, r| {
            self.block(f, source).expect("checked").eval(r).to_f64()
        })
    }

    /// Projection onto the joint reachable set of several sources.
    pub fn apply_joint_projection(
        &self,
        sources: &[usize],
        y: &SampledFunction,
    ) -> Result<SampledFunction, EikonalError> {
        let mut mats = Vec::new();
        for f in &self.families {
            let mut vectors = Vec::new();
            for &s in sources {
                self.source_check(s)?;
                let b = self.block(f.family, s).expect("checked");
                vectors.extend(b.alphas.iter().map(|a| a.entries.clone()));
            }
            let size = self.partition.families[f.family].size();
            mats.push(nested_projections(&vectors).total(size).to_f64());
        }
        apply_family_operator(&self.partition, y, |f, _| mats[f].clone())
    }

    pub fn to_json(&self) -> Value {
        let p = &self.partition;
        let g = p.graph();
        let families: Vec<Value> = self
            .families
            .iter()
            .map(|fb| {
                let fam = &p.families[fb.family];
                let intervals: Vec<Value> = (0..fam.intervals.len())
                    .map(|i| {
                        let (a, b) = fam.interval_bounds(i);
                        json!([format_rational(&a), format_rational(&b)])
                    })
                    .collect();
                let blocks: Vec<Value> = fb
                    .blocks
                    .iter()
                    .map(|b| {
                        json!({
                            "source": g.vertex(b.source).id,
                            "alpha": b.alphas.iter().map(|a| a.entries.iter().map(format_rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
                            "tau": b.taus.iter().map(|t| match t {
                                Some(t) => json!({"constant": format_rational(&t.constant), "slope": format_rational(&t.slope)}),
                                None => Value::Null,
                            }).collect::<Vec<_>>(),
                            "delta_p": b.projections.deltas.iter().map(RMatrix::to_json).collect::<Vec<_>>(),
                            "ranks": b.projections.ranks,
                            "projection": b.projection().to_json(),
                            "c0": b.c0.to_json(),
                            "c1": b.c1.to_json(),
                        })
                    })
                    .collect();
                let mut commutators = Vec::new();
                for (i, a) in fb.blocks.iter().enumerate() {
                    for b in &fb.blocks[i + 1..] {
                        let c = commutator(a, b).expect("blocks of one family share a size");
                        commutators.push(json!({
                            "sources": [g.vertex(a.source).id, g.vertex(b.source).id],
                            "is_zero": c.is_zero(),
                            "coefficients": c.coeffs.iter().map(RMatrix::to_json).collect::<Vec<_>>(),
                        }));
                    }
                }
                let m = fam.size();
                let stacked: Vec<Vec<Rational>> = fb
                    .blocks
                    .iter()
                    .flat_map(|b| b.alphas.iter().map(|a| a.entries.clone()))
                    .collect();
                let joint_rank = if stacked.is_empty() { 0 } else { RMatrix::from_rows(stacked).rank() };
                json!({
                    "M": m,
                    "delta": format_rational(&fam.delta),
                    "cells": fam.cells.iter().map(|c| json!({
                        "edge": g.edge(c.edge).id,
                        "lo": format_rational(&c.lo),
                        "hi": format_rational(&c.hi),
                        "orientation": c.orientation,
                    })).collect::<Vec<_>>(),
                    "intervals": intervals,
                    "blocks": blocks,
                    "commutators": commutators,
                    "joint_rank": joint_rank,
                })
            })
            .collect();
        json!({
            "horizon": format_rational(&p.horizon),
            "sources": p.sources.iter().map(|&s| g.vertex(s).id.clone()).collect::<Vec<_>>(),
            "families": families,
        })
    }
}

/// Whether a graph point lies in some cell of the partition.
pub fn in_cells(p: &Partition, x: &GraphPoint) -> bool {
    p.locate(x).is_ok()
}
