//! Empirical constants of the calculus, logarithmic Sobolev and
//! Gagliardo-Nirenberg inequalities over random field corpora.
//!
//! Each check evaluates `LHS / RHS` with the constant set to one on every
//! corpus entry. A genuine inequality shows up as a finite maximum that does
//! not grow when the same corpus is sampled on a finer grid.

mod corpus;

pub use corpus::{CorpusSpec, Entry, Family, DECAYS, MIN_SAMPLES};

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{gradient, lambda_s, norm, Grid, NormKind, SpectralField};

/// Inputs with more than this share of `Σ|c|²` outside the 2/3 mask are
/// considered unresolved.
pub const RESOLVED_TOL: f64 = 1e-8;

/// Scale factors swept through the logarithmic Sobolev corpus.
pub const LOG_SOBOLEV_SCALES: [f64; 3] = [1e-2, 1.0, 1e2];

const QUANTILE_LEVELS: [f64; 5] = [0.1, 0.25, 0.5, 0.9, 0.99];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub samples: usize,
    pub max_ratio: f64,
    /// Over the nontrivial entries.
    pub quantiles: Vec<Quantile>,
    pub worst_case_seed: u64,
    pub worst_case_index: usize,
    /// Entries with `LHS = RHS = 0`.
    pub trivial: usize,
    pub n: usize,
}

impl InequalityReport {
    /// Reduces per-entry `(lhs, rhs)` pairs in corpus order.
    pub fn from_pairs(name: &str, n: usize, entries: &[Entry], pairs: &[(f64, f64)]) -> Self {
        let mut ratios = Vec::with_capacity(pairs.len());
        let mut trivial = 0;
        let mut worst = (f64::NEG_INFINITY, 0usize);
        for (i, &(lhs, rhs)) in pairs.iter().enumerate() {
            let r = if lhs == 0.0 && rhs == 0.0 {
                trivial += 1;
                0.0
            } else {
                let r = lhs / rhs;
                ratios.push(r);
                r
            };
            if r > worst.0 || r.is_nan() {
                worst = (r, i);
            }
        }
        ratios.sort_by(f64::total_cmp);
        let quantiles = QUANTILE_LEVELS
            .iter()
            .filter(|_| !ratios.is_empty())
            .map(|&p| {
                let x = p * (ratios.len() - 1) as f64;
                let (lo, hi) = (x.floor() as usize, x.ceil() as usize);
                let w = x - lo as f64;
                Quantile {
                    p,
                    value: ratios[lo] * (1.0 - w) + ratios[hi] * w,
                }
            })
            .collect();
        let worst_entry = entries.get(worst.1);
        Self {
            name: name.to_string(),
            samples: pairs.len(),
            max_ratio: worst.0.max(0.0),
            quantiles,
            worst_case_seed: worst_entry.map_or(0, |e| e.seed),
            worst_case_index: worst.1,
            trivial,
            n,
        }
    }
}

/// `max_ratio(fine) / max_ratio(coarse)`.
pub fn resolution_growth(coarse: &InequalityReport, fine: &InequalityReport) -> f64 {
    fine.max_ratio / coarse.max_ratio
}

fn ensure_resolved<T: Real>(f: &SpectralField<T>, what: &str) -> Result<()> {
    let frac = f.top_third_fraction().to_f64_lossy();
    if frac > RESOLVED_TOL {
        return Err(Error::Unresolved { fraction: frac });
    }
    if !f.is_finite() {
        return Err(Error::InvalidArgument(format!("{what} is not finite")));
    }
    Ok(())
}

/// `[Λ^s, u] v = Λ^s(uv) - u Λ^s v` with both products truncated to the 2/3 mask.
pub fn commutator_field<T: Real>(s: f64, u: &SpectralField<T>, v: &SpectralField<T>) -> Result<SpectralField<T>> {
    if !u.grid().same(v.grid()) {
        return Err(Error::GridMismatch);
    }
    ensure_resolved(u, "u")?;
    ensure_resolved(v, "v")?;
    let s = T::lit(s);
    let uv = u.product(v).dealias();
    let u_lv = u.product(&lambda_s(v, s)).dealias();
    Ok(&lambda_s(&uv, s) - &u_lv)
}

fn f64_norm<T: Real, F: crate::spectral::Components<T> + ?Sized>(f: &F, kind: NormKind) -> Result<f64> {
    Ok(norm(f, kind)?.to_f64_lossy())
}

fn sweep<T: Real>(
    corpus: &CorpusSpec,
    n: usize,
    fields: usize,
    eval: impl Fn(&Entry, &[SpectralField<T>]) -> Result<Vec<(f64, f64)>> + Sync,
) -> Result<(Vec<Entry>, Vec<Vec<(f64, f64)>>)> {
    let grid: Grid<T> = corpus.grid(n)?;
    let entries: Vec<Entry> = (0..corpus.samples).map(|i| corpus.entry(i)).collect();
    let per_entry: Vec<Result<Vec<(f64, f64)>>> = entries
        .par_iter()
        .map(|e| eval(e, &corpus.fields(e, &grid, fields)))
        .collect();
    let per_entry = per_entry.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((entries, per_entry))
}

fn split_reports(names: &[&str], n: usize, entries: &[Entry], per_entry: &[Vec<(f64, f64)>]) -> Vec<InequalityReport> {
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let pairs: Vec<(f64, f64)> = per_entry.iter().map(|p| p[j]).collect();
            InequalityReport::from_pairs(name, n, entries, &pairs)
        })
        .collect()
}

/// `(lhs, rhs)` of the three calculus inequalities for one pair `(u, v)`.
pub fn calculus_terms<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>, s: f64) -> Result<[(f64, f64); 3]> {
    let hs = NormKind::Hs(s);
    let uv = u.product(v).dealias();
    let lhs_prod = f64_norm(&uv, hs)?;
    let (u_inf, v_inf) = (f64_norm(u, NormKind::Linf)?, f64_norm(v, NormKind::Linf)?);
    let (u_hs, v_hs) = (f64_norm(u, hs)?, f64_norm(v, hs)?);
    let grad_u_inf = f64_norm(&gradient(u), NormKind::Linf)?;
    let v_hs1 = f64_norm(v, NormKind::Hs(s - 1.0))?;
    let comm = f64_norm(&commutator_field(s, u, v)?, NormKind::L2)?;
    Ok([
        (lhs_prod, u_inf * v_hs + u_hs * v_inf),
        (lhs_prod, u_hs * v_hs),
        (comm, u_hs * v_inf + grad_u_inf * v_hs1),
    ])
}

/// Product, algebra and commutator estimates at order `s > 1`.
pub fn check_calculus<T: Real>(corpus: &CorpusSpec, n: usize, s: f64) -> Result<[InequalityReport; 3]> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "calculus checks need s > 1 (s > N/2 for the algebra bound), got {s}"
        )));
    }
    let (entries, per) = sweep::<T>(corpus, n, 2, |_, f| Ok(calculus_terms(&f[0], &f[1], s)?.to_vec()))?;
    let names = [
        format!("calculus_product_s{s}"),
        format!("calculus_algebra_s{s}"),
        format!("calculus_commutator_s{s}"),
    ];
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    let v = split_reports(&names, n, &entries, &per);
    Ok(v.try_into().expect("three reports"))
}

/// `Σ_ij ‖Δ^{-1}∂_i∂_j f‖_{L∞}`.
pub fn riesz_sup_sum<T: Real>(f: &SpectralField<T>) -> Result<f64> {
    let g = f.grid().clone();
    let mut total = 0.0;
    for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let r = f.map_modes(true, |idx, c| {
            let q = g.xi_squared(idx);
            if q == T::zero() {
                return Complex::new(T::zero(), T::zero());
            }
            let (i1, i2) = g.split(idx);
            let x = |axis: usize| {
                let i = if axis == 0 { i1 } else { i2 };
                if a == b {
                    g.xi(i)
                } else {
                    g.xi_odd(i)
                }
            };
            c * (x(a) * x(b) / q)
        });
        total += f64_norm(&r, NormKind::Linf)?;
    }
    Ok(total)
}

/// `(lhs, rhs)` of the logarithmic Sobolev bound for one zero-mean field.
pub fn log_sobolev_terms<T: Real>(f: &SpectralField<T>, p: f64) -> Result<(f64, f64)> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("logarithmic Sobolev bound needs 2 < p < inf, got {p}")));
    }
    let scale = f.max_coeff();
    if f.mean().norm() > T::rel_tol(1e-12) * scale {
        return Err(Error::NonZeroMean {
            mean: f.mean().norm().to_f64_lossy(),
        });
    }
    let lhs = riesz_sup_sum(f)?;
    let rhs = f64_norm(f, NormKind::L2)?
        + f64_norm(f, NormKind::Linf)? * (std::f64::consts::E + f64_norm(&gradient(f), NormKind::Lp(p))?).ln();
    Ok((lhs, rhs))
}

/// Logarithmic Sobolev bound; entry `i` is scaled by
/// `LOG_SOBOLEV_SCALES[i % 3]` so one constant must cover all three scales.
pub fn check_log_sobolev<T: Real>(corpus: &CorpusSpec, n: usize, p: f64) -> Result<InequalityReport> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("logarithmic Sobolev bound needs 2 < p < inf, got {p}")));
    }
    let (entries, per) = sweep::<T>(corpus, n, 1, |e, f| {
        let lambda = LOG_SOBOLEV_SCALES[e.index % LOG_SOBOLEV_SCALES.len()];
        Ok(vec![log_sobolev_terms(&f[0].scale(T::lit(lambda)), p)?])
    })?;
    Ok(split_reports(&[&format!("log_sobolev_p{p}")], n, &entries, &per).remove(0))
}

/// `(‖f‖_q^q, ‖f‖²_2 ‖∇f‖_2^{q-2})`.
pub fn gn_terms<T: Real>(f: &SpectralField<T>, q: f64) -> Result<(f64, f64)> {
    if !(q >= 2.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("Gagliardo-Nirenberg needs 2 <= q < inf, got {q}")));
    }
    let lhs = f64_norm(f, NormKind::Lp(q))?.powf(q);
    let l2 = f64_norm(f, NormKind::L2)?;
    let grad = f64_norm(&gradient(f), NormKind::L2)?;
    Ok((lhs, l2 * l2 * grad.powf(q - 2.0)))
}

pub fn check_gn<T: Real>(corpus: &CorpusSpec, n: usize, q: f64) -> Result<InequalityReport> {
    if !(q >= 2.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("Gagliardo-Nirenberg needs 2 <= q < inf, got {q}")));
    }
    let (entries, per) = sweep::<T>(corpus, n, 1, |_, f| Ok(vec![gn_terms(&f[0], q)?]))?;
    Ok(split_reports(&[&format!("gagliardo_nirenberg_q{q}")], n, &entries, &per).remove(0))
}
