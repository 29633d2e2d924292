//! Linear Fourier multipliers and norms.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::field::{SpectralField, VectorField};
use crate::spectral::grid::{Axis, Grid};
use crate::spectral::mollifier::mollifier_symbol;

/// `(i ξ_axis)^order`. Odd orders use the Nyquist-zeroed wavenumbers.
pub fn differentiate<T: Real>(f: &SpectralField<T>, axis: Axis, order: u32) -> SpectralField<T> {
    let g = f.grid().clone();
    let odd = order % 2 == 1;
    // i^order
    let unit = match order % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    };
    f.map_modes(true, |idx, c| {
        let (i1, i2) = g.split(idx);
        let xi = if odd { g.xi_odd_axis(axis, i1, i2) } else { g.xi_axis(axis, i1, i2) };
        c * unit * xi.powi(order as i32)
    })
}

pub fn laplacian<T: Real>(f: &SpectralField<T>) -> SpectralField<T> {
    let g = f.grid().clone();
    f.map_modes(true, |idx, c| c * (-g.xi_squared(idx)))
}

/// `(∂1 f, ∂2 f)`.
pub fn gradient<T: Real>(f: &SpectralField<T>) -> VectorField<T> {
    VectorField {
        c1: differentiate(f, Axis::X1, 1),
        c2: differentiate(f, Axis::X2, 1),
    }
}

/// Leray projector `v̂ - ξ(ξ·v̂)/|ξ|²`; modes with `ξ = 0` pass through.
pub fn leray_project<T: Real>(v: &VectorField<T>) -> VectorField<T> {
    let g = v.grid().clone();
    let n = g.n();
    let mut c1 = v.c1.clone();
    let mut c2 = v.c2.clone();
    {
        let a1 = c1.coeffs_mut();
        let a2 = c2.coeffs_mut();
        for idx in 0..g.len() {
            let (x1, x2) = (g.xi_odd(idx / n), g.xi_odd(idx % n));
            let q = x1 * x1 + x2 * x2;
            if q == T::zero() {
                continue;
            }
            let dot = (a1[idx] * x1 + a2[idx] * x2) / q;
            a1[idx] = a1[idx] - dot * x1;
            a2[idx] = a2[idx] - dot * x2;
        }
    }
    VectorField { c1, c2 }
}

/// Convolution with the scaled bump `ρ_ε`, done as multiplication by `ρ̂(ε|ξ|)`.
pub fn mollify<T: Real>(f: &SpectralField<T>, eps: T) -> Result<SpectralField<T>> {
    let symbol = mollifier_symbol(f.grid(), eps)?;
    Ok(f.map_modes(true, |idx, c| c * symbol[idx]))
}

pub fn mollify_vector<T: Real>(v: &VectorField<T>, eps: T) -> Result<VectorField<T>> {
    Ok(VectorField {
        c1: mollify(&v.c1, eps)?,
        c2: mollify(&v.c2, eps)?,
    })
}

/// Bessel potential `Λ^s = (1 - Δ)^{s/2}`.
pub fn lambda_s<T: Real>(f: &SpectralField<T>, s: T) -> SpectralField<T> {
    let g = f.grid().clone();
    let half = s / T::lit(2.0);
    f.map_modes(true, |idx, c| c * (T::one() + g.xi_squared(idx)).powf(half))
}

/// `a·∇f`, evaluated in physical space and truncated to the 2/3 mask.
pub fn advect<T: Real>(a: &VectorField<T>, f: &SpectralField<T>) -> SpectralField<T> {
    let d1 = differentiate(f, Axis::X1, 1);
    let d2 = differentiate(f, Axis::X2, 1);
    let mut out = a.c1.product(&d1);
    out += &a.c2.product(&d2);
    out.dealias()
}

/// `(a·∇) v` componentwise.
pub fn advect_vector<T: Real>(a: &VectorField<T>, v: &VectorField<T>) -> VectorField<T> {
    VectorField {
        c1: advect(a, &v.c1),
        c2: advect(a, &v.c2),
    }
}

/// Pointwise supremum of the Frobenius norm of `∇v`.
pub fn gradient_sup<T: Real>(v: &VectorField<T>) -> T {
    let parts: Vec<Vec<T>> = [&v.c1, &v.c2]
        .iter()
        .flat_map(|c| [Axis::X1, Axis::X2].map(|ax| differentiate(c, ax, 1).to_physical()))
        .collect();
    (0..v.grid().len())
        .map(|i| parts.iter().map(|p| p[i] * p[i]).sum::<T>().sqrt())
        .fold(T::zero(), T::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormKind {
    L2,
    /// Physical-space quadrature, `1 <= p < ∞`.
    Lp(f64),
    Linf,
    /// Inhomogeneous Sobolev norm with weight `(1+|ξ|²)^s`.
    Hs(f64),
    /// Homogeneous norm with weight `|ξ|^{2σ}`, mean mode excluded.
    Hdot(f64),
}

/// Anything made of scalar components on one grid.
pub trait Components<T: Real> {
    fn parts(&self) -> Vec<&SpectralField<T>>;
}

impl<T: Real> Components<T> for SpectralField<T> {
    fn parts(&self) -> Vec<&SpectralField<T>> {
        vec![self]
    }
}

impl<T: Real> Components<T> for VectorField<T> {
    fn parts(&self) -> Vec<&SpectralField<T>> {
        vec![&self.c1, &self.c2]
    }
}

impl<T: Real, A: Components<T>, B: Components<T>> Components<T> for (&A, &B) {
    fn parts(&self) -> Vec<&SpectralField<T>> {
        let mut p = self.0.parts();
        p.extend(self.1.parts());
        p
    }
}

/// Mean modes below this fraction of the largest coefficient count as roundoff.
const MEAN_TOL: f64 = 1e-12;

/// Norm of a scalar or vector field; vector magnitudes are Euclidean.
pub fn norm<T: Real, F: Components<T> + ?Sized>(f: &F, kind: NormKind) -> Result<T> {
    let parts = f.parts();
    let g = parts[0].grid().clone();
    match kind {
        NormKind::L2 => Ok(weighted(&parts, |_| T::one()).sqrt()),
        NormKind::Hs(s) => {
            let s = T::lit(s);
            Ok(weighted(&parts, |idx| (T::one() + g.xi_squared(idx)).powf(s)).sqrt())
        }
        NormKind::Hdot(sigma) => {
            if sigma < 0.0 {
                let scale = parts.iter().map(|p| p.max_coeff()).fold(T::zero(), T::max);
                for p in &parts {
                    let m = p.mean().norm();
                    if m > T::rel_tol(MEAN_TOL) * scale {
                        return Err(Error::NonZeroMean { mean: m.to_f64_lossy() });
                    }
                }
            }
            let sigma = T::lit(sigma);
            Ok(weighted(&parts, |idx| {
                if idx == 0 {
                    T::zero()
                } else {
                    g.xi_squared(idx).powf(sigma)
                }
            })
            .sqrt())
        }
        NormKind::Lp(p) => {
            if !(p >= 1.0) || !p.is_finite() {
                return Err(Error::InvalidArgument(format!("L^p needs 1 <= p < inf, got {p}")));
            }
            let mag = magnitudes(&parts);
            let pt = T::lit(p);
            let h2 = g.spacing() * g.spacing();
            let s: T = mag.iter().map(|&m| m.powf(pt)).sum();
            Ok((s * h2).powf(T::one() / pt))
        }
        NormKind::Linf => Ok(magnitudes(&parts).into_iter().fold(T::zero(), T::max)),
    }
}

fn weighted<T: Real>(parts: &[&SpectralField<T>], w: impl Fn(usize) -> T) -> T {
    let g = parts[0].grid();
    let mut total = T::zero();
    for p in parts {
        for (idx, c) in p.coeffs().iter().enumerate() {
            let e = c.norm_sqr();
            if !e.is_zero() {
                total = total + w(idx) * e;
            }
        }
    }
    total * g.area()
}

fn magnitudes<T: Real>(parts: &[&SpectralField<T>]) -> Vec<T> {
    let phys: Vec<Vec<T>> = parts.iter().map(|p| p.to_physical()).collect();
    let len = phys[0].len();
    (0..len)
        .map(|i| phys.iter().map(|p| p[i] * p[i]).sum::<T>().sqrt())
        .collect()
}

/// Worst-case `H^{m-1}` rate gain of `J_ε - I` per unit `H^m` norm:
/// `max_ξ |1 - ρ̂(ε|ξ|)| / (1+|ξ|²)^{1/2}` over the lattice.
pub fn mollifier_defect_gain<T: Real>(grid: &Grid<T>, eps: T) -> Result<T> {
    let symbol = mollifier_symbol(grid, eps)?;
    Ok((0..grid.len())
        .map(|i| (T::one() - symbol[i]).abs() / (T::one() + grid.xi_squared(i)).sqrt())
        .fold(T::zero(), T::max))
}

/// Worst-case smoothing gain `max_ξ (1+|ξ|²)^{k/2} |ρ̂(ε|ξ|)|` of `J_ε` from
/// `H^m` into `H^{m+k}`.
pub fn mollifier_smoothing_gain<T: Real>(grid: &Grid<T>, eps: T, k: u32) -> Result<T> {
    let symbol = mollifier_symbol(grid, eps)?;
    let half = T::lit(k as f64 / 2.0);
    Ok((0..grid.len())
        .map(|i| (T::one() + grid.xi_squared(i)).powf(half) * symbol[i].abs())
        .fold(T::zero(), T::max))
}

/// Zeroes coefficients whose magnitude is below `tol` times the largest one.
pub fn chop<T: Real>(f: &SpectralField<T>, tol: T) -> SpectralField<T> {
    let cut = f.max_coeff() * tol;
    f.map_modes(true, |_, c| if c.norm() < cut { Complex::zero() } else { c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Grid<f64> {
        Grid::unit(n).unwrap()
    }

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = unit(16);
        let c = SpectralField::from_fn(&g, |_, _| 3.5);
        for order in 1..4 {
            assert!(differentiate(&c, Axis::X1, order).max_coeff() < 1e-15);
        }
    }

    #[test]
    fn derivative_of_sine_is_cosine() {
        for n in [8, 16, 64] {
            let g = unit(n);
            let f = SpectralField::from_fn(&g, |x, _| x.sin());
            let d = differentiate(&f, Axis::X1, 1).to_physical();
            let want = SpectralField::from_fn(&g, |x, _| x.cos()).to_physical();
            assert!(max_abs_diff(&d, &want) < 1e-12);
        }
    }

    #[test]
    fn laplacian_of_product_of_sines() {
        let g = unit(32);
        let f = SpectralField::from_fn(&g, |x, y| x.sin() * y.sin());
        let lap = &differentiate(&f, Axis::X1, 2) + &differentiate(&f, Axis::X2, 2);
        let n = g.n();
        let p = lap.to_physical();
        for i1 in 0..n {
            for i2 in 0..n {
                let (x, y) = (g.coord(i1), g.coord(i2));
                assert!((p[i1 * n + i2] + 2.0 * x.sin() * y.sin()).abs() < 1e-12);
            }
        }
        assert!((&lap - &laplacian(&f)).max_coeff() < 1e-15);
    }

    #[test]
    fn leray_annihilates_gradients() {
        let g = unit(32);
        let phi = SpectralField::from_fn(&g, |x, y| (x + y).sin());
        let p = leray_project(&gradient(&phi));
        assert!(p.c1.max_coeff() < 1e-14 && p.c2.max_coeff() < 1e-14);
    }

    #[test]
    fn leray_fixes_solenoidal_fields() {
        let g = unit(32);
        let psi = SpectralField::from_fn(&g, |x, y| x.sin() * y.sin());
        let v = VectorField {
            c1: -&differentiate(&psi, Axis::X2, 1),
            c2: differentiate(&psi, Axis::X1, 1),
        };
        let p = leray_project(&v);
        assert!((&p - &v).c1.max_coeff() < 1e-12 && (&p - &v).c2.max_coeff() < 1e-12);
    }

    #[test]
    fn leray_matches_poisson_solve() {
        // oracle: div v = cos(x1+x2); the Poisson problem Δφ = div v is solved
        // by hand, φ = -cos(x1+x2)/2, so ℙv = v - ∇φ in closed form
        let g = unit(32);
        let v = VectorField {
            c1: SpectralField::from_fn(&g, |_, y| y.sin()),
            c2: SpectralField::from_fn(&g, |x, y| (x + y).sin()),
        };
        let p = leray_project(&v);
        let want1 = SpectralField::from_fn(&g, |x, y| y.sin() - 0.5 * (x + y).sin());
        let want2 = SpectralField::from_fn(&g, |x, y| 0.5 * (x + y).sin());
        assert!(max_abs_diff(&p.c1.to_physical(), &want1.to_physical()) < 1e-12);
        assert!(max_abs_diff(&p.c2.to_physical(), &want2.to_physical()) < 1e-12);
    }

    #[test]
    fn mollifier_preserves_constants() {
        let g = unit(16);
        let c = SpectralField::from_fn(&g, |_, _| 2.0);
        let m = mollify(&c, 0.3).unwrap();
        assert!((&m - &c).max_coeff() < 1e-15);
    }

    #[test]
    fn lambda_s_examples() {
        let g = unit(16);
        let f = SpectralField::from_fn(&g, |x, y| x.sin() + (3.0 * y).cos());
        assert!((&lambda_s(&f, 0.0) - &f).max_coeff() < 1e-15);
        let e = SpectralField::from_fn(&g, |x, _| x.cos());
        let s = 1.7;
        let scaled = lambda_s(&e, s);
        assert!((&scaled - &e.scale(2f64.powf(s / 2.0))).max_coeff() < 1e-15);
        let back = lambda_s(&lambda_s(&f, s), -s);
        assert!((&back - &f).max_coeff() < 1e-14);
        let two = lambda_s(&f, 2.0);
        assert!((&two - &(&f - &laplacian(&f))).max_coeff() < 1e-12);
    }

    #[test]
    fn sine_norms_closed_form() {
        let g = unit(32);
        let f = SpectralField::from_fn(&g, |x, _| x.sin());
        let l2 = norm(&f, NormKind::L2).unwrap();
        assert!((l2 - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        for eps in [0.1, 0.3, 0.9] {
            let h = norm(&f, NormKind::Hdot(-eps)).unwrap();
            assert!((h - l2).abs() < 1e-12);
        }
        assert!((norm(&f, NormKind::Hs(0.0)).unwrap() - l2).abs() < 1e-12);
        let quad = norm(&f, NormKind::Lp(2.0)).unwrap();
        assert!((quad - l2).abs() < 1e-10 * l2);
        assert!((norm(&f, NormKind::Linf).unwrap() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn negative_homogeneous_norm_requires_zero_mean() {
        let g = unit(16);
        let f = SpectralField::from_fn(&g, |x, _| 1.0 + x.sin());
        assert!(matches!(norm(&f, NormKind::Hdot(-0.3)), Err(Error::NonZeroMean { .. })));
        assert!(norm(&f, NormKind::Hdot(0.5)).is_ok());
    }

    #[test]
    fn vector_norms_are_euclidean() {
        let g = unit(16);
        let v = VectorField {
            c1: SpectralField::from_fn(&g, |x, _| x.sin()),
            c2: SpectralField::from_fn(&g, |x, _| x.cos()),
        };
        assert!((norm(&v, NormKind::Linf).unwrap() - 1.0).abs() < 1e-12);
        let l2 = norm(&v, NormKind::L2).unwrap();
        assert!((l2 - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn advection_of_shear_by_itself_vanishes() {
        let g = unit(32);
        let u = VectorField {
            c1: SpectralField::from_fn(&g, |_, y| y.sin()),
            c2: SpectralField::zeros(&g),
        };
        let a = advect_vector(&u, &u);
        assert!(a.c1.max_coeff() < 1e-15 && a.c2.max_coeff() < 1e-15);
    }
}
