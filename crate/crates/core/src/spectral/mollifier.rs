//! Standard radial bump kernel and its Fourier transform.
//!
//! `ρ(r) = c·exp(-1/(1-r²))` for `r < 1`, zero outside, with `c` fixing
//! `∫ρ = 1` over the plane. The transform of a radial function only depends
//! on `|η|`, so we evaluate it along `η = (η, 0)`:
//!
//! `ρ̂(η) = ∫ P(x) cos(η x) dx`,  `P(x) = ∫ ρ(√(x²+y²)) dy`.
//!
//! Both integrands are C∞ with compact support in `[-1, 1]`, where the
//! trapezoid rule converges faster than any power of the node spacing.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::grid::Grid;

const NODES: usize = 2000;

struct Profile {
    h: f64,
    /// `P(x_j)` for `x_j = j h`, `j = 0..=NODES`, normalized to unit mass.
    values: Vec<f64>,
}

fn profile() -> &'static Profile {
    static PROFILE: OnceLock<Profile> = OnceLock::new();
    PROFILE.get_or_init(|| {
        let h = 1.0 / NODES as f64;
        let bump = |r2: f64| if r2 < 1.0 { (-1.0 / (1.0 - r2)).exp() } else { 0.0 };
        let mut values: Vec<f64> = (0..=NODES)
            .map(|j| {
                let x = j as f64 * h;
                let x2 = x * x;
                let mut s = bump(x2);
                for m in 1..=NODES {
                    let y = m as f64 * h;
                    let v = bump(x2 + y * y);
                    if v == 0.0 {
                        break;
                    }
                    s += 2.0 * v;
                }
                s * h
            })
            .collect();
        let mass = h * (values[0] + 2.0 * values[1..].iter().sum::<f64>());
        for v in values.iter_mut() {
            *v /= mass;
        }
        Profile { h, values }
    })
}

/// `ρ̂(η)`, the Fourier transform of the unit-mass bump at radius `|η|`.
/// Equals 1 at the origin and is bounded by 1 in magnitude.
pub fn bump_transform(eta: f64) -> f64 {
    static ZERO: OnceLock<f64> = OnceLock::new();
    // dividing by the same quadrature at η = 0 makes ρ̂(0) = 1 exactly
    let zero = *ZERO.get_or_init(|| cosine_sum(0.0));
    cosine_sum(eta.abs()) / zero
}

fn cosine_sum(eta: f64) -> f64 {
    let p = profile();
    let mut s = p.values[0];
    for (j, v) in p.values.iter().enumerate().skip(1) {
        s += 2.0 * v * (eta * j as f64 * p.h).cos();
    }
    s * p.h
}

/// Pointwise kernel `ρ(r)` with the same normalization as [`bump_transform`].
pub fn bump_kernel(r: f64) -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    let c = *C.get_or_init(|| {
        // ∫ρ = π ∫_0^1 exp(-1/(1-u)) du with u = r²
        let mass = simpson(|u| if u < 1.0 { (-1.0 / (1.0 - u)).exp() } else { 0.0 }, 4000);
        1.0 / (std::f64::consts::PI * mass)
    });
    if r.abs() < 1.0 {
        c * (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Composite Simpson rule on `[0, 1]` with `m` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let mut s = f(0.0) + f(1.0);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

/// Multiplier `ρ̂(ε|ξ|)` for every mode of `grid`, computed once per `(grid, ε)`.
pub fn mollifier_symbol<T: Real>(grid: &Grid<T>, eps: T) -> Result<Arc<Vec<T>>> {
    let limit = grid.length() / T::lit(4.0);
    if !(eps > T::zero() && eps < limit) {
        return Err(Error::MollifierScale {
            eps: eps.to_f64_lossy(),
            limit: limit.to_f64_lossy(),
        });
    }
    let key = eps.to_f64_lossy().to_bits();
    if let Some(hit) = grid.mollifier_cache().lock().expect("cache lock").get(&key) {
        return Ok(hit.clone());
    }
    let kappa = grid.kappa().to_f64_lossy();
    let e = eps.to_f64_lossy();
    let mut by_k2: HashMap<i64, T> = HashMap::new();
    let symbol: Vec<T> = (0..grid.len())
        .map(|idx| {
            let k2 = grid.k_squared(idx);
            *by_k2
                .entry(k2)
                .or_insert_with(|| T::lit(bump_transform(e * kappa * (k2 as f64).sqrt())))
        })
        .collect();
    let symbol = Arc::new(symbol);
    grid.mollifier_cache()
        .lock()
        .expect("cache lock")
        .insert(key, symbol.clone());
    Ok(symbol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mass() {
        assert!((bump_transform(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transform_matches_hankel_quadrature() {
        // independent route: ρ̂(η) = 2π ∫ ρ(r) J0(η r) r dr, J0 from its integral representation
        let j0 = |x: f64| {
            let m = 400;
            let h = std::f64::consts::PI / m as f64;
            (0..m).map(|i| (x * ((i as f64 + 0.5) * h).sin()).cos()).sum::<f64>() * h / std::f64::consts::PI
        };
        for &eta in &[0.5, 2.0, 5.0, 12.0] {
            // u = r² keeps the integrand smooth at the origin
            let hankel = std::f64::consts::PI
                * simpson(|u| bump_kernel(u.sqrt()) * j0(eta * u.sqrt()), 4000);
            assert!(
                (hankel - bump_transform(eta)).abs() < 1e-11,
                "eta={eta}: {hankel} vs {}",
                bump_transform(eta)
            );
        }
    }

    #[test]
    fn bounded_by_one_and_decaying() {
        let mut prev_peak = f64::INFINITY;
        for block in 0..6 {
            let peak = (0..100)
                .map(|i| bump_transform(block as f64 * 10.0 + i as f64 * 0.1 + 0.05).abs())
                .fold(0.0, f64::max);
            assert!(peak <= 1.0);
            assert!(peak < prev_peak);
            prev_peak = peak;
        }
    }

    #[test]
    fn rejects_wide_kernels() {
        let g = Grid::<f64>::unit(16).unwrap();
        let limit = std::f64::consts::PI / 2.0;
        assert!(mollifier_symbol(&g, limit).is_err());
        assert!(mollifier_symbol(&g, 0.0).is_err());
        assert!(mollifier_symbol(&g, 0.5).is_ok());
    }
}
