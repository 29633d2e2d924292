//! Initial data: closed-form seeds for verification runs and random
//! solenoidal fields with a prescribed power-law spectrum.

use std::f64::consts::{E, PI};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{differentiate, Axis, Grid, MHDState, NormKind, SpectralField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IcKind {
    /// `u = A (sin(2π m x2 / L), 0)`, `b = 0`.
    Shear { amplitude: f64, mode: u32 },
    /// `u = b = ∇^⊥ψ` for a fixed two-mode stream function scaled by `A`.
    ElsasserAligned { amplitude: f64 },
    /// `u` a cosine stream mode of wavenumber `k`, `b` a sine mode at half
    /// the amplitude.
    SingleMode { k1: i64, k2: i64, amplitude: f64 },
    /// Random phases on a deterministic magnitude profile
    /// `|û(ξ)| ∝ |ξ|^{α_low}` for `|ξ| < k_cross` and `∝ |ξ|^{-r_high}` above,
    /// times `e^{-presmooth |ξ|²}`. `amplitude` is the box RMS of `|(u,b)|`.
    RandomSpectrum {
        alpha_low: f64,
        r_high: f64,
        amplitude: f64,
        seed: u64,
        /// Physical wavenumber of the kink.
        k_cross: f64,
        presmooth: f64,
    },
}

impl IcKind {
    pub fn amplitude(&self) -> f64 {
        match *self {
            IcKind::Shear { amplitude, .. }
            | IcKind::ElsasserAligned { amplitude }
            | IcKind::SingleMode { amplitude, .. }
            | IcKind::RandomSpectrum { amplitude, .. } => amplitude,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            IcKind::RandomSpectrum { seed, .. } => Some(seed),
            _ => None,
        }
    }

    /// Random spectrum whose heat-flow decay saturates the `κ = min(ε, ½)`
    /// envelope: slope [`saturating_slope`], kink at `|ξ| = 1`, `r_high = 4`
    /// and presmoothing `e^{-e|ξ|²}`, so the linear decay is a power of `e + t`.
    pub fn decay_data(eps: f64, amplitude: f64, seed: u64) -> Self {
        IcKind::RandomSpectrum {
            alpha_low: saturating_slope(eps),
            r_high: 4.0,
            amplitude,
            seed,
            k_cross: 1.0,
            presmooth: E,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.amplitude();
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidArgument(format!("amplitude {a} must be positive")));
        }
        match *self {
            IcKind::Shear { mode, .. } if mode == 0 => {
                Err(Error::InvalidArgument("shear mode must be at least 1".into()))
            }
            IcKind::SingleMode { k1, k2, .. } if k1 == 0 && k2 == 0 => {
                Err(Error::InvalidArgument("single mode needs a nonzero wavenumber".into()))
            }
            IcKind::RandomSpectrum {
                alpha_low,
                r_high,
                k_cross,
                presmooth,
                ..
            } => {
                if !alpha_low.is_finite() || !r_high.is_finite() {
                    return Err(Error::InvalidArgument("spectral slopes must be finite".into()));
                }
                if !(k_cross > 0.0) || !k_cross.is_finite() {
                    return Err(Error::InvalidArgument(format!("k_cross = {k_cross} must be positive")));
                }
                if !(presmooth >= 0.0) || !presmooth.is_finite() {
                    return Err(Error::InvalidArgument(format!("presmooth = {presmooth} must be nonnegative")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// An [`IcKind`] together with the box it lives on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ICSpec {
    pub kind: IcKind,
    pub n: usize,
    pub length: f64,
}

impl ICSpec {
    pub fn grid<T: Real>(&self) -> Result<Grid<T>> {
        Grid::new(self.n, T::lit(self.length))
    }
}

/// Low-shell slope whose heat-flow decay is `(e+t)^{-min(ε,½)}` in `L²`.
/// A 2-D spectrum `|û| ∝ |ξ|^α` decays at rate `(α+1)/2`.
pub fn saturating_slope(eps: f64) -> f64 {
    2.0 * eps.min(0.5) - 1.0
}

/// Builds the state described by `spec` on its own grid.
pub fn make_ic<T: Real>(spec: &ICSpec) -> Result<MHDState<T>> {
    generate(&spec.kind, &spec.grid()?)
}

/// Builds `kind` on `grid`.
pub fn generate<T: Real>(kind: &IcKind, grid: &Grid<T>) -> Result<MHDState<T>> {
    kind.validate()?;
    let state = match *kind {
        IcKind::Shear { amplitude, mode } => {
            let a = T::lit(amplitude);
            let w = T::lit(2.0 * PI * mode as f64) / grid.length();
            let u = VectorField::new(
                SpectralField::from_fn(grid, |_, y| a * (w * y).sin()),
                SpectralField::zeros(grid),
            )?;
            MHDState::new(u, VectorField::zeros(grid), T::zero())?
        }
        IcKind::ElsasserAligned { amplitude } => {
            let a = T::lit(amplitude);
            let k = grid.kappa();
            let (p3, p2, two) = (T::lit(0.3), T::lit(0.2), T::lit(2.0));
            let psi = SpectralField::from_fn(grid, |x, y| {
                a / k * (p3 * (k * (x + two * y)).sin() + p2 * (two * k * x).cos() * (k * y).sin())
            });
            let u = velocity_from_stream(&psi).dealias();
            MHDState::new(u.clone(), u, T::zero())?
        }
        IcKind::SingleMode { k1, k2, amplitude } => {
            let (x1, x2) = (grid.kappa() * T::lit(k1 as f64), grid.kappa() * T::lit(k2 as f64));
            let m = (x1 * x1 + x2 * x2).sqrt();
            let a = T::lit(amplitude) / m;
            let half = T::lit(0.5);
            let psi_u = SpectralField::from_fn(grid, |x, y| a * (x1 * x + x2 * y).cos());
            let psi_b = SpectralField::from_fn(grid, |x, y| half * a * (x1 * x + x2 * y).sin());
            MHDState::new(velocity_from_stream(&psi_u), velocity_from_stream(&psi_b), T::zero())?
        }
        IcKind::RandomSpectrum {
            alpha_low,
            r_high,
            amplitude,
            seed,
            k_cross,
            presmooth,
        } => random_spectrum(grid, alpha_low, r_high, amplitude, seed, k_cross, presmooth)?,
    };
    if !state.is_finite() || !state.energy().is_finite() {
        return Err(Error::InvalidArgument("initial data is not finite".into()));
    }
    Ok(state)
}

/// `∇^⊥ψ = (-∂2ψ, ∂1ψ)`.
pub fn velocity_from_stream<T: Real>(psi: &SpectralField<T>) -> VectorField<T> {
    VectorField {
        c1: -&differentiate(psi, Axis::X2, 1),
        c2: differentiate(psi, Axis::X1, 1),
    }
}

/// Velocity magnitude of the random spectrum at `|ξ|`.
fn profile(xi: f64, alpha: f64, r: f64, kc: f64, tau: f64) -> f64 {
    let m = if xi < kc {
        xi.powf(alpha)
    } else {
        kc.powf(alpha + r) * xi.powf(-r)
    };
    m * (-tau * xi * xi).exp()
}

fn random_spectrum<T: Real>(
    grid: &Grid<T>,
    alpha: f64,
    r: f64,
    amplitude: f64,
    seed: u64,
    kc: f64,
    tau: f64,
) -> Result<MHDState<T>> {
    let n = grid.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = Complex::new(0.0, 0.0);
    let mut psi = [vec![zero; grid.len()], vec![zero; grid.len()]];
    for idx in 0..grid.len() {
        let (i1, i2) = grid.split(idx);
        let (k1, k2) = (grid.k(i1), grid.k(i2));
        if !(k2 > 0 || (k2 == 0 && k1 > 0)) || !grid.in_dealias(idx) {
            continue;
        }
        let xi = grid.xi_squared(idx).to_f64_lossy().sqrt();
        let m = profile(xi, alpha, r, kc, tau) / xi;
        let mirror = grid.index_of(-k1, -k2).expect("inside the dealias band");
        for p in psi.iter_mut() {
            let theta = rng.gen::<f64>() * 2.0 * PI;
            let c = Complex::from_polar(m, theta);
            p[idx] = c;
            p[mirror] = c.conj();
        }
    }
    let energy: f64 = psi
        .iter()
        .flat_map(|p| p.iter().enumerate())
        .map(|(idx, c)| grid.xi_squared(idx).to_f64_lossy() * c.norm_sqr())
        .sum::<f64>()
        * grid.area().to_f64_lossy();
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "spectrum has energy {energy} on a {n}^2 grid"
        )));
    }
    let scale = amplitude * grid.length().to_f64_lossy() / energy.sqrt();
    let [pu, pb] = psi.map(|p| {
        let coeffs = p.into_iter().map(|c| c * scale).map(|c| Complex::new(T::lit(c.re), T::lit(c.im))).collect();
        SpectralField::from_coeffs(grid, coeffs, true).expect("sized by construction")
    });
    MHDState::new(velocity_from_stream(&pu), velocity_from_stream(&pb), T::zero())
}

/// Scales `state` so that `‖(u,b)‖_{H^s}` equals `target`.
pub fn amplitude_calibrate<T: Real>(state: &MHDState<T>, target: f64, s: f64) -> Result<MHDState<T>> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::InvalidArgument(format!("target norm {target} must be positive")));
    }
    let current = state.norm(NormKind::Hs(s))?.to_f64_lossy();
    if current == 0.0 {
        return Err(Error::InvalidArgument("cannot calibrate the zero state".into()));
    }
    if current == target {
        return Ok(state.clone());
    }
    Ok(state.scale(T::lit(target / current)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IcReport {
    pub l2: f64,
    /// Box RMS of `|(u,b)|`.
    pub rms: f64,
    pub s: f64,
    pub hs: f64,
    pub eps: f64,
    pub hdot_neg: f64,
    pub max_divergence: f64,
}

/// Norms of an initial state; errors if any is not finite.
pub fn report<T: Real>(state: &MHDState<T>, s: f64, eps: f64) -> Result<IcReport> {
    let l2 = state.norm(NormKind::L2)?.to_f64_lossy();
    let hs = state.norm(NormKind::Hs(s))?.to_f64_lossy();
    let hdot_neg = state.norm(NormKind::Hdot(-eps))?.to_f64_lossy();
    if ![l2, hs, hdot_neg].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "initial norms not finite: L2 {l2}, H^{s} {hs}, H^-{eps} {hdot_neg}"
        )));
    }
    let max_divergence = state
        .u
        .relative_divergence()
        .max(state.b.relative_divergence())
        .to_f64_lossy();
    Ok(IcReport {
        l2,
        rms: l2 / state.grid().length().to_f64_lossy(),
        s,
        hs,
        eps,
        hdot_neg,
        max_divergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::rhs;
    use crate::spectral::{laplacian, norm};
    use proptest::prelude::*;

    fn box_grid(n: usize) -> Grid<f64> {
        Grid::new(n, 4.0 * PI).unwrap()
    }

    fn random(eps: f64, seed: u64) -> IcKind {
        IcKind::RandomSpectrum {
            alpha_low: eps,
            r_high: 3.0,
            amplitude: 0.1,
            seed,
            k_cross: 2.0,
            presmooth: 0.0,
        }
    }

    #[test]
    fn shear_profile() {
        let g = box_grid(32);
        let s = generate(&IcKind::Shear { amplitude: 2.0, mode: 3 }, &g).unwrap();
        let want = SpectralField::from_fn(&g, |_, y| 2.0 * (1.5 * y).sin());
        assert!((&s.u.c1 - &want).max_coeff() < 1e-14);
        assert_eq!(s.u.c2.max_coeff(), 0.0);
        assert_eq!(s.u.divergence().max_coeff(), 0.0);
        assert_eq!(s.energy(), s.u.inner(&s.u));
    }

    #[test]
    fn aligned_rhs_is_linear() {
        let g = box_grid(32);
        let s = generate(&IcKind::ElsasserAligned { amplitude: 0.5 }, &g).unwrap();
        let (du, db) = rhs(&s).unwrap();
        let lin = s.u.map(|c| &laplacian(c) + &differentiate(c, Axis::X1, 1));
        for (a, b) in [(&du, &lin), (&db, &lin)] {
            let d = a - b;
            assert!(d.c1.max_coeff().max(d.c2.max_coeff()) < 1e-12);
        }
    }

    #[test]
    fn single_mode_amplitudes() {
        let g = box_grid(16);
        let s = generate(&IcKind::SingleMode { k1: 1, k2: 2, amplitude: 1.0 }, &g).unwrap();
        let lu = norm(&s.u, NormKind::Linf).unwrap();
        let lb = norm(&s.b, NormKind::Linf).unwrap();
        assert!((lu - 1.0).abs() < 1e-12 && (lb - 0.5).abs() < 1e-12);
        assert!(s.u.relative_divergence() < 1e-14);
    }

    #[test]
    fn random_spectrum_shape_and_invariants() {
        let g = box_grid(64);
        let s = generate(&random(0.3, 9), &g).unwrap();
        s.validate().unwrap();
        let rms = s.energy().sqrt() / g.length();
        assert!((rms - 0.1).abs() < 1e-12);
        assert!(s.u.c1.top_third_fraction() == 0.0 && s.b.c2.top_third_fraction() == 0.0);
        // per-mode |û| follows the profile, up to one common factor
        let ratio = |k1: i64, k2: i64| {
            let idx = g.index_of(k1, k2).unwrap();
            let c = s.u.c1.coeffs()[idx].norm_sqr() + s.u.c2.coeffs()[idx].norm_sqr();
            let xi = g.xi_squared(idx).sqrt();
            c.sqrt() / profile(xi, 0.3, 3.0, 2.0, 0.0)
        };
        let base = ratio(1, 0);
        for (k1, k2) in [(0, 1), (2, 3), (-4, 1), (9, 5)] {
            assert!((ratio(k1, k2) / base - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let g = box_grid(32);
        let a = generate(&random(0.3, 4), &g).unwrap();
        let b = generate(&random(0.3, 4), &g).unwrap();
        let c = generate(&random(0.3, 5), &g).unwrap();
        assert_eq!(a.u.c1.coeffs(), b.u.c1.coeffs());
        assert_eq!(a.b.c2.coeffs(), b.b.c2.coeffs());
        assert_ne!(a.u.c1.coeffs(), c.u.c1.coeffs());
    }

    /// Direct O(n⁴) DFT of the physical samples, then a plain mode sum.
    #[test]
    fn hdot_neg_matches_mode_sum() {
        let n = 16;
        let g = box_grid(n);
        let s = generate(&random(0.3, 11), &g).unwrap();
        let eps = 0.3;
        let l = g.length();
        let mut total = 0.0;
        for f in [&s.u.c1, &s.u.c2, &s.b.c1, &s.b.c2] {
            let v = f.to_physical();
            let half = n as i64 / 2;
            for k1 in -half..half {
                for k2 in -half..half {
                    if k1 == 0 && k2 == 0 {
                        continue;
                    }
                    let mut c = Complex::new(0.0, 0.0);
                    for j1 in 0..n {
                        for j2 in 0..n {
                            let ph = -2.0 * PI * (k1 as f64 * j1 as f64 + k2 as f64 * j2 as f64) / n as f64;
                            c += Complex::from_polar(v[j1 * n + j2], ph);
                        }
                    }
                    c /= (n * n) as f64;
                    let xi2 = (2.0 * PI / l).powi(2) * (k1 * k1 + k2 * k2) as f64;
                    total += xi2.powf(-eps) * c.norm_sqr();
                }
            }
        }
        let oracle = (total * l * l).sqrt();
        let r = report(&s, 2.5, eps).unwrap();
        assert!(((r.hdot_neg - oracle) / oracle).abs() < 1e-10, "{} vs {}", r.hdot_neg, oracle);
    }

    #[test]
    fn calibration() {
        let g = box_grid(32);
        let s = generate(&random(0.3, 2), &g).unwrap();
        let c = amplitude_calibrate(&s, 1e-2, 2.5).unwrap();
        let hs = c.norm(NormKind::Hs(2.5)).unwrap();
        assert!(((hs - 1e-2) / 1e-2).abs() < 1e-10);
        let same = amplitude_calibrate(&c, hs, 2.5).unwrap();
        assert_eq!(same.u.c1.coeffs(), c.u.c1.coeffs());
        assert!(amplitude_calibrate(&MHDState::zeros(&g), 1.0, 2.5).is_err());
    }

    #[test]
    fn rejects_bad_specs() {
        let g = box_grid(16);
        assert!(generate(&IcKind::Shear { amplitude: 0.0, mode: 1 }, &g).is_err());
        assert!(generate(&IcKind::Shear { amplitude: 1.0, mode: 0 }, &g).is_err());
        assert!(generate(&IcKind::SingleMode { k1: 0, k2: 0, amplitude: 1.0 }, &g).is_err());
        let underflow = IcKind::RandomSpectrum {
            alpha_low: 0.0,
            r_high: 2.0,
            amplitude: 1.0,
            seed: 0,
            k_cross: 1.0,
            presmooth: 1e6,
        };
        assert!(generate(&underflow, &g).is_err());
    }

    #[test]
    fn saturating_slopes() {
        assert!((saturating_slope(0.3) + 0.4).abs() < 1e-15);
        assert_eq!(saturating_slope(0.8), 0.0);
    }

    #[test]
    fn f32_matches_f64() {
        let spec = ICSpec {
            kind: random(0.3, 1),
            n: 32,
            length: 4.0 * PI,
        };
        let a: MHDState<f64> = make_ic(&spec).unwrap();
        let b: MHDState<f32> = make_ic(&spec).unwrap();
        let ea = a.energy();
        let eb = b.energy() as f64;
        assert!(((ea - eb) / ea).abs() < 1e-5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn norms_scale_linearly(lambda in 1e-3f64..1e3, seed in 0u64..1000) {
            let g = box_grid(16);
            let s = generate(&random(0.5, seed), &g).unwrap();
            let t = s.scale(lambda);
            for kind in [NormKind::L2, NormKind::Hs(2.5), NormKind::Hdot(-0.3)] {
                let (a, b) = (s.norm(kind).unwrap(), t.norm(kind).unwrap());
                prop_assert!((b / (lambda * a) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn every_ic_is_admissible(seed in 0u64..10_000, alpha in -0.9f64..1.0, r in 1.0f64..5.0) {
            let g = box_grid(16);
            let kind = IcKind::RandomSpectrum { alpha_low: alpha, r_high: r, amplitude: 0.3, seed, k_cross: 1.5, presmooth: 0.1 };
            let s = generate(&kind, &g).unwrap();
            prop_assert!(s.validate().is_ok());
            prop_assert!(report(&s, 2.5, 0.3).is_ok());
        }
    }
}
