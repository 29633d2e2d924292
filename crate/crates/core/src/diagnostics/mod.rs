//! Per-sample norm ledgers and post-hoc decay analysis.

mod fit;

pub use fit::{
    duhamel_lowfreq_bound, fit_decay_exponent, fit_envelope, DecayFit, DuhamelReport, DuhamelSample, EnvelopeFit,
    MIN_FIT_SAMPLES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{MHDState, VectorField};

/// Orders and constants used when sampling a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsSettings {
    /// Order of the inhomogeneous Sobolev monitor.
    pub s: f64,
    /// The homogeneous norm sampled is `Ḣ^{-eps}`.
    pub eps: f64,
    /// Shell constant: `S(t) = {|ξ| <= C1^{-1/2} g(t)}`.
    pub c1: f64,
}

impl Default for DiagnosticsSettings {
    fn default() -> Self {
        Self { s: 2.5, eps: 0.3, c1: 1.0 }
    }
}

/// One row of the time series. Norms are `L²` norms over the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub l2_u: f64,
    pub l2_b: f64,
    pub grad_l2_u: f64,
    pub grad_l2_b: f64,
    /// `‖(u, b)‖_{H^s}`.
    pub hs: f64,
    /// `‖(u, b)‖_{Ḣ^{-eps}}`.
    pub hdot_neg: f64,
    /// Energy `‖(u,b)‖²` carried by the shell `S(t)`.
    pub low_freq_energy: f64,
    /// Nonzero modes inside `S(t)`.
    pub low_freq_modes: usize,
    pub g_value: f64,
    /// `∫_0^t (‖∇u‖² + ‖∇b‖²)`.
    pub cumulative_dissipation: f64,
    /// `E(t) + 2 ∫_0^t D - E(0)` with `E = ‖u‖² + ‖b‖²`.
    pub energy_residual: f64,
}

impl DiagnosticsRecord {
    /// `‖(u, b)‖_{L²}`.
    pub fn l2(&self) -> f64 {
        self.l2_u.hypot(self.l2_b)
    }

    pub fn energy(&self) -> f64 {
        self.l2_u * self.l2_u + self.l2_b * self.l2_b
    }

    pub fn is_valid(&self) -> bool {
        let nonneg = [
            self.time,
            self.l2_u,
            self.l2_b,
            self.grad_l2_u,
            self.grad_l2_b,
            self.hs,
            self.hdot_neg,
            self.low_freq_energy,
            self.g_value,
            self.cumulative_dissipation,
        ];
        nonneg.iter().all(|v| v.is_finite() && *v >= 0.0) && self.energy_residual.is_finite()
    }
}

/// `g(t) = (3 / ((e+t) ln(e+t)))^{1/2}`.
pub fn g_value(t: f64) -> f64 {
    let a = std::f64::consts::E + t;
    (3.0 / (a * a.ln())).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowFrequency {
    pub energy: f64,
    /// Nonzero lattice modes in `S(t)`.
    pub modes: usize,
    /// `S(t)` holds no nonzero mode: the box can no longer resolve the shell.
    pub saturated: bool,
}

/// Membership bound on the integer `|k|²` for `S(t)` in a box with base wavenumber `kappa`.
fn shell_k2_limit(t: f64, c1: f64, kappa: f64) -> f64 {
    let r = g_value(t) / c1.sqrt();
    (r / kappa).powi(2)
}

/// Energy of `(u, b)` inside `S(t)`; membership uses `|k|² <= (r/κ)²` on the
/// integer lattice, so ties are included.
pub fn low_freq_energy<T: Real>(state: &MHDState<T>, t: f64, c1: f64) -> Result<LowFrequency> {
    if !(t >= 0.0) || !(c1 > 0.0) {
        return Err(Error::InvalidArgument(format!("need t >= 0 and C1 > 0, got t = {t}, C1 = {c1}")));
    }
    let g = state.grid();
    let limit = shell_k2_limit(t, c1, g.kappa().to_f64_lossy());
    let mut sum = 0.0;
    let mut modes = 0;
    for idx in 1..g.len() {
        if g.k_squared(idx) as f64 <= limit {
            modes += 1;
            for f in [&state.u.c1, &state.u.c2, &state.b.c1, &state.b.c2] {
                sum += f.coeffs()[idx].norm_sqr().to_f64_lossy();
            }
        }
    }
    Ok(LowFrequency {
        energy: sum * g.area().to_f64_lossy(),
        modes,
        saturated: modes == 0,
    })
}

struct Sums {
    l2: f64,
    grad: f64,
    hs: f64,
    hdot: f64,
    low: f64,
    modes: usize,
}

fn weighted_sums<T: Real>(v: &VectorField<T>, settings: &DiagnosticsSettings, limit: f64) -> Sums {
    let g = v.grid();
    let mut s = Sums {
        l2: 0.0,
        grad: 0.0,
        hs: 0.0,
        hdot: 0.0,
        low: 0.0,
        modes: 0,
    };
    let kappa2 = g.kappa().to_f64_lossy().powi(2);
    // the weights only depend on |k|², shared by many modes
    let mut cache: std::collections::HashMap<i64, (f64, f64)> = std::collections::HashMap::new();
    for idx in 0..g.len() {
        let e = v.c1.coeffs()[idx].norm_sqr().to_f64_lossy() + v.c2.coeffs()[idx].norm_sqr().to_f64_lossy();
        let k2 = g.k_squared(idx);
        let xi2 = k2 as f64 * kappa2;
        if k2 > 0 && k2 as f64 <= limit {
            s.modes += 1;
            s.low += e;
        }
        if e == 0.0 {
            continue;
        }
        let (whs, wdot) = *cache.entry(k2).or_insert_with(|| {
            let wdot = if k2 == 0 { 0.0 } else { xi2.powf(-settings.eps) };
            ((1.0 + xi2).powf(settings.s), wdot)
        });
        s.l2 += e;
        s.grad += xi2 * e;
        s.hs += whs * e;
        s.hdot += wdot * e;
    }
    s
}

/// Samples every ledger entry of a state. `cumulative_dissipation` and the
/// initial energy come from the integrator.
pub fn record<T: Real>(
    state: &MHDState<T>,
    settings: &DiagnosticsSettings,
    cumulative_dissipation: f64,
    initial_energy: f64,
) -> Result<DiagnosticsRecord> {
    let g = state.grid();
    let t = state.time.to_f64_lossy();
    let area = g.area().to_f64_lossy();
    let scale = [&state.u.c1, &state.u.c2, &state.b.c1, &state.b.c2]
        .iter()
        .map(|f| f.max_coeff().to_f64_lossy())
        .fold(0.0, f64::max);
    for f in [&state.u.c1, &state.u.c2, &state.b.c1, &state.b.c2] {
        let m = f.mean().norm().to_f64_lossy();
        if m > T::rel_tol(1e-12).to_f64_lossy() * scale {
            return Err(Error::NonZeroMean { mean: m });
        }
    }
    let limit = shell_k2_limit(t, settings.c1, g.kappa().to_f64_lossy());
    let su = weighted_sums(&state.u, settings, limit);
    let sb = weighted_sums(&state.b, settings, limit);
    let energy = (su.l2 + sb.l2) * area;
    Ok(DiagnosticsRecord {
        time: t,
        l2_u: (su.l2 * area).sqrt(),
        l2_b: (sb.l2 * area).sqrt(),
        grad_l2_u: (su.grad * area).sqrt(),
        grad_l2_b: (sb.grad * area).sqrt(),
        hs: ((su.hs + sb.hs) * area).sqrt(),
        hdot_neg: ((su.hdot + sb.hdot) * area).sqrt(),
        low_freq_energy: (su.low + sb.low) * area,
        low_freq_modes: su.modes,
        g_value: g_value(t),
        cumulative_dissipation,
        energy_residual: energy + 2.0 * cumulative_dissipation - initial_energy,
    })
}

/// `(time, energy_residual)` for every record.
pub fn energy_report(records: &[DiagnosticsRecord]) -> Vec<(f64, f64)> {
    records.iter().map(|r| (r.time, r.energy_residual)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HsMonitor {
    pub initial: f64,
    pub max: f64,
    /// `max / initial`, zero for a zero trajectory.
    pub ratio: f64,
    /// Growth beyond ten times the initial norm.
    pub warning: bool,
}

/// Running maximum of `‖(u,b)‖_{H^s}` over the records (sampled with the
/// settings' `s`).
pub fn hs_monitor(records: &[DiagnosticsRecord]) -> HsMonitor {
    let initial = records.first().map(|r| r.hs).unwrap_or(0.0);
    let max = records.iter().map(|r| r.hs).fold(0.0, f64::max);
    let ratio = if initial > 0.0 { max / initial } else { 0.0 };
    HsMonitor {
        initial,
        max,
        ratio,
        warning: ratio > 10.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, SpectralField, VectorField};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shear(g: &Grid<f64>) -> MHDState<f64> {
        let u = VectorField::new(SpectralField::from_fn(g, |_, y| y.sin()), SpectralField::zeros(g)).unwrap();
        MHDState::new(u, VectorField::zeros(g), 0.0).unwrap()
    }

    #[test]
    fn g_decreases_from_sqrt3_over_e() {
        assert!((g_value(0.0) - (3.0 / std::f64::consts::E).sqrt()).abs() < 1e-15);
        assert!(g_value(10.0) < g_value(1.0));
    }

    #[test]
    fn empty_shell_is_saturated() {
        let g = Grid::<f64>::unit(16).unwrap();
        // g(t) < 1 = 2π/L once (e+t) ln(e+t) > 3
        let lf = low_freq_energy(&shear(&g), 5.0, 1.0).unwrap();
        assert!(lf.saturated && lf.energy == 0.0 && lf.modes == 0);
    }

    #[test]
    fn full_capture_of_unit_shell() {
        let g = Grid::<f64>::unit(16).unwrap();
        let s = shear(&g);
        // threshold sqrt(3/e)/sqrt(C1) ≈ 1.49 for C1 = 0.5: shells |k|² = 1, 2
        let lf = low_freq_energy(&s, 0.0, 0.5).unwrap();
        assert_eq!(lf.modes, 8);
        assert!((lf.energy - s.energy()).abs() < 1e-12 * s.energy());
    }

    #[test]
    fn low_frequency_matches_brute_force_mask() {
        let g = Grid::<f64>::new(32, 40.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise: Vec<f64> = (0..g.len()).map(|_| rng.gen::<f64>() - 0.5).collect();
        let psi = SpectralField::from_physical(&g, &noise).unwrap();
        let psi = psi.map_modes(true, |i, c| if i == 0 { c * 0.0 } else { c });
        let u = VectorField::new(
            -&crate::spectral::differentiate(&psi, crate::spectral::Axis::X2, 1),
            crate::spectral::differentiate(&psi, crate::spectral::Axis::X1, 1),
        )
        .unwrap();
        let s = MHDState::new(u.clone(), u.scale(0.5), 0.0).unwrap();
        for &(t, c1) in &[(0.0, 1.0), (2.0, 0.3), (7.0, 2.0)] {
            let lf = low_freq_energy(&s, t, c1).unwrap();
            let r = g_value(t) / f64::sqrt(c1);
            let mut want = 0.0;
            let mut count = 0;
            for i1 in 0..32 {
                for i2 in 0..32 {
                    let (x1, x2) = (g.xi(i1), g.xi(i2));
                    let norm = (x1 * x1 + x2 * x2).sqrt();
                    if norm > 0.0 && norm <= r {
                        count += 1;
                        let idx = i1 * 32 + i2;
                        for f in [&s.u.c1, &s.u.c2, &s.b.c1, &s.b.c2] {
                            want += f.coeffs()[idx].norm_sqr() * 1600.0;
                        }
                    }
                }
            }
            assert_eq!(lf.modes, count);
            assert!((lf.energy - want).abs() <= 1e-12 * want.max(1e-300));
            let rec = record(&s, &DiagnosticsSettings { s: 2.5, eps: 0.3, c1 }, 0.0, 0.0).unwrap();
            assert!(rec.low_freq_energy <= rec.energy() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn record_of_shear_state() {
        let g = Grid::<f64>::unit(16).unwrap();
        let s = shear(&g);
        let r = record(&s, &DiagnosticsSettings::default(), 0.0, s.energy()).unwrap();
        let l2 = (2.0f64).sqrt() * std::f64::consts::PI;
        assert!((r.l2_u - l2).abs() < 1e-12 && r.l2_b == 0.0);
        assert!((r.grad_l2_u - l2).abs() < 1e-12);
        assert!((r.hs - l2 * 2f64.powf(1.25)).abs() < 1e-12);
        assert!((r.hdot_neg - l2).abs() < 1e-12);
        assert!(r.energy_residual.abs() < 1e-12);
        assert!(r.is_valid());
    }

    #[test]
    fn zero_state_record() {
        let g = Grid::<f64>::unit(16).unwrap();
        let r = record(&MHDState::zeros(&g), &DiagnosticsSettings::default(), 0.0, 0.0).unwrap();
        assert_eq!(r.energy_residual, 0.0);
        assert_eq!(hs_monitor(&[r]).max, 0.0);
    }
}
