//! Log-log fits of decay series.

use serde::{Deserialize, Serialize};

use super::DiagnosticsRecord;
use crate::error::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 8;

/// Relative slope change between half-windows that marks a flattening tail.
const SATURATION_SLOPE_CHANGE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Minus the slope of `log y` against `log(e + t)`.
    pub kappa_hat: f64,
    pub window: (f64, f64),
    /// RMS misfit of the line in log space.
    pub residual: f64,
    pub saturated: bool,
    pub samples: usize,
    /// Fitted exponents over the first and second half of the window.
    pub half_slopes: (f64, f64),
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `y ≈ C (e+t)^{-κ}` over samples with `t` in `window` (inclusive).
pub fn fit_decay_exponent(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (t0, t1) = window;
    if !(t0 < t1) {
        return Err(Error::InvalidArgument(format!("fit window [{t0}, {t1}] is empty")));
    }
    if let (Some(first), Some(last)) = (series.first(), series.last()) {
        if t0 < first.0 || t1 > last.0 {
            return Err(Error::InvalidArgument(format!(
                "fit window [{t0}, {t1}] leaves the simulated range [{}, {}]",
                first.0, last.0
            )));
        }
    }
    let picked: Vec<(f64, f64)> = series.iter().copied().filter(|&(t, _)| t >= t0 && t <= t1).collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::DegenerateWindow {
            got: picked.len(),
            need: MIN_FIT_SAMPLES,
        });
    }
    if let Some(&(t, y)) = picked.iter().find(|&&(_, y)| !(y > 0.0) || !y.is_finite()) {
        return Err(Error::InvalidArgument(format!("norm {y} at t = {t} is not positive")));
    }
    let x: Vec<f64> = picked.iter().map(|&(t, _)| (std::f64::consts::E + t).ln()).collect();
    let y: Vec<f64> = picked.iter().map(|&(_, v)| v.ln()).collect();
    let (slope, icpt) = least_squares(&x, &y);
    let residual = (x
        .iter()
        .zip(&y)
        .map(|(a, b)| (b - slope * a - icpt).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    let mid = x.len() / 2;
    let (s1, _) = least_squares(&x[..mid], &y[..mid]);
    let (s2, _) = least_squares(&x[mid..], &y[mid..]);
    let saturated = if s1 == 0.0 {
        s2 != 0.0
    } else {
        ((s2 - s1) / s1).abs() > SATURATION_SLOPE_CHANGE
    };
    Ok(DecayFit {
        kappa_hat: -slope,
        window,
        residual,
        saturated,
        samples: x.len(),
        half_slopes: (-s1, -s2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    /// Best single constant `C` in `y ≈ C·envelope(t)` (log-space least squares).
    pub constant: f64,
    pub rms_log_misfit: f64,
    pub samples: usize,
}

/// Fits one multiplicative constant of a prescribed envelope.
pub fn fit_envelope(series: &[(f64, f64)], envelope: impl Fn(f64) -> f64) -> Result<EnvelopeFit> {
    if series.len() < 2 {
        return Err(Error::DegenerateWindow {
            got: series.len(),
            need: 2,
        });
    }
    let mut logs = Vec::with_capacity(series.len());
    for &(t, y) in series {
        let e = envelope(t);
        if !(y > 0.0) || !(e > 0.0) {
            return Err(Error::InvalidArgument(format!("nonpositive value at t = {t}")));
        }
        logs.push(y.ln() - e.ln());
    }
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let rms = (logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / logs.len() as f64).sqrt();
    Ok(EnvelopeFit {
        constant: mean.exp(),
        rms_log_misfit: rms,
        samples: logs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuhamelSample {
    pub time: f64,
    /// Energy in `S(t)`.
    pub lhs: f64,
    /// `(1+t)^{-2κ}`.
    pub envelope: f64,
    /// `g⁴(t) (∫_0^t ‖(u,b)‖² dτ)²`.
    pub memory: f64,
    /// `lhs / (envelope + memory)` before the fitted constant.
    pub raw_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    pub samples: Vec<DuhamelSample>,
    /// Geometric mean of the positive raw ratios.
    pub constant: f64,
    /// `max raw_ratio / constant`.
    pub max_ratio: f64,
    pub excluded_saturated: usize,
}

/// Compares shell energy with the two-term low-frequency bound. The shell
/// (and its `C1`) is the one the records were sampled with; saturated shells
/// are excluded.
pub fn duhamel_lowfreq_bound(records: &[DiagnosticsRecord], eps: f64) -> DuhamelReport {
    let kappa = eps.min(0.5);
    let mut integral = 0.0;
    let mut samples = Vec::new();
    let mut excluded = 0;
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            let p = &records[i - 1];
            integral += 0.5 * (r.time - p.time) * (r.energy() + p.energy());
        }
        if r.low_freq_modes == 0 {
            excluded += 1;
            continue;
        }
        let envelope = (1.0 + r.time).powf(-2.0 * kappa);
        let memory = r.g_value.powi(4) * integral * integral;
        samples.push(DuhamelSample {
            time: r.time,
            lhs: r.low_freq_energy,
            envelope,
            memory,
            raw_ratio: r.low_freq_energy / (envelope + memory),
        });
    }
    let positive: Vec<f64> = samples.iter().map(|s| s.raw_ratio).filter(|&r| r > 0.0).collect();
    let constant = if positive.is_empty() {
        1.0
    } else {
        (positive.iter().map(|r| r.ln()).sum::<f64>() / positive.len() as f64).exp()
    };
    let max_ratio = samples.iter().map(|s| s.raw_ratio / constant).fold(0.0, f64::max);
    DuhamelReport {
        samples,
        constant,
        max_ratio,
        excluded_saturated: excluded,
    }
}
