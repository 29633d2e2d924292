//! Seeded random scalar fields for the inequality checks.
//!
//! Every field lives on integer wavenumbers `0 < |k| <= kmax`, independent of
//! the grid, so the same entry sampled at two resolutions is the same
//! trigonometric polynomial.

use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{Grid, SpectralField};

pub const MIN_SAMPLES: usize = 100;

/// Decay exponents `r` of `|f̂(ξ)| ∝ (1+|ξ|²)^{-r/2}` cycled through the
/// smooth entries.
pub const DECAYS: [u32; 3] = [2, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub samples: usize,
    pub seed: u64,
    /// Largest integer wavenumber magnitude carried by a field.
    pub kmax: i64,
    pub length: f64,
    /// Every `spiky_every`-th entry is spiky; 0 disables the family.
    pub spiky_every: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            samples: 120,
            seed: 0,
            kmax: 12,
            length: 2.0 * PI,
            spiky_every: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family {
    Smooth { r: u32 },
    /// Smooth `r = 2` background plus one large cosine mode near `kmax`.
    Spiky,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub index: usize,
    pub seed: u64,
    pub family: Family,
}

impl CorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::InvalidArgument(format!(
                "corpus needs at least {MIN_SAMPLES} samples, got {}",
                self.samples
            )));
        }
        if self.kmax < 1 {
            return Err(Error::InvalidArgument("corpus kmax must be at least 1".into()));
        }
        if !(self.length > 0.0) || !self.length.is_finite() {
            return Err(Error::InvalidArgument(format!("box length {} must be positive", self.length)));
        }
        Ok(())
    }

    /// Grid on which products of two entries are still exact after the 2/3 mask.
    pub fn grid<T: Real>(&self, n: usize) -> Result<Grid<T>> {
        self.validate()?;
        if 6 * self.kmax as usize >= n {
            return Err(Error::InvalidGrid(format!(
                "n = {n} does not resolve products of kmax = {} fields",
                self.kmax
            )));
        }
        Grid::new(n, T::lit(self.length))
    }

    pub fn entry(&self, index: usize) -> Entry {
        let family = if self.spiky_every > 0 && index % self.spiky_every == self.spiky_every - 1 {
            Family::Spiky
        } else {
            Family::Smooth {
                r: DECAYS[index % DECAYS.len()],
            }
        };
        Entry {
            index,
            seed: self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64),
            family,
        }
    }

    /// The `count` fields of `entry`, each of unit box RMS.
    pub fn fields<T: Real>(&self, entry: &Entry, grid: &Grid<T>, count: usize) -> Vec<SpectralField<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(entry.seed);
        (0..count)
            .map(|_| match entry.family {
                Family::Smooth { r } => smooth(&mut rng, grid, self.kmax, r as f64),
                Family::Spiky => spiky(&mut rng, grid, self.kmax),
            })
            .collect()
    }
}

fn coefficients(rng: &mut ChaCha8Rng, kmax: i64, r: f64) -> Vec<((i64, i64), Complex<f64>)> {
    let mut out = Vec::new();
    for k1 in -kmax..=kmax {
        for k2 in 0..=kmax {
            let q = k1 * k1 + k2 * k2;
            if (k2 == 0 && k1 <= 0) || q > kmax * kmax {
                continue;
            }
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let w = (1.0 + q as f64).powf(-r / 2.0);
            out.push(((k1, k2), Complex::new(a, b) * w));
        }
    }
    out
}

fn assemble<T: Real>(grid: &Grid<T>, coeffs: &[((i64, i64), Complex<f64>)]) -> SpectralField<T> {
    let energy: f64 = 2.0 * coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>();
    let scale = 1.0 / energy.sqrt();
    let mut data = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for &((k1, k2), c) in coeffs {
        let c = c * scale;
        let c = Complex::new(T::lit(c.re), T::lit(c.im));
        data[grid.index_of(k1, k2).expect("resolved corpus")] = c;
        data[grid.index_of(-k1, -k2).expect("resolved corpus")] = c.conj();
    }
    SpectralField::from_coeffs(grid, data, true).expect("sized by construction")
}

fn smooth<T: Real>(rng: &mut ChaCha8Rng, grid: &Grid<T>, kmax: i64, r: f64) -> SpectralField<T> {
    assemble(grid, &coefficients(rng, kmax, r))
}

fn spiky<T: Real>(rng: &mut ChaCha8Rng, grid: &Grid<T>, kmax: i64) -> SpectralField<T> {
    let mut c = coefficients(rng, kmax, 2.0);
    let bg: f64 = c.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt();
    let (k1, k2) = loop {
        let k1 = rng.gen_range(-kmax..=kmax);
        let k2 = rng.gen_range(0..=kmax);
        let q = k1 * k1 + k2 * k2;
        if !(k2 == 0 && k1 <= 0) && 4 * q >= kmax * kmax && q <= kmax * kmax {
            break (k1, k2);
        }
    };
    let phase = rng.gen::<f64>() * 2.0 * PI;
    for (k, v) in c.iter_mut() {
        if *k == (k1, k2) {
            *v += Complex::from_polar(10.0 * bg, phase);
        }
    }
    assemble(grid, &c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{norm, NormKind};

    #[test]
    fn entries_are_deterministic_and_unit_rms() {
        let spec = CorpusSpec::default();
        let g = spec.grid::<f64>(128).unwrap();
        for i in [0, 5, 11] {
            let e = spec.entry(i);
            let a = spec.fields(&e, &g, 2);
            let b = spec.fields(&e, &g, 2);
            assert_eq!(a[1].coeffs(), b[1].coeffs());
            let rms = norm(&a[0], NormKind::L2).unwrap() / g.length();
            assert!((rms - 1.0).abs() < 1e-12);
            assert_eq!(a[0].mean().norm(), 0.0);
        }
        assert_eq!(spec.entry(5).family, Family::Spiky);
    }

    #[test]
    fn same_entry_on_two_grids_is_one_polynomial() {
        let spec = CorpusSpec::default();
        let (g1, g2) = (spec.grid::<f64>(128).unwrap(), spec.grid::<f64>(256).unwrap());
        let e = spec.entry(7);
        let a = spec.fields(&e, &g1, 1).remove(0).upsample(2).unwrap();
        let b = spec.fields(&e, &g2, 1).remove(0);
        assert!((&a - &b).max_coeff() < 1e-15);
    }

    #[test]
    fn rejects_small_or_unresolved() {
        let spec = CorpusSpec {
            samples: 10,
            ..CorpusSpec::default()
        };
        assert!(spec.grid::<f64>(128).is_err());
        assert!(CorpusSpec::default().grid::<f64>(64).is_err());
    }
}
