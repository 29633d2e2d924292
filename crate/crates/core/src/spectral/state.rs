use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::field::VectorField;
use crate::spectral::grid::Grid;
use crate::spectral::ops::{norm, NormKind};

/// Velocity and magnetic perturbation `(u, b)` at time `t`; the total
/// magnetic field is `e1 + b`.
#[derive(Clone, Debug)]
pub struct MHDState<T: Real> {
    pub u: VectorField<T>,
    pub b: VectorField<T>,
    pub time: T,
}

/// Tolerance on spectral divergence relative to the largest coefficient.
pub const DIVERGENCE_TOL: f64 = 1e-10;

impl<T: Real> MHDState<T> {
    /// Builds a state and checks that both fields are solenoidal with zero mean.
    pub fn new(u: VectorField<T>, b: VectorField<T>, time: T) -> Result<Self> {
        let s = Self::unchecked(u, b, time)?;
        s.validate()?;
        Ok(s)
    }

    pub(crate) fn unchecked(u: VectorField<T>, b: VectorField<T>, time: T) -> Result<Self> {
        if !u.grid().same(b.grid()) {
            return Err(Error::GridMismatch);
        }
        if !(time >= T::zero()) {
            return Err(Error::InvalidArgument(format!("time {time} must be nonnegative")));
        }
        Ok(Self { u, b, time })
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            u: VectorField::zeros(grid),
            b: VectorField::zeros(grid),
            time: T::zero(),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.u.grid()
    }

    pub fn validate(&self) -> Result<()> {
        let tol = T::rel_tol(DIVERGENCE_TOL);
        for (name, v) in [("u", &self.u), ("b", &self.b)] {
            let d = v.relative_divergence();
            if d > tol {
                return Err(Error::InvalidArgument(format!(
                    "{name} is not divergence-free (relative divergence {:e})", d.to_f64_lossy()
                )));
            }
            let scale = v.c1.max_coeff().max(v.c2.max_coeff());
            let mean = v.c1.mean().norm().max(v.c2.mean().norm());
            if mean > tol * scale {
                return Err(Error::NonZeroMean { mean: mean.to_f64_lossy() });
            }
        }
        Ok(())
    }

    /// `E = ‖u‖² + ‖b‖²`.
    pub fn energy(&self) -> T {
        self.u.inner(&self.u) + self.b.inner(&self.b)
    }

    /// `‖(u, b)‖` in the requested norm.
    pub fn norm(&self, kind: NormKind) -> Result<T> {
        norm(&(&self.u, &self.b), kind)
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.b.is_finite() && self.time.is_finite()
    }

    pub fn scale(&self, a: T) -> Self {
        Self {
            u: self.u.scale(a),
            b: self.b.scale(a),
            time: self.time,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::SpectralField;

    #[test]
    fn rejects_compressible_or_biased_fields() {
        let g = Grid::<f64>::unit(16).unwrap();
        let grad = VectorField::new(
            SpectralField::from_fn(&g, |x, _| x.cos()),
            SpectralField::zeros(&g),
        )
        .unwrap();
        assert!(MHDState::new(grad, VectorField::zeros(&g), 0.0).is_err());
        let biased = VectorField::new(
            SpectralField::from_fn(&g, |_, y| 1.0 + y.sin()),
            SpectralField::zeros(&g),
        )
        .unwrap();
        assert!(MHDState::new(biased, VectorField::zeros(&g), 0.0).is_err());
        let shear = VectorField::new(SpectralField::from_fn(&g, |_, y| y.sin()), SpectralField::zeros(&g)).unwrap();
        let s = MHDState::new(shear, VectorField::zeros(&g), 0.0).unwrap();
        assert!((s.energy() - 2.0 * std::f64::consts::PI.powi(2)).abs() < 1e-12);
    }
}
