//! Periodic box geometry, wavenumber layout and FFT plans.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Square periodic box `[0, L)^2` sampled with `n` points per axis.
///
/// Arrays on the grid are row-major with the `x1` index first: entry
/// `i1 * n + i2` holds the value at `(i1 h, i2 h)` in physical space and the
/// coefficient of wavenumber `(k(i1), k(i2))` in spectral space, where `k`
/// follows FFT ordering `0, 1, .., n/2-1, -n/2, .., -1`.
///
/// Cloning is cheap; all tables are shared.
#[derive(Clone)]
pub struct Grid<T: Real> {
    inner: Arc<GridInner<T>>,
}

struct GridInner<T: Real> {
    n: usize,
    length: T,
    ints: Vec<i64>,
    xi: Vec<T>,
    xi_odd: Vec<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    mollifiers: Mutex<HashMap<u64, Arc<Vec<T>>>>,
}

impl<T: Real> Grid<T> {
    pub fn new(n: usize, length: T) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 8"
            )));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("box length {length} must be positive")));
        }
        let half = (n / 2) as i64;
        let ints: Vec<i64> = (0..n as i64)
            .map(|i| if i < half { i } else { i - n as i64 })
            .collect();
        let kappa = T::TAU() / length;
        let xi: Vec<T> = ints.iter().map(|&k| T::lit(k as f64) * kappa).collect();
        let xi_odd: Vec<T> = ints
            .iter()
            .zip(&xi)
            .map(|(&k, &x)| if k == -half { T::zero() } else { x })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                length,
                ints,
                xi,
                xi_odd,
                forward,
                inverse,
                mollifiers: Mutex::new(HashMap::new()),
            }),
        })
    }

    /// `2π`-periodic box with `n` points.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, T::TAU())
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Number of grid points, `n^2`.
    pub fn len(&self) -> usize {
        self.inner.n * self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> T {
        self.inner.length
    }

    pub fn spacing(&self) -> T {
        self.inner.length / T::from_usize_lossy(self.inner.n)
    }

    /// Lowest nonzero wavenumber `2π/L`.
    pub fn kappa(&self) -> T {
        T::TAU() / self.inner.length
    }

    /// Box area `L^2`.
    pub fn area(&self) -> T {
        self.inner.length * self.inner.length
    }

    /// Signed integer wavenumber of an FFT index.
    pub fn k(&self, index: usize) -> i64 {
        self.inner.ints[index]
    }

    /// Physical wavenumber `2π k / L` of an FFT index.
    pub fn xi(&self, index: usize) -> T {
        self.inner.xi[index]
    }

    /// Wavenumber used by odd symbols: identical to [`Grid::xi`] except on
    /// the Nyquist index, where it is zero so conjugate symmetry survives.
    pub fn xi_odd(&self, index: usize) -> T {
        self.inner.xi_odd[index]
    }

    pub fn xi_axis(&self, axis: Axis, i1: usize, i2: usize) -> T {
        match axis {
            Axis::X1 => self.xi(i1),
            Axis::X2 => self.xi(i2),
        }
    }

    pub fn xi_odd_axis(&self, axis: Axis, i1: usize, i2: usize) -> T {
        match axis {
            Axis::X1 => self.xi_odd(i1),
            Axis::X2 => self.xi_odd(i2),
        }
    }

    /// Integer `|k|^2 = k1^2 + k2^2` of a flat index.
    pub fn k_squared(&self, idx: usize) -> i64 {
        let (i1, i2) = self.split(idx);
        let (a, b) = (self.k(i1), self.k(i2));
        a * a + b * b
    }

    /// `|ξ|^2` of a flat index.
    pub fn xi_squared(&self, idx: usize) -> T {
        let (i1, i2) = self.split(idx);
        let (a, b) = (self.xi(i1), self.xi(i2));
        a * a + b * b
    }

    pub fn split(&self, idx: usize) -> (usize, usize) {
        (idx / self.inner.n, idx % self.inner.n)
    }

    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i1 * self.inner.n + i2
    }

    /// Flat index of integer wavenumber `(k1, k2)`, if it is on the grid.
    pub fn index_of(&self, k1: i64, k2: i64) -> Option<usize> {
        let n = self.inner.n as i64;
        let half = n / 2;
        if k1 < -half || k1 >= half || k2 < -half || k2 >= half {
            return None;
        }
        let wrap = |k: i64| (if k < 0 { k + n } else { k }) as usize;
        Some(self.index(wrap(k1), wrap(k2)))
    }

    /// 2/3-rule membership: both `|k1|` and `|k2|` strictly below `n/3`.
    pub fn in_dealias(&self, idx: usize) -> bool {
        let (i1, i2) = self.split(idx);
        let n = self.inner.n as i64;
        3 * self.k(i1).abs() < n && 3 * self.k(i2).abs() < n
    }

    /// Physical coordinate of grid index `i` along either axis.
    pub fn coord(&self, i: usize) -> T {
        T::from_usize_lossy(i) * self.spacing()
    }

    pub fn same(&self, other: &Grid<T>) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n && self.inner.length == other.inner.length)
    }

    /// Unnormalized 2-D transform in place (`sign = -1` forward, `+1` inverse).
    pub(crate) fn fft2(&self, data: &mut [Complex<T>], inverse: bool) {
        let n = self.inner.n;
        debug_assert_eq!(data.len(), n * n);
        let plan = if inverse { &self.inner.inverse } else { &self.inner.forward };
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        // rows (x2 direction) are contiguous; columns go through a transpose
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
    }

    pub(crate) fn mollifier_cache(&self) -> &Mutex<HashMap<u64, Arc<Vec<T>>>> {
        &self.inner.mollifiers
    }
}

fn transpose_square<C: Copy>(data: &mut [C], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

impl<T: Real> PartialEq for Grid<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same(other)
    }
}

impl<T: Real> fmt::Debug for Grid<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}
