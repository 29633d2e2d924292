//! Scalar and vector fields stored as Fourier coefficients.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::grid::Grid;

/// One scalar field on a [`Grid`], held as coefficients of `e^{i ξ·x}`.
///
/// Normalization: `f(x) = Σ_k c_k e^{i ξ_k·x}`, so `c_0` is the box mean and
/// `‖f‖²_{L²} = L² Σ |c_k|²`.
#[derive(Clone, Debug)]
pub struct SpectralField<T: Real> {
    grid: Grid<T>,
    coeffs: Vec<Complex<T>>,
    real: bool,
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex::zero(); grid.len()],
            real: true,
        }
    }

    pub fn from_coeffs(grid: &Grid<T>, coeffs: Vec<Complex<T>>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
            real,
        })
    }

    /// Forward transform of real samples laid out as described on [`Grid`].
    pub fn from_physical(grid: &Grid<T>, values: &[T]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut data: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        forward_in_place(grid, &mut data);
        Ok(Self {
            grid: grid.clone(),
            coeffs: data,
            real: true,
        })
    }

    /// Samples `f(x1, x2)` on the grid and transforms.
    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T, T) -> T) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            let x1 = grid.coord(i1);
            for i2 in 0..n {
                values.push(f(x1, grid.coord(i2)));
            }
        }
        Self::from_physical(grid, &values).expect("sized by construction")
    }

    /// Real part of the inverse transform.
    pub fn to_physical(&self) -> Vec<T> {
        self.to_physical_complex().into_iter().map(|c| c.re).collect()
    }

    pub fn to_physical_complex(&self) -> Vec<Complex<T>> {
        let mut data = self.coeffs.clone();
        self.grid.fft2(&mut data, true);
        data
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Whether the field is declared real (conjugate-symmetric coefficients).
    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn mean(&self) -> Complex<T> {
        self.coeffs[0]
    }

    /// Coefficient at integer wavenumber `(k1, k2)`, zero when off-grid.
    pub fn coeff_at(&self, k1: i64, k2: i64) -> Complex<T> {
        self.grid
            .index_of(k1, k2)
            .map(|i| self.coeffs[i])
            .unwrap_or_else(Complex::zero)
    }

    pub fn max_coeff(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Largest `|c(-k) - conj c(k)|` relative to the largest coefficient.
    pub fn conjugate_symmetry_defect(&self) -> T {
        let n = self.grid.n();
        let scale = self.max_coeff();
        if scale == T::zero() {
            return T::zero();
        }
        let mut worst = T::zero();
        for i1 in 0..n {
            for i2 in 0..n {
                let j1 = (n - i1) % n;
                let j2 = (n - i2) % n;
                let a = self.coeffs[i1 * n + i2];
                let b = self.coeffs[j1 * n + j2].conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst / scale
    }

    /// Applies a per-mode multiplier `m(idx)`; `keeps_real` states whether the
    /// multiplier preserves conjugate symmetry.
    pub fn map_modes(&self, keeps_real: bool, m: impl Fn(usize, Complex<T>) -> Complex<T>) -> Self {
        let coeffs = self.coeffs.iter().enumerate().map(|(i, &c)| m(i, c)).collect();
        Self {
            grid: self.grid.clone(),
            coeffs,
            real: self.real && keeps_real,
        }
    }

    pub fn scale(&self, a: T) -> Self {
        self.map_modes(true, |_, c| c * a)
    }

    /// Zeroes every mode outside the 2/3-rule mask.
    pub fn dealias(&self) -> Self {
        let g = self.grid.clone();
        self.map_modes(true, |i, c| if g.in_dealias(i) { c } else { Complex::zero() })
    }

    pub fn dealias_in_place(&mut self) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if !self.grid.in_dealias(i) {
                *c = Complex::zero();
            }
        }
    }

    /// Fraction of `Σ|c|²` held by modes outside the 2/3 mask.
    pub fn top_third_fraction(&self) -> T {
        let mut total = T::zero();
        let mut top = T::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            let e = c.norm_sqr();
            total = total + e;
            if !self.grid.in_dealias(i) {
                top = top + e;
            }
        }
        if total == T::zero() {
            T::zero()
        } else {
            top / total
        }
    }

    /// `Σ |c_k|²` without the area factor.
    pub fn coeff_energy(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Real `L²` inner product `∫ f g dx` (real part for complex fields).
    pub fn inner(&self, other: &Self) -> T {
        assert!(self.grid.same(&other.grid), "grid mismatch");
        let s: T = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        s * self.grid.area()
    }

    /// Pointwise product evaluated in physical space.
    pub fn product(&self, other: &Self) -> Self {
        assert!(self.grid.same(&other.grid), "grid mismatch");
        let a = self.to_physical_complex();
        let b = other.to_physical_complex();
        let mut data: Vec<Complex<T>> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let real = self.real && other.real;
        if real {
            for c in data.iter_mut() {
                c.im = T::zero();
            }
        }
        forward_in_place(&self.grid, &mut data);
        Self {
            grid: self.grid.clone(),
            coeffs: data,
            real,
        }
    }

    /// Trigonometric interpolation onto a grid `factor` times finer
    /// (Nyquist modes are dropped).
    pub fn upsample(&self, factor: usize) -> Result<Self> {
        let fine = Grid::new(self.grid.n() * factor, self.grid.length())?;
        let mut out = Self::zeros(&fine);
        out.real = self.real;
        let half = (self.grid.n() / 2) as i64;
        for (idx, &c) in self.coeffs.iter().enumerate() {
            let (i1, i2) = self.grid.split(idx);
            let (k1, k2) = (self.grid.k(i1), self.grid.k(i2));
            if k1 == -half || k2 == -half {
                continue;
            }
            let j = fine.index_of(k1, k2).expect("finer grid holds every mode");
            out.coeffs[j] = c;
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Inverse transforms of two real fields with one complex FFT (`f + i g`).
pub(crate) fn pair_to_physical<T: Real>(grid: &Grid<T>, a: &[Complex<T>], b: &[Complex<T>]) -> (Vec<T>, Vec<T>) {
    let i = Complex::new(T::zero(), T::one());
    let mut data: Vec<Complex<T>> = a.iter().zip(b).map(|(x, y)| x + i * y).collect();
    grid.fft2(&mut data, true);
    data.into_iter().map(|c| (c.re, c.im)).unzip()
}

/// Forward transforms of two real sample arrays with one complex FFT, split
/// through `F(k) = (X(k) + conj X(-k))/2`, `G(k) = (X(k) - conj X(-k))/(2i)`.
pub(crate) fn pair_from_physical<T: Real>(grid: &Grid<T>, f: &[T], g: &[T]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let n = grid.n();
    let mut data: Vec<Complex<T>> = f.iter().zip(g).map(|(&x, &y)| Complex::new(x, y)).collect();
    forward_in_place(grid, &mut data);
    let half = T::lit(0.5);
    let mut fa = Vec::with_capacity(data.len());
    let mut ga = Vec::with_capacity(data.len());
    for i1 in 0..n {
        let j1 = (n - i1) % n;
        for i2 in 0..n {
            let x = data[i1 * n + i2];
            let y = data[j1 * n + (n - i2) % n].conj();
            fa.push((x + y) * half);
            let d = (x - y) * half;
            ga.push(Complex::new(d.im, -d.re));
        }
    }
    (fa, ga)
}

pub(crate) fn forward_in_place<T: Real>(grid: &Grid<T>, data: &mut [Complex<T>]) {
    grid.fft2(data, false);
    let inv = T::one() / T::from_usize_lossy(grid.len());
    for c in data.iter_mut() {
        *c = *c * inv;
    }
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Real> AddAssign<&SpectralField<T>> for SpectralField<T> {
    fn add_assign(&mut self, rhs: &SpectralField<T>) {
        assert!(self.grid.same(&rhs.grid), "grid mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a = *a + b;
        }
        self.real = self.real && rhs.real;
    }
}

impl<T: Real> SubAssign<&SpectralField<T>> for SpectralField<T> {
    fn sub_assign(&mut self, rhs: &SpectralField<T>) {
        assert!(self.grid.same(&rhs.grid), "grid mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a = *a - b;
        }
        self.real = self.real && rhs.real;
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, rhs: T) -> SpectralField<T> {
        self.scale(rhs)
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn neg(self) -> SpectralField<T> {
        self.scale(-T::one())
    }
}

/// Two-component field; both components share one grid.
#[derive(Clone, Debug)]
pub struct VectorField<T: Real> {
    pub c1: SpectralField<T>,
    pub c2: SpectralField<T>,
}

impl<T: Real> VectorField<T> {
    pub fn new(c1: SpectralField<T>, c2: SpectralField<T>) -> Result<Self> {
        if !c1.grid().same(c2.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self { c1, c2 })
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self {
            c1: SpectralField::zeros(grid),
            c2: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.c1.grid()
    }

    pub fn components(&self) -> [&SpectralField<T>; 2] {
        [&self.c1, &self.c2]
    }

    pub fn map(&self, f: impl Fn(&SpectralField<T>) -> SpectralField<T>) -> Self {
        Self {
            c1: f(&self.c1),
            c2: f(&self.c2),
        }
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|c| c.scale(a))
    }

    pub fn dealias(&self) -> Self {
        self.map(SpectralField::dealias)
    }

    /// `∫ v·w dx`.
    pub fn inner(&self, other: &Self) -> T {
        self.c1.inner(&other.c1) + self.c2.inner(&other.c2)
    }

    /// Spectral divergence `i ξ·v̂`, using odd-symbol wavenumbers.
    pub fn divergence(&self) -> SpectralField<T> {
        let g = self.grid().clone();
        let n = g.n();
        let coeffs = (0..g.len())
            .map(|idx| {
                let (i1, i2) = (idx / n, idx % n);
                let s = self.c1.coeffs()[idx] * g.xi_odd(i1) + self.c2.coeffs()[idx] * g.xi_odd(i2);
                Complex::new(-s.im, s.re)
            })
            .collect();
        SpectralField::from_coeffs(&g, coeffs, self.c1.is_real() && self.c2.is_real())
            .expect("sized by construction")
    }

    /// Largest spectral divergence magnitude relative to the largest coefficient.
    pub fn relative_divergence(&self) -> T {
        let scale = self.c1.max_coeff().max(self.c2.max_coeff());
        if scale == T::zero() {
            return T::zero();
        }
        self.divergence().max_coeff() / scale
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }
}

impl<T: Real> Add for &VectorField<T> {
    type Output = VectorField<T>;
    fn add(self, rhs: Self) -> VectorField<T> {
        VectorField {
            c1: &self.c1 + &rhs.c1,
            c2: &self.c2 + &rhs.c2,
        }
    }
}

impl<T: Real> Sub for &VectorField<T> {
    type Output = VectorField<T>;
    fn sub(self, rhs: Self) -> VectorField<T> {
        VectorField {
            c1: &self.c1 - &rhs.c1,
            c2: &self.c2 - &rhs.c2,
        }
    }
}
