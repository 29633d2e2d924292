use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;

use super::{cfl_limit, Mode, Scheme, SolverOptions};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::field::{pair_from_physical, pair_to_physical};
use crate::spectral::{mollifier_symbol, Grid, MHDState, SpectralField, VectorField};

type Buf<T> = Vec<Complex<T>>;
/// `[z+_1, z+_2, z-_1, z-_2]`.
type Els<T> = [Buf<T>; 4];

/// Everything a run needs to continue bit-exactly. The fields are kept in
/// the integrator's own variables `z± = u ± b`; converting to `(u, b)` and
/// back is not exact in floating point.
#[derive(Clone, Debug)]
pub struct Checkpoint<T: Real> {
    pub zplus: VectorField<T>,
    pub zminus: VectorField<T>,
    /// Time of the state the run started from.
    pub t0: f64,
    pub step_index: u64,
    pub dt: f64,
    pub cumulative_dissipation: f64,
    pub initial_energy: f64,
}

struct Linear<T: Real> {
    /// `e^{L± h}` and `e^{L± h/2}`.
    full: [Buf<T>; 2],
    half: [Buf<T>; 2],
    /// `-Re L`, the per-mode dissipation rate.
    damping: Vec<T>,
    mollifier: Option<Arc<Vec<T>>>,
    mask: Vec<bool>,
    /// Nyquist-zeroed wavenumbers per flat index.
    xo: Vec<(T, T)>,
}

impl<T: Real> Linear<T> {
    fn new(grid: &Grid<T>, opts: &SolverOptions) -> Result<Self> {
        let mollifier = match opts.mode {
            Mode::Exact => None,
            Mode::Regularized { eps } => Some(mollifier_symbol(grid, T::lit(eps))?),
        };
        let n = grid.n();
        let h = T::lit(opts.dt);
        let half_h = T::lit(opts.dt / 2.0);
        let len = grid.len();
        let mut full = [Vec::with_capacity(len), Vec::with_capacity(len)];
        let mut half = [Vec::with_capacity(len), Vec::with_capacity(len)];
        let mut damping = Vec::with_capacity(len);
        let mut xo = Vec::with_capacity(len);
        for idx in 0..len {
            let r = mollifier.as_ref().map(|m| m[idx]).unwrap_or_else(T::one);
            let re = -r * grid.xi_squared(idx);
            let im = r * grid.xi_odd(idx / n);
            for (k, sign) in [T::one(), -T::one()].into_iter().enumerate() {
                full[k].push(Complex::new(re * h, sign * im * h).exp());
                half[k].push(Complex::new(re * half_h, sign * im * half_h).exp());
            }
            damping.push(-re);
            xo.push((grid.xi_odd(idx / n), grid.xi_odd(idx % n)));
        }
        let mask = (0..len).map(|i| !opts.dealias || grid.in_dealias(i)).collect();
        Ok(Self {
            full,
            half,
            damping,
            mollifier,
            mask,
            xo,
        })
    }

    /// `z ← e^{L h} z` (or the half step).
    fn apply(&self, z: &mut Els<T>, half: bool) {
        let e = if half { &self.half } else { &self.full };
        for (c, comp) in z.iter_mut().enumerate() {
            let f = &e[c / 2];
            for (a, m) in comp.iter_mut().zip(f) {
                *a = *a * m;
            }
        }
    }
}

pub struct Integrator<T: Real> {
    grid: Grid<T>,
    opts: SolverOptions,
    lin: Linear<T>,
    z: Els<T>,
    t0: f64,
    step_index: u64,
    cumulative_dissipation: f64,
    initial_energy: f64,
}

fn zero_buf<T: Real>(len: usize) -> Buf<T> {
    vec![Complex::zero(); len]
}

/// `a + s b` componentwise.
fn axpy<T: Real>(a: &Els<T>, s: T, b: &Els<T>) -> Els<T> {
    std::array::from_fn(|c| a[c].iter().zip(&b[c]).map(|(x, y)| x + y * s).collect())
}

fn logarithmic_mean(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 && (a - b).abs() > 1e-6 * a.max(b) {
        (b - a) / (b / a).ln()
    } else {
        0.5 * (a + b)
    }
}

impl<T: Real> Checkpoint<T> {
    pub fn state(&self) -> MHDState<T> {
        let z = [
            self.zplus.c1.coeffs().to_vec(),
            self.zplus.c2.coeffs().to_vec(),
            self.zminus.c1.coeffs().to_vec(),
            self.zminus.c2.coeffs().to_vec(),
        ];
        let (u, b) = from_elsasser(self.zplus.grid(), &z);
        MHDState {
            u,
            b,
            time: T::lit(self.t0 + self.step_index as f64 * self.dt),
        }
    }
}

impl<T: Real> Integrator<T> {
    pub fn new(state: &MHDState<T>, opts: &SolverOptions) -> Result<Self> {
        opts.validate()?;
        let grid = state.grid().clone();
        let lin = Linear::new(&grid, opts)?;
        let mut state = state.clone();
        if opts.dealias {
            state.u = state.u.dealias();
            state.b = state.b.dealias();
        }
        let initial_energy = state.energy().to_f64_lossy();
        let t0 = state.time.to_f64_lossy();
        Ok(Self {
            z: to_elsasser(&state),
            grid,
            opts: *opts,
            lin,
            t0,
            step_index: 0,
            cumulative_dissipation: 0.0,
            initial_energy,
        })
    }

    pub fn resume(cp: &Checkpoint<T>, opts: &SolverOptions) -> Result<Self> {
        if cp.dt.to_bits() != opts.dt.to_bits() {
            return Err(Error::InvalidArgument(format!(
                "checkpoint was written with dt = {}, options ask for {}",
                cp.dt, opts.dt
            )));
        }
        opts.validate()?;
        let grid = cp.zplus.grid().clone();
        if !grid.same(cp.zminus.grid()) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            lin: Linear::new(&grid, opts)?,
            z: [
                cp.zplus.c1.coeffs().to_vec(),
                cp.zplus.c2.coeffs().to_vec(),
                cp.zminus.c1.coeffs().to_vec(),
                cp.zminus.c2.coeffs().to_vec(),
            ],
            grid,
            opts: *opts,
            t0: cp.t0,
            step_index: cp.step_index,
            cumulative_dissipation: cp.cumulative_dissipation,
            initial_energy: cp.initial_energy,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint<T> {
        let field = |c: &Buf<T>| SpectralField::from_coeffs(&self.grid, c.clone(), true).expect("sized by construction");
        Checkpoint {
            zplus: VectorField {
                c1: field(&self.z[0]),
                c2: field(&self.z[1]),
            },
            zminus: VectorField {
                c1: field(&self.z[2]),
                c2: field(&self.z[3]),
            },
            t0: self.t0,
            step_index: self.step_index,
            dt: self.opts.dt,
            cumulative_dissipation: self.cumulative_dissipation,
            initial_energy: self.initial_energy,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn options(&self) -> &SolverOptions {
        &self.opts
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    /// `t0 + step_index · dt`; never accumulated, so restarts agree bit for bit.
    pub fn time(&self) -> f64 {
        self.t0 + self.step_index as f64 * self.opts.dt
    }

    pub fn cumulative_dissipation(&self) -> f64 {
        self.cumulative_dissipation
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    pub fn state(&self) -> MHDState<T> {
        let (u, b) = from_elsasser(&self.grid, &self.z);
        MHDState {
            u,
            b,
            time: T::lit(self.time()),
        }
    }

    /// `‖u‖∞ + ‖b‖∞` of the current state.
    pub fn max_speed(&self) -> f64 {
        let (p1, p2) = pair_to_physical(&self.grid, &self.z[0], &self.z[1]);
        let (m1, m2) = pair_to_physical(&self.grid, &self.z[2], &self.z[3]);
        speed(&p1, &p2, &m1, &m2)
    }

    /// Full right-hand side `(∂t u, ∂t b)` at the current state.
    pub fn time_derivative(&self) -> Result<(VectorField<T>, VectorField<T>)> {
        let (mut dz, _) = self.nonlinear(&self.z, false);
        for c in 0..4 {
            let sign = if c < 2 { T::one() } else { -T::one() };
            for (idx, d) in dz[c].iter_mut().enumerate() {
                let re = -self.lin.damping[idx];
                let r = self.lin.mollifier.as_ref().map(|m| m[idx]).unwrap_or_else(T::one);
                let im = sign * r * self.lin.xo[idx].0;
                *d = *d + self.z[c][idx] * Complex::new(re, im);
            }
        }
        Ok(from_elsasser(&self.grid, &dz))
    }

    /// Quadratic terms of the `z±` equations. Also returns `‖u‖∞ + ‖b‖∞` of
    /// `z` when asked and the products are taken of `z` itself.
    fn nonlinear(&self, z: &Els<T>, want_speed: bool) -> (Els<T>, Option<f64>) {
        let len = self.grid.len();
        if !self.opts.nonlinear {
            let zero: Els<T> = std::array::from_fn(|_| zero_buf(len));
            return (zero, None);
        }
        let mollified: Option<Els<T>> = self.lin.mollifier.as_ref().map(|m| {
            std::array::from_fn(|c| z[c].iter().zip(m.iter()).map(|(a, &r)| a * r).collect())
        });
        let zt = mollified.as_ref().unwrap_or(z);
        let g = &self.grid;
        let (p1, p2) = pair_to_physical(g, &zt[0], &zt[1]);
        let (m1, m2) = pair_to_physical(g, &zt[2], &zt[3]);
        let sp = if want_speed && mollified.is_none() {
            Some(speed(&p1, &p2, &m1, &m2))
        } else {
            None
        };
        // P_ij = z-_j z+_i
        let mul = |a: &[T], b: &[T]| -> Vec<T> { a.iter().zip(b).map(|(x, y)| *x * *y).collect() };
        let (q11, q12) = pair_from_physical(g, &mul(&p1, &m1), &mul(&p1, &m2));
        let (q21, q22) = pair_from_physical(g, &mul(&p2, &m1), &mul(&p2, &m2));
        drop((p1, p2, m1, m2));
        let mut out: Els<T> = std::array::from_fn(|_| zero_buf(len));
        let half = T::lit(0.5);
        let iu = |c: Complex<T>| Complex::new(-c.im, c.re);
        for idx in 0..len {
            if !self.lin.mask[idx] {
                continue;
            }
            let (x1, x2) = self.lin.xo[idx];
            let q = x1 * x1 + x2 * x2;
            // A = z-·∇z+ = ∂j P_ij,  B = z+·∇z- = ∂j P_ji
            let a1 = iu(q11[idx] * x1 + q12[idx] * x2);
            let a2 = iu(q21[idx] * x1 + q22[idx] * x2);
            let b1 = iu(q11[idx] * x1 + q21[idx] * x2);
            let b2 = iu(q12[idx] * x1 + q22[idx] * x2);
            let proj = |v1: Complex<T>, v2: Complex<T>| -> (Complex<T>, Complex<T>) {
                if q == T::zero() {
                    return (v1, v2);
                }
                let d = (v1 * x1 + v2 * x2) / q;
                (v1 - d * x1, v2 - d * x2)
            };
            match &self.lin.mollifier {
                None => {
                    let (s1, s2) = proj(a1 + b1, a2 + b2);
                    let (u1, u2) = (-s1 * half, -s2 * half);
                    let (w1, w2) = ((b1 - a1) * half, (b2 - a2) * half);
                    out[0][idx] = u1 + w1;
                    out[1][idx] = u2 + w2;
                    out[2][idx] = u1 - w1;
                    out[3][idx] = u2 - w2;
                }
                Some(m) => {
                    let r = m[idx];
                    let (pa1, pa2) = proj(a1, a2);
                    let (pb1, pb2) = proj(b1, b2);
                    out[0][idx] = -pa1 * r;
                    out[1][idx] = -pa2 * r;
                    out[2][idx] = -pb1 * r;
                    out[3][idx] = -pb2 * r;
                }
            }
        }
        (out, sp)
    }

    fn project(&self, z: &mut Els<T>) {
        for (idx, &(x1, x2)) in self.lin.xo.iter().enumerate() {
            let q = x1 * x1 + x2 * x2;
            if q == T::zero() {
                continue;
            }
            for k in [0, 2] {
                let d = (z[k][idx] * x1 + z[k + 1][idx] * x2) / q;
                z[k][idx] = z[k][idx] - d * x1;
                z[k + 1][idx] = z[k + 1][idx] - d * x2;
            }
        }
    }

    /// One step of the configured scheme. On error the state is unchanged.
    pub fn step(&mut self) -> Result<()> {
        let h = T::lit(self.opts.dt);
        let (k1, sp) = self.nonlinear(&self.z, true);
        let speed = match sp {
            Some(s) => s,
            None => self.max_speed(),
        };
        let admissible = cfl_limit(self.grid.spacing().to_f64_lossy(), speed);
        if self.opts.dt > admissible {
            return Err(Error::Cfl {
                dt: self.opts.dt,
                admissible,
            });
        }
        let next = match self.opts.scheme {
            Scheme::IfRk2 => {
                // a = E(z + h k1); z' = E(z + h/2 k1) + h/2 N(a)
                let mut a = axpy(&self.z, h, &k1);
                self.lin.apply(&mut a, false);
                self.project(&mut a);
                let (k2, _) = self.nonlinear(&a, false);
                let hh = h * T::lit(0.5);
                let mut z = axpy(&self.z, hh, &k1);
                self.lin.apply(&mut z, false);
                let mut z = axpy(&z, hh, &k2);
                self.project(&mut z);
                z
            }
            Scheme::IfRk4 => {
                let hh = h * T::lit(0.5);
                let mut a = axpy(&self.z, hh, &k1);
                self.lin.apply(&mut a, true);
                self.project(&mut a);
                let (k2, _) = self.nonlinear(&a, false);
                let mut ez_half = self.z.clone();
                self.lin.apply(&mut ez_half, true);
                let mut b = axpy(&ez_half, hh, &k2);
                self.project(&mut b);
                let (k3, _) = self.nonlinear(&b, false);
                let mut c = axpy(&ez_half, h, &k3);
                self.lin.apply(&mut c, true);
                self.project(&mut c);
                let (k4, _) = self.nonlinear(&c, false);
                // z' = E(z + h/6 k1) + h/3 E_half(k2 + k3) + h/6 k4
                let sixth = h / T::lit(6.0);
                let mut z = axpy(&self.z, sixth, &k1);
                self.lin.apply(&mut z, false);
                let mut mid = axpy(&k2, T::one(), &k3);
                self.lin.apply(&mut mid, true);
                let z = axpy(&z, h / T::lit(3.0), &mid);
                let mut z = axpy(&z, sixth, &k4);
                self.project(&mut z);
                z
            }
        };
        let time = self.t0 + (self.step_index + 1) as f64 * self.opts.dt;
        if next.iter().any(|c| c.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())) {
            return Err(Error::NonFinite { time });
        }
        self.cumulative_dissipation += self.dissipation_increment(&next);
        self.z = next;
        self.step_index += 1;
        Ok(())
    }

    /// `∫ (‖∇u‖² + ‖∇b‖²) dt` over one step, per mode with the logarithmic
    /// mean of the endpoint energies (exact under pure exponential damping).
    fn dissipation_increment(&self, next: &Els<T>) -> f64 {
        let mut sum = 0.0;
        for idx in 0..self.grid.len() {
            let w = self.lin.damping[idx].to_f64_lossy();
            if w == 0.0 {
                continue;
            }
            let ea: f64 = self.z.iter().map(|c| c[idx].norm_sqr().to_f64_lossy()).sum();
            let eb: f64 = next.iter().map(|c| c[idx].norm_sqr().to_f64_lossy()).sum();
            sum += w * logarithmic_mean(ea, eb);
        }
        0.5 * self.grid.area().to_f64_lossy() * sum * self.opts.dt
    }
}

fn to_elsasser<T: Real>(s: &MHDState<T>) -> Els<T> {
    let plus = |a: &SpectralField<T>, b: &SpectralField<T>, sign: T| -> Buf<T> {
        a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x + y * sign).collect()
    };
    [
        plus(&s.u.c1, &s.b.c1, T::one()),
        plus(&s.u.c2, &s.b.c2, T::one()),
        plus(&s.u.c1, &s.b.c1, -T::one()),
        plus(&s.u.c2, &s.b.c2, -T::one()),
    ]
}

/// `u = (z+ + z-)/2`, `b = (z+ - z-)/2`.
fn from_elsasser<T: Real>(g: &Grid<T>, z: &Els<T>) -> (VectorField<T>, VectorField<T>) {
    let half = T::lit(0.5);
    let comb = |a: &Buf<T>, b: &Buf<T>, s: T| -> SpectralField<T> {
        let c = a.iter().zip(b).map(|(x, y)| (x + y * s) * half).collect();
        SpectralField::from_coeffs(g, c, true).expect("sized by construction")
    };
    (
        VectorField {
            c1: comb(&z[0], &z[2], T::one()),
            c2: comb(&z[1], &z[3], T::one()),
        },
        VectorField {
            c1: comb(&z[0], &z[2], -T::one()),
            c2: comb(&z[1], &z[3], -T::one()),
        },
    )
}

fn speed<T: Real>(p1: &[T], p2: &[T], m1: &[T], m2: &[T]) -> f64 {
    let half = T::lit(0.5);
    let mut umax = T::zero();
    let mut bmax = T::zero();
    for i in 0..p1.len() {
        let (u1, u2) = ((p1[i] + m1[i]) * half, (p2[i] + m2[i]) * half);
        let (b1, b2) = ((p1[i] - m1[i]) * half, (p2[i] - m2[i]) * half);
        umax = umax.max((u1 * u1 + u2 * u2).sqrt());
        bmax = bmax.max((b1 * b1 + b2 * b2).sqrt());
    }
    (umax + bmax).to_f64_lossy()
}
