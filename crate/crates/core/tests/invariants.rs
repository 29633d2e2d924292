use mhd2d_core::diagnostics::low_freq_energy;
use mhd2d_core::ic::{generate, IcKind};
use mhd2d_core::solver::{Integrator, SolverOptions};
use mhd2d_core::spectral::{leray_project, mollify, mollify_vector, norm, NormKind};
use mhd2d_core::{Field64, Grid64, Vector64};
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Real field with Gaussian coefficients on `0 < |k| <= kmax`.
fn field(g: &Grid64, kmax: i64, seed: u64) -> Field64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    let mut f = Field64::zeros(g);
    for k1 in -kmax..=kmax {
        for k2 in 0..=kmax {
            if (k2 == 0 && k1 <= 0) || k1 * k1 + k2 * k2 > kmax * kmax {
                continue;
            }
            let c = Complex::new(rng.sample::<f64, _>(normal), rng.sample::<f64, _>(normal));
            let (i, j) = (g.index_of(k1, k2).unwrap(), g.index_of(-k1, -k2).unwrap());
            f.coeffs_mut()[i] = c;
            f.coeffs_mut()[j] = c.conj();
        }
    }
    f
}

fn vector(g: &Grid64, kmax: i64, seed: u64) -> Vector64 {
    Vector64::new(field(g, kmax, seed.wrapping_mul(2)), field(g, kmax, seed.wrapping_mul(2).wrapping_add(1))).unwrap()
}

fn l2(v: &Vector64) -> f64 {
    norm(v, NormKind::L2).unwrap()
}

#[test]
fn projection_is_idempotent_on_a_hundred_fields() {
    let g = Grid64::unit(32).unwrap();
    for seed in 0..100 {
        let v = vector(&g, 10, seed);
        let p = leray_project(&v);
        assert!(l2(&(&leray_project(&p) - &p)) < 1e-12 * l2(&v), "seed {seed}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_commutes_with_mollifier(seed in any::<u64>(), eps in 0.05f64..1.5) {
        let g = Grid64::unit(32).unwrap();
        let v = vector(&g, 10, seed);
        let a = leray_project(&mollify_vector(&v, eps).unwrap());
        let b = mollify_vector(&leray_project(&v), eps).unwrap();
        prop_assert!(l2(&(&a - &b)) <= 1e-12 * l2(&v));
    }

    #[test]
    fn projection_is_symmetric(seed in any::<u64>()) {
        let g = Grid64::unit(32).unwrap();
        let u = vector(&g, 10, seed);
        let v = vector(&g, 10, seed ^ 0x5555);
        let a = leray_project(&u).inner(&v);
        let b = u.inner(&leray_project(&v));
        prop_assert!((a - b).abs() <= 1e-12 * l2(&u) * l2(&v));
    }

    #[test]
    fn mollifier_does_not_raise_the_sup(seed in any::<u64>(), kmax in 2i64..20, eps in 0.05f64..1.5) {
        let g = Grid64::unit(64).unwrap();
        let f = field(&g, kmax, seed);
        let m = mollify(&f, eps).unwrap();
        let (a, b) = (norm(&m, NormKind::Linf).unwrap(), norm(&f, NormKind::Linf).unwrap());
        prop_assert!(a <= b * (1.0 + 1e-10), "{a} > {b}");
    }

    #[test]
    fn parseval(seed in any::<u64>(), kmax in 1i64..15, length in 1.0f64..40.0) {
        let g = Grid64::new(32, length).unwrap();
        let f = field(&g, kmax, seed);
        let spectral = norm(&f, NormKind::L2).unwrap();
        let h = g.spacing();
        let quad = (f.to_physical().iter().map(|x| x * x).sum::<f64>() * h * h).sqrt();
        prop_assert!((spectral - quad).abs() <= 1e-10 * spectral);
    }

    #[test]
    fn shell_energy_never_exceeds_total(seed in any::<u64>(), t in 0.0f64..50.0, c1 in 0.1f64..10.0) {
        let g = Grid64::new(32, 16.0).unwrap();
        let s = generate(&IcKind::decay_data(0.3, 0.1, seed), &g).unwrap();
        let shell = low_freq_energy(&s, t, c1).unwrap();
        prop_assert!(shell.energy <= s.energy() * (1.0 + 1e-14));
    }
}

#[test]
fn divergence_stays_below_tolerance_along_a_run() {
    let g = Grid64::unit(32).unwrap();
    let kind = IcKind::RandomSpectrum {
        alpha_low: 1.0,
        r_high: 3.0,
        amplitude: 0.8,
        seed: 4,
        k_cross: 3.0,
        presmooth: 0.0,
    };
    let s = generate(&kind, &g).unwrap();
    let opts = SolverOptions {
        dt: 5e-3,
        t_end: 1.0,
        ..SolverOptions::default()
    };
    let mut it = Integrator::new(&s, &opts).unwrap();
    while it.step_index() < opts.steps().unwrap() {
        it.step().unwrap();
        let st = it.state();
        assert!(st.u.relative_divergence() < 1e-10);
        assert!(st.b.relative_divergence() < 1e-10);
    }
}
