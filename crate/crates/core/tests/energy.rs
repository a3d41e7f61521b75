use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qglab::energy::constants::c3_exact;
use qglab::energy::*;
use qglab::random::{low_mode_field, rng, unit_clean_field};
use qglab::spectral::*;

fn grid(alpha: f64, n: usize) -> SpectralGrid {
    SpectralGrid::new(alpha, 1.5, n).unwrap()
}

/// Samples of `θ(y) = Σ θ̃_β e^{iβy}` and its derivative on `m` equispaced points.
fn physical(u: &SpectralField, m: usize) -> (Vec<f64>, Vec<C64>, Vec<C64>) {
    let g = u.grid();
    let ys: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    let mut th = Vec::with_capacity(m);
    let mut dth = Vec::with_capacity(m);
    for &y in &ys {
        let mut a = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for b in g.betas() {
            let e = C64::from_polar(1.0, b as f64 * y) * u.at(b);
            a += e;
            d += C64::new(0.0, b as f64) * e;
        }
        th.push(a);
        dth.push(d);
    }
    (ys, th, dth)
}

/// Trapezoid rule on the circle, exact for trigonometric polynomials of low enough degree.
fn quad(f: impl Iterator<Item = f64>, m: usize) -> f64 {
    2.0 * PI * f.sum::<f64>() / m as f64
}

#[test]
fn toy_functionals_by_physical_quadrature() {
    let g = grid(2.0, 16);
    let p = ModelParams::toy(0.01, g).unwrap();
    let m = 128;
    for seed in 0..5 {
        let u = unit_clean_field(g, &mut rng(seed));
        let s = eval_base(&u, &p).unwrap();
        let (ys, th, dth) = physical(&u, m);
        let e0 = quad(th.iter().map(|z| z.norm_sqr()), m);
        let e1 = quad(dth.iter().map(|z| z.norm_sqr()), m);
        // toy A is multiplication by sin y
        let ce2 = quad(ys.iter().zip(&th).map(|(y, z)| y.sin().powi(2) * z.norm_sqr()), m);
        let ce1 = -quad(ys.iter().zip(&th).zip(&dth).map(|((y, z), d)| (C64::i() * y.sin() * z * d.conj()).re), m);
        assert!((s.e0 - e0).abs() < 1e-12 * e0);
        assert!((s.e1 - e1).abs() < 1e-12 * e1);
        assert!((s.cal_e2 - ce2).abs() < 1e-12 * e0);
        assert!((s.cal_e1 - ce1).abs() < 1e-11 * e1);
    }
}

#[test]
fn critical_e0_is_the_star_norm() {
    for alpha in [2.0, 3.0, 7.5] {
        let g = grid(alpha, 32);
        let p = ModelParams::critical(0.01, g).unwrap();
        let u = unit_clean_field(g, &mut rng(3));
        let s = eval_base(&u, &p).unwrap();
        assert!((s.e0 - u.norm_star().powi(2)).abs() < 1e-13);
        let direct = u.inner_star(&u).unwrap().re;
        assert!((inner_energy(&u, &u, &p).unwrap().re - direct).abs() < 1e-14);
    }
}

#[test]
fn constant_mode_snapshot() {
    let g = grid(2.0, 16);
    let e0 = SpectralField::basis(g, 0).unwrap();
    let s = eval_base(&e0, &ModelParams::critical(0.01, g).unwrap()).unwrap();
    assert!((s.e0 - PI).abs() < 1e-14);
    assert!((s.e_half - 2.0 * PI).abs() < 1e-14);
    assert_eq!((s.e1, s.e_3half, s.e2_sub), (0.0, 0.0, 0.0));
    let toy = eval_base(&e0, &ModelParams::toy(0.01, g).unwrap()).unwrap();
    assert!((toy.cal_e2 - PI).abs() < 1e-14);
}

#[test]
fn window_exponents_and_toy_coefficients() {
    assert_eq!(PhiFamily::Critical.window_exponent(), 3.0 / 5.0);
    assert_eq!(PhiFamily::Sub.window_exponent(), 3.0 / 7.0);
    assert_eq!(PhiFamily::Toy.window_exponent(), 2.0 / 3.0);
    assert!((window_end(PhiFamily::Critical, 1e-5) - 1e3).abs() < 1e-9);
    let [a1, a2, a3] = toy_coefficients(2.0);
    assert_eq!(a1, 2f64.powi(-21));
    assert_eq!(a2, 2f64.powi(-32) / 2f64.sqrt());
    assert_eq!(a3, 2f64.powi(-40));
}

#[test]
fn estimated_constants_respect_their_bounds() {
    for alpha in [2.0, 3.0] {
        let g = grid(alpha, 64);
        let p = ModelParams::critical(0.01, g).unwrap();
        let c = estimate_constants(&g, &p, 100, 7).unwrap();
        assert!(c.c3 > 0.0 && c.c3 <= 0.5);
        assert_eq!(c.c3, c3_exact(&g));
        assert!(c.c4 <= 1.0 + 1e-9, "c4 = {}", c.c4);
        assert!(c.c1 > 0.0 && c.c2 >= 1.0);
        assert!(c.satisfies_chain(1e-12));
        for (name, l, r) in c.constraint_chain() {
            assert!(l <= r * (1.0 + 1e-12), "{name}");
        }
        assert_eq!(estimate_constants(&g, &p, 100, 7).unwrap(), c);
    }
}

#[test]
fn sampled_ratios_never_exceed_the_estimate() {
    let g = grid(2.0, 32);
    let p = ModelParams::critical(0.01, g).unwrap();
    let c = estimate_constants(&g, &p, 100, 1).unwrap();
    let mut r = rng(99);
    for _ in 0..200 {
        let u = low_mode_field(g, 8, &mut r);
        assert!(constants::c1_ratio(&u, &p).unwrap() <= c.c1 * (1.0 + 1e-9));
        assert!(constants::c4_ratio(&u, &p).unwrap() <= c.c4 * (1.0 + 1e-9));
    }
}

#[test]
fn estimation_rejects_few_trials_and_other_exponents() {
    let g = grid(2.0, 32);
    let p = ModelParams::critical(0.01, g).unwrap();
    assert!(estimate_constants(&g, &p, 10, 1).is_err());
    let q = ModelParams::new(Variant::GeneralNonlocal { s: 0.5, s_tilde: 0.25 }, 0.01, g, GammaSchedule::Frozen).unwrap();
    assert!(estimate_constants(&g, &q, 100, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_composite_starts_at_e0(seed in 0u64..1_000_000, nu in 1e-5f64..1e-1) {
        let g = grid(2.0, 16);
        let u = unit_clean_field(g, &mut rng(seed));
        let c = ConstantSet::from_c(2.0, 8.0, 1.0, 0.25, 0.99);
        for (p, fam) in [
            (ModelParams::critical(nu, g).unwrap(), PhiFamily::Critical),
            (ModelParams::subcritical(nu, g).unwrap(), PhiFamily::Sub),
            (ModelParams::toy(nu, g).unwrap(), PhiFamily::Toy),
        ] {
            let s = eval_base(&u, &p).unwrap();
            let (phi, _) = fam.eval(&s, &c, nu);
            prop_assert_eq!(phi, s.e0);
        }
    }

    #[test]
    fn nonlocal_energies_are_below_their_local_counterparts(seed in 0u64..1_000_000) {
        // 0 <= k < 1 pointwise
        let g = grid(3.0, 16);
        let u = unit_clean_field(g, &mut rng(seed));
        let crit = eval_base(&u, &ModelParams::critical(0.01, g).unwrap()).unwrap();
        let toy = eval_base(&u, &ModelParams::toy(0.01, g).unwrap()).unwrap();
        prop_assert!(crit.e0 > 0.0 && crit.e0 <= toy.e0);
        prop_assert!(crit.e1 <= toy.e1 + 1e-15);
        prop_assert!(crit.e0 >= (1.0 - 1.0 / 3.0) * toy.e0 * (1.0 - 1e-12));
    }
}
