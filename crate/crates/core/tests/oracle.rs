use num_complex::Complex64 as C64;
use qglab::energy::constants::c3_exact;
use qglab::energy::{estimate_constants, psi_gradient_sum};
use qglab::oracle::*;
use qglab::random::{rng, unit_clean_field};
use qglab::spectral::*;

fn grid(alpha: f64, n: usize) -> SpectralGrid {
    SpectralGrid::new(alpha, 1.5, n).unwrap()
}

fn small_config() -> SuiteConfig {
    SuiteConfig {
        alphas: vec![2.0, 3.0],
        n_trunc: 32,
        trials: 40,
        constant_trials: 100,
        phi_nu: 5e-2,
        phi_n_trunc: 48,
        ..SuiteConfig::default()
    }
}

#[test]
fn commutator_pairing_three_ways() {
    for alpha in [2.0, 5.0] {
        let g = grid(alpha, 48);
        let p = ModelParams::critical(0.01, g).unwrap();
        let comm = pairing_commutator(g).unwrap();
        let c3 = c3_exact(&g);
        let mut r = rng(21);
        for _ in 0..50 {
            let u = unit_clean_field(g, &mut r);
            let closed = commutator_pairing_closed_form(&u);
            let dense = commutator_pairing_matrix(&u, &comm).unwrap();
            // operator chain, no matrices
            let ba = apply_b(&apply_a(&u, &p).unwrap(), &p).unwrap();
            let ab = apply_a(&apply_b(&u, &p).unwrap(), &p).unwrap();
            let chain = ba.sub(&ab).unwrap().inner_star(&u.deriv_y()).unwrap().re;
            assert!((closed - dense).abs() <= 1e-10);
            assert!((closed - chain).abs() <= 1e-10);
            assert!(closed <= -c3 * psi_gradient_sum(&u) * (1.0 - 1e-9));
        }
    }
}

#[test]
fn small_suite_passes_and_is_deterministic() {
    let cfg = small_config();
    let a = run_suite(&cfg, &[]).unwrap();
    for c in a.checks.iter().filter(|c| c.enforced) {
        assert!(c.passed, "{} worst {:e} tol {:e}", c.name, c.worst_violation, c.tolerance);
    }
    assert!(a.passed);
    assert_eq!(a.selection.len(), CHECK_NAMES.len());
    let b = run_suite(&cfg, &[]).unwrap();
    assert_eq!(a, b);
}

#[test]
fn selection_and_bad_input() {
    let cfg = small_config();
    let r = run_suite(&cfg, &["b-symmetry".to_string()]).unwrap();
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].trials, cfg.alphas.len() * cfg.trials);
    assert!(run_suite(&cfg, &["no-such-check".to_string()]).is_err());
    assert!(run_suite(&SuiteConfig { trials: 0, ..cfg }, &[]).is_err());
}

#[test]
fn tolerance_override_is_a_negative_control() {
    let cfg = SuiteConfig { tolerance_override: Some(1e-30), ..small_config() };
    let r = run_suite(&cfg, &["lem-com-ba".to_string()]).unwrap();
    assert!(!r.passed);
    let w = r.checks.iter().find(|c| !c.passed).unwrap();
    assert!(w.worst_violation > 1e-30);
}

#[test]
fn undersized_constant_is_caught() {
    let g = grid(2.0, 32);
    assert!(check_lemma_est_me2(g, 10.0, 50, 1).unwrap().passed);
    assert!(!check_lemma_est_me2(g, 1e-3, 50, 1).unwrap().passed);
    assert!(!check_commutator_pairing(g, 0.6, 50, 1).unwrap()[1].passed);
}

#[test]
fn energy_lines_hold_on_random_states() {
    let g = grid(2.0, 48);
    let p = ModelParams::critical(0.01, g).unwrap();
    let c = estimate_constants(&g, &p, 100, 3).unwrap();
    let mut r = rng(4);
    for k in 0..20 {
        let u = unit_clean_field(g, &mut r);
        let t = if k % 2 == 0 { 0.0 } else { 40.0 };
        for l in energy_lines(&u, &p, t, Some(&c)).unwrap().iter().filter(|l| l.enforced) {
            assert!(l.violation() <= l.tolerance(), "{} {:e}", l.name, l.violation());
        }
        assert!(check_prop_energy(&u, &p, t, Some(&c)).unwrap().passed);
    }
}

#[test]
fn energy_lines_reject_unresolved_states() {
    let g = grid(2.0, 16);
    let p = ModelParams::critical(0.01, g).unwrap();
    let u = SpectralField::basis(g, 15).unwrap().scale(C64::new(1.0, 0.0));
    assert!(energy_lines(&u, &p, 0.0, None).is_err());
}
