//! Acceptance criteria 1-8. Runs without the test harness so each verdict line is printed
//! as it is decided; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use qglab::oracle::{run_suite, CheckReport, SuiteConfig, SuiteReport, TOL_IDENTITY};
use qglab::propagator::{evolve, expm_propagate, stable_dt, StepMethod, StepPolicy};
use qglab::random::{rng, unit_clean_field, InitSpec};
use qglab::rates::*;
use qglab::spectral::*;
use qglab::spectrum::{conjecture_trace, ResolutionPolicy};

const DESK_NUS: [f64; 5] = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3];
const TRACE_NUS: [f64; 4] = [1e-5, 1e-4, 1e-3, 1e-2];
const ORDER_TOL: f64 = 0.3;
const SHEAR_TOL: f64 = 0.1;

struct Verdict {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn emit(v: &Verdict) {
    let tag = if v.pass { "PASS" } else { "FAIL" };
    println!("{tag} criterion {} ({}): {}", v.id, v.title, v.detail);
}

fn within_budget(secs: f64, budget: f64) -> (bool, String) {
    (secs < budget, format!("{secs:.1} s of {budget:.0} s"))
}

fn grid(n: usize) -> SpectralGrid {
    SpectralGrid::new(2.0, 1.5, n).unwrap()
}

fn checks<'a>(r: &'a SuiteReport, pred: impl Fn(&CheckReport) -> bool + 'a) -> Vec<&'a CheckReport> {
    r.checks.iter().filter(|c| c.enforced && pred(c)).collect()
}

fn summarize(cs: &[&CheckReport]) -> (bool, String) {
    let pass = !cs.is_empty() && cs.iter().all(|c| c.passed);
    let worst = cs.iter().max_by(|a, b| a.worst_violation.total_cmp(&b.worst_violation)).unwrap();
    let failed: Vec<&str> = cs.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let mut s = format!(
        "{} checks, worst {} at {:.3e} (tol {:.0e})",
        cs.len(),
        worst.name,
        worst.worst_violation,
        worst.tolerance
    );
    if !failed.is_empty() {
        s.push_str(&format!(", failed: {}", failed.join(", ")));
    }
    (pass, s)
}

/// Criteria 1-4 share one suite run at the stated sizes.
fn suites() -> Vec<Verdict> {
    let cfg = SuiteConfig::default();
    assert_eq!((cfg.trials, cfg.n_trunc, cfg.phi_nu, cfg.phi_alpha), (1000, 128, 1e-2, 2.0));
    assert_eq!(cfg.alphas, vec![2.0, 3.0, 5.0, 10.0]);
    let t0 = Instant::now();
    let r = run_suite(&cfg, &[]).expect("suite runs");
    let secs = t0.elapsed().as_secs_f64();

    let energy = |c: &CheckReport| ["pro-energy", "toy-energy"].iter().any(|p| c.name.starts_with(p));
    let identities = checks(&r, |c| energy(c) && c.tolerance == TOL_IDENTITY);
    let commutator = checks(&r, |c| c.name.starts_with("lem-com-ba"));
    let inequalities = checks(&r, |c| {
        ["star-equivalence", "lem-equivalence", "lem-est-me2", "lem-inter", "cs/"]
            .iter()
            .any(|p| c.name.starts_with(p))
    });
    let decay = checks(&r, |c| c.name.starts_with("lem-decay"));
    let c3_max = r.constants.iter().map(|c| c.c3).fold(0.0, f64::max);

    let mut out = Vec::new();
    for (id, title, cs, budget, extra) in [
        (1, "exact identities", identities, 60.0, String::new()),
        (2, "commutator closed form", commutator, 60.0, format!(", max c3 {c3_max:.5}")),
        (3, "inequality suite", inequalities, 120.0, String::new()),
        (4, "energy monotonicity", decay, 300.0, String::new()),
    ] {
        let (ok, s) = summarize(&cs);
        let (fast, t) = within_budget(secs, budget);
        let c3_ok = id != 2 || (c3_max > 0.0 && c3_max <= 0.5);
        out.push(Verdict { id, title, pass: ok && fast && c3_ok, detail: format!("{s}{extra}; suite {t}") });
    }
    out
}

fn fit_line(f: &RateFit) -> String {
    let q = f.predicted.unwrap();
    let note = match f.verdict(EXPONENT_TOL).unwrap() {
        FitVerdict::Within => String::new(),
        FitVerdict::FasterThanGuaranteed => " [faster than guaranteed]".into(),
        FitVerdict::Slower => " [slower than guaranteed]".into(),
    };
    format!("{} p = {:.4} vs {q:.4} (r² {:.5}){note}", f.label, f.p, f.r_squared)
}

fn exponent_fits() -> (Verdict, Verdict) {
    let policy = ResolutionPolicy::default();
    let t0 = Instant::now();
    let crit = sweep_spectral(&ModelParams::critical(1e-3, grid(64)).unwrap(), &DESK_NUS, &policy).unwrap();
    let sub = sweep_spectral(&ModelParams::subcritical(1e-3, grid(64)).unwrap(), &DESK_NUS, &policy).unwrap();
    let toy = sweep_spectral(&ModelParams::toy(1e-3, grid(64)).unwrap(), &DESK_NUS, &policy).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let fits = [&crit, &sub, &toy];
    let ok = fits.iter().all(|f| f.skipped.is_empty() && f.verdict(EXPONENT_TOL).unwrap().passes());
    let (fast, t) = within_budget(secs, 900.0);
    let lines: Vec<String> = fits.iter().map(|f| fit_line(f)).collect();
    let five = Verdict {
        id: 5,
        title: "exponent fits",
        pass: ok && fast,
        detail: format!("{}; tol ±{EXPONENT_TOL}; {t}", lines.join("; ")),
    };

    let local_s1 = ModelParams::new(
        Variant::GeneralShearToy { s: 1.0, profile: ShearProfile::cosine() },
        1e-3,
        grid(64),
        GammaSchedule::Frozen,
    )
    .unwrap();
    let local = sweep_spectral(&local_s1, &DESK_NUS, &policy).unwrap();
    let mut worst = f64::INFINITY;
    let mut ordered = local.skipped.is_empty();
    for i in 0..DESK_NUS.len() {
        ordered &= crit.rates[i] > toy.rates[i] && sub.rates[i] > local.rates[i];
        worst = worst.min(crit.rates[i] / toy.rates[i]).min(sub.rates[i] / local.rates[i]);
    }
    let six = Verdict {
        id: 6,
        title: "non-local enhancement ordering",
        pass: ordered,
        detail: format!("smallest nonlocal/local rate ratio {worst:.3} over {} viscosities", DESK_NUS.len()),
    };
    (five, six)
}

fn conjecture() -> Verdict {
    let policy = ResolutionPolicy::default();
    let t0 = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [ModelParams::critical(1e-3, grid(64)).unwrap(), ModelParams::toy(1e-3, grid(64)).unwrap()] {
        match conjecture_trace(&t, &TRACE_NUS, &policy) {
            Ok(tr) => {
                let good = tr.ratios.len() == TRACE_NUS.len()
                    && tr.ratios.iter().all(|r| r.is_finite() && *r > 0.0)
                    && tr.max_min_ratio.is_finite();
                ok &= good;
                parts.push(format!(
                    "{} max/min {:.3} (exponent zero {:.3})",
                    tr.label, tr.max_min_ratio, tr.max_min_ratio_exponent_zero
                ));
            }
            Err(e) => {
                ok = false;
                parts.push(format!("{}: {e}", t.variant));
            }
        }
    }
    let (fast, t) = within_budget(t0.elapsed().as_secs_f64(), 600.0);
    Verdict { id: 7, title: "conjecture evidence trace", pass: ok && fast, detail: format!("{}; {t}", parts.join("; ")) }
}

fn propagator() -> Verdict {
    let t0 = Instant::now();
    let g = grid(24);
    let p = ModelParams::critical(1e-2, g).unwrap().with_schedule(GammaSchedule::Frozen);
    let u = unit_clean_field(g, &mut rng(11));
    let t_end = 4.0;
    let exact = expm_propagate(&u, &assemble_matrix(&p, p.gamma(0.0)), t_end).unwrap();
    let dt0 = stable_dt(&p, 0.0, 0.5);
    let errs: Vec<f64> = [0.25, 0.125, 0.0625]
        .iter()
        .map(|f| {
            let pol = StepPolicy {
                method: StepMethod::Rk4,
                dt_max: dt0 * f,
                safety: 1.0,
                sample_stride: usize::MAX,
                tail_limit: 1.0,
            };
            evolve(&u, &p, t_end, &pol).unwrap().states.last().unwrap().max_abs_diff(&exact).unwrap()
        })
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let order_ok = orders.iter().all(|o| (o - 4.0).abs() <= ORDER_TOL);

    let shear = ModelParams::new(
        Variant::GeneralShearToy { s: 0.5, profile: ShearProfile::new(vec![1.0, 0.3]).unwrap() },
        1e-3,
        grid(64),
        GammaSchedule::Frozen,
    )
    .unwrap();
    let init = InitSpec::LowModes { m: 4, seed: 1 };
    let (shear_ok, shear_s) = match sweep_time_domain(&shear, &DESK_NUS, &init, DEFAULT_WINDOW, &TimeDomainOptions::default()) {
        Ok(f) => (
            f.skipped.is_empty() && (f.p - 2.0 / 3.0).abs() <= SHEAR_TOL,
            format!("shear p = {:.4} vs 0.6667 ± {SHEAR_TOL} (r² {:.5}, N {:?})", f.p, f.r_squared, f.n_used),
        ),
        Err(e) => (false, format!("shear sweep failed: {e}")),
    };
    let (fast, t) = within_budget(t0.elapsed().as_secs_f64(), 600.0);
    Verdict {
        id: 8,
        title: "propagator validation",
        pass: order_ok && shear_ok && fast,
        detail: format!(
            "RK4 orders {:.3}, {:.3} (4 ± {ORDER_TOL}); {shear_s}; {t}",
            orders[0], orders[1]
        ),
    }
}

fn main() -> ExitCode {
    let mut all = Vec::new();
    for v in suites() {
        emit(&v);
        all.push(v);
    }
    let (five, six) = exponent_fits();
    emit(&five);
    emit(&six);
    all.extend([five, six]);
    for v in [conjecture(), propagator()] {
        emit(&v);
        all.push(v);
    }
    let failed: Vec<u8> = all.iter().filter(|v| !v.pass).map(|v| v.id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", all.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
