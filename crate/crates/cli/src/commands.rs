use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use qglab::energy::constants::c3_exact;
use qglab::energy::{estimate_constants, eval_base, phi_tilde_toy, phi_toy, window_end, ConstantSet, PhiFamily};
use qglab::oracle::{phi_trajectory, run_suite, SuiteConfig};
use qglab::propagator::{evolve, StepMethod, StepPolicy};
use qglab::random::InitSpec;
use qglab::rates::{sweep_spectral, sweep_time_domain, FitVerdict, TimeDomainOptions, EXPONENT_TOL};
use qglab::spectral::{GammaSchedule, ModelParams, ShearProfile, SpectralGrid, Variant};
use qglab::spectrum::{
    conjecture_trace, frozen_gamma, full_spectrum, resolution_rule, resolved_spectrum, ResolutionPolicy,
};
use serde::Serialize;

use crate::config::Settings;
use crate::output::{num, OutDir, Status};
use crate::{CliError, Outcome};

pub struct Context {
    command: &'static str,
    out: PathBuf,
    settings: Settings,
}

impl Context {
    pub fn new(command: &'static str, out: PathBuf, settings: Settings) -> Self {
        Self { command, out, settings }
    }
}

/// `name(args)` → `Some(args)`.
fn call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')').map(str::trim)
}

fn config_err(m: impl Into<String>) -> CliError {
    CliError::Config(m.into())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|e| config_err(format!("{what}: {s:?}: {e}")))
}

/// Cosine coefficients of a shear profile: numbers separated by whitespace or commas.
pub fn read_shear(path: &Path) -> Result<ShearProfile, CliError> {
    let text = read_text(path)?;
    let coeffs = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(t, "shear coefficient"))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ShearProfile::new(coeffs)?)
}

fn parse_variant(model: &str, s: &mut Settings) -> Result<Variant, CliError> {
    Ok(match model {
        "critical" => Variant::CriticalQG,
        "subcritical" => Variant::SubcriticalQG,
        "toy" => Variant::ToyFractional,
        _ => {
            if let Some(args) = call(model, "general") {
                let (a, b) = args
                    .split_once(',')
                    .ok_or_else(|| config_err(format!("general(s, s_tilde) expected, got {model:?}")))?;
                Variant::GeneralNonlocal {
                    s: parse_f64(a, "s")?,
                    s_tilde: parse_f64(b, "s_tilde")?,
                }
            } else if let Some(args) = call(model, "toy") {
                Variant::GeneralShearToy {
                    s: parse_f64(args, "s")?,
                    profile: ShearProfile::cosine(),
                }
            } else if let Some(path) = call(model, "shear") {
                Variant::GeneralShearToy {
                    s: s.get("s", 0.5)?,
                    profile: read_shear(Path::new(path))?,
                }
            } else {
                return Err(config_err(format!(
                    "unknown model {model:?}; expected critical, subcritical, toy, toy(s), general(s, s_tilde) or shear(file)"
                )));
            }
        }
    })
}

fn parse_schedule(v: &str, variant: &Variant) -> Result<GammaSchedule, CliError> {
    Ok(match v {
        "default" => match variant {
            Variant::CriticalQG | Variant::SubcriticalQG => GammaSchedule::Decaying,
            _ => GammaSchedule::Frozen,
        },
        "decaying" => GammaSchedule::Decaying,
        "frozen" => GammaSchedule::Frozen,
        "off" => GammaSchedule::Off,
        _ => return Err(config_err(format!("schedule {v:?}: expected default, decaying, frozen or off"))),
    })
}

/// `model`, `nu`, `alpha`, `c0`, `n`, `schedule`.
fn model_params(s: &mut Settings, default_nu: f64) -> Result<ModelParams, CliError> {
    let model = s.string("model", "critical");
    let variant = parse_variant(&model, s)?;
    let nu = s.get("nu", default_nu)?;
    let alpha = s.get("alpha", 2.0)?;
    let c0 = s.get("c0", 1.5)?;
    let default_n = if nu > 0.0 { resolution_rule(nu) } else { 64 };
    let n = s.get("n", default_n)?;
    let schedule = parse_schedule(&s.string("schedule", "default"), &variant)?;
    let grid = SpectralGrid::new(alpha, c0, n)?;
    Ok(ModelParams::new(variant, nu, grid, schedule)?)
}

/// `mode(β)`, `gaussian(width)`, `lowmodes(m)` or `file(path)` with `beta re im` rows.
pub fn parse_init(v: &str, seed: u64) -> Result<InitSpec, CliError> {
    if let Some(b) = call(v, "mode") {
        let b = b.parse::<i64>().map_err(|e| config_err(format!("mode {b:?}: {e}")))?;
        return Ok(InitSpec::Mode(b));
    }
    if let Some(w) = call(v, "gaussian") {
        return Ok(InitSpec::Gaussian {
            width: parse_f64(w, "width")?,
            seed,
        });
    }
    if let Some(m) = call(v, "lowmodes") {
        let m = m.parse::<usize>().map_err(|e| config_err(format!("lowmodes {m:?}: {e}")))?;
        return Ok(InitSpec::LowModes { m, seed });
    }
    if let Some(path) = call(v, "file") {
        let text = read_text(Path::new(path))?;
        let mut cs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tok: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
            if tok.len() != 3 {
                return Err(config_err(format!("{path}:{}: expected beta re im", i + 1)));
            }
            let b = tok[0]
                .parse::<i64>()
                .map_err(|e| config_err(format!("{path}:{}: {e}", i + 1)))?;
            cs.push((b, C64::new(parse_f64(tok[1], "re")?, parse_f64(tok[2], "im")?)));
        }
        return Ok(InitSpec::Coeffs(cs));
    }
    Err(config_err(format!(
        "init {v:?}: expected mode(b), gaussian(width), lowmodes(m) or file(path)"
    )))
}

fn phi_family(v: &Variant) -> Option<PhiFamily> {
    match v {
        Variant::CriticalQG => Some(PhiFamily::Critical),
        Variant::SubcriticalQG => Some(PhiFamily::Sub),
        Variant::ToyFractional => Some(PhiFamily::Toy),
        _ => None,
    }
}

pub fn simulate(ctx: Context) -> Result<Outcome, CliError> {
    let Context { command, out, mut settings } = ctx;
    let s = &mut settings;
    let params = model_params(s, 1e-2)?;
    let seed = s.get("seed", 0u64)?;
    let t_end = s.get("t_end", 10.0)?;
    let method = match s.string("method", "rk4").as_str() {
        "rk4" => StepMethod::Rk4,
        "expm" => StepMethod::FrozenExpm,
        m => return Err(config_err(format!("method {m:?}: expected rk4 or expm"))),
    };
    let policy = StepPolicy {
        method,
        dt_max: s.get("dt_max", 0.1)?,
        safety: s.get("safety", 0.5)?,
        sample_stride: s.get("stride", 10usize)?,
        tail_limit: s.get("tail_limit", 1e-6)?,
    };
    let init = parse_init(&s.string("init", "gaussian(8)"), seed)?;
    let with_phi = match s.string("phi", "auto").as_str() {
        "auto" => true,
        "none" => false,
        p => return Err(config_err(format!("phi {p:?}: expected auto or none"))),
    };
    let constant_trials = s.get("constant_trials", 200usize)?;
    let config = settings.finish()?;

    let theta0 = init.realize(params.grid)?;
    let family = if with_phi { phi_family(&params.variant) } else { None };
    let consts = match family {
        Some(PhiFamily::Critical) | Some(PhiFamily::Sub) => {
            Some(estimate_constants(&params.grid, &params, constant_trials, seed)?)
        }
        _ => None,
    };
    let traj = match family {
        Some(f) => phi_trajectory(&theta0, &params, f, t_end, &policy)?,
        None => evolve(&theta0, &params, t_end, &policy)?,
    };

    let mut csv = String::from(qglab::energy::EnergySnapshot::CSV_HEADER);
    csv.push('\n');
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let mut snap = eval_base(state, &params)?.at_time(*t);
        snap.phi = f64::NAN;
        match (family, &consts) {
            (Some(PhiFamily::Toy), _) => {
                snap.phi = if *t <= window_end(PhiFamily::Toy, params.nu) {
                    phi_toy(&snap, params.alpha(), params.nu)
                } else {
                    phi_tilde_toy(&snap, params.alpha(), params.nu)
                };
            }
            (Some(f), Some(c)) => {
                let (v, variant) = f.eval(&snap, c, params.nu);
                snap = snap.with_phi(v, variant);
            }
            _ => {}
        }
        csv.push_str(&snap.csv_row());
        csv.push('\n');
    }
    let last = traj.states.last().expect("trajectory has samples");
    let mut state_csv = String::from("beta,re,im\n");
    for b in params.grid.betas() {
        let c = last.at(b);
        state_csv.push_str(&format!("{b},{},{}\n", num(c.re), num(c.im)));
    }

    let mut o = OutDir::create(&out)?;
    o.text("trajectory.csv", &csv)?;
    o.text("final_state.csv", &state_csv)?;
    let status = Status::new(
        "simulate",
        true,
        Some(format!("{} steps of {:e}, {} samples", traj.steps, traj.dt, traj.times.len())),
    );
    o.finish(command, config, consts.into_iter().collect(), vec![status])?;
    Ok(Outcome::Success)
}

pub fn verify(ctx: Context) -> Result<Outcome, CliError> {
    let Context { command, out, mut settings } = ctx;
    let s = &mut settings;
    let d = SuiteConfig::default();
    let suite: Vec<String> = s.list("suite", "all")?;
    let cfg = SuiteConfig {
        alphas: s.list("alphas", &join(&d.alphas))?,
        c0: s.get("c0", d.c0)?,
        n_trunc: s.get("n", d.n_trunc)?,
        trials: s.get("trials", d.trials)?,
        seed: s.get("seed", d.seed)?,
        nu: s.get("nu", d.nu)?,
        constant_trials: s.get("constant_trials", d.constant_trials)?,
        phi_nu: s.get("phi_nu", d.phi_nu)?,
        phi_alpha: s.get("phi_alpha", d.phi_alpha)?,
        phi_n_trunc: s.get("phi_n", d.phi_n_trunc)?,
        tolerance_override: s.optional("tolerance")?,
    };
    let config = settings.finish()?;
    let selection: Vec<String> = if suite.iter().any(|x| x == "all") { Vec::new() } else { suite };
    let report = run_suite(&cfg, &selection)?;
    let statuses = report
        .checks
        .iter()
        .map(|c| {
            let mut st = Status::new(
                c.name.clone(),
                c.passed,
                Some(format!("worst violation {:e}, tolerance {:e}", c.worst_violation, c.tolerance)),
            );
            if !c.enforced {
                st.status = "report".into();
            }
            st
        })
        .collect();
    let mut o = OutDir::create(&out)?;
    o.json("checks.json", &report)?;
    o.finish(command, config, report.constants.clone(), statuses)?;
    Ok(if report.passed { Outcome::Success } else { Outcome::Failed })
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn resolution_policy(s: &mut Settings) -> Result<ResolutionPolicy, CliError> {
    let d = ResolutionPolicy::default();
    Ok(ResolutionPolicy {
        n_start: s.optional("n_start")?,
        growth: s.get("growth", d.growth)?,
        n_max: s.get("n_max", d.n_max)?,
        outer_mass_tol: s.get("outer_mass_tol", d.outer_mass_tol)?,
    })
}

#[derive(Serialize)]
struct SpectrumSummary {
    model: String,
    nu: f64,
    alpha: f64,
    n_trunc: usize,
    gamma: f64,
    abscissa: f64,
    least_damped: C64,
    residual: f64,
    relative_residual: f64,
    degenerate_with: Vec<C64>,
    outer_mass: f64,
}

pub fn spectrum(ctx: Context) -> Result<Outcome, CliError> {
    let Context { command, out, mut settings } = ctx;
    let s = &mut settings;
    let params = model_params(s, 1e-3)?;
    let gamma = s.optional::<f64>("gamma")?;
    let resolve = s.get("resolve", false)?;
    let policy = resolution_policy(s)?;
    let trace_nus: Vec<f64> = s.list("trace_nus", "")?;
    let config = settings.finish()?;

    let rep = if resolve {
        if gamma.is_some() {
            return Err(config_err("gamma cannot be combined with resolve = true"));
        }
        resolved_spectrum(&params, &ResolutionPolicy { n_start: Some(params.grid.n_trunc()), ..policy })?
    } else {
        full_spectrum(&params, gamma.unwrap_or_else(|| frozen_gamma(&params)))?
    };
    let mut o = OutDir::create(&out)?;
    o.text("eigenvalues.csv", &rep.eigenvalues_csv())?;
    let mut v_csv = String::from("beta,re,im\n");
    for b in rep.params.grid.betas() {
        let c = rep.least_damped.1.at(b);
        v_csv.push_str(&format!("{b},{},{}\n", num(c.re), num(c.im)));
    }
    o.text("eigenvector.csv", &v_csv)?;
    o.json(
        "spectrum.json",
        &SpectrumSummary {
            model: rep.params.variant.label(),
            nu: rep.params.nu,
            alpha: rep.params.alpha(),
            n_trunc: rep.params.grid.n_trunc(),
            gamma: rep.gamma,
            abscissa: rep.abscissa,
            least_damped: rep.least_damped.0,
            residual: rep.residual,
            relative_residual: rep.relative_residual,
            degenerate_with: rep.degenerate_with.clone(),
            outer_mass: rep.outer_mass,
        },
    )?;
    let mut statuses = vec![Status::new(
        "spectrum",
        true,
        Some(format!("abscissa {:e} at N = {}", rep.abscissa, rep.params.grid.n_trunc())),
    )];
    if !trace_nus.is_empty() {
        let tr = conjecture_trace(&params, &trace_nus, &policy)?;
        o.text("trace.csv", &tr.csv())?;
        o.json("trace.json", &tr)?;
        statuses.push(Status::new(
            "conjecture-trace",
            true,
            Some(format!("max/min ratio {:e}", tr.max_min_ratio)),
        ));
    }
    o.finish(command, config, Vec::new(), statuses)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    fit: &'a qglab::rates::RateFit,
    verdict: Option<FitVerdict>,
    exponent_tolerance: f64,
    predicted_prefactor: Option<f64>,
    guaranteed_prefactor: Option<f64>,
}

pub fn sweep(ctx: Context) -> Result<Outcome, CliError> {
    let Context { command, out, mut settings } = ctx;
    let s = &mut settings;
    let nus: Vec<f64> = s.list("nus", "1e-5,3e-5,1e-4,3e-4,1e-3")?;
    let template = model_params(s, nus.first().copied().unwrap_or(1e-3))?;
    let seed = s.get("seed", 0u64)?;
    let fit = match s.string("route", "spectral").as_str() {
        "spectral" => {
            let policy = resolution_policy(s)?;
            let config = settings.finish()?;
            (sweep_spectral(&template, &nus, &policy)?, config)
        }
        "time" => {
            let d = TimeDomainOptions::default();
            let window: Vec<f64> = s.list("window", "1e-1,1e-4")?;
            if window.len() != 2 {
                return Err(config_err("window takes two values lo,hi"));
            }
            let init = parse_init(&s.string("init", "lowmodes(4)"), seed)?;
            let opts = TimeDomainOptions {
                step: StepPolicy {
                    dt_max: s.get("dt_max", d.step.dt_max)?,
                    safety: s.get("safety", d.step.safety)?,
                    sample_stride: s.get("stride", d.step.sample_stride)?,
                    tail_limit: s.get("tail_limit", d.step.tail_limit)?,
                    ..d.step
                },
                horizon: s.get("horizon", d.horizon)?,
                n_trunc: s.optional("n_start")?,
                growth: s.get("growth", d.growth)?,
                n_max: s.get("n_max", d.n_max)?,
            };
            let config = settings.finish()?;
            (sweep_time_domain(&template, &nus, &init, (window[0], window[1]), &opts)?, config)
        }
        r => return Err(config_err(format!("route {r:?}: expected spectral or time"))),
    };
    let (fit, config) = fit;
    let verdict = fit.verdict(EXPONENT_TOL);
    let mut o = OutDir::create(&out)?;
    o.json(
        "ratefit.json",
        &SweepSummary {
            fit: &fit,
            verdict,
            exponent_tolerance: EXPONENT_TOL,
            predicted_prefactor: fit.predicted_prefactor(),
            guaranteed_prefactor: fit.guaranteed_prefactor(),
        },
    )?;
    o.text("ratefit.csv", &fit.csv())?;
    let mut statuses: Vec<Status> = fit
        .nu_values
        .iter()
        .zip(&fit.rates)
        .map(|(nu, r)| Status::new(format!("nu={nu:e}"), true, Some(format!("rate {r:e}"))))
        .collect();
    statuses.extend(
        fit.skipped
            .iter()
            .map(|p| Status::new(format!("nu={:e}", p.nu), false, Some(p.reason.clone()))),
    );
    statuses.push(Status::new(
        "fit",
        verdict.map_or(true, FitVerdict::passes),
        Some(format!("p = {:.4}, predicted {:?}, verdict {verdict:?}", fit.p, fit.predicted)),
    ));
    o.finish(command, config, Vec::new(), statuses)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct ConstantsSummary<'a> {
    constants: &'a ConstantSet,
    c3_exact: f64,
    constraint_chain: Vec<(&'static str, f64, f64)>,
    chain_satisfied: bool,
}

pub fn constants(ctx: Context) -> Result<Outcome, CliError> {
    let Context { command, out, mut settings } = ctx;
    let s = &mut settings;
    let alpha = s.get("alpha", 2.0)?;
    let c0 = s.get("c0", 1.5)?;
    let n = s.get("n", 128usize)?;
    let nu = s.get("nu", 1e-2)?;
    let trials = s.get("trials", 1000usize)?;
    let seed = s.get("seed", 7u64)?;
    let config = settings.finish()?;

    let grid = SpectralGrid::new(alpha, c0, n)?;
    let params = ModelParams::critical(nu, grid)?;
    let c = estimate_constants(&grid, &params, trials, seed)?;
    let chain_ok = c.satisfies_chain(1e-12);
    let mut o = OutDir::create(&out)?;
    o.json(
        "constants.json",
        &ConstantsSummary {
            constants: &c,
            c3_exact: c3_exact(&grid),
            constraint_chain: c.constraint_chain(),
            chain_satisfied: chain_ok,
        },
    )?;
    let status = Status::new("constraint-chain", chain_ok, None);
    o.finish(command, config, vec![c], vec![status])?;
    Ok(Outcome::Success)
}
