use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dynamics::{check_phi_monotone, energy_lines, phi_trajectory};
use super::statics::*;
use super::{random_fields, CheckReport, Tally};
use crate::energy::constants::c3_exact;
use crate::energy::{estimate_constants, ConstantSet, PhiFamily};
use crate::error::{LabError, Result};
use crate::propagator::{stable_dt, StepPolicy};
use crate::random;
use crate::spectral::{ModelParams, SpectralGrid};

pub const CHECK_NAMES: &[&str] = &[
    "star-equivalence",
    "lem-equivalence",
    "lem-est-me2",
    "lem-com-ba",
    "lem-inter",
    "cs-chains",
    "b-symmetry",
    "pro-energy",
    "pro-energy-sub",
    "toy-energy",
    "lem-decay",
    "lem-decay-sub",
    "lem-decay-toy",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub alphas: Vec<f64>,
    pub c0: f64,
    pub n_trunc: usize,
    pub trials: usize,
    pub seed: u64,
    /// Viscosity for the derivative identities.
    pub nu: f64,
    /// Random trials used when estimating the constants.
    pub constant_trials: usize,
    pub phi_nu: f64,
    pub phi_alpha: f64,
    pub phi_n_trunc: usize,
    /// Replaces every check tolerance when set.
    pub tolerance_override: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            alphas: vec![2.0, 3.0, 5.0, 10.0],
            c0: 1.5,
            n_trunc: 128,
            trials: 1000,
            seed: 7,
            nu: 1e-2,
            constant_trials: 200,
            phi_nu: 1e-2,
            phi_alpha: 2.0,
            phi_n_trunc: 128,
            tolerance_override: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub selection: Vec<String>,
    pub constants: Vec<ConstantSet>,
    pub checks: Vec<CheckReport>,
    /// All enforced checks passed.
    pub passed: bool,
}

/// Folds reports with the same name (one per configuration) into one.
fn merge(reports: Vec<CheckReport>) -> Vec<CheckReport> {
    let mut order = Vec::new();
    let mut by_name: BTreeMap<String, CheckReport> = BTreeMap::new();
    for r in reports {
        match by_name.get_mut(&r.name) {
            None => {
                order.push(r.name.clone());
                by_name.insert(r.name.clone(), r);
            }
            Some(m) => {
                m.trials += r.trials;
                if r.worst_violation > m.worst_violation {
                    m.worst_violation = r.worst_violation;
                    m.witness = r.witness;
                }
                m.passed = m.worst_violation <= m.tolerance;
                m.note = match (m.note.take(), r.note) {
                    (Some(a), Some(b)) if a != b => Some(format!("{a}; {b}")),
                    (a, b) => a.or(b),
                };
            }
        }
    }
    order.into_iter().map(|n| by_name.remove(&n).expect("name recorded")).collect()
}

fn grids(cfg: &SuiteConfig) -> Result<Vec<SpectralGrid>> {
    cfg.alphas
        .iter()
        .map(|&a| SpectralGrid::new(a, cfg.c0, cfg.n_trunc))
        .collect()
}

fn energy_suite(
    grid: SpectralGrid,
    params: ModelParams,
    consts: Option<&ConstantSet>,
    prefix: &str,
    cfg: &SuiteConfig,
) -> Result<Vec<CheckReport>> {
    let mut tallies: Vec<Tally> = Vec::new();
    let t_late = 0.5 / params.nu;
    for (k, f) in random_fields(grid, cfg.trials, cfg.seed).enumerate() {
        let t = if k % 2 == 0 { 0.0 } else { t_late };
        let lines = energy_lines(&f, &params, t, consts)?;
        if tallies.is_empty() {
            tallies = lines
                .iter()
                .map(|l| {
                    let t = Tally::new(format!("{prefix}/{}", l.name), l.tolerance());
                    if l.enforced {
                        t
                    } else {
                        t.report_only()
                    }
                })
                .collect();
        }
        for (tally, l) in tallies.iter_mut().zip(&lines) {
            tally.record(l.violation(), Some(&f));
            tally.trial();
        }
    }
    Ok(tallies.into_iter().map(Tally::finish).collect())
}

fn phi_suite(family: PhiFamily, consts: &ConstantSet, cfg: &SuiteConfig) -> Result<CheckReport> {
    let grid = SpectralGrid::new(cfg.phi_alpha, cfg.c0, cfg.phi_n_trunc)?;
    let params = match family {
        PhiFamily::Critical => ModelParams::critical(cfg.phi_nu, grid)?,
        PhiFamily::Sub => ModelParams::subcritical(cfg.phi_nu, grid)?,
        PhiFamily::Toy => ModelParams::toy(cfg.phi_nu, grid)?,
    };
    let init = random::unit_clean_field(grid, &mut random::rng(cfg.seed));
    let t_end = 1.0 / cfg.phi_nu;
    let policy = phi_policy(&params, family);
    let traj = phi_trajectory(&init, &params, family, t_end, &policy)?;
    check_phi_monotone(&traj, family, consts)
}

/// Step policy giving roughly 200 samples across the window.
pub(crate) fn phi_policy(params: &ModelParams, family: PhiFamily) -> StepPolicy {
    let base = StepPolicy {
        dt_max: 0.05,
        ..StepPolicy::default()
    };
    let dt = base.dt_max.min(stable_dt(params, 0.0, base.safety));
    let tw = crate::energy::window_end(family, params.nu);
    StepPolicy {
        sample_stride: ((tw / 200.0) / dt).floor().max(1.0) as usize,
        ..base
    }
}

/// Runs the selected checks (all when `selection` is empty).
pub fn run_suite(cfg: &SuiteConfig, selection: &[String]) -> Result<SuiteReport> {
    for s in selection {
        if !CHECK_NAMES.contains(&s.as_str()) {
            return Err(LabError::InvalidParams(format!(
                "unknown check '{s}', expected one of {}",
                CHECK_NAMES.join(", ")
            )));
        }
    }
    if cfg.trials == 0 {
        return Err(LabError::InvalidParams("trials must be at least 1".into()));
    }
    let selected: Vec<&str> = if selection.is_empty() {
        CHECK_NAMES.to_vec()
    } else {
        CHECK_NAMES.iter().copied().filter(|n| selection.iter().any(|s| s == n)).collect()
    };
    let wants = |n: &str| selected.contains(&n);
    let gs = grids(cfg)?;

    let need_consts = ["lem-est-me2", "pro-energy", "pro-energy-sub"].iter().any(|n| wants(n));
    let consts: Vec<ConstantSet> = if need_consts {
        gs.par_iter()
            .map(|g| {
                let p = ModelParams::critical(cfg.nu, *g)?;
                estimate_constants(g, &p, cfg.constant_trials, cfg.seed)
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let decay_families: Vec<PhiFamily> = [
        ("lem-decay", PhiFamily::Critical),
        ("lem-decay-sub", PhiFamily::Sub),
        ("lem-decay-toy", PhiFamily::Toy),
    ]
    .iter()
    .filter(|(n, _)| wants(n))
    .map(|(_, f)| *f)
    .collect();
    let phi_consts = if decay_families.iter().any(|f| *f != PhiFamily::Toy) {
        let g = SpectralGrid::new(cfg.phi_alpha, cfg.c0, cfg.phi_n_trunc)?;
        let p = ModelParams::critical(cfg.phi_nu, g)?;
        Some(estimate_constants(&g, &p, cfg.constant_trials, cfg.seed)?)
    } else {
        None
    };

    let per_alpha: Vec<Vec<CheckReport>> = gs
        .par_iter()
        .enumerate()
        .map(|(i, &g)| -> Result<Vec<CheckReport>> {
            let (trials, seed) = (cfg.trials, cfg.seed);
            let mut out = Vec::new();
            if wants("star-equivalence") {
                out.push(check_star_equivalence(g, trials, seed)?);
            }
            if wants("lem-equivalence") {
                out.push(check_lemma_equivalence(g, trials, seed)?);
            }
            if wants("lem-est-me2") {
                out.push(check_lemma_est_me2(g, consts[i].c1, trials, seed)?);
            }
            if wants("lem-com-ba") {
                out.extend(check_commutator_pairing(g, c3_exact(&g), trials, seed)?);
            }
            if wants("lem-inter") {
                out.extend(check_interpolation_toy(g, trials, seed)?);
            }
            if wants("cs-chains") {
                out.extend(check_cs_chains(g, trials, seed)?);
            }
            if wants("b-symmetry") {
                out.push(check_b_symmetry(g, trials, seed)?);
            }
            if wants("pro-energy") {
                let p = ModelParams::critical(cfg.nu, g)?;
                out.extend(energy_suite(g, p, Some(&consts[i]), "pro-energy", cfg)?);
            }
            if wants("pro-energy-sub") {
                let p = ModelParams::subcritical(cfg.nu, g)?;
                out.extend(energy_suite(g, p, Some(&consts[i]), "pro-energy-sub", cfg)?);
            }
            if wants("toy-energy") {
                let p = ModelParams::toy(cfg.nu, g)?;
                out.extend(energy_suite(g, p, None, "toy-energy", cfg)?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut checks = merge(per_alpha.into_iter().flatten().collect());
    let decay: Vec<CheckReport> = decay_families
        .par_iter()
        .map(|&f| {
            let c = match f {
                // The toy form has explicit coefficients and reads only `alpha`.
                PhiFamily::Toy => ConstantSet::from_c(cfg.phi_alpha, 1.0, 1.0, 0.5, 1.0),
                _ => phi_consts.clone().expect("constants estimated"),
            };
            phi_suite(f, &c, cfg)
        })
        .collect::<Result<_>>()?;
    checks.extend(decay);

    if let Some(tol) = cfg.tolerance_override {
        for c in &mut checks {
            c.tolerance = tol;
            c.passed = c.worst_violation <= tol;
        }
    }
    let passed = checks.iter().filter(|c| c.enforced).all(|c| c.passed);
    let mut constants = consts;
    if let Some(c) = phi_consts {
        if !constants.iter().any(|k| k.alpha == c.alpha) {
            constants.push(c);
        }
    }
    Ok(SuiteReport {
        config: cfg.clone(),
        selection: selected.iter().map(|s| s.to_string()).collect(),
        constants,
        checks,
        passed,
    })
}
