use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{CheckReport, Tally, TOL_IDENTITY, TOL_INEQUALITY, TOL_TRAJECTORY};
use crate::energy::{
    cal_e2, eval_base, inner_energy, psi_gradient_sum, window_end, ConstantSet, EnergySnapshot,
    PhiFamily,
};
use crate::error::{LabError, Result};
use crate::propagator::{evolve_interval, StepPolicy, Trajectory};
use crate::spectral::{apply_a, apply_b, apply_generator, ModelParams, SpectralField, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineKind {
    Equality,
    Inequality,
}

/// One evaluated line `lhs = rhs` or `lhs <= rhs` of an energy estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyLine {
    pub name: &'static str,
    pub kind: LineKind,
    pub lhs: f64,
    pub rhs: f64,
    /// Sum of the magnitudes of all terms.
    pub scale: f64,
    pub enforced: bool,
}

impl EnergyLine {
    fn new(name: &'static str, kind: LineKind, lhs: f64, terms: &[f64]) -> Self {
        let scale = lhs.abs() + terms.iter().map(|x| x.abs()).sum::<f64>();
        Self {
            name,
            kind,
            lhs,
            rhs: terms.iter().sum(),
            scale,
            enforced: true,
        }
    }

    fn report_only(mut self) -> Self {
        self.enforced = false;
        self
    }

    pub fn violation(&self) -> f64 {
        let s = if self.scale > 0.0 { self.scale } else { 1.0 };
        match self.kind {
            LineKind::Equality => (self.lhs - self.rhs).abs() / s,
            LineKind::Inequality => (self.lhs - self.rhs) / s,
        }
    }

    pub fn tolerance(&self) -> f64 {
        match self.kind {
            LineKind::Equality => TOL_IDENTITY,
            LineKind::Inequality => TOL_INEQUALITY,
        }
    }
}

/// Time derivatives of the quadratic functionals along `θ_t = -L(t)θ`, by pairing.
struct Rates {
    theta: SpectralField,
    theta_t: SpectralField,
}

impl Rates {
    /// `d/dt 2π Σ w k |θ̃|²`.
    fn weighted(&self, params: &ModelParams, w: impl Fn(i64) -> f64) -> f64 {
        let g = params.grid;
        4.0 * PI
            * g.betas()
                .map(|b| w(b) * params.k_symbol(b) * (self.theta_t.at(b) * self.theta.at(b).conj()).re)
                .sum::<f64>()
    }

    fn cal_e1(&self, params: &ModelParams) -> Result<f64> {
        let i = C64::new(0.0, 1.0);
        let a_t = apply_a(&self.theta_t, params)?.scale(i);
        let a = apply_a(&self.theta, params)?.scale(i);
        let p1 = inner_energy(&a_t, &self.theta.deriv_y(), params)?.re;
        let p2 = inner_energy(&a, &self.theta_t.deriv_y(), params)?.re;
        Ok(-params.alpha().signum() * (p1 + p2))
    }

    fn cal_e2(&self, params: &ModelParams) -> Result<f64> {
        if params.s_tilde().is_some() {
            let b_t = apply_b(&self.theta_t, params)?;
            let b = apply_b(&self.theta, params)?;
            Ok(2.0 * inner_energy(&self.theta_t, &self.theta, params)?.re
                - 2.0 * inner_energy(&b_t, &b, params)?.re)
        } else {
            let a_t = apply_a(&self.theta_t, params)?;
            let a = apply_a(&self.theta, params)?;
            Ok(2.0 * a_t.inner_l2(&a)?.re)
        }
    }
}

/// All energy lines that apply to `params.variant`, evaluated at `(state, t)`.
///
/// Inequalities that involve `c2, c3, c4` are skipped when `consts` is `None`.
pub fn energy_lines(
    state: &SpectralField,
    params: &ModelParams,
    t: f64,
    consts: Option<&ConstantSet>,
) -> Result<Vec<EnergyLine>> {
    use LineKind::{Equality as Eq, Inequality as Le};

    let tail = state.tail_mass(4);
    if tail > 1e-10 {
        return Err(LabError::Precondition(format!(
            "tail mass {tail:.3e} beyond N-4 exceeds 1e-10"
        )));
    }
    let g = params.grid;
    let nu = params.nu;
    let gamma = params.gamma(t);
    let ga = gamma.abs();
    let s = params.s();
    let r = Rates {
        theta: state.clone(),
        theta_t: apply_generator(state, params, gamma)?.scale(C64::new(-1.0, 0.0)),
    };
    let e = eval_base(state, params)?;
    let de0 = r.weighted(params, |_| 1.0);
    let de1 = r.weighted(params, |b| (b * b) as f64);
    let dce1 = r.cal_e1(params)?;
    let dce2 = r.cal_e2(params)?;
    let a2 = params.alpha() * params.alpha();

    let mut out = Vec::new();
    match &params.variant {
        Variant::CriticalQG => {
            out.push(EnergyLine::new("dE0", Eq, de0, &[-2.0 * nu * e.e_half]));
            out.push(EnergyLine::new("dE1", Eq, de1, &[-2.0 * nu * e.e_3half, -2.0 * ga * e.cal_e1]));
            if let Some(c) = consts {
                let a = apply_a(state, params)?;
                let (na, nla, na_star) = (a.norm_l2(), a.norm_sobolev(0.5), a.norm_star());
                let psi = psi_gradient_sum(state);
                let head = [2.0 * nu * nla * e.e_3half.sqrt(), c.c2 * nu * e.e_half];
                out.push(
                    EnergyLine::new("dcalE1", Le, dce1, &[head[0], head[1], -ga * na * na, -c.c3 * ga * psi])
                        .report_only(),
                );
                out.push(EnergyLine::new(
                    "dcalE1-star",
                    Le,
                    dce1,
                    &[head[0], head[1], -ga * na_star * na_star, -c.c3 * ga * psi],
                ));
                out.push(EnergyLine::new(
                    "dcalE2",
                    Le,
                    dce2,
                    &[-2.0 * nu * e.e0, -nu * nla * nla, 2.0 * c.c4 * nu * na * e.e0.sqrt()],
                ));
            }
        }
        Variant::SubcriticalQG => {
            out.push(EnergyLine::new("dE0", Eq, de0, &[-2.0 * nu * e.e1, -2.0 * nu * a2 * e.e0]));
            out.push(EnergyLine::new(
                "dE1",
                Eq,
                de1,
                &[-2.0 * nu * e.e2_sub, -2.0 * nu * a2 * e.e1, -2.0 * ga * e.cal_e1],
            ));
            let a = apply_a(state, params)?;
            let ady = apply_a(&state.deriv_y(), params)?;
            out.push(EnergyLine::new(
                "dcalE2",
                Le,
                dce2,
                &[-2.0 * nu * e.e_half, -2.0 * nu * ady.norm_l2().powi(2)],
            ));
            if let Some(c) = consts {
                let psi = psi_gradient_sum(state);
                let lead = -nu * (2.0 * a2 + 1.0) * e.cal_e1;
                out.push(
                    EnergyLine::new(
                        "dcalE1",
                        Le,
                        dce1,
                        &[
                            lead,
                            2.0 * nu * ady.norm_l2() * e.e2_sub.sqrt(),
                            -ga * a.norm_l2().powi(2),
                            -c.c3 * ga * psi,
                        ],
                    )
                    .report_only(),
                );
                out.push(EnergyLine::new(
                    "dcalE1-star",
                    Le,
                    dce1,
                    &[
                        lead,
                        2.0 * nu * ady.norm_star() * e.e2_sub.sqrt(),
                        -ga * a.norm_star().powi(2),
                        -c.c3 * ga * psi,
                    ],
                ));
            }
        }
        Variant::ToyFractional => {
            out.push(EnergyLine::new("dE0", Eq, de0, &[-2.0 * nu * e.e_half]));
            out.push(EnergyLine::new("dE1", Eq, de1, &[-2.0 * nu * e.e_3half, -2.0 * ga * e.cal_e1]));
            let sn = apply_a(state, params)?;
            let nls = sn.norm_sobolev(0.5);
            out.push(EnergyLine::new(
                "dcalE1",
                Le,
                dce1,
                &[2.0 * nu * nls * e.e_3half.sqrt(), 4.0 * nu * e.e_half, -ga * e.cal_e2],
            ));
            out.push(EnergyLine::new(
                "dcalE2",
                Le,
                dce2,
                &[-2.0 * nu * nls * nls, 4.0 * nu * e.e0.sqrt() * cal_e2(state, params)?.sqrt()],
            ));
        }
        _ => {
            let d0 = state.weighted_norm_sq(|b| g.symbol(b).powf(s) * params.k_symbol(b));
            let d1 = state.weighted_norm_sq(|b| (b * b) as f64 * g.symbol(b).powf(s) * params.k_symbol(b));
            out.push(EnergyLine::new("dE0", Eq, de0, &[-2.0 * nu * d0]));
            out.push(EnergyLine::new("dE1", Eq, de1, &[-2.0 * nu * d1, -2.0 * ga * e.cal_e1]));
        }
    }
    Ok(out)
}

/// All enforced lines of [`energy_lines`] folded into one report; report-only margins go
/// to the note.
pub fn check_prop_energy(
    state: &SpectralField,
    params: &ModelParams,
    t: f64,
    consts: Option<&ConstantSet>,
) -> Result<CheckReport> {
    let lines = energy_lines(state, params, t, consts)?;
    let mut tally = Tally::new(format!("prop-energy:{}", params.variant.label()), TOL_INEQUALITY);
    tally.trial();
    for l in &lines {
        if l.enforced {
            // Rescale so every line is compared against the shared tolerance.
            tally.record(l.violation() * TOL_INEQUALITY / l.tolerance(), Some(state));
        } else {
            tally.note(format!("{} (not enforced) margin {:.3e}", l.name, -l.violation()));
        }
    }
    Ok(tally.finish())
}

/// Integrates with a forced sample at the window end `ν^{-q}` of `family`.
pub fn phi_trajectory(
    init: &SpectralField,
    params: &ModelParams,
    family: PhiFamily,
    t_end: f64,
    policy: &StepPolicy,
) -> Result<Trajectory> {
    let tw = window_end(family, params.nu);
    if t_end <= tw {
        return evolve_interval(init, params, 0.0, t_end, policy);
    }
    let mut first = evolve_interval(init, params, 0.0, tw, policy)?;
    let last = first.states.last().cloned().expect("trajectory has samples");
    let second = evolve_interval(&last, params, tw, t_end, policy)?;
    first.times.extend(second.times.into_iter().skip(1));
    first.states.extend(second.states.into_iter().skip(1));
    first.steps += second.steps;
    Ok(first)
}

fn window_rate(family: PhiFamily, c: &ConstantSet, nu: f64, t: f64) -> f64 {
    match family {
        PhiFamily::Critical => c.a3 * nu.powi(3) * t.powi(4),
        PhiFamily::Sub => c.a3_sub * nu.powf(1.5) * t.powf(2.5),
        PhiFamily::Toy if t >= 1.0 => 2f64.powi(-35) * nu * nu * t * t,
        PhiFamily::Toy => 0.0,
    }
}

fn tilde_rate(family: PhiFamily, c: &ConstantSet, nu: f64) -> f64 {
    match family {
        PhiFamily::Critical => c.a3 * nu.powf(0.6),
        PhiFamily::Sub => c.a3_sub * nu.powf(3.0 / 7.0),
        PhiFamily::Toy => 2f64.powi(-35) * nu.powf(2.0 / 3.0),
    }
}

/// Monotone decay of the composite functional along a trajectory.
///
/// On the window: `ΔΦ <= -∫ rate·E0`, `Φ >= E0`; at the window end the two forms agree;
/// after it (up to `1/ν`): `Φ̃` decays at its exponential rate, `E0 <= Φ̃` and
/// `E0(t) <= 2 e^{-r t} E0(0)`. Each violation is relative to `Φ(0)`.
pub fn check_phi_monotone(traj: &Trajectory, family: PhiFamily, consts: &ConstantSet) -> Result<CheckReport> {
    let params = &traj.params;
    let nu = params.nu;
    let tw = window_end(family, nu);
    let near = |t: f64| (t - tw).abs() <= 1e-9 * tw;
    let snaps: Vec<EnergySnapshot> = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| eval_base(s, params).map(|e| e.at_time(t)))
        .collect::<Result<_>>()?;
    let early = |s: &EnergySnapshot| family.eval(&EnergySnapshot { t: s.t.min(tw), ..*s }, consts, nu).0;
    let late = |s: &EnergySnapshot| {
        let probe = EnergySnapshot { t: f64::INFINITY, ..*s };
        family.eval(&probe, consts, nu).0
    };

    let mut tally = Tally::new(format!("lem-decay:{family:?}"), TOL_TRAJECTORY);
    let phi0 = early(&snaps[0]);
    if phi0 <= 0.0 {
        return Err(LabError::Precondition("initial energy must be positive".into()));
    }
    let in_window = snaps.iter().filter(|s| s.t <= tw || near(s.t)).count();
    if in_window < 50 {
        tally.note(format!("only {in_window} samples inside the window, 50 required"));
        tally.record(f64::INFINITY, None);
    }

    let toy_floor = |t: f64| family != PhiFamily::Toy || t >= 1.0;
    let mut handoff = false;
    for (i, s) in snaps.iter().enumerate() {
        tally.trial();
        let state = &traj.states[i];
        let inside = s.t <= tw || near(s.t);
        if inside {
            if toy_floor(s.t) {
                tally.record((s.e0 - early(s)) / phi0, Some(state));
            }
            if near(s.t) {
                handoff = true;
                tally.record((early(s) - late(s)).abs() / phi0, Some(state));
            }
        } else if s.t <= 1.0 / nu {
            tally.record((s.e0 - late(s)) / phi0, Some(state));
            let r = tilde_rate(family, consts, nu);
            tally.record((s.e0 - 2.0 * (-r * s.t).exp() * snaps[0].e0) / phi0, Some(state));
        }
        if i == 0 {
            continue;
        }
        let p = &snaps[i - 1];
        let dt = s.t - p.t;
        let prev_inside = p.t <= tw || near(p.t);
        if inside && prev_inside {
            let integral = 0.5 * dt
                * (window_rate(family, consts, nu, p.t) * p.e0 + window_rate(family, consts, nu, s.t) * s.e0);
            tally.record((early(s) - early(p) + integral) / phi0, Some(state));
        } else if !inside && (!prev_inside || near(p.t)) && s.t <= 1.0 / nu {
            let r = tilde_rate(family, consts, nu);
            tally.record((late(s) - late(p) * (-r * dt).exp()) / phi0, Some(state));
        }
    }
    if !handoff && snaps.last().is_some_and(|s| s.t > tw) {
        tally.note("no sample at the window end");
        tally.record(f64::INFINITY, None);
    }
    Ok(tally.finish())
}
