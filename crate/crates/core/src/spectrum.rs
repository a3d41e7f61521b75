//! Spectra of the frozen generator, the least-damped eigenpair and eigenvector ratio traces.

use faer::Mat;
use log::debug;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{self, ParityBlocks};
use crate::spectral::{apply_a, assemble_matrix, GammaSchedule, ModelParams, SpectralField};

/// Largest truncation handled by the dense eigensolver.
pub const DENSE_MAX_N: usize = 2048;

/// Real parts closer than this, relative to `max(1, max |λ|)`, count as tied.
const DEGENERACY_TOL: f64 = 1e-10;

/// Relative distance under which two computed eigenvalues are taken as the same value; the
/// generator is far from normal and the solver returns its eigenvalues to about this.
const SAME_VALUE_REL: f64 = 1e-7;

fn tie_tolerance(ev: &[(C64, u8)]) -> f64 {
    DEGENERACY_TOL * ev.iter().map(|(z, _)| z.norm()).fold(1.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub params: ModelParams,
    pub gamma: f64,
    pub eigenvalues: Vec<C64>,
    pub least_damped: (C64, SpectralField),
    /// `min Re λ`.
    pub abscissa: f64,
    /// `‖Lv - λv‖ / ‖v‖` for the least-damped pair.
    pub residual: f64,
    /// Residual divided by the Frobenius norm of `L`.
    pub relative_residual: f64,
    /// Other eigenvalues (conjugate partner excluded) whose real part ties with the abscissa.
    pub degenerate_with: Vec<C64>,
    /// L² mass fraction of the least-damped eigenvector in `|β| > 3N/4`.
    pub outer_mass: f64,
}

impl SpectrumReport {
    /// `re,im` rows in ascending real part.
    pub fn eigenvalues_csv(&self) -> String {
        let mut s = String::from("re,im\n");
        for z in &self.eigenvalues {
            s.push_str(&format!("{:.16e},{:.16e}\n", z.re, z.im));
        }
        s
    }
}

/// `γ` used for spectral work: `α` unless coupling is switched off.
pub fn frozen_gamma(params: &ModelParams) -> f64 {
    match params.gamma_schedule {
        GammaSchedule::Off => 0.0,
        _ => params.alpha(),
    }
}

fn check_budget(params: &ModelParams) -> Result<()> {
    let n = params.grid.n_trunc();
    if n > DENSE_MAX_N {
        return Err(LabError::Precondition(format!(
            "N = {n} exceeds the dense eigensolver budget {DENSE_MAX_N}"
        )));
    }
    Ok(())
}

fn sort_by_re(v: &mut [C64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

struct Blocks {
    full: Mat<C64>,
    parity: Option<ParityBlocks>,
}

fn blocks(params: &ModelParams, gamma: f64) -> Blocks {
    let full = assemble_matrix(params, gamma).into_entries();
    let parity = ParityBlocks::split(&full, params.grid.n_trunc(), 1e-14);
    Blocks { full, parity }
}

/// Eigenvalues of every block, tagged with the block they came from (0 full, 1 even, 2 odd).
fn tagged_eigenvalues(b: &Blocks) -> Result<Vec<(C64, u8)>> {
    match &b.parity {
        Some(p) => {
            let (even, odd) = rayon::join(|| linalg::eigenvalues(&p.even), || linalg::eigenvalues(&p.odd));
            let mut out: Vec<(C64, u8)> = even?.into_iter().map(|z| (z, 1)).collect();
            out.extend(odd?.into_iter().map(|z| (z, 2)));
            Ok(out)
        }
        None => Ok(linalg::eigenvalues(&b.full)?.into_iter().map(|z| (z, 0)).collect()),
    }
}

/// Index of the least-damped eigenvalue; among a conjugate pair the one with nonnegative
/// imaginary part.
fn pick_least_damped(ev: &[(C64, u8)]) -> usize {
    let (min_i, _) = ev
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.re.total_cmp(&b.1 .0.re))
        .expect("nonempty spectrum");
    let min = ev[min_i].0;
    let tol = SAME_VALUE_REL * min.norm();
    (0..ev.len())
        .filter(|&i| ev[i].0.re <= min.re + tol)
        .max_by(|&a, &b| ev[a].0.im.total_cmp(&ev[b].0.im))
        .expect("nonempty spectrum")
}

/// Unit L² norm; the first coefficient above `1e-8·max` made real positive.
pub fn fix_phase(v: &SpectralField) -> SpectralField {
    let n = v.norm_l2();
    let max = v.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pivot = v
        .coeffs()
        .iter()
        .find(|c| c.norm() > 1e-8 * max)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = pivot.conj() / pivot.norm();
    v.scale(phase / n)
}

/// Fraction of L² mass in `|β| > 3N/4`.
pub fn outer_quarter_mass(v: &SpectralField) -> f64 {
    v.tail_mass(v.grid().n_trunc() / 4)
}

/// Full spectrum of the assembled `L = ν(-Δ_α)^s + iγB` and its least-damped eigenpair.
pub fn full_spectrum(params: &ModelParams, gamma: f64) -> Result<SpectrumReport> {
    check_budget(params)?;
    let b = blocks(params, gamma);
    let tagged = tagged_eigenvalues(&b)?;
    let pick = pick_least_damped(&tagged);
    let (lambda, tag) = tagged[pick];
    let vec_full = match (&b.parity, tag) {
        (Some(p), 1) => p.lift_even(&linalg::inverse_iteration(&p.even, lambda, 3)?),
        (Some(p), 2) => p.lift_odd(&linalg::inverse_iteration(&p.odd, lambda, 3)?),
        _ => linalg::inverse_iteration(&b.full, lambda, 3)?,
    };
    let residual = linalg::residual(&b.full, lambda, &vec_full);
    let fro = b.full.norm_l2();
    let v = fix_phase(&SpectralField::from_coeffs(params.grid, vec_full)?);

    let tol = tie_tolerance(&tagged);
    let degenerate_with: Vec<C64> = tagged
        .iter()
        .enumerate()
        .filter(|&(i, (z, _))| {
            i != pick
                && (z - lambda.conj()).norm() > SAME_VALUE_REL * lambda.norm()
                && (z.re - lambda.re).abs() <= tol
        })
        .map(|(_, (z, _))| *z)
        .collect();

    let mut eigenvalues: Vec<C64> = tagged.into_iter().map(|(z, _)| z).collect();
    sort_by_re(&mut eigenvalues);
    Ok(SpectrumReport {
        params: params.clone(),
        gamma,
        eigenvalues,
        outer_mass: outer_quarter_mass(&v),
        least_damped: (lambda, v),
        abscissa: lambda.re,
        residual,
        relative_residual: residual / fro.max(1e-300),
        degenerate_with,
    })
}

/// `min Re λ` of the frozen generator (`γ = α`, or 0 when coupling is off).
pub fn decay_abscissa(params: &ModelParams) -> Result<f64> {
    check_budget(params)?;
    let b = blocks(params, frozen_gamma(params));
    let ev = tagged_eigenvalues(&b)?;
    Ok(ev.iter().map(|(z, _)| z.re).fold(f64::INFINITY, f64::min))
}

/// Resolution rule `max(64, ceil(4 ν^{-1/2}))`, capped at 512.
pub fn resolution_rule(nu: f64) -> usize {
    ((4.0 / nu.sqrt()).ceil() as usize).clamp(64, 512)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolutionPolicy {
    /// Starting truncation; `None` uses [`resolution_rule`].
    pub n_start: Option<usize>,
    pub growth: f64,
    pub n_max: usize,
    /// Accept once the least-damped eigenvector has at most this mass in `|β| > 3N/4`.
    pub outer_mass_tol: f64,
}

impl Default for ResolutionPolicy {
    fn default() -> Self {
        Self {
            n_start: None,
            growth: 1.5,
            n_max: DENSE_MAX_N,
            outer_mass_tol: 1e-8,
        }
    }
}

/// Spectrum at the smallest truncation (from the policy's ladder) whose least-damped
/// eigenvector is resolved.
///
/// Eigenvalues bound to the truncation boundary have real parts growing with `N`; they
/// can undercut the physical abscissa on coarse grids and are recognised by their
/// eigenvector mass near `|β| = N`.
pub fn resolved_spectrum(params: &ModelParams, policy: &ResolutionPolicy) -> Result<SpectrumReport> {
    let mut n = policy.n_start.unwrap_or_else(|| resolution_rule(params.nu)).min(policy.n_max);
    loop {
        let grid = params.grid.with_n_trunc(n)?;
        let p = params.with_grid(grid)?;
        let rep = full_spectrum(&p, frozen_gamma(&p))?;
        debug!("N = {n}: abscissa {:.6e}, outer mass {:.2e}", rep.abscissa, rep.outer_mass);
        if rep.outer_mass <= policy.outer_mass_tol {
            return Ok(rep);
        }
        if n >= policy.n_max {
            return Err(LabError::Eigen(format!(
                "least-damped mode unresolved at N = {n} (outer mass {:.2e})",
                rep.outer_mass
            )));
        }
        n = ((n as f64 * policy.growth).ceil() as usize).min(policy.n_max);
    }
}

/// Which operator and negative norm enter the ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioKind {
    /// `‖Aθ‖ / ‖θ‖_{H^{-s̃}}` (nonlocal) or `‖A^S θ‖ / ‖θ‖_{H^{-1}}` (toy).
    Conjectured,
    /// Same numerator over `‖θ‖_{L²}`.
    ExponentZero,
}

/// Ratio for one eigenvector.
pub fn eigen_ratio(v: &SpectralField, params: &ModelParams, kind: RatioKind) -> Result<f64> {
    let num = apply_a(v, params)?.norm_l2();
    let r = match kind {
        RatioKind::Conjectured => -params.s_tilde().unwrap_or(1.0),
        RatioKind::ExponentZero => 0.0,
    };
    Ok(num / v.norm_sobolev(r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureTrace {
    pub label: String,
    pub nu_values: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Ratios with the negative norm replaced by L².
    pub ratios_exponent_zero: Vec<f64>,
    pub abscissae: Vec<f64>,
    pub n_used: Vec<usize>,
    /// Ratio of a second candidate where the least-damped eigenvalue is degenerate.
    pub alternate_ratios: Vec<Option<f64>>,
    pub max_min_ratio: f64,
    pub max_min_ratio_exponent_zero: f64,
}

impl ConjectureTrace {
    pub fn csv(&self) -> String {
        let mut s = String::from("nu,ratio,ratio_exponent_zero,abscissa,n_trunc\n");
        for i in 0..self.nu_values.len() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                self.nu_values[i],
                self.ratios[i],
                self.ratios_exponent_zero[i],
                self.abscissae[i],
                self.n_used[i]
            ));
        }
        s
    }
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

/// Eigenvector ratios of the least-damped mode across `nu_values`.
pub fn conjecture_trace(
    template: &ModelParams,
    nu_values: &[f64],
    policy: &ResolutionPolicy,
) -> Result<ConjectureTrace> {
    if nu_values.is_empty() || nu_values.iter().any(|&n| !(n > 0.0)) {
        return Err(LabError::InvalidParams("nu values must be positive".into()));
    }
    if nu_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::InvalidParams("nu values must be strictly increasing".into()));
    }
    let rows: Vec<(f64, f64, f64, usize, Option<f64>)> = nu_values
        .par_iter()
        .map(|&nu| -> Result<_> {
            let p = template.with_nu(nu)?;
            let rep = resolved_spectrum(&p, policy)?;
            let v = &rep.least_damped.1;
            let rp = &rep.params;
            let ratio = eigen_ratio(v, rp, RatioKind::Conjectured)?;
            let zero = eigen_ratio(v, rp, RatioKind::ExponentZero)?;
            let alternate = match rep.degenerate_with.first() {
                Some(&mu) => {
                    let m = assemble_matrix(rp, rep.gamma).into_entries();
                    let w = linalg::inverse_iteration(&m, mu, 3)?;
                    let f = SpectralField::from_coeffs(rp.grid, w)?;
                    Some(eigen_ratio(&f, rp, RatioKind::Conjectured)?)
                }
                None => None,
            };
            Ok((ratio, zero, rep.abscissa, rp.grid.n_trunc(), alternate))
        })
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let zero: Vec<f64> = rows.iter().map(|r| r.1).collect();
    Ok(ConjectureTrace {
        label: template.variant.label(),
        nu_values: nu_values.to_vec(),
        max_min_ratio: spread(&ratios),
        max_min_ratio_exponent_zero: spread(&zero),
        ratios,
        ratios_exponent_zero: zero,
        abscissae: rows.iter().map(|r| r.2).collect(),
        n_used: rows.iter().map(|r| r.3).collect(),
        alternate_ratios: rows.iter().map(|r| r.4).collect(),
    })
}
