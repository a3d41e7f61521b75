//! Enhanced-dissipation rates over viscosity sweeps and their power-law fits.

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::propagator::{evolve_interval_with_sink, SinkFlow, StepPolicy};
use crate::random::InitSpec;
use crate::spectral::{ModelParams, ShearProfile, SpectralGrid, Variant};
use crate::spectrum::{resolution_rule, resolved_spectrum, ResolutionPolicy};

/// Half-width of the band around the guaranteed exponent counted as a match.
pub const EXPONENT_TOL: f64 = 0.08;

/// Fewest amplitude samples accepted for a time-domain slope.
pub const MIN_WINDOW_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RateRoute {
    Spectral,
    TimeDomain,
}

/// Fitted exponent against the guaranteed one. Rates behave like `c ν^p`, so a smaller `p`
/// is a faster rate at small `ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitVerdict {
    Within,
    FasterThanGuaranteed,
    Slower,
}

impl FitVerdict {
    pub fn passes(self) -> bool {
        self != FitVerdict::Slower
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub nu: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub label: String,
    pub template: ModelParams,
    pub nu_values: Vec<f64>,
    pub rates: Vec<f64>,
    /// Truncation used at each retained point.
    pub n_used: Vec<usize>,
    pub c: f64,
    pub p: f64,
    pub r_squared: f64,
    pub route: RateRoute,
    pub predicted: Option<f64>,
    pub skipped: Vec<SkippedPoint>,
}

impl RateFit {
    pub fn verdict(&self, tol: f64) -> Option<FitVerdict> {
        let q = self.predicted?;
        Some(if self.p > q + tol {
            FitVerdict::Slower
        } else if self.p < q - tol {
            FitVerdict::FasterThanGuaranteed
        } else {
            FitVerdict::Within
        })
    }

    /// Least-squares prefactor of `κ ν^q` with `q` pinned to the predicted exponent.
    pub fn predicted_prefactor(&self) -> Option<f64> {
        let q = self.predicted?;
        let m = self
            .nu_values
            .iter()
            .zip(&self.rates)
            .map(|(nu, r)| r.ln() - q * nu.ln())
            .sum::<f64>()
            / self.rates.len() as f64;
        Some(m.exp())
    }

    /// Largest `κ` with `rate(ν) ≥ κ ν^q` at every retained point.
    pub fn guaranteed_prefactor(&self) -> Option<f64> {
        let q = self.predicted?;
        self.nu_values
            .iter()
            .zip(&self.rates)
            .map(|(nu, r)| r / nu.powf(q))
            .reduce(f64::min)
    }

    /// `nu,rate,predicted_rate` rows; the last column is empty without a predicted exponent.
    pub fn csv(&self) -> String {
        let mut s = String::from("nu,rate,predicted_rate\n");
        let k = self.predicted_prefactor();
        for (nu, r) in self.nu_values.iter().zip(&self.rates) {
            match (k, self.predicted) {
                (Some(k), Some(q)) => s.push_str(&format!("{nu:.16e},{r:.16e},{:.16e}\n", k * nu.powf(q))),
                _ => s.push_str(&format!("{nu:.16e},{r:.16e},\n")),
            }
        }
        s
    }
}

/// Ordinary least squares of `ln y` on `ln x`, returning `(c, p, r²)` for `y ≈ c x^p`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(LabError::Fit(format!("{} points, need at least 3", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(LabError::Fit(format!("nonpositive point ({x}, {y})")));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let p = sxy / sxx;
    let b = my - p * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - b - p * x).powi(2)).sum();
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok((b.exp(), p, r2))
}

fn check_sweep(nu_values: &[f64]) -> Result<()> {
    if nu_values.len() < 4 {
        return Err(LabError::Precondition(format!("{} viscosities, need at least 4", nu_values.len())));
    }
    if nu_values.iter().any(|nu| !(nu.is_finite() && *nu > 0.0)) {
        return Err(LabError::Precondition("viscosities must be positive".into()));
    }
    let lo = nu_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = nu_values.iter().copied().fold(0.0, f64::max);
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(LabError::Precondition(format!("sweep [{lo:e}, {hi:e}] spans less than two decades")));
    }
    Ok(())
}

fn assemble_fit(
    template: &ModelParams,
    nu_values: &[f64],
    outcomes: Vec<Result<(f64, usize)>>,
    route: RateRoute,
) -> Result<RateFit> {
    let mut nus = Vec::new();
    let mut rates = Vec::new();
    let mut n_used = Vec::new();
    let mut skipped = Vec::new();
    for (&nu, out) in nu_values.iter().zip(outcomes) {
        match out {
            Ok((r, _)) if !(r > 0.0 && r.is_finite()) => {
                skipped.push(SkippedPoint { nu, reason: format!("nonpositive rate {r:e}") })
            }
            Ok((r, n)) => {
                nus.push(nu);
                rates.push(r);
                n_used.push(n);
            }
            Err(e) => {
                warn!("nu = {nu:e} skipped: {e}");
                skipped.push(SkippedPoint { nu, reason: e.to_string() });
            }
        }
    }
    if nus.len() < 4 {
        return Err(LabError::Fit(format!(
            "only {} of {} points survived: {:?}",
            nus.len(),
            nu_values.len(),
            skipped
        )));
    }
    let pts: Vec<(f64, f64)> = nus.iter().copied().zip(rates.iter().copied()).collect();
    let (c, p, r_squared) = fit_power_law(&pts)?;
    let predicted = match template.gamma_schedule {
        crate::spectral::GammaSchedule::Off => Some(1.0),
        _ => template.variant.predicted_exponent(),
    };
    info!("{} ({route:?}): p = {p:.4} (predicted {predicted:?}), r² = {r_squared:.6}", template.variant);
    Ok(RateFit {
        label: template.variant.label(),
        template: template.clone(),
        nu_values: nus,
        rates,
        n_used,
        c,
        p,
        r_squared,
        route,
        predicted,
        skipped,
    })
}

/// Spectral-abscissa rates at each `ν`, resolved by `policy`, then a power-law fit.
pub fn sweep_spectral(template: &ModelParams, nu_values: &[f64], policy: &ResolutionPolicy) -> Result<RateFit> {
    check_sweep(nu_values)?;
    let outcomes: Vec<Result<(f64, usize)>> = nu_values
        .par_iter()
        .map(|&nu| {
            let p = template.with_nu(nu)?;
            let rep = resolved_spectrum(&p, policy)?;
            Ok((rep.abscissa, rep.params.grid.n_trunc()))
        })
        .collect();
    assemble_fit(template, nu_values, outcomes, RateRoute::Spectral)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDomainOptions {
    pub step: StepPolicy,
    /// Integrate up to `horizon / ν` at most.
    pub horizon: f64,
    /// Starting truncation; `None` uses [`resolution_rule`].
    pub n_trunc: Option<usize>,
    /// Truncation growth factor after a tail-mass breach.
    pub growth: f64,
    pub n_max: usize,
}

impl Default for TimeDomainOptions {
    fn default() -> Self {
        Self {
            // RK4 damps an imaginary eigenvalue by about |λ|⁶dt⁵/144 per unit time; at
            // dt = 0.05 and |λ| ≤ 3 that stays below 1e-6, under the smallest rates swept.
            step: StepPolicy {
                dt_max: 0.05,
                sample_stride: 10,
                ..StepPolicy::default()
            },
            horizon: 1.0,
            n_trunc: None,
            growth: 1.5,
            n_max: 4096,
        }
    }
}

/// Default amplitude window `(lo, hi)`.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-1, 1e-4);

/// Decay rate of `‖θ(t)‖` while it lies in `[hi, lo]·‖θ(0)‖`, from a least-squares slope of
/// `ln ‖θ‖` against `t`. Returns the rate and the number of samples used.
pub fn time_domain_rate(
    params: &ModelParams,
    init: &InitSpec,
    window: (f64, f64),
    opts: &TimeDomainOptions,
) -> Result<(f64, usize)> {
    let (lo, hi) = window;
    if !(0.0 < hi && hi < lo && lo < 1.0) {
        return Err(LabError::Precondition(format!("window ({lo}, {hi}) needs 0 < hi < lo < 1")));
    }
    let theta0 = init.realize(params.grid)?;
    let n0 = theta0.norm_l2();
    let t_end = opts.horizon / params.nu;
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut exited = false;
    evolve_interval_with_sink(&theta0, params, 0.0, t_end, &opts.step, &mut |t, f| {
        let a = f.norm_l2() / n0;
        if a < hi {
            exited = true;
            return Ok(SinkFlow::Stop);
        }
        if a <= lo {
            samples.push((t, a.ln()));
        }
        Ok(SinkFlow::Continue)
    })?;
    if samples.len() < MIN_WINDOW_SAMPLES {
        return Err(LabError::Precondition(format!(
            "amplitude window entered for {} samples before t = {t_end:e}",
            samples.len()
        )));
    }
    if !exited {
        warn!("{}: amplitude stayed above {hi:e} up to t = {t_end:e}", params.variant);
    }
    let n = samples.len() as f64;
    let mt = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let ml = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let stt: f64 = samples.iter().map(|s| (s.0 - mt).powi(2)).sum();
    let stl: f64 = samples.iter().map(|s| (s.0 - mt) * (s.1 - ml)).sum();
    Ok((-stl / stt, samples.len()))
}

/// [`time_domain_rate`] on the template's grid, enlarged until the run stays inside the
/// tail-mass limit. Returns the rate and the truncation used.
pub fn resolved_time_domain_rate(
    params: &ModelParams,
    init: &InitSpec,
    window: (f64, f64),
    opts: &TimeDomainOptions,
) -> Result<(f64, usize)> {
    let mut n = opts.n_trunc.unwrap_or_else(|| resolution_rule(params.nu)).min(opts.n_max);
    loop {
        let p = params.with_grid(params.grid.with_n_trunc(n)?)?;
        match time_domain_rate(&p, init, window, opts) {
            Err(LabError::TailMassBreach { .. }) if n < opts.n_max => {
                n = ((n as f64 * opts.growth).ceil() as usize).min(opts.n_max);
            }
            Err(e) => return Err(e),
            Ok((r, _)) => return Ok((r, n)),
        }
    }
}

/// Time-domain rates at each `ν` on the template's schedule, then a power-law fit.
pub fn sweep_time_domain(
    template: &ModelParams,
    nu_values: &[f64],
    init: &InitSpec,
    window: (f64, f64),
    opts: &TimeDomainOptions,
) -> Result<RateFit> {
    check_sweep(nu_values)?;
    let outcomes: Vec<Result<(f64, usize)>> = nu_values
        .par_iter()
        .map(|&nu| {
            let p = template.with_nu(nu)?;
            resolved_time_domain_rate(&p, init, window, opts)
        })
        .collect();
    assemble_fit(template, nu_values, outcomes, RateRoute::TimeDomain)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExponentFamily {
    /// Nonlocal family with `s̃ = 1/2`.
    Nonlocal,
    /// Local family with cosine shear.
    Toy,
}

/// One spectral fit per dissipation order `s`, each carrying its predicted exponent.
pub fn sweep_general_exponent(
    s_values: &[f64],
    family: ExponentFamily,
    grid: SpectralGrid,
    nu_values: &[f64],
    policy: &ResolutionPolicy,
) -> Result<Vec<RateFit>> {
    if let Some(s) = s_values.iter().find(|s| !(**s > 0.0 && **s <= 1.0)) {
        return Err(LabError::Precondition(format!("s = {s} outside (0, 1]")));
    }
    s_values
        .iter()
        .map(|&s| {
            let variant = match family {
                ExponentFamily::Nonlocal => Variant::GeneralNonlocal { s, s_tilde: 0.5 },
                ExponentFamily::Toy => Variant::GeneralShearToy {
                    s,
                    profile: ShearProfile::cosine(),
                },
            };
            let template = ModelParams::new(variant, nu_values[0], grid, crate::spectral::GammaSchedule::Frozen)?;
            sweep_spectral(&template, nu_values, policy)
        })
        .collect()
}
