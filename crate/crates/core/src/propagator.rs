//! Time integration of `∂_t θ = -L(t) θ`.

use faer::Mat;
use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg;
use crate::spectral::{GammaSchedule, Generator, ModelParams, OperatorMatrix, SpectralField};

/// Stability interval of classical RK4 along the negative real axis.
pub const RK4_STABILITY: f64 = 2.8;

/// Largest grid for which the dense exponential path is offered.
pub const EXPM_MAX_N: usize = 256;

/// Returned by a sample sink; `Stop` ends the integration after the current sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinkFlow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepMethod {
    Rk4,
    FrozenExpm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub method: StepMethod,
    pub dt_max: f64,
    pub safety: f64,
    pub sample_stride: usize,
    /// Abort once `tail_mass(state, 2)` exceeds this.
    pub tail_limit: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            method: StepMethod::Rk4,
            dt_max: 0.1,
            safety: 0.5,
            sample_stride: 10,
            tail_limit: 1e-6,
        }
    }
}

impl StepPolicy {
    fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(LabError::Precondition(format!("dt_max = {} must be positive", self.dt_max)));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(LabError::Precondition(format!("safety = {} outside (0, 1]", self.safety)));
        }
        if self.sample_stride == 0 {
            return Err(LabError::Precondition("sample_stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SpectralField>,
    pub params: ModelParams,
    pub dt: f64,
    pub steps: usize,
}

/// Fraction of L² mass in modes `|β| > N - k`.
pub fn tail_mass(state: &SpectralField, k: usize) -> f64 {
    state.tail_mass(k)
}

/// Spectral radius bound `ν(α²+N²)^s + |γ| Σ|w_k| sup|K|` at time `t`.
pub fn stiffness(params: &ModelParams, t: f64) -> f64 {
    Generator::new(params).spectral_radius_bound(params.gamma(t), &params.variant.shear())
}

/// Largest admissible RK4 step at time `t` for a given safety factor.
pub fn stable_dt(params: &ModelParams, t: f64, safety: f64) -> f64 {
    safety * RK4_STABILITY / stiffness(params, t)
}

struct Rk4Work {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    tmp: Vec<C64>,
}

impl Rk4Work {
    fn new(n: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); n];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }
}

fn rk4_in_place(gen: &Generator, params: &ModelParams, x: &mut [C64], t: f64, dt: f64, w: &mut Rk4Work) {
    let g0 = params.gamma(t);
    let gh = params.gamma(t + 0.5 * dt);
    let g1 = params.gamma(t + dt);
    gen.apply_neg(g0, x, &mut w.k1);
    for i in 0..x.len() {
        w.tmp[i] = x[i] + 0.5 * dt * w.k1[i];
    }
    gen.apply_neg(gh, &w.tmp, &mut w.k2);
    for i in 0..x.len() {
        w.tmp[i] = x[i] + 0.5 * dt * w.k2[i];
    }
    gen.apply_neg(gh, &w.tmp, &mut w.k3);
    for i in 0..x.len() {
        w.tmp[i] = x[i] + dt * w.k3[i];
    }
    gen.apply_neg(g1, &w.tmp, &mut w.k4);
    for i in 0..x.len() {
        x[i] += dt / 6.0 * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    }
}

/// One classical RK4 step with `γ` evaluated at each stage time.
pub fn step_rk4(state: &SpectralField, params: &ModelParams, t: f64, dt: f64) -> Result<SpectralField> {
    if *state.grid() != params.grid {
        return Err(LabError::GridMismatch);
    }
    if dt < 0.0 {
        return Err(LabError::Precondition(format!("negative step {dt}")));
    }
    let bound = stable_dt(params, t, 1.0);
    if dt > bound {
        return Err(LabError::StabilityViolation { dt, bound });
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let gen = Generator::new(params);
    let mut x = state.coeffs().to_vec();
    let mut w = Rk4Work::new(x.len());
    rk4_in_place(&gen, params, &mut x, t, dt, &mut w);
    SpectralField::from_coeffs(params.grid, x)
}

/// `exp(-t L) state`.
pub fn expm_propagate(state: &SpectralField, matrix: &OperatorMatrix, t: f64) -> Result<SpectralField> {
    if t < 0.0 {
        return Err(LabError::Precondition(format!("negative time {t}")));
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let e = propagator_matrix(matrix, t);
    if *state.grid() != *matrix.grid() {
        return Err(LabError::GridMismatch);
    }
    SpectralField::from_coeffs(*state.grid(), linalg::mat_vec(&e, state.coeffs()))
}

/// Dense `exp(-t L)`.
pub fn propagator_matrix(matrix: &OperatorMatrix, t: f64) -> Mat<C64> {
    let m = matrix.entries();
    let a = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (-t));
    linalg::expm(&a)
}

/// Integrates to `t_end`, handing every sampled `(t, state)` to `sink`.
///
/// Returns the sample times; states are not retained.
pub fn evolve_with_sink(
    init: &SpectralField,
    params: &ModelParams,
    t_end: f64,
    policy: &StepPolicy,
    sink: &mut dyn FnMut(f64, &SpectralField) -> Result<SinkFlow>,
) -> Result<(Vec<f64>, f64, usize)> {
    evolve_interval_with_sink(init, params, 0.0, t_end, policy, sink)
}

/// As [`evolve_with_sink`], starting from `init` at time `t0`.
pub fn evolve_interval_with_sink(
    init: &SpectralField,
    params: &ModelParams,
    t0: f64,
    t_end: f64,
    policy: &StepPolicy,
    sink: &mut dyn FnMut(f64, &SpectralField) -> Result<SinkFlow>,
) -> Result<(Vec<f64>, f64, usize)> {
    policy.validate()?;
    if *init.grid() != params.grid {
        return Err(LabError::GridMismatch);
    }
    if !(t0 >= 0.0 && t_end > t0 && t_end.is_finite()) {
        return Err(LabError::Precondition(format!("interval [{t0}, {t_end}] is empty or invalid")));
    }
    let span = t_end - t0;
    if params.gamma_schedule == GammaSchedule::Decaying && t_end > 1.0 / params.nu {
        warn!(
            "t_end = {t_end} is past 1/nu = {}; the decaying schedule is outside the validity window",
            1.0 / params.nu
        );
    }

    let mut dt_target = policy.dt_max;
    if policy.method == StepMethod::Rk4 {
        dt_target = dt_target.min(stable_dt(params, t0, policy.safety));
    }
    let steps = (span / dt_target).ceil().max(1.0) as usize;
    let dt = span / steps as f64;

    let mut times = vec![t0];
    if sink(t0, init)? == SinkFlow::Stop {
        return Ok((times, dt, 0));
    }
    let mut x = init.coeffs().to_vec();
    let grid = params.grid;
    let tail_check = |x: &[C64], t: f64| -> Result<()> {
        let f = SpectralField::from_coeffs(grid, x.to_vec())?;
        let tail = f.tail_mass(2);
        if tail > policy.tail_limit {
            return Err(LabError::TailMassBreach {
                t,
                tail,
                limit: policy.tail_limit,
            });
        }
        Ok(())
    };

    match policy.method {
        StepMethod::Rk4 => {
            let gen = Generator::new(params);
            let mut w = Rk4Work::new(x.len());
            for k in 0..steps {
                let t = t0 + k as f64 * dt;
                rk4_in_place(&gen, params, &mut x, t, dt, &mut w);
                let t_next = if k + 1 == steps { t_end } else { t0 + (k + 1) as f64 * dt };
                if (k + 1) % policy.sample_stride == 0 || k + 1 == steps {
                    tail_check(&x, t_next)?;
                    let f = SpectralField::from_coeffs(grid, x.clone())?;
                    let flow = sink(t_next, &f)?;
                    times.push(t_next);
                    if flow == SinkFlow::Stop {
                        return Ok((times, dt, k + 1));
                    }
                }
            }
        }
        StepMethod::FrozenExpm => {
            if params.gamma_schedule == GammaSchedule::Decaying {
                return Err(LabError::Precondition(
                    "the exponential path needs a time-independent gamma".into(),
                ));
            }
            if grid.n_trunc() > EXPM_MAX_N {
                return Err(LabError::Precondition(format!(
                    "exponential path limited to N <= {EXPM_MAX_N}"
                )));
            }
            let m = crate::spectral::assemble_matrix(params, params.gamma(0.0));
            let e = propagator_matrix(&m, dt);
            for k in 0..steps {
                x = linalg::mat_vec(&e, &x);
                let t_next = if k + 1 == steps { t_end } else { t0 + (k + 1) as f64 * dt };
                if (k + 1) % policy.sample_stride == 0 || k + 1 == steps {
                    tail_check(&x, t_next)?;
                    let f = SpectralField::from_coeffs(grid, x.clone())?;
                    let flow = sink(t_next, &f)?;
                    times.push(t_next);
                    if flow == SinkFlow::Stop {
                        return Ok((times, dt, k + 1));
                    }
                }
            }
        }
    }
    Ok((times, dt, steps))
}

/// Integrates to `t_end` and keeps every sampled state.
pub fn evolve(
    init: &SpectralField,
    params: &ModelParams,
    t_end: f64,
    policy: &StepPolicy,
) -> Result<Trajectory> {
    evolve_interval(init, params, 0.0, t_end, policy)
}

/// Integrates over `[t0, t_end]` and keeps every sampled state.
pub fn evolve_interval(
    init: &SpectralField,
    params: &ModelParams,
    t0: f64,
    t_end: f64,
    policy: &StepPolicy,
) -> Result<Trajectory> {
    let mut states = Vec::new();
    let (times, dt, steps) = evolve_interval_with_sink(init, params, t0, t_end, policy, &mut |_, s| {
        states.push(s.clone());
        Ok(SinkFlow::Continue)
    })?;
    Ok(Trajectory {
        times,
        states,
        params: params.clone(),
        dt,
        steps,
    })
}
