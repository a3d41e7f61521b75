//! Energy functionals along a state, the time-weighted composites and their constants.

pub mod constants;
pub mod phi;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::{apply_a, apply_b, ModelParams, SpectralField};

pub use constants::{estimate_constants, ConstantSet};
pub use phi::{
    phi_critical, phi_sub, phi_tilde_critical, phi_tilde_sub, phi_tilde_toy, phi_toy,
    toy_coefficients, window_end, PhiFamily, PhiVariant,
};

/// All scalar functionals of one state.
///
/// For nonlocal variants the weight is `k(β) = 1 - (α²+β²)^{-s̃}`; the local variants use
/// `k = 1`, which turns each quantity into its toy-model counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySnapshot {
    pub t: f64,
    pub e0: f64,
    pub e_half: f64,
    pub e1: f64,
    pub e_3half: f64,
    pub e2_sub: f64,
    pub cal_e1: f64,
    pub cal_e2: f64,
    pub phi: f64,
    pub phi_variant: Option<PhiVariant>,
}

impl EnergySnapshot {
    pub const CSV_HEADER: &'static str = "t,E0,E_half,E1,E_3half,E2_sub,calE1,calE2,phi";

    pub fn with_phi(mut self, phi: f64, variant: PhiVariant) -> Self {
        self.phi = phi;
        self.phi_variant = Some(variant);
        self
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// One CSV row, 17 significant digits.
    pub fn csv_row(&self) -> String {
        [
            self.t,
            self.e0,
            self.e_half,
            self.e1,
            self.e_3half,
            self.e2_sub,
            self.cal_e1,
            self.cal_e2,
            self.phi,
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// `2π Σ w(β) k(β) |θ̃(β)|²`.
pub(crate) fn k_sum(state: &SpectralField, params: &ModelParams, w: impl Fn(i64) -> f64) -> f64 {
    state.weighted_norm_sq(|b| w(b) * params.k_symbol(b))
}

/// `⟨u, v⟩` in the variant's energy inner product (star-type or plain L²).
pub fn inner_energy(u: &SpectralField, v: &SpectralField, params: &ModelParams) -> Result<C64> {
    match params.s_tilde() {
        Some(st) => u.inner_weighted(v, st),
        None => u.inner_l2(v),
    }
}

/// `-sgn(α) Re ⟨i A θ, ∂_y θ⟩` in the energy inner product.
pub fn cal_e1(state: &SpectralField, params: &ModelParams) -> Result<f64> {
    let a = apply_a(state, params)?.scale(C64::new(0.0, 1.0));
    let sign = params.alpha().signum();
    Ok(-sign * inner_energy(&a, &state.deriv_y(), params)?.re)
}

/// `‖θ‖² - ‖Bθ‖²` in the weighted product, or `‖Aθ‖²_{L²}` for local variants.
pub fn cal_e2(state: &SpectralField, params: &ModelParams) -> Result<f64> {
    if params.s_tilde().is_some() {
        let b = apply_b(state, params)?;
        Ok(inner_energy(state, state, params)?.re - inner_energy(&b, &b, params)?.re)
    } else {
        Ok(apply_a(state, params)?.norm_l2().powi(2))
    }
}

/// Base functionals by direct summation; `phi` is left at zero.
pub fn eval_base(state: &SpectralField, params: &ModelParams) -> Result<EnergySnapshot> {
    let g = params.grid;
    let rho_half = |b: i64| g.symbol(b).sqrt();
    let b2 = |b: i64| (b * b) as f64;
    Ok(EnergySnapshot {
        t: 0.0,
        e0: k_sum(state, params, |_| 1.0),
        e_half: k_sum(state, params, rho_half),
        e1: k_sum(state, params, b2),
        e_3half: k_sum(state, params, |b| b2(b) * rho_half(b)),
        e2_sub: k_sum(state, params, |b| b2(b) * b2(b)),
        cal_e1: cal_e1(state, params)?,
        cal_e2: cal_e2(state, params)?,
        phi: 0.0,
        phi_variant: None,
    })
}

/// `2π Σ (α²+β²)^s k |θ̃|²`, the dissipation rate of `E0` divided by `2ν`.
pub fn dissipation_energy(state: &SpectralField, params: &ModelParams) -> f64 {
    let g = params.grid;
    let s = params.s();
    k_sum(state, params, |b| g.symbol(b).powf(s))
}

/// `ψ̃ = θ̃ / (α²+β²)^{1/2}`.
pub fn psi(state: &SpectralField) -> SpectralField {
    state.frac_laplacian(-0.5)
}

/// `2π Σ β² / (α²+β²)^{1/2} |ψ̃|²`.
pub fn psi_gradient_sum(state: &SpectralField) -> f64 {
    let g = *state.grid();
    psi(state).weighted_norm_sq(|b| (b * b) as f64 / g.symbol(b).sqrt())
}

/// `2π Σ ((α²+β²)^{1/2} - 1) |ψ̃|²`.
pub fn psi_energy_sum(state: &SpectralField) -> f64 {
    let g = *state.grid();
    psi(state).weighted_norm_sq(|b| g.symbol(b).sqrt() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{SpectralGrid, Variant};
    use std::f64::consts::PI;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(2.0, 1.5, 16).unwrap()
    }

    #[test]
    fn constant_mode_critical() {
        let p = ModelParams::critical(0.01, grid()).unwrap();
        let e0 = SpectralField::basis(grid(), 0).unwrap();
        let s = eval_base(&e0, &p).unwrap();
        assert!((s.e0 - PI).abs() < 1e-14);
        assert!((s.e_half - 2.0 * PI).abs() < 1e-14);
        assert_eq!(s.e1, 0.0);
        assert_eq!(s.cal_e1, 0.0);
    }

    #[test]
    fn constant_mode_cal_e2_via_b() {
        let p = ModelParams::critical(0.01, grid()).unwrap();
        let e0 = SpectralField::basis(grid(), 0).unwrap();
        let s = eval_base(&e0, &p).unwrap();
        // B e0 = (1/4)(e_{-1} + e_1); star weight at β = ±1 is 1 - 5^{-1/2}
        let w1 = 1.0 - 5f64.powf(-0.5);
        let b_sq = 2.0 * PI * 2.0 * w1 / 16.0;
        assert!((s.cal_e2 - (PI - b_sq)).abs() < 1e-14);
    }

    #[test]
    fn toy_cal_e2_of_constant_is_pi() {
        let p = ModelParams::toy(0.01, grid()).unwrap();
        let e0 = SpectralField::basis(grid(), 0).unwrap();
        let s = eval_base(&e0, &p).unwrap();
        assert!((s.cal_e2 - PI).abs() < 1e-14);
        assert!((s.e0 - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn csv_row_has_nine_columns() {
        let p = ModelParams::new(Variant::ToyFractional, 0.1, grid(), crate::spectral::GammaSchedule::Frozen).unwrap();
        let s = eval_base(&SpectralField::basis(grid(), 1).unwrap(), &p).unwrap();
        assert_eq!(s.csv_row().split(',').count(), 9);
        assert_eq!(EnergySnapshot::CSV_HEADER.split(',').count(), 9);
    }
}
