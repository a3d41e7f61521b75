use std::borrow::Cow;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::grid::SpectralGrid;
use super::shear::ShearProfile;
use crate::error::{LabError, Result};

/// Row of the operator family being studied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Variant {
    /// `s = s̃ = 1/2`.
    CriticalQG,
    /// `s = 1`, `s̃ = 1/2`.
    SubcriticalQG,
    /// `s = 1/2`, no nonlocal factor.
    ToyFractional,
    GeneralNonlocal { s: f64, s_tilde: f64 },
    GeneralShearToy { s: f64, profile: ShearProfile },
}

impl Variant {
    pub fn s(&self) -> f64 {
        match self {
            Variant::CriticalQG | Variant::ToyFractional => 0.5,
            Variant::SubcriticalQG => 1.0,
            Variant::GeneralNonlocal { s, .. } | Variant::GeneralShearToy { s, .. } => *s,
        }
    }

    /// `None` for the local (toy) variants.
    pub fn s_tilde(&self) -> Option<f64> {
        match self {
            Variant::CriticalQG | Variant::SubcriticalQG => Some(0.5),
            Variant::GeneralNonlocal { s_tilde, .. } => Some(*s_tilde),
            Variant::ToyFractional | Variant::GeneralShearToy { .. } => None,
        }
    }

    pub fn is_nonlocal(&self) -> bool {
        self.s_tilde().is_some()
    }

    pub fn shear(&self) -> Cow<'_, ShearProfile> {
        match self {
            Variant::GeneralShearToy { profile, .. } => Cow::Borrowed(profile),
            _ => Cow::Owned(ShearProfile::cosine()),
        }
    }

    /// Exponent `p` of the guaranteed `exp(-c ν^p t)` decay, when one is known.
    pub fn predicted_exponent(&self) -> Option<f64> {
        let s = self.s();
        match self.s_tilde() {
            None => Some(2.0 / (2.0 + 2.0 * s)),
            Some(st) if st == 0.5 => Some(3.0 / (3.0 + 4.0 * s)),
            Some(st) if st == 1.0 && s == 1.0 => Some(0.5),
            Some(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Variant::CriticalQG => "critical".into(),
            Variant::SubcriticalQG => "subcritical".into(),
            Variant::ToyFractional => "toy".into(),
            Variant::GeneralNonlocal { s, s_tilde } => format!("general({s},{s_tilde})"),
            Variant::GeneralShearToy { s, profile } => {
                let w: Vec<String> = profile.coeffs().iter().map(|w| w.to_string()).collect();
                format!("shear({s};{})", w.join(","))
            }
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Time dependence of the advection amplitude `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaSchedule {
    /// `γ(t) = α e^{-νt}`.
    Decaying,
    /// `γ = α`.
    Frozen,
    /// `γ = 0`, pure diffusion.
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub variant: Variant,
    pub nu: f64,
    pub grid: SpectralGrid,
    pub gamma_schedule: GammaSchedule,
}

impl ModelParams {
    pub fn new(
        variant: Variant,
        nu: f64,
        grid: SpectralGrid,
        gamma_schedule: GammaSchedule,
    ) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(LabError::InvalidParams(format!("nu = {nu} must be positive")));
        }
        let s = variant.s();
        if !(s > 0.0 && s <= 1.0) {
            return Err(LabError::InvalidParams(format!("s = {s} outside (0, 1]")));
        }
        if let Some(st) = variant.s_tilde() {
            if !(st.is_finite() && st > 0.0) {
                return Err(LabError::InvalidParams(format!("s_tilde = {st} must be positive")));
            }
        }
        variant.shear().check_fits(grid.n_trunc())?;
        Ok(Self {
            variant,
            nu,
            grid,
            gamma_schedule,
        })
    }

    pub fn critical(nu: f64, grid: SpectralGrid) -> Result<Self> {
        Self::new(Variant::CriticalQG, nu, grid, GammaSchedule::Decaying)
    }

    pub fn subcritical(nu: f64, grid: SpectralGrid) -> Result<Self> {
        Self::new(Variant::SubcriticalQG, nu, grid, GammaSchedule::Decaying)
    }

    pub fn toy(nu: f64, grid: SpectralGrid) -> Result<Self> {
        Self::new(Variant::ToyFractional, nu, grid, GammaSchedule::Frozen)
    }

    pub fn with_schedule(&self, gamma_schedule: GammaSchedule) -> Self {
        Self {
            gamma_schedule,
            ..self.clone()
        }
    }

    pub fn with_nu(&self, nu: f64) -> Result<Self> {
        Self::new(self.variant.clone(), nu, self.grid, self.gamma_schedule)
    }

    pub fn with_grid(&self, grid: SpectralGrid) -> Result<Self> {
        Self::new(self.variant.clone(), self.nu, grid, self.gamma_schedule)
    }

    pub fn s(&self) -> f64 {
        self.variant.s()
    }

    pub fn s_tilde(&self) -> Option<f64> {
        self.variant.s_tilde()
    }

    pub fn alpha(&self) -> f64 {
        self.grid.alpha()
    }

    pub fn gamma(&self, t: f64) -> f64 {
        match self.gamma_schedule {
            GammaSchedule::Decaying => self.alpha() * (-self.nu * t).exp(),
            GammaSchedule::Frozen => self.alpha(),
            GammaSchedule::Off => 0.0,
        }
    }

    /// Symbol of the nonlocal factor `K` at `β` (1 for local variants).
    pub fn k_symbol(&self, beta: i64) -> f64 {
        match self.s_tilde() {
            Some(st) => 1.0 - self.grid.symbol(beta).powf(-st),
            None => 1.0,
        }
    }

    /// Diffusion symbol `ν (α² + β²)^s`.
    pub fn diffusion_symbol(&self, beta: i64) -> f64 {
        self.nu * self.grid.symbol(beta).powf(self.s())
    }
}
