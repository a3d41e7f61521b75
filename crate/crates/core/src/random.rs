//! Deterministic random fields for randomized checks.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spectral::{SpectralField, SpectralGrid};

/// Modes with `|β| > N - CLEAN_GUARD` are left empty in clean fields.
pub const CLEAN_GUARD: usize = 4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-stream for trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index + 1);
    r
}

/// Complex Gaussian coefficients with variance `exp(-(β/width)²)`, zero beyond `N - guard`.
pub fn gaussian_field<R: Rng>(grid: SpectralGrid, width: f64, guard: usize, rng: &mut R) -> SpectralField {
    let cut = grid.n_trunc() as i64 - guard as i64;
    let mut f = SpectralField::zeros(grid);
    for (i, c) in f.coeffs_mut().iter_mut().enumerate() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let b = grid.beta(i);
        if b.abs() <= cut {
            let sd = (-(b as f64 / width).powi(2)).exp().sqrt();
            *c = C64::new(re, im) * (sd / std::f64::consts::SQRT_2);
        }
    }
    f
}

/// Clean field: width `N/4`, guard band of [`CLEAN_GUARD`] modes.
pub fn clean_field<R: Rng>(grid: SpectralGrid, rng: &mut R) -> SpectralField {
    gaussian_field(grid, grid.n_trunc() as f64 / 4.0, CLEAN_GUARD, rng)
}

/// Clean field scaled to unit L² norm.
pub fn unit_clean_field<R: Rng>(grid: SpectralGrid, rng: &mut R) -> SpectralField {
    normalized(clean_field(grid, rng))
}

pub fn normalized(f: SpectralField) -> SpectralField {
    let n = f.norm_l2();
    if n == 0.0 {
        f
    } else {
        f.scale(C64::new(1.0 / n, 0.0))
    }
}

/// Field with random coefficients on `[-m, m]` only; stresses low modes.
pub fn low_mode_field<R: Rng>(grid: SpectralGrid, m: usize, rng: &mut R) -> SpectralField {
    let m = m.min(grid.n_trunc().saturating_sub(CLEAN_GUARD)) as i64;
    SpectralField::from_fn(grid, |b| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if b.abs() <= m {
            C64::new(re, im)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Initial condition description that can be realized on any truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitSpec {
    /// Single Fourier mode `e^{iβy}`.
    Mode(i64),
    /// Gaussian coefficients on `|β| ≤ m`; the draw does not depend on `N`.
    LowModes { m: usize, seed: u64 },
    /// Gaussian coefficients with standard deviation `exp(-(β/width)²/2)`, drawn on
    /// `|β| ≤ 6·width` and cut at `N`; the draw does not depend on `N`.
    Gaussian { width: f64, seed: u64 },
    Coeffs(Vec<(i64, C64)>),
}

impl InitSpec {
    /// The field on `grid`, scaled to unit L² norm.
    pub fn realize(&self, grid: SpectralGrid) -> Result<SpectralField> {
        let f = match self {
            InitSpec::Mode(b) => SpectralField::basis(grid, *b)?,
            InitSpec::LowModes { m, seed } => {
                let m = *m as i64;
                if m > grid.n_trunc() as i64 {
                    return Err(LabError::Precondition(format!("{m} modes do not fit N = {}", grid.n_trunc())));
                }
                let mut r = rng(*seed);
                let draws: Vec<C64> = (-m..=m)
                    .map(|_| C64::new(r.sample(StandardNormal), r.sample(StandardNormal)))
                    .collect();
                SpectralField::from_fn(grid, |b| if b.abs() <= m { draws[(b + m) as usize] } else { C64::new(0.0, 0.0) })
            }
            InitSpec::Gaussian { width, seed } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(LabError::Precondition(format!("width {width} must be positive")));
                }
                let m = (6.0 * width).ceil() as i64;
                let mut r = rng(*seed);
                let draws: Vec<C64> = (-m..=m)
                    .map(|b| {
                        let sd = (-0.5 * (b as f64 / width).powi(2)).exp();
                        C64::new(r.sample(StandardNormal), r.sample(StandardNormal)) * sd
                    })
                    .collect();
                SpectralField::from_fn(grid, |b| if b.abs() <= m { draws[(b + m) as usize] } else { C64::new(0.0, 0.0) })
            }
            InitSpec::Coeffs(cs) => {
                let mut f = SpectralField::zeros(grid);
                for &(b, c) in cs {
                    let i = grid
                        .index(b)
                        .ok_or_else(|| LabError::Precondition(format!("mode {b} outside N = {}", grid.n_trunc())))?;
                    f.coeffs_mut()[i] += c;
                }
                f
            }
        };
        if f.norm_l2() == 0.0 {
            return Err(LabError::Precondition("initial field is zero".into()));
        }
        Ok(normalized(f))
    }
}
