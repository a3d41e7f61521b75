use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Truncated y-Fourier basis `β ∈ [-N, N]` at a fixed x-wavenumber `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    alpha: f64,
    c0: f64,
    n_trunc: usize,
}

impl SpectralGrid {
    /// Builds a grid, enforcing `|alpha| >= c0 > 1` and `n_trunc >= 4`.
    pub fn new(alpha: f64, c0: f64, n_trunc: usize) -> Result<Self> {
        if !(c0.is_finite() && c0 > 1.0) {
            return Err(LabError::InvalidGrid(format!("c0 = {c0} must exceed 1")));
        }
        if !alpha.is_finite() || alpha.abs() < c0 {
            return Err(LabError::InvalidGrid(format!(
                "alpha below c0: |{alpha}| < {c0}"
            )));
        }
        if n_trunc < 4 {
            return Err(LabError::InvalidGrid(format!(
                "n_trunc = {n_trunc} must be at least 4"
            )));
        }
        Ok(Self { alpha, c0, n_trunc })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    /// Number of modes, `2N + 1`.
    pub fn len(&self) -> usize {
        2 * self.n_trunc + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same wavenumber, different truncation.
    pub fn with_n_trunc(&self, n_trunc: usize) -> Result<Self> {
        Self::new(self.alpha, self.c0, n_trunc)
    }

    /// Same truncation, different wavenumber.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.c0, self.n_trunc)
    }

    #[inline]
    pub fn beta(&self, index: usize) -> i64 {
        index as i64 - self.n_trunc as i64
    }

    #[inline]
    pub fn index(&self, beta: i64) -> Option<usize> {
        let n = self.n_trunc as i64;
        (-n..=n).contains(&beta).then(|| (beta + n) as usize)
    }

    pub fn betas(&self) -> impl Iterator<Item = i64> {
        let n = self.n_trunc as i64;
        -n..=n
    }

    /// Symbol of `-Δ_α`, i.e. `α² + β²`.
    #[inline]
    pub fn symbol(&self, beta: i64) -> f64 {
        self.alpha * self.alpha + (beta * beta) as f64
    }

    /// `(α² + β²)^s` for every mode, in index order.
    pub fn symbol_powers(&self, s: f64) -> Vec<f64> {
        self.betas().map(|b| self.symbol(b).powf(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_grid_has_2n_plus_1_modes() {
        let g = SpectralGrid::new(2.0, 1.5, 64).unwrap();
        assert_eq!(g.len(), 129);
        assert_eq!(g.beta(0), -64);
        assert_eq!(g.index(64), Some(128));
        assert_eq!(g.index(65), None);
    }

    #[test]
    fn alpha_below_c0_is_rejected() {
        let err = SpectralGrid::new(1.0, 1.5, 64).unwrap_err();
        assert!(err.to_string().contains("alpha below c0"));
    }

    #[test]
    fn negative_alpha_is_allowed() {
        let g = SpectralGrid::new(-3.0, 2.0, 8).unwrap();
        assert_eq!(g.alpha(), -3.0);
        assert_eq!(g.symbol(1), 10.0);
    }

    #[test]
    fn bad_c0_and_small_n_are_rejected() {
        assert!(SpectralGrid::new(2.0, 1.0, 8).is_err());
        assert!(SpectralGrid::new(2.0, 1.5, 3).is_err());
    }
}
