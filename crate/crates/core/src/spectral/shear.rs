use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use crate::error::{LabError, Result};

/// Shear `w(y) = Σ_k w_k cos(k y)`, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShearProfile {
    /// `cosine_coeffs[k - 1] = w_k`.
    cosine_coeffs: Vec<f64>,
}

impl ShearProfile {
    pub fn new(cosine_coeffs: Vec<f64>) -> Result<Self> {
        if cosine_coeffs.iter().any(|w| !w.is_finite()) {
            return Err(LabError::InvalidParams("non-finite shear coefficient".into()));
        }
        let mut coeffs = cosine_coeffs;
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            return Err(LabError::InvalidParams(
                "shear profile needs a nonzero coefficient".into(),
            ));
        }
        Ok(Self {
            cosine_coeffs: coeffs,
        })
    }

    /// `w = cos y`.
    pub fn cosine() -> Self {
        Self {
            cosine_coeffs: vec![1.0],
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.cosine_coeffs
    }

    pub fn max_mode(&self) -> usize {
        self.cosine_coeffs.len()
    }

    pub fn is_cosine(&self) -> bool {
        self.cosine_coeffs == [1.0]
    }

    /// `Σ |w_k|`, a bound on `sup |w|`.
    pub fn sup_bound(&self) -> f64 {
        self.cosine_coeffs.iter().map(|w| w.abs()).sum()
    }

    /// `Σ k |w_k|`, a bound on `sup |w'|`.
    pub fn deriv_sup_bound(&self) -> f64 {
        self.terms().map(|(k, w)| k as f64 * w.abs()).sum()
    }

    pub fn check_fits(&self, n_trunc: usize) -> Result<()> {
        let allowed = n_trunc.saturating_sub(2);
        if self.max_mode() > allowed {
            return Err(LabError::ShearTooWide {
                max_mode: self.max_mode(),
                allowed,
            });
        }
        Ok(())
    }

    fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.cosine_coeffs
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(i, &w)| (i + 1, w))
    }

    /// Values `w(y)` on a point.
    pub fn eval(&self, y: f64) -> f64 {
        self.terms().map(|(k, w)| w * (k as f64 * y).cos()).sum()
    }

    /// Band entries `(offset, coefficient)` of multiplication by `w`.
    pub fn mult_stencil(&self) -> Vec<(i64, C64)> {
        let mut out = Vec::new();
        for (k, w) in self.terms() {
            let k = k as i64;
            out.push((-k, C64::new(0.5 * w, 0.0)));
            out.push((k, C64::new(0.5 * w, 0.0)));
        }
        out
    }

    /// Band entries of multiplication by `-w' = Σ k w_k sin(k y)`.
    ///
    /// `(sin(ky) u)(β) = (u(β-k) - u(β+k)) / (2i)`, so output `β` reads input `β - k`
    /// with weight `-i k w_k / 2` and input `β + k` with `+i k w_k / 2`.
    pub fn neg_deriv_stencil(&self) -> Vec<(i64, C64)> {
        let mut out = Vec::new();
        for (k, w) in self.terms() {
            let a = 0.5 * k as f64 * w;
            let k = k as i64;
            out.push((-k, C64::new(0.0, -a)));
            out.push((k, C64::new(0.0, a)));
        }
        out
    }
}

/// Applies a banded stencil: `out(β) = Σ c · u(β + offset)`, truncating.
pub(crate) fn apply_stencil(u: &SpectralField, stencil: &[(i64, C64)]) -> SpectralField {
    SpectralField::from_fn(*u.grid(), |b| {
        stencil.iter().map(|&(off, c)| c * u.at(b + off)).sum()
    })
}

/// Multiplication by the shear `w(y)`.
pub fn mult_shear(u: &SpectralField, w: &ShearProfile) -> Result<SpectralField> {
    w.check_fits(u.grid().n_trunc())?;
    Ok(apply_stencil(u, &w.mult_stencil()))
}

/// Multiplication by `-w'(y)`.
pub fn mult_neg_shear_deriv(u: &SpectralField, w: &ShearProfile) -> Result<SpectralField> {
    w.check_fits(u.grid().n_trunc())?;
    Ok(apply_stencil(u, &w.neg_deriv_stencil()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::SpectralGrid;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(2.0, 1.5, 12).unwrap()
    }

    #[test]
    fn cosine_shear_is_mult_cos() {
        let g = grid();
        let u = SpectralField::from_fn(g, |b| C64::new(b as f64, 1.0 / (1.0 + b.abs() as f64)));
        let a = mult_shear(&u, &ShearProfile::cosine()).unwrap();
        assert_eq!(a.max_abs_diff(&u.mult_cos()).unwrap(), 0.0);
    }

    #[test]
    fn cos_2y_of_constant() {
        let e0 = SpectralField::basis(grid(), 0).unwrap();
        let w = ShearProfile::new(vec![0.0, 1.0]).unwrap();
        let v = mult_shear(&e0, &w).unwrap();
        assert_eq!(v.at(2), C64::new(0.5, 0.0));
        assert_eq!(v.at(-2), C64::new(0.5, 0.0));
        assert_eq!(v.at(1), C64::new(0.0, 0.0));
    }

    #[test]
    fn two_term_profile_matches_direct_convolution() {
        let e0 = SpectralField::basis(grid(), 0).unwrap();
        let w = ShearProfile::new(vec![1.0, 0.3]).unwrap();
        let v = mult_shear(&e0, &w).unwrap();
        // cos y + 0.3 cos 2y expanded in exponentials
        let expect = |b: i64| match b.abs() {
            1 => 0.5,
            2 => 0.15,
            _ => 0.0,
        };
        for b in -12..=12 {
            assert!((v.at(b) - C64::new(expect(b), 0.0)).norm() < 1e-16);
        }
    }

    #[test]
    fn neg_deriv_of_cosine_is_sin() {
        let g = grid();
        let u = SpectralField::from_fn(g, |b| C64::new(1.0, b as f64));
        let a = mult_neg_shear_deriv(&u, &ShearProfile::cosine()).unwrap();
        assert!(a.max_abs_diff(&u.mult_sin()).unwrap() < 1e-15);
    }

    #[test]
    fn profile_too_wide_is_rejected() {
        let g = SpectralGrid::new(2.0, 1.5, 4).unwrap();
        let w = ShearProfile::new(vec![0.0, 0.0, 1.0]).unwrap();
        let err = mult_shear(&SpectralField::zeros(g), &w).unwrap_err();
        assert!(matches!(err, LabError::ShearTooWide { max_mode: 3, allowed: 2 }));
    }

    #[test]
    fn zero_profile_is_rejected() {
        assert!(ShearProfile::new(vec![0.0, 0.0]).is_err());
    }
}
