use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::grid::SpectralGrid;
use crate::error::{LabError, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// y-Fourier coefficients `θ̃(β)`, `|β| <= N`, at one x-wavenumber.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    grid: SpectralGrid,
    coeffs: Vec<C64>,
}

impl SpectralField {
    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            coeffs: vec![C64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    /// Unit mass at `beta`.
    pub fn basis(grid: SpectralGrid, beta: i64) -> Result<Self> {
        let idx = grid
            .index(beta)
            .ok_or_else(|| LabError::Precondition(format!("mode {beta} outside the grid")))?;
        let mut f = Self::zeros(grid);
        f.coeffs[idx] = C64::new(1.0, 0.0);
        Ok(f)
    }

    pub fn from_coeffs(grid: SpectralGrid, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(LabError::Precondition(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn from_fn(grid: SpectralGrid, f: impl FnMut(i64) -> C64) -> Self {
        Self {
            coeffs: grid.betas().map(f).collect(),
            grid,
        }
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Coefficient at `beta`; zero outside the truncation.
    pub fn at(&self, beta: i64) -> C64 {
        self.grid
            .index(beta)
            .map_or(C64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(LabError::GridMismatch)
        }
    }

    /// Whether `θ̃(-β) = conj θ̃(β)` to within `tol`.
    pub fn is_real_in_y(&self, tol: f64) -> bool {
        let n = self.coeffs.len();
        (0..n).all(|i| (self.coeffs[i] - self.coeffs[n - 1 - i].conj()).norm() <= tol)
    }

    pub fn map_modes(&self, f: impl Fn(i64, C64) -> C64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(self.grid.beta(i), c))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, a: C64) -> Self {
        self.map_modes(|_, c| a * c)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: C64, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&x, &y)| x + a * y)
            .collect();
        Ok(Self {
            grid: self.grid,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(C64::new(-1.0, 0.0), other)
    }

    /// Multiplier `(α² + β²)^s`.
    pub fn frac_laplacian(&self, s: f64) -> Self {
        if s == 0.0 {
            return self.clone();
        }
        let g = self.grid;
        self.map_modes(|b, c| c * g.symbol(b).powf(s))
    }

    /// `∂_y`, i.e. multiplication by `iβ`.
    pub fn deriv_y(&self) -> Self {
        self.map_modes(|b, c| I * (b as f64) * c)
    }

    /// Multiplication by `cos(k y)`, dropping out-of-band output.
    pub fn mult_cos_k(&self, k: usize) -> Self {
        let k = k as i64;
        let g = self.grid;
        Self::from_fn(g, |b| 0.5 * (self.at(b - k) + self.at(b + k)))
    }

    /// Multiplication by `sin(k y)`, dropping out-of-band output.
    pub fn mult_sin_k(&self, k: usize) -> Self {
        let k = k as i64;
        let g = self.grid;
        Self::from_fn(g, |b| (self.at(b - k) - self.at(b + k)) / (2.0 * I))
    }

    pub fn mult_cos(&self) -> Self {
        self.mult_cos_k(1)
    }

    pub fn mult_sin(&self) -> Self {
        self.mult_sin_k(1)
    }

    /// `2π Σ u conj(w)`.
    pub fn inner_l2(&self, other: &Self) -> Result<C64> {
        self.check_same_grid(other)?;
        Ok(2.0 * PI * self.weighted_sum(other, |_| 1.0))
    }

    /// `2π Σ (1 - (α²+β²)^{-1/2}) u conj(w)`.
    pub fn inner_star(&self, other: &Self) -> Result<C64> {
        self.inner_weighted(other, 0.5)
    }

    /// Inner product with weight `1 - (α²+β²)^{-s̃}`; `s̃ = 1/2` is the star product.
    pub fn inner_weighted(&self, other: &Self, s_tilde: f64) -> Result<C64> {
        self.check_same_grid(other)?;
        let g = self.grid;
        Ok(2.0 * PI * self.weighted_sum(other, |b| 1.0 - g.symbol(b).powf(-s_tilde)))
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_sobolev(0.0)
    }

    pub fn norm_star(&self) -> f64 {
        let g = self.grid;
        self.weighted_norm_sq(|b| 1.0 - g.symbol(b).powf(-0.5)).sqrt()
    }

    /// Homogeneous `H^r` norm `sqrt(2π Σ (α²+β²)^r |θ̃|²)`.
    pub fn norm_sobolev(&self, r: f64) -> f64 {
        let g = self.grid;
        if r == 0.0 {
            self.weighted_norm_sq(|_| 1.0).sqrt()
        } else {
            self.weighted_norm_sq(|b| g.symbol(b).powf(r)).sqrt()
        }
    }

    /// `2π Σ w(β) |θ̃(β)|²`.
    pub fn weighted_norm_sq(&self, w: impl Fn(i64) -> f64) -> f64 {
        2.0 * PI
            * self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| w(self.grid.beta(i)) * c.norm_sqr())
                .sum::<f64>()
    }

    fn weighted_sum(&self, other: &Self, w: impl Fn(i64) -> f64) -> C64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (&u, &v))| w(self.grid.beta(i)) * u * v.conj())
            .sum()
    }

    /// Fraction of L² mass in modes with `|β| > N - k`.
    pub fn tail_mass(&self, k: usize) -> f64 {
        let total: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let cut = self.grid.n_trunc() as i64 - k as i64;
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.beta(*i).abs() > cut)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        tail / total
    }

    /// Copy onto another truncation of the same wavenumber, zero-padding or cutting.
    pub fn resample(&self, grid: SpectralGrid) -> Result<Self> {
        if grid.alpha() != self.grid.alpha() {
            return Err(LabError::GridMismatch);
        }
        Ok(Self::from_fn(grid, |b| self.at(b)))
    }

    /// Max-abs coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpectralGrid {
        SpectralGrid::new(2.0, 1.5, 16).unwrap()
    }

    fn e(b: i64) -> SpectralField {
        SpectralField::basis(grid(), b).unwrap()
    }

    #[test]
    fn frac_laplacian_examples() {
        let u = e(0).frac_laplacian(0.5);
        assert!((u.at(0) - C64::new(2.0, 0.0)).norm() < 1e-15);
        let u = e(3).frac_laplacian(-0.5);
        assert!((u.at(3).re - 13f64.powf(-0.5)).abs() < 1e-15);
        assert_eq!(e(5).frac_laplacian(0.0), e(5));
    }

    #[test]
    fn cos_and_sin_of_constant() {
        let c = e(0).mult_cos();
        assert_eq!(c.at(-1), C64::new(0.5, 0.0));
        assert_eq!(c.at(1), C64::new(0.5, 0.0));
        let s = e(0).mult_sin();
        assert!((s.at(1) - C64::new(0.0, -0.5)).norm() < 1e-16);
        assert!((s.at(-1) - C64::new(0.0, 0.5)).norm() < 1e-16);
    }

    #[test]
    fn cos_drops_out_of_band() {
        let n = grid().n_trunc() as i64;
        let c = e(n).mult_cos();
        assert_eq!(c.at(n - 1), C64::new(0.5, 0.0));
        let mass: f64 = c.coeffs().iter().map(|z| z.norm_sqr()).sum();
        assert!((mass - 0.25).abs() < 1e-16);
    }

    #[test]
    fn inner_products_of_constant_mode() {
        let u = e(0);
        assert!((u.inner_l2(&u).unwrap().re - 2.0 * PI).abs() < 1e-14);
        assert!((u.inner_star(&u).unwrap().re - PI).abs() < 1e-14);
        assert!((u.norm_star() - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sobolev_examples() {
        let u = e(0);
        assert!((u.norm_sobolev(-0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((u.norm_sobolev(0.0) - u.inner_l2(&u).unwrap().re.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn tail_mass_examples() {
        let n = grid().n_trunc() as i64;
        assert_eq!(e(0).tail_mass(2), 0.0);
        assert_eq!(e(n).tail_mass(2), 1.0);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let other = SpectralField::zeros(SpectralGrid::new(3.0, 1.5, 16).unwrap());
        assert_eq!(e(0).inner_l2(&other), Err(LabError::GridMismatch));
    }
}
