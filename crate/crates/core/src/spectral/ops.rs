use num_complex::Complex64 as C64;

use super::field::SpectralField;
use super::params::ModelParams;
use super::shear::{apply_stencil, ShearProfile};
use crate::error::{LabError, Result};

/// Mode-wise `1 - (α² + β²)^{-s̃}`, or the identity when `nonlocal_on` is false.
pub fn apply_k(u: &SpectralField, s_tilde: f64, nonlocal_on: bool) -> SpectralField {
    if !nonlocal_on {
        return u.clone();
    }
    let g = *u.grid();
    u.map_modes(|b, c| c * (1.0 - g.symbol(b).powf(-s_tilde)))
}

fn apply_k_params(u: &SpectralField, params: &ModelParams) -> SpectralField {
    match params.s_tilde() {
        Some(st) => apply_k(u, st, true),
        None => u.clone(),
    }
}

fn check_grid(u: &SpectralField, params: &ModelParams) -> Result<()> {
    if *u.grid() == params.grid {
        Ok(())
    } else {
        Err(LabError::GridMismatch)
    }
}

/// `B u = w · K u`.
pub fn apply_b(u: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    check_grid(u, params)?;
    let w = params.variant.shear();
    Ok(apply_stencil(&apply_k_params(u, params), &w.mult_stencil()))
}

/// `A u = -w' · K u`; `sin y · K u` for the cosine shear.
pub fn apply_a(u: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    check_grid(u, params)?;
    let w = params.variant.shear();
    Ok(apply_stencil(&apply_k_params(u, params), &w.neg_deriv_stencil()))
}

/// Cached symbols of `L = ν(-Δ_α)^s + iγ B` for repeated application.
#[derive(Debug, Clone)]
pub struct Generator {
    n_trunc: usize,
    diffusion: Vec<f64>,
    k: Vec<f64>,
    stencil: Vec<(i64, C64)>,
}

impl Generator {
    pub fn new(params: &ModelParams) -> Self {
        let g = params.grid;
        Self {
            n_trunc: g.n_trunc(),
            diffusion: g.betas().map(|b| params.diffusion_symbol(b)).collect(),
            k: g.betas().map(|b| params.k_symbol(b)).collect(),
            stencil: params.variant.shear().mult_stencil(),
        }
    }

    pub fn len(&self) -> usize {
        2 * self.n_trunc + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn diffusion(&self) -> &[f64] {
        &self.diffusion
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Bound on the spectral radius of `L` used for the RK4 step limit.
    pub fn spectral_radius_bound(&self, gamma: f64, shear: &ShearProfile) -> f64 {
        let dmax = self.diffusion.iter().cloned().fold(0.0, f64::max);
        let kmax = self.k.iter().map(|k| k.abs()).fold(0.0, f64::max);
        dmax + gamma.abs() * shear.sup_bound() * kmax
    }

    /// `out = -L(γ) x`.
    pub fn apply_neg(&self, gamma: f64, x: &[C64], out: &mut [C64]) {
        let n = self.len() as i64;
        let ig = C64::new(0.0, gamma);
        for i in 0..self.len() {
            let mut adv = C64::new(0.0, 0.0);
            for &(off, c) in &self.stencil {
                let j = i as i64 + off;
                if (0..n).contains(&j) {
                    let j = j as usize;
                    adv += c * self.k[j] * x[j];
                }
            }
            out[i] = -(self.diffusion[i] * x[i] + ig * adv);
        }
    }

    pub fn apply(&self, gamma: f64, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        self.apply_neg(gamma, x, &mut out);
        out.iter_mut().for_each(|z| *z = -*z);
        out
    }
}

/// `L(γ) u` through the elementary apply chain.
pub fn apply_generator(u: &SpectralField, params: &ModelParams, gamma: f64) -> Result<SpectralField> {
    let diff = u.frac_laplacian(params.s()).scale(C64::new(params.nu, 0.0));
    let b = apply_b(u, params)?;
    diff.axpy(C64::new(0.0, gamma), &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::grid::SpectralGrid;
    use crate::spectral::params::{GammaSchedule, Variant};

    fn grid() -> SpectralGrid {
        SpectralGrid::new(2.0, 1.5, 16).unwrap()
    }

    #[test]
    fn k_factor_examples() {
        let e0 = SpectralField::basis(grid(), 0).unwrap();
        assert!((apply_k(&e0, 0.5, true).at(0).re - 0.5).abs() < 1e-16);
        assert!((apply_k(&e0, 1.0, true).at(0).re - 0.75).abs() < 1e-16);
        assert_eq!(apply_k(&e0, 0.5, false), e0);
    }

    #[test]
    fn a_on_constant_mode_critical() {
        let p = ModelParams::critical(0.01, grid()).unwrap();
        let e0 = SpectralField::basis(grid(), 0).unwrap();
        let a = apply_a(&e0, &p).unwrap();
        assert!((a.at(1) - C64::new(0.0, -0.25)).norm() < 1e-16);
        assert!((a.at(-1) - C64::new(0.0, 0.25)).norm() < 1e-16);
    }

    #[test]
    fn b_on_constant_mode_toy() {
        let p = ModelParams::toy(0.01, grid()).unwrap();
        let e0 = SpectralField::basis(grid(), 0).unwrap();
        let b = apply_b(&e0, &p).unwrap();
        assert_eq!(b.at(1), C64::new(0.5, 0.0));
        assert_eq!(b.at(-1), C64::new(0.5, 0.0));
    }

    #[test]
    fn generator_matches_apply_chain() {
        let g = grid();
        let u = SpectralField::from_fn(g, |b| C64::new((b as f64).sin(), (b as f64 * 0.3).cos()));
        for v in [
            Variant::CriticalQG,
            Variant::SubcriticalQG,
            Variant::ToyFractional,
            Variant::GeneralShearToy {
                s: 0.5,
                profile: ShearProfile::new(vec![1.0, 0.3]).unwrap(),
            },
        ] {
            let p = ModelParams::new(v, 0.03, g, GammaSchedule::Frozen).unwrap();
            let chain = apply_generator(&u, &p, 1.7).unwrap();
            let fast = Generator::new(&p).apply(1.7, u.coeffs());
            let fast = SpectralField::from_coeffs(g, fast).unwrap();
            assert!(chain.max_abs_diff(&fast).unwrap() < 1e-13);
        }
    }
}
