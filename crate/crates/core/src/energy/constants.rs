use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{cal_e2, eval_base, inner_energy, psi_gradient_sum};
use crate::error::{LabError, Result};
use crate::linalg;
use crate::random;
use crate::spectral::{
    apply_a, matrix_a, matrix_b, matrix_deriv_y, matrix_frac_laplacian, ModelParams,
    SpectralField, SpectralGrid,
};

/// How the `c` constants were obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationRecord {
    pub trials: usize,
    pub seed: u64,
    pub n_trunc: usize,
    pub c1_sampled: f64,
    pub c2_sampled: f64,
    pub c4_sampled: f64,
    /// Grid-exact suprema from the Hermitian pencils; `None` if the solve failed.
    pub c1_pencil: Option<f64>,
    pub c2_pencil: Option<f64>,
    pub c4_pencil: Option<f64>,
    /// Raw `c2` before raising it to 1.
    pub c2_raw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantSet {
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a1_sub: f64,
    pub a2_sub: f64,
    pub a3_sub: f64,
    pub estimation: Option<EstimationRecord>,
}

impl ConstantSet {
    /// Coefficients from given `c` values.
    pub fn from_c(alpha: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> Self {
        let a = alpha.abs();
        let x = 6.0 * c4 * c4 + 12.0 * c1 / c3;
        let y = 18.0 * c1 / c3;
        Self {
            alpha,
            c1,
            c2,
            c3,
            c4,
            a1: 1.0 / (a * 4.0 * c2 * x * x),
            a2: 1.0 / (a.sqrt() * 8.0 * c2 * x.powi(3)),
            a3: 1.0 / (8.0 * c2 * x.powi(4)),
            a1_sub: 1.0 / (a * y * y),
            a2_sub: 1.0 / (a.sqrt() * 2.0 * y.powi(3)),
            a3_sub: 1.0 / (2.0 * y.powi(4)),
            estimation: None,
        }
    }

    pub fn sub_coefficients(&self) -> [f64; 3] {
        [self.a1_sub, self.a2_sub, self.a3_sub]
    }

    /// `(name, lhs, rhs)` of each `lhs <= rhs` constraint on the critical coefficients.
    pub fn constraint_chain(&self) -> Vec<(&'static str, f64, f64)> {
        let a = self.alpha.abs();
        vec![
            ("a2^2 <= a1 a3 / 2", self.a2 * self.a2, 0.5 * self.a1 * self.a3),
            ("a3 <= a2 |alpha| / (6 c4^2)", self.a3, self.a2 * a / (6.0 * self.c4 * self.c4)),
            (
                "a3 <= c3 a2 |alpha|^(1/2) / (12 c1)",
                self.a3,
                self.c3 * self.a2 * a.sqrt() / (12.0 * self.c1),
            ),
            ("a2 <= 1 / (2 c2)", self.a2, 0.5 / self.c2),
            ("a1^2 |alpha|^2 <= a3 / 2", self.a1 * self.a1 * a * a, 0.5 * self.a3),
        ]
    }

    /// Whether every constraint holds up to relative rounding `rel`.
    pub fn satisfies_chain(&self, rel: f64) -> bool {
        self.constraint_chain()
            .iter()
            .all(|(_, l, r)| *l <= r * (1.0 + rel))
    }
}

/// Exact `c3 = min(1/2, inf_{β≠0} 2ρ(ρ-1)² / ((ρ₋+ρ₊)ρ₋ρ₊))` with `ρ = (α²+β²)^{1/2}`.
pub fn c3_exact(grid: &SpectralGrid) -> f64 {
    let r = |b: i64| grid.symbol(b).sqrt();
    grid.betas()
        .filter(|&b| b != 0)
        .map(|b| {
            let (rm, r0, rp) = (r(b - 1), r(b), r(b + 1));
            2.0 * r0 * (r0 - 1.0).powi(2) / ((rm + rp) * rm * rp)
        })
        .fold(0.5, f64::min)
}

/// `[A, Λ] θ` with `Λ = (-Δ_α)^{1/2}`.
pub fn commutator_a_lambda(state: &SpectralField, params: &ModelParams) -> Result<SpectralField> {
    let a_l = apply_a(&state.frac_laplacian(0.5), params)?;
    let l_a = apply_a(state, params)?.frac_laplacian(0.5);
    a_l.sub(&l_a)
}

/// `𝓔2 / (|α|^{1/2}‖Aθ‖² + |α|^{1/2} Σ 2πβ²/(α²+β²)^{1/2} |ψ̃|²)`.
pub fn c1_ratio(state: &SpectralField, params: &ModelParams) -> Result<f64> {
    let sa = params.alpha().abs().sqrt();
    let den = sa * apply_a(state, params)?.norm_l2().powi(2) + sa * psi_gradient_sum(state);
    Ok(if den > 0.0 { cal_e2(state, params)? / den } else { 0.0 })
}

/// `|Re⟨i[A,Λ]θ, ∂_yθ⟩_*| / E_{1/2}`.
pub fn c2_ratio(state: &SpectralField, params: &ModelParams) -> Result<f64> {
    let c = commutator_a_lambda(state, params)?.scale(C64::new(0.0, 1.0));
    let num = inner_energy(&c, &state.deriv_y(), params)?.re.abs();
    let e = eval_base(state, params)?;
    Ok(if e.e_half > 0.0 { num / e.e_half } else { 0.0 })
}

/// `‖[A,Λ]θ‖_{L²} / E0^{1/2}`.
pub fn c4_ratio(state: &SpectralField, params: &ModelParams) -> Result<f64> {
    let num = commutator_a_lambda(state, params)?.norm_l2();
    let e0 = eval_base(state, params)?.e0;
    Ok(if e0 > 0.0 { num / e0.sqrt() } else { 0.0 })
}

fn scaled(m: &Mat<C64>, c: C64) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| c * m[(i, j)])
}

struct Pencils {
    c1: Option<f64>,
    c2: Option<f64>,
    c4: Option<f64>,
}

fn pencil_suprema(params: &ModelParams) -> Pencils {
    let g = params.grid;
    let n = g.len();
    let two_pi = 2.0 * PI;
    let k: Vec<f64> = g.betas().map(|b| params.k_symbol(b)).collect();
    let a = matrix_a(params).into_entries();
    let b = matrix_b(params).into_entries();
    let lam = matrix_frac_laplacian(g, 0.5).into_entries();
    let dy = matrix_deriv_y(g).into_entries();
    let w = Mat::from_fn(n, n, |i, j| if i == j { C64::new(two_pi * k[i], 0.0) } else { C64::new(0.0, 0.0) });
    let comm = &a * &lam - &lam * &a;

    let c4 = {
        let num = scaled(&(comm.adjoint() * &comm), C64::new(two_pi, 0.0));
        let d: Vec<f64> = k.iter().map(|v| two_pi * v).collect();
        linalg::rayleigh_sup_diag(&num, &d).ok().map(f64::sqrt)
    };

    let c2 = {
        let ic = scaled(&comm, C64::new(0.0, 1.0));
        let m = &(&dy.adjoint() * &w) * &ic;
        let h = Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        let neg = Mat::from_fn(n, n, |i, j| -h[(i, j)]);
        let d: Vec<f64> = g
            .betas()
            .zip(&k)
            .map(|(bb, kv)| two_pi * g.symbol(bb).sqrt() * kv)
            .collect();
        match (linalg::rayleigh_sup_diag(&h, &d), linalg::rayleigh_sup_diag(&neg, &d)) {
            (Ok(x), Ok(y)) => Some(x.max(y)),
            _ => None,
        }
    };

    let c1 = {
        let num = &w - &(&b.adjoint() * &w) * &b;
        let sa = params.alpha().abs().sqrt();
        let mut den = scaled(&(a.adjoint() * &a), C64::new(two_pi * sa, 0.0));
        for (i, bb) in g.betas().enumerate() {
            let r = g.symbol(bb).sqrt();
            den[(i, i)] += C64::new(two_pi * sa * (bb * bb) as f64 / (r * r * r), 0.0);
        }
        linalg::rayleigh_sup(&num, &den).ok()
    };

    Pencils { c1, c2, c4 }
}

/// Estimates `c1, c2, c4` by sampling and by the grid-exact Hermitian pencils (taking the
/// larger), computes `c3` exactly and derives the coefficients.
///
/// `c2` is raised to at least 1, which keeps the last link of the constraint chain valid;
/// any upper constant can be used in its place.
pub fn estimate_constants(
    grid: &SpectralGrid,
    params: &ModelParams,
    trials: usize,
    seed: u64,
) -> Result<ConstantSet> {
    if trials < 100 {
        return Err(LabError::Precondition(format!("trials = {trials} below 100")));
    }
    if params.s_tilde() != Some(0.5) {
        return Err(LabError::Precondition(
            "constants are defined for the nonlocal factor with s_tilde = 1/2".into(),
        ));
    }
    let params = params.with_grid(*grid)?;
    let g = *grid;

    let mut c1s = 0.0f64;
    let mut c2s = 0.0f64;
    let mut c4s = 0.0f64;
    let mut visit = |f: &SpectralField| -> Result<()> {
        c1s = c1s.max(c1_ratio(f, &params)?);
        c2s = c2s.max(c2_ratio(f, &params)?);
        c4s = c4s.max(c4_ratio(f, &params)?);
        Ok(())
    };
    for b in g.betas() {
        visit(&SpectralField::basis(g, b)?)?;
    }
    let inner = g.n_trunc() as i64 - 1;
    for b in -inner..inner {
        for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let f = SpectralField::from_fn(g, |x| {
                if x == b {
                    C64::new(1.0, 0.0)
                } else if x == b + 1 {
                    phase
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            visit(&f)?;
        }
    }
    for t in 0..trials {
        let mut r = random::trial_rng(seed, t as u64);
        visit(&random::clean_field(g, &mut r))?;
        visit(&random::low_mode_field(g, 4, &mut r))?;
    }

    let p = pencil_suprema(&params);
    let c1 = p.c1.map_or(c1s, |x| x.max(c1s));
    let c2_raw = p.c2.map_or(c2s, |x| x.max(c2s));
    let c4 = p.c4.map_or(c4s, |x| x.max(c4s));
    let c3 = c3_exact(&g);
    let mut set = ConstantSet::from_c(g.alpha(), c1, c2_raw.max(1.0), c3, c4);
    set.estimation = Some(EstimationRecord {
        trials,
        seed,
        n_trunc: g.n_trunc(),
        c1_sampled: c1s,
        c2_sampled: c2s,
        c4_sampled: c4s,
        c1_pencil: p.c1,
        c2_pencil: p.c2,
        c4_pencil: p.c4,
        c2_raw,
    });
    Ok(set)
}
