use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{basis_fields, random_fields, CheckReport, Tally, TOL_EXACT, TOL_IDENTITY, TOL_INEQUALITY};
use crate::energy::{cal_e1, cal_e2, eval_base, psi_energy_sum, psi_gradient_sum};
use crate::error::Result;
use crate::random;
use crate::spectral::{
    apply_a, apply_b, commutator_matrix, matrix_a, matrix_b, ModelParams, OperatorMatrix,
    SpectralField, SpectralGrid,
};

/// Critical-model parameters on `grid`; only the operators matter here, not `ν`.
fn nonlocal_params(grid: SpectralGrid) -> Result<ModelParams> {
    ModelParams::critical(1e-2, grid)
}

fn toy_params(grid: SpectralGrid) -> Result<ModelParams> {
    ModelParams::toy(1e-2, grid)
}

fn all_fields(grid: SpectralGrid, trials: usize, seed: u64) -> impl Iterator<Item = SpectralField> {
    random_fields(grid, trials, seed).chain(basis_fields(grid))
}

/// `(1 - |α|^{-1}) ‖u‖² <= ‖u‖_*² <= ‖u‖²`.
pub fn check_star_equivalence(grid: SpectralGrid, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut t = Tally::new("star-equivalence", TOL_EXACT);
    let lower = 1.0 - 1.0 / grid.alpha().abs();
    for f in all_fields(grid, trials, seed) {
        let l2 = f.norm_l2().powi(2);
        let star = f.norm_star().powi(2);
        t.ineq(lower * l2, star, None, Some(&f));
        t.ineq(star, l2, None, Some(&f));
        t.trial();
    }
    Ok(t.finish())
}

/// The two sides of the `𝓔2` equivalence: `(lower, 𝓔2)` with
/// `lower = ‖Aθ‖² + 2π Σ ((α²+β²)^{1/2} - 1) |ψ̃|²`; the upper side is `2·lower`.
pub fn equivalence_sides(state: &SpectralField, params: &ModelParams) -> Result<(f64, f64)> {
    let lower = apply_a(state, params)?.norm_l2().powi(2) + psi_energy_sum(state);
    Ok((lower, cal_e2(state, params)?))
}

pub fn check_lemma_equivalence(grid: SpectralGrid, trials: usize, seed: u64) -> Result<CheckReport> {
    let p = nonlocal_params(grid)?;
    let mut t = Tally::new("lem-equivalence", TOL_INEQUALITY);
    for f in all_fields(grid, trials, seed) {
        let (lower, e2) = equivalence_sides(&f, &p)?;
        t.ineq(lower, e2, None, Some(&f));
        t.ineq(e2, 2.0 * lower, None, Some(&f));
        t.trial();
    }
    Ok(t.finish())
}

/// Right side of the `𝓔2` upper estimate without `c1`.
pub fn est_me2_comparison(state: &SpectralField, params: &ModelParams) -> Result<f64> {
    let sa = params.alpha().abs().sqrt();
    Ok(sa * apply_a(state, params)?.norm_l2().powi(2) + sa * psi_gradient_sum(state))
}

/// Fields concentrated at `β = 0`.
fn zero_mode_fields(grid: SpectralGrid, seed: u64) -> Vec<SpectralField> {
    let mut out = Vec::new();
    for eps in [0.0, 1e-3, 0.1, 0.3, 1.0] {
        for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(1.0, -1.0)] {
            out.push(SpectralField::from_fn(grid, |b| match b {
                0 => C64::new(1.0, 0.0),
                1 => phase * eps,
                -1 => phase.conj() * eps,
                _ => C64::new(0.0, 0.0),
            }));
        }
    }
    for k in 0..20 {
        let mut r = random::trial_rng(seed ^ 0x5eed, k);
        out.push(random::low_mode_field(grid, 1 + (k as usize % 3), &mut r));
    }
    out
}

/// `𝓔2 <= c1 (|α|^{1/2}‖Aθ‖² + Σ 2π|α|^{1/2} β²/(α²+β²)^{1/2} |ψ̃|²)`.
pub fn check_lemma_est_me2(grid: SpectralGrid, c1: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    let p = nonlocal_params(grid)?;
    let mut t = Tally::new("lem-est-me2", TOL_INEQUALITY);
    for f in all_fields(grid, trials, seed).chain(zero_mode_fields(grid, seed)) {
        let e2 = cal_e2(&f, &p)?;
        t.ineq(e2, c1 * est_me2_comparison(&f, &p)?, None, Some(&f));
        t.trial();
    }
    Ok(t.finish())
}

/// `-4π Σ (ρ-1)² β² |ψ̃|² / ((ρ₋ + ρ₊) ρ₋ ρ₊)` with `ρ = (α²+β²)^{1/2}`, `ρ± = ρ(β±1)`.
pub fn commutator_pairing_closed_form(state: &SpectralField) -> f64 {
    let g = *state.grid();
    let r = |b: i64| g.symbol(b).sqrt();
    let sum: f64 = g
        .betas()
        .map(|b| {
            let (rm, r0, rp) = (r(b - 1), r(b), r(b + 1));
            let psi2 = state.at(b).norm_sqr() / (r0 * r0);
            (r0 - 1.0).powi(2) * (b * b) as f64 * psi2 / ((rm + rp) * rm * rp)
        })
        .sum();
    -4.0 * PI * sum
}

/// Dense `BA - AB` for the critical operators on `grid`.
pub fn pairing_commutator(grid: SpectralGrid) -> Result<OperatorMatrix> {
    let p = nonlocal_params(grid)?;
    commutator_matrix(&matrix_b(&p), &matrix_a(&p))
}

/// `Re⟨(BA - AB)θ, ∂_yθ⟩_*` through the dense commutator.
pub fn commutator_pairing_matrix(state: &SpectralField, comm: &OperatorMatrix) -> Result<f64> {
    Ok(comm.apply(state)?.inner_star(&state.deriv_y())?.re)
}

/// Closed form against the dense commutator (absolute, unit fields) and the `c3` bound.
pub fn check_commutator_pairing(
    grid: SpectralGrid,
    c3: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let comm = pairing_commutator(grid)?;
    let mut form = Tally::new("lem-com-ba/closed-form", TOL_IDENTITY);
    let mut bound = Tally::new("lem-com-ba/bound", TOL_INEQUALITY);
    for f in all_fields(grid, trials, seed) {
        let closed = commutator_pairing_closed_form(&f);
        let dense = commutator_pairing_matrix(&f, &comm)?;
        form.eq(closed, dense, Some(1.0), Some(&f));
        bound.ineq(closed, -c3 * psi_gradient_sum(&f), None, Some(&f));
        form.trial();
        bound.trial();
    }
    Ok(vec![form.finish(), bound.finish()])
}

/// `(-2 Re⟨sin y θ, ∂_y(cos y θ)⟩, ‖θ‖², 2‖∂_y(cos y θ)‖ ‖sin y θ‖, touches_boundary)`.
pub fn interpolation_terms(state: &SpectralField) -> Result<(f64, f64, f64, bool)> {
    let s = state.mult_sin();
    let dc = state.mult_cos().deriv_y();
    let ident = -2.0 * s.inner_l2(&dc)?.re;
    let n = state.norm_l2().powi(2);
    let rhs = 2.0 * dc.norm_l2() * s.norm_l2();
    Ok((ident, n, rhs, state.tail_mass(1) > 0.0))
}

pub fn check_interpolation_toy(grid: SpectralGrid, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let mut ident = Tally::new("lem-inter/identity", TOL_IDENTITY);
    let mut ineq = Tally::new("lem-inter/inequality", TOL_INEQUALITY);
    for f in all_fields(grid, trials, seed) {
        let (lhs, n, rhs, boundary) = interpolation_terms(&f)?;
        if boundary {
            ident.note("field touches the truncation boundary");
        }
        ident.eq(lhs, n, None, Some(&f));
        ineq.ineq(n, rhs, None, Some(&f));
        ident.trial();
        ineq.trial();
    }
    Ok(vec![ident.finish(), ineq.finish()])
}

/// The elementary Cauchy–Schwarz links used to compare the energy terms.
pub fn check_cs_chains(grid: SpectralGrid, trials: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let p = nonlocal_params(grid)?;
    let names = [
        "cs/calE1-by-E_half",
        "cs/calE1-by-E1-A",
        "cs/A-by-calE2",
        "cs/E1-by-E_half-E_3half",
        "cs/E0-by-E_half-psi",
    ];
    let mut tallies: Vec<Tally> = names.iter().map(|n| Tally::new(*n, TOL_INEQUALITY)).collect();
    for f in all_fields(grid, trials, seed) {
        let e = eval_base(&f, &p)?;
        let a = apply_a(&f, &p)?;
        let a_l2 = a.norm_l2();
        let e1 = cal_e1(&f, &p)?.abs();
        let vals = [
            (e1, e.e_half.sqrt() * a.norm_sobolev(0.5)),
            (e1, e.e1.sqrt() * a_l2),
            (a_l2 * a_l2, e.cal_e2),
            (e.e1, (e.e_half * e.e_3half).sqrt()),
            (e.e0, (e.e_half * psi_energy_sum(&f)).sqrt()),
        ];
        for (t, (l, r)) in tallies.iter_mut().zip(vals) {
            t.ineq(l, r, None, Some(&f));
            t.trial();
        }
    }
    Ok(tallies.into_iter().map(Tally::finish).collect())
}

/// `⟨Bu, v⟩ = ⟨u, Bv⟩` in the star product, and `⟨B u, v⟩ = ⟨u, B v⟩` in L² for the toy.
pub fn check_b_symmetry(grid: SpectralGrid, trials: usize, seed: u64) -> Result<CheckReport> {
    let mut t = Tally::new("b-symmetry", TOL_IDENTITY);
    let nl = nonlocal_params(grid)?;
    let toy = toy_params(grid)?;
    let us: Vec<_> = random_fields(grid, trials, seed).collect();
    let vs: Vec<_> = random_fields(grid, trials, seed.wrapping_add(1)).collect();
    for (u, v) in us.iter().zip(&vs) {
        let l = apply_b(u, &nl)?.inner_star(v)?;
        let r = u.inner_star(&apply_b(v, &nl)?)?;
        t.record((l - r).norm() / l.norm().max(r.norm()).max(f64::MIN_POSITIVE), Some(u));
        let l = apply_b(u, &toy)?.inner_l2(v)?;
        let r = u.inner_l2(&apply_b(v, &toy)?)?;
        t.record((l - r).norm() / l.norm().max(r.norm()).max(f64::MIN_POSITIVE), Some(u));
        t.trial();
    }
    Ok(t.finish())
}
