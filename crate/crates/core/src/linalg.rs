//! Dense linear-algebra kernels on top of faer: matrix exponential, parity-split
//! eigenvalues, inverse iteration and Hermitian Rayleigh-quotient maxima.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

use crate::error::{LabError, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn norm_one(a: &Mat<C64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn lin_comb(terms: &[(f64, &Mat<C64>)], diag: f64) -> Mat<C64> {
    let n = terms[0].1.nrows();
    Mat::from_fn(n, n, |i, j| {
        let mut v: C64 = terms.iter().map(|(c, m)| *c * m[(i, j)]).sum();
        if i == j {
            v += diag;
        }
        v
    })
}

/// `exp(a)` by degree-13 Padé scaling and squaring.
pub fn expm(a: &Mat<C64>) -> Mat<C64> {
    let n = a.nrows();
    let norm = norm_one(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings);
    let a = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let inner_u = lin_comb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0);
    let u_poly = &a6 * &inner_u + lin_comb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1]);
    let u = &a * &u_poly;
    let inner_v = lin_comb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0);
    let v = &a6 * &inner_v + lin_comb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0]);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

pub fn mat_vec(a: &Mat<C64>, x: &[C64]) -> Vec<C64> {
    let mut out = vec![zero(); a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == zero() {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += a[(i, j)] * xj;
        }
    }
    out
}

fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Even and odd blocks of a `(2N+1)`-square matrix commuting with `β -> -β`.
///
/// Even basis: `e_0`, `(e_β + e_{-β})/√2`; odd basis: `(e_β - e_{-β})/√2`, `β = 1..N`.
#[derive(Debug, Clone)]
pub struct ParityBlocks {
    pub n_trunc: usize,
    pub even: Mat<C64>,
    pub odd: Mat<C64>,
}

impl ParityBlocks {
    /// Returns `None` when the matrix does not commute with the reflection.
    pub fn split(m: &Mat<C64>, n_trunc: usize, tol: f64) -> Option<Self> {
        let n = n_trunc as i64;
        let idx = |b: i64| (b + n) as usize;
        let scale = m.norm_l2().max(1.0);
        for p in -n..=n {
            for q in -n..=n {
                if (m[(idx(p), idx(q))] - m[(idx(-p), idx(-q))]).norm() > tol * scale {
                    return None;
                }
            }
        }
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let even = Mat::from_fn(n_trunc + 1, n_trunc + 1, |i, j| {
            let (p, q) = (i as i64, j as i64);
            match (p, q) {
                (0, 0) => m[(idx(0), idx(0))],
                (0, q) => (m[(idx(0), idx(q))] + m[(idx(0), idx(-q))]) * r2,
                (p, 0) => (m[(idx(p), idx(0))] + m[(idx(-p), idx(0))]) * r2,
                (p, q) => {
                    (m[(idx(p), idx(q))]
                        + m[(idx(p), idx(-q))]
                        + m[(idx(-p), idx(q))]
                        + m[(idx(-p), idx(-q))])
                        * 0.5
                }
            }
        });
        let odd = Mat::from_fn(n_trunc, n_trunc, |i, j| {
            let (p, q) = (i as i64 + 1, j as i64 + 1);
            (m[(idx(p), idx(q))] - m[(idx(p), idx(-q))] - m[(idx(-p), idx(q))]
                + m[(idx(-p), idx(-q))])
                * 0.5
        });
        Some(Self { n_trunc, even, odd })
    }

    /// Full-basis vector from even-block coordinates.
    pub fn lift_even(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n_trunc;
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![zero(); 2 * n + 1];
        v[n] = x[0];
        for b in 1..=n {
            v[n + b] = x[b] * r2;
            v[n - b] = x[b] * r2;
        }
        v
    }

    /// Full-basis vector from odd-block coordinates.
    pub fn lift_odd(&self, x: &[C64]) -> Vec<C64> {
        let n = self.n_trunc;
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![zero(); 2 * n + 1];
        for b in 1..=n {
            v[n + b] = x[b - 1] * r2;
            v[n - b] = -x[b - 1] * r2;
        }
        v
    }
}

pub fn eigenvalues(m: &Mat<C64>) -> Result<Vec<C64>> {
    m.eigenvalues()
        .map_err(|e| LabError::Eigen(format!("{e:?} (dimension {})", m.nrows())))
}

/// Eigenvector for an eigenvalue already known to good accuracy.
pub fn inverse_iteration(m: &Mat<C64>, lambda: C64, iters: usize) -> Result<Vec<C64>> {
    let n = m.nrows();
    let scale = norm_one(m).max(1.0);
    let mut shift = lambda;
    for attempt in 0..4 {
        let shifted = Mat::from_fn(n, n, |i, j| {
            if i == j {
                m[(i, j)] - shift
            } else {
                m[(i, j)]
            }
        });
        let lu = shifted.partial_piv_lu();
        let mut x: Vec<C64> = (0..n)
            .map(|i| C64::new(1.0 + 0.1 * ((i * 7919) % 13) as f64, 0.3 * ((i * 31) % 7) as f64))
            .collect();
        let mut ok = true;
        for _ in 0..iters {
            let rhs = Mat::from_fn(n, 1, |i, _| x[i]);
            let sol = lu.solve(&rhs);
            let y: Vec<C64> = (0..n).map(|i| sol[(i, 0)]).collect();
            let ny = vec_norm(&y);
            if !ny.is_finite() || ny == 0.0 {
                ok = false;
                break;
            }
            x = y.into_iter().map(|z| z / ny).collect();
        }
        if ok {
            return Ok(x);
        }
        shift = lambda + C64::new(1e-13 * scale * (attempt + 1) as f64, 0.0);
    }
    Err(LabError::Eigen("inverse iteration did not converge".into()))
}

/// `‖M x - λ x‖ / ‖x‖`.
pub fn residual(m: &Mat<C64>, lambda: C64, x: &[C64]) -> f64 {
    let mx = mat_vec(m, x);
    let r: f64 = mx
        .iter()
        .zip(x)
        .map(|(a, b)| (a - lambda * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    r / vec_norm(x)
}

/// Sup of `x* N x / x* D x` over nonzero `x`, for Hermitian `N` and positive definite `D`.
pub fn rayleigh_sup(num: &Mat<C64>, den: &Mat<C64>) -> Result<f64> {
    let llt = den
        .llt(Side::Lower)
        .map_err(|e| LabError::Eigen(format!("denominator not positive definite: {e:?}")))?;
    let l = llt.L();
    let mut y = num.to_owned();
    l.solve_lower_triangular_in_place(y.as_mut());
    let mut z = y.adjoint().to_owned();
    l.solve_lower_triangular_in_place(z.as_mut());
    let n = z.nrows();
    let herm = Mat::from_fn(n, n, |i, j| (z[(i, j)] + z[(j, i)].conj()) * 0.5);
    let ev = herm
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LabError::Eigen(format!("{e:?}")))?;
    Ok(ev.last().copied().unwrap_or(0.0))
}

/// Sup of `x* N x / Σ d_i |x_i|²` for positive weights `d`.
pub fn rayleigh_sup_diag(num: &Mat<C64>, d: &[f64]) -> Result<f64> {
    let n = num.nrows();
    let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    if s.iter().any(|v| !v.is_finite()) {
        return Err(LabError::Precondition("weights must be positive".into()));
    }
    let herm = Mat::from_fn(n, n, |i, j| {
        (num[(i, j)] + num[(j, i)].conj()) * (0.5 * s[i] * s[j])
    });
    let ev = herm
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| LabError::Eigen(format!("{e:?}")))?;
    Ok(ev.last().copied().unwrap_or(0.0))
}
