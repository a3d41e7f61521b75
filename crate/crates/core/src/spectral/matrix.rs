use faer::Mat;
use num_complex::Complex64 as C64;

use super::field::SpectralField;
use super::grid::SpectralGrid;
use super::params::ModelParams;
use crate::error::{LabError, Result};

/// Dense operator on the truncated coefficient vector, rows and columns indexed by β.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    grid: SpectralGrid,
    entries: Mat<C64>,
}

impl OperatorMatrix {
    pub fn from_mat(grid: SpectralGrid, entries: Mat<C64>) -> Result<Self> {
        if entries.nrows() != grid.len() || entries.ncols() != grid.len() {
            return Err(LabError::Precondition(format!(
                "matrix is {}x{}, grid needs {}",
                entries.nrows(),
                entries.ncols(),
                grid.len()
            )));
        }
        Ok(Self { grid, entries })
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self {
            entries: Mat::zeros(grid.len(), grid.len()),
            grid,
        }
    }

    pub fn diagonal(grid: SpectralGrid, d: impl Fn(i64) -> C64) -> Self {
        let mut m = Self::zeros(grid);
        for (i, b) in grid.betas().enumerate() {
            m.entries[(i, i)] = d(b);
        }
        m
    }

    /// Banded operator from a stencil `out(β) = Σ c(β+off) u(β+off)` with column weights.
    fn banded(grid: SpectralGrid, stencil: &[(i64, C64)], col_weight: &[f64]) -> Self {
        let mut m = Self::zeros(grid);
        let n = grid.len() as i64;
        for i in 0..n {
            for &(off, c) in stencil {
                let j = i + off;
                if (0..n).contains(&j) {
                    m.entries[(i as usize, j as usize)] += c * col_weight[j as usize];
                }
            }
        }
        m
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn entries(&self) -> &Mat<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Mat<C64> {
        self.entries
    }

    pub fn entry(&self, row_beta: i64, col_beta: i64) -> Option<C64> {
        let i = self.grid.index(row_beta)?;
        let j = self.grid.index(col_beta)?;
        Some(self.entries[(i, j)])
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(LabError::GridMismatch)
        }
    }

    pub fn apply(&self, u: &SpectralField) -> Result<SpectralField> {
        if *u.grid() != self.grid {
            return Err(LabError::GridMismatch);
        }
        let n = self.grid.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            let x = u.coeffs()[j];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.entries[(i, j)] * x;
            }
        }
        SpectralField::from_coeffs(self.grid, out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            grid: self.grid,
            entries: &self.entries * &other.entries,
        })
    }

    pub fn add_scaled(&self, a: C64, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let n = self.grid.len();
        let entries = Mat::from_fn(n, n, |i, j| self.entries[(i, j)] + a * other.entries[(i, j)]);
        Ok(Self {
            grid: self.grid,
            entries,
        })
    }

    pub fn scale(&self, a: C64) -> Self {
        let n = self.grid.len();
        Self {
            grid: self.grid,
            entries: Mat::from_fn(n, n, |i, j| a * self.entries[(i, j)]),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            grid: self.grid,
            entries: self.entries.adjoint().to_owned(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.grid.len();
        let mut m = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                m = m.max(self.entries[(i, j)].norm());
            }
        }
        m
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.entries.norm_l2()
    }

    /// Largest `|i - j|` with a nonzero entry.
    pub fn bandwidth(&self) -> usize {
        let n = self.grid.len();
        let mut w = 0;
        for j in 0..n {
            for i in 0..n {
                if self.entries[(i, j)] != C64::new(0.0, 0.0) {
                    w = w.max(i.abs_diff(j));
                }
            }
        }
        w
    }
}

/// `P Q - Q P`.
pub fn commutator_matrix(p: &OperatorMatrix, q: &OperatorMatrix) -> Result<OperatorMatrix> {
    let pq = p.mul(q)?;
    let qp = q.mul(p)?;
    pq.add_scaled(C64::new(-1.0, 0.0), &qp)
}

fn k_weights(params: &ModelParams) -> Vec<f64> {
    params.grid.betas().map(|b| params.k_symbol(b)).collect()
}

/// `K` as a diagonal matrix.
pub fn matrix_k(params: &ModelParams) -> OperatorMatrix {
    OperatorMatrix::diagonal(params.grid, |b| C64::new(params.k_symbol(b), 0.0))
}

/// `(α² + β²)^s` as a diagonal matrix.
pub fn matrix_frac_laplacian(grid: SpectralGrid, s: f64) -> OperatorMatrix {
    OperatorMatrix::diagonal(grid, |b| C64::new(grid.symbol(b).powf(s), 0.0))
}

/// `∂_y` as a diagonal matrix.
pub fn matrix_deriv_y(grid: SpectralGrid) -> OperatorMatrix {
    OperatorMatrix::diagonal(grid, |b| C64::new(0.0, b as f64))
}

pub fn matrix_b(params: &ModelParams) -> OperatorMatrix {
    let w = params.variant.shear();
    OperatorMatrix::banded(params.grid, &w.mult_stencil(), &k_weights(params))
}

pub fn matrix_a(params: &ModelParams) -> OperatorMatrix {
    let w = params.variant.shear();
    OperatorMatrix::banded(params.grid, &w.neg_deriv_stencil(), &k_weights(params))
}

/// Dense `L = ν (-Δ_α)^s + iγ B`.
pub fn assemble_matrix(params: &ModelParams, gamma: f64) -> OperatorMatrix {
    let mut m = matrix_b(params).scale(C64::new(0.0, gamma));
    for (i, b) in params.grid.betas().enumerate() {
        m.entries[(i, i)] += C64::new(params.diffusion_symbol(b), 0.0);
    }
    m
}
