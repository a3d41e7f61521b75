//! Fourier representation of fields and operators at one x-wavenumber.

pub mod field;
pub mod grid;
pub mod matrix;
pub mod ops;
pub mod params;
pub mod shear;

pub use field::SpectralField;
pub use grid::SpectralGrid;
pub use matrix::{
    assemble_matrix, commutator_matrix, matrix_a, matrix_b, matrix_deriv_y,
    matrix_frac_laplacian, matrix_k, OperatorMatrix,
};
pub use ops::{apply_a, apply_b, apply_generator, apply_k, Generator};
pub use params::{GammaSchedule, ModelParams, Variant};
pub use shear::{mult_neg_shear_deriv, mult_shear, ShearProfile};

/// Grid constructor with the usual argument order.
pub fn make_grid(alpha: f64, c0: f64, n_trunc: usize) -> crate::error::Result<SpectralGrid> {
    SpectralGrid::new(alpha, c0, n_trunc)
}
