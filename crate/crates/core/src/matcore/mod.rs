//! Dense real symmetric matrices and the spectral tools built on them.

mod esd;
pub(crate) mod givens;
mod haar;
mod jacobi;
mod sym;

pub use esd::{kolmogorov_distance, EsdStepFunction};
pub use givens::{apply_givens_conjugation, RotationEvent};
pub use haar::{haar_so_n, OrthogonalMatrix};
pub use jacobi::{jacobi_eigenvalues, Spectrum, DEFAULT_TOLERANCE, MAX_SWEEPS};
pub use sym::{top_left_block, DenseMatrix, SymMatrix};

/// Builds the ESD of a symmetric matrix in one call.
pub fn esd_of(m: &SymMatrix) -> crate::Result<EsdStepFunction> {
    let spectrum = jacobi_eigenvalues(m, DEFAULT_TOLERANCE)?;
    EsdStepFunction::from_spectrum(&spectrum)
}
