//! Dense complex linear algebra kernel.

pub mod decomp;
mod matrix;
pub mod random;

pub use decomp::{
    lstsq, lstsq_with_tol, nullspace, numerical_rank, range_basis, range_decomposition,
    singular_values, svd, RangeDecomposition, SvdResult, DEFAULT_RANK_TOL,
};
pub use matrix::{adjoint, matmul, ComplexMatrix};
pub use random::{random_invertible, random_matrix, random_rank, sub_seed};

pub use num_complex::Complex64;
