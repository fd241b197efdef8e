//! Dense complex linear algebra over a generic real scalar.
//!
//! Tensor products use the `(i, k)` row-major convention: the first factor's
//! index is slow and the second factor's index is fast, so basis vector
//! `e_i ⊗ f_k` sits at position `i * dim_k + k`. Partial traces, swap operators
//! and the von Neumann operators all follow it.

mod hermitian;
mod matrix;
mod unitary;

pub use hermitian::{
    herm_eig, herm_inv_sqrt, herm_sqrt, Eigen, HermMatrix, MAX_SWEEPS, OFF_DIAGONAL_THRESHOLD,
    PSD_TOLERANCE,
};
pub use matrix::{
    basis_vector, inner, matrices_close, partial_trace_first, partial_trace_second, tensor_product,
    tensor_vec, vec_norm, Matrix,
};
pub use unitary::{complete_to_unitary, fix_phase, normalized, unitarity_residual};
