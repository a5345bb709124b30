//! Finite-cutoff Fock space numerics.
//!
//! The crate builds truncated bosonic and fermionic Fock spaces over a
//! finite one-particle space, realizes second-quantized operators as dense
//! complex matrices, and implements the structural tools that make the
//! truncation useful: the canonical sector-descent morphism with an exact
//! probe-mode realization, essential-spectrum computations by recursion and
//! by fibered unions, and windowed commutator positivity profiles with
//! their threshold sets.
//!
//! Truncation semantics are uniform: every operator at cutoff `n_max` is the
//! compression `1_N * Op * 1_N`, and products of cutoff operators compress
//! after each factor. Identities that leak through the top sector are tested
//! on the compressions where they hold exactly; the few genuinely
//! approximate statements (Weyl composition, coherent vectors) carry
//! computable tail bounds instead of ad hoc epsilons.

pub mod error;
pub mod fock_core;
pub mod hamiltonians;
pub mod morphism;
pub mod mourre;
pub mod operators;
pub mod spectral;

pub use error::FockError;

/// Complex scalar used everywhere.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;

/// Largest entry modulus, used for scale-relative comparisons.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Operator (spectral) norm via singular values.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Hermiticity defect `max |M - M*|` entrywise.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Compression of a matrix to the given row and column index lists, in the
/// order given.
pub fn compress(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}
