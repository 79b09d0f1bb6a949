//! Operator conventions shared by every module.
//!
//! The two-level basis is ordered `(e, g)`: index 0 is the excited state and
//! index 1 the ground state. With that order
//!
//! * `σz = diag(1, -1)`, so `σz|e⟩ = +|e⟩`,
//! * `σ+ = |e⟩⟨g|`, `σ- = |g⟩⟨e|`,
//! * `σx = σ+ + σ-`, `σy = -iσ+ + iσ-`.
//!
//! Superoperators act on column-stacked density matrices. For a product
//! `A X B` this gives `vec(A X B) = (Bᵀ ⊗ A) vec(X)`; [`left`] and [`right`]
//! build the two factors. nalgebra stores matrices column-major, so
//! `as_slice()` of an operator is already its column-stacked vector.

use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;

pub type C64 = Complex64;
/// 2×2 operator on the two-level system.
pub type Op2 = Matrix2<C64>;
/// 4×4 superoperator on vectorized 2×2 operators.
pub type Super2 = Matrix4<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Basis index of the excited state.
pub const E: usize = 0;
/// Basis index of the ground state.
pub const G: usize = 1;

pub fn identity() -> Op2 {
    Op2::identity()
}

pub fn sigma_z() -> Op2 {
    Op2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn sigma_plus() -> Op2 {
    Op2::new(ZERO, ONE, ZERO, ZERO)
}

pub fn sigma_minus() -> Op2 {
    Op2::new(ZERO, ZERO, ONE, ZERO)
}

pub fn sigma_x() -> Op2 {
    sigma_plus() + sigma_minus()
}

pub fn sigma_y() -> Op2 {
    sigma_plus() * (-I) + sigma_minus() * I
}

/// `(σx, σy, σz)`.
pub fn paulis() -> [Op2; 3] {
    [sigma_x(), sigma_y(), sigma_z()]
}

pub fn vec2(x: &Op2) -> Vector4<C64> {
    Vector4::from_column_slice(x.as_slice())
}

pub fn unvec2(v: &Vector4<C64>) -> Op2 {
    Op2::from_column_slice(v.as_slice())
}

/// Superoperator of `X ↦ A X`.
pub fn left(a: &Op2) -> Super2 {
    Op2::identity().kronecker(a)
}

/// Superoperator of `X ↦ X B`.
pub fn right(b: &Op2) -> Super2 {
    b.transpose().kronecker(&Op2::identity())
}

/// Superoperator of `X ↦ -i[H, X]`.
pub fn commutator(h: &Op2) -> Super2 {
    (left(h) - right(h)) * (-I)
}

/// Dense versions used by the cavity-level oracle.
pub fn left_dyn(a: &DMatrix<C64>) -> DMatrix<C64> {
    DMatrix::<C64>::identity(a.nrows(), a.nrows()).kronecker(a)
}

pub fn right_dyn(b: &DMatrix<C64>) -> DMatrix<C64> {
    b.transpose().kronecker(&DMatrix::<C64>::identity(b.nrows(), b.nrows()))
}

pub fn trace2(x: &Op2) -> C64 {
    x[(0, 0)] + x[(1, 1)]
}

/// Lift a 2×2 operator into `TLS ⊗ other` with the TLS as the slow index.
pub fn embed(tls: &Op2, other: &DMatrix<C64>) -> DMatrix<C64> {
    let t = DMatrix::from_column_slice(2, 2, tls.as_slice());
    t.kronecker(other)
}
