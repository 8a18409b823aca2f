//! Independent reference computations for the integration tests.
//!
//! Everything here uses nalgebra and plain index loops, not the library's own
//! helpers, so that agreement is evidence rather than tautology.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type M = DMatrix<Complex64>;
pub type V = DVector<Complex64>;

pub fn kron(a: &M, b: &M) -> M {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    M::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

pub fn tr(a: &M) -> Complex64 {
    (0..a.nrows()).map(|i| a[(i, i)]).sum()
}

/// Transpose of the second factor of `C^da ⊗ C^db`.
pub fn partial_transpose(rho: &M, da: usize, db: usize) -> M {
    M::from_fn(da * db, da * db, |row, col| {
        let (i, l) = (row / db, row % db);
        let (k, j) = (col / db, col % db);
        rho[(i * db + j, k * db + l)]
    })
}

/// `Σ_k (v_k ⊗ 1) ξξ* (v_k ⊗ 1)*` built from explicit Kronecker products.
pub fn output_state(ops: &[M], xi: &V) -> M {
    let n = ops[0].ncols();
    let p = xi * xi.adjoint();
    ops.iter().fold(M::zeros(ops[0].nrows() * n, ops[0].nrows() * n), |acc, v| {
        let big = kron(v, &eye(n));
        acc + &big * &p * big.adjoint()
    })
}

pub fn canonical(n: usize) -> V {
    let s = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
    V::from_fn(n * n, |k, _| if k / n == k % n { s } else { Complex64::new(0.0, 0.0) })
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn eigenvalues(a: &M) -> Vec<f64> {
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// In 2⊗2 the partial transpose of a state has at most one negative
/// eigenvalue, so its determinant is negative exactly when the state is
/// entangled.
pub fn det_partial_transpose_2x2(rho: &M) -> f64 {
    assert_eq!(rho.nrows(), 4);
    let pt = partial_transpose(rho, 2, 2);
    pt.determinant().re
}

/// `|det|` of the `n×n` coefficient matrix of `ξ ∈ C^n ⊗ C^n`; nonzero iff full Schmidt rank.
pub fn coefficient_det(xi: &V, n: usize) -> f64 {
    M::from_fn(n, n, |i, j| xi[i * n + j]).determinant().norm()
}

/// Hermitian Gram matrix of the vectorized operators.
pub fn gram_of(ops: &[M]) -> M {
    let r = ops.len();
    M::from_fn(r, r, |i, j| ops[i].dotc(&ops[j]))
}

/// The operators `v_i* v_j` in row-major `(i, j)` order.
pub fn products(ops: &[M]) -> Vec<M> {
    ops.iter()
        .flat_map(|a| ops.iter().map(move |b| a.adjoint() * b))
        .collect()
}

pub fn unitality_defect(ops: &[M]) -> f64 {
    let n = ops[0].ncols();
    let s = ops.iter().fold(M::zeros(n, n), |acc, v| acc + v.adjoint() * v);
    (s - eye(n)).norm()
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
