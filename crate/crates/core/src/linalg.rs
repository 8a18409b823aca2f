//! Dense complex linear algebra shared by the rest of the crate.
//!
//! Tensor products use the first-factor-major convention throughout: the basis
//! vector `e_i ⊗ e_j` of `C^a ⊗ C^b` sits at index `i * b + j`.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Largest `d^r` accepted by the permutation-operator builders unless a caller
/// asks for more.
pub const DEFAULT_SIZE_GUARD: usize = 4096;

const EIG_EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

/// Relative cutoff used for every rank and positivity decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel_eps: f64,
}

impl Tolerance {
    pub const DEFAULT_REL_EPS: f64 = 1e-9;

    pub fn new(rel_eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rel_eps) {
            return Err(Error::InvalidParameter(format!(
                "tolerance must satisfy 0 <= rel_eps < 1, got {rel_eps}"
            )));
        }
        Ok(Tolerance { rel_eps })
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel_eps: Self::DEFAULT_REL_EPS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    First,
    Second,
}

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from row-major entries, rejecting NaN/Inf and shape errors.
pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<ComplexMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::DimensionMismatch(format!(
            "matrix shape {rows}x{cols} has a zero dimension"
        )));
    }
    if entries.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "{} entries supplied for a {rows}x{cols} matrix",
            entries.len()
        )));
    }
    let m = ComplexMatrix::from_row_slice(rows, cols, entries);
    if !is_finite(&m) {
        return Err(Error::InvalidParameter("matrix has non-finite entries".into()));
    }
    Ok(m)
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn diag(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { c64(values[i], 0.0) } else { c64(0.0, 0.0) })
}

pub fn trace(a: &ComplexMatrix) -> Complex64 {
    a.diagonal().iter().sum()
}

/// `|u⟩⟨v|`.
pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

/// Frobenius distance of `u* u` from the identity.
pub fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (u.adjoint() * u - identity(u.ncols())).norm()
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    a.kronecker(b)
}

fn check_bipartite(rho: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<usize> {
    let d = dim_a * dim_b;
    if dim_a == 0 || dim_b == 0 || rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "expected a {d}x{d} matrix for factors {dim_a}x{dim_b}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(d)
}

/// Transposes the second tensor factor: `((i,j),(k,l)) -> ((i,l),(k,j))`.
pub fn partial_transpose(rho: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let d = check_bipartite(rho, dim_a, dim_b)?;
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..dim_a {
        for j in 0..dim_b {
            for k in 0..dim_a {
                for l in 0..dim_b {
                    out[(i * dim_b + l, k * dim_b + j)] = rho[(i * dim_b + j, k * dim_b + l)];
                }
            }
        }
    }
    Ok(out)
}

/// Traces out one factor and returns the reduced matrix of the kept one.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Keep,
) -> Result<ComplexMatrix> {
    check_bipartite(rho, dim_a, dim_b)?;
    let out = match keep {
        Keep::First => ComplexMatrix::from_fn(dim_a, dim_a, |i, k| {
            (0..dim_b).map(|j| rho[(i * dim_b + j, k * dim_b + j)]).sum()
        }),
        Keep::Second => ComplexMatrix::from_fn(dim_b, dim_b, |j, l| {
            (0..dim_a).map(|i| rho[(i * dim_b + j, i * dim_b + l)]).sum()
        }),
    };
    Ok(out)
}

/// Singular values in descending order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    if !is_finite(a) {
        return Err(Error::NumericalFailure("SVD input has non-finite entries".into()));
    }
    let svd = a
        .clone()
        .try_svd(false, false, EIG_EPS, MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    Ok(s)
}

/// Counts singular values above `rel_eps * max(σ_max, scale)`.
///
/// `scale` is a floor for the reference magnitude; with `scale = 0` this is the
/// plain relative rank. A positive floor keeps roundoff-only matrices (whose
/// exact value is zero) from reporting full rank.
pub fn rank_of_singular_values(s: &[f64], tol: Tolerance, scale: f64) -> usize {
    let smax = s.first().copied().unwrap_or(0.0);
    let reference = smax.max(scale);
    if reference <= 0.0 {
        return 0;
    }
    let cut = tol.rel_eps * reference;
    s.iter().filter(|&&x| x > cut).count()
}

pub fn numerical_rank(a: &ComplexMatrix, tol: Tolerance) -> Result<usize> {
    numerical_rank_scaled(a, tol, 0.0)
}

pub fn numerical_rank_scaled(a: &ComplexMatrix, tol: Tolerance, scale: f64) -> Result<usize> {
    Ok(rank_of_singular_values(&singular_values(a)?, tol, scale))
}

/// Relative anti-Hermitian defect `‖a − a*‖_F / ‖a‖_F` (zero for the zero matrix).
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    let n = a.norm();
    if n == 0.0 {
        return 0.0;
    }
    (a - a.adjoint()).norm() / n
}

/// Spectral decomposition of the Hermitian part `(a + a*)/2`.
///
/// Eigenvalues are returned in ascending order with eigenvectors as the
/// matching columns.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !is_finite(a) {
        return Err(Error::NumericalFailure("eigen input has non-finite entries".into()));
    }
    let h = (a + a.adjoint()) * c64(0.5, 0.0);
    let eig = SymmetricEigen::try_new(h, EIG_EPS, MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let n = a.nrows();
    let order: Vec<usize> = (0..n)
        .sorted_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
        .collect();
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |row, col| eig.eigenvectors[(row, order[col])]);
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    hermitian_eigen(a).map(|(v, _)| v)
}

/// Smallest eigenvalue of a matrix that is Hermitian to within `tol`.
pub fn hermitian_min_eig(a: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    let defect = hermiticity_defect(a);
    if defect > tol.rel_eps {
        return Err(Error::NotHermitian { defect });
    }
    let values = hermitian_eigenvalues(a)?;
    values
        .first()
        .copied()
        .ok_or_else(|| Error::DimensionMismatch("empty matrix has no eigenvalues".into()))
}

/// `s^{-1/2}` for a positive definite `s`.
pub fn inverse_sqrt_psd(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = hermitian_eigen(s)?;
    if values.first().is_none_or(|&v| v <= 0.0) {
        return Err(Error::NumericalFailure("matrix is not positive definite".into()));
    }
    let inv = diag(&values.iter().map(|v| 1.0 / v.sqrt()).collect::<Vec<_>>());
    Ok(&vectors * inv * vectors.adjoint())
}

/// Every permutation of `0..r` with its sign.
pub fn signed_permutations(r: usize) -> Vec<(Vec<usize>, f64)> {
    (0..r)
        .permutations(r)
        .map(|p| {
            let inversions = (0..r)
                .tuple_combinations()
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

fn checked_power(d: usize, r: usize, guard: usize) -> Result<usize> {
    let mut size: usize = 1;
    for _ in 0..r {
        size = size.checked_mul(d).ok_or(Error::SizeGuard { size: usize::MAX, guard })?;
        if size > guard {
            return Err(Error::SizeGuard { size, guard });
        }
    }
    Ok(size)
}

fn permutation_average(d: usize, r: usize, guard: usize, signed: bool) -> Result<ComplexMatrix> {
    if d == 0 || r == 0 {
        return Err(Error::InvalidParameter(format!(
            "projector needs d >= 1 and r >= 1, got d={d}, r={r}"
        )));
    }
    let size = checked_power(d, r, guard)?;
    let perms = signed_permutations(r);
    let weight = 1.0 / perms.len() as f64;
    let mut out = ComplexMatrix::zeros(size, size);
    let mut digits = vec![0usize; r];
    for col in 0..size {
        let mut rem = col;
        for slot in (0..r).rev() {
            digits[slot] = rem % d;
            rem /= d;
        }
        for (perm, sign) in &perms {
            let row = perm.iter().fold(0, |acc, &src| acc * d + digits[src]);
            let s = if signed { *sign } else { 1.0 };
            out[(row, col)] += c64(s * weight, 0.0);
        }
    }
    Ok(out)
}

/// Orthogonal projection onto the symmetric subspace of `(C^d)^{⊗r}`.
pub fn symmetric_projector(d: usize, r: usize, guard: usize) -> Result<ComplexMatrix> {
    permutation_average(d, r, guard, false)
}

/// Orthogonal projection onto the antisymmetric subspace of `(C^d)^{⊗r}`.
pub fn antisymmetric_projector(d: usize, r: usize, guard: usize) -> Result<ComplexMatrix> {
    permutation_average(d, r, guard, true)
}

/// Column-stacking of a matrix into a vector (row-major order).
pub fn vectorize(a: &ComplexMatrix) -> ComplexVector {
    ComplexVector::from_iterator(a.len(), a.transpose().iter().copied())
}

/// Thin QR of a tall matrix, with the phases of `R`'s diagonal moved into `Q`
/// so that `R` has a nonnegative real diagonal.
pub fn phase_corrected_qr(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if g.nrows() < g.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "QR of a {}x{} matrix cannot yield orthonormal columns",
            g.nrows(),
            g.ncols()
        )));
    }
    let qr = g.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm == 0.0 {
            return Err(Error::NumericalFailure("rank-deficient Gaussian sample".into()));
        }
        let phase = d / norm;
        for i in 0..q.nrows() {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}
