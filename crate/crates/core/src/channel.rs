//! Unital completely positive maps `φ: B(K) → B(H)` in Kraus form.
//!
//! A channel is stored as a tuple `v_1, …, v_r` of `m × n` matrices (each maps
//! `H = C^n` into `K = C^m`) acting by `φ(a) = Σ v_k* a v_k`, with the
//! unitality constraint `Σ v_k* v_k = 1_H`.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c64, hermitian_eigen, hermiticity_defect, identity, numerical_rank, outer, trace,
    unitarity_defect, vectorize, ComplexMatrix, ComplexVector, Tolerance,
};

/// Allowed deviation of `‖ξ‖` from one for input vectors.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_h: usize,
    dim_k: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Validates shapes, finiteness and unitality.
    pub fn new(dim_h: usize, dim_k: usize, ops: Vec<ComplexMatrix>, tol: Tolerance) -> Result<Self> {
        let invalid = |invariant: String| Err(Error::InvalidChannel { invariant });
        if dim_h == 0 || dim_k == 0 {
            return invalid(format!("dimensions must be positive (dim_h={dim_h}, dim_k={dim_k})"));
        }
        if ops.is_empty() {
            return invalid("r >= 1: the Kraus tuple is empty".into());
        }
        for (k, v) in ops.iter().enumerate() {
            if v.nrows() != dim_k || v.ncols() != dim_h {
                return invalid(format!(
                    "shape: Kraus operator {k} is {}x{}, expected {dim_k}x{dim_h}",
                    v.nrows(),
                    v.ncols()
                ));
            }
            if !linalg::is_finite(v) {
                return invalid(format!("finite entries: Kraus operator {k} has NaN/Inf"));
            }
        }
        let channel = KrausChannel { dim_h, dim_k, ops };
        let defect = channel.unitality_defect();
        if defect > tol.rel_eps * (dim_h as f64).sqrt() {
            return invalid(format!(
                "unitality: ||sum v_k* v_k - I||_F = {defect:.3e} exceeds {:.3e}",
                tol.rel_eps * (dim_h as f64).sqrt()
            ));
        }
        Ok(channel)
    }

    /// Skips validation; used for tuples that are unital by construction.
    pub(crate) fn from_parts(dim_h: usize, dim_k: usize, ops: Vec<ComplexMatrix>) -> Self {
        debug_assert!(!ops.is_empty());
        KrausChannel { dim_h, dim_k, ops }
    }

    pub fn identity(n: usize) -> Self {
        KrausChannel::from_parts(n, n, vec![identity(n)])
    }

    /// `x ↦ tr(x)/m · 1_n`, the completely depolarizing map.
    pub fn depolarizing(n: usize, m: usize) -> Self {
        from_holevo(&HolevoForm::depolarizing(n, m), Tolerance::default())
            .expect("the depolarizing Holevo form is valid")
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    /// Tuple length, which is the rank only for linearly independent tuples.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn unitality_defect(&self) -> f64 {
        let sum = self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_h, self.dim_h), |acc, v| acc + v.adjoint() * v);
        (sum - identity(self.dim_h)).norm()
    }

    pub fn adjoint_ops(&self) -> Vec<ComplexMatrix> {
        self.ops.iter().map(|v| v.adjoint()).collect()
    }

    /// `φ(a) = Σ v_k* a v_k`.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.nrows() != self.dim_k || a.ncols() != self.dim_k {
            return Err(Error::DimensionMismatch(format!(
                "channel input must be {0}x{0}, got {1}x{2}",
                self.dim_k,
                a.nrows(),
                a.ncols()
            )));
        }
        Ok(self
            .ops
            .iter()
            .fold(ComplexMatrix::zeros(self.dim_h, self.dim_h), |acc, v| {
                acc + v.adjoint() * a * v
            }))
    }

    /// The state `ρ_ξ(a ⊗ b) = ⟨(φ(a) ⊗ b)ξ, ξ⟩` on `K ⊗ H` as a density matrix.
    pub fn output_state(&self, xi: &ComplexVector) -> Result<BipartiteDensity> {
        let n = self.dim_h;
        if xi.len() != n * n {
            return Err(Error::InvalidVector(format!(
                "input vector must have length {} (= n^2), got {}",
                n * n,
                xi.len()
            )));
        }
        let norm = xi.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidVector(format!("input vector has norm {norm}, expected 1")));
        }
        // ξ = Σ X_ij e_i ⊗ e_j, and (v ⊗ 1) ξ has coefficient matrix v X.
        let coeffs = ComplexMatrix::from_row_slice(n, n, xi.as_slice());
        let d = self.dim_k * n;
        let mut mat = ComplexMatrix::zeros(d, d);
        for v in &self.ops {
            let w = vectorize(&(v * &coeffs));
            mat += outer(&w, &w);
        }
        Ok(BipartiteDensity {
            dim_a: self.dim_k,
            dim_b: n,
            mat,
        })
    }

    /// Output state at `n^{-1/2} Σ e_i ⊗ e_i`.
    pub fn choi_state(&self) -> BipartiteDensity {
        self.output_state(&canonical_vector(self.dim_h))
            .expect("canonical vector has the right length and unit norm")
    }

    /// `G_ij = ⟨vec v_j, vec v_i⟩ = tr(v_i* v_j)`.
    pub fn gram(&self) -> ComplexMatrix {
        let r = self.ops.len();
        ComplexMatrix::from_fn(r, r, |i, j| self.ops[i].dotc(&self.ops[j]))
    }

    /// Numerical rank of the Gram matrix, i.e. the length of a minimal tuple.
    pub fn rank(&self, tol: Tolerance) -> Result<usize> {
        numerical_rank(&self.gram(), tol)
    }

    /// Rotates the tuple so that it is orthogonal in Hilbert–Schmidt inner product
    /// and drops the components with negligible norm.
    pub fn reduce_minimal(&self, tol: Tolerance) -> Result<KrausChannel> {
        let gram = self.gram();
        let keep = numerical_rank(&gram, tol)?;
        let (_, vectors) = hermitian_eigen(&gram)?;
        let r = self.ops.len();
        // Eigenvalues come back ascending; the dominant ones are at the end.
        let ops = (r - keep..r)
            .rev()
            .map(|k| {
                self.ops.iter().enumerate().fold(
                    ComplexMatrix::zeros(self.dim_k, self.dim_h),
                    |acc, (j, v)| acc + v * vectors[(j, k)],
                )
            })
            .collect::<Vec<_>>();
        if ops.is_empty() {
            return Err(Error::NumericalFailure("every Kraus operator is negligible".into()));
        }
        Ok(KrausChannel::from_parts(self.dim_h, self.dim_k, ops))
    }

    /// `v'_i = Σ_j λ_ij v_j`.
    pub fn mix_unitary(&self, lambda: &ComplexMatrix, tol: Tolerance) -> Result<KrausChannel> {
        let r = self.ops.len();
        if lambda.nrows() != r || lambda.ncols() != r {
            return Err(Error::DimensionMismatch(format!(
                "mixing matrix must be {r}x{r}, got {}x{}",
                lambda.nrows(),
                lambda.ncols()
            )));
        }
        let defect = unitarity_defect(lambda);
        if defect > tol.rel_eps * (r as f64).sqrt().max(1.0) {
            return Err(Error::NotUnitary { defect });
        }
        let ops = (0..r)
            .map(|i| {
                self.ops.iter().enumerate().fold(
                    ComplexMatrix::zeros(self.dim_k, self.dim_h),
                    |acc, (j, v)| acc + v * lambda[(i, j)],
                )
            })
            .collect();
        Ok(KrausChannel::from_parts(self.dim_h, self.dim_k, ops))
    }

    /// Equality of maps, decided on Choi states.
    pub fn same_map(&self, other: &KrausChannel, tol: Tolerance) -> Result<bool> {
        self.check_same_dims(other)?;
        let diff = (self.choi_state().mat - other.choi_state().mat).norm();
        Ok(diff <= tol.rel_eps * (self.dim_h * self.dim_k) as f64)
    }

    fn check_same_dims(&self, other: &KrausChannel) -> Result<()> {
        if self.dim_h != other.dim_h || self.dim_k != other.dim_k {
            return Err(Error::DimensionMismatch(format!(
                "channels act between different spaces: ({}, {}) vs ({}, {})",
                self.dim_h, self.dim_k, other.dim_h, other.dim_k
            )));
        }
        Ok(())
    }

    /// Stacks the vectorized operators as the columns of an `mn × r` matrix.
    fn stacked_columns(&self) -> ComplexMatrix {
        let cols: Vec<ComplexVector> = self.ops.iter().map(vectorize).collect();
        ComplexMatrix::from_columns(&cols)
    }
}

/// Finds `λ ∈ U(r)` with `target_i = Σ_j λ_ij source_j`.
///
/// Both tuples must be linearly independent, of equal length, and define the
/// same map; otherwise no unique mixing matrix exists.
pub fn recover_mixing_unitary(
    source: &KrausChannel,
    target: &KrausChannel,
    tol: Tolerance,
) -> Result<ComplexMatrix> {
    source.check_same_dims(target)?;
    let r = source.len();
    if target.len() != r {
        return Err(Error::MixingRecovery(format!(
            "tuple lengths differ ({r} vs {})",
            target.len()
        )));
    }
    if source.rank(tol)? != r || target.rank(tol)? != r {
        return Err(Error::MixingRecovery("tuples are linearly dependent".into()));
    }
    if !source.same_map(target, tol)? {
        return Err(Error::MixingRecovery("the tuples define different maps".into()));
    }
    let a = source.stacked_columns();
    let b = target.stacked_columns();
    let svd = SVD::try_new(a.clone(), true, true, 1e-15, 10_000)
        .ok_or_else(|| Error::NumericalFailure("SVD did not converge".into()))?;
    let smax = svd.singular_values.max();
    let x = svd
        .solve(&b, tol.rel_eps * smax)
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let lambda = x.transpose();

    let scale = b.norm().max(1.0);
    let residual = (&a * &x - &b).norm();
    if residual > tol.rel_eps * scale {
        return Err(Error::MixingRecovery(format!(
            "least-squares residual {residual:.3e} is too large"
        )));
    }
    let defect = unitarity_defect(&lambda);
    if defect > tol.rel_eps * (r as f64).sqrt().max(1.0) {
        return Err(Error::MixingRecovery(format!(
            "recovered matrix is not unitary (defect {defect:.3e})"
        )));
    }
    Ok(lambda)
}

/// `n^{-1/2} (e_1 ⊗ e_1 + … + e_n ⊗ e_n)`.
pub fn canonical_vector(n: usize) -> ComplexVector {
    let s = 1.0 / (n as f64).sqrt();
    ComplexVector::from_fn(n * n, |idx, _| {
        if idx / n == idx % n {
            c64(s, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    })
}

/// A density operator on `C^dim_a ⊗ C^dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteDensity {
    dim_a: usize,
    dim_b: usize,
    mat: ComplexMatrix,
}

impl BipartiteDensity {
    pub fn new(dim_a: usize, dim_b: usize, mat: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        let d = dim_a * dim_b;
        let invalid = |invariant: String| Err(Error::InvalidDensity { invariant });
        if d == 0 || mat.nrows() != d || mat.ncols() != d {
            return invalid(format!(
                "shape: expected {d}x{d}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            ));
        }
        let defect = hermiticity_defect(&mat);
        if defect > tol.rel_eps {
            return invalid(format!("Hermitian: relative defect {defect:.3e}"));
        }
        let tr = trace(&mat);
        if (tr.re - 1.0).abs() > tol.rel_eps || tr.im.abs() > tol.rel_eps {
            return invalid(format!("trace one: trace is {tr}"));
        }
        let min = linalg::hermitian_min_eig(&mat, tol)?;
        if min < -tol.rel_eps {
            return invalid(format!("positive: minimum eigenvalue {min:.3e}"));
        }
        Ok(BipartiteDensity { dim_a, dim_b, mat })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }
}

/// An entanglement-breaking map `φ(x) = Σ_k ω_k(x) e_k`, with `ω_k` given by
/// density matrices on `K` and `e_k` a positive resolution of `1_H`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolevoForm {
    omegas: Vec<ComplexMatrix>,
    effects: Vec<ComplexMatrix>,
}

impl HolevoForm {
    pub fn new(omegas: Vec<ComplexMatrix>, effects: Vec<ComplexMatrix>, tol: Tolerance) -> Result<Self> {
        let invalid = |invariant: String| Err(Error::InvalidHolevo { invariant });
        if omegas.is_empty() {
            return invalid("s >= 1: no terms".into());
        }
        if omegas.len() != effects.len() {
            return invalid(format!(
                "{} states but {} effects",
                omegas.len(),
                effects.len()
            ));
        }
        let m = omegas[0].nrows();
        let n = effects[0].nrows();
        if m == 0 || n == 0 {
            return invalid("dimensions must be positive".into());
        }
        for (k, (w, e)) in omegas.iter().zip(&effects).enumerate() {
            if w.nrows() != m || w.ncols() != m {
                return invalid(format!("state {k} is not {m}x{m}"));
            }
            if e.nrows() != n || e.ncols() != n {
                return invalid(format!("effect {k} is not {n}x{n}"));
            }
            if !linalg::is_finite(w) || !linalg::is_finite(e) {
                return invalid(format!("term {k} has non-finite entries"));
            }
            if hermiticity_defect(w) > tol.rel_eps || hermiticity_defect(e) > tol.rel_eps {
                return invalid(format!("term {k} is not Hermitian"));
            }
            let tr = trace(w);
            if (tr.re - 1.0).abs() > tol.rel_eps || tr.im.abs() > tol.rel_eps {
                return invalid(format!("state {k} has trace {tr}, expected 1"));
            }
            let wmin = linalg::hermitian_min_eig(w, tol)?;
            if wmin < -tol.rel_eps {
                return invalid(format!("state {k} is not positive (min eigenvalue {wmin:.3e})"));
            }
            let emin = linalg::hermitian_min_eig(e, tol)?;
            if emin < -tol.rel_eps {
                return invalid(format!("effect {k} is not positive (min eigenvalue {emin:.3e})"));
            }
        }
        let sum = effects
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, e| acc + e);
        let defect = (sum - identity(n)).norm();
        if defect > tol.rel_eps * (n as f64).sqrt() {
            return invalid(format!("effects sum to identity: defect {defect:.3e}"));
        }
        Ok(HolevoForm { omegas, effects })
    }

    /// One term: the maximally mixed state on `K` paired with `1_H`.
    pub fn depolarizing(n: usize, m: usize) -> Self {
        HolevoForm {
            omegas: vec![identity(m) * c64(1.0 / m as f64, 0.0)],
            effects: vec![identity(n)],
        }
    }

    pub fn omegas(&self) -> &[ComplexMatrix] {
        &self.omegas
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn dim_h(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn dim_k(&self) -> usize {
        self.omegas[0].nrows()
    }

    /// Direct evaluation of `Σ_k tr(ω_k x) e_k`.
    pub fn evaluate(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        let m = self.dim_k();
        if x.nrows() != m || x.ncols() != m {
            return Err(Error::DimensionMismatch(format!("input must be {m}x{m}")));
        }
        let n = self.dim_h();
        Ok(self
            .omegas
            .iter()
            .zip(&self.effects)
            .fold(ComplexMatrix::zeros(n, n), |acc, (w, e)| acc + e * trace(&(w * x))))
    }
}

/// Kraus tuple of rank-one operators `√(μ_p ν_q) |f_p⟩⟨g_q|` realizing a Holevo form.
///
/// Spectral pairs with weight `μ_p ν_q < rel_eps` are dropped and the remaining
/// tuple is renormalized by `(Σ v_k* v_k)^{-1/2}` so that unitality holds exactly;
/// each operator stays rank one.
pub fn from_holevo(h: &HolevoForm, tol: Tolerance) -> Result<KrausChannel> {
    let (n, m) = (h.dim_h(), h.dim_k());
    let mut ops = Vec::new();
    for (w, e) in h.omegas.iter().zip(&h.effects) {
        let (mu, f) = hermitian_eigen(w)?;
        let (nu, g) = hermitian_eigen(e)?;
        for (p, &mu_p) in mu.iter().enumerate() {
            for (q, &nu_q) in nu.iter().enumerate() {
                let weight = mu_p * nu_q;
                if mu_p <= 0.0 || nu_q <= 0.0 || weight < tol.rel_eps {
                    continue;
                }
                let fp = f.column(p).into_owned();
                let gq = g.column(q).into_owned();
                ops.push(outer(&fp, &gq) * c64(weight.sqrt(), 0.0));
            }
        }
    }
    if ops.is_empty() {
        return Err(Error::InvalidHolevo {
            invariant: "no spectral component above tolerance".into(),
        });
    }
    let sum = ops
        .iter()
        .fold(ComplexMatrix::zeros(n, n), |acc, v| acc + v.adjoint() * v);
    let correction = linalg::inverse_sqrt_psd(&sum)?;
    let ops = ops.into_iter().map(|v| v * &correction).collect();
    KrausChannel::new(n, m, ops, tol)
}
