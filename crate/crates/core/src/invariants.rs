//! Rank-valued invariants of a Kraus tuple: the wedge ranks `w`, `w*` and the
//! extremality test based on linear independence of `{v_i* v_j}`.

use serde::Serialize;

use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{
    antisymmetric_projector, identity, kron, rank_of_singular_values, signed_permutations,
    singular_values, symmetric_projector, vectorize, ComplexMatrix, Tolerance,
};

/// `r!` grows fast; the alternating sum is built term by term.
pub const MAX_WEDGE_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WedgeReport {
    pub w: usize,
    pub w_star: usize,
    pub singvals: Vec<f64>,
    pub singvals_star: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalityReport {
    pub extremal: bool,
    /// Length of the minimal tuple the test ran on.
    pub rank: usize,
    pub gram_rank: usize,
    pub min_singval: f64,
}

/// `Σ_σ sgn(σ) v_{σ(1)} ⊗ … ⊗ v_{σ(r)}`, unnormalized.
pub fn wedge_operator(ops: &[ComplexMatrix]) -> ComplexMatrix {
    signed_permutations(ops.len())
        .into_iter()
        .map(|(perm, sign)| {
            let term = perm
                .iter()
                .skip(1)
                .fold(ops[perm[0]].clone(), |acc, &k| kron(&acc, &ops[k]));
            term * num_complex::Complex64::new(sign, 0.0)
        })
        .reduce(|a, b| a + b)
        .expect("wedge of an empty tuple")
}

fn check_wedge_size(phi: &KrausChannel, size_guard: usize) -> Result<()> {
    let r = phi.len();
    if r > MAX_WEDGE_ORDER {
        return Err(Error::SizeGuard {
            size: r,
            guard: MAX_WEDGE_ORDER,
        });
    }
    for d in [phi.dim_h(), phi.dim_k()] {
        let size = (0..r).try_fold(1usize, |acc, _| acc.checked_mul(d));
        match size {
            Some(s) if s <= size_guard => {}
            Some(s) => return Err(Error::SizeGuard { size: s, guard: size_guard }),
            None => return Err(Error::SizeGuard { size: usize::MAX, guard: size_guard }),
        }
    }
    Ok(())
}

/// Magnitude of a single tensor term, used as the floor of the rank cutoff.
fn term_scale(ops: &[ComplexMatrix]) -> f64 {
    ops.iter().map(|v| v.norm()).product()
}

/// `w = rank(v_1 ∧ ⋯ ∧ v_r` restricted to the symmetric subspace of `⊗^r H)`,
/// and `w*` the same for the adjoint tuple on `⊗^r K`.
pub fn wedge_invariants(phi: &KrausChannel, tol: Tolerance, size_guard: usize) -> Result<WedgeReport> {
    check_wedge_size(phi, size_guard)?;
    let r = phi.len();
    let ops = phi.ops();
    let adj = phi.adjoint_ops();
    let scale = term_scale(ops);

    let restricted = wedge_operator(ops) * symmetric_projector(phi.dim_h(), r, size_guard)?;
    let singvals = singular_values(&restricted)?;
    let restricted_star = wedge_operator(&adj) * symmetric_projector(phi.dim_k(), r, size_guard)?;
    let singvals_star = singular_values(&restricted_star)?;

    Ok(WedgeReport {
        w: rank_of_singular_values(&singvals, tol, scale),
        w_star: rank_of_singular_values(&singvals_star, tol, scale),
        singvals,
        singvals_star,
    })
}

/// `‖(1 − P_antisym) L P_sym‖_F`: how far the restricted wedge operator is from
/// landing in the antisymmetric subspace of `⊗^r K`.
pub fn antisymmetric_range_defect(phi: &KrausChannel, size_guard: usize) -> Result<f64> {
    check_wedge_size(phi, size_guard)?;
    let r = phi.len();
    let restricted = wedge_operator(phi.ops()) * symmetric_projector(phi.dim_h(), r, size_guard)?;
    let anti = antisymmetric_projector(phi.dim_k(), r, size_guard)?;
    let outside = (identity(anti.nrows()) - anti) * &restricted;
    Ok(outside.norm())
}

/// Extremality in the convex set of unital CP maps: after reducing to a minimal
/// tuple of length `r`, the `r²` operators `v_i* v_j` must be linearly independent.
pub fn is_extremal(phi: &KrausChannel, tol: Tolerance) -> Result<ExtremalityReport> {
    let reduced = phi.reduce_minimal(tol)?;
    let r = reduced.len();
    let n = reduced.dim_h();
    let ops = reduced.ops();
    let rows: Vec<_> = ops
        .iter()
        .flat_map(|vi| ops.iter().map(move |vj| vectorize(&(vi.adjoint() * vj)).transpose()))
        .collect();
    let products = ComplexMatrix::from_rows(&rows);
    let s = singular_values(&products)?;
    let gram_rank = rank_of_singular_values(&s, tol, 0.0);
    let min_singval = if r * r <= n * n { s[r * r - 1] } else { 0.0 };
    Ok(ExtremalityReport {
        // More than n² operators in an n²-dimensional space are always dependent.
        extremal: r <= n && gram_rank == r * r,
        rank: r,
        gram_rank,
        min_singval,
    })
}
