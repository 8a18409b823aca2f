//! Separability verdicts for bipartite states and the entanglement-breaking
//! classification of channels.
//!
//! Verdicts are three-valued. Positivity of the partial transpose decides
//! separability only when `dim_a * dim_b <= 6`; in larger dimensions the tool
//! can certify entanglement (NPT or realignment) but never separability.

use serde::{Deserialize, Serialize};

use crate::channel::{BipartiteDensity, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigenvalues, numerical_rank, numerical_rank_scaled, partial_transpose,
    singular_values, unitarity_defect, ComplexMatrix, ComplexVector, Tolerance,
};

/// Largest `dim_a * dim_b` for which PPT is equivalent to separability.
pub const PPT_DECISIVE_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    EntangledNpt,
    EntangledRealignment,
    SeparablePptExact,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Ppt,
    Realignment,
}

/// Outcome of the separability criteria, with the value that decided it.
///
/// `witness` is the minimum eigenvalue of the partial transpose for PPT-decided
/// verdicts, and `realignment_value - 1` for realignment-decided ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    kind: VerdictKind,
    witness: f64,
    criterion: Criterion,
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        self.kind
    }

    pub fn witness(&self) -> f64 {
        self.witness
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    pub fn is_entangled(&self) -> bool {
        matches!(
            self.kind,
            VerdictKind::EntangledNpt | VerdictKind::EntangledRealignment
        )
    }

    pub fn is_separable(&self) -> bool {
        self.kind == VerdictKind::SeparablePptExact
    }

    /// Reading of a Choi-state verdict as a channel class.
    pub fn channel_class(&self) -> ChannelClass {
        if self.is_entangled() {
            ChannelClass::EntanglementPreserving
        } else if self.is_separable() {
            ChannelClass::EntanglementBreaking
        } else {
            ChannelClass::Undecided
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelClass {
    EntanglementPreserving,
    EntanglementBreaking,
    Undecided,
}

impl ChannelClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChannelClass::EntanglementPreserving => "entanglement-preserving",
            ChannelClass::EntanglementBreaking => "entanglement-breaking",
            ChannelClass::Undecided => "undecided",
        }
    }
}

fn coefficient_matrix(xi: &ComplexVector, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    if dim_a == 0 || dim_b == 0 || xi.len() != dim_a * dim_b {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} does not live in C^{dim_a} ⊗ C^{dim_b}",
            xi.len()
        )));
    }
    Ok(ComplexMatrix::from_row_slice(dim_a, dim_b, xi.as_slice()))
}

/// Rank of the coefficient matrix `M` with `ξ = Σ M_ij e_i ⊗ e_j`.
pub fn schmidt_rank(xi: &ComplexVector, dim_a: usize, dim_b: usize, tol: Tolerance) -> Result<usize> {
    numerical_rank(&coefficient_matrix(xi, dim_a, dim_b)?, tol)
}

/// Full Schmidt rank in `C^n ⊗ C^n`: `(B(H) ⊗ 1) ξ` spans `H ⊗ H`.
pub fn is_marginally_cyclic(xi: &ComplexVector, n: usize, tol: Tolerance) -> Result<bool> {
    Ok(schmidt_rank(xi, n, n, tol)? == n)
}

/// Trace norm of the realigned matrix `R_{(i,k),(j,l)} = ρ_{(i,j),(k,l)}`.
pub fn realignment_value(rho: &BipartiteDensity) -> Result<f64> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let m = rho.matrix();
    let realigned = ComplexMatrix::from_fn(da * da, db * db, |row, col| {
        let (i, k) = (row / da, row % da);
        let (j, l) = (col / db, col % db);
        m[(i * db + j, k * db + l)]
    });
    Ok(singular_values(&realigned)?.iter().sum())
}

pub fn ppt_verdict(rho: &BipartiteDensity, tol: Tolerance) -> Result<Verdict> {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let pt = partial_transpose(rho.matrix(), da, db)?;
    let min_pt = *hermitian_eigenvalues(&pt)?
        .first()
        .ok_or_else(|| Error::DimensionMismatch("empty state".into()))?;
    let norm = hermitian_eigenvalues(rho.matrix())?
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if min_pt < -tol.rel_eps * norm {
        return Ok(Verdict {
            kind: VerdictKind::EntangledNpt,
            witness: min_pt,
            criterion: Criterion::Ppt,
        });
    }
    if da * db <= PPT_DECISIVE_DIM {
        return Ok(Verdict {
            kind: VerdictKind::SeparablePptExact,
            witness: min_pt,
            criterion: Criterion::Ppt,
        });
    }
    let excess = realignment_value(rho)? - 1.0;
    let kind = if excess > tol.rel_eps {
        VerdictKind::EntangledRealignment
    } else {
        VerdictKind::Unknown
    };
    Ok(Verdict {
        kind,
        witness: excess,
        criterion: Criterion::Realignment,
    })
}

/// Verdict on the Choi state. An entangled Choi state means the map preserves
/// entanglement at every marginally cyclic input; a separable one means it
/// breaks entanglement.
pub fn classify_channel(phi: &KrausChannel, tol: Tolerance) -> Result<Verdict> {
    ppt_verdict(&phi.choi_state(), tol)
}

/// The first `r` columns of a `q × q` unitary mixing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneCertificate {
    coeffs: ComplexMatrix,
}

impl RankOneCertificate {
    /// Zero rows are appended until the matrix has `q` rows.
    pub fn new(coeffs: ComplexMatrix, q: usize) -> Result<Self> {
        if coeffs.nrows() > q {
            return Err(Error::InvalidCertificate(format!(
                "certificate has {} rows, at most {q} allowed",
                coeffs.nrows()
            )));
        }
        let padded = coeffs.resize_vertically(q, num_complex::Complex64::new(0.0, 0.0));
        Ok(RankOneCertificate { coeffs: padded })
    }

    /// `λ_ij = δ_ij`: certifies a tuple that already consists of rank-one operators.
    pub fn identity_columns(q: usize, r: usize) -> Result<Self> {
        if r > q {
            return Err(Error::InvalidCertificate(format!("r={r} exceeds q={q}")));
        }
        Ok(RankOneCertificate {
            coeffs: ComplexMatrix::identity(q, r),
        })
    }

    pub fn coeffs(&self) -> &ComplexMatrix {
        &self.coeffs
    }

    pub fn required_rows(phi: &KrausChannel) -> usize {
        let (m, n) = (phi.dim_k(), phi.dim_h());
        m * m * n * n + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub valid: bool,
    pub orthonormality_defect: f64,
    pub max_combination_rank: usize,
    pub failure: Option<String>,
}

/// Checks that the certificate's columns are orthonormal and that every row
/// combination `Σ_j λ_ij v_j` has rank at most one.
pub fn verify_rank_one_certificate(
    phi: &KrausChannel,
    cert: &RankOneCertificate,
    tol: Tolerance,
) -> Result<CertificateCheck> {
    let q = RankOneCertificate::required_rows(phi);
    let r = phi.len();
    let c = cert.coeffs();
    if c.nrows() != q || c.ncols() != r {
        return Err(Error::InvalidCertificate(format!(
            "expected a {q}x{r} coefficient matrix, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    let defect = unitarity_defect(c);
    let scale = phi.ops().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut max_rank = 0;
    for i in 0..q {
        let combo = phi
            .ops()
            .iter()
            .enumerate()
            .fold(ComplexMatrix::zeros(phi.dim_k(), phi.dim_h()), |acc, (j, v)| {
                acc + v * c[(i, j)]
            });
        max_rank = max_rank.max(numerical_rank_scaled(&combo, tol, scale)?);
    }
    let failure = if defect > tol.rel_eps * (r as f64).sqrt().max(1.0) {
        Some(format!("columns are not orthonormal (defect {defect:.3e})"))
    } else if max_rank > 1 {
        Some(format!("a combination has rank {max_rank} > 1"))
    } else {
        None
    };
    Ok(CertificateCheck {
        valid: failure.is_none(),
        orthonormality_defect: defect,
        max_combination_rank: max_rank,
        failure,
    })
}
