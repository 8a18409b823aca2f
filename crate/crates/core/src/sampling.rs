//! Seeded random generation of channels, vectors and unitaries.
//!
//! Every sampler is a pure function of a [`SeedSpec`]. Random channels of rank
//! `r` are drawn from the unitarily invariant measure on unital `r`-tuples by
//! stacking the tuple into one isometry `V: C^n → C^{rm}` and sampling `V`
//! from the Haar distribution on isometries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::{HolevoForm, KrausChannel};
use crate::error::{Error, Result};
use crate::linalg::{c64, inverse_sqrt_psd, phase_corrected_qr, ComplexMatrix, ComplexVector, Tolerance};

/// Identifies the generator and how a [`SeedSpec`] is mapped onto it.
pub const RNG_ID: &str = "rand_chacha::ChaCha20Rng(seed_from_u64(master_seed), set_stream(stream_index))";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// A new family of streams derived from this one, indexed by `index`.
    ///
    /// Used for nested trials, e.g. the input vectors drawn for one sampled channel.
    pub fn child(&self, index: u64) -> SeedSpec {
        let mixed = splitmix64(self.master_seed ^ splitmix64(self.stream_index.wrapping_add(0x5EED)));
        SeedSpec::new(mixed, index)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Fill row by row so the draw order does not depend on storage layout.
    let mut entries = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        entries.push(c64(s * re, s * im));
    }
    ComplexMatrix::from_row_slice(rows, cols, &entries)
}

/// Complex Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn sample_ginibre(rows: usize, cols: usize, seed: SeedSpec) -> ComplexMatrix {
    gaussian_matrix(rows, cols, &mut seed.rng())
}

fn haar_isometry(rows: usize, cols: usize, seed: SeedSpec) -> Result<ComplexMatrix> {
    let mut rng = seed.rng();
    loop {
        let g = gaussian_matrix(rows, cols, &mut rng);
        match phase_corrected_qr(&g) {
            Ok(q) => return Ok(q),
            // Probability zero; redraw from the same stream.
            Err(Error::NumericalFailure(_)) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Haar-random unital `r`-tuple of `m × n` operators.
pub fn sample_vr(n: usize, m: usize, r: usize, seed: SeedSpec) -> Result<KrausChannel> {
    if n == 0 || m == 0 || r == 0 {
        return Err(Error::InvalidParameter(format!(
            "dimensions and rank must be positive (n={n}, m={m}, r={r})"
        )));
    }
    if r * m < n {
        return Err(Error::EmptyManifold { n, m, r });
    }
    let v = haar_isometry(r * m, n, seed)?;
    let ops = (0..r).map(|k| v.rows(k * m, m).into_owned()).collect();
    Ok(KrausChannel::from_parts(n, m, ops))
}

/// Uniformly distributed unit vector in `C^d`.
pub fn sample_sphere(d: usize, seed: SeedSpec) -> ComplexVector {
    let mut rng = seed.rng();
    loop {
        let g = gaussian_matrix(d, 1, &mut rng).column(0).into_owned();
        let norm = g.norm();
        if norm > 0.0 {
            return g / c64(norm, 0.0);
        }
    }
}

/// Haar-random `d × d` unitary.
pub fn sample_unitary(d: usize, seed: SeedSpec) -> ComplexMatrix {
    haar_isometry(d, d, seed).expect("square Gaussian QR yields a unitary")
}

/// Random density matrix `G G* / tr(G G*)` with `G` a square Ginibre matrix.
pub fn sample_psd(d: usize, seed: SeedSpec) -> ComplexMatrix {
    let g = sample_ginibre(d, d, seed);
    let p = &g * g.adjoint();
    let tr = crate::linalg::trace(&p);
    p / tr
}

/// Random Holevo form with `s` terms: Hilbert–Schmidt random states on `K`,
/// and effects `S^{-1/2} A_k S^{-1/2}` from random positive `A_k` with `S = Σ A_k`.
pub fn sample_holevo(n: usize, m: usize, s: usize, seed: SeedSpec) -> Result<HolevoForm> {
    if n == 0 || m == 0 || s == 0 {
        return Err(Error::InvalidParameter(format!(
            "Holevo form needs positive n, m, s (n={n}, m={m}, s={s})"
        )));
    }
    let omegas: Vec<ComplexMatrix> = (0..s)
        .map(|k| sample_psd(m, seed.child(2 * k as u64)))
        .collect();
    let raw: Vec<ComplexMatrix> = (0..s)
        .map(|k| {
            let g = sample_ginibre(n, n, seed.child(2 * k as u64 + 1));
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(ComplexMatrix::zeros(n, n), |acc, a| acc + a);
    let root = inverse_sqrt_psd(&total)?;
    let effects = raw
        .iter()
        .map(|a| {
            let e = &root * a * &root;
            (&e + e.adjoint()) * c64(0.5, 0.0)
        })
        .collect();
    HolevoForm::new(omegas, effects, Tolerance::default())
}

/// Deterministic `r`-tuple whose products `v_i* v_j` are linearly independent.
///
/// With `e_i` and `f = e_1` standard basis vectors, `u_i = |f⟩⟨e_i|`, and `w`
/// the partial isometry sending `e_{r+j}` in `H` to `e_{1+j}` in `K`, the tuple is
/// `v_i = u_i + r^{-1/2} w`. Then `v_i* v_j = u_i* u_j + p^⊥/r` where `p^⊥` projects
/// onto the span of `e_{r+1}, …, e_n`.
pub fn make_extremal(n: usize, m: usize, r: usize) -> Result<KrausChannel> {
    if !(1 <= r && r <= n && n <= m) {
        return Err(Error::InvalidParameter(format!(
            "extremal construction needs 1 <= r <= n <= m, got r={r}, n={n}, m={m}"
        )));
    }
    let scale = 1.0 / (r as f64).sqrt();
    let ops = (0..r)
        .map(|i| {
            let mut v = ComplexMatrix::zeros(m, n);
            v[(0, i)] = c64(1.0, 0.0);
            for j in 0..n - r {
                v[(1 + j, r + j)] = c64(scale, 0.0);
            }
            v
        })
        .collect();
    KrausChannel::new(n, m, ops, Tolerance::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, numerical_rank, unitarity_defect};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = sample_vr(2, 3, 2, SeedSpec::new(11, 4)).unwrap();
        let b = sample_vr(2, 3, 2, SeedSpec::new(11, 4)).unwrap();
        assert_eq!(a, b);
        let c = sample_vr(2, 3, 2, SeedSpec::new(11, 5)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn child_streams_differ_from_parent() {
        let s = SeedSpec::new(3, 9);
        assert_ne!(s.child(0), SeedSpec::new(3, 0));
        assert_eq!(s.child(2), s.child(2));
        assert_ne!(s.child(2), SeedSpec::new(3, 8).child(2));
    }

    #[test]
    fn vr_with_one_dimensional_h() {
        let phi = sample_vr(1, 3, 4, SeedSpec::new(1, 0)).unwrap();
        let total: f64 = phi.ops().iter().map(|v| v.norm_squared()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vr_rank_one_square_is_unitary() {
        let phi = sample_vr(2, 2, 1, SeedSpec::new(1, 1)).unwrap();
        assert!(unitarity_defect(&phi.ops()[0]) < 1e-12);
        assert!((&phi.ops()[0] * phi.ops()[0].adjoint() - identity(2)).norm() < 1e-12);
    }

    #[test]
    fn vr_rejects_empty_manifold() {
        assert!(matches!(
            sample_vr(4, 1, 2, SeedSpec::new(0, 0)),
            Err(Error::EmptyManifold { n: 4, m: 1, r: 2 })
        ));
    }

    #[test]
    fn vr_is_unital_to_machine_precision() {
        for i in 0..50 {
            let phi = sample_vr(3, 2, 3, SeedSpec::new(5, i)).unwrap();
            assert!(phi.unitality_defect() <= 1e-12);
        }
    }

    #[test]
    fn sphere_and_unitary_small_cases() {
        let z = sample_sphere(1, SeedSpec::new(2, 0));
        assert!((z[0].norm() - 1.0).abs() < 1e-15);
        let u = sample_unitary(1, SeedSpec::new(2, 1));
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
        for i in 0..100 {
            assert!(unitarity_defect(&sample_unitary(4, SeedSpec::new(3, i))) <= 1e-12);
        }
    }

    #[test]
    fn extremal_tuple_products_have_expected_structure() {
        let phi = make_extremal(2, 2, 2).unwrap();
        // r = n: w = 0, so v_i* v_j are the matrix units e_{ij}.
        for i in 0..2 {
            for j in 0..2 {
                let prod = phi.ops()[i].adjoint() * &phi.ops()[j];
                let mut unit = ComplexMatrix::zeros(2, 2);
                unit[(i, j)] = c64(1.0, 0.0);
                assert!((prod - unit).norm() < 1e-15);
            }
        }
        let phi = make_extremal(3, 4, 2).unwrap();
        let mut perp = ComplexMatrix::zeros(3, 3);
        perp[(2, 2)] = c64(0.5, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let prod = phi.ops()[i].adjoint() * &phi.ops()[j];
                let mut expected = perp.clone();
                expected[(i, j)] += c64(1.0, 0.0);
                assert!((prod - expected).norm() < 1e-15);
            }
        }
        assert!(phi.unitality_defect() <= 1e-12);
        assert_eq!(phi.rank(tol()).unwrap(), 2);
    }

    #[test]
    fn extremal_rejects_bad_parameters() {
        assert!(make_extremal(2, 2, 3).is_err());
        assert!(make_extremal(3, 2, 1).is_err());
        assert!(make_extremal(2, 2, 0).is_err());
    }

    #[test]
    fn holevo_samples_are_valid() {
        for s in 1..=4 {
            let h = sample_holevo(2, 2, s, SeedSpec::new(8, s as u64)).unwrap();
            assert_eq!(h.omegas().len(), s);
            for w in h.omegas() {
                assert!(numerical_rank(w, tol()).unwrap() >= 1);
            }
        }
    }
}
