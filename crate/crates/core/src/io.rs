//! JSON file formats for channels, Holevo forms and rank-one certificates.
//!
//! Matrices are written as arrays of rows, each row an array of `[re, im]`
//! pairs. On input a flat row-major array of pairs is also accepted.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{HolevoForm, KrausChannel};
use crate::entanglement::RankOneCertificate;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::sampling::SeedSpec;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Rows(Vec<Vec<[f64; 2]>>),
    Flat(Vec<[f64; 2]>),
}

impl MatrixJson {
    pub fn from_matrix(a: &ComplexMatrix) -> Self {
        MatrixJson::Rows(
            (0..a.nrows())
                .map(|i| (0..a.ncols()).map(|j| [a[(i, j)].re, a[(i, j)].im]).collect())
                .collect(),
        )
    }

    /// Converts to a matrix of the expected shape; the error names what is wrong.
    pub fn to_matrix(&self, rows: usize, cols: usize) -> std::result::Result<ComplexMatrix, String> {
        let entries: Vec<Complex64> = match self {
            MatrixJson::Rows(data) => {
                if data.len() != rows {
                    return Err(format!("expected {rows} rows, found {}", data.len()));
                }
                if let Some((i, row)) = data.iter().enumerate().find(|(_, row)| row.len() != cols) {
                    return Err(format!("row {i} has {} entries, expected {cols}", row.len()));
                }
                data.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect()
            }
            MatrixJson::Flat(data) => {
                if data.len() != rows * cols {
                    return Err(format!("expected {} entries, found {}", rows * cols, data.len()));
                }
                data.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
            }
        };
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err("non-finite entry".into());
        }
        Ok(ComplexMatrix::from_row_slice(rows, cols, &entries))
    }

    /// Side length if the matrix is square; shape errors surface in `to_matrix`.
    fn square_dim(&self) -> usize {
        match self {
            MatrixJson::Rows(data) => data.len(),
            MatrixJson::Flat(data) => (data.len() as f64).sqrt().round() as usize,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub dim_h: usize,
    pub dim_k: usize,
    pub kraus: Vec<MatrixJson>,
    /// Present on sampled channels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedSpec>,
}

impl ChannelFile {
    pub fn from_channel(phi: &KrausChannel) -> Self {
        ChannelFile {
            dim_h: phi.dim_h(),
            dim_k: phi.dim_k(),
            kraus: phi.ops().iter().map(MatrixJson::from_matrix).collect(),
            seed: None,
        }
    }

    pub fn into_channel(self, tol: Tolerance) -> Result<KrausChannel> {
        let ops = self
            .kraus
            .iter()
            .enumerate()
            .map(|(k, mat)| {
                mat.to_matrix(self.dim_k, self.dim_h).map_err(|msg| Error::InvalidChannel {
                    invariant: format!("shape: Kraus operator {k}: {msg}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(self.dim_h, self.dim_k, ops, tol)
    }
}

pub fn channel_to_json(phi: &KrausChannel) -> String {
    serde_json::to_string_pretty(&ChannelFile::from_channel(phi)).expect("channel serializes")
}

pub fn channel_from_json(text: &str, tol: Tolerance) -> Result<KrausChannel> {
    let file: ChannelFile = serde_json::from_str(text)?;
    file.into_channel(tol)
}

pub fn load_channel(path: &Path, tol: Tolerance) -> Result<KrausChannel> {
    channel_from_json(&fs::read_to_string(path)?, tol)
}

/// The raw file, before validation; keeps the recorded seed.
pub fn load_channel_file(path: &Path) -> Result<ChannelFile> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn save_channel(path: &Path, phi: &KrausChannel) -> Result<()> {
    fs::write(path, channel_to_json(phi) + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolevoFile {
    pub omegas: Vec<MatrixJson>,
    pub effects: Vec<MatrixJson>,
}

impl HolevoFile {
    pub fn from_form(h: &HolevoForm) -> Self {
        HolevoFile {
            omegas: h.omegas().iter().map(MatrixJson::from_matrix).collect(),
            effects: h.effects().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn into_form(self, tol: Tolerance) -> Result<HolevoForm> {
        let square = |list: &[MatrixJson], what: &str| -> Result<Vec<ComplexMatrix>> {
            list.iter()
                .enumerate()
                .map(|(k, mat)| {
                    let d = mat.square_dim();
                    mat.to_matrix(d, d).map_err(|msg| Error::InvalidHolevo {
                        invariant: format!("{what} {k}: {msg}"),
                    })
                })
                .collect()
        };
        HolevoForm::new(square(&self.omegas, "state")?, square(&self.effects, "effect")?, tol)
    }
}

pub fn load_holevo(path: &Path, tol: Tolerance) -> Result<HolevoForm> {
    let file: HolevoFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_form(tol)
}

/// `coeffs` may have fewer than `q = m²n² + 1` rows; missing rows are zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub coeffs: Vec<Vec<[f64; 2]>>,
}

impl CertificateFile {
    pub fn from_certificate(cert: &RankOneCertificate) -> Self {
        let c = cert.coeffs();
        CertificateFile {
            coeffs: (0..c.nrows())
                .map(|i| (0..c.ncols()).map(|j| [c[(i, j)].re, c[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn into_certificate(self, phi: &KrausChannel) -> Result<RankOneCertificate> {
        let r = phi.len();
        let rows = self.coeffs.len();
        let mat = MatrixJson::Rows(self.coeffs)
            .to_matrix(rows, r)
            .map_err(Error::InvalidCertificate)?;
        RankOneCertificate::new(mat, RankOneCertificate::required_rows(phi))
    }
}

pub fn load_certificate(path: &Path, phi: &KrausChannel) -> Result<RankOneCertificate> {
    let file: CertificateFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    file.into_certificate(phi)
}
