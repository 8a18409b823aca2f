use serde::Serialize;

use crate::channel::KrausChannel;
use crate::entanglement::{classify_channel, realignment_value, ChannelClass, Verdict};
use crate::error::{Error, Result};
use crate::invariants::{is_extremal, wedge_invariants, ExtremalityReport};
use crate::linalg::Tolerance;

#[derive(Debug, Clone, Serialize)]
pub struct Dims {
    pub n: usize,
    pub m: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct WedgeSummary {
    pub w: usize,
    pub w_star: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witnesses {
    pub min_pt_eigenvalue: Option<f64>,
    pub realignment_value: f64,
    pub extremality_margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    pub rel_eps: f64,
    pub size_guard: usize,
}

/// Everything `analyze` reports about one channel.
#[derive(Debug, Clone, Serialize)]
pub struct ChannelReport {
    pub dims: Dims,
    pub tuple_length: usize,
    pub rank: usize,
    pub extremal: bool,
    pub extremality: ExtremalityReport,
    /// Computed on the minimal tuple; `None` when the tensor powers exceed the size guard.
    pub wedge: Option<WedgeSummary>,
    pub verdict: Verdict,
    pub classification: ChannelClass,
    pub witnesses: Witnesses,
    pub tolerances: Tolerances,
    /// Echoed from the channel file when it was sampled.
    pub seed: Option<crate::sampling::SeedSpec>,
}

pub fn analyze(phi: &KrausChannel, tol: Tolerance, size_guard: usize) -> Result<ChannelReport> {
    let reduced = phi.reduce_minimal(tol)?;
    let extremality = is_extremal(phi, tol)?;
    let wedge = match wedge_invariants(&reduced, tol, size_guard) {
        Ok(report) => Some(WedgeSummary {
            w: report.w,
            w_star: report.w_star,
        }),
        Err(Error::SizeGuard { .. }) => None,
        Err(e) => return Err(e),
    };
    let verdict = classify_channel(phi, tol)?;
    let choi = phi.choi_state();
    let min_pt_eigenvalue = match verdict.criterion() {
        crate::entanglement::Criterion::Ppt => Some(verdict.witness()),
        crate::entanglement::Criterion::Realignment => None,
    };
    Ok(ChannelReport {
        dims: Dims {
            n: phi.dim_h(),
            m: phi.dim_k(),
        },
        tuple_length: phi.len(),
        rank: reduced.len(),
        extremal: extremality.extremal,
        witnesses: Witnesses {
            min_pt_eigenvalue,
            realignment_value: realignment_value(&choi)?,
            extremality_margin: extremality.min_singval,
        },
        extremality,
        wedge,
        classification: verdict.channel_class(),
        verdict,
        tolerances: Tolerances {
            rel_eps: tol.rel_eps,
            size_guard,
        },
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DEFAULT_SIZE_GUARD;

    #[test]
    fn identity_report() {
        let r = analyze(&KrausChannel::identity(2), Tolerance::default(), DEFAULT_SIZE_GUARD).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.extremal);
        assert_eq!(r.classification, ChannelClass::EntanglementPreserving);
        let w = r.wedge.unwrap();
        assert_eq!((w.w, w.w_star), (2, 2));
    }

    #[test]
    fn depolarizing_report() {
        let r = analyze(&KrausChannel::depolarizing(2, 2), Tolerance::default(), DEFAULT_SIZE_GUARD)
            .unwrap();
        assert_eq!(r.rank, 4);
        assert!(!r.extremal);
        assert_eq!(r.classification, ChannelClass::EntanglementBreaking);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["classification"], "entanglement-breaking");
        assert_eq!(json["verdict"]["kind"], "separable_ppt_exact");
    }

    #[test]
    fn oversized_wedge_is_omitted() {
        let r = analyze(&KrausChannel::depolarizing(3, 3), Tolerance::default(), DEFAULT_SIZE_GUARD)
            .unwrap();
        assert!(r.wedge.is_none());
        assert_eq!(r.rank, 9);
    }
}
