//! Seeded Monte Carlo experiments over random channels and random input vectors.
//!
//! Trial `t` of an experiment with master seed `s` draws from stream
//! `SeedSpec::new(s, t)`, so trials are independent of evaluation order and
//! each one can be replayed on its own. Trials run in parallel on the rayon
//! pool; outcomes are aggregated with order-independent counters.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::entanglement::{
    classify_channel, is_marginally_cyclic, ppt_verdict, ChannelClass, Verdict, PPT_DECISIVE_DIM,
};
use crate::error::{Error, Result};
use crate::invariants::is_extremal;
use crate::linalg::Tolerance;
use crate::sampling::{sample_sphere, sample_vr, SeedSpec, RNG_ID};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    EpProbability,
    ExtremalFraction,
    ZeroOne,
    CyclicityDensity,
    RankConcentration,
    CriticalRankScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerance,
}

impl ExperimentConfig {
    pub fn new(
        kind: ExperimentKind,
        n: usize,
        m: usize,
        r: usize,
        trials: usize,
        seed: u64,
        tol: Tolerance,
    ) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if n == 0 || m == 0 || r == 0 {
            return Err(Error::InvalidParameter(format!(
                "dimensions and rank must be positive (n={n}, m={m}, r={r})"
            )));
        }
        let samples_channels = matches!(
            kind,
            ExperimentKind::EpProbability
                | ExperimentKind::ExtremalFraction
                | ExperimentKind::RankConcentration
        );
        if samples_channels && r * m < n {
            return Err(Error::EmptyManifold { n, m, r });
        }
        Ok(ExperimentConfig {
            kind,
            n,
            m,
            r,
            trials,
            seed,
            tol,
        })
    }

    pub fn trial_seed(&self, trial: usize) -> SeedSpec {
        SeedSpec::new(self.seed, trial as u64)
    }
}

/// A binomial proportion with its Wilson score interval at 95%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn wilson_interval(successes: usize, trials: usize) -> Estimate {
    assert!(trials > 0 && successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // The bounds are exactly 0 and 1 at the extremes; pin them against roundoff.
    Estimate {
        fraction: p,
        ci_low: if successes == 0 { 0.0 } else { (center - half).max(0.0) },
        ci_high: if successes == trials { 1.0 } else { (center + half).min(1.0) },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: SeedSpec,
    pub outcome: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub tool_version: String,
    pub rng: String,
    pub config: ExperimentConfig,
    /// Name of the outcome class whose fraction is the headline estimate.
    pub target: String,
    pub counts: BTreeMap<String, usize>,
    pub estimates: BTreeMap<String, Estimate>,
    /// Set when some trials could not be decided, so the target fraction is a lower bound.
    pub lower_bound: bool,
    pub canonical_verdict: Option<Verdict>,
    pub per_trial: Vec<TrialRecord>,
    pub wall_clock_secs: f64,
}

impl ExperimentResult {
    pub fn count(&self, outcome: &str) -> usize {
        self.counts.get(outcome).copied().unwrap_or(0)
    }

    pub fn fraction(&self) -> f64 {
        self.count(&self.target) as f64 / self.config.trials as f64
    }

    pub fn estimate(&self) -> Estimate {
        wilson_interval(self.count(&self.target), self.config.trials)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// One row per outcome class, in sorted order.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "kind", "n", "m", "r", "trials", "seed", "outcome", "count", "fraction", "ci_low",
            "ci_high",
        ])
        .map_err(csv_error)?;
        let kind = serde_json::to_value(self.config.kind)?;
        let kind = kind.as_str().unwrap_or_default().to_string();
        for (outcome, est) in &self.estimates {
            w.write_record([
                kind.clone(),
                self.config.n.to_string(),
                self.config.m.to_string(),
                self.config.r.to_string(),
                self.config.trials.to_string(),
                self.config.seed.to_string(),
                outcome.clone(),
                self.count(outcome).to_string(),
                est.fraction.to_string(),
                est.ci_low.to_string(),
                est.ci_high.to_string(),
            ])
            .map_err(csv_error)?;
        }
        finish_csv(w)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Runs `trial` for every index, in parallel, and tallies the outcomes.
fn tally<F>(
    config: ExperimentConfig,
    target: &str,
    classes: &[&str],
    canonical_verdict: Option<Verdict>,
    trial: F,
) -> Result<ExperimentResult>
where
    F: Fn(SeedSpec) -> Result<&'static str> + Sync,
{
    let start = Instant::now();
    let per_trial = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = config.trial_seed(t);
            trial(seed).map(|outcome| TrialRecord {
                seed,
                outcome: outcome.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut counts: BTreeMap<String, usize> = classes.iter().map(|c| (c.to_string(), 0)).collect();
    for rec in &per_trial {
        *counts.entry(rec.outcome.clone()).or_default() += 1;
    }
    let estimates = counts
        .iter()
        .map(|(k, &v)| (k.clone(), wilson_interval(v, config.trials)))
        .collect();
    let lower_bound = counts.get(UNKNOWN).copied().unwrap_or(0) > 0;
    Ok(ExperimentResult {
        tool_version: TOOL_VERSION.to_string(),
        rng: RNG_ID.to_string(),
        config,
        target: target.to_string(),
        counts,
        estimates,
        lower_bound,
        canonical_verdict,
        per_trial,
        wall_clock_secs: start.elapsed().as_secs_f64(),
    })
}

pub const EP: &str = "entanglement_preserving";
pub const EB: &str = "entanglement_breaking";
pub const UNKNOWN: &str = "unknown";
pub const ENTANGLED: &str = "entangled";
pub const SEPARABLE: &str = "separable";

fn class_outcome(class: ChannelClass) -> &'static str {
    match class {
        ChannelClass::EntanglementPreserving => EP,
        ChannelClass::EntanglementBreaking => EB,
        ChannelClass::Undecided => UNKNOWN,
    }
}

fn state_outcome(v: &Verdict) -> &'static str {
    if v.is_entangled() {
        ENTANGLED
    } else if v.is_separable() {
        SEPARABLE
    } else {
        UNKNOWN
    }
}

/// One trial of the EP-probability experiment: sample and classify.
pub fn ep_trial(n: usize, m: usize, r: usize, seed: SeedSpec, tol: Tolerance) -> Result<ChannelClass> {
    let phi = sample_vr(n, m, r, seed)?;
    Ok(classify_channel(&phi, tol)?.channel_class())
}

/// Fraction of Haar-random rank-`r` channels that preserve entanglement.
pub fn run_ep_probability(
    n: usize,
    m: usize,
    r: usize,
    trials: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<ExperimentResult> {
    let cfg = ExperimentConfig::new(ExperimentKind::EpProbability, n, m, r, trials, seed, tol)?;
    let classes: &[&str] = if n * m <= PPT_DECISIVE_DIM {
        &[EP, EB]
    } else {
        &[EP, UNKNOWN]
    };
    tally(cfg, EP, classes, None, |s| {
        ep_trial(n, m, r, s, tol).map(class_outcome)
    })
}

/// Fraction of random input vectors at which the channel's output state is
/// entangled, alongside the verdict at the canonical vector.
pub fn run_zero_one(phi: &KrausChannel, trials: usize, seed: u64, tol: Tolerance) -> Result<ExperimentResult> {
    let (n, m) = (phi.dim_h(), phi.dim_k());
    if n * m > PPT_DECISIVE_DIM {
        return Err(Error::InvalidParameter(format!(
            "zero-one experiment needs m*n <= {PPT_DECISIVE_DIM}, got {}",
            n * m
        )));
    }
    let rank = phi.rank(tol)?;
    let cfg = ExperimentConfig::new(ExperimentKind::ZeroOne, n, m, rank, trials, seed, tol)?;
    let canonical = classify_channel(phi, tol)?;
    tally(cfg, ENTANGLED, &[ENTANGLED, SEPARABLE], Some(canonical), |s| {
        let xi = sample_sphere(n * n, s);
        Ok(state_outcome(&ppt_verdict(&phi.output_state(&xi)?, tol)?))
    })
}

impl ExperimentResult {
    /// For zero-one runs: the entangled fraction is exactly 0 or 1 and agrees
    /// with the canonical-vector verdict.
    pub fn is_zero_one_consistent(&self) -> bool {
        let Some(canonical) = self.canonical_verdict else {
            return false;
        };
        let entangled = self.count(ENTANGLED);
        let separable = self.count(SEPARABLE);
        if entangled + separable != self.config.trials {
            return false;
        }
        if canonical.is_entangled() {
            entangled == self.config.trials
        } else if canonical.is_separable() {
            separable == self.config.trials
        } else {
            false
        }
    }
}

pub const EXTREMAL: &str = "extremal";
pub const NOT_EXTREMAL: &str = "not_extremal";

pub fn run_extremal_fraction(
    n: usize,
    m: usize,
    r: usize,
    trials: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<ExperimentResult> {
    let cfg = ExperimentConfig::new(ExperimentKind::ExtremalFraction, n, m, r, trials, seed, tol)?;
    tally(cfg, EXTREMAL, &[EXTREMAL, NOT_EXTREMAL], None, |s| {
        let phi = sample_vr(n, m, r, s)?;
        Ok(if is_extremal(&phi, tol)?.extremal {
            EXTREMAL
        } else {
            NOT_EXTREMAL
        })
    })
}

pub const CYCLIC: &str = "cyclic";
pub const NOT_CYCLIC: &str = "not_cyclic";

/// Fraction of uniformly random unit vectors in `C^n ⊗ C^n` with full Schmidt rank.
pub fn run_cyclicity_density(n: usize, trials: usize, seed: u64, tol: Tolerance) -> Result<ExperimentResult> {
    let cfg = ExperimentConfig::new(ExperimentKind::CyclicityDensity, n, n, 1, trials, seed, tol)?;
    tally(cfg, CYCLIC, &[CYCLIC, NOT_CYCLIC], None, |s| {
        let xi = sample_sphere(n * n, s);
        Ok(if is_marginally_cyclic(&xi, n, tol)? {
            CYCLIC
        } else {
            NOT_CYCLIC
        })
    })
}

pub const FULL_RANK: &str = "rank_eq_r";
pub const DEFICIENT: &str = "rank_lt_r";

pub fn run_rank_concentration(
    n: usize,
    m: usize,
    r: usize,
    trials: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<ExperimentResult> {
    let cfg = ExperimentConfig::new(ExperimentKind::RankConcentration, n, m, r, trials, seed, tol)?;
    tally(cfg, FULL_RANK, &[FULL_RANK, DEFICIENT], None, |s| {
        let phi = sample_vr(n, m, r, s)?;
        Ok(if phi.reduce_minimal(tol)?.len() == r {
            FULL_RANK
        } else {
            DEFICIENT
        })
    })
}

/// EP probability for every rank `1..=mn`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub tool_version: String,
    pub rng: String,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<ExperimentResult>,
}

impl ScanResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["r", "ep_fraction", "ci_low", "ci_high"])
            .map_err(csv_error)?;
        for row in &self.rows {
            let est = row.estimate();
            w.write_record([
                row.config.r.to_string(),
                est.fraction.to_string(),
                est.ci_low.to_string(),
                est.ci_high.to_string(),
            ])
            .map_err(csv_error)?;
        }
        finish_csv(w)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan serializes")
    }

    /// Smallest rank whose EP fraction falls below one, if any.
    pub fn first_rank_below_one(&self) -> Option<usize> {
        self.rows
            .iter()
            .find(|row| row.count(EP) < row.config.trials)
            .map(|row| row.config.r)
    }
}

/// Each rank reuses the master seed, so row `r` equals `run_ep_probability`
/// with the same arguments.
pub fn run_critical_rank_scan(n: usize, m: usize, trials: usize, seed: u64, tol: Tolerance) -> Result<ScanResult> {
    if n * m > PPT_DECISIVE_DIM {
        return Err(Error::InvalidParameter(format!(
            "critical-rank scan needs m*n <= {PPT_DECISIVE_DIM}, got {}",
            n * m
        )));
    }
    let rows = (1..=n * m)
        .filter(|&r| r * m >= n)
        .map(|r| run_ep_probability(n, m, r, trials, seed, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        tool_version: TOOL_VERSION.to_string(),
        rng: RNG_ID.to_string(),
        n,
        m,
        trials,
        seed,
        rows,
    })
}

/// Dispatches on `cfg.kind` for the kinds that need no extra input.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let ExperimentConfig {
        n,
        m,
        r,
        trials,
        seed,
        tol,
        ..
    } = *cfg;
    match cfg.kind {
        ExperimentKind::EpProbability => run_ep_probability(n, m, r, trials, seed, tol),
        ExperimentKind::ExtremalFraction => run_extremal_fraction(n, m, r, trials, seed, tol),
        ExperimentKind::CyclicityDensity => run_cyclicity_density(n, trials, seed, tol),
        ExperimentKind::RankConcentration => run_rank_concentration(n, m, r, trials, seed, tol),
        ExperimentKind::ZeroOne | ExperimentKind::CriticalRankScan => Err(Error::InvalidParameter(
            "zero-one and scan experiments have their own entry points".into(),
        )),
    }
}
