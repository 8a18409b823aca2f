use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use channel_dichotomy::entanglement::{classify_channel, verify_rank_one_certificate, RankOneCertificate};
use channel_dichotomy::experiments::{
    run_critical_rank_scan, run_cyclicity_density, run_ep_probability, run_extremal_fraction,
    run_rank_concentration, run_zero_one, ExperimentResult,
};
use channel_dichotomy::io::{load_certificate, load_channel_file, load_holevo, ChannelFile};
use channel_dichotomy::report::analyze;
use channel_dichotomy::sampling::{make_extremal, sample_holevo, sample_vr};
use channel_dichotomy::{from_holevo, Error, HolevoForm, KrausChannel, SeedSpec, Tolerance};
use serde_json::json;

use crate::{Command, Common, ExperimentCommand, MakeKind, TolArgs, THREADS_ENV};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: if e.is_numerical() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

fn invalid(message: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Sizes the global rayon pool from `CHANNEL_DICHOTOMY_THREADS`, if set.
pub fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| invalid(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| invalid(format!("cannot configure thread pool: {e}")))
}

fn tolerance(args: TolArgs) -> CliResult<Tolerance> {
    Ok(Tolerance::new(args.tol)?)
}

fn write_or_print(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| invalid(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_channel(path: &Path, tol: Tolerance) -> CliResult<(KrausChannel, Option<SeedSpec>)> {
    let file = load_channel_file(path).map_err(|e| with_path(e, path))?;
    let seed = file.seed;
    Ok((file.into_channel(tol).map_err(|e| with_path(e, path))?, seed))
}

fn with_path(e: Error, path: &Path) -> CliError {
    let mut err = CliError::from(e);
    err.message = format!("{}: {}", path.display(), err.message);
    err
}

fn channel_json(phi: &KrausChannel, seed: Option<SeedSpec>) -> String {
    let mut file = ChannelFile::from_channel(phi);
    file.seed = seed;
    serde_json::to_string_pretty(&file).expect("channel serializes")
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
        let generated = now.as_secs().wrapping_mul(1_000_000_007) ^ u64::from(now.subsec_nanos());
        eprintln!("no --seed given; using generated seed {generated}");
        generated
    })
}

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Sample {
            n,
            m,
            rank,
            seed,
            stream,
            out,
        } => {
            if n == 0 || m == 0 || rank == 0 {
                return Err(invalid("--n, --m and --rank must be positive"));
            }
            if rank * m < n {
                return Err(Error::EmptyManifold { n, m, r: rank }.into());
            }
            let spec = SeedSpec::new(resolve_seed(seed), stream);
            let phi = sample_vr(n, m, rank, spec)?;
            write_or_print(out.as_deref(), &channel_json(&phi, Some(spec)))
        }
        Command::Analyze {
            channel,
            tol,
            size_guard,
        } => {
            let tol = tolerance(tol)?;
            let (phi, seed) = read_channel(&channel, tol)?;
            let mut report = analyze(&phi, tol, size_guard)?;
            report.seed = seed;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            Ok(())
        }
        Command::Classify { channel, tol } => {
            let tol = tolerance(tol)?;
            let (phi, _) = read_channel(&channel, tol)?;
            let verdict = classify_channel(&phi, tol)?;
            let doc = json!({ "verdict": verdict, "classification": verdict.channel_class() });
            println!("{}", serde_json::to_string_pretty(&doc).expect("verdict serializes"));
            Ok(())
        }
        Command::Certify { channel, cert, tol } => {
            let tol = tolerance(tol)?;
            let (phi, _) = read_channel(&channel, tol)?;
            let cert = match cert {
                Some(path) => load_certificate(&path, &phi).map_err(|e| with_path(e, &path))?,
                None => RankOneCertificate::identity_columns(RankOneCertificate::required_rows(&phi), phi.len())?,
            };
            let check = verify_rank_one_certificate(&phi, &cert, tol)?;
            println!("{}", serde_json::to_string_pretty(&check).expect("check serializes"));
            Ok(())
        }
        Command::Make {
            kind,
            n,
            m,
            rank,
            holevo,
            terms,
            seed,
            tol,
            out,
        } => {
            let tol = tolerance(tol)?;
            if n == 0 || m == 0 {
                return Err(invalid("--n and --m must be positive"));
            }
            let (phi, spec) = match kind {
                MakeKind::Extremal => {
                    let r = rank.ok_or_else(|| invalid("--kind extremal needs --rank"))?;
                    (make_extremal(n, m, r)?, None)
                }
                MakeKind::Holevo => {
                    let (form, spec) = holevo_form(n, m, holevo.as_deref(), terms, seed, tol)?;
                    (from_holevo(&form, tol)?, spec)
                }
            };
            write_or_print(out.as_deref(), &channel_json(&phi, spec))
        }
        Command::Experiment { kind } => experiment(kind),
    }
}

fn holevo_form(
    n: usize,
    m: usize,
    file: Option<&Path>,
    terms: Option<usize>,
    seed: Option<u64>,
    tol: Tolerance,
) -> CliResult<(HolevoForm, Option<SeedSpec>)> {
    let (form, spec) = match (file, terms) {
        (Some(_), Some(_)) => return Err(invalid("--holevo and --terms are mutually exclusive")),
        (Some(path), None) => (load_holevo(path, tol).map_err(|e| with_path(e, path))?, None),
        (None, Some(s)) => {
            let spec = SeedSpec::new(resolve_seed(seed), 0);
            (sample_holevo(n, m, s, spec)?, Some(spec))
        }
        (None, None) => (HolevoForm::depolarizing(n, m), None),
    };
    if (form.dim_h(), form.dim_k()) != (n, m) {
        return Err(invalid(format!(
            "Holevo form has n={}, m={}, but --n {n} --m {m} was given",
            form.dim_h(),
            form.dim_k()
        )));
    }
    Ok((form, spec))
}

struct Outputs {
    json: String,
    csv: String,
}

fn emit(common: &Common, outputs: Outputs) -> CliResult<()> {
    if let Some(path) = &common.csv {
        write_file(path, &outputs.csv)?;
    }
    if let Some(path) = &common.out {
        write_file(path, &outputs.json)?;
    }
    println!("{}", outputs.json);
    Ok(())
}

fn write_file(path: &PathBuf, text: &str) -> CliResult<()> {
    let text = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    fs::write(path, text).map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn result_outputs(result: ExperimentResult) -> CliResult<Outputs> {
    Ok(Outputs {
        csv: result.to_csv()?,
        json: result.to_json(),
    })
}

fn experiment(kind: ExperimentCommand) -> CliResult<()> {
    let (common, outputs) = match kind {
        ExperimentCommand::Ep { dims, common } => {
            let (tol, seed) = (tolerance(common.tol)?, resolve_seed(common.seed));
            let result = run_ep_probability(dims.n, dims.m, dims.rank, common.trials, seed, tol)?;
            (common, result_outputs(result)?)
        }
        ExperimentCommand::Zeroone { channel, common } => {
            let (tol, seed) = (tolerance(common.tol)?, resolve_seed(common.seed));
            let (phi, _) = read_channel(&channel, tol)?;
            let result = run_zero_one(&phi, common.trials, seed, tol)?;
            (common, result_outputs(result)?)
        }
        ExperimentCommand::Extremal { dims, common } => {
            let (tol, seed) = (tolerance(common.tol)?, resolve_seed(common.seed));
            let result = run_extremal_fraction(dims.n, dims.m, dims.rank, common.trials, seed, tol)?;
            (common, result_outputs(result)?)
        }
        ExperimentCommand::Cyclicity { n, common } => {
            let (tol, seed) = (tolerance(common.tol)?, resolve_seed(common.seed));
            let result = run_cyclicity_density(n, common.trials, seed, tol)?;
            (common, result_outputs(result)?)
        }
        ExperimentCommand::Rank { dims, common } => {
            let (tol, seed) = (tolerance(common.tol)?, resolve_seed(common.seed));
            let result = run_rank_concentration(dims.n, dims.m, dims.rank, common.trials, seed, tol)?;
            (common, result_outputs(result)?)
        }
        ExperimentCommand::Scan { n, m, common } => {
            let (tol, seed) = (tolerance(common.tol)?, resolve_seed(common.seed));
            if common.trials == 0 {
                return Err(invalid("trials must be at least 1"));
            }
            let scan = run_critical_rank_scan(n, m, common.trials, seed, tol)?;
            let outputs = Outputs {
                csv: scan.to_csv()?,
                json: scan.to_json(),
            };
            (common, outputs)
        }
    };
    emit(&common, outputs)
}
