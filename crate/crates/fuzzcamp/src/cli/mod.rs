//! Command-line front end: `extract`, `cluster`, `gen-config`, `campaign`,
//! `report`, and `replay`.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error (with a
//! machine-readable JSON line on stderr). An optional `--config` TOML file
//! supplies defaults for any flag not given explicitly; precedence is
//! flags > file > built-in defaults. All randomness enters through `--seed`;
//! a missing seed is drawn from system entropy and recorded in the manifest.

mod manifest;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use fuzzcamp::campaign::{
    load_ledger, replay_trial, run_campaign, CampaignSpec, CommandTemplate,
};
use fuzzcamp::cluster::{cluster, load_centroids, save_centroids, ClusterParams};
use fuzzcamp::confgen::{CentroidSet, ConfigDrawLine, ConfigStream};
use fuzzcamp::corpus::{ingest, load_dataset, save_dataset, stats, stats_csv, CorpusStats};
use fuzzcamp::report::{feature_frequency, features_csv, summarize, summary_csv};

use manifest::{now_ms, RunManifest};

const VERSION_STRING: &str = concat!(env!("CARGO_PKG_VERSION"), " (formats v1)");

static CANCEL: AtomicBool = AtomicBool::new(false);

#[derive(Debug, Parser)]
#[command(
    name = "fuzzcamp",
    version = VERSION_STRING,
    about = "Compiler-fuzzing campaign toolkit: mine features from failing C programs, \
             cluster them, and drive time-budgeted differential-testing campaigns"
)]
struct Cli {
    /// Flat TOML file supplying defaults for any flag of the chosen
    /// subcommand
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract feature vectors from a corpus of C programs into a dataset
    Extract(ExtractArgs),
    /// Run K-Means over a dataset and write the centroids file
    Cluster(ClusterArgs),
    /// Sample generator configurations from centroids (JSONL)
    GenConfig(GenConfigArgs),
    /// Run a time-budgeted differential-testing campaign
    Campaign(CampaignArgs),
    /// Aggregate ledgers into summary and feature-frequency tables
    Report(ReportArgs),
    /// Re-run one recorded trial and compare its classification
    Replay(ReplayArgs),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
struct ExtractArgs {
    /// Corpus root directory
    #[arg(long, value_name = "DIR")]
    corpus: PathBuf,
    /// Include glob, repeatable (default *.c)
    #[arg(long, value_name = "GLOB")]
    include: Vec<String>,
    /// Dataset output file (JSONL)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Stats CSV path (default: <out>.stats.csv)
    #[arg(long, value_name = "FILE")]
    stats_csv: Option<PathBuf>,
    /// Stats JSON path (default: <out>.stats.json)
    #[arg(long, value_name = "FILE")]
    stats_json: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
struct ClusterArgs {
    /// Dataset file produced by `extract`
    #[arg(long, value_name = "FILE")]
    dataset: PathBuf,
    /// Number of clusters
    #[arg(long)]
    k: usize,
    /// RNG seed (drawn from entropy when omitted)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeded restarts
    #[arg(long, default_value_t = 10)]
    n_init: usize,
    /// Iteration cap per restart
    #[arg(long, default_value_t = 300)]
    max_iter: usize,
    /// Relative inertia improvement threshold
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// Centroids output file (JSON)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
struct GenConfigArgs {
    /// Centroids file from `cluster`
    #[arg(long, value_name = "FILE", conflicts_with = "default_baseline")]
    centroids: Option<PathBuf>,
    /// Emit empty flag lists (generator defaults) instead of sampling
    #[arg(long, action = ArgAction::SetTrue)]
    default_baseline: bool,
    /// RNG seed (drawn from entropy when omitted)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of configurations to emit
    #[arg(long)]
    count: u64,
    /// Output file (stdout when omitted)
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
struct CampaignArgs {
    /// Centroids file from `cluster`
    #[arg(long, value_name = "FILE", conflicts_with = "default_baseline")]
    centroids: Option<PathBuf>,
    /// Run the generator with its default configuration (control arm)
    #[arg(long, action = ArgAction::SetTrue)]
    default_baseline: bool,
    /// Generator command template with {flags} {seed} {output}
    #[arg(long, value_name = "TPL", allow_hyphen_values = true)]
    generator_cmd: String,
    /// Compiler command template with {optlevel} {input} {output}
    #[arg(long, value_name = "TPL", allow_hyphen_values = true)]
    compiler_cmd: String,
    /// Two optimization levels, comma-separated
    #[arg(long, value_name = "LO,HI", default_value = "-O0,-O3", allow_hyphen_values = true)]
    opt_levels: String,
    /// Per-translation compile timeout (seconds or 10s/1m/2h)
    #[arg(long, value_name = "DUR", default_value = "10")]
    compile_timeout: String,
    /// Per-execution run timeout
    #[arg(long, value_name = "DUR", default_value = "10")]
    run_timeout: String,
    /// Campaign time budget (e.g. 13h, 30m, 60s)
    #[arg(long, value_name = "DUR")]
    budget: String,
    /// RNG seed (drawn from entropy when omitted)
    #[arg(long)]
    seed: Option<u64>,
    /// Trial worker pool size
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Directory for failing programs and trial artifacts
    #[arg(long, value_name = "DIR")]
    artifacts: PathBuf,
    /// Ledger output file (JSONL)
    #[arg(long, value_name = "FILE")]
    ledger: PathBuf,
    /// Stop after this many trials even if budget remains
    #[arg(long, value_name = "N")]
    max_trials: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
struct ReportArgs {
    /// Ledger file, repeatable
    #[arg(long, value_name = "FILE", required = true)]
    ledger: Vec<PathBuf>,
    /// Corpus stats JSON from `extract`
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
    /// Centroids file, repeatable
    #[arg(long, value_name = "FILE")]
    centroids: Vec<PathBuf>,
    /// Frequency band thresholds lo,hi
    #[arg(long, value_name = "LO,HI", default_value = "0.33,0.66")]
    bands: String,
    /// Output directory (summary.csv, summary.json, features.csv)
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
struct ReplayArgs {
    /// Ledger file holding the trial
    #[arg(long, value_name = "FILE")]
    ledger: PathBuf,
    /// Trial id to re-run
    #[arg(long)]
    trial: u64,
    /// Scratch directory (temporary when omitted)
    #[arg(long, value_name = "DIR")]
    scratch: Option<PathBuf>,
}

pub fn run() -> i32 {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let cli = match parse_with_config(&argv) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            emit_error(&e);
            2
        }
    }
}

/// Parses argv, then re-parses with config-file values appended for every
/// flag the command line did not set explicitly. The first pass is lenient
/// so that a flag required on the command line can still be satisfied from
/// the file.
fn parse_with_config(argv: &[OsString]) -> Result<Cli, i32> {
    let probe = Cli::command()
        .ignore_errors(true)
        .try_get_matches_from(argv)
        .ok();
    let config_path = probe
        .as_ref()
        .and_then(|m| m.get_one::<PathBuf>("config").cloned());
    let (Some(config_path), Some(matches)) = (config_path, probe) else {
        return Cli::try_parse_from(argv).map_err(handle_clap_error);
    };
    let table = match read_config_table(&config_path) {
        Ok(t) => t,
        Err(e) => {
            emit_error(&e);
            return Err(2);
        }
    };
    let Some((sub_name, sub_matches)) = matches.subcommand() else {
        return Cli::try_parse_from(argv).map_err(handle_clap_error);
    };
    let command = Cli::command();
    let Some(sub_command) = command.find_subcommand(sub_name) else {
        return Cli::try_parse_from(argv).map_err(handle_clap_error);
    };

    let mut extended: Vec<OsString> = argv.to_vec();
    for (key, value) in &table {
        let known = sub_command
            .get_arguments()
            .any(|a| a.get_long() == Some(key.as_str()));
        if !known {
            eprintln!("warning: config key {key:?} is not a flag of {sub_name:?}; ignored");
            continue;
        }
        let explicit = sub_matches
            .value_source(&key.replace('-', "_"))
            .map(|s| s == clap::parser::ValueSource::CommandLine)
            .unwrap_or(false);
        if explicit {
            continue;
        }
        match value {
            toml::Value::Boolean(true) => extended.push(format!("--{key}").into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                for item in items {
                    extended.push(format!("--{key}").into());
                    extended.push(toml_scalar(item).into());
                }
            }
            other => {
                extended.push(format!("--{key}").into());
                extended.push(toml_scalar(other).into());
            }
        }
    }
    Cli::try_parse_from(&extended).map_err(handle_clap_error)
}

fn toml_scalar(value: &toml::Value) -> String {
    match value {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn read_config_table(path: &Path) -> Result<BTreeMap<String, toml::Value>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(table.into_iter().collect())
}

fn handle_clap_error(e: clap::Error) -> i32 {
    match e.kind() {
        ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion => {
            print!("{e}");
            0
        }
        _ => {
            eprint!("{e}");
            1
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Corpus(#[from] fuzzcamp::corpus::CorpusError),
    #[error(transparent)]
    Cluster(#[from] fuzzcamp::cluster::ClusterError),
    #[error(transparent)]
    Campaign(#[from] fuzzcamp::campaign::CampaignError),
    #[error(transparent)]
    Report(#[from] fuzzcamp::report::ReportError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("replay mismatch: recorded {recorded}, replayed {replayed}")]
    ReplayMismatch { recorded: String, replayed: String },
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Usage(_) => "usage",
            CliError::Corpus(_) => "corpus",
            CliError::Cluster(_) => "cluster",
            CliError::Campaign(_) => "campaign",
            CliError::Report(_) => "report",
            CliError::Io(_) => "io",
            CliError::ReplayMismatch { .. } => "replay-mismatch",
        }
    }
}

fn emit_error(e: &CliError) {
    let line = serde_json::json!({ "error": e.to_string(), "kind": e.kind() });
    eprintln!("{line}");
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Extract(args) => cmd_extract(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::GenConfig(args) => cmd_gen_config(args),
        Command::Campaign(args) => cmd_campaign(args),
        Command::Report(args) => cmd_report(args),
        Command::Replay(args) => cmd_replay(args),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(rand::random)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    name.push_str(suffix);
    path.with_file_name(name)
}

fn parameters_json<T: Serialize>(args: &T, seed: Option<u64>) -> serde_json::Value {
    let mut value = serde_json::to_value(args).expect("args serialize");
    if let (Some(obj), Some(seed)) = (value.as_object_mut(), seed) {
        obj.insert("seed".to_string(), serde_json::json!(seed));
    }
    value
}

fn cmd_extract(args: ExtractArgs) -> Result<(), CliError> {
    let started = now_ms();
    let dataset = ingest(&args.corpus, &args.include)?;
    save_dataset(&dataset, &args.out)?;
    let corpus_stats = stats(&dataset);
    let csv_path = args
        .stats_csv
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".stats.csv"));
    let json_path = args
        .stats_json
        .clone()
        .unwrap_or_else(|| with_suffix(&args.out, ".stats.json"));
    fs::write(&csv_path, stats_csv(&corpus_stats))?;
    fs::write(
        &json_path,
        serde_json::to_string_pretty(&corpus_stats).expect("stats"),
    )?;
    RunManifest::new("extract", parameters_json(&args, None), started)
        .write_next_to(&args.out)?;
    println!(
        "{}",
        serde_json::json!({
            "dataset": args.out,
            "totalFiles": corpus_stats.total_files,
            "parsableFiles": corpus_stats.parsable_files,
        })
    );
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), CliError> {
    let started = now_ms();
    let seed = resolve_seed(args.seed);
    let dataset = load_dataset(&args.dataset)?;
    let params = ClusterParams {
        k: args.k,
        n_init: args.n_init,
        max_iter: args.max_iter,
        seed,
        tolerance: args.tolerance,
    };
    let result = cluster(&dataset, &params)?;
    save_centroids(&result, &args.out)?;
    RunManifest::new("cluster", parameters_json(&args, Some(seed)), started)
        .write_next_to(&args.out)?;
    println!(
        "{}",
        serde_json::json!({
            "centroids": args.out,
            "k": args.k,
            "seed": seed,
            "inertia": result.inertia,
            "iterations": result.iterations_run,
            "restart": result.restart_index,
            "clusterSizes": result.cluster_sizes,
        })
    );
    Ok(())
}

fn load_stream(
    centroids: &Option<PathBuf>,
    default_baseline: bool,
    seed: u64,
) -> Result<ConfigStream, CliError> {
    match (centroids, default_baseline) {
        (Some(path), false) => Ok(ConfigStream::new(CentroidSet::load(path)?, seed)),
        (None, true) => Ok(ConfigStream::default_baseline(seed)),
        (None, false) => Err(CliError::Usage(
            "one of --centroids or --default-baseline is required".to_string(),
        )),
        (Some(_), true) => unreachable!("clap conflicts_with forbids this"),
    }
}

fn cmd_gen_config(args: GenConfigArgs) -> Result<(), CliError> {
    let started = now_ms();
    let seed = resolve_seed(args.seed);
    let mut stream = load_stream(&args.centroids, args.default_baseline, seed)?;
    let mut lines = String::new();
    for _ in 0..args.count {
        let draw = stream.next_config();
        let line = ConfigDrawLine::from(&draw);
        lines.push_str(&serde_json::to_string(&line).expect("draw line"));
        lines.push('\n');
    }
    match &args.out {
        Some(path) => {
            fs::write(path, lines)?;
            RunManifest::new("gen-config", parameters_json(&args, Some(seed)), started)
                .write_next_to(path)?;
        }
        None => {
            print!("{lines}");
        }
    }
    Ok(())
}

/// Parses `12`, `1.5`, `500ms`, `45s`, `30m`, `13h`.
fn parse_duration(text: &str) -> Result<Duration, CliError> {
    let text = text.trim();
    let (number, scale) = if let Some(v) = text.strip_suffix("ms") {
        (v, 0.001)
    } else if let Some(v) = text.strip_suffix('s') {
        (v, 1.0)
    } else if let Some(v) = text.strip_suffix('m') {
        (v, 60.0)
    } else if let Some(v) = text.strip_suffix('h') {
        (v, 3600.0)
    } else {
        (text, 1.0)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse duration {text:?}")))?;
    if value < 0.0 || !value.is_finite() {
        return Err(CliError::Usage(format!("negative duration {text:?}")));
    }
    Ok(Duration::from_secs_f64(value * scale))
}

fn parse_pair(text: &str, what: &str) -> Result<(String, String), CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok((a.to_string(), b.to_string())),
        _ => Err(CliError::Usage(format!(
            "{what} must be two comma-separated values, got {text:?}"
        ))),
    }
}

extern "C" fn cancel_handler(_: libc::c_int) {
    CANCEL.store(true, Ordering::Relaxed);
}

fn install_signal_handlers() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGINT, cancel_handler as *const () as usize);
        libc::signal(libc::SIGTERM, cancel_handler as *const () as usize);
    }
}

fn cmd_campaign(args: CampaignArgs) -> Result<(), CliError> {
    let started = now_ms();
    let seed = resolve_seed(args.seed);
    let stream = load_stream(&args.centroids, args.default_baseline, seed)?;
    let opt_levels = parse_pair(&args.opt_levels, "--opt-levels")?;
    let spec = CampaignSpec {
        generator_cmd: CommandTemplate::parse(&args.generator_cmd)?,
        compiler_cmd: CommandTemplate::parse(&args.compiler_cmd)?,
        opt_levels,
        compile_timeout: parse_duration(&args.compile_timeout)?,
        run_timeout: parse_duration(&args.run_timeout)?,
        time_budget: parse_duration(&args.budget)?,
        rng_seed: seed,
        workers: args.workers,
        artifact_dir: args.artifacts.clone(),
        ledger_path: args.ledger.clone(),
        max_trials: args.max_trials,
    };
    install_signal_handlers();
    let run = run_campaign(&spec, stream, Some(&CANCEL))?;
    RunManifest::new("campaign", parameters_json(&args, Some(seed)), started)
        .write_next_to(&args.ledger)?;
    println!(
        "{}",
        serde_json::json!({
            "ledger": run.ledger_path,
            "seed": seed,
            "elapsedSecs": run.elapsed.as_secs_f64(),
            "summary": run.summary,
        })
    );
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let started = now_ms();
    let bands = {
        let (lo, hi) = parse_pair(&args.bands, "--bands")?;
        let parse = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad band threshold {v:?}")))
        };
        (parse(&lo)?, parse(&hi)?)
    };
    let mut summaries = Vec::new();
    for ledger in &args.ledger {
        summaries.push(summarize(ledger)?);
    }
    let corpus_stats: Option<CorpusStats> = match &args.stats {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            Some(serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("cannot parse stats {}: {e}", path.display()))
            })?)
        }
        None => None,
    };
    let mut runs = Vec::new();
    for path in &args.centroids {
        let (_, centroids) = load_centroids(path)?;
        runs.push((path.display().to_string(), centroids));
    }
    let frequency = feature_frequency(corpus_stats.as_ref(), &runs, bands)?;

    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("summary.csv"), summary_csv(&summaries)?)?;
    fs::write(
        args.out.join("summary.json"),
        serde_json::to_string_pretty(&summaries).expect("summaries"),
    )?;
    fs::write(args.out.join("features.csv"), features_csv(&frequency)?)?;
    fs::write(
        args.out.join("features.json"),
        serde_json::to_string_pretty(&frequency).expect("frequency"),
    )?;
    RunManifest::new("report", parameters_json(&args, None), started)
        .write_to(&args.out.join("manifest.json"))?;
    println!(
        "{}",
        serde_json::json!({
            "out": args.out,
            "ledgers": summaries.len(),
            "centroidRuns": runs.len(),
        })
    );
    Ok(())
}

fn cmd_replay(args: ReplayArgs) -> Result<(), CliError> {
    let ledger = load_ledger(&args.ledger)?;
    let record = ledger
        .trials
        .iter()
        .find(|t| t.trial_id == args.trial)
        .ok_or(fuzzcamp::campaign::CampaignError::TrialNotFound { trial_id: args.trial })?;
    let temp;
    let scratch: &Path = match &args.scratch {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            dir
        }
        None => {
            temp = tempdir()?;
            &temp
        }
    };
    let result = replay_trial(&ledger.header, record, scratch)?;
    println!(
        "{}",
        serde_json::json!({
            "trialId": args.trial,
            "recorded": result.recorded_class.name(),
            "replayed": result.replayed_class.name(),
            "reproduced": result.reproduced(),
        })
    );
    if result.reproduced() {
        Ok(())
    } else {
        Err(CliError::ReplayMismatch {
            recorded: result.recorded_class.name().to_string(),
            replayed: result.replayed_class.name().to_string(),
        })
    }
}

fn tempdir() -> std::io::Result<PathBuf> {
    let dir = std::env::temp_dir().join(format!(
        "fuzzcamp-replay-{}-{}",
        std::process::id(),
        now_ms()
    ));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

// keep stdout line-buffered output flushed on abnormal exits
#[allow(dead_code)]
fn flush_stdout() {
    let _ = std::io::stdout().flush();
}
