//! The time-budgeted differential-testing loop.
//!
//! Each trial: draw a configuration, generate a program, compile it at two
//! optimization levels under a timeout, run both binaries, compare, classify,
//! and append to the ledger. Failing trials keep their program (copied to
//! `<artifacts>/<class>/<id>.c`) plus binaries and captured streams; clean
//! trials are deleted. Aborts only when the generator or compiler executable
//! cannot be spawned at all; everything else is a recorded class.

mod classify;
mod exec;
mod ledger;

pub use classify::{
    classify, Durations, ExitDescriptor, FailureClass, LevelOutcome, LevelStatus,
};
pub use exec::{run_with_timeout, CmdOutput, CommandTemplate};
pub use ledger::{
    load_ledger, LedgerHeader, LedgerWriter, LoadedLedger, TrialOutcomes, TrialRecord, WallClock,
};

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::confgen::{ConfigDraw, ConfigStream};
use crate::features::parse_flags;
use crate::rng::mix;

/// Salt separating the generator seed chain from the config draw chain.
const GENERATOR_SEED_SALT: u64 = 0x6765_6e65_7261_7465;

const STDOUT_HEAD_LIMIT: usize = 4096;
const MESSAGE_SNIPPET_LIMIT: usize = 500;

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid campaign spec: {0}")]
    InvalidSpec(String),
    #[error("generator executable not found: {cmd}")]
    GeneratorNotFound { cmd: String },
    #[error("compiler executable not found: {cmd}")]
    CompilerNotFound { cmd: String },
    #[error("ledger corrupt at line {line}: {message}")]
    LedgerCorrupt { line: usize, message: String },
    #[error("trial {trial_id} not present in ledger")]
    TrialNotFound { trial_id: u64 },
    #[error("bad flags recorded in ledger: {0}")]
    BadRecordedFlags(#[from] crate::features::FeatureError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything a campaign needs to run. Command templates use `{flags}`,
/// `{seed}`, `{output}` (generator) and `{optlevel}`, `{input}`, `{output}`
/// (compiler); they are executed without shell interpretation.
#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub generator_cmd: CommandTemplate,
    pub compiler_cmd: CommandTemplate,
    pub opt_levels: (String, String),
    pub compile_timeout: Duration,
    pub run_timeout: Duration,
    pub time_budget: Duration,
    pub rng_seed: u64,
    pub workers: usize,
    pub artifact_dir: PathBuf,
    pub ledger_path: PathBuf,
    /// Optional hard cap on trial count, reached before the budget on
    /// deterministic comparison runs.
    pub max_trials: Option<u64>,
}

impl CampaignSpec {
    pub fn new(
        generator_cmd: &str,
        compiler_cmd: &str,
        artifact_dir: impl Into<PathBuf>,
        ledger_path: impl Into<PathBuf>,
    ) -> Result<CampaignSpec, CampaignError> {
        Ok(CampaignSpec {
            generator_cmd: CommandTemplate::parse(generator_cmd)?,
            compiler_cmd: CommandTemplate::parse(compiler_cmd)?,
            opt_levels: ("-O0".to_string(), "-O3".to_string()),
            compile_timeout: Duration::from_secs(10),
            run_timeout: Duration::from_secs(10),
            time_budget: Duration::from_secs(0),
            rng_seed: 0,
            workers: 1,
            artifact_dir: artifact_dir.into(),
            ledger_path: ledger_path.into(),
            max_trials: None,
        })
    }

    /// The artifact dir exactly as configured; relative paths stay relative
    /// in the ledger so reruns from different roots produce identical bytes.
    pub fn artifact_dir_string(&self) -> String {
        self.artifact_dir.display().to_string()
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.opt_levels.0.is_empty() || self.opt_levels.1.is_empty() {
            return Err(CampaignError::InvalidSpec(
                "optimization levels must be non-empty".to_string(),
            ));
        }
        if self.opt_levels.0 == self.opt_levels.1 {
            return Err(CampaignError::InvalidSpec(
                "optimization levels must be distinct".to_string(),
            ));
        }
        if self.compile_timeout.is_zero() || self.run_timeout.is_zero() {
            return Err(CampaignError::InvalidSpec(
                "timeouts must be positive".to_string(),
            ));
        }
        if self.workers == 0 {
            return Err(CampaignError::InvalidSpec(
                "worker count must be at least 1".to_string(),
            ));
        }
        for name in ["flags", "seed", "output"] {
            if !self.generator_cmd.has_placeholder(name) {
                return Err(CampaignError::InvalidSpec(format!(
                    "generator template misses {{{name}}}"
                )));
            }
        }
        for name in ["optlevel", "input", "output"] {
            if !self.compiler_cmd.has_placeholder(name) {
                return Err(CampaignError::InvalidSpec(format!(
                    "compiler template misses {{{name}}}"
                )));
            }
        }
        Ok(())
    }

    /// Rebuilds a runnable spec from a ledger header, pointing artifacts and
    /// ledger at a scratch location.
    pub fn from_header(header: &LedgerHeader, scratch: &Path) -> Result<CampaignSpec, CampaignError> {
        Ok(CampaignSpec {
            generator_cmd: CommandTemplate::parse(&header.generator_cmd)?,
            compiler_cmd: CommandTemplate::parse(&header.compiler_cmd)?,
            opt_levels: header.opt_levels.clone(),
            compile_timeout: Duration::from_secs_f64(header.compile_timeout_secs),
            run_timeout: Duration::from_secs_f64(header.run_timeout_secs),
            time_budget: Duration::from_secs_f64(header.budget_secs),
            rng_seed: header.seed,
            workers: 1,
            artifact_dir: scratch.join("artifacts"),
            ledger_path: scratch.join("replay-ledger.jsonl"),
            max_trials: header.max_trials,
        })
    }
}

/// Aggregated per-class counts for one campaign run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignSummary {
    pub trials: u64,
    pub failures: u64,
    pub class_counts: BTreeMap<String, u64>,
}

impl CampaignSummary {
    pub fn add(&mut self, class: FailureClass) {
        self.trials += 1;
        if class.is_failure() {
            self.failures += 1;
        }
        *self.class_counts.entry(class.name().to_string()).or_insert(0) += 1;
    }

    pub fn count(&self, class: FailureClass) -> u64 {
        self.class_counts.get(class.name()).copied().unwrap_or(0)
    }
}

#[derive(Debug)]
pub struct CampaignRun {
    pub summary: CampaignSummary,
    pub ledger_path: PathBuf,
    pub elapsed: Duration,
}

/// Runs the loop until the budget (or trial cap, or cancel flag) stops new
/// dispenses; in-flight trials always complete and reach the ledger.
pub fn run_campaign(
    spec: &CampaignSpec,
    stream: ConfigStream,
    cancel: Option<&AtomicBool>,
) -> Result<CampaignRun, CampaignError> {
    spec.validate()?;
    if stream.seed() != spec.rng_seed {
        return Err(CampaignError::InvalidSpec(format!(
            "config stream seed {} disagrees with campaign seed {}",
            stream.seed(),
            spec.rng_seed
        )));
    }
    fs::create_dir_all(&spec.artifact_dir)?;
    let header = LedgerHeader::new_for(spec, stream.label(), stream.is_baseline());
    let mut writer = LedgerWriter::create(&spec.ledger_path, &header)?;

    let start = Instant::now();
    let deadline = start + spec.time_budget;
    let cancelled = || cancel.map(|c| c.load(Ordering::Relaxed)).unwrap_or(false);
    let mut summary = CampaignSummary::default();

    if spec.workers <= 1 {
        let mut stream = stream;
        let mut trial_id: u64 = 0;
        while !cancelled()
            && Instant::now() < deadline
            && spec.max_trials.map(|m| trial_id < m).unwrap_or(true)
        {
            let draw = stream.next_config();
            let record = execute_trial(spec, trial_id, &draw)?;
            summary.add(record.failure_class);
            writer.append(&record)?;
            trial_id += 1;
        }
    } else {
        run_pool(spec, stream, cancel, deadline, &mut writer, &mut summary)?;
    }

    Ok(CampaignRun {
        summary,
        ledger_path: spec.ledger_path.clone(),
        elapsed: start.elapsed(),
    })
}

fn run_pool(
    spec: &CampaignSpec,
    stream: ConfigStream,
    cancel: Option<&AtomicBool>,
    deadline: Instant,
    writer: &mut LedgerWriter,
    summary: &mut CampaignSummary,
) -> Result<(), CampaignError> {
    let dispenser = Mutex::new((stream, 0u64));
    let abort = AtomicBool::new(false);
    let first_error: Mutex<Option<CampaignError>> = Mutex::new(None);
    let (tx, rx) = mpsc::channel::<(u64, TrialRecord)>();

    thread::scope(|scope| {
        for _ in 0..spec.workers {
            let tx = tx.clone();
            let dispenser = &dispenser;
            let abort = &abort;
            let first_error = &first_error;
            scope.spawn(move || loop {
                if abort.load(Ordering::Relaxed)
                    || cancel.map(|c| c.load(Ordering::Relaxed)).unwrap_or(false)
                {
                    return;
                }
                let (trial_id, draw) = {
                    let mut guard = dispenser.lock().expect("dispenser");
                    let issued = guard.1;
                    if Instant::now() >= deadline
                        || spec.max_trials.map(|m| issued >= m).unwrap_or(false)
                    {
                        return;
                    }
                    guard.1 += 1;
                    (issued, guard.0.next_config())
                };
                match execute_trial(spec, trial_id, &draw) {
                    Ok(record) => {
                        if tx.send((trial_id, record)).is_err() {
                            return;
                        }
                    }
                    Err(e) => {
                        abort.store(true, Ordering::Relaxed);
                        let mut slot = first_error.lock().expect("error slot");
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        return;
                    }
                }
            });
        }
        drop(tx);

        // single writer preserves trial-id order with a reorder buffer
        let mut pending: BTreeMap<u64, TrialRecord> = BTreeMap::new();
        let mut next_expected: u64 = 0;
        let mut write = |record: TrialRecord,
                         summary: &mut CampaignSummary|
         -> Result<(), CampaignError> {
            summary.add(record.failure_class);
            writer.append(&record)
        };
        for (trial_id, record) in rx.iter() {
            pending.insert(trial_id, record);
            while let Some(record) = pending.remove(&next_expected) {
                if let Err(e) = write(record, summary) {
                    abort.store(true, Ordering::Relaxed);
                    let mut slot = first_error.lock().expect("error slot");
                    if slot.is_none() {
                        *slot = Some(e);
                    }
                    break;
                }
                next_expected += 1;
            }
        }
        // drain whatever is left (gaps can exist after an abort)
        for (_, record) in std::mem::take(&mut pending) {
            let _ = write(record, summary);
        }
    });

    match first_error.into_inner().expect("error slot") {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// One full generate -> compile x2 -> run x2 -> classify cycle, including
/// artifact bookkeeping.
fn execute_trial(
    spec: &CampaignSpec,
    trial_id: u64,
    draw: &ConfigDraw,
) -> Result<TrialRecord, CampaignError> {
    let started_ms = ledger::now_ms();
    let work_dir = spec.artifact_dir.join("trials").join(trial_id.to_string());
    fs::create_dir_all(&work_dir)?;
    let program_path = work_dir.join("program.c");
    let generator_seed = mix(draw.draw_seed, GENERATOR_SEED_SALT);
    let flags = draw.flags();

    let argv = spec.generator_cmd.instantiate(
        Some(&flags),
        &[
            ("seed", generator_seed.to_string().as_str()),
            ("output", program_path.display().to_string().as_str()),
        ],
    );
    // the generator is bounded by the compile timeout; a hung generator
    // becomes a recorded generatorError, not a stuck campaign
    let gen_out = run_with_timeout(&argv, spec.compile_timeout, None).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            CampaignError::GeneratorNotFound {
                cmd: argv.first().cloned().unwrap_or_default(),
            }
        } else {
            CampaignError::Io(e)
        }
    })?;
    write_capture(&work_dir, "generator.stderr", &gen_out.stderr)?;

    let program_ok = gen_out.exit == ExitDescriptor::Code(0)
        && fs::metadata(&program_path).map(|m| m.len() > 0).unwrap_or(false);

    let (outcomes, generator_message) = if program_ok {
        let o0 = compile_and_run(spec, &program_path, &spec.opt_levels.0, &work_dir, "o0")?;
        let o3 = compile_and_run(spec, &program_path, &spec.opt_levels.1, &work_dir, "o3")?;
        (Some(TrialOutcomes { o0, o3 }), None)
    } else {
        let message = match gen_out.exit {
            ExitDescriptor::TimedOut => "generator timed out".to_string(),
            _ => snippet(&gen_out.stderr),
        };
        (None, Some(message))
    };

    let failure_class = match &outcomes {
        Some(t) => classify(&t.o0, &t.o3),
        None => FailureClass::GeneratorError,
    };

    let program_path_field = if failure_class.is_failure() {
        let class_dir = spec.artifact_dir.join(failure_class.name());
        fs::create_dir_all(&class_dir)?;
        let saved = class_dir.join(format!("{trial_id}.c"));
        if program_path.exists() {
            fs::copy(&program_path, &saved)?;
        } else {
            // generator produced nothing; preserve an empty artifact so the
            // saved-file count still matches the ledger
            fs::write(&saved, b"")?;
        }
        Some(format!(
            "{}/{}/{trial_id}.c",
            spec.artifact_dir_string(),
            failure_class.name()
        ))
    } else {
        fs::remove_dir_all(&work_dir).ok();
        None
    };

    Ok(TrialRecord {
        kind: "trial".to_string(),
        trial_id,
        centroid_index: draw.centroid_index,
        draw_seed: draw.draw_seed,
        flags,
        baseline: draw.config.is_none(),
        generator_seed,
        program_path: program_path_field,
        outcomes,
        generator_message,
        failure_class,
        differential: failure_class.is_differential(),
        wall_clock: WallClock {
            started_ms,
            finished_ms: ledger::now_ms(),
        },
    })
}

fn compile_and_run(
    spec: &CampaignSpec,
    program: &Path,
    opt_level: &str,
    work_dir: &Path,
    label: &str,
) -> Result<LevelOutcome, CampaignError> {
    let binary = work_dir.join(format!("prog.{label}"));
    let argv = spec.compiler_cmd.instantiate(
        None,
        &[
            ("optlevel", opt_level),
            ("input", program.display().to_string().as_str()),
            ("output", binary.display().to_string().as_str()),
        ],
    );
    let compile = run_with_timeout(&argv, spec.compile_timeout, None).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            CampaignError::CompilerNotFound {
                cmd: argv.first().cloned().unwrap_or_default(),
            }
        } else {
            CampaignError::Io(e)
        }
    })?;
    write_capture(work_dir, &format!("{label}.compile.stdout"), &compile.stdout)?;
    write_capture(work_dir, &format!("{label}.compile.stderr"), &compile.stderr)?;

    let mut outcome = LevelOutcome {
        status: LevelStatus::Ok,
        compile_exit: compile.exit,
        run_exit: None,
        stdout_sha256: None,
        stdout_head: None,
        durations: Durations {
            compile_secs: compile.duration_secs,
            run_secs: None,
        },
    };

    if compile.timed_out() {
        outcome.status = LevelStatus::CompileTimeout;
        return Ok(outcome);
    }
    if compiler_crashed(&compile) {
        outcome.status = LevelStatus::CompilerCrash;
        return Ok(outcome);
    }
    if compile.exit != ExitDescriptor::Code(0) || !binary.exists() {
        outcome.status = LevelStatus::CompileError;
        return Ok(outcome);
    }

    let run_argv = vec![binary.display().to_string()];
    let run = match run_with_timeout(&run_argv, spec.run_timeout, None) {
        Ok(run) => run,
        Err(_) => {
            // the produced "binary" would not even exec; treat as a reject
            outcome.status = LevelStatus::CompileError;
            return Ok(outcome);
        }
    };
    write_capture(work_dir, &format!("{label}.run.stdout"), &run.stdout)?;
    write_capture(work_dir, &format!("{label}.run.stderr"), &run.stderr)?;
    outcome.durations.run_secs = Some(run.duration_secs);

    match run.exit {
        ExitDescriptor::TimedOut => {
            outcome.status = LevelStatus::RunTimeout;
            outcome.run_exit = Some(ExitDescriptor::TimedOut);
        }
        ExitDescriptor::Signal(s) => {
            outcome.status = LevelStatus::RunCrash;
            outcome.run_exit = Some(ExitDescriptor::Signal(s));
        }
        ExitDescriptor::Code(c) => {
            outcome.status = LevelStatus::Ok;
            outcome.run_exit = Some(ExitDescriptor::Code(c));
            outcome.stdout_sha256 = Some(hex_digest(&run.stdout));
            outcome.stdout_head = Some(head_lossy(&run.stdout));
        }
    }
    Ok(outcome)
}

/// Crash predicate: killed by a signal, an exit code outside {0, 1}, or an
/// "internal compiler error" message. Exit 1 without the message is an
/// ordinary reject.
fn compiler_crashed(out: &CmdOutput) -> bool {
    match out.exit {
        ExitDescriptor::Signal(_) => true,
        ExitDescriptor::TimedOut => false,
        ExitDescriptor::Code(code) => {
            if code != 0 && code != 1 {
                return true;
            }
            String::from_utf8_lossy(&out.stderr)
                .to_lowercase()
                .contains("internal compiler error")
        }
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

fn head_lossy(bytes: &[u8]) -> String {
    let head = &bytes[..bytes.len().min(STDOUT_HEAD_LIMIT)];
    String::from_utf8_lossy(head).into_owned()
}

fn snippet(bytes: &[u8]) -> String {
    let text = String::from_utf8_lossy(bytes);
    text.chars().take(MESSAGE_SNIPPET_LIMIT).collect()
}

fn write_capture(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<()> {
    fs::write(dir.join(name), bytes)
}

/// Outcome of re-running one recorded trial.
#[derive(Debug)]
pub struct ReplayResult {
    pub recorded_class: FailureClass,
    pub replayed_class: FailureClass,
    pub record: TrialRecord,
}

impl ReplayResult {
    pub fn reproduced(&self) -> bool {
        self.recorded_class == self.replayed_class
    }
}

/// Re-runs one ledger trial from its recorded configuration and seeds, in a
/// scratch directory, and compares the classification.
pub fn replay_trial(
    header: &LedgerHeader,
    record: &TrialRecord,
    scratch: &Path,
) -> Result<ReplayResult, CampaignError> {
    let spec = CampaignSpec::from_header(header, scratch)?;
    fs::create_dir_all(&spec.artifact_dir)?;
    let config = if record.baseline {
        None
    } else {
        let mut parsed = parse_flags(&record.flags)?.config;
        parsed.source_centroid = record.centroid_index;
        parsed.draw_seed = record.draw_seed;
        Some(parsed)
    };
    let draw = ConfigDraw {
        index: record.trial_id,
        centroid_index: record.centroid_index,
        draw_seed: record.draw_seed,
        config,
    };
    let replayed = execute_trial(&spec, record.trial_id, &draw)?;
    Ok(ReplayResult {
        recorded_class: record.failure_class,
        replayed_class: replayed.failure_class,
        record: replayed,
    })
}

/// Re-derives every trial's class from its stored outcomes and checks the
/// ledger agrees.
pub fn verify_ledger_classes(ledger: &LoadedLedger) -> Result<(), CampaignError> {
    for (i, trial) in ledger.trials.iter().enumerate() {
        let derived = match &trial.outcomes {
            Some(t) => classify(&t.o0, &t.o3),
            None => FailureClass::GeneratorError,
        };
        if derived != trial.failure_class {
            return Err(CampaignError::LedgerCorrupt {
                line: i + 2,
                message: format!(
                    "stored class {} but outcomes derive {}",
                    trial.failure_class.name(),
                    derived.name()
                ),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::os::unix::fs::PermissionsExt;

    fn write_script(dir: &Path, name: &str, body: &str) -> PathBuf {
        let path = dir.join(name);
        fs::write(&path, format!("#!/bin/sh\n{body}")).unwrap();
        let mut perms = fs::metadata(&path).unwrap().permissions();
        perms.set_mode(0o755);
        fs::set_permissions(&path, perms).unwrap();
        path
    }

    /// Generator double: copies a canned program to the output path.
    fn echo_generator(dir: &Path, program_body: &str) -> PathBuf {
        let canned = dir.join("canned.c");
        fs::write(&canned, program_body).unwrap();
        write_script(
            dir,
            "gen.sh",
            &format!("out=\"\"\nwhile [ $# -gt 0 ]; do if [ \"$1\" = \"-o\" ]; then out=\"$2\"; shift; fi; shift; done\ncp {} \"$out\"\n", canned.display()),
        )
    }

    /// Compiler double: produces a runnable script that prints a checksum.
    fn passthrough_compiler(dir: &Path) -> PathBuf {
        write_script(
            dir,
            "cc.sh",
            "opt=$1; src=$2; out=$4\nprintf '#!/bin/sh\\necho \"checksum = 5\"\\n' > \"$out\"\nchmod +x \"$out\"\n",
        )
    }

    fn base_spec(dir: &Path, gen: &Path, cc: &Path) -> CampaignSpec {
        let mut spec = CampaignSpec::new(
            &format!("{} {{flags}} --seed {{seed}} -o {{output}}", gen.display()),
            &format!("{} {{optlevel}} {{input}} -o {{output}}", cc.display()),
            dir.join("artifacts"),
            dir.join("ledger.jsonl"),
        )
        .unwrap();
        spec.compile_timeout = Duration::from_secs(2);
        spec.run_timeout = Duration::from_secs(2);
        spec.time_budget = Duration::from_secs(5);
        spec.rng_seed = 1;
        spec.max_trials = Some(3);
        spec
    }

    #[test]
    fn spec_validation_catches_missing_placeholders() {
        let err = CampaignSpec::new("gen {seed} {output}", "cc {optlevel} {input} -o {output}", "a", "l")
            .unwrap()
            .validate()
            .unwrap_err();
        assert!(matches!(err, CampaignError::InvalidSpec(_)));
        let mut spec =
            CampaignSpec::new("g {flags} {seed} {output}", "c {optlevel} {input} {output}", "a", "l")
                .unwrap();
        spec.opt_levels = ("-O2".into(), "-O2".into());
        assert!(spec.validate().is_err());
    }

    #[test]
    fn clean_campaign_produces_none_classes_and_prunes_workdirs() {
        let dir = tempfile::tempdir().unwrap();
        let gen = echo_generator(dir.path(), "int main(void) { return 0; }\n");
        let cc = passthrough_compiler(dir.path());
        let spec = base_spec(dir.path(), &gen, &cc);
        let run = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap();
        assert_eq!(run.summary.trials, 3);
        assert_eq!(run.summary.count(FailureClass::None), 3);
        assert_eq!(run.summary.failures, 0);
        let ledger = load_ledger(&spec.ledger_path).unwrap();
        assert_eq!(ledger.trials.len(), 3);
        verify_ledger_classes(&ledger).unwrap();
        let o0 = &ledger.trials[0].outcomes.as_ref().unwrap().o0;
        assert_eq!(o0.status, LevelStatus::Ok);
        assert_eq!(o0.stdout_head.as_deref(), Some("checksum = 5\n"));
        for trial in &ledger.trials {
            assert!(trial.program_path.is_none());
        }
        assert!(!spec.artifact_dir.join("trials").join("0").exists());
    }

    #[test]
    fn generator_failure_is_recorded_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        let gen = write_script(dir.path(), "gen.sh", "echo boom >&2; exit 1");
        let cc = passthrough_compiler(dir.path());
        let spec = base_spec(dir.path(), &gen, &cc);
        let run = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap();
        assert_eq!(run.summary.count(FailureClass::GeneratorError), 3);
        let ledger = load_ledger(&spec.ledger_path).unwrap();
        assert!(ledger.trials[0]
            .generator_message
            .as_deref()
            .unwrap()
            .contains("boom"));
        // artifacts preserved even though no program text exists
        assert!(spec.artifact_dir.join("generatorError").join("0.c").exists());
    }

    #[test]
    fn missing_generator_aborts() {
        let dir = tempfile::tempdir().unwrap();
        let cc = passthrough_compiler(dir.path());
        let mut spec = base_spec(dir.path(), Path::new("/no/such/gen"), &cc);
        spec.max_trials = Some(1);
        let err = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap_err();
        assert!(matches!(err, CampaignError::GeneratorNotFound { .. }));
    }

    #[test]
    fn missing_compiler_aborts() {
        let dir = tempfile::tempdir().unwrap();
        let gen = echo_generator(dir.path(), "int main(void){return 0;}\n");
        let mut spec = base_spec(dir.path(), &gen, Path::new("/no/such/cc"));
        spec.max_trials = Some(1);
        let err = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap_err();
        assert!(matches!(err, CampaignError::CompilerNotFound { .. }));
    }

    #[test]
    fn compile_timeout_is_enforced_and_classified() {
        let dir = tempfile::tempdir().unwrap();
        let gen = echo_generator(dir.path(), "int main(void){return 0;}\n");
        let cc = write_script(dir.path(), "cc.sh", "sleep 10");
        let mut spec = base_spec(dir.path(), &gen, &cc);
        spec.compile_timeout = Duration::from_millis(400);
        spec.max_trials = Some(1);
        let started = Instant::now();
        let run = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap();
        assert_eq!(run.summary.count(FailureClass::TimeoutBoth), 1);
        let ledger = load_ledger(&spec.ledger_path).unwrap();
        let outcomes = ledger.trials[0].outcomes.as_ref().unwrap();
        assert_eq!(outcomes.o0.status, LevelStatus::CompileTimeout);
        // duration approximates the timeout, not the mock's sleep
        assert!(outcomes.o0.durations.compile_secs < 1.0);
        assert!(started.elapsed() < Duration::from_secs(5));
    }

    #[test]
    fn compiler_signal_is_a_crash() {
        let dir = tempfile::tempdir().unwrap();
        let gen = echo_generator(dir.path(), "int main(void){return 0;}\n");
        let cc = write_script(dir.path(), "cc.sh", "kill -ABRT $$");
        let mut spec = base_spec(dir.path(), &gen, &cc);
        spec.max_trials = Some(1);
        let run = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap();
        assert_eq!(run.summary.count(FailureClass::CrashBoth), 1);
        // failing program saved under the class directory
        assert!(spec.artifact_dir.join("crashBoth").join("0.c").exists());
    }

    #[test]
    fn ice_message_with_exit_one_is_a_crash() {
        let out = CmdOutput {
            exit: ExitDescriptor::Code(1),
            stdout: Vec::new(),
            stderr: b"prog.c:1: Internal Compiler Error: in gimplify".to_vec(),
            duration_secs: 0.1,
        };
        assert!(compiler_crashed(&out));
        let plain = CmdOutput {
            exit: ExitDescriptor::Code(1),
            stdout: Vec::new(),
            stderr: b"prog.c:1: error: expected ';'".to_vec(),
            duration_secs: 0.1,
        };
        assert!(!compiler_crashed(&plain));
        let weird_exit = CmdOutput {
            exit: ExitDescriptor::Code(4),
            stdout: Vec::new(),
            stderr: Vec::new(),
            duration_secs: 0.1,
        };
        assert!(compiler_crashed(&weird_exit));
    }

    #[test]
    fn miscompilation_detected_by_differing_output() {
        let dir = tempfile::tempdir().unwrap();
        let gen = echo_generator(dir.path(), "int main(void){return 0;}\n");
        // output depends on the optimization level
        let cc = write_script(
            dir.path(),
            "cc.sh",
            "opt=$1; out=$4\nprintf '#!/bin/sh\\necho \"checksum = %s\"\\n' \"$opt\" > \"$out\"\nchmod +x \"$out\"\n",
        );
        let mut spec = base_spec(dir.path(), &gen, &cc);
        spec.max_trials = Some(1);
        let run = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap();
        assert_eq!(run.summary.count(FailureClass::Miscompilation), 1);
    }

    #[test]
    fn budget_zero_gives_empty_ledger() {
        let dir = tempfile::tempdir().unwrap();
        let gen = echo_generator(dir.path(), "int main(void){return 0;}\n");
        let cc = passthrough_compiler(dir.path());
        let mut spec = base_spec(dir.path(), &gen, &cc);
        spec.time_budget = Duration::from_secs(0);
        spec.max_trials = None;
        let run = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap();
        assert_eq!(run.summary.trials, 0);
        assert_eq!(run.summary.failures, 0);
        let ledger = load_ledger(&spec.ledger_path).unwrap();
        assert!(ledger.trials.is_empty());
        assert_eq!(ledger.header.seed, 1);
    }

    #[test]
    fn replay_reproduces_classes() {
        let dir = tempfile::tempdir().unwrap();
        let gen = echo_generator(dir.path(), "int main(void){return 0;}\n");
        let cc = write_script(dir.path(), "cc.sh", "kill -SEGV $$");
        let mut spec = base_spec(dir.path(), &gen, &cc);
        spec.max_trials = Some(2);
        run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap();
        let ledger = load_ledger(&spec.ledger_path).unwrap();
        let scratch = tempfile::tempdir().unwrap();
        for trial in &ledger.trials {
            let result = replay_trial(&ledger.header, trial, scratch.path()).unwrap();
            assert!(result.reproduced(), "trial {}", trial.trial_id);
            assert_eq!(result.record.generator_seed, trial.generator_seed);
        }
    }

    #[test]
    fn worker_pool_preserves_trial_order() {
        let dir = tempfile::tempdir().unwrap();
        let gen = echo_generator(dir.path(), "int main(void){return 0;}\n");
        let cc = passthrough_compiler(dir.path());
        let mut spec = base_spec(dir.path(), &gen, &cc);
        spec.workers = 4;
        spec.max_trials = Some(12);
        let run = run_campaign(&spec, ConfigStream::default_baseline(1), None).unwrap();
        assert_eq!(run.summary.trials, 12);
        let ledger = load_ledger(&spec.ledger_path).unwrap();
        let ids: Vec<u64> = ledger.trials.iter().map(|t| t.trial_id).collect();
        assert_eq!(ids, (0..12).collect::<Vec<u64>>());
    }
}
