//! Per-level outcomes and the failure taxonomy.
//!
//! `classify` is a total, pure function of the two level outcomes; the
//! ledger stores both so every class is re-derivable after the fact.

use serde::{Deserialize, Serialize};

/// What happened at one optimization level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum LevelStatus {
    /// Compiled and ran to a normal exit.
    Ok,
    CompilerCrash,
    CompileTimeout,
    /// Ordinary diagnostic reject (exit 1 without an ICE message).
    CompileError,
    RunTimeout,
    /// The compiled program was killed by a signal.
    RunCrash,
}

impl LevelStatus {
    pub const ALL: [LevelStatus; 6] = [
        LevelStatus::Ok,
        LevelStatus::CompilerCrash,
        LevelStatus::CompileTimeout,
        LevelStatus::CompileError,
        LevelStatus::RunTimeout,
        LevelStatus::RunCrash,
    ];
}

/// How a process ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExitDescriptor {
    Code(i32),
    Signal(i32),
    TimedOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Durations {
    pub compile_secs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_secs: Option<f64>,
}

/// Outcome of compile-then-run at one level. The stdout digest is present
/// exactly when the status is `Ok`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelOutcome {
    pub status: LevelStatus,
    pub compile_exit: ExitDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_exit: Option<ExitDescriptor>,
    /// Byte-exact hash of the program's stdout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stdout_sha256: Option<String>,
    /// First 4 KiB of stdout, lossily decoded, for human triage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stdout_head: Option<String>,
    pub durations: Durations,
}

/// Trial classification. One class per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FailureClass {
    None,
    Miscompilation,
    CrashO0,
    CrashO3,
    CrashBoth,
    TimeoutO0,
    TimeoutO3,
    TimeoutBoth,
    /// A run timed out at either level; never counted as miscompilation
    /// because a slow program and a wrong infinite loop are indistinguishable
    /// here.
    RunDivergenceTimeout,
    GeneratorError,
    /// The compiler rejected the program outright. The class also absorbs
    /// the one-sided reject, which the taxonomy has no separate slot for.
    CompileErrorBoth,
}

impl FailureClass {
    pub const ALL: [FailureClass; 11] = [
        FailureClass::None,
        FailureClass::Miscompilation,
        FailureClass::CrashO0,
        FailureClass::CrashO3,
        FailureClass::CrashBoth,
        FailureClass::TimeoutO0,
        FailureClass::TimeoutO3,
        FailureClass::TimeoutBoth,
        FailureClass::RunDivergenceTimeout,
        FailureClass::GeneratorError,
        FailureClass::CompileErrorBoth,
    ];

    /// Whether the class is evidence of behavior *differing between levels*.
    /// Both-level crashes and timeouts are recorded and reported but are not
    /// differential evidence.
    pub fn is_differential(self) -> bool {
        matches!(
            self,
            FailureClass::Miscompilation
                | FailureClass::CrashO0
                | FailureClass::CrashO3
                | FailureClass::TimeoutO0
                | FailureClass::TimeoutO3
        )
    }

    pub fn is_failure(self) -> bool {
        self != FailureClass::None
    }

    /// Stable name used for artifact subdirectories and JSON.
    pub fn name(self) -> &'static str {
        match self {
            FailureClass::None => "none",
            FailureClass::Miscompilation => "miscompilation",
            FailureClass::CrashO0 => "crashO0",
            FailureClass::CrashO3 => "crashO3",
            FailureClass::CrashBoth => "crashBoth",
            FailureClass::TimeoutO0 => "timeoutO0",
            FailureClass::TimeoutO3 => "timeoutO3",
            FailureClass::TimeoutBoth => "timeoutBoth",
            FailureClass::RunDivergenceTimeout => "runDivergenceTimeout",
            FailureClass::GeneratorError => "generatorError",
            FailureClass::CompileErrorBoth => "compileErrorBoth",
        }
    }
}

/// Classifies a trial from its two level outcomes.
///
/// Precedence: compiler crashes, then compile timeouts, then compile
/// rejects, then run timeouts; only when both levels produced a running
/// program is observable behavior (run exit plus stdout digest) compared.
pub fn classify(o0: &LevelOutcome, o3: &LevelOutcome) -> FailureClass {
    use LevelStatus::*;
    match (o0.status, o3.status) {
        (CompilerCrash, CompilerCrash) => return FailureClass::CrashBoth,
        (CompilerCrash, _) => return FailureClass::CrashO0,
        (_, CompilerCrash) => return FailureClass::CrashO3,
        _ => {}
    }
    match (o0.status, o3.status) {
        (CompileTimeout, CompileTimeout) => return FailureClass::TimeoutBoth,
        (CompileTimeout, _) => return FailureClass::TimeoutO0,
        (_, CompileTimeout) => return FailureClass::TimeoutO3,
        _ => {}
    }
    if o0.status == CompileError || o3.status == CompileError {
        return FailureClass::CompileErrorBoth;
    }
    if o0.status == RunTimeout || o3.status == RunTimeout {
        return FailureClass::RunDivergenceTimeout;
    }
    // both levels ran: statuses are Ok or RunCrash
    if o0.run_exit == o3.run_exit && o0.stdout_sha256 == o3.stdout_sha256 {
        FailureClass::None
    } else {
        FailureClass::Miscompilation
    }
}
