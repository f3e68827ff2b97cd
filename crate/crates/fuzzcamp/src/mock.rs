//! Deterministic generator/compiler doubles for end-to-end testing.
//!
//! The mock generator plants a `// mock-behavior:` marker in each program it
//! emits; the mock compiler reads the marker and acts it out (crash, sleep,
//! reject, or emit a runnable script printing a checksum). Because the
//! behavior is spelled out in the program text itself, the expected failure
//! class of every trial is recomputable from the saved program alone, which
//! is what makes campaign ledgers checkable against ground truth.
//!
//! Behavior frequencies per draw: ~10% miscompile, ~5% compiler crash,
//! ~5% compile timeout, ~2% generator failure, ~2% run timeout, ~2% compile
//! reject, rest clean. Markers name the default optimization levels -O0/-O3.
//! Timeout behaviors sleep `MOCK_SLEEP_MS` milliseconds (default 2000), so
//! campaigns must configure timeouts below that value.

use crate::campaign::FailureClass;
use crate::features::{parse_flags, FeatureId, FEATURE_COUNT};
use crate::rng::splitmix64;

pub const BEHAVIOR_MARKER: &str = "// mock-behavior:";
pub const CHECKSUM_MARKER: &str = "// mock-checksum:";
pub const SLEEP_ENV: &str = "MOCK_SLEEP_MS";
pub const DEFAULT_SLEEP_MS: u64 = 2000;

pub const LEVEL_FIRST: &str = "-O0";
pub const LEVEL_SECOND: &str = "-O3";
pub const LEVEL_BOTH: &str = "both";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashKind {
    Signal,
    IceMessage,
    ExitCode,
}

impl CrashKind {
    fn name(self) -> &'static str {
        match self {
            CrashKind::Signal => "signal",
            CrashKind::IceMessage => "ice",
            CrashKind::ExitCode => "exitcode",
        }
    }

    fn parse(s: &str) -> Option<CrashKind> {
        match s {
            "signal" => Some(CrashKind::Signal),
            "ice" => Some(CrashKind::IceMessage),
            "exitcode" => Some(CrashKind::ExitCode),
            _ => None,
        }
    }
}

/// What the planted marker instructs the mock compiler to do.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MockBehavior {
    Clean,
    GeneratorFail,
    Miscompile { level: String },
    Crash { level: String, kind: CrashKind },
    SlowCompile { level: String },
    SlowRun { level: String },
    CompileError,
}

impl MockBehavior {
    pub fn marker_line(&self) -> Option<String> {
        let body = match self {
            MockBehavior::Clean => "clean".to_string(),
            MockBehavior::GeneratorFail => return None,
            MockBehavior::Miscompile { level } => format!("miscompile level={level}"),
            MockBehavior::Crash { level, kind } => {
                format!("crash level={level} kind={}", kind.name())
            }
            MockBehavior::SlowCompile { level } => format!("slow-compile level={level}"),
            MockBehavior::SlowRun { level } => format!("slow-run level={level}"),
            MockBehavior::CompileError => "compile-error level=both".to_string(),
        };
        Some(format!("{BEHAVIOR_MARKER} {body}"))
    }

    /// Reads the behavior marker out of a generated program.
    pub fn parse(text: &str) -> MockBehavior {
        let line = match text.lines().find(|l| l.starts_with(BEHAVIOR_MARKER)) {
            Some(l) => l[BEHAVIOR_MARKER.len()..].trim(),
            None => return MockBehavior::Clean,
        };
        let mut words = line.split_whitespace();
        let head = words.next().unwrap_or("clean");
        let mut level = None;
        let mut kind = None;
        for word in words {
            if let Some(v) = word.strip_prefix("level=") {
                level = Some(v.to_string());
            } else if let Some(v) = word.strip_prefix("kind=") {
                kind = CrashKind::parse(v);
            }
        }
        let level = level.unwrap_or_else(|| LEVEL_BOTH.to_string());
        match head {
            "miscompile" => MockBehavior::Miscompile { level },
            "crash" => MockBehavior::Crash {
                level,
                kind: kind.unwrap_or(CrashKind::Signal),
            },
            "slow-compile" => MockBehavior::SlowCompile { level },
            "slow-run" => MockBehavior::SlowRun { level },
            "compile-error" => MockBehavior::CompileError,
            _ => MockBehavior::Clean,
        }
    }

    /// Whether a behavior scoped to `level` fires when compiling at
    /// `opt_level`.
    pub fn fires_at(level: &str, opt_level: &str) -> bool {
        level == LEVEL_BOTH || level == opt_level
    }
}

/// Picks the behavior for a generator seed. Pure; the campaign, the mock
/// binaries, and the tests all agree through this one function.
pub fn behavior_for_seed(seed: u64) -> MockBehavior {
    let h = splitmix64(seed);
    let bucket = h % 1000;
    let h2 = splitmix64(h);
    let pick_level = |h: u64| match h % 3 {
        0 => LEVEL_FIRST.to_string(),
        1 => LEVEL_SECOND.to_string(),
        _ => LEVEL_BOTH.to_string(),
    };
    let pick_side = |h: u64| {
        if h.is_multiple_of(2) {
            LEVEL_FIRST.to_string()
        } else {
            LEVEL_SECOND.to_string()
        }
    };
    match bucket {
        0..=99 => MockBehavior::Miscompile {
            level: pick_side(h2),
        },
        100..=149 => MockBehavior::Crash {
            level: pick_level(h2),
            kind: match splitmix64(h2) % 3 {
                0 => CrashKind::Signal,
                1 => CrashKind::IceMessage,
                _ => CrashKind::ExitCode,
            },
        },
        150..=199 => MockBehavior::SlowCompile {
            level: pick_level(h2),
        },
        200..=219 => MockBehavior::GeneratorFail,
        220..=239 => MockBehavior::SlowRun {
            level: pick_side(h2),
        },
        240..=259 => MockBehavior::CompileError,
        _ => MockBehavior::Clean,
    }
}

pub fn checksum_for_seed(seed: u64) -> u64 {
    splitmix64(seed ^ 0x6368_6563_6b73_756d)
}

/// One global-scope snippet per feature so extraction has something real to
/// find in generated programs.
fn snippet_for(feature: FeatureId) -> &'static str {
    match feature.name() {
        "argc" => "int main_like(int argc) { return argc; }",
        "arrays" => "static int g_arr[4];",
        "bitfields" => "struct mock_bits { unsigned f : 3; };",
        "comma-operators" => "static int g_comma_src; void use_comma(void) { int t = (g_comma_src, 2); (void)t; }",
        "compound-assignment" => "void use_compound(int v) { v += 3; (void)v; }",
        "consts" => "static const int g_const = 7;",
        "divs" => "int use_div(int a, int b) { return b ? a / b : 0; }",
        "pre-incr-operator" => "void use_pre_inc(int v) { ++v; (void)v; }",
        "pre-decr-operator" => "void use_pre_dec(int v) { --v; (void)v; }",
        "post-incr-operator" => "void use_post_inc(int v) { v++; (void)v; }",
        "post-decr-operator" => "void use_post_dec(int v) { v--; (void)v; }",
        "unary-plus-operator" => "static int g_uplus = +9;",
        "jumps" => "void use_jump(void) { goto out; out: return; }",
        "longlong" => "static long long g_wide;",
        "int8" => "typedef signed char int8_mock; static int8_mock g_i8;",
        "uint8" => "typedef unsigned char uint8_mock; static uint8_mock g_u8;",
        "float" => "static float g_float;",
        "inline-function" => "static inline int tiny(void) { return 1; }",
        "muls" => "int use_mul(int a, int b) { return a * b; }",
        "packed-struct" => "struct __attribute__((packed)) mock_packed { char c; int v; };",
        "pointers" => "static int *g_ptr;",
        "structs" => "struct mock_s { int a; };",
        "unions" => "union mock_u { int a; char b; };",
        "volatiles" => "static volatile int g_vol;",
        "volatile-pointers" => "static volatile int *g_volp;",
        "const-pointers" => "static const char *g_constp;",
        "global-variables" => "static int g_plain;",
        "builtins" => "void use_builtin(int *p) { __builtin_prefetch(p); }",
        _ => unreachable!("feature universe is fixed"),
    }
}

/// Deterministic program text for `(flags, seed)`, or `None` when the seed
/// falls in the generator-failure bucket. An empty flag list (the baseline
/// arm) behaves like all features enabled.
pub fn generate_program(flags: &[String], seed: u64) -> Option<String> {
    let behavior = behavior_for_seed(seed);
    if behavior == MockBehavior::GeneratorFail {
        return None;
    }
    let enabled: [bool; FEATURE_COUNT] = if flags.is_empty() {
        [true; FEATURE_COUNT]
    } else {
        // the mock is strict: unknown flags are a caller bug
        parse_flags(flags).expect("mock generator received invalid flags").config.enabled
    };
    let checksum = checksum_for_seed(seed);
    let mut text = String::new();
    text.push_str("/* deterministic mock program */\n");
    text.push_str(&format!("// mock-seed: {seed}\n"));
    if let Some(marker) = behavior.marker_line() {
        text.push_str(&marker);
        text.push('\n');
    }
    text.push_str(&format!("{CHECKSUM_MARKER} {checksum:016x}\n"));
    text.push('\n');
    for id in FeatureId::all() {
        if enabled[id.index()] {
            text.push_str(snippet_for(id));
            text.push('\n');
        }
    }
    text.push('\n');
    text.push_str(&format!(
        "int main(void) {{ /* prints checksum = {checksum:016x} */ return 0; }}\n"
    ));
    Some(text)
}

pub fn checksum_from_text(text: &str) -> Option<u64> {
    let line = text.lines().find(|l| l.starts_with(CHECKSUM_MARKER))?;
    u64::from_str_radix(line[CHECKSUM_MARKER.len()..].trim(), 16).ok()
}

/// Ground truth: the failure class a campaign at the default `-O0`/`-O3`
/// levels must assign to a trial whose program reads `text`. Empty text
/// stands for a failed generation.
pub fn expected_class(text: &str) -> FailureClass {
    if text.is_empty() {
        return FailureClass::GeneratorError;
    }
    match MockBehavior::parse(text) {
        MockBehavior::Clean => FailureClass::None,
        MockBehavior::GeneratorFail => FailureClass::GeneratorError,
        MockBehavior::Miscompile { .. } => FailureClass::Miscompilation,
        MockBehavior::Crash { level, .. } => match level.as_str() {
            LEVEL_BOTH => FailureClass::CrashBoth,
            LEVEL_FIRST => FailureClass::CrashO0,
            _ => FailureClass::CrashO3,
        },
        MockBehavior::SlowCompile { level } => match level.as_str() {
            LEVEL_BOTH => FailureClass::TimeoutBoth,
            LEVEL_FIRST => FailureClass::TimeoutO0,
            _ => FailureClass::TimeoutO3,
        },
        MockBehavior::SlowRun { .. } => FailureClass::RunDivergenceTimeout,
        MockBehavior::CompileError => FailureClass::CompileErrorBoth,
    }
}

pub fn sleep_ms_from_env() -> u64 {
    std::env::var(SLEEP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_SLEEP_MS)
}
