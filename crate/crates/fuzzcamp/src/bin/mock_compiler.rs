//! Deterministic stand-in for a C compiler under differential test.
//!
//! Usage: `mock-compiler <optlevel> <input.c> -o <output>`
//!
//! Reads the behavior marker planted by `mock-generator` and acts it out:
//! aborts, prints an ICE message, exits with a strange code, sleeps past the
//! harness timeout, rejects the input, or emits a runnable script printing
//! the program's checksum (wrong at one level for miscompile programs).

use std::process::exit;
use std::time::Duration;

use fuzzcamp::mock::{
    checksum_from_text, sleep_ms_from_env, CrashKind, MockBehavior,
};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (opt_level, input, output) = match &args[..] {
        [opt, input, dash_o, output] if dash_o == "-o" => {
            (opt.clone(), input.clone(), output.clone())
        }
        _ => {
            eprintln!("usage: mock-compiler <optlevel> <input.c> -o <output>");
            exit(2);
        }
    };

    let text = match std::fs::read_to_string(&input) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("mock-compiler: error: cannot read {input}: {e}");
            exit(1);
        }
    };

    let behavior = MockBehavior::parse(&text);
    let sleep_ms = sleep_ms_from_env();

    match &behavior {
        MockBehavior::Crash { level, kind } if MockBehavior::fires_at(level, &opt_level) => {
            match kind {
                CrashKind::Signal => unsafe { libc::abort() },
                CrashKind::IceMessage => {
                    eprintln!("{input}:1:1: internal compiler error: induced failure");
                    exit(1);
                }
                CrashKind::ExitCode => exit(4),
            }
        }
        MockBehavior::SlowCompile { level } if MockBehavior::fires_at(level, &opt_level) => {
            std::thread::sleep(Duration::from_millis(sleep_ms));
        }
        MockBehavior::CompileError => {
            eprintln!("{input}:1:1: error: synthetic reject");
            exit(1);
        }
        _ => {}
    }

    let mut checksum = checksum_from_text(&text).unwrap_or(0);
    if let MockBehavior::Miscompile { level } = &behavior {
        if MockBehavior::fires_at(level, &opt_level) {
            checksum ^= 1;
        }
    }
    let run_sleep = match &behavior {
        MockBehavior::SlowRun { level } if MockBehavior::fires_at(level, &opt_level) => {
            Some(sleep_ms as f64 / 1000.0)
        }
        _ => None,
    };

    let mut script = String::from("#!/bin/sh\n");
    if let Some(secs) = run_sleep {
        script.push_str(&format!("sleep {secs:.3}\n"));
    }
    script.push_str(&format!("echo \"checksum = {checksum:016x}\"\n"));
    script.push_str("exit 0\n");

    if let Err(e) = std::fs::write(&output, script) {
        eprintln!("mock-compiler: error: cannot write {output}: {e}");
        exit(1);
    }
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        let perms = std::fs::Permissions::from_mode(0o755);
        if let Err(e) = std::fs::set_permissions(&output, perms) {
            eprintln!("mock-compiler: error: cannot chmod {output}: {e}");
            exit(1);
        }
    }
}
