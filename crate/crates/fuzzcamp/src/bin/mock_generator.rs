//! Deterministic stand-in for a Csmith-style random program generator.
//!
//! Usage: `mock-generator [--feature|--no-feature ...] --seed <u64> -o <path>`
//!
//! Emits a program whose embedded markers drive the mock compiler; a slice
//! of seeds deliberately fails (exit 1, nothing written) so harnesses can
//! exercise generator-error handling.

use std::process::exit;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut flags: Vec<String> = Vec::new();
    let mut seed: Option<u64> = None;
    let mut output: Option<String> = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        match arg.as_str() {
            "--seed" => {
                seed = iter.next().and_then(|v| v.parse().ok());
                if seed.is_none() {
                    usage("--seed needs an unsigned integer");
                }
            }
            "-o" | "--output" => {
                output = iter.next();
                if output.is_none() {
                    usage("-o needs a path");
                }
            }
            other if other.starts_with("--") => flags.push(other.to_string()),
            other => usage(&format!("unexpected argument {other:?}")),
        }
    }
    let seed = seed.unwrap_or_else(|| usage("--seed is required"));
    let output = output.unwrap_or_else(|| usage("-o is required"));

    if !flags.is_empty() {
        if let Err(e) = fuzzcamp::features::parse_flags(&flags) {
            eprintln!("mock-generator: {e}");
            exit(2);
        }
    }

    match fuzzcamp::mock::generate_program(&flags, seed) {
        Some(text) => {
            if let Err(e) = std::fs::write(&output, text) {
                eprintln!("mock-generator: cannot write {output}: {e}");
                exit(2);
            }
        }
        None => {
            eprintln!("mock-generator: induced generation failure (seed {seed})");
            exit(1);
        }
    }
}

fn usage(msg: &str) -> ! {
    eprintln!("mock-generator: {msg}");
    eprintln!("usage: mock-generator [--feature|--no-feature ...] --seed <u64> -o <path>");
    exit(2);
}
