//! Detects which of the 28 generator-controllable constructs occur in a C
//! source file.
//!
//! Pipeline per file: strip comments, inspect and drop preprocessor lines
//! (`#pragma pack` is counted first), tokenize, then run the detection rules.
//! Files the pipeline cannot process are marked unparsable and tallied, never
//! silently dropped.

mod detect;
mod lex;
mod strip;

pub use detect::{detect, Detection, MatchSite};
pub use lex::{tokenize, LexError, Token, TokenKind};
pub use strip::{strip_comments, UnterminatedComment};

use std::path::{Path, PathBuf};

use crate::features::{FeatureId, FeatureVector};

/// A source file staged for extraction. Raw bytes are decoded as UTF-8 with
/// invalid sequences replaced.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: PathBuf,
    pub text: String,
}

impl SourceUnit {
    pub fn from_text(path: impl Into<PathBuf>, text: impl Into<String>) -> SourceUnit {
        SourceUnit {
            path: path.into(),
            text: text.into(),
        }
    }

    pub fn from_path(path: &Path) -> std::io::Result<SourceUnit> {
        let bytes = std::fs::read(path)?;
        Ok(SourceUnit {
            path: path.to_path_buf(),
            text: String::from_utf8_lossy(&bytes).into_owned(),
        })
    }
}

/// Outcome of extraction for one unit. `parsable == false` means the vector
/// is absent and the unit should be recorded as skipped.
#[derive(Debug, Clone)]
pub struct ExtractionResult {
    pub vector: Option<FeatureVector>,
    pub parsable: bool,
    pub diagnostics: Vec<MatchSite>,
    pub error: Option<String>,
}

/// Runs the whole detection pipeline on one unit. Pure: the result is a
/// function of the file bytes alone.
pub fn extract_features(unit: &SourceUnit) -> ExtractionResult {
    let stripped = match strip_comments(&unit.text) {
        Ok(s) => s,
        Err(e) => return unparsable(e.to_string()),
    };
    let (code, pragma_pack_sites) = drop_preprocessor_lines(&stripped);
    let tokens = match tokenize(&code) {
        Ok(t) => t,
        Err(e) => return unparsable(e.to_string()),
    };
    let mut detection = detect(&tokens);
    let packed = FeatureId::from_name("packed-struct").expect("canonical name");
    for (line, col) in pragma_pack_sites {
        detection.vector.add(packed, 1);
        detection.sites.push(MatchSite {
            feature: packed,
            line,
            col,
        });
    }
    ExtractionResult {
        vector: Some(detection.vector),
        parsable: true,
        diagnostics: detection.sites,
        error: None,
    }
}

fn unparsable(error: String) -> ExtractionResult {
    ExtractionResult {
        vector: None,
        parsable: false,
        diagnostics: Vec::new(),
        error: Some(error),
    }
}

/// Removes preprocessor lines (including `\` continuations) before
/// tokenizing, reporting `#pragma pack` sites found along the way. Line
/// structure is preserved so token positions stay meaningful.
fn drop_preprocessor_lines(stripped: &str) -> (String, Vec<(u32, u32)>) {
    let mut out = String::with_capacity(stripped.len());
    let mut pragma_sites = Vec::new();
    let mut in_directive = false;
    for (idx, line) in stripped.split('\n').enumerate() {
        if idx > 0 {
            out.push('\n');
        }
        let continued = in_directive;
        let trimmed = line.trim_start();
        let is_directive = continued || trimmed.starts_with('#');
        if is_directive {
            if !continued && is_pragma_pack(trimmed) {
                let col = (line.len() - trimmed.len() + 1) as u32;
                pragma_sites.push((idx as u32 + 1, col));
            }
            in_directive = line.trim_end().ends_with('\\');
            continue;
        }
        in_directive = false;
        out.push_str(line);
    }
    (out, pragma_sites)
}

fn is_pragma_pack(line: &str) -> bool {
    let rest = match line.strip_prefix('#') {
        Some(r) => r.trim_start(),
        None => return false,
    };
    let rest = match rest.strip_prefix("pragma") {
        Some(r) => r.trim_start(),
        None => return false,
    };
    rest.starts_with("pack")
}
