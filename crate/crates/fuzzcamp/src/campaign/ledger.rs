//! The append-only JSONL trial ledger.
//!
//! Line 1 is a header echoing the campaign spec and seeds; every further
//! line is one trial. A ledger alone carries enough to reproduce the
//! campaign or replay any single trial.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::classify::{FailureClass, LevelOutcome};
use super::CampaignError;
use crate::features::feature_order;
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LedgerHeader {
    pub kind: String,
    pub format_version: u32,
    pub feature_order: Vec<String>,
    pub generator_cmd: String,
    pub compiler_cmd: String,
    pub opt_levels: (String, String),
    pub compile_timeout_secs: f64,
    pub run_timeout_secs: f64,
    pub budget_secs: f64,
    pub seed: u64,
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_trials: Option<u64>,
    pub artifact_dir: String,
    pub stream_label: String,
    pub baseline: bool,
    pub started_at_ms: u64,
}

impl LedgerHeader {
    pub fn new_for(spec: &super::CampaignSpec, stream_label: String, baseline: bool) -> Self {
        LedgerHeader {
            kind: "header".to_string(),
            format_version: FORMAT_VERSION,
            feature_order: feature_order(),
            generator_cmd: spec.generator_cmd.raw().to_string(),
            compiler_cmd: spec.compiler_cmd.raw().to_string(),
            opt_levels: spec.opt_levels.clone(),
            compile_timeout_secs: spec.compile_timeout.as_secs_f64(),
            run_timeout_secs: spec.run_timeout.as_secs_f64(),
            budget_secs: spec.time_budget.as_secs_f64(),
            seed: spec.rng_seed,
            workers: spec.workers,
            max_trials: spec.max_trials,
            artifact_dir: spec.artifact_dir_string(),
            stream_label,
            baseline,
            started_at_ms: now_ms(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WallClock {
    pub started_ms: u64,
    pub finished_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialOutcomes {
    pub o0: LevelOutcome,
    pub o3: LevelOutcome,
}

/// One generate -> compile -> run -> compare cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    pub kind: String,
    pub trial_id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroid_index: Option<usize>,
    pub draw_seed: u64,
    /// The full serialized generator configuration; empty in baseline mode.
    pub flags: Vec<String>,
    pub baseline: bool,
    pub generator_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<TrialOutcomes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_message: Option<String>,
    pub failure_class: FailureClass,
    pub differential: bool,
    pub wall_clock: WallClock,
}

pub struct LedgerWriter {
    file: fs::File,
}

impl LedgerWriter {
    pub fn create(path: &Path, header: &LedgerHeader) -> Result<LedgerWriter, CampaignError> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)?;
            }
        }
        let mut file = fs::File::create(path)?;
        writeln!(file, "{}", serde_json::to_string(header).expect("header"))?;
        file.flush()?;
        Ok(LedgerWriter { file })
    }

    /// Appends one record and flushes so a killed campaign still leaves a
    /// readable ledger.
    pub fn append(&mut self, record: &TrialRecord) -> Result<(), CampaignError> {
        writeln!(self.file, "{}", serde_json::to_string(record).expect("record"))?;
        self.file.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LoadedLedger {
    pub header: LedgerHeader,
    pub trials: Vec<TrialRecord>,
}

pub fn load_ledger(path: &Path) -> Result<LoadedLedger, CampaignError> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let first = lines.next().ok_or(CampaignError::LedgerCorrupt {
        line: 1,
        message: "empty ledger".to_string(),
    })??;
    let header: LedgerHeader =
        serde_json::from_str(&first).map_err(|e| CampaignError::LedgerCorrupt {
            line: 1,
            message: e.to_string(),
        })?;
    if header.kind != "header" {
        return Err(CampaignError::LedgerCorrupt {
            line: 1,
            message: format!("expected header line, found kind {:?}", header.kind),
        });
    }
    let mut trials = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TrialRecord =
            serde_json::from_str(&line).map_err(|e| CampaignError::LedgerCorrupt {
                line: line_no,
                message: e.to_string(),
            })?;
        trials.push(record);
    }
    Ok(LoadedLedger { header, trials })
}

pub(crate) fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
