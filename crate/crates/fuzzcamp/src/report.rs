//! Ledger aggregation into the campaign report tables.
//!
//! The summary CSV uses the canonical column names (Test input, Crash(0),
//! Crash(3), Crash(both), Total Crash, Timeout(0), Timeout(3),
//! Timeout(both), Total Timeout, Miscompilation) followed by auxiliary
//! columns; a JSON mirror carries the same numbers for machines.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::campaign::{load_ledger, CampaignError, FailureClass};
use crate::corpus::CorpusStats;
use crate::features::{Centroid, FeatureId, FEATURE_COUNT};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Ledger(#[from] CampaignError),
    #[error("invalid frequency thresholds: need 0 < {lo} < {hi} < 1")]
    BadThresholds { lo: f64, hi: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Failure counts for one campaign ledger, in the report-table column shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentSummary {
    pub label: String,
    pub test_inputs: u64,
    pub crash_o0: u64,
    pub crash_o3: u64,
    pub crash_both: u64,
    pub total_crash: u64,
    pub timeout_o0: u64,
    pub timeout_o3: u64,
    pub timeout_both: u64,
    pub total_timeout: u64,
    pub miscompilation: u64,
    pub generator_error: u64,
    pub compile_error_both: u64,
    pub run_divergence_timeout: u64,
}

impl ExperimentSummary {
    pub fn failures(&self) -> u64 {
        self.total_crash
            + self.total_timeout
            + self.miscompilation
            + self.generator_error
            + self.compile_error_both
            + self.run_divergence_timeout
    }
}

/// Counts failure classes in a ledger. Totals are derived sums, so the
/// column arithmetic holds by construction; class counts come solely from
/// the stored `failureClass` fields.
pub fn summarize(ledger_path: &Path) -> Result<ExperimentSummary, ReportError> {
    let ledger = load_ledger(ledger_path)?;
    let mut counts = std::collections::BTreeMap::new();
    for trial in &ledger.trials {
        *counts.entry(trial.failure_class).or_insert(0u64) += 1;
    }
    let get = |c: FailureClass| counts.get(&c).copied().unwrap_or(0);
    let crash_o0 = get(FailureClass::CrashO0);
    let crash_o3 = get(FailureClass::CrashO3);
    let crash_both = get(FailureClass::CrashBoth);
    let timeout_o0 = get(FailureClass::TimeoutO0);
    let timeout_o3 = get(FailureClass::TimeoutO3);
    let timeout_both = get(FailureClass::TimeoutBoth);
    Ok(ExperimentSummary {
        label: ledger.header.stream_label,
        test_inputs: ledger.trials.len() as u64,
        crash_o0,
        crash_o3,
        crash_both,
        total_crash: crash_o0 + crash_o3 + crash_both,
        timeout_o0,
        timeout_o3,
        timeout_both,
        total_timeout: timeout_o0 + timeout_o3 + timeout_both,
        miscompilation: get(FailureClass::Miscompilation),
        generator_error: get(FailureClass::GeneratorError),
        compile_error_both: get(FailureClass::CompileErrorBoth),
        run_divergence_timeout: get(FailureClass::RunDivergenceTimeout),
    })
}

pub const SUMMARY_COLUMNS: [&str; 14] = [
    "Experiment",
    "Test input",
    "Crash(0)",
    "Crash(3)",
    "Crash(both)",
    "Total Crash",
    "Timeout(0)",
    "Timeout(3)",
    "Timeout(both)",
    "Total Timeout",
    "Miscompilation",
    "Generator Error",
    "Compile Error(both)",
    "Run Divergence(timeout)",
];

pub fn summary_csv(summaries: &[ExperimentSummary]) -> Result<String, ReportError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(SUMMARY_COLUMNS)?;
    for s in summaries {
        writer.write_record([
            s.label.clone(),
            s.test_inputs.to_string(),
            s.crash_o0.to_string(),
            s.crash_o3.to_string(),
            s.crash_both.to_string(),
            s.total_crash.to_string(),
            s.timeout_o0.to_string(),
            s.timeout_o3.to_string(),
            s.timeout_both.to_string(),
            s.total_timeout.to_string(),
            s.miscompilation.to_string(),
            s.generator_error.to_string(),
            s.compile_error_both.to_string(),
            s.run_divergence_timeout.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().expect("csv into_inner");
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Qualitative frequency band of a feature across centroids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum FrequencyBand {
    VeryFrequent,
    Occasionally,
    Rarely,
}

impl FrequencyBand {
    pub fn name(self) -> &'static str {
        match self {
            FrequencyBand::VeryFrequent => "very frequent",
            FrequencyBand::Occasionally => "occasionally",
            FrequencyBand::Rarely => "rarely",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeatureFrequencyRow {
    pub index: usize,
    pub name: String,
    /// Parsable corpus programs containing the feature, when stats were
    /// provided.
    pub corpus_program_count: Option<usize>,
    /// Centroid values per provided run, in run order.
    pub centroid_values: Vec<Vec<f64>>,
    /// Mean centroid value pooled over every centroid of every run.
    pub score: f64,
    pub band: FrequencyBand,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeatureFrequencyReport {
    pub thresholds: (f64, f64),
    pub run_labels: Vec<String>,
    pub rows: Vec<FeatureFrequencyRow>,
}

/// Scores each feature as the mean of its centroid values pooled across all
/// provided runs, then bands by the thresholds (`>= hi` very frequent,
/// `>= lo` occasionally, else rarely). The pooling rule is this artifact's
/// own; with no runs everything lands in the rarely band.
pub fn feature_frequency(
    stats: Option<&CorpusStats>,
    runs: &[(String, Vec<Centroid>)],
    thresholds: (f64, f64),
) -> Result<FeatureFrequencyReport, ReportError> {
    let (lo, hi) = thresholds;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(ReportError::BadThresholds { lo, hi });
    }
    let mut rows = Vec::with_capacity(FEATURE_COUNT);
    for id in FeatureId::all() {
        let i = id.index();
        let centroid_values: Vec<Vec<f64>> = runs
            .iter()
            .map(|(_, centroids)| centroids.iter().map(|c| c.values()[i]).collect())
            .collect();
        let pooled: Vec<f64> = centroid_values.iter().flatten().copied().collect();
        let score = if pooled.is_empty() {
            0.0
        } else {
            pooled.iter().sum::<f64>() / pooled.len() as f64
        };
        let band = if score >= hi {
            FrequencyBand::VeryFrequent
        } else if score >= lo {
            FrequencyBand::Occasionally
        } else {
            FrequencyBand::Rarely
        };
        rows.push(FeatureFrequencyRow {
            index: i,
            name: id.name().to_string(),
            corpus_program_count: stats.map(|s| s.per_feature_program_count[i]),
            centroid_values,
            score,
            band,
        });
    }
    Ok(FeatureFrequencyReport {
        thresholds,
        run_labels: runs.iter().map(|(l, _)| l.clone()).collect(),
        rows,
    })
}

pub fn features_csv(report: &FeatureFrequencyReport) -> Result<String, ReportError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["index", "name", "corpus_programs", "score", "band"])?;
    for row in &report.rows {
        writer.write_record([
            row.index.to_string(),
            row.name.clone(),
            row.corpus_program_count
                .map(|c| c.to_string())
                .unwrap_or_default(),
            format!("{:.6}", row.score),
            row.band.name().to_string(),
        ])?;
    }
    let bytes = writer.into_inner().expect("csv into_inner");
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
