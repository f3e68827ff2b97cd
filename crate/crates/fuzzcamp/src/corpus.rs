//! Corpus ingestion and the line-delimited dataset format.
//!
//! A dataset file is UTF-8 JSONL: line 1 is a header object carrying the
//! format version and the ordered feature list, every following line is one
//! record `{id, parsable, counts[28]}`. Binary vectors are derived on load,
//! never stored.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use globset::{Glob, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::extract::{extract_features, SourceUnit};
use crate::features::{
    feature_order, feature_order_matches, FeatureId, FeatureVector, FEATURE_COUNT,
};
use crate::FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("no files under {root:?} match the include patterns")]
    EmptyCorpus { root: String },
    #[error("invalid include pattern {pattern:?}: {source}")]
    BadPattern {
        pattern: String,
        source: globset::Error,
    },
    #[error("dataset format version mismatch: found {found}, expected {expected}")]
    FormatVersionMismatch { found: u32, expected: u32 },
    #[error("dataset feature order does not match the canonical order")]
    FeatureOrderMismatch,
    #[error("dataset parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One corpus file: stable id (relative path), extraction outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetRecord {
    pub id: String,
    pub parsable: bool,
    pub counts: Option<FeatureVector>,
}

impl DatasetRecord {
    pub fn binary_f64(&self) -> Option<Vec<f64>> {
        self.counts.as_ref().map(FeatureVector::binary_f64)
    }
}

/// The extracted corpus, ordered lexicographically by record id.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_order: Vec<String>,
    pub records: Vec<DatasetRecord>,
    pub created_at_ms: u64,
    pub corpus_root: String,
}

impl Dataset {
    pub fn parsable_records(&self) -> impl Iterator<Item = &DatasetRecord> {
        self.records.iter().filter(|r| r.parsable)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorpusStats {
    pub total_files: usize,
    pub parsable_files: usize,
    /// Number of parsable programs containing each feature.
    pub per_feature_program_count: Vec<usize>,
}

/// Walks `root`, extracts every file matching `include_globs` (default
/// `*.c`), and assembles a dataset in deterministic record order. Unparsable
/// files are kept with `parsable = false`.
pub fn ingest(root: &Path, include_globs: &[String]) -> Result<Dataset, CorpusError> {
    let set = build_globset(include_globs)?;
    let mut ids: BTreeSet<String> = BTreeSet::new();
    for entry in WalkDir::new(root).follow_links(false) {
        let entry = entry.map_err(|e| {
            CorpusError::Io(e.into_io_error().unwrap_or_else(|| {
                std::io::Error::other("walkdir error without io cause")
            }))
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .to_string_lossy()
            .replace('\\', "/");
        if set.is_match(&rel) {
            ids.insert(rel);
        }
    }
    if ids.is_empty() {
        return Err(CorpusError::EmptyCorpus {
            root: root.display().to_string(),
        });
    }
    let mut records = Vec::with_capacity(ids.len());
    for id in ids {
        let unit = SourceUnit::from_path(&root.join(&id))?;
        let result = extract_features(&unit);
        records.push(DatasetRecord {
            id,
            parsable: result.parsable,
            counts: result.vector,
        });
    }
    Ok(Dataset {
        feature_order: feature_order(),
        records,
        created_at_ms: now_ms(),
        corpus_root: root.display().to_string(),
    })
}

fn build_globset(patterns: &[String]) -> Result<GlobSet, CorpusError> {
    let defaults = ["*.c".to_string()];
    let patterns: &[String] = if patterns.is_empty() {
        &defaults
    } else {
        patterns
    };
    let mut builder = GlobSetBuilder::new();
    for pattern in patterns {
        let glob = Glob::new(pattern).map_err(|source| CorpusError::BadPattern {
            pattern: pattern.clone(),
            source,
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|source| CorpusError::BadPattern {
        pattern: patterns.join(","),
        source,
    })
}

/// Per-feature program counts over the parsable records.
pub fn stats(dataset: &Dataset) -> CorpusStats {
    let mut per_feature = vec![0usize; FEATURE_COUNT];
    let mut parsable_files = 0usize;
    for record in dataset.parsable_records() {
        parsable_files += 1;
        if let Some(counts) = &record.counts {
            for (slot, &bit) in per_feature.iter_mut().zip(counts.binary().iter()) {
                *slot += usize::from(bit);
            }
        }
    }
    CorpusStats {
        total_files: dataset.records.len(),
        parsable_files,
        per_feature_program_count: per_feature,
    }
}

/// Stats as `feature,name,count` CSV, one row per feature in canonical order.
pub fn stats_csv(stats: &CorpusStats) -> String {
    let mut out = String::from("feature,name,count\n");
    for id in FeatureId::all() {
        out.push_str(&format!(
            "{},{},{}\n",
            id.index(),
            id.name(),
            stats.per_feature_program_count[id.index()]
        ));
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct DatasetHeader {
    format_version: u32,
    kind: String,
    feature_order: Vec<String>,
    created_at_ms: u64,
    corpus_root: String,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    id: String,
    parsable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<u32>>,
}

pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<(), CorpusError> {
    let mut file = fs::File::create(path)?;
    let header = DatasetHeader {
        format_version: FORMAT_VERSION,
        kind: "dataset".to_string(),
        feature_order: dataset.feature_order.clone(),
        created_at_ms: dataset.created_at_ms,
        corpus_root: dataset.corpus_root.clone(),
    };
    writeln!(file, "{}", serde_json::to_string(&header).expect("header"))?;
    for record in &dataset.records {
        let line = RecordLine {
            id: record.id.clone(),
            parsable: record.parsable,
            counts: record.counts.as_ref().map(|c| c.counts().to_vec()),
        };
        writeln!(file, "{}", serde_json::to_string(&line).expect("record"))?;
    }
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset, CorpusError> {
    let file = fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    let header_line = lines
        .next()
        .ok_or(CorpusError::Parse {
            line: 1,
            message: "missing header line".to_string(),
        })??;
    let header: DatasetHeader =
        serde_json::from_str(&header_line).map_err(|e| CorpusError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
    if header.format_version != FORMAT_VERSION {
        return Err(CorpusError::FormatVersionMismatch {
            found: header.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if !feature_order_matches(&header.feature_order) {
        return Err(CorpusError::FeatureOrderMismatch);
    }
    let mut records = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RecordLine = serde_json::from_str(&line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let counts = match parsed.counts {
            Some(values) => {
                if values.len() != FEATURE_COUNT {
                    return Err(CorpusError::Parse {
                        line: line_no,
                        message: format!(
                            "expected {} counts, found {}",
                            FEATURE_COUNT,
                            values.len()
                        ),
                    });
                }
                let mut counts = [0u32; FEATURE_COUNT];
                counts.copy_from_slice(&values);
                Some(FeatureVector::from_counts(counts))
            }
            None => None,
        };
        if parsed.parsable != counts.is_some() {
            return Err(CorpusError::Parse {
                line: line_no,
                message: "parsable flag disagrees with counts presence".to_string(),
            });
        }
        records.push(DatasetRecord {
            id: parsed.id,
            parsable: parsed.parsable,
            counts,
        });
    }
    Ok(Dataset {
        feature_order: header.feature_order,
        records,
        created_at_ms: header.created_at_ms,
        corpus_root: header.corpus_root,
    })
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, content: &str) {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).unwrap();
        }
        fs::write(path, content).unwrap();
    }

    #[test]
    fn ingest_counts_unparsable() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.c", "int g;\n");
        write(dir.path(), "b.c", "volatile int v;\n");
        write(dir.path(), "c.c", "int x; /* never closed\n");
        let ds = ingest(dir.path(), &[]).unwrap();
        assert_eq!(ds.records.len(), 3);
        assert_eq!(ds.parsable_records().count(), 2);
        let s = stats(&ds);
        assert_eq!(s.total_files, 3);
        assert_eq!(s.parsable_files, 2);
    }

    #[test]
    fn ingest_is_deterministic_modulo_timestamp() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "z.c", "int z;\n");
        write(dir.path(), "a.c", "int a;\n");
        write(dir.path(), "sub/m.c", "int m;\n");
        let mut d1 = ingest(dir.path(), &[]).unwrap();
        let mut d2 = ingest(dir.path(), &[]).unwrap();
        d1.created_at_ms = 0;
        d2.created_at_ms = 0;
        assert_eq!(d1, d2);
        let ids: Vec<&str> = d1.records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, vec!["a.c", "sub/m.c", "z.c"]);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "notes.txt", "hello");
        assert!(matches!(
            ingest(dir.path(), &[]),
            Err(CorpusError::EmptyCorpus { .. })
        ));
    }

    #[test]
    fn include_globs_filter() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.c", "int a;\n");
        write(dir.path(), "b.i", "int b;\n");
        let ds = ingest(dir.path(), &["*.i".to_string()]).unwrap();
        assert_eq!(ds.records.len(), 1);
        assert_eq!(ds.records[0].id, "b.i");
    }

    #[test]
    fn stats_per_feature_counts() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.c", "int main(int argc, char **argv) { return argc; }\n");
        write(dir.path(), "b.c", "int main(int argc, char **argv) { int a[2]; return a[0]; }\n");
        let ds = ingest(dir.path(), &[]).unwrap();
        let s = stats(&ds);
        let argc = FeatureId::from_name("argc").unwrap().index();
        let arrays = FeatureId::from_name("arrays").unwrap().index();
        let jumps = FeatureId::from_name("jumps").unwrap().index();
        assert_eq!(s.per_feature_program_count[argc], 2);
        assert_eq!(s.per_feature_program_count[arrays], 1);
        assert_eq!(s.per_feature_program_count[jumps], 0);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.c", "int a;\n");
        write(dir.path(), "bad.c", "/* open\n");
        let ds = ingest(dir.path(), &[]).unwrap();
        let file = dir.path().join("ds.jsonl");
        save_dataset(&ds, &file).unwrap();
        let loaded = load_dataset(&file).unwrap();
        assert_eq!(ds, loaded);
    }

    #[test]
    fn shuffled_feature_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.c", "int a;\n");
        let ds = ingest(dir.path(), &[]).unwrap();
        let file = dir.path().join("ds.jsonl");
        save_dataset(&ds, &file).unwrap();
        let text = fs::read_to_string(&file).unwrap();
        let swapped = text.replacen("\"argc\",\"arrays\"", "\"arrays\",\"argc\"", 1);
        assert_ne!(text, swapped);
        fs::write(&file, swapped).unwrap();
        assert!(matches!(
            load_dataset(&file),
            Err(CorpusError::FeatureOrderMismatch)
        ));
    }

    #[test]
    fn version_mismatch_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.c", "int a;\n");
        let ds = ingest(dir.path(), &[]).unwrap();
        let file = dir.path().join("ds.jsonl");
        save_dataset(&ds, &file).unwrap();
        let text = fs::read_to_string(&file).unwrap();
        fs::write(&file, text.replacen("\"formatVersion\":1", "\"formatVersion\":99", 1)).unwrap();
        assert!(matches!(
            load_dataset(&file),
            Err(CorpusError::FormatVersionMismatch { found: 99, .. })
        ));
    }

    #[test]
    fn truncated_record_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.c", "int a;\n");
        let ds = ingest(dir.path(), &[]).unwrap();
        let file = dir.path().join("ds.jsonl");
        save_dataset(&ds, &file).unwrap();
        let mut text = fs::read_to_string(&file).unwrap();
        text.push_str("{\"id\":\"broken\"\n");
        fs::write(&file, text).unwrap();
        match load_dataset(&file) {
            Err(CorpusError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
