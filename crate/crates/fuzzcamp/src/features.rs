//! The canonical feature universe: the 28 binary-state generator options, the
//! vector/centroid types built over them, and the `--feature` / `--no-feature`
//! flag mapping.
//!
//! Every persisted file format embeds [`FEATURE_NAMES`] as a header so readers
//! can verify that index -> name meaning is stable across tools.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of generator-controllable features tracked by the toolkit.
pub const FEATURE_COUNT: usize = 28;

/// Canonical feature names, in canonical index order.
///
/// The order is load-bearing: vectors, centroids, and flag lists are all
/// indexed by position in this table.
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "argc",
    "arrays",
    "bitfields",
    "comma-operators",
    "compound-assignment",
    "consts",
    "divs",
    "pre-incr-operator",
    "pre-decr-operator",
    "post-incr-operator",
    "post-decr-operator",
    "unary-plus-operator",
    "jumps",
    "longlong",
    "int8",
    "uint8",
    "float",
    "inline-function",
    "muls",
    "packed-struct",
    "pointers",
    "structs",
    "unions",
    "volatiles",
    "volatile-pointers",
    "const-pointers",
    "global-variables",
    "builtins",
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("unknown feature: {0:?}")]
    UnknownFeature(String),
    #[error("unknown flag: {0:?}")]
    UnknownFlag(String),
}

/// Identifies one of the 28 features by canonical index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureId(u8);

impl FeatureId {
    pub fn from_index(index: usize) -> Option<FeatureId> {
        (index < FEATURE_COUNT).then_some(FeatureId(index as u8))
    }

    pub fn from_name(name: &str) -> Result<FeatureId, FeatureError> {
        FEATURE_NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| FeatureId(i as u8))
            .ok_or_else(|| FeatureError::UnknownFeature(name.to_string()))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        FEATURE_NAMES[self.index()]
    }

    /// All 28 features in canonical order.
    pub fn all() -> impl Iterator<Item = FeatureId> {
        (0..FEATURE_COUNT).map(|i| FeatureId(i as u8))
    }
}

/// Per-program occurrence profile over the feature universe.
///
/// `counts` holds raw occurrence counts; the binary presence form used for
/// clustering is derived, never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    counts: [u32; FEATURE_COUNT],
}

impl FeatureVector {
    pub fn zero() -> FeatureVector {
        FeatureVector {
            counts: [0; FEATURE_COUNT],
        }
    }

    pub fn from_counts(counts: [u32; FEATURE_COUNT]) -> FeatureVector {
        FeatureVector { counts }
    }

    pub fn counts(&self) -> &[u32; FEATURE_COUNT] {
        &self.counts
    }

    pub fn count(&self, id: FeatureId) -> u32 {
        self.counts[id.index()]
    }

    pub fn add(&mut self, id: FeatureId, n: u32) {
        self.counts[id.index()] += n;
    }

    pub fn contains(&self, id: FeatureId) -> bool {
        self.count(id) > 0
    }

    /// Presence form: 1 where the count is nonzero.
    pub fn binary(&self) -> [u8; FEATURE_COUNT] {
        let mut b = [0u8; FEATURE_COUNT];
        for (b, c) in b.iter_mut().zip(self.counts.iter()) {
            *b = u8::from(*c > 0);
        }
        b
    }

    /// Binary form as f64 coordinates, the representation clustering runs on.
    pub fn binary_f64(&self) -> Vec<f64> {
        self.binary().iter().map(|&b| f64::from(b)).collect()
    }
}

/// Per-feature inclusion probabilities; the mean of a cluster's binary vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    values: [f64; FEATURE_COUNT],
}

#[derive(Debug, Error, PartialEq)]
#[error("centroid value out of range at feature {index}: {value}")]
pub struct CentroidRangeError {
    pub index: usize,
    pub value: f64,
}

impl Centroid {
    /// Builds a centroid, rejecting values outside `[0, 1]` (NaN included).
    pub fn new(values: [f64; FEATURE_COUNT]) -> Result<Centroid, CentroidRangeError> {
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(CentroidRangeError { index, value });
            }
        }
        Ok(Centroid { values })
    }

    pub fn values(&self) -> &[f64; FEATURE_COUNT] {
        &self.values
    }

    pub fn value(&self, id: FeatureId) -> f64 {
        self.values[id.index()]
    }
}

/// A concrete enable/disable choice for every feature, ready to serialize as
/// generator flags. Carries provenance (which centroid, which draw seed) so a
/// single trial can be replayed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GeneratorConfig {
    pub enabled: [bool; FEATURE_COUNT],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_centroid: Option<usize>,
    #[serde(default)]
    pub draw_seed: u64,
}

impl GeneratorConfig {
    pub fn new(enabled: [bool; FEATURE_COUNT]) -> GeneratorConfig {
        GeneratorConfig {
            enabled,
            source_centroid: None,
            draw_seed: 0,
        }
    }

    pub fn all_enabled() -> GeneratorConfig {
        GeneratorConfig::new([true; FEATURE_COUNT])
    }

    pub fn all_disabled() -> GeneratorConfig {
        GeneratorConfig::new([false; FEATURE_COUNT])
    }

    pub fn is_enabled(&self, id: FeatureId) -> bool {
        self.enabled[id.index()]
    }
}

/// Emits exactly 28 flags in canonical order: `--<name>` when enabled,
/// `--no-<name>` when disabled.
pub fn serialize_flags(config: &GeneratorConfig) -> Vec<String> {
    FeatureId::all()
        .map(|id| {
            if config.is_enabled(id) {
                format!("--{}", id.name())
            } else {
                format!("--no-{}", id.name())
            }
        })
        .collect()
}

/// Result of parsing a flag list back into a config.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedFlags {
    pub config: GeneratorConfig,
    /// One warning per feature the flag list never mentioned (defaulted to
    /// disabled).
    pub warnings: Vec<String>,
}

/// Inverse of [`serialize_flags`]. Features not mentioned default to disabled
/// and are reported as warnings; a flag naming no known feature is an error.
pub fn parse_flags<S: AsRef<str>>(flags: &[S]) -> Result<ParsedFlags, FeatureError> {
    let mut enabled = [false; FEATURE_COUNT];
    let mut mentioned = [false; FEATURE_COUNT];
    for flag in flags {
        let flag = flag.as_ref();
        let body = flag
            .strip_prefix("--")
            .ok_or_else(|| FeatureError::UnknownFlag(flag.to_string()))?;
        let (value, name) = match body.strip_prefix("no-") {
            Some(rest) => (false, rest),
            None => (true, body),
        };
        let id = FeatureId::from_name(name)
            .map_err(|_| FeatureError::UnknownFlag(flag.to_string()))?;
        enabled[id.index()] = value;
        mentioned[id.index()] = true;
    }
    let warnings = FeatureId::all()
        .filter(|id| !mentioned[id.index()])
        .map(|id| format!("feature {:?} not mentioned; defaulting to disabled", id.name()))
        .collect();
    Ok(ParsedFlags {
        config: GeneratorConfig::new(enabled),
        warnings,
    })
}

/// Checks a persisted feature-order header against the canonical order.
pub fn feature_order_matches(order: &[String]) -> bool {
    order.len() == FEATURE_COUNT && order.iter().zip(FEATURE_NAMES.iter()).all(|(a, b)| a == b)
}

/// The canonical order as owned strings, for embedding in file headers.
pub fn feature_order() -> Vec<String> {
    FEATURE_NAMES.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn name_index_bijection() {
        assert_eq!(FEATURE_NAMES.len(), FEATURE_COUNT);
        for (i, name) in FEATURE_NAMES.iter().enumerate() {
            let id = FeatureId::from_name(name).unwrap();
            assert_eq!(id.index(), i);
            assert_eq!(id.name(), *name);
        }
        let mut sorted = FEATURE_NAMES.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), FEATURE_COUNT, "duplicate feature name");
    }

    #[test]
    fn volatiles_is_index_23() {
        let id = FeatureId::from_name("volatiles").unwrap();
        assert_eq!(id.index(), 23);
    }

    #[test]
    fn argc_is_index_0() {
        assert_eq!(FeatureId::from_name("argc").unwrap().index(), 0);
    }

    #[test]
    fn unknown_feature_rejected() {
        assert_eq!(
            FeatureId::from_name("gotos"),
            Err(FeatureError::UnknownFeature("gotos".into()))
        );
    }

    #[test]
    fn serialize_all_enabled() {
        let flags = serialize_flags(&GeneratorConfig::all_enabled());
        assert_eq!(flags.len(), FEATURE_COUNT);
        assert_eq!(flags[0], "--argc");
        assert_eq!(flags[1], "--arrays");
        assert_eq!(flags[27], "--builtins");
        assert!(flags.iter().all(|f| !f.starts_with("--no-")));
    }

    #[test]
    fn serialize_all_disabled() {
        let flags = serialize_flags(&GeneratorConfig::all_disabled());
        assert_eq!(flags[0], "--no-argc");
        assert_eq!(flags[27], "--no-builtins");
        assert!(flags.iter().all(|f| f.starts_with("--no-")));
    }

    #[test]
    fn serialize_single_feature() {
        let mut config = GeneratorConfig::all_disabled();
        config.enabled[FeatureId::from_name("volatiles").unwrap().index()] = true;
        let flags = serialize_flags(&config);
        // flag 24 of 28 (1-based) is the positive volatiles flag
        assert_eq!(flags[23], "--volatiles");
        assert_eq!(flags.iter().filter(|f| !f.starts_with("--no-")).count(), 1);
    }

    #[test]
    fn parse_single_flag_warns_for_the_rest() {
        let parsed = parse_flags(&["--volatiles"]).unwrap();
        assert!(parsed.config.is_enabled(FeatureId::from_name("volatiles").unwrap()));
        assert_eq!(parsed.config.enabled.iter().filter(|&&e| e).count(), 1);
        assert_eq!(parsed.warnings.len(), FEATURE_COUNT - 1);
    }

    #[test]
    fn parse_unknown_flag_rejected() {
        assert_eq!(
            parse_flags(&["--no-such-thing"]),
            Err(FeatureError::UnknownFlag("--no-such-thing".into()))
        );
        assert!(parse_flags(&["volatiles"]).is_err());
    }

    #[test]
    fn binary_tracks_counts() {
        let mut v = FeatureVector::zero();
        v.add(FeatureId::from_name("muls").unwrap(), 3);
        let b = v.binary();
        for id in FeatureId::all() {
            assert_eq!(b[id.index()] == 1, v.count(id) > 0);
        }
    }

    proptest! {
        #[test]
        fn flag_round_trip(bits in prop::array::uniform32(any::<bool>())) {
            let mut enabled = [false; FEATURE_COUNT];
            enabled.copy_from_slice(&bits[..FEATURE_COUNT]);
            let config = GeneratorConfig::new(enabled);
            let parsed = parse_flags(&serialize_flags(&config)).unwrap();
            prop_assert_eq!(parsed.config.enabled, config.enabled);
            prop_assert!(parsed.warnings.is_empty());
        }
    }
}
