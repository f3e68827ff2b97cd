//! Turns centroids into sampled generator configurations.
//!
//! Each draw flips one Bernoulli coin per feature: the feature is enabled
//! when `u <= value` for `u` drawn uniformly from `[0, 1)`, so a centroid
//! value of 0 means never and 1 means always. Draws cycle round-robin over
//! the centroid set for the life of a campaign, and every draw records its
//! own sub-seed so any single trial can be replayed in isolation.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{load_centroids, ClusterError};
use crate::features::{serialize_flags, Centroid, GeneratorConfig, FEATURE_COUNT};
use crate::rng::{mix, rng_from_seed};

/// An ordered set of centroids, as loaded from a centroids file.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidSet {
    pub centroids: Vec<Centroid>,
    pub label: String,
}

impl CentroidSet {
    pub fn new(centroids: Vec<Centroid>, label: impl Into<String>) -> CentroidSet {
        assert!(!centroids.is_empty(), "a centroid set holds at least one centroid");
        CentroidSet {
            centroids,
            label: label.into(),
        }
    }

    pub fn load(path: &Path) -> Result<CentroidSet, ClusterError> {
        let (_, centroids) = load_centroids(path)?;
        Ok(CentroidSet::new(centroids, path.display().to_string()))
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

/// Per-feature Bernoulli sampling against a centroid.
pub fn config_gen(centroid: &Centroid, rng: &mut impl Rng) -> [bool; FEATURE_COUNT] {
    let mut enabled = [false; FEATURE_COUNT];
    for (slot, &value) in enabled.iter_mut().zip(centroid.values().iter()) {
        let u: f64 = rng.random();
        *slot = u <= value;
    }
    enabled
}

#[derive(Debug, Clone, PartialEq)]
enum StreamMode {
    Centroids(CentroidSet),
    /// The control arm: emit no flags at all so the generator runs with its
    /// own defaults.
    DefaultBaseline,
}

/// One emitted configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDraw {
    pub index: u64,
    pub centroid_index: Option<usize>,
    pub draw_seed: u64,
    /// `None` in default-baseline mode.
    pub config: Option<GeneratorConfig>,
}

impl ConfigDraw {
    pub fn flags(&self) -> Vec<String> {
        self.config.as_ref().map(serialize_flags).unwrap_or_default()
    }
}

/// Serialized form of a draw, one JSONL line per config.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigDrawLine {
    pub index: u64,
    pub centroid_index: Option<usize>,
    pub draw_seed: u64,
    pub flags: Vec<String>,
}

impl From<&ConfigDraw> for ConfigDrawLine {
    fn from(draw: &ConfigDraw) -> ConfigDrawLine {
        ConfigDrawLine {
            index: draw.index,
            centroid_index: draw.centroid_index,
            draw_seed: draw.draw_seed,
            flags: draw.flags(),
        }
    }
}

/// A sequential dispenser of configurations. Draw `n` is seeded with
/// `mix(seed, n)`, so a stream is fully determined by `(centroid set, seed)`
/// and any prefix can be replayed.
#[derive(Debug, Clone)]
pub struct ConfigStream {
    mode: StreamMode,
    seed: u64,
    draw_counter: u64,
    next_centroid_index: usize,
}

impl ConfigStream {
    pub fn new(set: CentroidSet, seed: u64) -> ConfigStream {
        ConfigStream {
            mode: StreamMode::Centroids(set),
            seed,
            draw_counter: 0,
            next_centroid_index: 0,
        }
    }

    pub fn default_baseline(seed: u64) -> ConfigStream {
        ConfigStream {
            mode: StreamMode::DefaultBaseline,
            seed,
            draw_counter: 0,
            next_centroid_index: 0,
        }
    }

    pub fn is_baseline(&self) -> bool {
        matches!(self.mode, StreamMode::DefaultBaseline)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn k(&self) -> usize {
        match &self.mode {
            StreamMode::Centroids(set) => set.k(),
            StreamMode::DefaultBaseline => 1,
        }
    }

    pub fn label(&self) -> String {
        match &self.mode {
            StreamMode::Centroids(set) => set.label.clone(),
            StreamMode::DefaultBaseline => "default-baseline".to_string(),
        }
    }

    pub fn next_config(&mut self) -> ConfigDraw {
        let index = self.draw_counter;
        let draw_seed = mix(self.seed, index);
        self.draw_counter += 1;
        match &self.mode {
            StreamMode::Centroids(set) => {
                let centroid_index = self.next_centroid_index;
                self.next_centroid_index = (centroid_index + 1) % set.k();
                let mut rng = rng_from_seed(draw_seed);
                let enabled = config_gen(&set.centroids[centroid_index], &mut rng);
                ConfigDraw {
                    index,
                    centroid_index: Some(centroid_index),
                    draw_seed,
                    config: Some(GeneratorConfig {
                        enabled,
                        source_centroid: Some(centroid_index),
                        draw_seed,
                    }),
                }
            }
            StreamMode::DefaultBaseline => ConfigDraw {
                index,
                centroid_index: None,
                draw_seed,
                config: None,
            },
        }
    }
}
