//! Campaign toolkit for fuzzing C compilers with a configurable random
//! program generator.
//!
//! The pipeline has two halves. The mining half turns a corpus of
//! failure-inducing C programs into generator configurations: [`extract`]
//! detects which of the 28 generator-controllable constructs each program
//! uses, [`corpus`] persists the resulting dataset, [`cluster`] runs K-Means
//! over the binary presence vectors, and [`confgen`] samples concrete
//! `--feature`/`--no-feature` flag sets from the centroids. The testing half,
//! [`campaign`], feeds those configurations to a generator and
//! differentially tests a compiler at two optimization levels under a time
//! budget, classifying every trial; [`report`] aggregates ledgers into
//! summary tables.

pub mod campaign;
pub mod cluster;
pub mod confgen;
pub mod corpus;
pub mod extract;
pub mod features;
pub mod mock;
pub mod report;
pub mod rng;

/// Version tag embedded in every persisted file header.
pub const FORMAT_VERSION: u32 = 1;
