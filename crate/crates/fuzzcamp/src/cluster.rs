//! K-Means over binary feature vectors: k-means++ seeding, Lloyd iterations
//! under the squared-Euclidean inertia criterion, multi-restart best-of
//! selection.
//!
//! The core routines are dimension-generic so test oracles can drive them on
//! small synthetic data; [`cluster`] fixes the dimension to the 28-feature
//! dataset shape.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Dataset;
use crate::features::{feature_order, feature_order_matches, Centroid, FEATURE_COUNT};
use crate::rng::{mix, rng_from_seed};
use crate::FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("degenerate data: {distinct} distinct vectors but k = {k}")]
    DegenerateData { distinct: usize, k: usize },
    #[error("centroids format version mismatch: found {found}, expected {expected}")]
    FormatVersionMismatch { found: u32, expected: u32 },
    #[error("centroids feature order does not match the canonical order")]
    FeatureOrderMismatch,
    #[error("invalid centroids file: {0}")]
    InvalidFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("centroids file parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub k: usize,
    pub n_init: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl ClusterParams {
    pub fn new(k: usize, seed: u64) -> ClusterParams {
        ClusterParams {
            k,
            n_init: 10,
            max_iter: 300,
            seed,
            tolerance: 1e-4,
        }
    }
}

/// Result of one full clustering run (best restart).
#[derive(Debug, Clone)]
pub struct ClusterResult {
    pub centroids: Vec<Centroid>,
    /// record id -> cluster index, over parsable records
    pub assignment: BTreeMap<String, usize>,
    pub inertia: f64,
    pub iterations_run: usize,
    pub restart_index: usize,
    pub cluster_sizes: Vec<usize>,
    /// after-assignment inertia per iteration of the winning restart
    pub inertia_log: Vec<f64>,
    pub params: ClusterParams,
}

/// Raw outcome of a single Lloyd run on generic data.
#[derive(Debug, Clone)]
pub struct KmeansRun {
    pub centers: Vec<Vec<f64>>,
    pub assignment: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    pub inertia_log: Vec<f64>,
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_count(data: &[Vec<f64>]) -> usize {
    let keys: BTreeSet<Vec<u64>> = data
        .iter()
        .map(|v| v.iter().map(|x| x.to_bits()).collect())
        .collect();
    keys.len()
}

/// k-means++ seeding: first center uniform over the data, each further
/// center drawn with probability proportional to the squared distance to the
/// nearest center already chosen.
pub fn kmeans_plus_plus_seed(
    data: &[Vec<f64>],
    k: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Vec<f64>>, ClusterError> {
    let distinct = distinct_count(data);
    if k == 0 || distinct < k {
        return Err(ClusterError::DegenerateData { distinct, k });
    }
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..data.len());
    centers.push(data[first].clone());

    let mut best_d2: Vec<f64> = data
        .iter()
        .map(|x| squared_distance(x, &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = best_d2.iter().sum();
        // distinct >= k guarantees some point still has positive mass
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = data.len() - 1;
        for (i, &w) in best_d2.iter().enumerate() {
            acc += w;
            if u < acc {
                chosen = i;
                break;
            }
        }
        centers.push(data[chosen].clone());
        for (slot, x) in best_d2.iter_mut().zip(data.iter()) {
            let d = squared_distance(x, centers.last().expect("just pushed"));
            if d < *slot {
                *slot = d;
            }
        }
    }
    Ok(centers)
}

fn assign_points(data: &[Vec<f64>], centers: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let mut assignment = Vec::with_capacity(data.len());
    let mut inertia = 0.0;
    for x in data {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let d = squared_distance(x, center);
            // ties keep the lowest cluster index
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        assignment.push(best);
        inertia += best_d;
    }
    (assignment, inertia)
}

/// Means of assigned points; empty clusters are repaired by reseeding the
/// center to the point farthest from its own assigned center.
fn update_centers(data: &[Vec<f64>], assignment: &[usize], centers: &mut [Vec<f64>]) {
    let dim = data.first().map(Vec::len).unwrap_or(0);
    let k = centers.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &c) in data.iter().zip(assignment) {
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for (center_v, sum_v) in centers[c].iter_mut().zip(&sums[c]) {
                *center_v = sum_v / counts[c] as f64;
            }
        }
    }
    let mut reseeded: Vec<usize> = Vec::new();
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let mut farthest = None;
        let mut farthest_d = -1.0;
        for (i, x) in data.iter().enumerate() {
            if reseeded.contains(&i) {
                continue;
            }
            let d = squared_distance(x, &centers[assignment[i]]);
            if d > farthest_d {
                farthest_d = d;
                farthest = Some(i);
            }
        }
        if let Some(i) = farthest {
            centers[c] = data[i].clone();
            reseeded.push(i);
        }
    }
}

/// Lloyd iterations from the given starting centers.
///
/// Stops on an exact fixed point (assignment unchanged), on `max_iter`, or
/// once the relative inertia improvement drops below `tolerance`; in the
/// latter case a few consolidation rounds bring the returned
/// assignment/means pair back to mutual consistency, so callers can rely on
/// the fixed-point property.
pub fn lloyd_iterate(
    data: &[Vec<f64>],
    mut centers: Vec<Vec<f64>>,
    max_iter: usize,
    tolerance: f64,
) -> KmeansRun {
    let mut log = Vec::new();
    let mut prev_assignment: Option<Vec<usize>> = None;
    let mut prev_inertia: Option<f64> = None;
    let mut assignment = Vec::new();
    let mut iterations = 0usize;
    let mut tolerance_hit = false;

    for _ in 0..max_iter {
        iterations += 1;
        let (asg, cost) = assign_points(data, &centers);
        log.push(cost);
        assignment = asg;
        if prev_assignment.as_ref() == Some(&assignment) {
            return KmeansRun {
                centers,
                assignment,
                inertia: cost,
                iterations,
                inertia_log: log,
            };
        }
        update_centers(data, &assignment, &mut centers);
        if let Some(p) = prev_inertia {
            if p > 0.0 && (p - cost) < tolerance * p {
                tolerance_hit = true;
            }
        }
        prev_assignment = Some(assignment.clone());
        prev_inertia = Some(cost);
        if tolerance_hit {
            break;
        }
    }

    // consolidate to a fixed point (bounded; plain Lloyd steps, inertia can
    // only decrease)
    for _ in 0..50 {
        let (asg, cost) = assign_points(data, &centers);
        if asg == assignment {
            break;
        }
        log.push(cost);
        assignment = asg;
        iterations += 1;
        update_centers(data, &assignment, &mut centers);
    }
    // the returned inertia always scores the returned pair
    let inertia = data
        .iter()
        .zip(&assignment)
        .map(|(x, &c)| squared_distance(x, &centers[c]))
        .sum();

    KmeansRun {
        centers,
        assignment,
        inertia,
        iterations,
        inertia_log: log,
    }
}

/// One seeded restart: k-means++ then Lloyd.
pub fn kmeans_single(
    data: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tolerance: f64,
) -> Result<KmeansRun, ClusterError> {
    let mut rng = rng_from_seed(seed);
    let centers = kmeans_plus_plus_seed(data, k, &mut rng)?;
    Ok(lloyd_iterate(data, centers, max_iter, tolerance))
}

/// Best of `n_init` seeded restarts; restart `r` uses `mix(seed, r)`. Ties on
/// inertia go to the lowest restart index.
pub fn kmeans_best_of(
    data: &[Vec<f64>],
    params: &ClusterParams,
) -> Result<(KmeansRun, usize), ClusterError> {
    let mut best: Option<(KmeansRun, usize)> = None;
    for r in 0..params.n_init.max(1) {
        let run = kmeans_single(
            data,
            params.k,
            mix(params.seed, r as u64),
            params.max_iter,
            params.tolerance,
        )?;
        let better = match &best {
            None => true,
            Some((b, _)) => run.inertia < b.inertia,
        };
        if better {
            best = Some((run, r));
        }
    }
    Ok(best.expect("n_init >= 1"))
}

/// Clusters the parsable records of a dataset. Deterministic given
/// `(dataset, params.seed)`.
pub fn cluster(dataset: &Dataset, params: &ClusterParams) -> Result<ClusterResult, ClusterError> {
    let ids: Vec<&str> = dataset
        .parsable_records()
        .map(|r| r.id.as_str())
        .collect();
    let data: Vec<Vec<f64>> = dataset
        .parsable_records()
        .filter_map(|r| r.binary_f64())
        .collect();
    let (run, restart_index) = kmeans_best_of(&data, params)?;

    let mut cluster_sizes = vec![0usize; params.k];
    for &c in &run.assignment {
        cluster_sizes[c] += 1;
    }
    let centroids = run
        .centers
        .iter()
        .map(|c| {
            let mut values = [0.0; FEATURE_COUNT];
            values.copy_from_slice(c);
            // clamp away float-noise outside [0,1] before the checked build
            for v in values.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
            Centroid::new(values).expect("means of binary data lie in [0,1]")
        })
        .collect();
    let assignment = ids
        .iter()
        .zip(&run.assignment)
        .map(|(id, &c)| (id.to_string(), c))
        .collect();
    Ok(ClusterResult {
        centroids,
        assignment,
        inertia: run.inertia,
        iterations_run: run.iterations,
        restart_index,
        cluster_sizes,
        inertia_log: run.inertia_log,
        params: params.clone(),
    })
}

/// On-disk centroids document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CentroidsFile {
    pub format_version: u32,
    pub feature_order: Vec<String>,
    pub k: usize,
    pub seed: u64,
    pub n_init: usize,
    pub max_iter: usize,
    pub inertia: f64,
    pub cluster_sizes: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
}

pub fn save_centroids(result: &ClusterResult, path: &Path) -> Result<(), ClusterError> {
    let doc = CentroidsFile {
        format_version: FORMAT_VERSION,
        feature_order: feature_order(),
        k: result.params.k,
        seed: result.params.seed,
        n_init: result.params.n_init,
        max_iter: result.params.max_iter,
        inertia: result.inertia,
        cluster_sizes: result.cluster_sizes.clone(),
        centroids: result.centroids.iter().map(|c| c.values().to_vec()).collect(),
    };
    fs::write(path, serde_json::to_string_pretty(&doc).expect("centroids doc"))?;
    Ok(())
}

pub fn load_centroids(path: &Path) -> Result<(CentroidsFile, Vec<Centroid>), ClusterError> {
    let text = fs::read_to_string(path)?;
    let doc: CentroidsFile = serde_json::from_str(&text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(ClusterError::FormatVersionMismatch {
            found: doc.format_version,
            expected: FORMAT_VERSION,
        });
    }
    if !feature_order_matches(&doc.feature_order) {
        return Err(ClusterError::FeatureOrderMismatch);
    }
    if doc.centroids.len() != doc.k || doc.k == 0 {
        return Err(ClusterError::InvalidFile(format!(
            "k = {} but {} centroids present",
            doc.k,
            doc.centroids.len()
        )));
    }
    let mut centroids = Vec::with_capacity(doc.k);
    for (i, row) in doc.centroids.iter().enumerate() {
        if row.len() != FEATURE_COUNT {
            return Err(ClusterError::InvalidFile(format!(
                "centroid {i} has {} values, expected {FEATURE_COUNT}",
                row.len()
            )));
        }
        let mut values = [0.0; FEATURE_COUNT];
        values.copy_from_slice(row);
        let centroid = Centroid::new(values)
            .map_err(|e| ClusterError::InvalidFile(format!("centroid {i}: {e}")))?;
        centroids.push(centroid);
    }
    Ok((doc, centroids))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::DatasetRecord;
    use crate::features::FeatureVector;

    fn vecs(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn k1_centroid_is_the_mean() {
        let data = vecs(&[&[1.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let run = kmeans_single(&data, 1, 42, 300, 1e-4).unwrap();
        assert_eq!(run.centers.len(), 1);
        assert!((run.centers[0][0] - 0.5).abs() < 1e-12);
        assert!((run.centers[0][1] - 0.5).abs() < 1e-12);
        // inertia = sum of squared distances to the mean: 4 * (0.25 + 0.25)
        assert!((run.inertia - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_separated_groups_reach_zero_inertia() {
        let data = vecs(&[
            &[0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0],
            &[1.0, 1.0, 1.0],
            &[1.0, 1.0, 1.0],
        ]);
        let run = kmeans_single(&data, 2, 7, 300, 1e-4).unwrap();
        assert!(run.inertia.abs() < 1e-12);
        let mut centers = run.centers.clone();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(centers[0], vec![0.0, 0.0, 0.0]);
        assert_eq!(centers[1], vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn seeding_with_k1_returns_a_data_point() {
        let data = vecs(&[&[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]]);
        let mut rng = rng_from_seed(3);
        let centers = kmeans_plus_plus_seed(&data, 1, &mut rng).unwrap();
        assert!(data.contains(&centers[0]));
    }

    #[test]
    fn seeding_two_distinct_points_selects_both() {
        // duplicates of two distinct points: the second draw has zero mass on
        // the first point's copies
        let data = vecs(&[
            &[0.0, 0.0],
            &[0.0, 0.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
        ]);
        for seed in 0..20 {
            let mut rng = rng_from_seed(seed);
            let mut centers = kmeans_plus_plus_seed(&data, 2, &mut rng).unwrap();
            centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(centers, vecs(&[&[0.0, 0.0], &[1.0, 1.0]]));
        }
    }

    #[test]
    fn degenerate_data_is_rejected() {
        let data = vecs(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let mut rng = rng_from_seed(1);
        assert!(matches!(
            kmeans_plus_plus_seed(&data, 3, &mut rng),
            Err(ClusterError::DegenerateData { distinct: 1, k: 3 })
        ));
    }

    #[test]
    fn inertia_log_is_non_increasing() {
        let data: Vec<Vec<f64>> = (0..32)
            .map(|i| {
                (0..6)
                    .map(|b| f64::from((i >> b) & 1))
                    .collect()
            })
            .collect();
        let run = kmeans_single(&data, 4, 11, 300, 1e-4).unwrap();
        for w in run.inertia_log.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "inertia increased: {:?}", w);
        }
    }

    #[test]
    fn returned_solution_is_a_fixed_point() {
        let data: Vec<Vec<f64>> = (0..16)
            .map(|i| (0..4).map(|b| f64::from((i >> b) & 1)).collect())
            .collect();
        let run = kmeans_single(&data, 3, 5, 300, 1e-4).unwrap();
        let (asg, inertia) = assign_points(&data, &run.centers);
        assert_eq!(asg, run.assignment);
        assert!((inertia - run.inertia).abs() < 1e-9);
        let mut centers = run.centers.clone();
        update_centers(&data, &asg, &mut centers);
        for (a, b) in centers.iter().flatten().zip(run.centers.iter().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    fn tiny_dataset() -> Dataset {
        let mut records = Vec::new();
        for (i, bits) in [
            [0u32, 0, 0],
            [0, 0, 1],
            [1, 1, 0],
            [1, 1, 1],
            [0, 1, 1],
        ]
        .iter()
        .enumerate()
        {
            let mut counts = [0u32; FEATURE_COUNT];
            counts[..3].copy_from_slice(bits);
            records.push(DatasetRecord {
                id: format!("f{i}.c"),
                parsable: true,
                counts: Some(FeatureVector::from_counts(counts)),
            });
        }
        Dataset {
            feature_order: feature_order(),
            records,
            created_at_ms: 0,
            corpus_root: "mem".to_string(),
        }
    }

    #[test]
    fn cluster_is_deterministic() {
        let ds = tiny_dataset();
        let params = ClusterParams::new(2, 99);
        let a = cluster(&ds, &params).unwrap();
        let b = cluster(&ds, &params).unwrap();
        assert_eq!(a.centroids, b.centroids);
        assert_eq!(a.assignment, b.assignment);
        assert_eq!(a.inertia, b.inertia);
        assert_eq!(a.restart_index, b.restart_index);
    }

    #[test]
    fn k_equal_distinct_reaches_zero() {
        let ds = tiny_dataset();
        let params = ClusterParams::new(5, 4);
        let result = cluster(&ds, &params).unwrap();
        assert!(result.inertia.abs() < 1e-12);
        assert!(result.cluster_sizes.iter().all(|&s| s == 1));
    }

    #[test]
    fn best_of_restarts_never_worse_than_each() {
        let ds = tiny_dataset();
        let data: Vec<Vec<f64>> = ds.parsable_records().filter_map(|r| r.binary_f64()).collect();
        let params = ClusterParams::new(2, 1234);
        let best = cluster(&ds, &params).unwrap();
        for r in 0..params.n_init {
            let run =
                kmeans_single(&data, 2, mix(params.seed, r as u64), 300, 1e-4).unwrap();
            assert!(best.inertia <= run.inertia + 1e-12);
        }
    }

    #[test]
    fn centroid_values_stay_in_unit_interval() {
        let ds = tiny_dataset();
        let result = cluster(&ds, &ClusterParams::new(2, 8)).unwrap();
        for c in &result.centroids {
            for &v in c.values() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn save_load_centroids_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = tiny_dataset();
        let result = cluster(&ds, &ClusterParams::new(2, 8)).unwrap();
        let path = dir.path().join("centroids.json");
        save_centroids(&result, &path).unwrap();
        let (doc, centroids) = load_centroids(&path).unwrap();
        assert_eq!(doc.k, 2);
        assert_eq!(centroids, result.centroids);
        assert_eq!(doc.inertia, result.inertia);
    }

    #[test]
    fn k1_centroid_matches_feature_ratios() {
        let ds = tiny_dataset();
        let result = cluster(&ds, &ClusterParams::new(1, 77)).unwrap();
        let s = crate::corpus::stats(&ds);
        let n = s.parsable_files as f64;
        for i in 0..FEATURE_COUNT {
            let expected = s.per_feature_program_count[i] as f64 / n;
            assert!((result.centroids[0].values()[i] - expected).abs() < 1e-12);
        }
    }
}
