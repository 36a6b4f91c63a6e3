//! K-means on the reduced factor matrix, the pairwise clustering-error
//! metric, gap-statistic selection of the cluster count, and the tensor
//! recovery metric.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{DtcError, Result};
use crate::stf::{stf_decompose, ConstraintSpec};
use crate::tensor::{cp_reconstruct, stack_samples, DenseTensor, FactorSet};

/// Result of a clustering run. Labels are 1-based, in `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub assignment: Vec<usize>,
    /// K centers in the reduced R-dimensional space, one row each.
    pub centers: Vec<Vec<f64>>,
    pub k: usize,
    /// K-means objective: total within-cluster sum of squared distances.
    pub within_dispersion: f64,
}

/// K-means options. Defaults: k-means++ seeding, 10 restarts, 100 Lloyd
/// iterations.
#[derive(Debug, Clone)]
pub struct KmeansOpts {
    pub n_init: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl KmeansOpts {
    pub fn seeded(seed: u64) -> Self {
        Self {
            n_init: 10,
            max_iter: 100,
            seed,
        }
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

// k-means++ seeding
fn seed_centers(x: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut centers = Vec::with_capacity(k);
    centers.push(x[rng.gen_range(0..n)].clone());
    let mut d2: Vec<f64> = x.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total <= 0.0 {
            rng.gen_range(0..n)
        } else {
            let mut target = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        };
        centers.push(x[idx].clone());
        for (i, p) in x.iter().enumerate() {
            let d = sq_dist(p, centers.last().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

// One seeded Lloyd run. Returns the result and the per-iteration
// objective trace.
fn lloyd_run(
    x: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> (ClusteringResult, Vec<f64>) {
    let n = x.len();
    let dim = x[0].len();
    let mut centers = seed_centers(x, k, rng);
    let mut assignment = vec![0usize; n];
    let mut trace = Vec::new();
    let mut objective = f64::INFINITY;
    for _ in 0..max_iter {
        // assignment step
        let mut new_obj = 0.0;
        for (i, p) in x.iter().enumerate() {
            let (best, bd) = centers
                .iter()
                .enumerate()
                .map(|(c, ctr)| (c, sq_dist(p, ctr)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assignment[i] = best + 1;
            new_obj += bd;
        }
        trace.push(new_obj);
        // update step
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (i, p) in x.iter().enumerate() {
            let c = assignment[i] - 1;
            counts[c] += 1;
            for (s, &v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // empty cluster: restart it at the point farthest from
                // its assigned center
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(&x[a], &centers[assignment[a] - 1]);
                        let db = sq_dist(&x[b], &centers[assignment[b] - 1]);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                centers[c] = x[far].clone();
            } else {
                for (ctr, s) in centers[c].iter_mut().zip(&sums[c]) {
                    *ctr = s / counts[c] as f64;
                }
            }
        }
        if new_obj >= objective - 1e-14 {
            objective = objective.min(new_obj);
            break;
        }
        objective = new_obj;
    }
    (
        ClusteringResult {
            assignment,
            centers,
            k,
            within_dispersion: objective,
        },
        trace,
    )
}

/// Lloyd's K-means with k-means++ seeding, returning per-run objective
/// traces alongside the best result.
pub fn kmeans_detailed(
    x: &[Vec<f64>],
    k: usize,
    opts: &KmeansOpts,
) -> Result<(ClusteringResult, Vec<Vec<f64>>)> {
    let n = x.len();
    if k == 0 || k > n {
        return Err(DtcError::InvalidParameter(format!(
            "k = {} outside [1, {}]",
            k, n
        )));
    }
    let mut best: Option<ClusteringResult> = None;
    let mut traces = Vec::with_capacity(opts.n_init);
    for init in 0..opts.n_init {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(init as u64));
        let (res, trace) = lloyd_run(x, k, opts.max_iter, &mut rng);
        traces.push(trace);
        if best
            .as_ref()
            .map_or(true, |b| res.within_dispersion < b.within_dispersion)
        {
            best = Some(res);
        }
    }
    Ok((best.unwrap(), traces))
}

/// Best-of-`n_init` K-means.
pub fn kmeans(x: &[Vec<f64>], k: usize, opts: &KmeansOpts) -> Result<ClusteringResult> {
    kmeans_detailed(x, k, opts).map(|(r, _)| r)
}

/// The full clustering pipeline: stack samples, factorize the stacked
/// tensor, and K-means the rows of the chosen mode's factor matrix
/// (default: the last, sample, mode).
pub fn dtc(
    samples: &[DenseTensor],
    k: usize,
    rank: usize,
    spec: &ConstraintSpec,
) -> Result<(ClusteringResult, FactorSet)> {
    let stacked = stack_samples(samples)?;
    let cluster_mode = stacked.order() - 1;
    dtc_mode(&stacked, k, rank, spec, cluster_mode)
}

/// Clustering along an arbitrary mode of an already-stacked tensor.
pub fn dtc_mode(
    stacked: &DenseTensor,
    k: usize,
    rank: usize,
    spec: &ConstraintSpec,
    cluster_mode: usize,
) -> Result<(ClusteringResult, FactorSet)> {
    if cluster_mode >= stacked.order() {
        return Err(DtcError::ModeOutOfRange {
            mode: cluster_mode,
            order: stacked.order(),
        });
    }
    let (fset, _report) = stf_decompose(stacked, rank, spec)?;
    let rows = fset.mode_rows(cluster_mode);
    let clust = kmeans(&rows, k, &KmeansOpts::seeded(spec.rng_seed ^ 0x6b6d65616e73))?;
    Ok((clust, fset))
}

/// Fraction of unordered sample pairs whose co-membership disagrees
/// between two assignments. Invariant to relabeling of either argument.
pub fn clustering_error(est: &[usize], truth: &[usize]) -> Result<f64> {
    let n = est.len();
    if truth.len() != n {
        return Err(DtcError::DimMismatch(format!(
            "assignment lengths differ: {} vs {}",
            n,
            truth.len()
        )));
    }
    if n < 2 {
        return Err(DtcError::InvalidParameter(
            "clustering error needs at least two samples".into(),
        ));
    }
    let mut disagree = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let same_est = est[i] == est[j];
            let same_truth = truth[i] == truth[j];
            if same_est != same_truth {
                disagree += 1;
            }
        }
    }
    Ok(disagree as f64 / (n * (n - 1) / 2) as f64)
}

/// Relative Frobenius distance between the reconstructions of two factor
/// sets.
pub fn recovery_error(est: &FactorSet, truth: &FactorSet, dims: &[usize]) -> Result<f64> {
    let te = cp_reconstruct(est, dims)?;
    let tt = cp_reconstruct(truth, dims)?;
    let denom = tt.frobenius_norm();
    if denom == 0.0 {
        return Err(DtcError::ZeroTruth);
    }
    let num: f64 = te
        .data()
        .iter()
        .zip(tt.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(num / denom)
}

/// Gap-statistic output: the chosen K plus the gap and standard-error
/// curves for `k = 1..=k_max`.
#[derive(Debug, Clone)]
pub struct GapResult {
    pub chosen_k: usize,
    pub gap: Vec<f64>,
    pub se: Vec<f64>,
    pub log_w: Vec<f64>,
}

/// Gap statistic over `k = 1..=k_max` with `b` reference datasets drawn
/// uniformly over the per-column bounding box of the data. Chooses the
/// smallest k with `gap(k) >= gap(k+1) - se(k+1)`, falling back to k_max.
pub fn gap_statistic(x: &[Vec<f64>], k_max: usize, b: usize, seed: u64) -> Result<GapResult> {
    let n = x.len();
    if k_max == 0 || k_max > n {
        return Err(DtcError::InvalidParameter(format!(
            "k_max = {} outside [1, {}]",
            k_max, n
        )));
    }
    if b == 0 {
        return Err(DtcError::InvalidParameter("b must be >= 1".into()));
    }
    let dim = x[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in x {
        for (j, &v) in p.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }

    let log_w_of = |data: &[Vec<f64>], k: usize, seed: u64| -> Result<f64> {
        let res = kmeans(data, k, &KmeansOpts::seeded(seed))?;
        Ok(res.within_dispersion.max(1e-300).ln())
    };

    let mut log_w = Vec::with_capacity(k_max);
    let mut gap = Vec::with_capacity(k_max);
    let mut se = Vec::with_capacity(k_max);
    // reference draws are shared across k so the curves are comparable
    let mut refs: Vec<Vec<Vec<f64>>> = Vec::with_capacity(b);
    for rep in 0..b {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1 + rep as u64));
        let data: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|j| {
                        if hi[j] > lo[j] {
                            rng.gen_range(lo[j]..hi[j])
                        } else {
                            lo[j]
                        }
                    })
                    .collect()
            })
            .collect();
        refs.push(data);
    }
    for k in 1..=k_max {
        let lw = log_w_of(x, k, seed)?;
        let ref_lws: Vec<f64> = refs
            .iter()
            .map(|data| log_w_of(data, k, seed))
            .collect::<Result<_>>()?;
        let mean = ref_lws.iter().sum::<f64>() / b as f64;
        let var = ref_lws.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / b as f64;
        log_w.push(lw);
        gap.push(mean - lw);
        se.push(var.sqrt() * (1.0 + 1.0 / b as f64).sqrt());
    }

    let mut chosen_k = k_max;
    for k in 1..k_max {
        if gap[k - 1] >= gap[k] - se[k] {
            chosen_k = k;
            break;
        }
    }
    Ok(GapResult {
        chosen_k,
        gap,
        se,
        log_w,
    })
}
