//! Seeded replication harness for the synthetic benchmark designs: runs
//! generate -> factorize -> cluster -> score over many replications with
//! derived seeds and reports mean and standard-error columns.

use rayon::prelude::*;
use std::time::Instant;

use crate::cluster::{clustering_error, dtc, recovery_error};
use crate::error::Result;
use crate::simgen::{gen_2d, gen_3d, ClusterRatios, CovarianceSpec};
use crate::stf::ConstraintSpec;

/// Which synthetic design to replicate.
#[derive(Debug, Clone)]
pub enum Design {
    /// Matrix samples, stacked dims `(d, d, n)`.
    TwoD {
        n: usize,
        d: usize,
        mu: f64,
        cov: CovarianceSpec,
        ratios: ClusterRatios,
    },
    /// 3-way tensor samples, stacked dims `(d, d, d, n)`.
    ThreeD {
        n: usize,
        d: usize,
        mu: f64,
        ratios: ClusterRatios,
    },
}

impl Design {
    pub fn stacked_dims(&self) -> Vec<usize> {
        match self {
            Design::TwoD { n, d, .. } => vec![*d, *d, *n],
            Design::ThreeD { n, d, .. } => vec![*d, *d, *d, *n],
        }
    }

    /// Default per-mode (sparsity, fusion weight) for the design: the true
    /// support sizes on the feature modes, dense sample mode with fusion.
    pub fn default_constraints(&self) -> (Vec<usize>, Vec<f64>) {
        match self {
            Design::TwoD { n, d, .. } => {
                // each component touches 4 entries of a feature mode
                let s_feat = 4.min(*d);
                (vec![s_feat, s_feat, *n], vec![0.0, 0.0, 0.0])
            }
            Design::ThreeD { n, d, .. } => {
                // each component touches half the entries of a feature mode
                let s_feat = (*d / 2).max(1);
                (vec![s_feat, s_feat, s_feat, *n], vec![0.0, 0.0, 0.0, 0.02])
            }
        }
    }
}

/// One replication harness run.
#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub design: Design,
    pub reps: usize,
    pub base_seed: u64,
    pub rank: usize,
    pub k: usize,
    /// Per-mode sparsity override; `None` uses the design default.
    pub s: Option<Vec<usize>>,
    /// Per-mode fusion weight override; `None` uses the design default.
    pub lambda: Option<Vec<f64>>,
}

impl HarnessConfig {
    pub fn new(design: Design, reps: usize, base_seed: u64) -> Self {
        Self {
            design,
            reps,
            base_seed,
            rank: 2,
            k: 4,
            s: None,
            lambda: None,
        }
    }
}

/// Metrics for one replication.
#[derive(Debug, Clone)]
pub struct RepRow {
    pub rep: usize,
    pub recovery: f64,
    pub clustering: f64,
    pub seconds: f64,
}

/// Per-replication rows plus the mean / standard-error summary mirroring
/// the benchmark table layout. Standard errors are NaN for a single rep.
#[derive(Debug, Clone)]
pub struct RepSummary {
    pub rows: Vec<RepRow>,
    pub mean_recovery: f64,
    pub se_recovery: f64,
    pub mean_clustering: f64,
    pub se_clustering: f64,
    pub mean_seconds: f64,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn run_one(cfg: &HarnessConfig, rep: usize) -> Result<RepRow> {
    let seed = cfg.base_seed.wrapping_add(rep as u64);
    let start = Instant::now();
    let ds = match &cfg.design {
        Design::TwoD {
            n,
            d,
            mu,
            cov,
            ratios,
        } => gen_2d(*n, *d, *mu, cov, ratios.clone(), seed)?,
        Design::ThreeD { n, d, mu, ratios } => gen_3d(*n, *d, *mu, ratios.clone(), seed)?,
    };
    let dims = cfg.design.stacked_dims();
    let (s_def, l_def) = cfg.design.default_constraints();
    let mut spec = ConstraintSpec::uniform(&dims, 1, 0.0, seed.wrapping_mul(0x9e3779b97f4a7c15));
    spec.s = cfg.s.clone().unwrap_or(s_def);
    spec.lambda = cfg.lambda.clone().unwrap_or(l_def);
    for (sj, &dj) in spec.s.iter_mut().zip(&dims) {
        *sj = (*sj).min(dj).max(1);
    }
    let (clust, fset) = dtc(&ds.samples, cfg.k, cfg.rank, &spec)?;
    let recovery = recovery_error(&fset, &ds.truth_factors, &dims)?;
    let clustering = clustering_error(&clust.assignment, &ds.truth_assignment)?;
    Ok(RepRow {
        rep,
        recovery,
        clustering,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Run all replications (in parallel, deterministically seeded) and
/// summarize.
pub fn run_replications(cfg: &HarnessConfig) -> Result<RepSummary> {
    if cfg.reps == 0 {
        return Err(crate::error::DtcError::InvalidParameter(
            "reps must be >= 1".into(),
        ));
    }
    let rows: Vec<RepRow> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_one(cfg, rep))
        .collect::<Result<_>>()?;
    let rec: Vec<f64> = rows.iter().map(|r| r.recovery).collect();
    let clu: Vec<f64> = rows.iter().map(|r| r.clustering).collect();
    let sec: Vec<f64> = rows.iter().map(|r| r.seconds).collect();
    let (mean_recovery, se_recovery) = mean_se(&rec);
    let (mean_clustering, se_clustering) = mean_se(&clu);
    let (mean_seconds, _) = mean_se(&sec);
    Ok(RepSummary {
        rows,
        mean_recovery,
        se_recovery,
        mean_clustering,
        se_clustering,
        mean_seconds,
    })
}
