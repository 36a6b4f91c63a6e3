//! Synthetic data generation: the 2D matrix-sample and 3D tensor-sample
//! cluster designs, Kronecker-structured tensor-normal sampling, and the
//! AR / exchangeable covariance families.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{DtcError, Result};
use crate::proxops::normalize;
use crate::tensor::{cp_reconstruct, mode_multiply, DenseTensor, FactorSet};

/// Covariance family for one tensor mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovKind {
    Identity,
    /// Entry (i, j) is `rho^|i-j|`.
    Ar,
    /// Unit diagonal, `rho` everywhere off-diagonal.
    Exchangeable,
}

#[derive(Debug, Clone, Copy)]
pub struct CovarianceSpec {
    pub kind: CovKind,
    pub rho: f64,
    pub dim: usize,
}

impl CovarianceSpec {
    pub fn identity(dim: usize) -> Self {
        Self {
            kind: CovKind::Identity,
            rho: 0.0,
            dim,
        }
    }

    pub fn ar(dim: usize, rho: f64) -> Self {
        Self {
            kind: CovKind::Ar,
            rho,
            dim,
        }
    }

    pub fn exchangeable(dim: usize, rho: f64) -> Self {
        Self {
            kind: CovKind::Exchangeable,
            rho,
            dim,
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, CovKind::Identity) || self.rho == 0.0
    }
}

/// Cluster size layout along the sample mode.
#[derive(Debug, Clone, PartialEq)]
pub enum ClusterRatios {
    /// Four equal blocks with boundaries at `floor(N/4)`, `floor(N/2)`,
    /// `floor(3N/4)`.
    Equal,
    /// Sizes proportional to the given ratios (e.g. `[1, 2, 3, 4]`),
    /// remainder added to the last cluster.
    Ratios(Vec<usize>),
}

/// A generated dataset with its ground truth.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub samples: Vec<DenseTensor>,
    /// Truth for the stacked `(d_1, ..., d_m, N)` tensor.
    pub truth_factors: FactorSet,
    /// 1-based labels, contiguous `1..=K`.
    pub truth_assignment: Vec<usize>,
    pub meta: DesignMeta,
}

#[derive(Debug, Clone)]
pub struct DesignMeta {
    pub dims: Vec<usize>,
    pub n: usize,
    pub mu: f64,
    pub cov: CovKind,
    pub rho: f64,
    pub cluster_sizes: Vec<usize>,
    pub seed: u64,
}

/// Dense `d x d` covariance matrix (row-major) for a spec.
pub fn make_cov(spec: &CovarianceSpec) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&spec.rho) {
        return Err(DtcError::InvalidParameter(format!(
            "rho = {} outside [0, 1)",
            spec.rho
        )));
    }
    let d = spec.dim;
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            m[i * d + j] = match spec.kind {
                CovKind::Identity => {
                    if i == j {
                        1.0
                    } else {
                        0.0
                    }
                }
                CovKind::Ar => spec.rho.powi((i as i64 - j as i64).unsigned_abs() as i32),
                CovKind::Exchangeable => {
                    if i == j {
                        1.0
                    } else {
                        spec.rho
                    }
                }
            };
        }
    }
    Ok(m)
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(DtcError::InvalidParameter(
                        "covariance matrix is not positive definite".into(),
                    ));
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Draw one tensor-normal sample: i.i.d. standard normal entries pushed
/// through the lower Cholesky factor of each mode covariance, plus the
/// mean.
pub fn sample_tensor_normal(
    mean: &DenseTensor,
    covs: &[CovarianceSpec],
    seed: u64,
) -> Result<DenseTensor> {
    if covs.len() != mean.order() {
        return Err(DtcError::DimMismatch(format!(
            "{} covariance specs for an order-{} tensor",
            covs.len(),
            mean.order()
        )));
    }
    for (j, c) in covs.iter().enumerate() {
        if c.dim != mean.dims()[j] {
            return Err(DtcError::DimMismatch(format!(
                "covariance dim {} != tensor dim {} in mode {}",
                c.dim,
                mean.dims()[j],
                j
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..mean.data().len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let mut z = DenseTensor::new(mean.dims().to_vec(), data)?;
    for (j, c) in covs.iter().enumerate() {
        if c.is_identity() {
            continue;
        }
        let l = cholesky(&make_cov(c)?, c.dim)?;
        z = mode_multiply(&z, &l, c.dim, j)?;
    }
    for (o, &m) in z.data_mut().iter_mut().zip(mean.data()) {
        *o += m;
    }
    Ok(z)
}

// Sign pattern of cluster k (1-based) in the two sample-mode components.
const CLUSTER_SIGNS: [(f64, f64); 4] = [(1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0)];

fn cluster_layout(n: usize, ratios: &ClusterRatios) -> Result<Vec<usize>> {
    match ratios {
        ClusterRatios::Equal => {
            let b1 = n / 4;
            let b2 = n / 2;
            let b3 = 3 * n / 4;
            Ok(vec![b1, b2 - b1, b3 - b2, n - b3])
        }
        ClusterRatios::Ratios(r) => {
            if r.len() != 4 || r.iter().any(|&x| x == 0) {
                return Err(DtcError::InvalidParameter(
                    "cluster ratios must be four positive integers".into(),
                ));
            }
            let total: usize = r.iter().sum();
            let mut sizes: Vec<usize> = r.iter().map(|&x| n * x / total).collect();
            let assigned: usize = sizes.iter().sum();
            sizes[3] += n - assigned;
            if sizes.iter().any(|&s| s == 0) {
                return Err(DtcError::InvalidParameter(format!(
                    "n = {} too small for ratios {:?}",
                    n, r
                )));
            }
            Ok(sizes)
        }
    }
}

fn sample_mode_components(mu: f64, sizes: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let mut b1 = Vec::new();
    let mut b2 = Vec::new();
    let mut labels = Vec::new();
    for (k, &sz) in sizes.iter().enumerate() {
        let (s1, s2) = CLUSTER_SIGNS[k];
        b1.extend(std::iter::repeat(s1 * mu).take(sz));
        b2.extend(std::iter::repeat(s2 * mu).take(sz));
        labels.extend(std::iter::repeat(k + 1).take(sz));
    }
    (b1, b2, labels)
}

// Normalize unnormalized per-mode components into a FactorSet, absorbing
// the norms into the weights.
fn build_truth(components: Vec<Vec<Vec<f64>>>) -> Result<FactorSet> {
    let rank = components[0].len();
    let mut weights = vec![1.0; rank];
    let mut factors = Vec::with_capacity(components.len());
    for mode in components {
        let mut cols = Vec::with_capacity(rank);
        for (r, col) in mode.into_iter().enumerate() {
            let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            weights[r] *= norm;
            cols.push(normalize(&col)?);
        }
        factors.push(cols);
    }
    Ok(FactorSet { weights, factors })
}

fn split_into_samples(stacked: &DenseTensor) -> Result<Vec<DenseTensor>> {
    let n = *stacked.dims().last().unwrap();
    (0..n).map(|i| stacked.last_mode_slice(i)).collect()
}

/// The rank-2, four-cluster matrix-sample design. Sparse supports of size
/// 4 in the first two modes; per-sample noise follows `cov` applied to
/// both matrix modes (identity means a standard Gaussian tensor).
pub fn gen_2d(
    n: usize,
    d1: usize,
    mu: f64,
    cov: &CovarianceSpec,
    ratios: ClusterRatios,
    seed: u64,
) -> Result<SimDataset> {
    if d1 < 8 {
        return Err(DtcError::InvalidParameter(format!(
            "d1 = {} cannot host the 8-entry supports",
            d1
        )));
    }
    if n < 4 {
        return Err(DtcError::InvalidParameter("n must be >= 4".into()));
    }
    let mut c1 = vec![0.0; d1];
    c1[0] = mu;
    c1[1] = -mu;
    c1[2] = 0.5 * mu;
    c1[3] = -0.5 * mu;
    let mut c2 = vec![0.0; d1];
    c2[4] = mu;
    c2[5] = -mu;
    c2[6] = 0.5 * mu;
    c2[7] = -0.5 * mu;

    let sizes = cluster_layout(n, &ratios)?;
    let (s1, s2, labels) = sample_mode_components(mu, &sizes);
    let truth = build_truth(vec![
        vec![c1.clone(), c2.clone()],
        vec![c1, c2],
        vec![s1, s2],
    ])?;
    let dims = vec![d1, d1, n];
    let mut stacked = cp_reconstruct(&truth, &dims)?;
    add_noise_2d(&mut stacked, cov, seed)?;
    Ok(SimDataset {
        samples: split_into_samples(&stacked)?,
        truth_factors: truth,
        truth_assignment: labels,
        meta: DesignMeta {
            dims,
            n,
            mu,
            cov: cov.kind,
            rho: cov.rho,
            cluster_sizes: sizes,
            seed,
        },
    })
}

fn add_noise_2d(stacked: &mut DenseTensor, cov: &CovarianceSpec, seed: u64) -> Result<()> {
    let dims = stacked.dims().to_vec();
    let n = dims[2];
    if cov.is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in stacked.data_mut() {
            let e: f64 = StandardNormal.sample(&mut rng);
            *x += e;
        }
        return Ok(());
    }
    // per-sample Kronecker-structured noise on the two matrix modes
    let zero = DenseTensor::zeros(vec![dims[0], dims[1]])?;
    let covs = [*cov, *cov];
    for i in 0..n {
        let e = sample_tensor_normal(&zero, &covs, seed.wrapping_add(i as u64))?;
        let data = stacked.data_mut();
        for (flat, &v) in e.data().iter().enumerate() {
            data[flat * n + i] += v;
        }
    }
    Ok(())
}

/// The rank-2, four-cluster 3-way tensor design with standard Gaussian
/// noise. Support blocks are `d/4`, `d/4`, `d/2` (the printed design at
/// `d = 20`; other d scale proportionally).
pub fn gen_3d(n: usize, d: usize, mu: f64, ratios: ClusterRatios, seed: u64) -> Result<SimDataset> {
    if d < 4 {
        return Err(DtcError::InvalidParameter(format!(
            "d = {} too small for the block design",
            d
        )));
    }
    if n < 4 {
        return Err(DtcError::InvalidParameter("n must be >= 4".into()));
    }
    let q = d / 4;
    let mut c1 = vec![0.0; d];
    for i in 0..q {
        c1[i] = mu;
        c1[q + i] = -mu;
    }
    let mut c2 = vec![0.0; d];
    for i in 2 * q..3 * q {
        c2[i] = mu;
    }
    for i in 3 * q..d {
        c2[i] = -mu;
    }

    let sizes = cluster_layout(n, &ratios)?;
    let (s1, s2, labels) = sample_mode_components(mu, &sizes);
    let truth = build_truth(vec![
        vec![c1.clone(), c2.clone()],
        vec![c1.clone(), c2.clone()],
        vec![c1, c2],
        vec![s1, s2],
    ])?;
    let dims = vec![d, d, d, n];
    let mut stacked = cp_reconstruct(&truth, &dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in stacked.data_mut() {
        let e: f64 = StandardNormal.sample(&mut rng);
        *x += e;
    }
    Ok(SimDataset {
        samples: split_into_samples(&stacked)?,
        truth_factors: truth,
        truth_assignment: labels,
        meta: DesignMeta {
            dims,
            n,
            mu,
            cov: CovKind::Identity,
            rho: 0.0,
            cluster_sizes: sizes,
            seed,
        },
    })
}
