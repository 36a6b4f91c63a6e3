//! Structured tensor factorization: alternating truncate-fuse-normalize
//! power updates with greedy rank-one deflation.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{DtcError, Result};
use crate::proxops::{normalize, truncatefuse, tv_seminorm};
use crate::tensor::{contract_except, cp_reconstruct, full_contract, subtract_rank_one};
use crate::tensor::{DenseTensor, FactorSet};

/// Per-mode structural constraints and solver settings.
#[derive(Debug, Clone)]
pub struct ConstraintSpec {
    /// Cardinality budget per mode, `1 <= s_j <= d_j`.
    pub s: Vec<usize>,
    /// Fusion weight per mode, `>= 0`. Zero disables fusion for a mode.
    pub lambda: Vec<f64>,
    /// Groups of modes whose factors are forced equal. The smallest index
    /// in a group is the leader; followers copy its update.
    pub tied_modes: Vec<Vec<usize>>,
    pub max_iters: usize,
    pub conv_tol: f64,
    pub n_restarts: usize,
    pub rng_seed: u64,
}

impl ConstraintSpec {
    /// Same cardinality (clamped per mode) and fusion weight on every mode.
    pub fn uniform(dims: &[usize], s: usize, lambda: f64, rng_seed: u64) -> Self {
        Self {
            s: dims.iter().map(|&d| s.min(d).max(1)).collect(),
            lambda: vec![lambda; dims.len()],
            tied_modes: Vec::new(),
            max_iters: 20,
            conv_tol: 1e-4,
            n_restarts: 5,
            rng_seed,
        }
    }

    /// Constraints off: `s_j = d_j` and `lambda_j = 0` for every mode.
    pub fn unconstrained(dims: &[usize], rng_seed: u64) -> Self {
        Self {
            s: dims.to_vec(),
            lambda: vec![0.0; dims.len()],
            tied_modes: Vec::new(),
            max_iters: 20,
            conv_tol: 1e-4,
            n_restarts: 5,
            rng_seed,
        }
    }

    pub fn with_tied_modes(mut self, groups: Vec<Vec<usize>>) -> Self {
        self.tied_modes = groups;
        self
    }

    pub fn with_restarts(mut self, n: usize) -> Self {
        self.n_restarts = n;
        self
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        let m = dims.len();
        if self.s.len() != m || self.lambda.len() != m {
            return Err(DtcError::DimMismatch(format!(
                "constraint spec covers {} modes, tensor has {}",
                self.s.len(),
                m
            )));
        }
        for (j, (&sj, &d)) in self.s.iter().zip(dims).enumerate() {
            if sj == 0 || sj > d {
                return Err(DtcError::InvalidParameter(format!(
                    "s_{} = {} outside [1, {}]",
                    j, sj, d
                )));
            }
        }
        for (j, &l) in self.lambda.iter().enumerate() {
            if l < 0.0 || !l.is_finite() {
                return Err(DtcError::InvalidParameter(format!(
                    "lambda_{} = {} must be finite and nonnegative",
                    j, l
                )));
            }
        }
        let mut seen = vec![false; m];
        for group in &self.tied_modes {
            if group.len() < 2 {
                return Err(DtcError::InvalidParameter(
                    "tied-mode group needs at least two modes".into(),
                ));
            }
            let d0 = dims[group[0]];
            for &g in group {
                if g >= m {
                    return Err(DtcError::ModeOutOfRange { mode: g, order: m });
                }
                if seen[g] {
                    return Err(DtcError::InvalidParameter(format!(
                        "mode {} appears in more than one tied group",
                        g
                    )));
                }
                seen[g] = true;
                if dims[g] != d0 {
                    return Err(DtcError::InvalidParameter(format!(
                        "tied modes must share a dimension: {} vs {}",
                        dims[g], d0
                    )));
                }
            }
        }
        if self.max_iters == 0 || self.n_restarts == 0 {
            return Err(DtcError::InvalidParameter(
                "max_iters and n_restarts must be >= 1".into(),
            ));
        }
        Ok(())
    }

    // leader of the tied group containing j, or j itself
    fn leader(&self, j: usize) -> usize {
        for group in &self.tied_modes {
            if group.contains(&j) {
                return *group.iter().min().unwrap();
            }
        }
        j
    }

    fn followers(&self, j: usize) -> Vec<usize> {
        for group in &self.tied_modes {
            if group.iter().min() == Some(&j) {
                return group.iter().copied().filter(|&g| g != j).collect();
            }
        }
        Vec::new()
    }
}

/// Diagnostics from one decomposition run.
#[derive(Debug, Clone)]
pub struct StfReport {
    /// Power iterations used for the winning restart of each rank.
    pub iterations: Vec<usize>,
    /// Restart index chosen for each rank.
    pub restart_chosen: Vec<usize>,
    /// Frobenius norm of the residual after all deflation steps.
    pub residual_norm: f64,
    /// Penalized objective value of the returned factor set.
    pub objective: f64,
}

/// One alternating step for mode `j`:
/// `normalize(truncatefuse(normalize(contract_except(T, others, j)), s_j, lambda_j))`.
pub fn power_update(
    t: &DenseTensor,
    factors: &[Vec<f64>],
    j: usize,
    spec: &ConstraintSpec,
) -> Result<Vec<f64>> {
    let others: Vec<&[f64]> = factors
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != j)
        .map(|(_, v)| v.as_slice())
        .collect();
    let raw = contract_except(t, &others, j)?;
    let unconstrained = normalize(&raw)?;
    let structured = truncatefuse(&unconstrained, spec.s[j], spec.lambda[j])?;
    normalize(&structured)
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d)
            .map(|_| rand_distr::StandardNormal.sample(rng))
            .collect();
        if let Ok(u) = normalize(&v) {
            return u;
        }
    }
}

// One restart: random init, alternate updates, stop on the termination
// rule. Returns factors and the iteration count, or the degenerate error.
fn run_single_start(
    t: &DenseTensor,
    spec: &ConstraintSpec,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Vec<f64>>, usize)> {
    let dims = t.dims();
    let m = dims.len();
    let mut factors: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (j, &d) in dims.iter().enumerate() {
        let leader = spec.leader(j);
        if leader < j {
            factors.push(factors[leader].clone());
        } else {
            factors.push(random_unit(rng, d));
        }
    }
    let mut iters = 0;
    for _ in 0..spec.max_iters {
        iters += 1;
        let mut change = 0.0;
        for j in 0..m {
            let leader = spec.leader(j);
            if leader < j {
                continue; // follower, already copied at the leader's turn
            }
            let new = power_update(t, &factors, j, spec)?;
            let diff: f64 = new
                .iter()
                .zip(&factors[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            change += diff;
            for f in spec.followers(j) {
                change += diff;
                factors[f] = new.clone();
            }
            factors[j] = new;
        }
        if change <= spec.conv_tol {
            break;
        }
    }
    Ok((factors, iters))
}

/// Rank-R structured factorization with greedy deflation. Each rank runs
/// `n_restarts` independent seeded initializations and keeps the restart
/// with the largest `|w_r|`; a single restart reproduces the plain
/// alternating procedure.
pub fn stf_decompose(
    t: &DenseTensor,
    rank: usize,
    spec: &ConstraintSpec,
) -> Result<(FactorSet, StfReport)> {
    if rank == 0 {
        return Err(DtcError::InvalidParameter("rank must be >= 1".into()));
    }
    spec.validate(t.dims())?;
    let m = t.order();
    let mut residual = t.clone();
    let mut weights = Vec::with_capacity(rank);
    let mut factors: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(rank); m];
    let mut report = StfReport {
        iterations: Vec::with_capacity(rank),
        restart_chosen: Vec::with_capacity(rank),
        residual_norm: 0.0,
        objective: 0.0,
    };

    for r in 0..rank {
        let mut best: Option<(f64, Vec<Vec<f64>>, usize, usize)> = None;
        for attempt in 0..spec.n_restarts {
            let stream = (r * spec.n_restarts + attempt) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed.wrapping_add(stream));
            let (cand, iters) = match run_single_start(&residual, spec, &mut rng) {
                Ok(v) => v,
                Err(DtcError::DegenerateVector) => continue,
                Err(e) => return Err(e),
            };
            let refs: Vec<&[f64]> = cand.iter().map(|v| v.as_slice()).collect();
            let w = full_contract(&residual, &refs)?;
            if best.as_ref().map_or(true, |(bw, ..)| w.abs() > bw.abs()) {
                best = Some((w, cand, iters, attempt));
            }
        }
        // A fully deflated (numerically zero) residual makes every restart
        // degenerate; emit a zero-weight term so over-ranked fits still
        // succeed.
        let (w, cand, iters, attempt) = match best {
            Some(b) => b,
            None => (
                0.0,
                t.dims()
                    .iter()
                    .map(|&d| {
                        let mut e = vec![0.0; d];
                        e[0] = 1.0;
                        e
                    })
                    .collect(),
                0,
                0,
            ),
        };
        let refs: Vec<&[f64]> = cand.iter().map(|v| v.as_slice()).collect();
        residual = subtract_rank_one(&residual, w, &refs)?;
        weights.push(w);
        for (j, col) in cand.into_iter().enumerate() {
            factors[j].push(col);
        }
        report.iterations.push(iters);
        report.restart_chosen.push(attempt);
    }

    let fset = FactorSet { weights, factors };
    report.residual_norm = residual.frobenius_norm();
    report.objective = objective_value(t, &fset, spec)?;
    Ok((fset, report))
}

/// Penalized objective: `||T - reconstruction||_F^2 +
/// sum_j sum_r lambda_j ||D beta_{j,r}||_1`.
pub fn objective_value(t: &DenseTensor, f: &FactorSet, spec: &ConstraintSpec) -> Result<f64> {
    let recon = cp_reconstruct(f, t.dims())?;
    let rss: f64 = t
        .data()
        .iter()
        .zip(recon.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let mut penalty = 0.0;
    for (j, mode) in f.factors.iter().enumerate() {
        for col in mode {
            penalty += spec.lambda[j] * tv_seminorm(col);
        }
    }
    Ok(rss + penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proxops::{fuse, truncate};
    use crate::tensor::stack_samples;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        normalize(&v).unwrap()
    }

    fn rank_one_tensor(w: f64, vecs: &[Vec<f64>]) -> DenseTensor {
        let f = FactorSet {
            weights: vec![w],
            factors: vecs.iter().map(|v| vec![v.clone()]).collect(),
        };
        let dims: Vec<usize> = vecs.iter().map(|v| v.len()).collect();
        cp_reconstruct(&f, &dims).unwrap()
    }

    #[test]
    fn power_update_fixed_point_noiseless() {
        let u = unit(vec![1.0, 2.0, -1.0]);
        let v = unit(vec![0.5, -0.5, 1.5]);
        let z = unit(vec![2.0, 1.0, 0.3]);
        let t = rank_one_tensor(1.7, &[u.clone(), v.clone(), z.clone()]);
        let spec = ConstraintSpec::unconstrained(t.dims(), 1);
        let factors = vec![u.clone(), v.clone(), unit(vec![1.0, 1.0, 1.0])];
        let got = power_update(&t, &factors, 2, &spec).unwrap();
        for (g, e) in got.iter().zip(&z) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn power_update_truncation_inert_on_support() {
        let u = unit(vec![1.0, -1.0, 0.0, 0.0]);
        let v = unit(vec![0.0, 1.0, 1.0, 0.0]);
        let z = unit(vec![1.0, 0.0, 0.0, 1.0]); // sparse with 2 nonzeros
        let t = rank_one_tensor(2.0, &[u.clone(), v.clone(), z.clone()]);
        let mut spec = ConstraintSpec::unconstrained(t.dims(), 1);
        spec.s[2] = 2;
        let factors = vec![u, v, unit(vec![1.0; 4])];
        let got = power_update(&t, &factors, 2, &spec).unwrap();
        for (g, e) in got.iter().zip(&z) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn power_update_matches_operator_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let data: Vec<f64> = (0..27).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(vec![3, 3, 3], data).unwrap();
        let a = random_unit(&mut rng, 3);
        let b = random_unit(&mut rng, 3);
        let c = random_unit(&mut rng, 3);
        let mut spec = ConstraintSpec::uniform(t.dims(), 2, 0.3, 1);
        spec.lambda[1] = 0.7;
        let factors = vec![a.clone(), b.clone(), c.clone()];
        let got = power_update(&t, &factors, 1, &spec).unwrap();
        let raw = contract_except(&t, &[&a, &c], 1).unwrap();
        let exp = normalize(
            &truncate(&fuse(&normalize(&raw).unwrap(), 0.7).unwrap(), 2).unwrap(),
        )
        .unwrap();
        assert_eq!(got, exp);
    }

    #[test]
    fn decompose_noiseless_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let vecs: Vec<Vec<f64>> = [4, 5, 6].iter().map(|&d| random_unit(&mut rng, d)).collect();
        let t = rank_one_tensor(3.0, &vecs);
        let spec = ConstraintSpec::unconstrained(t.dims(), 7);
        let (f, rep) = stf_decompose(&t, 1, &spec).unwrap();
        let recon = cp_reconstruct(&f, t.dims()).unwrap();
        let err: f64 = t
            .data()
            .iter()
            .zip(recon.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            / t.frobenius_norm();
        assert!(err <= 1e-6, "recovery error {}", err);
        assert!(rep.residual_norm <= 1e-6 * t.frobenius_norm());
        assert!(rep.iterations[0] <= 20);
    }

    #[test]
    fn decompose_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data: Vec<f64> = (0..60).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(vec![3, 4, 5], data).unwrap();
        let spec = ConstraintSpec::uniform(t.dims(), 3, 0.1, 31);
        let (f1, _) = stf_decompose(&t, 2, &spec).unwrap();
        let (f2, _) = stf_decompose(&t, 2, &spec).unwrap();
        assert_eq!(f1, f2);
    }

    #[test]
    fn decompose_postconditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let data: Vec<f64> = (0..120).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(vec![4, 5, 6], data).unwrap();
        let spec = ConstraintSpec::uniform(t.dims(), 3, 0.2, 5);
        let (f, rep) = stf_decompose(&t, 3, &spec).unwrap();
        for (j, mode) in f.factors.iter().enumerate() {
            for col in mode {
                let norm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() <= 1e-8);
                let l0 = col.iter().filter(|x| **x != 0.0).count();
                assert!(l0 <= spec.s[j]);
            }
        }
        assert!(rep.residual_norm >= 0.0);
        assert!(rep.residual_norm <= t.frobenius_norm() + 1e-8);
    }

    #[test]
    fn deflation_residual_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let data: Vec<f64> = (0..180).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(vec![4, 5, 9], data).unwrap();
        let spec = ConstraintSpec::unconstrained(t.dims(), 77);
        let mut last = t.frobenius_norm();
        for r in 1..=4 {
            let (_, rep) = stf_decompose(&t, r, &spec).unwrap();
            assert!(rep.residual_norm <= last + 1e-10);
            last = rep.residual_norm;
        }
    }

    #[test]
    fn tied_modes_equal_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        // symmetric-in-first-two-modes tensor
        let base: Vec<Vec<f64>> = (0..3).map(|_| random_unit(&mut rng, 4)).collect();
        let sym = rank_one_tensor(2.0, &[base[0].clone(), base[0].clone(), base[2].clone()]);
        let spec =
            ConstraintSpec::unconstrained(sym.dims(), 3).with_tied_modes(vec![vec![0, 1]]);
        let (f, _) = stf_decompose(&sym, 2, &spec).unwrap();
        for r in 0..2 {
            assert_eq!(f.factors[0][r], f.factors[1][r]);
        }
    }

    #[test]
    fn objective_value_examples() {
        let u = unit(vec![1.0, 2.0]);
        let v = unit(vec![3.0, -1.0]);
        let t = rank_one_tensor(1.5, &[u.clone(), v.clone()]);
        let f = FactorSet {
            weights: vec![1.5],
            factors: vec![vec![u.clone()], vec![v.clone()]],
        };
        let spec = ConstraintSpec::unconstrained(t.dims(), 1);
        assert!(objective_value(&t, &f, &spec).unwrap() < 1e-20);

        let zero = FactorSet {
            weights: vec![0.0],
            factors: vec![vec![u], vec![v]],
        };
        let got = objective_value(&t, &zero, &spec).unwrap();
        assert!((got - t.frobenius_norm().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn objective_value_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..24).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(vec![2, 3, 4], data).unwrap();
        let f = FactorSet {
            weights: vec![0.8, -0.4],
            factors: t
                .dims()
                .iter()
                .map(|&d| (0..2).map(|_| random_unit(&mut rng, d)).collect())
                .collect(),
        };
        let mut spec = ConstraintSpec::uniform(t.dims(), 4, 0.9, 1);
        spec.lambda[2] = 0.2;
        let got = objective_value(&t, &f, &spec).unwrap();

        let recon = cp_reconstruct(&f, t.dims()).unwrap();
        let mut exp = 0.0;
        for (a, b) in t.data().iter().zip(recon.data()) {
            exp += (a - b) * (a - b);
        }
        for (j, mode) in f.factors.iter().enumerate() {
            for col in mode {
                for w in col.windows(2) {
                    exp += spec.lambda[j] * (w[1] - w[0]).abs();
                }
            }
        }
        assert!((got - exp).abs() < 1e-12);
    }

    #[test]
    fn invalid_spec_rejected() {
        let t = DenseTensor::zeros(vec![3, 3]).unwrap();
        let mut spec = ConstraintSpec::unconstrained(t.dims(), 1);
        spec.s[0] = 5;
        assert!(stf_decompose(&t, 1, &spec).is_err());
        let spec2 =
            ConstraintSpec::unconstrained(&[3, 3, 4], 1).with_tied_modes(vec![vec![0, 2]]);
        let t2 = DenseTensor::zeros(vec![3, 3, 4]).unwrap();
        assert!(spec2.validate(t2.dims()).is_err());
    }

    #[test]
    fn stacked_samples_decompose_consistency() {
        // two copies of the same rank-1 matrix stack to a rank-1 3-way tensor
        let u = unit(vec![1.0, 2.0, 3.0]);
        let v = unit(vec![1.0, -1.0]);
        let m = rank_one_tensor(2.0, &[u.clone(), v.clone()]);
        let t = stack_samples(&[m.clone(), m]).unwrap();
        let spec = ConstraintSpec::unconstrained(t.dims(), 17);
        let (f, rep) = stf_decompose(&t, 1, &spec).unwrap();
        assert!(rep.residual_norm < 1e-8);
        // last-mode factor must be constant across the two samples
        assert!((f.factors[2][0][0] - f.factors[2][0][1]).abs() < 1e-10);
    }
}
