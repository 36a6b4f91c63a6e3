//! Model selection: the BIC-style criterion over (rank, sparsity, fusion
//! weight) grids, with degrees of freedom counted as unique nonzero values
//! per factor column.

use crate::error::{DtcError, Result};
use crate::stf::{stf_decompose, ConstraintSpec};
use crate::tensor::{cp_reconstruct, DenseTensor, FactorSet};

/// Absolute tolerance for treating two factor entries as the same fused
/// value when counting degrees of freedom.
pub const VALUE_TOL: f64 = 1e-8;

/// Floor on the residual sum of squares so the criterion stays finite at a
/// perfect fit.
pub const EPS_RSS: f64 = 1e-12;

/// Candidate grid for model selection.
#[derive(Debug, Clone)]
pub struct TuneGrid {
    pub ranks: Vec<usize>,
    /// Absolute per-mode sparsity levels, applied to every mode (clamped
    /// to each mode's dimension).
    pub sparsity: Vec<usize>,
    pub lambdas: Vec<f64>,
}

impl TuneGrid {
    pub fn validate(&self) -> Result<()> {
        if self.ranks.is_empty() || self.sparsity.is_empty() || self.lambdas.is_empty() {
            return Err(DtcError::EmptyInput("tuning grid has an empty axis".into()));
        }
        if self.ranks.iter().any(|&r| r == 0) {
            return Err(DtcError::InvalidParameter("rank candidates must be >= 1".into()));
        }
        if self.lambdas.iter().any(|&l| !(l >= 0.0)) {
            return Err(DtcError::InvalidParameter(
                "lambda candidates must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone)]
pub struct TuneScore {
    pub rank: usize,
    pub s: usize,
    pub lambda: f64,
    pub bic: f64,
    pub df: usize,
    pub rss: f64,
}

/// Count distinct values (within `value_tol`) among the nonzero entries of
/// every factor column, summed over modes and ranks.
pub fn degrees_of_freedom(f: &FactorSet, value_tol: f64) -> usize {
    let mut total = 0;
    for mode in &f.factors {
        for col in mode {
            let mut nz: Vec<f64> = col.iter().copied().filter(|v| *v != 0.0).collect();
            nz.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut count = 0;
            let mut last = f64::NEG_INFINITY;
            for v in nz {
                if count == 0 || (v - last).abs() > value_tol {
                    count += 1;
                    last = v;
                }
            }
            total += count;
        }
    }
    total
}

/// The selection criterion: `log(max(RSS, eps) / prod d_j)` plus a
/// dimension-weighted degrees-of-freedom penalty. Lower is better.
pub fn bic_score(t: &DenseTensor, f: &FactorSet) -> Result<f64> {
    f.validate(t.dims())?;
    let recon = cp_reconstruct(f, t.dims())?;
    let rss: f64 = t
        .data()
        .iter()
        .zip(recon.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let prod: f64 = t.dims().iter().map(|&d| d as f64).product();
    let log_sum: f64 = t.dims().iter().map(|&d| (d as f64).ln()).sum();
    let df = degrees_of_freedom(f, VALUE_TOL) as f64;
    Ok((rss.max(EPS_RSS) / prod).ln() + log_sum / prod * df)
}

/// Fit every grid point with a shared seed policy and return the scores
/// plus the argmin, ties broken toward smaller rank, then smaller s, then
/// smaller lambda.
pub fn select_model(
    t: &DenseTensor,
    grid: &TuneGrid,
    base: &ConstraintSpec,
) -> Result<(TuneScore, Vec<TuneScore>)> {
    grid.validate()?;
    let mut scores = Vec::new();
    for &rank in &grid.ranks {
        for &s in &grid.sparsity {
            for &lambda in &grid.lambdas {
                let mut spec = base.clone();
                for (sj, &d) in spec.s.iter_mut().zip(t.dims()) {
                    *sj = s.min(d);
                }
                for lj in spec.lambda.iter_mut() {
                    *lj = lambda;
                }
                let (f, _) = stf_decompose(t, rank, &spec)?;
                let recon = cp_reconstruct(&f, t.dims())?;
                let rss: f64 = t
                    .data()
                    .iter()
                    .zip(recon.data())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                scores.push(TuneScore {
                    rank,
                    s,
                    lambda,
                    bic: bic_score(t, &f)?,
                    df: degrees_of_freedom(&f, VALUE_TOL),
                    rss,
                });
            }
        }
    }
    let mut best = scores[0].clone();
    for c in &scores[1..] {
        let better = c.bic < best.bic
            || (c.bic == best.bic
                && (c.rank, c.s) < (best.rank, best.s))
            || (c.bic == best.bic && c.rank == best.rank && c.s == best.s && c.lambda < best.lambda);
        if better {
            best = c.clone();
        }
    }
    Ok((best, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proxops::normalize;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn fset(cols: Vec<Vec<f64>>, weights: Vec<f64>, modes: usize) -> FactorSet {
        FactorSet {
            weights,
            factors: (0..modes).map(|_| cols.clone()).collect(),
        }
    }

    #[test]
    fn df_examples() {
        let f = fset(vec![vec![0.5, 0.5, 0.0, 0.3]], vec![1.0], 1);
        assert_eq!(degrees_of_freedom(&f, VALUE_TOL), 2);

        let dense = fset(vec![vec![0.1, 0.2, 0.3, 0.4, 0.5]], vec![1.0], 1);
        assert_eq!(degrees_of_freedom(&dense, VALUE_TOL), 5);

        let fused = fset(vec![vec![0.25; 6]], vec![1.0], 1);
        assert_eq!(degrees_of_freedom(&fused, VALUE_TOL), 1);

        // sums over modes and ranks
        let multi = fset(vec![vec![1.0, 0.0], vec![0.5, 0.5]], vec![1.0, 1.0], 3);
        assert_eq!(degrees_of_freedom(&multi, VALUE_TOL), 3 * (1 + 1));
    }

    #[test]
    fn df_tolerance_merges_near_values() {
        let f = fset(vec![vec![0.5, 0.5 + 1e-10, 0.2]], vec![1.0], 1);
        assert_eq!(degrees_of_freedom(&f, VALUE_TOL), 2);
    }

    #[test]
    fn bic_zero_factorset_on_unit_tensor() {
        let t = DenseTensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let f = fset(vec![vec![0.0, 0.0]], vec![0.0], 2);
        let bic = bic_score(&t, &f).unwrap();
        assert!((bic - (1.0f64 / 4.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn bic_perfect_fit_is_clamped() {
        let u = normalize(&[1.0, 2.0]).unwrap();
        let v = normalize(&[3.0, -1.0]).unwrap();
        let f = FactorSet {
            weights: vec![2.0],
            factors: vec![vec![u], vec![v]],
        };
        let t = cp_reconstruct(&f, &[2, 2]).unwrap();
        let bic = bic_score(&t, &f).unwrap();
        assert!(bic.is_finite());
        assert!(bic < (EPS_RSS / 4.0).ln() + 4.0 * 2.0f64.ln());
    }

    #[test]
    fn bic_matches_direct_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let dims = vec![3, 4, 2];
        let data: Vec<f64> = (0..24).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(dims.clone(), data).unwrap();
        let cols: Vec<Vec<Vec<f64>>> = dims
            .iter()
            .map(|&d| {
                (0..2)
                    .map(|_| {
                        normalize(
                            &(0..d).map(|_| rng.gen::<f64>() - 0.5).collect::<Vec<f64>>(),
                        )
                        .unwrap()
                    })
                    .collect()
            })
            .collect();
        let f = FactorSet {
            weights: vec![0.9, -0.4],
            factors: cols,
        };
        let recon = cp_reconstruct(&f, &dims).unwrap();
        let rss: f64 = t
            .data()
            .iter()
            .zip(recon.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let prod = 24.0;
        let log_sum = 3f64.ln() + 4f64.ln() + 2f64.ln();
        let df = degrees_of_freedom(&f, VALUE_TOL) as f64;
        let expect = (rss.max(EPS_RSS) / prod).ln() + log_sum / prod * df;
        assert!((bic_score(&t, &f).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn bic_increases_with_df_at_fixed_residual() {
        // same reconstruction, different df: a fused column vs a dense one
        let t = DenseTensor::zeros(vec![4, 4]).unwrap();
        let fused = fset(vec![vec![0.5; 4]], vec![0.0], 2);
        let dense = fset(vec![vec![0.1, 0.2, 0.3, 0.9]], vec![0.0], 2);
        // weights are zero, so both reconstruct to zero and RSS is equal
        let a = bic_score(&t, &fused).unwrap();
        let b = bic_score(&t, &dense).unwrap();
        assert!(degrees_of_freedom(&fused, VALUE_TOL) < degrees_of_freedom(&dense, VALUE_TOL));
        assert!(a < b);
    }

    #[test]
    fn select_noiseless_rank1_prefers_r1() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let dims = vec![6, 6, 6];
        let cols: Vec<Vec<Vec<f64>>> = dims
            .iter()
            .map(|&d| {
                vec![normalize(
                    &(0..d).map(|_| rng.gen::<f64>() - 0.5).collect::<Vec<f64>>(),
                )
                .unwrap()]
            })
            .collect();
        let truth = FactorSet {
            weights: vec![3.0],
            factors: cols,
        };
        let t = cp_reconstruct(&truth, &dims).unwrap();
        let base = ConstraintSpec::unconstrained(&dims, 99);
        let grid = TuneGrid {
            ranks: vec![1, 2],
            sparsity: vec![6],
            lambdas: vec![0.0],
        };
        let (best, scores) = select_model(&t, &grid, &base).unwrap();
        assert_eq!(best.rank, 1, "scores: {:?}", scores);
    }

    #[test]
    fn select_singleton_grid() {
        let t = DenseTensor::new(vec![2, 2], vec![1.0, 0.5, 0.5, 1.0]).unwrap();
        let base = ConstraintSpec::unconstrained(&[2, 2], 7);
        let grid = TuneGrid {
            ranks: vec![1],
            sparsity: vec![2],
            lambdas: vec![0.1],
        };
        let (best, scores) = select_model(&t, &grid, &base).unwrap();
        assert_eq!(scores.len(), 1);
        assert_eq!((best.rank, best.s, best.lambda), (1, 2, 0.1));
    }

    #[test]
    fn select_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let data: Vec<f64> = (0..27).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(vec![3, 3, 3], data).unwrap();
        let base = ConstraintSpec::uniform(&[3, 3, 3], 3, 0.0, 17);
        let grid = TuneGrid {
            ranks: vec![1, 2],
            sparsity: vec![2, 3],
            lambdas: vec![0.0, 0.5],
        };
        let (b1, s1) = select_model(&t, &grid, &base).unwrap();
        let (b2, s2) = select_model(&t, &grid, &base).unwrap();
        assert_eq!((b1.rank, b1.s, b1.lambda), (b2.rank, b2.s, b2.lambda));
        for (a, b) in s1.iter().zip(&s2) {
            assert_eq!(a.bic, b.bic);
        }
    }

    #[test]
    fn grid_validation() {
        let empty = TuneGrid {
            ranks: vec![],
            sparsity: vec![2],
            lambdas: vec![0.0],
        };
        assert!(empty.validate().is_err());
        let bad = TuneGrid {
            ranks: vec![0],
            sparsity: vec![2],
            lambdas: vec![0.0],
        };
        assert!(bad.validate().is_err());
    }
}
