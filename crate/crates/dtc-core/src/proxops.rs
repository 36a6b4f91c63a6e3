//! The structuring operators applied inside each power update: hard
//! truncation to a cardinality budget, exact 1D fused-lasso smoothing,
//! their composition, and unit normalization.
//!
//! `fuse` minimizes `sum_i (u_i - v_i)^2 + lambda * sum_j |u_{j+1} - u_j|`
//! exactly. This equals the standard TV proximal map `prox_{(lambda/2) TV}`
//! of the half-scaled quadratic; it is solved by a direct merge-event walk
//! along the penalty path rather than an iterative scheme.

use crate::error::{DtcError, Result};

const EPS_ZERO: f64 = 1e-12;

/// Keep the `tau` largest-magnitude entries, zeroing the rest. Ties at the
/// threshold are broken by keeping the lowest indices.
pub fn truncate(v: &[f64], tau: usize) -> Result<Vec<f64>> {
    if tau > v.len() {
        return Err(DtcError::InvalidParameter(format!(
            "tau {} exceeds vector length {}",
            tau,
            v.len()
        )));
    }
    if tau == v.len() {
        return Ok(v.to_vec());
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| {
        v[b].abs()
            .partial_cmp(&v[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut out = vec![0.0; v.len()];
    for &i in &order[..tau] {
        out[i] = v[i];
    }
    Ok(out)
}

/// Exact solution of the 1D fused lasso
/// `argmin_u sum_i (u_i - v_i)^2 + lambda * sum_j |u_{j+1} - u_j|`.
pub fn fuse(v: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if lambda < 0.0 {
        return Err(DtcError::InvalidParameter(format!(
            "fusion weight must be nonnegative, got {}",
            lambda
        )));
    }
    if v.is_empty() {
        return Err(DtcError::EmptyInput("fuse needs length >= 1".into()));
    }
    Ok(tv_denoise(v, lambda))
}

// Homotopy solver for argmin_u sum (u_i - y_i)^2 + lam * sum |u_{i+1} - u_i|.
//
// For a fixed pattern of fused blocks with between-block difference signs
// s_b = sign(c_{b+1} - c_b), stationarity gives the block value
//   c_b(lam) = mean_b + lam * (s_b - s_{b-1}) / (2 n_b),
// linear in lam. Along the penalty path blocks only merge, never split,
// so the solution at the target lam is reached by walking merge events:
// each event is the root of the linear gap between two adjacent blocks.
fn tv_denoise(y: &[f64], lam_target: f64) -> Vec<f64> {
    let n = y.len();
    if n == 1 || lam_target == 0.0 {
        return y.to_vec();
    }
    // initial blocks: runs of exactly equal values stay fused for all lam
    let mut sums: Vec<f64> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    for &v in y {
        if let (Some(&s), Some(&c)) = (sums.last(), counts.last()) {
            if s / c as f64 == v {
                *sums.last_mut().unwrap() += v;
                *counts.last_mut().unwrap() += 1;
                continue;
            }
        }
        sums.push(v);
        counts.push(1);
    }
    // signs[b] = sign(c_{b+1} - c_b), valid until the next merge event
    let mut signs: Vec<f64> = (0..sums.len() - 1)
        .map(|b| {
            if sums[b + 1] / counts[b + 1] as f64 > sums[b] / counts[b] as f64 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();

    loop {
        let nb = sums.len();
        if nb == 1 {
            break;
        }
        let slope = |b: usize| -> f64 {
            let left = if b == 0 { 0.0 } else { signs[b - 1] };
            let right = if b == nb - 1 { 0.0 } else { signs[b] };
            (right - left) / (2.0 * counts[b] as f64)
        };
        // earliest pair whose gap reaches zero at or before lam_target
        let mut hit: Option<(f64, usize)> = None;
        for b in 0..nb - 1 {
            let dv = sums[b + 1] / counts[b + 1] as f64 - sums[b] / counts[b] as f64;
            let dm = slope(b + 1) - slope(b);
            let gap_at_target = dv + lam_target * dm;
            // the gap currently has sign signs[b]; a collision happens iff
            // it vanishes or flips by lam_target
            if gap_at_target * signs[b] > 0.0 {
                continue;
            }
            let root = if dm == 0.0 { 0.0 } else { (-dv / dm).max(0.0) };
            if hit.map_or(true, |(l, _)| root < l) {
                hit = Some((root, b));
            }
        }
        match hit {
            Some((_, b)) => {
                sums[b] += sums[b + 1];
                counts[b] += counts[b + 1];
                sums.remove(b + 1);
                counts.remove(b + 1);
                signs.remove(b);
            }
            None => break,
        }
    }

    let nb = sums.len();
    let mut out = Vec::with_capacity(n);
    for b in 0..nb {
        let left = if b == 0 { 0.0 } else { signs[b - 1] };
        let right = if b == nb - 1 { 0.0 } else { signs[b] };
        let c = sums[b] / counts[b] as f64
            + lam_target * (right - left) / (2.0 * counts[b] as f64);
        out.extend(std::iter::repeat(c).take(counts[b]));
    }
    out
}

/// Fusion first, truncation second.
pub fn truncatefuse(v: &[f64], tau: usize, lambda: f64) -> Result<Vec<f64>> {
    truncate(&fuse(v, lambda)?, tau)
}

/// `v / ||v||_2`. Near-zero vectors cannot be normalized and signal the
/// caller to re-initialize.
pub fn normalize(v: &[f64]) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= EPS_ZERO {
        return Err(DtcError::DegenerateVector);
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

/// Total-variation seminorm `sum_j |v_{j+1} - v_j|` (`||D v||_1` with the
/// first-difference matrix D, which is never materialized).
pub fn tv_seminorm(v: &[f64]) -> f64 {
    v.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}
