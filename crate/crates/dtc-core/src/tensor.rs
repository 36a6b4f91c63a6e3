//! Dense tensor storage and the multilinear primitives used by the
//! factorization, clustering, and simulation modules.
//!
//! Tensors are stored as a flat `f64` buffer in row-major order over the
//! dimension vector, i.e. the last index varies fastest.

use crate::error::{DtcError, Result};

/// An m-way dense tensor of real values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(DtcError::EmptyInput("tensor must have order >= 1".into()));
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(DtcError::InvalidParameter(
                "every tensor dimension must be >= 1".into(),
            ));
        }
        let len: usize = dims.iter().product();
        if data.len() != len {
            return Err(DtcError::DimMismatch(format!(
                "data length {} != product of dims {}",
                data.len(),
                len
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let len = dims.iter().product();
        Self::new(dims, vec![0.0; len])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Entry at a multi-index, for tests and small-scale oracles.
    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.dims.len());
        let mut flat = 0;
        for (i, (&k, &d)) in idx.iter().zip(&self.dims).enumerate() {
            debug_assert!(k < d, "index {} out of bounds in mode {}", k, i);
            flat = flat * d + k;
        }
        self.data[flat]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Slice of the tensor fixing the last-mode index, as an (m-1)-way tensor.
    pub fn last_mode_slice(&self, idx: usize) -> Result<DenseTensor> {
        let m = self.order();
        if m < 2 {
            return Err(DtcError::InvalidParameter(
                "last_mode_slice needs order >= 2".into(),
            ));
        }
        let n = self.dims[m - 1];
        if idx >= n {
            return Err(DtcError::ModeOutOfRange { mode: idx, order: n });
        }
        let sub_dims = self.dims[..m - 1].to_vec();
        let sub_len: usize = sub_dims.iter().product();
        let mut data = Vec::with_capacity(sub_len);
        for i in 0..sub_len {
            data.push(self.data[i * n + idx]);
        }
        DenseTensor::new(sub_dims, data)
    }
}

/// A rank-R CP factorization: weights plus one unit-norm column per mode
/// and rank.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    /// Weight of each rank-one term. May carry either sign.
    pub weights: Vec<f64>,
    /// `factors[j][r]` is the mode-j column of rank r, length `d_j`.
    pub factors: Vec<Vec<Vec<f64>>>,
}

impl FactorSet {
    pub fn rank(&self) -> usize {
        self.weights.len()
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn mode_dims(&self) -> Vec<usize> {
        self.factors.iter().map(|m| m[0].len()).collect()
    }

    /// Rows of the mode-j factor matrix (d_j rows of length R), used as
    /// the reduced data for clustering.
    pub fn mode_rows(&self, j: usize) -> Vec<Vec<f64>> {
        let d = self.factors[j][0].len();
        let r = self.rank();
        (0..d)
            .map(|i| (0..r).map(|k| self.factors[j][k][i]).collect())
            .collect()
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        if self.factors.len() != dims.len() {
            return Err(DtcError::DimMismatch(format!(
                "factor set has {} modes, tensor has {}",
                self.factors.len(),
                dims.len()
            )));
        }
        for (j, mode) in self.factors.iter().enumerate() {
            if mode.len() != self.rank() {
                return Err(DtcError::DimMismatch(format!(
                    "mode {} has {} columns, expected rank {}",
                    j,
                    mode.len(),
                    self.rank()
                )));
            }
            for col in mode {
                if col.len() != dims[j] {
                    return Err(DtcError::DimMismatch(format!(
                        "mode {} column length {} != dim {}",
                        j,
                        col.len(),
                        dims[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Stack equally-sized samples into a tensor with one extra trailing mode.
pub fn stack_samples(samples: &[DenseTensor]) -> Result<DenseTensor> {
    let first = samples
        .first()
        .ok_or_else(|| DtcError::EmptyInput("no samples to stack".into()))?;
    let base = first.dims().to_vec();
    for (i, s) in samples.iter().enumerate() {
        if s.dims() != base.as_slice() {
            return Err(DtcError::DimMismatch(format!(
                "sample {} has dims {:?}, expected {:?}",
                i,
                s.dims(),
                base
            )));
        }
    }
    let n = samples.len();
    let sub_len: usize = base.iter().product();
    let mut dims = base;
    dims.push(n);
    let mut data = vec![0.0; sub_len * n];
    for (s_idx, s) in samples.iter().enumerate() {
        for (i, &v) in s.data().iter().enumerate() {
            data[i * n + s_idx] = v;
        }
    }
    DenseTensor::new(dims, data)
}

// Contract the last (fastest-varying) mode with a vector.
fn contract_last(data: &[f64], dims: &[usize], v: &[f64]) -> Vec<f64> {
    let d = *dims.last().unwrap();
    let outer = data.len() / d;
    let mut out = vec![0.0; outer];
    for (p, o) in out.iter_mut().enumerate() {
        let row = &data[p * d..(p + 1) * d];
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

// Contract the first (slowest-varying) mode with a vector.
fn contract_first(data: &[f64], dims: &[usize], v: &[f64]) -> Vec<f64> {
    let d = dims[0];
    let inner = data.len() / d;
    let mut out = vec![0.0; inner];
    for k in 0..d {
        let vk = v[k];
        let block = &data[k * inner..(k + 1) * inner];
        for (o, &b) in out.iter_mut().zip(block) {
            *o += vk * b;
        }
    }
    out
}

/// Multilinear contraction of every mode except mode `j`, leaving a vector
/// of length `d_j`. `vectors` holds one vector per contracted mode, in mode
/// order with mode `j` skipped.
///
/// Implemented as a sequence of single-mode contractions, so the cost is
/// linear in the number of tensor entries.
pub fn contract_except(t: &DenseTensor, vectors: &[&[f64]], j: usize) -> Result<Vec<f64>> {
    let m = t.order();
    if j >= m {
        return Err(DtcError::ModeOutOfRange { mode: j, order: m });
    }
    if vectors.len() != m - 1 {
        return Err(DtcError::DimMismatch(format!(
            "expected {} contraction vectors, got {}",
            m - 1,
            vectors.len()
        )));
    }
    let mut vi = 0;
    for k in 0..m {
        if k == j {
            continue;
        }
        if vectors[vi].len() != t.dims()[k] {
            return Err(DtcError::DimMismatch(format!(
                "vector for mode {} has length {}, expected {}",
                k,
                vectors[vi].len(),
                t.dims()[k]
            )));
        }
        vi += 1;
    }

    let mut data = t.data().to_vec();
    let mut dims = t.dims().to_vec();
    // Fold modes after j, from the back.
    while dims.len() > j + 1 {
        let v = vectors[dims.len() - 2]; // vectors index skips mode j; modes > j shift down by one
        data = contract_last(&data, &dims, v);
        dims.pop();
    }
    // Fold modes before j, from the front.
    let mut front = 0;
    while dims.len() > 1 {
        data = contract_first(&data, &dims, vectors[front]);
        dims.remove(0);
        front += 1;
    }
    Ok(data)
}

/// Full multilinear contraction to a scalar: `sum T[i] * prod_k v_k[i_k]`.
pub fn full_contract(t: &DenseTensor, vectors: &[&[f64]]) -> Result<f64> {
    let m = t.order();
    if vectors.len() != m {
        return Err(DtcError::DimMismatch(format!(
            "expected {} vectors, got {}",
            m,
            vectors.len()
        )));
    }
    for (k, v) in vectors.iter().enumerate() {
        if v.len() != t.dims()[k] {
            return Err(DtcError::DimMismatch(format!(
                "vector for mode {} has length {}, expected {}",
                k,
                v.len(),
                t.dims()[k]
            )));
        }
    }
    let mut data = t.data().to_vec();
    let mut dims = t.dims().to_vec();
    while !dims.is_empty() {
        data = contract_last(&data, &dims, vectors[dims.len() - 1]);
        dims.pop();
    }
    Ok(data[0])
}

// Rank-one term w * v_1 (o) ... (o) v_m as a flat row-major buffer.
fn rank_one(w: f64, vectors: &[&[f64]]) -> Vec<f64> {
    let mut acc = vec![w];
    for v in vectors {
        let mut next = Vec::with_capacity(acc.len() * v.len());
        for &a in &acc {
            for &b in v.iter() {
                next.push(a * b);
            }
        }
        acc = next;
    }
    acc
}

/// Reconstruct the dense tensor implied by a CP factor set.
pub fn cp_reconstruct(f: &FactorSet, dims: &[usize]) -> Result<DenseTensor> {
    if f.mode_dims() != dims {
        return Err(DtcError::DimMismatch(format!(
            "factor dims {:?} != requested dims {:?}",
            f.mode_dims(),
            dims
        )));
    }
    let mut out = DenseTensor::zeros(dims.to_vec())?;
    for r in 0..f.rank() {
        let cols: Vec<&[f64]> = f.factors.iter().map(|m| m[r].as_slice()).collect();
        let term = rank_one(f.weights[r], &cols);
        for (o, t) in out.data_mut().iter_mut().zip(&term) {
            *o += t;
        }
    }
    Ok(out)
}

/// `T - w * (v_1 (o) ... (o) v_m)`, the deflation step of the power method.
pub fn subtract_rank_one(t: &DenseTensor, w: f64, vectors: &[&[f64]]) -> Result<DenseTensor> {
    if vectors.len() != t.order() {
        return Err(DtcError::DimMismatch(format!(
            "expected {} vectors, got {}",
            t.order(),
            vectors.len()
        )));
    }
    for (k, v) in vectors.iter().enumerate() {
        if v.len() != t.dims()[k] {
            return Err(DtcError::DimMismatch(format!(
                "vector for mode {} has length {}, expected {}",
                k,
                v.len(),
                t.dims()[k]
            )));
        }
    }
    let term = rank_one(w, vectors);
    let data = t
        .data()
        .iter()
        .zip(&term)
        .map(|(a, b)| a - b)
        .collect();
    DenseTensor::new(t.dims().to_vec(), data)
}

/// Multiply mode `j` of the tensor by a matrix (`p` x `d_j`, row-major),
/// replacing dimension `d_j` with `p`.
pub fn mode_multiply(t: &DenseTensor, mat: &[f64], p: usize, j: usize) -> Result<DenseTensor> {
    let m = t.order();
    if j >= m {
        return Err(DtcError::ModeOutOfRange { mode: j, order: m });
    }
    let d = t.dims()[j];
    if mat.len() != p * d {
        return Err(DtcError::DimMismatch(format!(
            "matrix has {} entries, expected {}x{}",
            mat.len(),
            p,
            d
        )));
    }
    let inner: usize = t.dims()[j + 1..].iter().product();
    let outer: usize = t.dims()[..j].iter().product();
    let mut dims = t.dims().to_vec();
    dims[j] = p;
    let mut out = vec![0.0; outer * p * inner];
    for o in 0..outer {
        let in_base = o * d * inner;
        let out_base = o * p * inner;
        for row in 0..p {
            let acc = &mut out[out_base + row * inner..out_base + (row + 1) * inner];
            for k in 0..d {
                let c = mat[row * d + k];
                if c == 0.0 {
                    continue;
                }
                let src = &t.data()[in_base + k * inner..in_base + (k + 1) * inner];
                for (a, &s) in acc.iter_mut().zip(src) {
                    *a += c * s;
                }
            }
        }
    }
    DenseTensor::new(dims, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn unit(v: Vec<f64>) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
        unit((0..d).map(|_| rng.gen::<f64>() - 0.5).collect())
    }

    fn outer3(u: &[f64], v: &[f64], w: &[f64]) -> DenseTensor {
        let mut data = Vec::new();
        for &a in u {
            for &b in v {
                for &c in w {
                    data.push(a * b * c);
                }
            }
        }
        DenseTensor::new(vec![u.len(), v.len(), w.len()], data).unwrap()
    }

    // Triple-loop oracle for contract_except on a 3-way tensor.
    fn contract_oracle(t: &DenseTensor, a: &[f64], b: &[f64], j: usize) -> Vec<f64> {
        let d = t.dims().to_vec();
        let mut out = vec![0.0; d[j]];
        for i0 in 0..d[0] {
            for i1 in 0..d[1] {
                for i2 in 0..d[2] {
                    let val = t.get(&[i0, i1, i2]);
                    let idx = [i0, i1, i2];
                    let others: Vec<usize> =
                        (0..3).filter(|&k| k != j).map(|k| idx[k]).collect();
                    out[idx[j]] += val * a[others[0]] * b[others[1]];
                }
            }
        }
        out
    }

    #[test]
    fn stack_two_matrices() {
        let a = DenseTensor::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = DenseTensor::new(vec![2, 2], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let t = stack_samples(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(t.dims(), &[2, 2, 2]);
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(t.get(&[i, j, 0]), a.get(&[i, j]));
                assert_eq!(t.get(&[i, j, 1]), b.get(&[i, j]));
            }
        }
    }

    #[test]
    fn stack_singleton() {
        let a = DenseTensor::zeros(vec![3, 4]).unwrap();
        let t = stack_samples(&[a]).unwrap();
        assert_eq!(t.dims(), &[3, 4, 1]);
    }

    #[test]
    fn stack_mismatch_errors() {
        let a = DenseTensor::zeros(vec![2, 2]).unwrap();
        let b = DenseTensor::zeros(vec![2, 3]).unwrap();
        assert!(matches!(
            stack_samples(&[a, b]),
            Err(DtcError::DimMismatch(_))
        ));
        assert!(matches!(stack_samples(&[]), Err(DtcError::EmptyInput(_))));
    }

    #[test]
    fn contract_except_rank_one_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unit(&mut rng, 3);
        let v = random_unit(&mut rng, 4);
        let w = random_unit(&mut rng, 5);
        let t = outer3(&u, &v, &w);
        let got = contract_except(&t, &[&u, &v], 2).unwrap();
        for (g, e) in got.iter().zip(&w) {
            assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn contract_except_orthogonal_gives_zero() {
        let u = unit(vec![1.0, 0.0, 0.0]);
        let a = unit(vec![0.0, 1.0, 0.0]);
        let v = unit(vec![1.0, 1.0]);
        let w = unit(vec![1.0, 2.0, 3.0]);
        let t = outer3(&u, &v, &w);
        let got = contract_except(&t, &[&a, &v], 2).unwrap();
        assert!(got.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn contract_except_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<f64> = (0..8).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(vec![2, 2, 2], data).unwrap();
        let a = random_unit(&mut rng, 2);
        let b = random_unit(&mut rng, 2);
        for j in 0..3 {
            let got = contract_except(&t, &[&a, &b], j).unwrap();
            let exp = contract_oracle(&t, &a, &b, j);
            for (g, e) in got.iter().zip(&exp) {
                assert!((g - e).abs() < 1e-12, "mode {}: {} vs {}", j, g, e);
            }
        }
    }

    #[test]
    fn contract_except_bad_args() {
        let t = DenseTensor::zeros(vec![2, 2]).unwrap();
        let v = [1.0, 0.0];
        assert!(contract_except(&t, &[&v], 2).is_err());
        let short = [1.0];
        assert!(contract_except(&t, &[short.as_slice()], 0).is_err());
    }

    #[test]
    fn full_contract_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unit(&mut rng, 3);
        let v = random_unit(&mut rng, 3);
        let w = random_unit(&mut rng, 3);
        let t = outer3(&u, &v, &w);
        let s = full_contract(&t, &[&u, &v, &w]).unwrap();
        assert!((s - 1.0).abs() < 1e-12);

        // <u,a><v,b><w,c> on random probes
        let a = random_unit(&mut rng, 3);
        let b = random_unit(&mut rng, 3);
        let c = random_unit(&mut rng, 3);
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let s2 = full_contract(&t, &[&a, &b, &c]).unwrap();
        assert!((s2 - dot(&u, &a) * dot(&v, &b) * dot(&w, &c)).abs() < 1e-12);
    }

    #[test]
    fn full_contract_zero_tensor() {
        let t = DenseTensor::zeros(vec![2, 3]).unwrap();
        let a = [1.0, 2.0];
        let b = [1.0, 2.0, 3.0];
        assert_eq!(full_contract(&t, &[&a, &b]).unwrap(), 0.0);
    }

    #[test]
    fn cp_reconstruct_outer_product() {
        let f = FactorSet {
            weights: vec![2.0],
            factors: vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 1.0]]],
        };
        let t = cp_reconstruct(&f, &[2, 2]).unwrap();
        assert_eq!(t.data(), &[0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn cp_reconstruct_matches_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let dims = [3, 2, 4];
        let f = FactorSet {
            weights: vec![1.3, -0.7],
            factors: dims
                .iter()
                .map(|&d| (0..2).map(|_| random_unit(&mut rng, d)).collect())
                .collect(),
        };
        let t = cp_reconstruct(&f, &dims).unwrap();
        for i0 in 0..3 {
            for i1 in 0..2 {
                for i2 in 0..4 {
                    let mut exp = 0.0;
                    for r in 0..2 {
                        exp += f.weights[r]
                            * f.factors[0][r][i0]
                            * f.factors[1][r][i1]
                            * f.factors[2][r][i2];
                    }
                    assert!((t.get(&[i0, i1, i2]) - exp).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn cp_reconstruct_zero_weights() {
        let f = FactorSet {
            weights: vec![0.0, 0.0],
            factors: vec![
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            ],
        };
        let t = cp_reconstruct(&f, &[2, 2]).unwrap();
        assert_eq!(t.frobenius_norm(), 0.0);
    }

    #[test]
    fn subtract_rank_one_exact_deflation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unit(&mut rng, 3);
        let v = random_unit(&mut rng, 3);
        let w = random_unit(&mut rng, 3);
        let mut t = outer3(&u, &v, &w);
        for x in t.data_mut() {
            *x *= 3.0;
        }
        let r = subtract_rank_one(&t, 3.0, &[&u, &v, &w]).unwrap();
        assert!(r.frobenius_norm() <= 1e-10);

        let unchanged = subtract_rank_one(&t, 0.0, &[&u, &v, &w]).unwrap();
        assert_eq!(unchanged.data(), t.data());
    }

    #[test]
    fn deflation_energy_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data: Vec<f64> = (0..24).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(vec![2, 3, 4], data).unwrap();
        let vecs: Vec<Vec<f64>> = t.dims().iter().map(|&d| random_unit(&mut rng, d)).collect();
        let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
        let w = full_contract(&t, &refs).unwrap();
        let r = subtract_rank_one(&t, w, &refs).unwrap();
        let lhs = r.frobenius_norm().powi(2) + w * w;
        let rhs = t.frobenius_norm().powi(2);
        assert!((lhs - rhs).abs() / rhs < 1e-8);
    }

    #[test]
    fn frobenius_norm_examples() {
        let id = DenseTensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((id.frobenius_norm() - 2f64.sqrt()).abs() < 1e-15);
        let z = DenseTensor::zeros(vec![3, 3]).unwrap();
        assert_eq!(z.frobenius_norm(), 0.0);
        let ones = DenseTensor::new(vec![2, 3, 4], vec![1.0; 24]).unwrap();
        assert!((ones.frobenius_norm() - 24f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn contract_except_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let dims = vec![3, 2, 4];
        let len = 24;
        let d1: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() - 0.5).collect();
        let d2: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t1 = DenseTensor::new(dims.clone(), d1.clone()).unwrap();
        let t2 = DenseTensor::new(dims.clone(), d2.clone()).unwrap();
        let (a, b) = (1.7, -0.4);
        let mix: Vec<f64> = d1.iter().zip(&d2).map(|(x, y)| a * x + b * y).collect();
        let tm = DenseTensor::new(dims.clone(), mix).unwrap();
        let u = random_unit(&mut rng, 3);
        let v = random_unit(&mut rng, 4);
        let lhs = contract_except(&tm, &[&u, &v], 1).unwrap();
        let r1 = contract_except(&t1, &[&u, &v], 1).unwrap();
        let r2 = contract_except(&t2, &[&u, &v], 1).unwrap();
        for i in 0..lhs.len() {
            assert!((lhs[i] - (a * r1[i] + b * r2[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn full_contract_consistent_with_contract_except() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let dims = vec![3, 4, 2];
        let data: Vec<f64> = (0..24).map(|_| rng.gen::<f64>() - 0.5).collect();
        let t = DenseTensor::new(dims.clone(), data).unwrap();
        let vecs: Vec<Vec<f64>> = dims.iter().map(|&d| random_unit(&mut rng, d)).collect();
        let refs: Vec<&[f64]> = vecs.iter().map(|v| v.as_slice()).collect();
        let full = full_contract(&t, &refs).unwrap();
        for j in 0..3 {
            let others: Vec<&[f64]> = (0..3).filter(|&k| k != j).map(|k| refs[k]).collect();
            let partial = contract_except(&t, &others, j).unwrap();
            let dot: f64 = partial.iter().zip(refs[j]).map(|(a, b)| a * b).sum();
            assert!((full - dot).abs() < 1e-10);
        }
    }

    #[test]
    fn mode_multiply_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let data: Vec<f64> = (0..12).map(|_| rng.gen::<f64>()).collect();
        let t = DenseTensor::new(vec![3, 4], data.clone()).unwrap();
        let eye: Vec<f64> = (0..9)
            .map(|i| if i % 4 == 0 { 1.0 } else { 0.0 })
            .collect();
        let r = mode_multiply(&t, &eye, 3, 0).unwrap();
        assert_eq!(r.data(), data.as_slice());
    }
}
