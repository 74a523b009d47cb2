//! Dense row-major tensor of 64-bit reals.
//!
//! Every higher layer (convolutions, recurrences, CTC) is built on this
//! substrate. Shapes are checked on every operation; the only sanctioned
//! broadcast is the bias-add performed inside the layer kernels.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TensorError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("empty tensor: {0}")]
    EmptyTensor(String),
}

/// Dense n-dimensional array of `f64` with row-major layout.
///
/// Invariant: `shape.iter().product() == data.len()` and every dimension
/// is positive. Tensors are immutable by convention once built; the
/// optimizer mutates parameter tensors in place through `data_mut`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, TensorError> {
        if shape.is_empty() || shape.iter().any(|&d| d == 0) {
            return Err(TensorError::EmptyTensor(format!(
                "dimensions must be positive, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(TensorError::ShapeMismatch(format!(
                "shape {shape:?} wants {expected} elements, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n: usize = shape.iter().product();
        assert!(!shape.is_empty() && n > 0, "zero-sized shape {shape:?}");
        Self {
            shape,
            data: vec![0.0; n],
        }
    }

    pub fn filled(shape: Vec<usize>, value: f64) -> Self {
        let mut t = Self::zeros(shape);
        t.data.fill(value);
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Rows of a rank-2 tensor.
    pub fn row(&self, i: usize) -> &[f64] {
        debug_assert_eq!(self.shape.len(), 2);
        let cols = self.shape[1];
        &self.data[i * cols..(i + 1) * cols]
    }

    /// Flat index of `(i, j)` in a rank-2 tensor.
    pub fn idx2(&self, i: usize, j: usize) -> usize {
        i * self.shape[1] + j
    }

    /// Same flat data under a new shape; element count must not change.
    pub fn reshape(&self, new_shape: Vec<usize>) -> Result<Tensor, TensorError> {
        if new_shape.is_empty() || new_shape.iter().any(|&d| d == 0) {
            return Err(TensorError::EmptyTensor(format!(
                "dimensions must be positive, got {new_shape:?}"
            )));
        }
        let n: usize = new_shape.iter().product();
        if n != self.data.len() {
            return Err(TensorError::ShapeMismatch(format!(
                "cannot reshape {:?} ({} elements) to {new_shape:?} ({n} elements)",
                self.shape,
                self.data.len()
            )));
        }
        Ok(Tensor {
            shape: new_shape,
            data: self.data.clone(),
        })
    }

    /// Elementwise sum; shapes must match exactly.
    pub fn add(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Elementwise difference; shapes must match exactly.
    pub fn sub(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Elementwise product; shapes must match exactly.
    pub fn mul(&self, other: &Tensor) -> Result<Tensor, TensorError> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, k: f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * k).collect(),
        }
    }

    /// `self += k * other`, in place. Shapes must match exactly.
    pub fn axpy(&mut self, k: f64, other: &Tensor) -> Result<(), TensorError> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch(format!(
                "axpy of {:?} with {:?}",
                self.shape, other.shape
            )));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += k * b;
        }
        Ok(())
    }

    fn zip_with(&self, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor, TensorError> {
        if self.shape != other.shape {
            return Err(TensorError::ShapeMismatch(format!(
                "elementwise op on {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        Ok(Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

/// `c[i][j] = sum_k a[i][k] * b[k][j]` for rank-2 operands.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor, TensorError> {
    if a.shape.len() != 2 || b.shape.len() != 2 {
        return Err(TensorError::ShapeMismatch(format!(
            "matmul needs rank-2 operands, got {:?} and {:?}",
            a.shape, b.shape
        )));
    }
    let (m, k) = (a.shape[0], a.shape[1]);
    let (k2, n) = (b.shape[0], b.shape[1]);
    if k != k2 {
        return Err(TensorError::ShapeMismatch(format!(
            "matmul inner dimensions differ: {:?} x {:?}",
            a.shape, b.shape
        )));
    }
    let mut out = vec![0.0; m * n];
    // ikj order: the inner loop runs over contiguous rows of b and out.
    for i in 0..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        let out_row = &mut out[i * n..(i + 1) * n];
        for (kk, &av) in a_row.iter().enumerate() {
            let b_row = &b.data[kk * n..(kk + 1) * n];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    }
    Ok(Tensor {
        shape: vec![m, n],
        data: out,
    })
}

/// Transposed rank-2 copy.
pub fn transpose(a: &Tensor) -> Tensor {
    assert_eq!(a.shape.len(), 2, "transpose needs a rank-2 tensor");
    let (m, n) = (a.shape[0], a.shape[1]);
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            out[j * m + i] = a.data[i * n + j];
        }
    }
    Tensor {
        shape: vec![n, m],
        data: out,
    }
}

/// Per-row argmax of a rank-2 tensor; ties resolve to the lowest index.
pub fn argmax_rows(t: &Tensor) -> Result<Vec<usize>, TensorError> {
    if t.shape.len() != 2 {
        return Err(TensorError::ShapeMismatch(format!(
            "argmax_rows needs a rank-2 tensor, got {:?}",
            t.shape
        )));
    }
    if t.data.is_empty() {
        return Err(TensorError::EmptyTensor("argmax_rows of empty tensor".into()));
    }
    let cols = t.shape[1];
    let mut out = Vec::with_capacity(t.shape[0]);
    for r in 0..t.shape[0] {
        let row = &t.data[r * cols..(r + 1) * cols];
        let mut best = 0;
        for (j, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = j;
            }
        }
        out.push(best);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn t2(rows: &[&[f64]]) -> Tensor {
        let r = rows.len();
        let c = rows[0].len();
        Tensor::new(vec![r, c], rows.iter().flat_map(|r| r.iter().copied()).collect()).unwrap()
    }

    /// Independent oracle: naive triple loop.
    fn matmul_oracle(a: &Tensor, b: &Tensor) -> Tensor {
        let (m, k) = (a.shape()[0], a.shape()[1]);
        let n = b.shape()[1];
        let mut out = Tensor::zeros(vec![m, n]);
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for kk in 0..k {
                    acc += a.data()[i * k + kk] * b.data()[kk * n + j];
                }
                out.data_mut()[i * n + j] = acc;
            }
        }
        out
    }

    fn random_tensor(rng: &mut ChaCha8Rng, shape: Vec<usize>) -> Tensor {
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Tensor::new(shape, data).unwrap()
    }

    #[test]
    fn matmul_identity() {
        let i2 = t2(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let a = t2(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert_eq!(matmul(&i2, &a).unwrap(), a);
    }

    #[test]
    fn matmul_by_hand() {
        let a = t2(&[&[1.0, 2.0]]);
        let b = t2(&[&[3.0], &[4.0]]);
        let c = matmul(&a, &b).unwrap();
        assert_eq!(c.shape(), &[1, 1]);
        assert_eq!(c.data()[0], 11.0);
    }

    #[test]
    fn matmul_matches_triple_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_tensor(&mut rng, vec![3, 4]);
            let b = random_tensor(&mut rng, vec![4, 2]);
            let got = matmul(&a, &b).unwrap();
            let want = matmul_oracle(&a, &b);
            for (g, w) in got.data().iter().zip(want.data()) {
                assert!((g - w).abs() <= 1e-12, "{g} vs {w}");
            }
        }
    }

    #[test]
    fn matmul_rejects_inner_mismatch() {
        let a = Tensor::zeros(vec![2, 3]);
        let b = Tensor::zeros(vec![4, 2]);
        assert!(matches!(matmul(&a, &b), Err(TensorError::ShapeMismatch(_))));
    }

    #[test]
    fn matmul_associative_on_well_conditioned_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_tensor(&mut rng, vec![3, 3]);
            let b = random_tensor(&mut rng, vec![3, 3]);
            let c = random_tensor(&mut rng, vec![3, 3]);
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            for (l, r) in left.data().iter().zip(right.data()) {
                assert!((l - r).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn reshape_keeps_order() {
        let t = Tensor::new(vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let r = t.reshape(vec![3, 2]).unwrap();
        assert_eq!(r.shape(), &[3, 2]);
        assert_eq!(r.data(), t.data());
    }

    #[test]
    fn reshape_round_trip() {
        let t = Tensor::new(vec![6], vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let back = t.reshape(vec![1, 6]).unwrap().reshape(vec![6]).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn reshape_index_arithmetic() {
        let t = Tensor::new(vec![12], (0..12).map(|v| v as f64).collect()).unwrap();
        let m = t.reshape(vec![3, 4]).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(m.data()[m.idx2(i, j)], (i * 4 + j) as f64);
            }
        }
    }

    #[test]
    fn reshape_rejects_count_change() {
        let t = Tensor::zeros(vec![2, 3]);
        assert!(matches!(
            t.reshape(vec![4, 2]),
            Err(TensorError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn argmax_rows_basic() {
        let t = t2(&[&[0.9, 0.1], &[0.2, 0.8]]);
        assert_eq!(argmax_rows(&t).unwrap(), vec![0, 1]);
    }

    #[test]
    fn argmax_rows_tie_breaks_low() {
        let t = t2(&[&[0.5, 0.5]]);
        assert_eq!(argmax_rows(&t).unwrap(), vec![0]);
    }

    #[test]
    fn argmax_rows_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = random_tensor(&mut rng, vec![100, 7]);
        let got = argmax_rows(&t).unwrap();
        for (i, &g) in got.iter().enumerate() {
            let row = t.row(i);
            let mut best = 0;
            for j in 1..row.len() {
                if row[j] > row[best] {
                    best = j;
                }
            }
            assert_eq!(g, best);
        }
    }

    #[test]
    fn elementwise_rejects_mismatch() {
        let a = Tensor::zeros(vec![2, 2]);
        let b = Tensor::zeros(vec![4]);
        assert!(a.add(&b).is_err());
        assert!(a.mul(&b).is_err());
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(matches!(
            Tensor::new(vec![0, 3], vec![]),
            Err(TensorError::EmptyTensor(_))
        ));
    }
}
