use rand::Rng;

use super::Real;
use crate::error::{Error, Result};

/// Row-major matrix. Vectors that are parameters (biases) are stored as
/// `n x 1` tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                op: "tensor",
                expected: format!("{} elements", rows * cols),
                actual: format!("{}", data.len()),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn column(data: Vec<T>) -> Self {
        Self {
            rows: data.len(),
            cols: 1,
            data,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(n, n);
        for i in 0..n {
            t.data[i * n + i] = T::one();
        }
        t
    }

    pub fn uniform<R: Rng>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| T::from_f64(rng.gen_range(-bound..bound)))
            .collect();
        Self { rows, cols, data }
    }

    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::from_f64(v.as_f64())).collect(),
        }
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn sum_squares(&self) -> f64 {
        self.data.iter().map(|v| v.as_f64() * v.as_f64()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> Tensor<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }
}

/// `out += W x`
pub(crate) fn matvec_acc<T: Real>(w: &Tensor<T>, x: &[T], out: &mut [T]) {
    debug_assert_eq!(w.cols, x.len());
    debug_assert_eq!(w.rows, out.len());
    for (row, o) in w.data.chunks_exact(w.cols).zip(out.iter_mut()) {
        *o += dot(row, x);
    }
}

/// Dot product over eight independent partial sums so the loop vectorises.
/// The summation order is fixed, so results are reproducible.
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    const LANES: usize = 8;
    let mut lanes = [T::zero(); LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let tail: T = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| *x * *y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..LANES {
            lanes[k] += x[k] * y[k];
        }
    }
    lanes.iter().fold(T::zero(), |s, &v| s + v) + tail
}

/// `out += Wᵀ v`
pub(crate) fn matvec_t_acc<T: Real>(w: &Tensor<T>, v: &[T], out: &mut [T]) {
    debug_assert_eq!(w.rows, v.len());
    debug_assert_eq!(w.cols, out.len());
    for (row, &s) in w.data.chunks_exact(w.cols).zip(v) {
        if s == T::zero() {
            continue;
        }
        for (o, a) in out.iter_mut().zip(row) {
            *o += s * *a;
        }
    }
}

/// `g += a bᵀ`
pub(crate) fn outer_acc<T: Real>(g: &mut Tensor<T>, a: &[T], b: &[T]) {
    debug_assert_eq!(g.rows, a.len());
    debug_assert_eq!(g.cols, b.len());
    let cols = g.cols;
    for (row, &s) in g.data.chunks_exact_mut(cols).zip(a) {
        if s == T::zero() {
            continue;
        }
        for (o, v) in row.iter_mut().zip(b) {
            *o += s * *v;
        }
    }
}

fn shape_err(op: &'static str, expected: String, actual: String) -> Error {
    Error::ShapeMismatch {
        op,
        expected,
        actual,
    }
}

/// `W x + b`
pub fn affine<T: Real>(x: &[T], w: &Tensor<T>, b: &[T]) -> Result<Vec<T>> {
    if w.cols != x.len() {
        return Err(shape_err(
            "affine",
            format!("input of {}", w.cols),
            x.len().to_string(),
        ));
    }
    if w.rows != b.len() {
        return Err(shape_err(
            "affine",
            format!("bias of {}", w.rows),
            b.len().to_string(),
        ));
    }
    let mut out = b.to_vec();
    matvec_acc(w, x, &mut out);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation output `y`.
    pub fn derivative_from_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Tanh => T::one() - y * y,
            Activation::Sigmoid => y * (T::one() - y),
        }
    }
}

pub(crate) fn sigmoid<T: Real>(x: T) -> T {
    // split by sign so exp never overflows
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

pub fn activate<T: Real>(x: &[T], g: Activation) -> Vec<T> {
    x.iter().map(|&v| g.apply(v)).collect()
}

/// Numerically stable softmax (max-subtracted).
pub fn softmax<T: Real>(z: &[T]) -> Vec<T> {
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let mut out: Vec<T> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: T = out.iter().copied().sum();
    out.iter_mut().for_each(|v| *v = *v / sum);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn affine_examples() {
        let x = [0.5f64, -2.0];
        let out = affine(&x, &Tensor::identity(2), &[0.0, 0.0]).unwrap();
        assert_eq!(out, x.to_vec());
        let out = affine(&x, &Tensor::zeros(2, 2), &[1.5, -3.0]).unwrap();
        assert_eq!(out, vec![1.5, -3.0]);
        let w = Tensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(
            affine(&[1.0, 1.0], &w, &[0.0, 0.0]).unwrap(),
            vec![3.0, 7.0]
        );
    }

    #[test]
    fn affine_shape_errors() {
        let w = Tensor::<f64>::zeros(2, 3);
        assert!(affine(&[1.0, 2.0], &w, &[0.0, 0.0]).is_err());
        assert!(affine(&[1.0, 2.0, 3.0], &w, &[0.0]).is_err());
    }

    #[test]
    fn activation_fixed_points() {
        assert_eq!(activate(&[0.0f64], Activation::Tanh), vec![0.0]);
        assert_eq!(activate(&[0.0f64], Activation::Sigmoid), vec![0.5]);
        let s2 = activate(&[2.0f64], Activation::Sigmoid)[0];
        assert!((s2 - 0.880797).abs() < 1e-6);
        for x in [-3.0f64, -0.7, 0.2, 5.0] {
            assert_eq!(Activation::Tanh.apply(-x), -Activation::Tanh.apply(x));
        }
        assert!(sigmoid(-1000.0f64) >= 0.0 && sigmoid(1000.0f64) <= 1.0);
    }

    #[test]
    fn softmax_examples() {
        let u = softmax(&[0.0f64; 4]);
        assert!(u.iter().all(|&p| (p - 0.25).abs() < 1e-12));
        let p = softmax(&[1f64.ln(), 2f64.ln(), 3f64.ln()]);
        for (got, want) in p.iter().zip([1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn transposed_and_outer_products() {
        let w = Tensor::from_vec(2, 3, vec![1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let mut out = vec![0.0; 3];
        matvec_t_acc(&w, &[1.0, -1.0], &mut out);
        assert_eq!(out, vec![-3.0, -3.0, -3.0]);
        let mut g = Tensor::<f64>::zeros(2, 3);
        outer_acc(&mut g, &[1.0, 2.0], &[1.0, 0.0, -1.0]);
        assert_eq!(g.data(), &[1.0, 0.0, -1.0, 2.0, 0.0, -2.0]);
    }

    proptest! {
        #[test]
        fn softmax_normalised_and_shift_invariant(
            z in prop::collection::vec(-50.0f64..50.0, 1..12),
            shift in -100.0f64..100.0,
        ) {
            let p = softmax(&z);
            let sum: f64 = p.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-6);
            prop_assert!(p.iter().all(|&v| v > 0.0));
            let shifted: Vec<f64> = z.iter().map(|v| v + shift).collect();
            let q = softmax(&shifted);
            for (a, b) in p.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn softmax_f32_sums_to_one(z in prop::collection::vec(-10.0f32..10.0, 2..8)) {
            let sum: f32 = softmax(&z).iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-6);
        }
    }
}
