use rand::Rng;

use super::tensor::sigmoid;
use super::{matvec_acc, matvec_t_acc, outer_acc, Parameters, Real, Tensor};
use crate::error::{Error, Result};

fn check_len(op: &'static str, what: &str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::ShapeMismatch {
            op,
            expected: format!("{what} of length {expected}"),
            actual: actual.to_string(),
        });
    }
    Ok(())
}

/// Elman recurrence `h = tanh(W_x x + W_h h_prev + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RnnParams<T> {
    pub w_x: Tensor<T>,
    pub w_h: Tensor<T>,
    pub b: Tensor<T>,
}

impl<T: Real> RnnParams<T> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_x: Tensor::zeros(hidden, input),
            w_h: Tensor::zeros(hidden, hidden),
            b: Tensor::zeros(hidden, 1),
        }
    }

    pub fn init<R: Rng>(input: usize, hidden: usize, bound: f64, rng: &mut R) -> Self {
        Self {
            w_x: Tensor::uniform(hidden, input, bound, rng),
            w_h: Tensor::uniform(hidden, hidden, bound, rng),
            b: Tensor::zeros(hidden, 1),
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_h.rows()
    }

    pub fn input(&self) -> usize {
        self.w_x.cols()
    }

    pub fn cast<U: Real>(&self) -> RnnParams<U> {
        RnnParams {
            w_x: self.w_x.cast(),
            w_h: self.w_h.cast(),
            b: self.b.cast(),
        }
    }
}

impl<T> Parameters<T> for RnnParams<T> {
    fn tensors(&self) -> Vec<(String, &Tensor<T>)> {
        vec![
            ("w_x".into(), &self.w_x),
            ("w_h".into(), &self.w_h),
            ("b".into(), &self.b),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        vec![
            ("w_x".into(), &mut self.w_x),
            ("w_h".into(), &mut self.w_h),
            ("b".into(), &mut self.b),
        ]
    }
}

pub fn rnn_step<T: Real>(x: &[T], h_prev: &[T], p: &RnnParams<T>) -> Result<Vec<T>> {
    check_len("rnn_step", "input", p.input(), x.len())?;
    check_len("rnn_step", "state", p.hidden(), h_prev.len())?;
    let mut h = p.b.data().to_vec();
    matvec_acc(&p.w_x, x, &mut h);
    matvec_acc(&p.w_h, h_prev, &mut h);
    h.iter_mut().for_each(|v| *v = v.tanh());
    Ok(h)
}

/// Backpropagates `dh` (gradient w.r.t. the step output `h`) through one
/// step, accumulating into `grads`. Returns `(dx, dh_prev)`.
pub fn rnn_step_backward<T: Real>(
    x: &[T],
    h_prev: &[T],
    h: &[T],
    dh: &[T],
    p: &RnnParams<T>,
    grads: &mut RnnParams<T>,
) -> (Vec<T>, Vec<T>) {
    let dpre: Vec<T> = h
        .iter()
        .zip(dh)
        .map(|(&y, &g)| g * (T::one() - y * y))
        .collect();
    outer_acc(&mut grads.w_x, &dpre, x);
    outer_acc(&mut grads.w_h, &dpre, h_prev);
    grads
        .b
        .data_mut()
        .iter_mut()
        .zip(&dpre)
        .for_each(|(b, &d)| *b += d);
    let mut dx = vec![T::zero(); x.len()];
    matvec_t_acc(&p.w_x, &dpre, &mut dx);
    let mut dh_prev = vec![T::zero(); h_prev.len()];
    matvec_t_acc(&p.w_h, &dpre, &mut dh_prev);
    (dx, dh_prev)
}

/// LSTM cell without peepholes. The four gates are stacked row-wise in the
/// order input, forget, output, candidate: rows `k*H .. (k+1)*H` of `w_x`,
/// `w_h` and `b` belong to gate `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams<T> {
    pub w_x: Tensor<T>,
    pub w_h: Tensor<T>,
    pub b: Tensor<T>,
}

pub const GATE_INPUT: usize = 0;
pub const GATE_FORGET: usize = 1;
pub const GATE_OUTPUT: usize = 2;
pub const GATE_CANDIDATE: usize = 3;

impl<T: Real> LstmParams<T> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_x: Tensor::zeros(4 * hidden, input),
            w_h: Tensor::zeros(4 * hidden, hidden),
            b: Tensor::zeros(4 * hidden, 1),
        }
    }

    /// Uniform weights, zero biases except the forget gate bias at 1.
    pub fn init<R: Rng>(input: usize, hidden: usize, bound: f64, rng: &mut R) -> Self {
        let mut p = Self {
            w_x: Tensor::uniform(4 * hidden, input, bound, rng),
            w_h: Tensor::uniform(4 * hidden, hidden, bound, rng),
            b: Tensor::zeros(4 * hidden, 1),
        };
        p.gate_bias_mut(GATE_FORGET).fill(T::one());
        p
    }

    pub fn hidden(&self) -> usize {
        self.w_h.cols()
    }

    pub fn input(&self) -> usize {
        self.w_x.cols()
    }

    pub fn gate_bias_mut(&mut self, gate: usize) -> &mut [T] {
        let h = self.hidden();
        &mut self.b.data_mut()[gate * h..(gate + 1) * h]
    }

    pub fn cast<U: Real>(&self) -> LstmParams<U> {
        LstmParams {
            w_x: self.w_x.cast(),
            w_h: self.w_h.cast(),
            b: self.b.cast(),
        }
    }
}

impl<T> Parameters<T> for LstmParams<T> {
    fn tensors(&self) -> Vec<(String, &Tensor<T>)> {
        vec![
            ("w_x".into(), &self.w_x),
            ("w_h".into(), &self.w_h),
            ("b".into(), &self.b),
        ]
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        vec![
            ("w_x".into(), &mut self.w_x),
            ("w_h".into(), &mut self.w_h),
            ("b".into(), &mut self.b),
        ]
    }
}

/// Activations of one LSTM step, kept for the backward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmStep<T> {
    /// Activated gates, stacked like the parameters.
    pub gates: Vec<T>,
    pub c: Vec<T>,
    pub tanh_c: Vec<T>,
    pub h: Vec<T>,
}

pub fn lstm_step<T: Real>(
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    p: &LstmParams<T>,
) -> Result<LstmStep<T>> {
    let hn = p.hidden();
    check_len("lstm_step", "input", p.input(), x.len())?;
    check_len("lstm_step", "hidden state", hn, h_prev.len())?;
    check_len("lstm_step", "cell state", hn, c_prev.len())?;
    let mut gates = p.b.data().to_vec();
    matvec_acc(&p.w_x, x, &mut gates);
    matvec_acc(&p.w_h, h_prev, &mut gates);
    for (k, v) in gates.iter_mut().enumerate() {
        *v = if k / hn == GATE_CANDIDATE {
            v.tanh()
        } else {
            sigmoid(*v)
        };
    }
    let mut c = vec![T::zero(); hn];
    let mut tanh_c = vec![T::zero(); hn];
    let mut h = vec![T::zero(); hn];
    for j in 0..hn {
        let (i, f, o, g) = (
            gates[j],
            gates[hn + j],
            gates[2 * hn + j],
            gates[3 * hn + j],
        );
        c[j] = f * c_prev[j] + i * g;
        tanh_c[j] = c[j].tanh();
        h[j] = o * tanh_c[j];
    }
    Ok(LstmStep {
        gates,
        c,
        tanh_c,
        h,
    })
}

/// Backpropagates gradients w.r.t. `h` and `c` of `step` into the
/// parameters and the previous state. Returns `(dx, dh_prev, dc_prev)`.
#[allow(clippy::too_many_arguments)]
pub fn lstm_step_backward<T: Real>(
    x: &[T],
    h_prev: &[T],
    c_prev: &[T],
    step: &LstmStep<T>,
    dh: &[T],
    dc: &[T],
    p: &LstmParams<T>,
    grads: &mut LstmParams<T>,
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let hn = p.hidden();
    let g = &step.gates;
    let mut dpre = vec![T::zero(); 4 * hn];
    let mut dc_prev = vec![T::zero(); hn];
    for j in 0..hn {
        let (i, f, o, cand) = (g[j], g[hn + j], g[2 * hn + j], g[3 * hn + j]);
        let tc = step.tanh_c[j];
        let dcell = dc[j] + dh[j] * o * (T::one() - tc * tc);
        let d_o = dh[j] * tc;
        let d_i = dcell * cand;
        let d_g = dcell * i;
        let d_f = dcell * c_prev[j];
        dc_prev[j] = dcell * f;
        dpre[j] = d_i * i * (T::one() - i);
        dpre[hn + j] = d_f * f * (T::one() - f);
        dpre[2 * hn + j] = d_o * o * (T::one() - o);
        dpre[3 * hn + j] = d_g * (T::one() - cand * cand);
    }
    outer_acc(&mut grads.w_x, &dpre, x);
    outer_acc(&mut grads.w_h, &dpre, h_prev);
    grads
        .b
        .data_mut()
        .iter_mut()
        .zip(&dpre)
        .for_each(|(b, &d)| *b += d);
    let mut dx = vec![T::zero(); x.len()];
    matvec_t_acc(&p.w_x, &dpre, &mut dx);
    let mut dh_prev = vec![T::zero(); hn];
    matvec_t_acc(&p.w_h, &dpre, &mut dh_prev);
    (dx, dh_prev, dc_prev)
}
