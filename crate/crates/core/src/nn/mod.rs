//! Dense numerics for the segmenter: tensors, affine layers, activations,
//! recurrent cells, the cross-entropy objective, AdaGrad and finite
//! difference gradient checking.
//!
//! Everything is generic over [`Real`] so that models store `f32`
//! parameters while gradient checks run in `f64`.

mod adagrad;
mod gradcheck;
mod loss;
mod recurrent;
mod tensor;

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

pub use adagrad::{adagrad_update, AdaGradState, ROOT_FLOOR};
pub use gradcheck::{
    grad_check, relative_error, GradCheckEntry, GradCheckReport, DEFAULT_EPS as GRAD_EPS,
    REL_ERROR_FLOOR,
};
pub use loss::{cross_entropy, cross_entropy_l2, l2_penalty, LossReport, PROB_FLOOR};
pub use recurrent::{
    lstm_step, lstm_step_backward, rnn_step, rnn_step_backward, LstmParams, LstmStep, RnnParams,
    GATE_CANDIDATE, GATE_FORGET, GATE_INPUT, GATE_OUTPUT,
};
pub use tensor::{activate, affine, softmax, Activation, Tensor};
pub(crate) use tensor::{matvec_acc, matvec_t_acc, outer_acc};

pub trait Real:
    num_traits::Float
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Real for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn as_f64(self) -> f64 {
        self
    }
}

/// A collection of named parameter tensors, visited in a fixed order.
pub trait Parameters<T> {
    fn tensors(&self) -> Vec<(String, &Tensor<T>)>;
    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<T>)>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Plain list of named tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamList<T>(pub Vec<(String, Tensor<T>)>);

impl<T> Parameters<T> for ParamList<T> {
    fn tensors(&self) -> Vec<(String, &Tensor<T>)> {
        self.0.iter().map(|(n, t)| (n.clone(), t)).collect()
    }

    fn tensors_mut(&mut self) -> Vec<(String, &mut Tensor<T>)> {
        self.0.iter_mut().map(|(n, t)| (n.clone(), t)).collect()
    }
}
