use super::{Parameters, Real, Tensor};
use crate::error::{Error, Result};

/// Lower bound on the accumulated-gradient root in the update denominator.
pub const ROOT_FLOOR: f64 = 1e-8;

/// Diagonal AdaGrad: per-coordinate running sum of squared gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaGradState<T> {
    pub learning_rate: f64,
    accumulators: Vec<Tensor<T>>,
}

impl<T: Real> AdaGradState<T> {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            accumulators: Vec::new(),
        }
    }

    pub fn accumulators(&self) -> &[Tensor<T>] {
        &self.accumulators
    }

    pub fn reset(&mut self) {
        self.accumulators.clear();
    }
}

/// One AdaGrad step: `acc += g²; θ -= α g / max(√acc, ROOT_FLOOR)`.
///
/// All gradients are checked for finiteness before anything is modified.
pub fn adagrad_update<T, P>(params: &mut P, grads: &P, state: &mut AdaGradState<T>) -> Result<()>
where
    T: Real,
    P: Parameters<T>,
{
    if state.learning_rate.is_nan() || state.learning_rate <= 0.0 {
        return Err(Error::Precondition(format!(
            "learning rate must be positive, got {}",
            state.learning_rate
        )));
    }
    let grads = grads.tensors();
    let mut targets = params.tensors_mut();
    if grads.len() != targets.len() {
        return Err(Error::ShapeMismatch {
            op: "adagrad_update",
            expected: format!("{} gradient tensors", targets.len()),
            actual: grads.len().to_string(),
        });
    }
    for ((name, g), (_, p)) in grads.iter().zip(targets.iter()) {
        if g.shape() != p.shape() {
            return Err(Error::ShapeMismatch {
                op: "adagrad_update",
                expected: format!("{name} of shape {:?}", p.shape()),
                actual: format!("{:?}", g.shape()),
            });
        }
        if !g.is_finite() {
            return Err(Error::NonFiniteGradient {
                param: name.clone(),
            });
        }
    }
    if state.accumulators.is_empty() {
        state.accumulators = targets
            .iter()
            .map(|(_, p)| Tensor::zeros(p.rows(), p.cols()))
            .collect();
    }
    let lr = T::from_f64(state.learning_rate);
    let floor = T::from_f64(ROOT_FLOOR);
    for (((_, g), (_, p)), acc) in grads
        .iter()
        .zip(targets.iter_mut())
        .zip(&mut state.accumulators)
    {
        for ((theta, &gi), a) in p.data_mut().iter_mut().zip(g.data()).zip(acc.data_mut()) {
            if gi == T::zero() {
                continue;
            }
            *a += gi * gi;
            *theta -= lr * gi / a.sqrt().max(floor);
        }
    }
    Ok(())
}
