use super::{Parameters, Real};
use crate::error::{Error, Result};

/// Probabilities are clamped to this floor before taking the logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

/// `-ln y[gold]`, and whether the probability had to be clamped.
pub fn cross_entropy<T: Real>(y: &[T], gold: usize) -> (f64, bool) {
    let p = y[gold].as_f64();
    if p < PROB_FLOOR {
        (-PROB_FLOOR.ln(), true)
    } else {
        (-p.ln(), false)
    }
}

/// `(λ/2) Σ θ²` over every parameter tensor.
pub fn l2_penalty<T, P: Parameters<T> + ?Sized>(params: &P, lambda: f64) -> f64
where
    T: Real,
{
    let sq: f64 = params.tensors().iter().map(|(_, t)| t.sum_squares()).sum();
    0.5 * lambda * sq
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossReport {
    pub total: f64,
    pub data: f64,
    pub l2: f64,
    /// Positions whose gold probability fell below [`PROB_FLOOR`].
    pub clamped: usize,
}

/// Summed cross-entropy over positions plus the L2 penalty.
pub fn cross_entropy_l2<T: Real, P: Parameters<T> + ?Sized>(
    ys: &[Vec<T>],
    gold: &[usize],
    params: &P,
    lambda: f64,
) -> Result<LossReport> {
    if ys.len() != gold.len() {
        return Err(Error::LengthMismatch(format!(
            "{} distributions but {} gold labels",
            ys.len(),
            gold.len()
        )));
    }
    if lambda < 0.0 {
        return Err(Error::Precondition(format!(
            "negative L2 coefficient {lambda}"
        )));
    }
    let mut report = LossReport::default();
    for (y, &g) in ys.iter().zip(gold) {
        if g >= y.len() {
            return Err(Error::Precondition(format!("gold class {g} out of range")));
        }
        let (l, clamped) = cross_entropy(y, g);
        report.data += l;
        report.clamped += clamped as usize;
    }
    report.l2 = l2_penalty(params, lambda);
    report.total = report.data + report.l2;
    Ok(report)
}
