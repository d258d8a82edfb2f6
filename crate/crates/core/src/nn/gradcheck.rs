use super::{Parameters, Tensor};
use crate::error::{Error, Result};

/// Denominator floor for relative errors, so that coordinates whose
/// gradient is essentially zero are compared absolutely.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

/// Central-difference step. Larger steps let truncation error swamp tiny
/// gradients; smaller ones let roundoff in the summed loss take over.
pub const DEFAULT_EPS: f64 = 3e-4;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckEntry {
    pub param: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub tolerance: f64,
    pub max_rel_error: f64,
    pub worst: Option<GradCheckEntry>,
    /// Coordinates whose relative error reached the tolerance.
    pub failures: Vec<GradCheckEntry>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares `analytic` against central differences of `loss` around
/// `params`, one coordinate at a time. `params` is restored afterwards.
pub fn grad_check<P, F>(
    params: &mut P,
    analytic: &P,
    mut loss: F,
    eps: f64,
    tolerance: f64,
) -> Result<GradCheckReport>
where
    P: Parameters<f64>,
    F: FnMut(&P) -> f64,
{
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    let shapes: Vec<(String, usize)> = params
        .tensors()
        .iter()
        .map(|(n, t)| (n.clone(), t.len()))
        .collect();
    let analytic: Vec<(String, Tensor<f64>)> = analytic
        .tensors()
        .into_iter()
        .map(|(n, t)| (n, t.clone()))
        .collect();
    if analytic.len() != shapes.len()
        || analytic
            .iter()
            .zip(&shapes)
            .any(|((_, a), (_, len))| a.len() != *len)
    {
        return Err(Error::ShapeMismatch {
            op: "grad_check",
            expected: "gradients shaped like the parameters".into(),
            actual: "different layout".into(),
        });
    }

    let mut report = GradCheckReport {
        checked: 0,
        tolerance,
        max_rel_error: 0.0,
        worst: None,
        failures: Vec::new(),
    };
    for (k, (name, len)) in shapes.iter().enumerate() {
        for i in 0..*len {
            let original = params.tensors()[k].1.data()[i];
            set(params, k, i, original + eps);
            let plus = loss(params);
            set(params, k, i, original - eps);
            let minus = loss(params);
            set(params, k, i, original);

            let numeric = (plus - minus) / (2.0 * eps);
            let a = analytic[k].1.data()[i];
            let rel = relative_error(a, numeric);
            let entry = GradCheckEntry {
                param: name.clone(),
                index: i,
                analytic: a,
                numeric,
                rel_error: rel,
            };
            report.checked += 1;
            if rel >= tolerance || !rel.is_finite() {
                report.failures.push(entry.clone());
            }
            if rel > report.max_rel_error || report.worst.is_none() {
                report.max_rel_error = rel.max(report.max_rel_error);
                report.worst = Some(entry);
            }
        }
    }
    Ok(report)
}

fn set<P: Parameters<f64>>(params: &mut P, tensor: usize, index: usize, value: f64) {
    params.tensors_mut()[tensor].1.data_mut()[index] = value;
}
