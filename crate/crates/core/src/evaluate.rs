//! Accuracy measures for a design: integration error, averaging residuals
//! and the a-priori error bounds behind the cost vectors.

use serde::Serialize;

use crate::design::{cost_nonparametric, cost_parametric, IndexSet, SignalSet};
use crate::error::{Error, Result};
use crate::lp::{averaging_residual, GraphicalDesign};
use crate::spectral::{check_len, dot, SpectralBasis};

/// True node average `(1/n) sum_i f(i)`.
pub fn true_mean(f: &[f64]) -> f64 {
    f.iter().sum::<f64>() / f.len() as f64
}

/// Weighted sum over the design support, `sum_{i in S} a_i f(i)`.
pub fn design_value(design: &GraphicalDesign, f: &[f64]) -> Result<f64> {
    check_len(design.node_count(), f.len())?;
    Ok(design.support().iter().map(|&i| design.weight(i) * f[i]).sum())
}

/// `|1 - design_value / true_mean| * 100`.
pub fn percent_error(design: &GraphicalDesign, f: &[f64]) -> Result<f64> {
    check_len(design.node_count(), f.len())?;
    let mean = true_mean(f);
    let scale = f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if mean == 0.0 || mean.abs() <= 1e-14 * scale || !mean.is_finite() {
        return Err(Error::ZeroMeanSignal);
    }
    Ok((1.0 - design_value(design, f)? / mean).abs() * 100.0)
}

/// Residual of each averaging equality, in the order of `j`.
pub fn averaging_residuals(design: &GraphicalDesign, basis: &SpectralBasis, j: &IndexSet) -> Result<Vec<(usize, f64)>> {
    check_len(basis.dim(), design.node_count())?;
    Ok(j.iter()
        .map(|jj| (jj, averaging_residual(design.weights(), basis, jj)))
        .collect())
}

/// Upper bound on `|true mean - design value|` for the specific function `f`.
pub fn bound_parametric(design: &GraphicalDesign, basis: &SpectralBasis, j: &IndexSet, f: &[f64]) -> Result<f64> {
    check_len(basis.dim(), design.node_count())?;
    let c = cost_parametric(basis, j, f)?;
    Ok(dot(&c, design.weights()))
}

/// Upper bound on the absolute error for every `f` whose energy outside `J`
/// is at most one.
pub fn bound_nonparametric(design: &GraphicalDesign, basis: &SpectralBasis, j: &IndexSet) -> Result<f64> {
    check_len(basis.dim(), design.node_count())?;
    let c = cost_nonparametric(basis, j)?;
    Ok(dot(&c, design.weights()))
}

/// `sum over j not in J of |phi_j^T a|`: how far the design is from averaging
/// the eigenvectors it was not constrained to average.
pub fn jbar_diagnostic(design: &GraphicalDesign, basis: &SpectralBasis, j: &IndexSet) -> Result<f64> {
    check_len(basis.dim(), design.node_count())?;
    Ok(j.complement()
        .into_iter()
        .map(|jj| dot(basis.eigenvector(jj), design.weights()).abs())
        .sum())
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median and quartiles of the finite values, `None` if there are none.
pub fn summarize(values: &[f64]) -> Option<Quartiles> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(Quartiles {
        q25: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.5),
        q75: quantile_sorted(&v, 0.75),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionError {
    pub function_id: usize,
    /// `None` when the function has zero mean.
    pub percent_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub per_function: Vec<FunctionError>,
    pub quartiles: Option<Quartiles>,
    pub max_averaging_residual: f64,
    pub jbar_diagnostic: f64,
    /// Parametric bound evaluated at the sample mean.
    pub bound_parametric: f64,
    pub bound_nonparametric: f64,
}

/// Evaluates a design against every function of `signals`. Function ids are 1-based.
pub fn evaluate_design(
    design: &GraphicalDesign,
    basis: &SpectralBasis,
    j: &IndexSet,
    signals: &SignalSet,
) -> Result<EvaluationReport> {
    check_len(basis.dim(), signals.node_count())?;
    let per_function: Vec<FunctionError> = signals
        .functions()
        .iter()
        .enumerate()
        .map(|(t, f)| match percent_error(design, f) {
            Ok(p) => Ok(FunctionError {
                function_id: t + 1,
                percent_error: Some(p),
            }),
            Err(Error::ZeroMeanSignal) => Ok(FunctionError {
                function_id: t + 1,
                percent_error: None,
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let errors: Vec<f64> = per_function.iter().filter_map(|f| f.percent_error).collect();
    let max_averaging_residual = averaging_residuals(design, basis, j)?
        .into_iter()
        .fold(0.0_f64, |m, (_, r)| m.max(r));
    Ok(EvaluationReport {
        quartiles: summarize(&errors),
        per_function,
        max_averaging_residual,
        jbar_diagnostic: jbar_diagnostic(design, basis, j)?,
        bound_parametric: bound_parametric(design, basis, j, signals.sample_mean())?,
        bound_nonparametric: bound_nonparametric(design, basis, j)?,
    })
}
