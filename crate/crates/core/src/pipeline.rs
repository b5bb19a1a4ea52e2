//! Select, cost, solve: one design per sparsity target, and sweeps over many targets.

use rayon::prelude::*;

use crate::design::{
    cost_nonparametric, cost_ones, cost_parametric, select_j_frequency, select_j_projection, DesignProblem, JStrategy,
    Objective, SignalSet,
};
use crate::error::{Error, Result};
use crate::evaluate::{percent_error, summarize};
use crate::io::{SummaryRow, SweepRow};
use crate::lp::{build_lp, solve_basic, GraphicalDesign, SimplexOptions, DEFAULT_SUPPORT_TOL};
use crate::spectral::SpectralBasis;

#[derive(Debug, Clone)]
pub struct DesignSpec<'a> {
    pub strategy: JStrategy,
    pub objective: Objective,
    /// Required by the projection strategy and the parametric objective.
    pub sample_mean: Option<&'a [f64]>,
    /// Costs for [`Objective::File`].
    pub custom_cost: Option<&'a [f64]>,
    pub support_tol: f64,
    pub simplex: SimplexOptions,
}

impl<'a> DesignSpec<'a> {
    pub fn new(strategy: JStrategy, objective: Objective) -> Self {
        DesignSpec {
            strategy,
            objective,
            sample_mean: None,
            custom_cost: None,
            support_tol: DEFAULT_SUPPORT_TOL,
            simplex: SimplexOptions::default(),
        }
    }

    pub fn with_sample_mean(mut self, fbar: &'a [f64]) -> Self {
        self.sample_mean = Some(fbar);
        self
    }

    pub fn with_custom_cost(mut self, cost: &'a [f64]) -> Self {
        self.custom_cost = Some(cost);
        self
    }

    fn mean(&self) -> Result<&'a [f64]> {
        self.sample_mean.ok_or_else(|| {
            Error::Config(format!(
                "strategy {} with objective {} needs a signal source for the sample mean",
                self.strategy, self.objective
            ))
        })
    }

    /// Fails early when a required input is missing.
    pub fn validate(&self) -> Result<()> {
        if self.strategy == JStrategy::Projection || self.objective.needs_signal() {
            self.mean()?;
        }
        if matches!(self.objective, Objective::File(_)) && self.custom_cost.is_none() {
            return Err(Error::Config("file objective without a loaded cost vector".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DesignRun {
    pub problem: DesignProblem,
    pub design: GraphicalDesign,
    pub warnings: Vec<String>,
}

/// Builds and solves the LP for sparsity target `k`. `|J| = min(k, n)`.
pub fn design_for_k(basis: &SpectralBasis, k: usize, spec: &DesignSpec) -> Result<DesignRun> {
    spec.validate()?;
    let n = basis.dim();
    let j_len = k.min(n);
    let selection = match spec.strategy {
        JStrategy::Frequency => select_j_frequency(basis, j_len)?,
        JStrategy::Projection => select_j_projection(basis, spec.mean()?, j_len)?,
    };
    let j = selection.indices.clone();
    let cost = match &spec.objective {
        Objective::Nonparametric => cost_nonparametric(basis, &j)?,
        Objective::Parametric => cost_parametric(basis, &j, spec.mean()?)?,
        Objective::Ones => cost_ones(n),
        Objective::File(_) => spec.custom_cost.expect("validated").to_vec(),
    };
    let problem = DesignProblem::new(j, cost, k, Some(spec.strategy), spec.objective.clone())?;
    let lp = build_lp(basis, &problem)?;
    let design = solve_basic(&lp, &spec.simplex, spec.support_tol)?;
    Ok(DesignRun {
        problem,
        design,
        warnings: selection.warnings(),
    })
}

pub fn percent_of_nodes(k: usize, n: usize) -> f64 {
    100.0 * k as f64 / n as f64
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SummaryRow>,
    pub warnings: Vec<String>,
}

/// Solves one design per `k` in parallel and scores it on every signal.
/// A failing `k` becomes error rows rather than aborting the sweep.
pub fn sweep(basis: &SpectralBasis, signals: &SignalSet, ks: &[usize], spec: &DesignSpec) -> Result<SweepResult> {
    spec.validate()?;
    let n = basis.dim();
    let runs: Vec<Result<DesignRun>> = ks.par_iter().map(|&k| design_for_k(basis, k, spec)).collect();

    let mut rows = Vec::with_capacity(ks.len() * signals.len());
    let mut summary = Vec::with_capacity(ks.len());
    let mut warnings = Vec::new();
    for (&k, run) in ks.iter().zip(runs) {
        let pct = percent_of_nodes(k, n);
        let mut errors = Vec::with_capacity(signals.len());
        match run {
            Ok(run) => {
                warnings.extend(run.warnings.iter().map(|w| format!("k = {k}: {w}")));
                for (t, f) in signals.functions().iter().enumerate() {
                    let result = percent_error(&run.design, f).map_err(|e| e.to_string());
                    if let Ok(p) = result {
                        errors.push(p);
                    }
                    rows.push(SweepRow {
                        k,
                        percent_of_nodes: pct,
                        function_id: t + 1,
                        result,
                    });
                }
            }
            Err(e) => {
                warnings.push(format!("k = {k}: {e}"));
                for t in 0..signals.len() {
                    rows.push(SweepRow {
                        k,
                        percent_of_nodes: pct,
                        function_id: t + 1,
                        result: Err(e.to_string()),
                    });
                }
            }
        }
        summary.push(SummaryRow {
            k,
            percent_of_nodes: pct,
            quartiles: summarize(&errors),
        });
    }
    Ok(SweepResult {
        rows,
        summary,
        warnings,
    })
}
