//! The design linear program and its basic optimal solutions.
//!
//! For an index set `J` containing the constant eigenvector the program is
//!
//! ```text
//! minimize    c^T a
//! subject to  1^T a = 1
//!             phi_j^T a = 0     for j in J \ {1}
//!             a >= 0
//! ```
//!
//! Any vertex of this polytope has at most `|J|` nonzero weights, so solving
//! it with a simplex method yields a design supported on at most `|J|` nodes.

pub mod simplex;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::design::{DesignProblem, IndexSet};
use crate::error::{Error, Result};
use crate::spectral::{check_len, dot, SpectralBasis};

pub use simplex::SimplexOptions;

/// Default threshold above which a weight counts as part of the support.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-9;

/// Default tolerance on the averaging equalities.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-8;

/// Equality-form LP. Row 0 is the all-ones normalization row.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLP {
    a_eq: DMatrix<f64>,
    b_eq: Vec<f64>,
    cost: Vec<f64>,
    row_indices: Vec<usize>,
}

impl StandardFormLP {
    pub fn a_eq(&self) -> &DMatrix<f64> {
        &self.a_eq
    }

    pub fn b_eq(&self) -> &[f64] {
        &self.b_eq
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    /// Eigenvector index behind each constraint row.
    pub fn row_indices(&self) -> &[usize] {
        &self.row_indices
    }

    pub fn rows(&self) -> usize {
        self.a_eq.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a_eq.ncols()
    }
}

/// Assembles the LP for `problem` on `basis`.
pub fn build_lp(basis: &SpectralBasis, problem: &DesignProblem) -> Result<StandardFormLP> {
    build_lp_parts(basis, problem.j(), problem.cost())
}

/// Assembles the LP from an index set and cost vector directly.
pub fn build_lp_parts(basis: &SpectralBasis, j: &IndexSet, cost: &[f64]) -> Result<StandardFormLP> {
    let n = basis.dim();
    check_len(n, j.universe())?;
    check_len(n, cost.len())?;
    if !j.contains(0) {
        return Err(Error::MissingIndexOne);
    }
    let mut row_indices = vec![0];
    row_indices.extend(j.iter().filter(|&jj| jj != 0));
    let m = row_indices.len();
    let mut a_eq = DMatrix::zeros(m, n);
    a_eq.row_mut(0).fill(1.0);
    for (r, &jj) in row_indices.iter().enumerate().skip(1) {
        for (i, &p) in basis.eigenvector(jj).iter().enumerate() {
            a_eq[(r, i)] = p;
        }
    }
    let mut b_eq = vec![0.0; m];
    b_eq[0] = 1.0;
    Ok(StandardFormLP {
        a_eq,
        b_eq,
        cost: cost.to_vec(),
        row_indices,
    })
}

/// Nonnegative node weights with their support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphicalDesign {
    weights: Vec<f64>,
    support: Vec<usize>,
    basis: Vec<usize>,
    objective_value: f64,
}

impl GraphicalDesign {
    /// Wraps an arbitrary weight vector; the support is every weight above `support_tol`.
    pub fn from_weights(weights: Vec<f64>, cost: &[f64], support_tol: f64) -> Result<Self> {
        check_len(weights.len(), cost.len())?;
        let support: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > support_tol).collect();
        let objective_value = dot(cost, &weights);
        Ok(GraphicalDesign {
            basis: support.clone(),
            weights,
            support,
            objective_value,
        })
    }

    pub fn with_objective_value(mut self, value: f64) -> Self {
        self.objective_value = value;
        self
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// Node indices carrying weight, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Structural columns of the final simplex basis.
    pub fn basis(&self) -> &[usize] {
        &self.basis
    }

    pub fn objective_value(&self) -> f64 {
        self.objective_value
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }
}

/// Returns a basic optimal solution of `lp`.
///
/// The support bound `|S| <= rows` is checked on the result.
pub fn solve_basic(lp: &StandardFormLP, opts: &SimplexOptions, support_tol: f64) -> Result<GraphicalDesign> {
    let sol = simplex::solve(&lp.a_eq, &lp.b_eq, &lp.cost, opts)?;
    let support: Vec<usize> = sol.basis.iter().copied().filter(|&i| sol.x[i] > support_tol).collect();
    if support.len() > lp.rows() {
        return Err(Error::SupportBoundViolated {
            support: support.len(),
            rows: lp.rows(),
        });
    }
    let objective_value = dot(&lp.cost, &sol.x);
    Ok(GraphicalDesign {
        weights: sol.x,
        support,
        basis: sol.basis,
        objective_value,
    })
}

/// One way a design fails to be a feasible point of the sparse design MILP.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    SupportTooLarge { size: usize, k: usize },
    WeightOutsideSupport { node: usize, weight: f64 },
    NegativeWeight { node: usize, weight: f64 },
    Averaging { index: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MilpCheck {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Checks `design` against the sparse-design feasibility system for `J` and `k`.
///
/// The upper bound `a <= 1` is not checked: it follows from normalization
/// and nonnegativity.
pub fn check_milp_feasibility(
    design: &GraphicalDesign,
    basis: &SpectralBasis,
    j: &IndexSet,
    k: usize,
    tol: f64,
) -> MilpCheck {
    let mut violations = Vec::new();
    let support = design.support();
    if support.len() > k {
        violations.push(Violation::SupportTooLarge { size: support.len(), k });
    }
    let mut in_support = vec![false; design.node_count()];
    for &i in support {
        if i < in_support.len() {
            in_support[i] = true;
        }
    }
    for (i, &w) in design.weights().iter().enumerate() {
        if w < -tol {
            violations.push(Violation::NegativeWeight { node: i, weight: w });
        }
        if w > tol && !in_support[i] {
            violations.push(Violation::WeightOutsideSupport { node: i, weight: w });
        }
    }
    if design.node_count() == basis.dim() && j.universe() == basis.dim() {
        for jj in j.iter() {
            let residual = averaging_residual(design.weights(), basis, jj);
            if residual > tol {
                violations.push(Violation::Averaging { index: jj, residual });
            }
        }
    } else {
        violations.push(Violation::Averaging {
            index: 0,
            residual: f64::INFINITY,
        });
    }
    MilpCheck {
        feasible: violations.is_empty(),
        violations,
    }
}

/// `|1^T a - 1|` for the constant eigenvector, `|phi_j^T a|` otherwise.
pub(crate) fn averaging_residual(weights: &[f64], basis: &SpectralBasis, j: usize) -> f64 {
    if j == 0 {
        (weights.iter().sum::<f64>() - 1.0).abs()
    } else {
        dot(basis.eigenvector(j), weights).abs()
    }
}
