//! Choosing which eigenvectors to average exactly and the LP cost vector.
//!
//! All eigenvector indices are 0-based in this API; index 0 is the constant
//! eigenvector. File formats use 1-based indices.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::spectral::{check_len, SpectralBasis};

/// Ordered set of distinct eigenvector indices, kept in selection order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    indices: Vec<usize>,
    n: usize,
}

impl IndexSet {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for &j in &indices {
            if j >= n {
                return Err(Error::InvalidIndexSet(format!(
                    "index {} out of range for n = {n}",
                    j + 1
                )));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidIndexSet(format!("index {} repeated", j + 1)));
            }
        }
        Ok(IndexSet { indices, n })
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        IndexSet {
            indices: (0..n).collect(),
            n,
        }
    }

    pub fn from_one_based(indices: &[usize], n: usize) -> Result<Self> {
        let zero_based = indices
            .iter()
            .map(|&j| {
                j.checked_sub(1)
                    .ok_or_else(|| Error::InvalidIndexSet("index 0 in a 1-based set".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        IndexSet::new(zero_based, n)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|j| j + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Size of the ambient index range `0..n`.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.indices.contains(&j)
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &j in &self.indices {
            m[j] = true;
        }
        m
    }

    /// Indices not in the set, ascending.
    pub fn complement(&self) -> Vec<usize> {
        let mask = self.mask();
        (0..self.n).filter(|&j| !mask[j]).collect()
    }
}

/// How the exactly-averaged index set was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JStrategy {
    /// Lowest-frequency eigenvectors.
    Frequency,
    /// Largest projections onto the sample mean.
    Projection,
}

impl fmt::Display for JStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JStrategy::Frequency => "freq",
            JStrategy::Projection => "proj",
        })
    }
}

impl FromStr for JStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "freq" => Ok(JStrategy::Frequency),
            "proj" => Ok(JStrategy::Projection),
            other => Err(Error::Config(format!("unknown J strategy {other:?} (freq|proj)"))),
        }
    }
}

/// Which cost vector the LP minimizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    Nonparametric,
    Parametric,
    Ones,
    /// User-supplied per-node costs read from a file.
    File(String),
}

impl Objective {
    pub fn needs_signal(&self) -> bool {
        matches!(self, Objective::Parametric)
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Nonparametric => f.write_str("nonparam"),
            Objective::Parametric => f.write_str("param"),
            Objective::Ones => f.write_str("ones"),
            Objective::File(path) => write!(f, "file:{path}"),
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonparam" => Ok(Objective::Nonparametric),
            "param" => Ok(Objective::Parametric),
            "ones" => Ok(Objective::Ones),
            other => match other.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Objective::File(path.to_string())),
                _ => Err(Error::Config(format!(
                    "unknown objective {other:?} (nonparam|param|ones|file:<path>)"
                ))),
            },
        }
    }
}

/// A J-selection together with the multiplicity groups it cuts through.
#[derive(Debug, Clone, PartialEq)]
pub struct JSelection {
    pub indices: IndexSet,
    /// Eigenvalue groups with some but not all members selected. The basis
    /// inside such a group is arbitrary, so the selection is too.
    pub split_groups: Vec<Vec<usize>>,
}

impl JSelection {
    fn new(basis: &SpectralBasis, indices: IndexSet) -> Self {
        let mask = indices.mask();
        let split_groups = basis
            .multiplicity_groups()
            .iter()
            .filter(|g| {
                let inside = g.iter().filter(|&&j| mask[j]).count();
                inside > 0 && inside < g.len()
            })
            .cloned()
            .collect();
        JSelection { indices, split_groups }
    }

    pub fn warnings(&self) -> Vec<String> {
        self.split_groups
            .iter()
            .map(|g| {
                let one_based: Vec<_> = g.iter().map(|j| j + 1).collect();
                format!(
                    "J splits the repeated eigenvalue group {one_based:?}; the selection depends on an arbitrary eigenspace basis"
                )
            })
            .collect()
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            min: 1,
            max: n,
        });
    }
    Ok(())
}

/// The `k` lowest-frequency eigenvectors.
pub fn select_j_frequency(basis: &SpectralBasis, k: usize) -> Result<JSelection> {
    let n = basis.dim();
    check_k(k, n)?;
    let indices = IndexSet::new((0..k).collect(), n)?;
    Ok(JSelection::new(basis, indices))
}

/// Index 0 plus the `k - 1` other eigenvectors with the largest `|phi_j^T fbar|`.
///
/// Ties go to the smaller index. The result is in selection order.
pub fn select_j_projection(basis: &SpectralBasis, fbar: &[f64], k: usize) -> Result<JSelection> {
    let n = basis.dim();
    check_k(k, n)?;
    let proj = basis.projection(fbar)?;
    let mut indices = Vec::with_capacity(k);
    indices.push(0);
    indices.extend_from_slice(&rank_by_magnitude(&proj[1..])[..k - 1]);
    Ok(JSelection::new(basis, IndexSet::new(indices, n)?))
}

/// Indices `1..=values.len()` sorted by decreasing `|values[i - 1]|`, ties by index.
fn rank_by_magnitude(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    order.into_iter().map(|i| i + 1).collect()
}

/// `c_i = sqrt(sum over j not in J of phi_j(i)^2)`.
pub fn cost_nonparametric(basis: &SpectralBasis, j: &IndexSet) -> Result<Vec<f64>> {
    check_len(basis.dim(), j.universe())?;
    let n = basis.dim();
    let mut acc = vec![0.0; n];
    for jj in j.complement() {
        for (a, p) in acc.iter_mut().zip(basis.eigenvector(jj)) {
            *a += p * p;
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

/// `c_i = |sum over j not in J of phi_j(i) (phi_j^T fbar)|`.
pub fn cost_parametric(basis: &SpectralBasis, j: &IndexSet, fbar: &[f64]) -> Result<Vec<f64>> {
    check_len(basis.dim(), j.universe())?;
    let proj = basis.projection(fbar)?;
    let n = basis.dim();
    let mut acc = vec![0.0; n];
    for jj in j.complement() {
        let coeff = proj[jj];
        for (a, p) in acc.iter_mut().zip(basis.eigenvector(jj)) {
            *a += p * coeff;
        }
    }
    Ok(acc.into_iter().map(f64::abs).collect())
}

/// All-ones cost. Every feasible point has objective 1, so the solver
/// returns whichever vertex it reaches first.
pub fn cost_ones(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// A fully specified LP instance: exact index set, cost vector and sparsity target.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    j: IndexSet,
    cost: Vec<f64>,
    k: usize,
    strategy: Option<JStrategy>,
    objective: Objective,
}

impl DesignProblem {
    pub fn new(
        j: IndexSet,
        cost: Vec<f64>,
        k: usize,
        strategy: Option<JStrategy>,
        objective: Objective,
    ) -> Result<Self> {
        if !j.contains(0) {
            return Err(Error::MissingIndexOne);
        }
        check_len(j.universe(), cost.len())?;
        if j.len() > k {
            return Err(Error::SparsityTooSmall { j_len: j.len(), k });
        }
        if let Some(i) = cost.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCost(i));
        }
        Ok(DesignProblem {
            j,
            cost,
            k,
            strategy,
            objective,
        })
    }

    pub fn j(&self) -> &IndexSet {
        &self.j
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn strategy(&self) -> Option<JStrategy> {
        self.strategy
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }
}

/// A family of node functions and their sample mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSet {
    functions: Vec<Vec<f64>>,
    sample_mean: Vec<f64>,
}

impl SignalSet {
    pub fn new(functions: Vec<Vec<f64>>, n: usize) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::EmptySignalSet);
        }
        for f in &functions {
            check_len(n, f.len())?;
        }
        let sample_mean = mean_of(&functions, n);
        Ok(SignalSet { functions, sample_mean })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.sample_mean.len()
    }

    pub fn functions(&self) -> &[Vec<f64>] {
        &self.functions
    }

    pub fn function(&self, t: usize) -> &[f64] {
        &self.functions[t]
    }

    pub fn sample_mean(&self) -> &[f64] {
        &self.sample_mean
    }
}

fn mean_of(functions: &[Vec<f64>], n: usize) -> Vec<f64> {
    let mut mean = vec![0.0; n];
    for f in functions {
        for (m, x) in mean.iter_mut().zip(f) {
            *m += x;
        }
    }
    let t = functions.len() as f64;
    mean.iter_mut().for_each(|m| *m /= t);
    mean
}
