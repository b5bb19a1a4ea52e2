//! Python bindings. Node and eigenvector indices are 0-based throughout;
//! node ids passed to [`Graph`] are the caller's own.

use std::collections::BTreeMap;
use std::path::PathBuf;

use graphdesign::design::{self, DesignProblem, IndexSet, JStrategy, Objective};
use graphdesign::evaluate;
use graphdesign::lp::{self, SimplexOptions, DEFAULT_SUPPORT_TOL};
use graphdesign::pipeline::{design_for_k, DesignSpec};
use graphdesign::spectral::{eigendecompose, DEFAULT_LAMBDA_REL_TOL};
use graphdesign::{io, GraphicalDesign, LatLon, RawEdge, SpectralBasis, WeightedGraph};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(graphdesign_py, GraphDesignError, PyException);

fn err(e: graphdesign::Error) -> PyErr {
    GraphDesignError::new_err(e.to_string())
}

#[pyclass(frozen)]
struct Graph {
    inner: WeightedGraph,
}

#[pymethods]
impl Graph {
    /// `edges` is a list of `(u, v, weight)`; `coords` maps node id to `(lat, lon)`.
    #[new]
    #[pyo3(signature = (edges, coords=None))]
    fn new(edges: Vec<(u64, u64, f64)>, coords: Option<BTreeMap<u64, (f64, f64)>>) -> PyResult<Self> {
        let edges: Vec<RawEdge> = edges.into_iter().map(|(u, v, w)| RawEdge::new(u, v, w)).collect();
        let coords = coords
            .map(|m| {
                m.into_iter()
                    .map(|(id, (lat, lon))| Ok((id, LatLon::new(lat, lon)?)))
                    .collect::<graphdesign::Result<BTreeMap<_, _>>>()
            })
            .transpose()
            .map_err(err)?;
        let inner = WeightedGraph::build(&edges, coords.as_ref()).map_err(err)?;
        Ok(Graph { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (edges_path, coords_path=None))]
    fn from_files(edges_path: PathBuf, coords_path: Option<PathBuf>) -> PyResult<Self> {
        let inner = io::load_graph(&edges_path, coords_path.as_deref()).map_err(err)?;
        Ok(Graph { inner })
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// External id of each internal node index.
    fn node_ids(&self) -> Vec<u64> {
        self.inner.external_ids().to_vec()
    }

    fn index_of(&self, id: u64) -> Option<usize> {
        self.inner.index_of(id)
    }

    /// Dense Laplacian as a list of rows.
    fn laplacian(&self) -> Vec<Vec<f64>> {
        let l = self.inner.laplacian();
        (0..l.dim())
            .map(|i| (0..l.dim()).map(|j| l.get(i, j)).collect())
            .collect()
    }

    #[pyo3(signature = (lambda_tol=DEFAULT_LAMBDA_REL_TOL))]
    fn spectrum(&self, py: Python<'_>, lambda_tol: f64) -> PyResult<Spectrum> {
        let l = self.inner.laplacian();
        let inner = py.detach(|| eigendecompose(&l, lambda_tol)).map_err(err)?;
        Ok(Spectrum { inner })
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.node_count(), self.inner.edge_count())
    }
}

#[pyclass(frozen)]
struct Spectrum {
    inner: SpectralBasis,
}

#[pymethods]
impl Spectrum {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    fn eigenvector(&self, j: usize) -> PyResult<Vec<f64>> {
        check_index(j, self.inner.dim())?;
        Ok(self.inner.eigenvector(j).to_vec())
    }

    /// Groups of indices sharing an eigenvalue within tolerance.
    fn multiplicity_groups(&self) -> Vec<Vec<usize>> {
        self.inner.multiplicity_groups().to_vec()
    }

    /// Coefficients `phi_j^T f` for every `j`.
    fn projection(&self, f: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.projection(&f).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(n={})", self.inner.dim())
    }
}

#[pyclass(frozen)]
struct Design {
    inner: GraphicalDesign,
    j: IndexSet,
    k: usize,
}

#[pymethods]
impl Design {
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn support(&self) -> Vec<usize> {
        self.inner.support().to_vec()
    }

    #[getter]
    fn objective_value(&self) -> f64 {
        self.inner.objective_value()
    }

    /// The exactly averaged index set.
    #[getter(J)]
    fn j(&self) -> Vec<usize> {
        self.j.as_slice().to_vec()
    }

    #[getter]
    fn k(&self) -> usize {
        self.k
    }

    fn __repr__(&self) -> String {
        format!(
            "Design(|J|={}, |S|={}, objective={})",
            self.j.len(),
            self.inner.support().len(),
            self.inner.objective_value()
        )
    }
}

fn check_index(j: usize, n: usize) -> PyResult<()> {
    if j >= n {
        return Err(GraphDesignError::new_err(format!(
            "index {j} out of range for dimension {n}"
        )));
    }
    Ok(())
}

fn index_set(j: Vec<usize>, n: usize) -> PyResult<IndexSet> {
    IndexSet::new(j, n).map_err(err)
}

#[pyfunction]
fn select_j_frequency(spectrum: &Spectrum, k: usize) -> PyResult<Vec<usize>> {
    let sel = design::select_j_frequency(&spectrum.inner, k).map_err(err)?;
    Ok(sel.indices.as_slice().to_vec())
}

#[pyfunction]
fn select_j_projection(spectrum: &Spectrum, sample_mean: Vec<f64>, k: usize) -> PyResult<Vec<usize>> {
    let sel = design::select_j_projection(&spectrum.inner, &sample_mean, k).map_err(err)?;
    Ok(sel.indices.as_slice().to_vec())
}

#[pyfunction]
#[pyo3(name = "cost_nonparametric")]
fn cost_nonparametric_py(spectrum: &Spectrum, j: Vec<usize>) -> PyResult<Vec<f64>> {
    let j = index_set(j, spectrum.inner.dim())?;
    design::cost_nonparametric(&spectrum.inner, &j).map_err(err)
}

#[pyfunction]
#[pyo3(name = "cost_parametric")]
fn cost_parametric_py(spectrum: &Spectrum, j: Vec<usize>, sample_mean: Vec<f64>) -> PyResult<Vec<f64>> {
    let j = index_set(j, spectrum.inner.dim())?;
    design::cost_parametric(&spectrum.inner, &j, &sample_mean).map_err(err)
}

/// Solves the design LP for an explicit `J` and cost vector. `k` defaults to `|J|`.
#[pyfunction]
#[pyo3(signature = (spectrum, j, cost, k=None, support_tol=DEFAULT_SUPPORT_TOL))]
fn solve_design(
    py: Python<'_>,
    spectrum: &Spectrum,
    j: Vec<usize>,
    cost: Vec<f64>,
    k: Option<usize>,
    support_tol: f64,
) -> PyResult<Design> {
    let j = index_set(j, spectrum.inner.dim())?;
    let k = k.unwrap_or(j.len());
    let problem = DesignProblem::new(j.clone(), cost, k, None, Objective::File("python".into())).map_err(err)?;
    let inner = py
        .detach(|| {
            let lp = lp::build_lp(&spectrum.inner, &problem)?;
            lp::solve_basic(&lp, &SimplexOptions::default(), support_tol)
        })
        .map_err(err)?;
    Ok(Design { inner, j, k })
}

/// Selects `J`, builds the cost and solves, for sparsity target `k`.
#[pyfunction]
#[pyo3(name = "design", signature = (spectrum, k, strategy="freq", objective="nonparam", sample_mean=None, cost=None, support_tol=DEFAULT_SUPPORT_TOL))]
#[allow(clippy::too_many_arguments)]
fn design_py(
    py: Python<'_>,
    spectrum: &Spectrum,
    k: usize,
    strategy: &str,
    objective: &str,
    sample_mean: Option<Vec<f64>>,
    cost: Option<Vec<f64>>,
    support_tol: f64,
) -> PyResult<Design> {
    let strategy: JStrategy = strategy.parse().map_err(err)?;
    let objective: Objective = match (objective, &cost) {
        ("custom", Some(_)) => Objective::File("python".into()),
        _ => objective.parse().map_err(err)?,
    };
    let mut spec = DesignSpec::new(strategy, objective);
    spec.sample_mean = sample_mean.as_deref();
    spec.custom_cost = cost.as_deref();
    spec.support_tol = support_tol;
    let run = py.detach(|| design_for_k(&spectrum.inner, k, &spec)).map_err(err)?;
    Ok(Design {
        inner: run.design,
        j: run.problem.j().clone(),
        k,
    })
}

#[pyfunction]
fn percent_error(design: &Design, f: Vec<f64>) -> PyResult<f64> {
    evaluate::percent_error(&design.inner, &f).map_err(err)
}

#[pyfunction]
fn design_value(design: &Design, f: Vec<f64>) -> PyResult<f64> {
    evaluate::design_value(&design.inner, &f).map_err(err)
}

/// `(j, residual)` for every `j` in the design's `J`.
#[pyfunction]
fn averaging_residuals(design: &Design, spectrum: &Spectrum) -> PyResult<Vec<(usize, f64)>> {
    evaluate::averaging_residuals(&design.inner, &spectrum.inner, &design.j).map_err(err)
}

#[pyfunction]
fn bound_parametric(design: &Design, spectrum: &Spectrum, f: Vec<f64>) -> PyResult<f64> {
    evaluate::bound_parametric(&design.inner, &spectrum.inner, &design.j, &f).map_err(err)
}

#[pyfunction]
fn bound_nonparametric(design: &Design, spectrum: &Spectrum) -> PyResult<f64> {
    evaluate::bound_nonparametric(&design.inner, &spectrum.inner, &design.j).map_err(err)
}

#[pyfunction]
fn jbar_diagnostic(design: &Design, spectrum: &Spectrum) -> PyResult<f64> {
    evaluate::jbar_diagnostic(&design.inner, &spectrum.inner, &design.j).map_err(err)
}

/// Whether the design is feasible for the sparse design problem at its `k`.
#[pyfunction]
#[pyo3(signature = (design, spectrum, tol=1e-8))]
fn is_milp_feasible(design: &Design, spectrum: &Spectrum, tol: f64) -> bool {
    lp::check_milp_feasibility(&design.inner, &spectrum.inner, &design.j, design.k, tol).feasible
}

#[pymodule]
fn graphdesign_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GraphDesignError", m.py().get_type::<GraphDesignError>())?;
    m.add_class::<Graph>()?;
    m.add_class::<Spectrum>()?;
    m.add_class::<Design>()?;
    m.add_function(wrap_pyfunction!(select_j_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(select_j_projection, m)?)?;
    m.add_function(wrap_pyfunction!(cost_nonparametric_py, m)?)?;
    m.add_function(wrap_pyfunction!(cost_parametric_py, m)?)?;
    m.add_function(wrap_pyfunction!(solve_design, m)?)?;
    m.add_function(wrap_pyfunction!(design_py, m)?)?;
    m.add_function(wrap_pyfunction!(percent_error, m)?)?;
    m.add_function(wrap_pyfunction!(design_value, m)?)?;
    m.add_function(wrap_pyfunction!(averaging_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(bound_parametric, m)?)?;
    m.add_function(wrap_pyfunction!(bound_nonparametric, m)?)?;
    m.add_function(wrap_pyfunction!(jbar_diagnostic, m)?)?;
    m.add_function(wrap_pyfunction!(is_milp_feasible, m)?)?;
    Ok(())
}
