//! Python bindings for `rfselect`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rfselect::optimizer::{greedy_lazy, greedy_naive, SelectionResult};
use rfselect::ped::{self, DescriptorSet, ReceptiveField};
use rfselect::synth::{self, DemoParams};
use rfselect::{candidates, CenterBias, GroupIndex, Objective, ObjectiveParams, Rect, SimilarityGraph};

fn err(e: rfselect::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Symmetric nonnegative similarity graph built from a dense matrix.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: SimilarityGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(PyGraph { inner: SimilarityGraph::from_rows(&rows).map_err(err)? })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn total(&self) -> f64 {
        self.inner.total()
    }

    fn row_sums(&self) -> Vec<f64> {
        self.inner.row_sums().to_vec()
    }

    fn weight(&self, i: usize, j: usize) -> PyResult<f64> {
        let m = self.inner.size();
        if i >= m || j >= m {
            return Err(err(rfselect::Error::IndexOutOfRange { index: i.max(j), len: m }));
        }
        Ok(self.inner.weight(i, j))
    }

    fn __repr__(&self) -> String {
        format!("Graph(size={})", self.inner.size())
    }
}

/// Selection objective over a graph, with optional image groups and center bias.
#[pyclass(name = "Objective", frozen)]
struct PyObjective {
    graph: SimilarityGraph,
    groups: GroupIndex,
    bias: CenterBias,
    params: ObjectiveParams,
}

impl PyObjective {
    fn objective(&self) -> PyResult<Objective<'_>> {
        Objective::new(&self.graph, &self.groups, &self.bias, self.params).map_err(err)
    }
}

fn selection_dict<'py>(py: Python<'py>, r: &SelectionResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("chosen", r.chosen.clone())?;
    d.set_item("gains", r.gains.clone())?;
    d.set_item("objective_trace", r.objective_trace.clone())?;
    d.set_item("evaluations", r.evaluations)?;
    Ok(d)
}

#[pymethods]
impl PyObjective {
    #[new]
    #[pyo3(signature = (graph, groups=None, bias=None, tau=2.0, lambda1=100.0, lambda2=0.0))]
    fn new(
        graph: &PyGraph,
        groups: Option<Vec<usize>>,
        bias: Option<Vec<f64>>,
        tau: f64,
        lambda1: f64,
        lambda2: f64,
    ) -> PyResult<Self> {
        let m = graph.inner.size();
        let groups = match groups {
            Some(g) => GroupIndex::new(g).map_err(err)?,
            None => GroupIndex::singletons(m),
        };
        let bias = match bias {
            Some(q) => CenterBias::new(q).map_err(err)?,
            None => CenterBias::zeros(m),
        };
        let obj = PyObjective {
            graph: graph.inner.clone(),
            groups,
            bias,
            params: ObjectiveParams::new(tau, lambda1, lambda2).map_err(err)?,
        };
        obj.objective()?;
        Ok(obj)
    }

    /// Objective value of a candidate set.
    fn evaluate(&self, selected: Vec<usize>) -> PyResult<f64> {
        self.objective()?.evaluate(&selected).map_err(err)
    }

    /// Gain from adding `a` to `selected`.
    fn marginal_gain(&self, selected: Vec<usize>, a: usize) -> PyResult<f64> {
        let obj = self.objective()?;
        let state = obj.state_for(&selected).map_err(err)?;
        obj.marginal_gain(&state, a).map_err(err)
    }

    #[pyo3(signature = (k, lazy=true))]
    fn greedy<'py>(&self, py: Python<'py>, k: usize, lazy: bool) -> PyResult<Bound<'py, PyDict>> {
        let obj = self.objective()?;
        let r = if lazy { greedy_lazy(&obj, k) } else { greedy_naive(&obj, k) }.map_err(err)?;
        selection_dict(py, &r)
    }
}

fn descriptor_set(vectors: &[Vec<f64>], dim: usize) -> PyResult<DescriptorSet> {
    if vectors.is_empty() {
        Ok(DescriptorSet::empty(dim))
    } else {
        DescriptorSet::from_vectors(vectors).map_err(err)
    }
}

fn common_dim(sets: &[&[Vec<f64>]]) -> usize {
    sets.iter().flat_map(|s| s.first()).map(Vec::len).next().unwrap_or(1)
}

#[pyfunction]
#[pyo3(signature = (x, y, d_empty=ped::DEFAULT_EMPTY_PENALTY))]
fn set_distance(x: Vec<Vec<f64>>, y: Vec<Vec<f64>>, d_empty: f64) -> PyResult<f64> {
    let dim = common_dim(&[&x, &y]);
    ped::set_distance(&descriptor_set(&x, dim)?, &descriptor_set(&y, dim)?, d_empty).map_err(err)
}

fn field(cells: &[Vec<Vec<f64>>], dim: usize) -> PyResult<ReceptiveField> {
    let sets = cells.iter().map(|c| descriptor_set(c, dim)).collect::<PyResult<Vec<_>>>()?;
    ReceptiveField::new(Rect { x0: 0, y0: 0, w: 0, h: 0 }, sets).map_err(err)
}

/// Pyramid distance between two fields given as 29 cells of descriptor lists.
#[pyfunction]
#[pyo3(signature = (a, b, d_empty=ped::DEFAULT_EMPTY_PENALTY))]
fn ped_distance(a: Vec<Vec<Vec<f64>>>, b: Vec<Vec<Vec<f64>>>, d_empty: f64) -> PyResult<f64> {
    let all: Vec<&[Vec<f64>]> = a.iter().chain(&b).map(Vec::as_slice).collect();
    let dim = common_dim(&all);
    ped::ped(&field(&a, dim)?, &field(&b, dim)?, d_empty).map_err(err)
}

/// Candidate windows `(x0, y0, w, h)` for an image.
#[pyfunction]
fn make_templates(width: u32, height: u32) -> PyResult<Vec<(u32, u32, u32, u32)>> {
    let rects = candidates::make_templates(width, height).map_err(err)?;
    Ok(rects.into_iter().map(|r| (r.x0, r.y0, r.w, r.h)).collect())
}

type Labeled = (Vec<(f64, f64)>, Vec<usize>);

/// Three Gaussian clusters: returns `(points, cluster_of_point)`.
#[pyfunction]
#[pyo3(signature = (seed=synth::DEFAULT_SEED, per_cluster=synth::DEFAULT_PER_CLUSTER, std=synth::DEFAULT_STD))]
fn synth_points(seed: u64, per_cluster: usize, std: f64) -> PyResult<Labeled> {
    let inst = synth::generate(seed, per_cluster, std).map_err(err)?;
    Ok((inst.points.clone(), inst.clusters.as_slice().to_vec()))
}

#[pyfunction]
#[pyo3(signature = (seed=synth::DEFAULT_SEED, per_cluster=synth::DEFAULT_PER_CLUSTER, std=synth::DEFAULT_STD, k=6, tau=2.0, lambda1=2.0, sigma=ped::DEFAULT_SIGMA))]
#[allow(clippy::too_many_arguments)]
fn run_demo<'py>(
    py: Python<'py>,
    seed: u64,
    per_cluster: usize,
    std: f64,
    k: usize,
    tau: f64,
    lambda1: f64,
    sigma: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let inst = synth::generate(seed, per_cluster, std).map_err(err)?;
    let out = synth::run_demo(&inst, &DemoParams { k, tau, lambda1, sigma, gain_field: false }).map_err(err)?;
    selection_dict(py, &out.selection)
}

#[pymodule]
fn rfselect_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyObjective>()?;
    m.add_function(wrap_pyfunction!(set_distance, m)?)?;
    m.add_function(wrap_pyfunction!(ped_distance, m)?)?;
    m.add_function(wrap_pyfunction!(make_templates, m)?)?;
    m.add_function(wrap_pyfunction!(synth_points, m)?)?;
    m.add_function(wrap_pyfunction!(run_demo, m)?)?;
    Ok(())
}
