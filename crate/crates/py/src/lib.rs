//! Python bindings: permutations, model sampling, exact tables and the
//! statistics used to check the limit laws.

use num_bigint::BigUint;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use surf::experiment::{run_samples, sample_instance};
use surf::rng::{substream, DEFAULT_SEED};
use surf::stats::{empirical_moments, finite_size_targets};
use surf::{ExperimentPlan, ModelKind};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Permutation of `0..n`, stored by images.
#[pyclass(name = "Permutation", eq, frozen, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPermutation(surf::Permutation);

#[pymethods]
impl PyPermutation {
    #[new]
    fn new(images: Vec<usize>) -> PyResult<Self> {
        surf::Permutation::from_images(images)
            .map(PyPermutation)
            .map_err(value_error)
    }

    /// Parses 1-based cycle notation such as `"(1 2 3)(5 6)"`.
    #[staticmethod]
    fn from_cycles(n: usize, text: &str) -> PyResult<Self> {
        surf::Permutation::from_cycle_notation(n, text)
            .map(PyPermutation)
            .map_err(value_error)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        PyPermutation(surf::Permutation::identity(n))
    }

    /// Uniform random permutation, reproducible from `(seed, index)`.
    #[staticmethod]
    #[pyo3(signature = (n, seed=DEFAULT_SEED, index=0))]
    fn random(n: usize, seed: u64, index: u64) -> Self {
        PyPermutation(surf::perm::sample_uniform_permutation(
            n,
            &mut substream(seed, index),
        ))
    }

    /// Uniform fixed-point-free involution of `0..n`.
    #[staticmethod]
    #[pyo3(signature = (n, seed=DEFAULT_SEED, index=0))]
    fn random_matching(n: usize, seed: u64, index: u64) -> PyResult<Self> {
        let matching =
            surf::perm::sample_matching(n, &mut substream(seed, index)).map_err(value_error)?;
        Ok(PyPermutation(matching.to_permutation()))
    }

    /// `self ∘ other`: apply `other` first.
    fn compose(&self, other: &PyPermutation) -> PyResult<Self> {
        self.0
            .compose(&other.0)
            .map(PyPermutation)
            .map_err(value_error)
    }

    fn inverse(&self) -> Self {
        PyPermutation(self.0.inverse())
    }

    fn sign(&self) -> i8 {
        self.0.sign()
    }

    fn cycle_count(&self) -> usize {
        self.0.cycle_count()
    }

    /// Cycles as 0-based lists, each starting at its smallest element.
    fn cycles(&self) -> Vec<Vec<usize>> {
        self.0.cycles().cycles().to_vec()
    }

    /// Cycle counts `(B, I)`: cycles whose minimum is below `split`, and the rest.
    fn split_cycles(&self, split: usize) -> PyResult<(usize, usize)> {
        self.0.min_indicator_process(split).map_err(value_error)
    }

    fn images(&self) -> Vec<usize> {
        self.0.images().to_vec()
    }

    fn __call__(&self, k: usize) -> PyResult<usize> {
        if k < self.0.len() {
            Ok(self.0.image(k))
        } else {
            Err(value_error(format!("{k} is outside 0..{}", self.0.len())))
        }
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Permutation.from_cycles({}, \"{}\")", self.0.len(), self.0)
    }
}

/// Topological summary of one sampled surface.
#[pyclass(name = "SurfaceSummary", eq, frozen, get_all, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PySummary {
    b: usize,
    i: usize,
    genus: usize,
    chi: i64,
    components: usize,
    connected: bool,
    faces: i64,
    edges: i64,
    vertices: i64,
}

impl From<surf::SurfaceSummary> for PySummary {
    fn from(s: surf::SurfaceSummary) -> Self {
        PySummary {
            b: s.b,
            i: s.i,
            genus: s.genus,
            chi: s.chi,
            components: s.components,
            connected: s.connected,
            faces: s.faces,
            edges: s.edges,
            vertices: s.vertices,
        }
    }
}

#[pymethods]
impl PySummary {
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        d.set_item("B", self.b)?;
        d.set_item("I", self.i)?;
        d.set_item("genus", self.genus)?;
        d.set_item("chi", self.chi)?;
        d.set_item("components", self.components)?;
        d.set_item("connected", self.connected)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "SurfaceSummary(B={}, I={}, genus={}, chi={}, components={}, connected={})",
            self.b,
            self.i,
            self.genus,
            self.chi,
            self.components,
            if self.connected { "True" } else { "False" }
        )
    }
}

type InstanceParts = (
    PySummary,
    PyPermutation,
    PyPermutation,
    Option<PyPermutation>,
);

/// `(B, genus, connected, numerator, denominator)`.
type ExactRow = (usize, usize, bool, u64, u64);

/// A validated gluing model: `model` is one of `t`, `tprime`, `s`, `sprime`.
#[pyclass(name = "Model", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel(surf::ModelParams);

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (model, n, m=0, t=3))]
    fn new(model: &str, n: usize, m: usize, t: usize) -> PyResult<Self> {
        let kind: ModelKind = model.parse().map_err(value_error)?;
        surf::ModelParams::new(kind, n, m, t)
            .map(PyModel)
            .map_err(value_error)
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    #[getter]
    fn t(&self) -> usize {
        self.0.t()
    }

    /// Sample `index` of the run seeded by `seed`, with the rotation over all
    /// sides, the matching of the matched darts, and `γ` (primed models
    /// only, else `None`).
    #[pyo3(signature = (seed=DEFAULT_SEED, index=0))]
    fn instance(&self, seed: u64, index: u64) -> PyResult<InstanceParts> {
        let inst = sample_instance(self.0, seed, index).map_err(value_error)?;
        let gamma = inst.gamma().ok().map(PyPermutation);
        Ok((
            inst.summarize().into(),
            PyPermutation(inst.rotation().clone()),
            PyPermutation(inst.matching().to_permutation()),
            gamma,
        ))
    }

    /// Samples `0..samples` of the run; the result does not depend on `threads`.
    #[pyo3(signature = (samples, seed=DEFAULT_SEED, threads=None))]
    fn sample(
        &self,
        py: Python<'_>,
        samples: usize,
        seed: u64,
        threads: Option<usize>,
    ) -> PyResult<Vec<PySummary>> {
        let params = self.0;
        let out = py
            .detach(|| run_samples(params, seed, samples, threads))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        Ok(out.into_iter().map(PySummary::from).collect())
    }

    /// Exact joint law as rows `(B, genus, connected, numerator, denominator)`.
    fn exact(&self, py: Python<'_>) -> PyResult<Vec<ExactRow>> {
        let params = self.0;
        let dist = py
            .detach(|| surf::exact_joint(&params))
            .map_err(value_error)?;
        Ok(dist
            .probabilities()
            .into_iter()
            .map(|(o, p)| (o.b, o.genus, o.connected, *p.numer(), *p.denom()))
            .collect())
    }

    /// Finite-size reference moments (primed models only).
    #[pyo3(signature = (samples=2))]
    fn targets<'py>(&self, py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyDict>> {
        let plan = ExperimentPlan::new(self.0, samples, DEFAULT_SEED).map_err(value_error)?;
        let t = finite_size_targets(&plan).map_err(value_error)?;
        let d = PyDict::new(py);
        d.set_item("mean_B", t.mean_b)?;
        d.set_item("var_B", t.var_b)?;
        d.set_item("mean_genus", t.mean_genus)?;
        d.set_item("var_genus", t.var_genus)?;
        d.set_item("corr", t.corr)?;
        d.set_item("r", plan.r())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(\"{}\", n={}, m={}, t={})",
            self.0.kind(),
            self.0.n(),
            self.0.m(),
            self.0.t()
        )
    }
}

/// Unsigned Stirling numbers of the first kind `[m b]` for `b = 1..m`.
#[pyfunction]
fn stirling_first(m: usize) -> PyResult<Vec<BigUint>> {
    Ok(surf::stirling_first(m)
        .map_err(value_error)?
        .values()
        .to_vec())
}

/// Sample moments of `(B, genus)` pairs.
#[pyfunction]
fn moments<'py>(py: Python<'py>, pairs: Vec<(i64, i64)>) -> PyResult<Bound<'py, PyDict>> {
    let r = empirical_moments(pairs).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("samples", r.samples)?;
    d.set_item("mean_B", r.mean_b)?;
    d.set_item("var_B", r.var_b)?;
    d.set_item("mean_genus", r.mean_genus)?;
    d.set_item("var_genus", r.var_genus)?;
    d.set_item("corr", r.corr)?;
    d.set_item("se_mean_B", r.se_mean_b)?;
    d.set_item("se_mean_genus", r.se_mean_genus)?;
    d.set_item("se_corr", r.se_corr)?;
    Ok(d)
}

/// Runs one acceptance criterion (or all) and returns `(id, passed, detail)` rows.
#[pyfunction]
#[pyo3(signature = (only=None))]
fn verify(py: Python<'_>, only: Option<String>) -> PyResult<Vec<(String, bool, String)>> {
    let verdicts = py
        .detach(|| surf::verify::run_suite(only.as_deref()))
        .ok_or_else(|| value_error("unknown criterion"))?;
    Ok(verdicts
        .into_iter()
        .map(|v| (v.id.to_string(), v.passed, v.detail))
        .collect())
}

#[pymodule(name = "randsurf")]
mod randsurf_py {
    #[pymodule_export]
    use super::{moments, stirling_first, verify, PyModel, PyPermutation, PySummary};

    #[pymodule_export]
    const DEFAULT_SEED: u64 = surf::rng::DEFAULT_SEED;
}
