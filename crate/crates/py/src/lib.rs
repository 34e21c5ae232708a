//! Python bindings.

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use privmeasure::haar::{partial_sums, potential_gap as gap, sample_noise};
use privmeasure::interval::{private_measure_interval as interval_mechanism, project_weights as project};
use privmeasure::measure::tv_distance as tv;
use privmeasure::metric::{choose_delta as delta_for, private_measure_metric as metric_mechanism, SpaceKind};
use privmeasure::synth::dp_synthetic_data;
use privmeasure::transport::wasserstein1_exact;
use privmeasure::{Dataset, Domain, Error, FiniteMetricSpace, HaarSystem, Metric, RandomStream, WeightedMeasure};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io { .. } => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn parse_metric(name: &str) -> PyResult<Metric> {
    match name {
        "chebyshev" => Ok(Metric::Chebyshev),
        "euclidean" => Ok(Metric::Euclidean),
        "manhattan" => Ok(Metric::Manhattan),
        other => Err(PyValueError::new_err(format!("unknown metric {other:?}"))),
    }
}

fn flatten(points: &[Vec<f64>]) -> PyResult<(usize, Vec<f64>)> {
    let dim = points.first().map_or(0, Vec::len);
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(PyValueError::new_err("points must be non-empty rows of equal length"));
    }
    Ok((dim, points.concat()))
}

/// A finite metric space given by coordinates or a distance matrix.
#[pyclass(name = "MetricSpace", module = "privmeasure_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMetricSpace {
    inner: Arc<FiniteMetricSpace>,
}

#[pymethods]
impl PyMetricSpace {
    /// Points of the real line with the absolute-value distance.
    #[staticmethod]
    fn line(coords: Vec<f64>) -> PyResult<Self> {
        let inner = FiniteMetricSpace::line(coords).map_err(to_py)?;
        Ok(PyMetricSpace { inner: Arc::new(inner) })
    }

    #[staticmethod]
    #[pyo3(signature = (points, metric = "chebyshev"))]
    fn points(points: Vec<Vec<f64>>, metric: &str) -> PyResult<Self> {
        let (dim, coords) = flatten(&points)?;
        let inner = FiniteMetricSpace::with_coords(dim, coords, parse_metric(metric)?).map_err(to_py)?;
        Ok(PyMetricSpace { inner: Arc::new(inner) })
    }

    #[staticmethod]
    fn from_matrix(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("distance matrix must be square"));
        }
        let inner = FiniteMetricSpace::from_matrix(n, matrix.concat()).map_err(to_py)?;
        Ok(PyMetricSpace { inner: Arc::new(inner) })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn diam(&self) -> f64 {
        self.inner.diam()
    }

    #[getter]
    fn dim(&self) -> Option<usize> {
        self.inner.dim()
    }

    fn dist(&self, i: usize, j: usize) -> PyResult<f64> {
        if i >= self.inner.len() || j >= self.inner.len() {
            return Err(PyValueError::new_err("point index out of range"));
        }
        Ok(self.inner.dist(i, j))
    }

    fn coord(&self, i: usize) -> Option<Vec<f64>> {
        self.inner.coord(i).map(<[f64]>::to_vec)
    }

    fn __repr__(&self) -> String {
        format!("MetricSpace(len={}, diam={})", self.inner.len(), self.inner.diam())
    }
}

/// A finitely supported measure on a `MetricSpace`.
#[pyclass(name = "Measure", module = "privmeasure_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMeasure {
    inner: WeightedMeasure,
}

#[pymethods]
impl PyMeasure {
    /// Dense weights, one per point of the space.
    #[new]
    fn new(space: &PyMetricSpace, weights: Vec<f64>) -> PyResult<Self> {
        let inner = WeightedMeasure::from_dense(Arc::clone(&space.inner), weights).map_err(to_py)?;
        Ok(PyMeasure { inner })
    }

    /// Uniform measure on a multiset of point indices.
    #[staticmethod]
    fn empirical(space: &PyMetricSpace, points: Vec<usize>) -> PyResult<Self> {
        let inner = WeightedMeasure::empirical(Arc::clone(&space.inner), &points).map_err(to_py)?;
        Ok(PyMeasure { inner })
    }

    #[getter]
    fn space(&self) -> PyMetricSpace {
        PyMetricSpace {
            inner: Arc::clone(self.inner.space()),
        }
    }

    #[getter]
    fn support(&self) -> Vec<usize> {
        self.inner.support().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn dense(&self) -> Vec<f64> {
        self.inner.dense()
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn is_probability(&self) -> bool {
        self.inner.is_probability()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Measure(atoms={}, mass={})", self.inner.len(), self.inner.total_mass())
    }
}

/// Exact Wasserstein-1 distance between two measures on the same space.
#[pyfunction]
fn wasserstein1(a: &PyMeasure, b: &PyMeasure) -> PyResult<f64> {
    wasserstein1_exact(&a.inner, &b.inner).map_err(to_py)
}

#[pyfunction]
fn tv_distance(a: &PyMeasure, b: &PyMeasure) -> PyResult<f64> {
    tv(&a.inner, &b.inner).map_err(to_py)
}

/// Private measure for a measure on `[0, 1]`; returns a measure on an
/// extension of the input space.
#[pyfunction]
#[pyo3(signature = (measure, alpha, seed = 0))]
fn private_measure_interval(measure: &PyMeasure, alpha: f64, seed: u64) -> PyResult<PyMeasure> {
    let r = interval_mechanism(&measure.inner, alpha, &mut RandomStream::new(seed)).map_err(to_py)?;
    Ok(PyMeasure { inner: r.output })
}

/// Private measure on a general finite space. Returns the output and a dict
/// of diagnostics.
#[pyfunction]
#[pyo3(signature = (measure, alpha, delta = None, seed = 0))]
fn private_measure_metric<'py>(
    py: Python<'py>,
    measure: &PyMeasure,
    alpha: f64,
    delta: Option<f64>,
    seed: u64,
) -> PyResult<(PyMeasure, Bound<'py, PyDict>)> {
    let delta = match delta {
        Some(d) => d,
        None => delta_for(SpaceKind::Generic(measure.inner.space()), alpha).map_err(to_py)?,
    };
    let r = metric_mechanism(&measure.inner, alpha, delta, &mut RandomStream::new(seed)).map_err(to_py)?;
    let d = &r.diagnostics;
    let info = PyDict::new(py);
    info.set_item("alpha", d.alpha)?;
    info.set_item("delta", d.delta)?;
    info.set_item("net_size", d.net_size)?;
    info.set_item("mst_length", d.mst_length)?;
    info.set_item("tour_length", d.tour_length)?;
    info.set_item("accuracy_bound", d.accuracy_bound)?;
    Ok((PyMeasure { inner: r.output }, info))
}

/// Differentially private synthetic points for a dataset of points in
/// `[0,1]^d`. `domain` is "interval", "cube" or "generic". Returns the
/// synthetic points and a provenance dict.
#[pyfunction]
#[pyo3(signature = (points, epsilon, domain = None, delta = None, seed = 0, metric = "chebyshev"))]
fn synthesize<'py>(
    py: Python<'py>,
    points: Vec<Vec<f64>>,
    epsilon: f64,
    domain: Option<&str>,
    delta: Option<f64>,
    seed: u64,
    metric: &str,
) -> PyResult<(Vec<Vec<f64>>, Bound<'py, PyDict>)> {
    let (dim, coords) = flatten(&points)?;
    if coords.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(PyValueError::new_err("coordinates must lie in [0, 1]"));
    }
    let domain = match domain {
        None if dim == 1 => Domain::Interval,
        None | Some("cube") => Domain::Cube { dim },
        Some("interval") => Domain::Interval,
        Some("generic") => Domain::Generic,
        Some(other) => return Err(PyValueError::new_err(format!("unknown domain {other:?}"))),
    };
    let space = FiniteMetricSpace::with_coords(dim, coords, parse_metric(metric)?).map_err(to_py)?;
    let data = Dataset::new(Arc::new(space), (0..points.len()).collect()).map_err(to_py)?;
    let out = dp_synthetic_data(&data, domain, epsilon, delta, &mut RandomStream::new(seed)).map_err(to_py)?;
    let rows = out
        .points
        .iter()
        .map(|&p| out.space.coord(p).expect("coordinate space").to_vec())
        .collect();
    let info = PyDict::new(py);
    if let Some(p) = &out.provenance {
        info.set_item("epsilon", p.epsilon)?;
        info.set_item("n", p.n)?;
        info.set_item("alpha", p.alpha)?;
        info.set_item("delta", p.delta)?;
        info.set_item("m", p.m)?;
        info.set_item("net_size", p.net_size)?;
        info.set_item("tour_length", p.tour_length)?;
        info.set_item("accuracy_bound", p.accuracy_bound)?;
        info.set_item("seed", seed)?;
    }
    Ok((rows, info))
}

/// Net resolution for a privacy level: kind is "interval" or "cube".
#[pyfunction]
#[pyo3(signature = (kind, alpha, dim = 1))]
fn choose_delta(kind: &str, alpha: f64, dim: usize) -> PyResult<f64> {
    let kind = match kind {
        "interval" => SpaceKind::Interval,
        "cube" => SpaceKind::Cube { dim },
        other => return Err(PyValueError::new_err(format!("unknown kind {other:?}"))),
    };
    delta_for(kind, alpha).map_err(to_py)
}

/// Haar coefficients of a vector whose length is a power of two.
#[pyfunction]
fn haar_decompose(x: Vec<f64>) -> PyResult<Vec<f64>> {
    let h = HaarSystem::covering(x.len()).map_err(to_py)?;
    if h.len() != x.len() {
        return Err(PyValueError::new_err("length must be a power of two"));
    }
    h.decompose(&x).map_err(to_py)
}

#[pyfunction]
fn haar_synthesize(coeffs: Vec<f64>) -> PyResult<Vec<f64>> {
    let h = HaarSystem::covering(coeffs.len()).map_err(to_py)?;
    if h.len() != coeffs.len() {
        return Err(PyValueError::new_err("length must be a power of two"));
    }
    h.synthesize(&coeffs).map_err(to_py)
}

/// Difference of the walk's log-density potential between `y` and `x`.
#[pyfunction]
fn potential_gap(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    let h = HaarSystem::covering(x.len()).map_err(to_py)?;
    gap(&x, &y, &h).map_err(to_py)
}

/// Partial sums of one superregular walk of length `2^depth`.
#[pyfunction]
#[pyo3(signature = (depth, alpha = 2.0, seed = 0))]
fn sample_walk(depth: u32, alpha: f64, seed: u64) -> PyResult<Vec<f64>> {
    let noise = sample_noise(depth, alpha, &mut RandomStream::new(seed)).map_err(to_py)?;
    Ok(partial_sums(&noise))
}

/// Probability weights on sorted `positions` closest to `signed` in the
/// CDF-L1 sense.
#[pyfunction]
fn project_weights(positions: Vec<f64>, signed: Vec<f64>) -> PyResult<Vec<f64>> {
    if positions.is_empty() || positions.len() != signed.len() {
        return Err(PyValueError::new_err("positions and weights must be non-empty and equally long"));
    }
    if positions.windows(2).any(|w| w[0] > w[1]) {
        return Err(PyValueError::new_err("positions must be sorted"));
    }
    Ok(project(&positions, &signed))
}

#[pymodule]
fn privmeasure_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetricSpace>()?;
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(wasserstein1, m)?)?;
    m.add_function(wrap_pyfunction!(tv_distance, m)?)?;
    m.add_function(wrap_pyfunction!(private_measure_interval, m)?)?;
    m.add_function(wrap_pyfunction!(private_measure_metric, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(choose_delta, m)?)?;
    m.add_function(wrap_pyfunction!(haar_decompose, m)?)?;
    m.add_function(wrap_pyfunction!(haar_synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(potential_gap, m)?)?;
    m.add_function(wrap_pyfunction!(sample_walk, m)?)?;
    m.add_function(wrap_pyfunction!(project_weights, m)?)?;
    Ok(())
}
