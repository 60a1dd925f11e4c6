//! Python bindings. Structured results (certificates, classifications,
//! pressure tables) cross the boundary as JSON strings.

use cocycles::domination::{
    domination_decide, find_invariant_unstable_multicone, DominationBudget, DominationVerdict, MulticoneCertificate,
    UnstableSearch,
};
use cocycles::linalg::Mat2;
use cocycles::semigroup::{kappa_estimate, MatrixTuple, Word, DEFAULT_CAP};
use cocycles::thermo::{equilibrium_classify, pressure_bounds};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json<T: Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(value_err)
}

fn budget(depth: usize, cap: usize) -> DominationBudget {
    DominationBudget {
        depth,
        cap,
        ..DominationBudget::default()
    }
}

/// An invertible real 2×2 matrix `[[a, b], [c, d]]`.
#[pyclass(name = "Mat2", frozen, from_py_object)]
#[derive(Clone)]
struct PyMat2(Mat2);

#[pymethods]
impl PyMat2 {
    #[new]
    fn new(a: f64, b: f64, c: f64, d: f64) -> PyResult<Self> {
        Mat2::new(a, b, c, d).map(PyMat2).map_err(value_err)
    }

    fn entries(&self) -> [f64; 4] {
        self.0.entries()
    }

    fn det(&self) -> f64 {
        self.0.det()
    }

    fn op_norm(&self) -> f64 {
        self.0.op_norm()
    }

    fn singular_values(&self) -> (f64, f64) {
        self.0.singular_values()
    }

    /// `"Conformal"`, `"Parabolic"` or `"Proximal"`.
    fn classify(&self) -> String {
        format!("{:?}", self.0.classify().class)
    }

    fn __mul__(&self, other: &PyMat2) -> PyMat2 {
        PyMat2(self.0 * other.0)
    }

    fn __repr__(&self) -> String {
        let [a, b, c, d] = self.0.entries();
        format!("Mat2({a}, {b}, {c}, {d})")
    }
}

/// A tuple of invertible matrices, given as row-major 4-lists.
#[pyclass(name = "MatrixTuple", frozen)]
struct PyMatrixTuple(MatrixTuple);

#[pymethods]
impl PyMatrixTuple {
    #[new]
    fn new(matrices: Vec<[f64; 4]>) -> PyResult<Self> {
        MatrixTuple::from_entries(&matrices).map(PyMatrixTuple).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __getitem__(&self, i: usize) -> PyResult<PyMat2> {
        self.0
            .matrices()
            .get(i)
            .map(|m| PyMat2(*m))
            .ok_or_else(|| pyo3::exceptions::PyIndexError::new_err(i))
    }

    /// The product `A_{w1} ⋯ A_{wn}` for a word such as `"1121"`.
    fn product(&self, word: &str) -> PyResult<PyMat2> {
        let w = Word::parse(word).map_err(value_err)?;
        if w.symbols().iter().any(|&s| s as usize >= self.0.len()) {
            return Err(PyValueError::new_err(format!("word {word} uses a symbol beyond {}", self.0.len())));
        }
        Ok(PyMat2(self.0.product_matrix(&w)))
    }
}

/// A multicone certificate, checkable against a tuple.
#[pyclass(name = "MulticoneCertificate", frozen)]
struct PyCertificate(MulticoneCertificate);

#[pymethods]
impl PyCertificate {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(PyCertificate).map_err(value_err)
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.0)
    }

    fn verify(&self, tuple: &PyMatrixTuple) -> bool {
        self.0.verify(&tuple.0)
    }

    /// Arcs as `(start, length)` pairs in radians.
    fn arcs(&self) -> Vec<(f64, f64)> {
        self.0.cone.arcs().iter().map(|a| (a.start().theta(), a.length())).collect()
    }

    #[getter]
    fn margin(&self) -> f64 {
        self.0.margin
    }

    #[getter]
    fn block_length(&self) -> usize {
        self.0.block_length
    }
}

/// Returns `(verdict, certificate)`, where the verdict is `"Dominated"`,
/// `"NotDominated"` or `"Inconclusive"`.
#[pyfunction]
#[pyo3(signature = (tuple, depth=12, cap=DEFAULT_CAP))]
fn dominated(tuple: &PyMatrixTuple, depth: usize, cap: usize) -> (String, Option<PyCertificate>) {
    let v = domination_decide(&tuple.0, &budget(depth, cap));
    let tag = v.tag().to_string();
    match v {
        DominationVerdict::Dominated(c) => (tag, Some(PyCertificate(c))),
        _ => (tag, None),
    }
}

#[pyfunction]
#[pyo3(signature = (tuple, depth=12, cap=DEFAULT_CAP))]
fn invariant_unstable_multicone(tuple: &PyMatrixTuple, depth: usize, cap: usize) -> Option<PyCertificate> {
    match find_invariant_unstable_multicone(&tuple.0, &budget(depth, cap)) {
        UnstableSearch::Found(c) => Some(PyCertificate(c)),
        UnstableSearch::NotFound(_) => None,
    }
}

/// `(kappa, depth)` from pairs of words up to `depth`.
#[pyfunction]
#[pyo3(signature = (tuple, depth=8, cap=DEFAULT_CAP))]
fn kappa(tuple: &PyMatrixTuple, depth: usize, cap: usize) -> PyResult<(f64, usize)> {
    let k = kappa_estimate(&tuple.0, depth, cap).map_err(value_err)?;
    Ok((k.kappa, k.depth))
}

/// `(lower, upper)` for the pressure of the norm potential at exponent `s`.
/// The lower bound uses a κ estimate at `kappa_depth` when given.
#[pyfunction]
#[pyo3(signature = (tuple, s, depth=12, kappa_depth=None, cap=DEFAULT_CAP))]
fn pressure(tuple: &PyMatrixTuple, s: f64, depth: usize, kappa_depth: Option<usize>, cap: usize) -> PyResult<(f64, f64)> {
    let k = kappa_depth.map(|d| kappa_estimate(&tuple.0, d, cap)).transpose().map_err(value_err)?;
    let b = pressure_bounds(&tuple.0, s, depth, k.as_ref(), cap).map_err(value_err)?;
    Ok((b.lower, b.upper))
}

/// The full pressure report as JSON.
#[pyfunction]
#[pyo3(signature = (tuple, s, depth=12, kappa_depth=None, cap=DEFAULT_CAP))]
fn pressure_json(tuple: &PyMatrixTuple, s: f64, depth: usize, kappa_depth: Option<usize>, cap: usize) -> PyResult<String> {
    let k = kappa_depth.map(|d| kappa_estimate(&tuple.0, d, cap)).transpose().map_err(value_err)?;
    json(&pressure_bounds(&tuple.0, s, depth, k.as_ref(), cap).map_err(value_err)?)
}

/// The equilibrium class name, e.g. `"HolderGibbs"`.
#[pyfunction]
#[pyo3(signature = (tuple, s=1.0, depth=12, cap=DEFAULT_CAP))]
fn classify(tuple: &PyMatrixTuple, s: f64, depth: usize, cap: usize) -> PyResult<String> {
    if !(s > 0.0) {
        return Err(PyValueError::new_err("s must be > 0"));
    }
    Ok(equilibrium_classify(&tuple.0, s, &budget(depth, cap)).class.name().to_string())
}

/// The full classification record as JSON.
#[pyfunction]
#[pyo3(signature = (tuple, s=1.0, depth=12, cap=DEFAULT_CAP))]
fn classify_json(tuple: &PyMatrixTuple, s: f64, depth: usize, cap: usize) -> PyResult<String> {
    if !(s > 0.0) {
        return Err(PyValueError::new_err("s must be > 0"));
    }
    json(&equilibrium_classify(&tuple.0, s, &budget(depth, cap)))
}

#[pymodule]
#[pyo3(name = "planar_cocycles")]
fn planar_cocycles_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMat2>()?;
    m.add_class::<PyMatrixTuple>()?;
    m.add_class::<PyCertificate>()?;
    m.add_function(wrap_pyfunction!(dominated, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_unstable_multicone, m)?)?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(pressure, m)?)?;
    m.add_function(wrap_pyfunction!(pressure_json, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classify_json, m)?)?;
    Ok(())
}
