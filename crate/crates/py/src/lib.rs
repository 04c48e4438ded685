//! Python bindings.
//!
//! Lengths and `opt` values cross the boundary as `int`, or `float("inf")`
//! when infinite. Orders are `int`, or `None` for the zero class.

use buchi_core::arith::{self, ExtOrder, Limits, PrimePowerModulus};
use buchi_core::formulas;
use buchi_core::polyspace::{is_square_poly_direct, QuadPoly};
use buchi_core::search::{self, F2Selection, Length, SearchOutcome, SearchTables, SweepOptions};
use buchi_core::verify::{self, GridPoint, GridSpec};
use buchi_core::Error;
use pyo3::exceptions::{PyOverflowError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::CapExceeded { .. } | Error::BudgetExceeded { .. } => PyOverflowError::new_err(e.to_string()),
        Error::Inconsistent(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn length_to_py(py: Python<'_>, l: Length) -> PyObject {
    match l {
        Length::Finite(n) => n.into_py(py),
        Length::Infinite => f64::INFINITY.into_py(py),
    }
}

fn order_to_py(t: ExtOrder) -> Option<u32> {
    t.finite()
}

fn modulus(p: u64, s: u32) -> PyResult<PrimePowerModulus> {
    PrimePowerModulus::with_cap(p, s, Limits::from_env().max_modulus).map_err(to_py_err)
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<PyObject> {
    Ok(py.import_bound("json")?.call_method1("loads", (text,))?.unbind())
}

fn outcome_to_py(py: Python<'_>, out: &SearchOutcome) -> PyResult<PyObject> {
    let d = PyDict::new_bound(py);
    d.set_item("length", length_to_py(py, out.length))?;
    d.set_item("opt", length_to_py(py, out.opt()))?;
    d.set_item("trivial_only", out.trivial_only)?;
    d.set_item("witness", out.witness.map(|w| w.coefficients()))?;
    Ok(d.into_any().unbind())
}

/// A validated odd prime power `p**s`.
#[pyclass(name = "Modulus", frozen, module = "buchi")]
struct PyModulus {
    inner: PrimePowerModulus,
}

#[pymethods]
impl PyModulus {
    #[new]
    fn new(p: u64, s: u32) -> PyResult<Self> {
        Ok(PyModulus { inner: modulus(p, s)? })
    }

    #[getter]
    fn p(&self) -> u64 {
        self.inner.p()
    }

    #[getter]
    fn s(&self) -> u32 {
        self.inner.s()
    }

    #[getter]
    fn modulus(&self) -> u64 {
        self.inner.modulus()
    }

    fn reduce(&self, x: i64) -> u64 {
        self.inner.reduce(x)
    }

    /// p-adic order of `x`, or `None` for the zero class.
    fn ord(&self, x: i64) -> Option<u32> {
        order_to_py(arith::padic_ord(self.inner.residue(x)))
    }

    /// `(t, g)` with `x = p**t * g` and `g` reported mod `p`.
    fn unit_part(&self, x: i64) -> (Option<u32>, u64) {
        let (t, g) = arith::unit_part(self.inner.residue(x));
        (order_to_py(t), g.value())
    }

    fn is_square(&self, x: i64) -> bool {
        arith::is_square_residue(self.inner.residue(x))
    }

    fn squares(&self) -> PyResult<Vec<u64>> {
        Ok(arith::square_table(self.inner, &Limits::from_env())
            .map_err(to_py_err)?
            .members())
    }

    fn __repr__(&self) -> String {
        format!("Modulus(p={}, s={})", self.inner.p(), self.inner.s())
    }
}

/// `f2*x**2 + f1*x + f0` modulo `p**s`.
#[pyclass(name = "QuadPoly", frozen, module = "buchi")]
struct PyQuadPoly {
    inner: QuadPoly,
}

#[pymethods]
impl PyQuadPoly {
    #[new]
    fn new(p: u64, s: u32, f2: i64, f1: i64, f0: i64) -> PyResult<Self> {
        Ok(PyQuadPoly {
            inner: QuadPoly::new(modulus(p, s)?, f2, f1, f0),
        })
    }

    #[getter]
    fn coefficients(&self) -> [u64; 3] {
        self.inner.coefficients()
    }

    fn eval(&self, x: i64) -> u64 {
        self.inner.eval(x).value()
    }

    fn buchi_length(&self, py: Python<'_>) -> PyResult<PyObject> {
        let squares = arith::square_table(self.inner.modulus(), &Limits::from_env()).map_err(to_py_err)?;
        let l = search::buchi_length(&self.inner, &squares).map_err(to_py_err)?;
        Ok(length_to_py(py, l))
    }

    fn is_square(&self) -> bool {
        is_square_poly_direct(&self.inner)
    }

    fn __repr__(&self) -> String {
        let [f2, f1, f0] = self.inner.coefficients();
        let m = self.inner.modulus();
        format!("QuadPoly(p={}, s={}, f2={f2}, f1={f1}, f0={f0})", m.p(), m.s())
    }
}

#[pyfunction]
fn is_square_residue(y: i64, p: u64, s: u32) -> PyResult<bool> {
    Ok(arith::is_square_residue(modulus(p, s)?.residue(y)))
}

#[pyfunction]
fn buchi_length(py: Python<'_>, p: u64, s: u32, f2: i64, f1: i64, f0: i64) -> PyResult<PyObject> {
    PyQuadPoly::new(p, s, f2, f1, f0)?.buchi_length(py)
}

#[pyfunction]
fn is_square_poly(p: u64, s: u32, f2: i64, f1: i64, f0: i64) -> PyResult<bool> {
    Ok(PyQuadPoly::new(p, s, f2, f1, f0)?.is_square())
}

/// Longest non-trivial sequence over all `f0` for fixed `f2`, `f1`.
#[pyfunction]
fn ml_f1(py: Python<'_>, p: u64, s: u32, f2: i64, f1: i64) -> PyResult<PyObject> {
    let m = modulus(p, s)?;
    let out = py
        .allow_threads(|| {
            let t = SearchTables::build(m, &Limits::from_env())?;
            search::ml_f1(&t, m.residue(f2), m.residue(f1))
        })
        .map_err(to_py_err)?;
    outcome_to_py(py, &out)
}

/// Longest non-trivial sequence over all `f1`, `f0` for fixed `f2`.
#[pyfunction]
fn ml_opt(py: Python<'_>, p: u64, s: u32, f2: i64) -> PyResult<PyObject> {
    let m = modulus(p, s)?;
    let out = py
        .allow_threads(|| {
            let t = SearchTables::build(m, &Limits::from_env())?;
            search::ml_opt(&t, m.residue(f2))
        })
        .map_err(to_py_err)?;
    outcome_to_py(py, &out)
}

/// Closed-form `opt(p**s, f2)`.
#[pyfunction]
fn formula_opt(py: Python<'_>, p: u64, s: u32, f2: i64) -> PyResult<PyObject> {
    let m = modulus(p, s)?;
    let v = py
        .allow_threads(|| formulas::formula_opt_limited(m, m.residue(f2), &Limits::from_env()))
        .map_err(to_py_err)?;
    Ok(length_to_py(py, v))
}

#[pyfunction]
fn corollary_opt(py: Python<'_>, p: u64, s: u32, t2: u32) -> PyResult<PyObject> {
    Ok(length_to_py(py, formulas::corollary_opt(p, s, t2).map_err(to_py_err)?))
}

#[pyfunction]
fn base_constants(py: Python<'_>, p: u64) -> PyResult<PyObject> {
    let c = py
        .allow_threads(|| formulas::base_constants_limited(p, &Limits::from_env()))
        .map_err(to_py_err)?;
    let d = PyDict::new_bound(py);
    d.set_item("p", c.p)?;
    d.set_item("opt_linear", length_to_py(py, c.opt_linear))?;
    d.set_item("opt_nonsquare", length_to_py(py, c.opt_nonsquare))?;
    d.set_item("opt_unit_square", length_to_py(py, c.opt_unit_square))?;
    d.set_item("least_non_residue", c.least_non_residue)?;
    Ok(d.into_any().unbind())
}

fn selection(mode: &str) -> PyResult<F2Selection> {
    match mode {
        "all" => Ok(F2Selection::All),
        "representatives" => Ok(F2Selection::Representatives),
        other => Err(PyValueError::new_err(format!(
            "mode must be 'all' or 'representatives', not {other:?}"
        ))),
    }
}

/// Records as dicts; infinite values appear as the string `"inf"`, as in
/// the CLI's JSON output.
#[pyfunction]
#[pyo3(signature = (p, s, mode = "all"))]
fn sweep(py: Python<'_>, p: u64, s: u32, mode: &str) -> PyResult<PyObject> {
    let m = modulus(p, s)?;
    let sel = selection(mode)?;
    let records = py
        .allow_threads(|| search::sweep(m, sel, SweepOptions::both(), &Limits::from_env()))
        .map_err(to_py_err)?;
    json_to_py(py, &serde_json::to_string(&records).expect("records serialize"))
}

/// Runs the verification harness. `grid` is `None` for the default grid or
/// a list of `(p, s, mode)` tuples.
#[pyfunction]
#[pyo3(signature = (grid = None, lemmas = true))]
fn run_verify(py: Python<'_>, grid: Option<Vec<(u64, u32, String)>>, lemmas: bool) -> PyResult<PyObject> {
    let mut spec = match grid {
        None => GridSpec::default_grid(),
        Some(points) => GridSpec::new(
            points
                .into_iter()
                .map(|(p, s, mode)| Ok(GridPoint { p, s, mode: selection(&mode)? }))
                .collect::<PyResult<_>>()?,
        ),
    };
    spec.limits = Limits::from_env();
    let report = py.allow_threads(|| {
        if lemmas {
            verify::verify(&spec)
        } else {
            verify::verify_main(&spec)
        }
    });
    json_to_py(py, &serde_json::to_string(&report).expect("report serializes"))
}

#[pymodule]
fn buchi(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModulus>()?;
    m.add_class::<PyQuadPoly>()?;
    m.add_function(wrap_pyfunction!(is_square_residue, m)?)?;
    m.add_function(wrap_pyfunction!(buchi_length, m)?)?;
    m.add_function(wrap_pyfunction!(is_square_poly, m)?)?;
    m.add_function(wrap_pyfunction!(ml_f1, m)?)?;
    m.add_function(wrap_pyfunction!(ml_opt, m)?)?;
    m.add_function(wrap_pyfunction!(formula_opt, m)?)?;
    m.add_function(wrap_pyfunction!(corollary_opt, m)?)?;
    m.add_function(wrap_pyfunction!(base_constants, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add("verify", wrap_pyfunction!(run_verify, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths_convert() {
        pyo3::prepare_freethreaded_python();
        Python::with_gil(|py| {
            let inf: f64 = length_to_py(py, Length::Infinite).extract(py).unwrap();
            assert!(inf.is_infinite());
            let n: u64 = length_to_py(py, Length::Finite(4)).extract(py).unwrap();
            assert_eq!(n, 4);
        });
    }

    #[test]
    fn module_functions() {
        pyo3::prepare_freethreaded_python();
        Python::with_gil(|py| {
            let l: u64 = buchi_length(py, 5, 4, 25, 0, 125).unwrap().extract(py).unwrap();
            assert_eq!(l, 4);
            let v: f64 = formula_opt(py, 3, 1, 2).unwrap().extract(py).unwrap();
            assert!(v.is_infinite());
            assert!(modulus(4, 1).is_err());
            let recs = sweep(py, 3, 2, "all").unwrap();
            assert_eq!(recs.bind(py).len().unwrap(), 9);
            assert!(sweep(py, 3, 2, "some").is_err());
        });
    }
}
