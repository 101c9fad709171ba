//! Python bindings. Exact values cross the boundary as `p/q` strings,
//! sampled values as floats.

use nilmap::config::RunConfig;
use nilmap::dynamics::{integrate_flow, iterate_map};
use nilmap::expr::parse_rational;
use nilmap::inversion::invert_auto;
use nilmap::jacobian::{is_unipotent, is_unipotent_sampled};
use nilmap::newclass::{parse_recipe, verify_claims, NewClassRecipe};
use nilmap::triangular::{strongly_nilpotent_generic, triangularize_map};
use nilmap::{parse_map, ExprMap, Number, Rational};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: nilmap::Error) -> PyErr {
    use nilmap::Error as E;
    match e {
        E::Syntax { .. } | E::VariableOutOfRange { .. } | E::DimensionMismatch { .. } | E::MissingPhi | E::ConflictingPhi => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rationals(v: &[String]) -> PyResult<Vec<Rational>> {
    v.iter()
        .map(|s| parse_rational(s).ok_or_else(|| PyValueError::new_err(format!("not a rational: {s:?}"))))
        .collect()
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn config(seed: u64) -> RunConfig {
    RunConfig { seed, ..RunConfig::default() }
}

/// A self-map of R^n, polynomial or built from sin/cos/exp.
#[pyclass(name = "Map", module = "pynilmap", frozen)]
pub struct PyMap {
    inner: ExprMap,
}

#[pymethods]
impl PyMap {
    /// Parses the map-definition text format.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_map(text).map(|inner| PyMap { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyValueError::new_err(format!("{path}: {e}")))?;
        Self::parse(&text)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn is_polynomial(&self) -> bool {
        self.inner.is_polynomial()
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    fn __repr__(&self) -> String {
        format!("Map(dim={})", self.inner.dim())
    }

    fn __call__(&self, point: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.evaluate(&point).map_err(py_err)
    }

    /// Exact evaluation at a rational point given as strings.
    fn evaluate_exact(&self, point: Vec<String>) -> PyResult<Vec<String>> {
        let p = rationals(&point)?;
        self.inner.evaluate(&p).map(|v| strings(&v)).map_err(py_err)
    }

    /// `self - id`.
    fn perturbation(&self) -> Self {
        PyMap { inner: self.inner.perturbation() }
    }

    fn negated(&self) -> Self {
        PyMap { inner: self.inner.negated() }
    }

    /// `self o inner`.
    fn compose(&self, inner: &PyMap) -> PyResult<Self> {
        self.inner.compose(&inner.inner).map(|inner| PyMap { inner }).map_err(py_err)
    }

    /// Unipotence of the Jacobian: exact for polynomial maps unless
    /// `sampled` is given. Returns `(holds, detail)`; `holds` is true for a
    /// proof or a passing sample.
    #[pyo3(signature = (sampled=None, seed=42))]
    fn is_unipotent(&self, sampled: Option<usize>, seed: u64) -> PyResult<(bool, String)> {
        let v = match sampled {
            None if self.inner.is_polynomial() => is_unipotent(&self.inner.to_poly().map_err(py_err)?),
            None => is_unipotent_sampled(&self.inner, &config(seed)),
            Some(n) => {
                let cfg = RunConfig { nilpotence_samples: n, ..config(seed) };
                cfg.validate().map_err(py_err)?;
                is_unipotent_sampled(&self.inner, &cfg)
            }
        };
        Ok((v.is_nilpotent_claim(), v.to_string()))
    }

    /// Exact strong nilpotence of `J(self - id)`.
    fn is_strongly_nilpotent(&self) -> PyResult<bool> {
        let f = self.inner.to_poly().map_err(py_err)?;
        strongly_nilpotent_generic(&f.perturbation(), RunConfig::default().monomial_cap)
            .map(|s| s.is_strong())
            .map_err(py_err)
    }

    /// `(S, g)` with `g = S^-1 o self o S` unit upper triangular; `S` as
    /// rows of rational strings.
    fn triangularize(&self) -> PyResult<(Vec<Vec<String>>, PyMap)> {
        let f = self.inner.to_poly().map_err(py_err)?;
        let (basis, g) = triangularize_map(&f).map_err(py_err)?;
        let rows = basis.matrix().to_rows().iter().map(|r| strings(r)).collect();
        Ok((rows, PyMap { inner: g.to_expr_map() }))
    }

    /// Exact preimage of a rational point through the composition-power
    /// inversion. Falls back to floats (as strings) when exactness is lost.
    #[pyo3(signature = (point, seed=42))]
    fn invert(&self, point: Vec<String>, seed: u64) -> PyResult<Vec<String>> {
        let f = self.inner.to_poly().map_err(py_err)?;
        let y = rationals(&point)?;
        let r = invert_auto(&f, &y, &config(seed)).map_err(py_err)?;
        Ok(r.point
            .iter()
            .map(|x| match x {
                Number::Exact(q) => q.to_string(),
                Number::Float(v) => v.to_string(),
            })
            .collect())
    }

    /// RK4 for `dp/dt = self(p)`; returns the sampled points (one per step,
    /// shorter when the orbit blows up).
    #[pyo3(signature = (start, t1, steps=1000, t0=0.0))]
    fn flow(&self, start: Vec<f64>, t1: f64, steps: usize, t0: f64) -> PyResult<Vec<Vec<f64>>> {
        integrate_flow(&self.inner, &start, t0, t1, steps, &RunConfig::default())
            .map(|o| o.points)
            .map_err(py_err)
    }

    /// `k` iterations of the map; returns `(points, period)`.
    fn iterate(&self, start: Vec<f64>, k: usize) -> PyResult<(Vec<Vec<f64>>, Option<usize>)> {
        iterate_map(&self.inner, &start, k, &RunConfig::default())
            .map(|o| (o.points, o.period))
            .map_err(py_err)
    }
}

/// A recursive New Class construction.
#[pyclass(name = "Recipe", module = "pynilmap", frozen)]
pub struct PyRecipe {
    inner: NewClassRecipe,
}

#[pymethods]
impl PyRecipe {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        parse_recipe(text).map(|inner| PyRecipe { inner }).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn level(&self) -> usize {
        self.inner.level()
    }

    /// The map `id + h`.
    fn build(&self) -> PyResult<PyMap> {
        self.inner.build_map().map(|inner| PyMap { inner }).map_err(py_err)
    }

    /// Exact check of the construction's claims; raises on the first
    /// failure. Returns the constant value of the `n`-fold composition of h.
    #[pyo3(signature = (inverse_samples=100, seed=42))]
    fn verify(&self, inverse_samples: usize, seed: u64) -> PyResult<Vec<String>> {
        verify_claims(&self.inner, &config(seed), inverse_samples)
            .map(|r| strings(&r.power_value))
            .map_err(py_err)
    }
}

#[pymodule]
fn pynilmap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMap>()?;
    m.add_class::<PyRecipe>()?;
    Ok(())
}
