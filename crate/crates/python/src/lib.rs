//! Python bindings: `import feigen`.

use std::path::PathBuf;

use feigen_core::chebyshev::{clenshaw_eval, ChebEvenSeries};
use feigen_core::deltasolver::{solve_delta, DeltaConfig};
use feigen_core::gsolver::{self, GSolveConfig};
use feigen_core::pipeline::{default_target_digits, n_for_digits, RunConfig};
use feigen_core::{oracle, BigReal, Constant, Error, PrecisionContext};
use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Checkpoint { .. } => PyOSError::new_err(e.to_string()),
        e if e.is_numerical() => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

/// Converged Chebyshev model of the universal function `g`.
#[pyclass(name = "Series", module = "feigen")]
#[derive(Clone)]
struct PySeries {
    inner: ChebEvenSeries,
    ctx: PrecisionContext,
}

#[pymethods]
impl PySeries {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Coefficients `c_0, c_1, ...` of `c_0/2 + sum c_j T_2j(x)` as decimal strings.
    #[pyo3(signature = (digits = 30))]
    fn coefficients(&self, digits: usize) -> Vec<String> {
        self.inner.coeffs().iter().map(|c| c.to_decimal(digits)).collect()
    }

    #[getter]
    fn precision_bits(&self) -> u32 {
        self.ctx.work_bits()
    }

    /// `g(x)` for a decimal string or float argument.
    #[pyo3(signature = (x, digits = 30))]
    fn eval(&self, x: &Bound<'_, PyAny>, digits: usize) -> PyResult<String> {
        let arg = if let Ok(s) = x.extract::<String>() {
            BigReal::from_decimal(&s, &self.ctx).map_err(to_py)?
        } else {
            BigReal::from_f64(x.extract::<f64>()?, &self.ctx).map_err(to_py)?
        };
        Ok(clenshaw_eval(&self.inner, &arg, &self.ctx).to_decimal(digits))
    }

    /// Signed `α = 1/g(1)`.
    #[pyo3(signature = (digits = None))]
    fn alpha(&self, digits: Option<usize>) -> PyResult<String> {
        let a = gsolver::alpha_from(&self.inner, &self.ctx).map_err(to_py)?;
        Ok(a.to_decimal(digits.unwrap_or(self.ctx.target_digits() as usize)))
    }

    /// δ from the linearized operator at this `g`.
    #[pyo3(signature = (digits = None))]
    fn delta(&self, py: Python<'_>, digits: Option<usize>) -> PyResult<String> {
        let target = self.ctx.target_digits();
        let d = py
            .allow_threads(|| solve_delta(&self.inner, &self.ctx, &DeltaConfig::new(self.inner.len(), target)))
            .map_err(to_py)?;
        Ok(d.delta.to_decimal(digits.unwrap_or(target as usize)))
    }

    fn __repr__(&self) -> String {
        format!("Series(n={}, bits={})", self.inner.len(), self.ctx.work_bits())
    }
}

/// Solve the collocation system for `g` with `n` nodes.
#[pyfunction]
#[pyo3(signature = (n, target_digits = None))]
fn solve_g(py: Python<'_>, n: usize, target_digits: Option<u32>) -> PyResult<PySeries> {
    let cfg = GSolveConfig::new(n, target_digits.unwrap_or_else(|| default_target_digits(n))).map_err(to_py)?;
    let sol = py.allow_threads(|| gsolver::solve_g(&cfg, None)).map_err(to_py)?;
    Ok(PySeries {
        inner: sol.series,
        ctx: sol.ctx,
    })
}

#[pyfunction]
fn bootstrap_ladder(n: usize) -> PyResult<Vec<usize>> {
    gsolver::bootstrap_ladder(n).map_err(to_py)
}

#[pyfunction]
fn digit_agreement(a: &str, b: &str) -> PyResult<u32> {
    feigen_core::digit_agreement(a, b).map_err(to_py)
}

#[pyfunction]
#[pyo3(name = "n_for_digits")]
fn py_n_for_digits(digits: u32) -> usize {
    n_for_digits(digits)
}

/// Brute-force `(alpha, delta)` from superstable logistic-map orbits.
#[pyfunction]
#[pyo3(signature = (depth = 12))]
fn oracle_estimates(py: Python<'_>, depth: usize) -> PyResult<(String, String)> {
    py.allow_threads(|| {
        let ctx = PrecisionContext::from_bits(256)?;
        let seq = oracle::superstable_params(depth, &ctx)?;
        Ok((
            oracle::alpha_oracle(&seq)?.value.to_decimal(20),
            oracle::delta_oracle(&seq)?.value.to_decimal(20),
        ))
    })
    .map_err(to_py)
}

/// Full run; returns the report as a dict (same layout as the CLI's JSON).
#[pyfunction]
#[pyo3(signature = (n, constant = "both", verify = None, verify_oracle = None, threads = None, checkpoint_dir = None))]
fn run(
    py: Python<'_>,
    n: usize,
    constant: &str,
    verify: Option<usize>,
    verify_oracle: Option<usize>,
    threads: Option<usize>,
    checkpoint_dir: Option<PathBuf>,
) -> PyResult<PyObject> {
    let mut cfg = RunConfig::new(n);
    cfg.constant = constant.parse::<Constant>().map_err(to_py)?;
    cfg.verify = verify;
    cfg.verify_oracle = verify_oracle;
    cfg.threads = threads;
    cfg.checkpoint_dir = checkpoint_dir;
    let report = py.allow_threads(|| feigen_core::run(&cfg)).map_err(to_py)?;
    let text = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let json = PyModule::import_bound(py, "json")?;
    Ok(json.call_method1("loads", (text,))?.unbind())
}

#[pymodule]
fn feigen(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySeries>()?;
    m.add_function(wrap_pyfunction!(solve_g, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_ladder, m)?)?;
    m.add_function(wrap_pyfunction!(digit_agreement, m)?)?;
    m.add_function(wrap_pyfunction!(py_n_for_digits, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_estimates, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
