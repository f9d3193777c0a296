//! Python module `grpda`: seeded instances, solver runs, proximal operators
//! and fixed-point certification.

use std::path::PathBuf;

use grpda_core::fixedpoint::{build_map, certify_firm_nonexpansive, CertifyMode, DEFAULT_SAMPLES};
use grpda_core::metrics;
use grpda_core::problems::{
    default_config, default_scheme, generate, scheme_problem, Family, GeneratedInstance, GeneratorCase, InstanceSpec,
    DEFAULT_LASSO_MU,
};
use grpda_core::prox::project_simplex as simplex;
use grpda_core::solvers::{reference_run, run as run_scheme, ReferenceOptions, RunOptions, SCHEME_NAMES};
use grpda_core::{Error, LinearMap, ProxOracle, GOLDEN_RATIO};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Diverged { .. } | Error::NoConvergence(_) | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn case(name: &str) -> PyResult<GeneratorCase> {
    Ok(match name {
        "normal" | "i" => GeneratorCase::Normal,
        "correlated" | "ii" => GeneratorCase::Correlated,
        "uniform" => GeneratorCase::Uniform,
        "sparse-normal" | "b" => GeneratorCase::SparseNormal,
        "sparse-uniform" | "a" => GeneratorCase::SparseUniform,
        other => return Err(PyValueError::new_err(format!("unknown generator case `{other}`"))),
    })
}

/// A seeded problem instance.
#[pyclass(name = "Instance", frozen)]
struct PyInstance {
    inner: GeneratedInstance,
}

fn build(spec: InstanceSpec) -> PyResult<PyInstance> {
    Ok(PyInstance {
        inner: generate(&spec).map_err(py_err)?,
    })
}

#[pymethods]
impl PyInstance {
    /// `min ½‖Kx − b‖² + μ‖x‖₁`; `v` switches to column-correlated `K`.
    #[staticmethod]
    #[pyo3(signature = (p, q, s, seed = 1, mu = DEFAULT_LASSO_MU, v = None, normalize = false))]
    fn lasso(p: usize, q: usize, s: usize, seed: u64, mu: f64, v: Option<f64>, normalize: bool) -> PyResult<Self> {
        let base = match v {
            Some(v) => InstanceSpec::lasso_correlated(p, q, s, v, seed),
            None => InstanceSpec::lasso(p, q, s, seed),
        };
        build(InstanceSpec { mu, normalize, ..base })
    }

    /// `min ½‖Kx − b‖²` over `x ≥ 0` with sparse random `K` and `b = Kx*`.
    #[staticmethod]
    #[pyo3(signature = (p, q, d = 0.5, case_name = "sparse-uniform", seed = 1, s = None))]
    fn nnls(p: usize, q: usize, d: f64, case_name: &str, seed: u64, s: Option<usize>) -> PyResult<Self> {
        build(InstanceSpec::nnls_random(
            case(case_name)?,
            p,
            q,
            s.unwrap_or(q),
            d,
            seed,
        ))
    }

    /// NNLS with `K` read from a Matrix Market file and Gaussian `b`.
    #[staticmethod]
    #[pyo3(signature = (path, seed = 1))]
    fn nnls_matrix_market(path: PathBuf, seed: u64) -> PyResult<Self> {
        build(InstanceSpec::nnls_matrix_market(path, seed))
    }

    /// `min_x max_y ⟨Kx, y⟩` over two simplices.
    #[staticmethod]
    #[pyo3(signature = (p, q, case_name = "uniform", seed = 1))]
    fn matrix_game(p: usize, q: usize, case_name: &str, seed: u64) -> PyResult<Self> {
        build(InstanceSpec::matrix_game(case(case_name)?, p, q, seed))
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.problem.p()
    }

    #[getter]
    fn q(&self) -> usize {
        self.inner.problem.q()
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.spec().family.name()
    }

    #[getter]
    fn spec_hash(&self) -> String {
        self.inner.provenance.spec_hash.clone()
    }

    #[getter]
    fn norm_bound(&self) -> f64 {
        self.inner.problem.norm_bound()
    }

    #[getter]
    fn b(&self) -> Option<Vec<f64>> {
        self.inner.b().map(<[f64]>::to_vec)
    }

    #[getter]
    fn x_star(&self) -> Option<Vec<f64>> {
        self.inner.x_star.clone()
    }

    /// Dense rows of `K`.
    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.k.to_rows()
    }

    /// Primal objective; `inf` outside the domain.
    fn objective(&self, x: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.problem.objective(&x).map_err(py_err)?.to_f64())
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(family={}, p={}, q={}, hash={})",
            self.family(),
            self.p(),
            self.q(),
            self.inner.provenance.spec_hash
        )
    }
}

/// Long reference run giving `F*` and a saddle point.
#[pyfunction]
#[pyo3(signature = (instance, max_iter = 1_000_000, tol = 1e-13, beta = 1.0))]
fn reference<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    max_iter: usize,
    tol: f64,
    beta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = ReferenceOptions {
        max_iter,
        tol,
        beta,
        ..ReferenceOptions::default()
    };
    let r = reference_run(&instance.inner.problem, &opts).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("x", r.x)?;
    d.set_item("y", r.y)?;
    d.set_item("objective", r.objective)?;
    d.set_item("iterations", r.iterations)?;
    d.set_item("converged", r.converged)?;
    Ok(d)
}

/// Runs one scheme with the family defaults and returns the trace as columns
/// plus the final primal and dual points.
#[pyfunction]
#[pyo3(signature = (instance, scheme, iters, stride = 1, with_reference = false, beta = None, psi = None, zeta = None, rho = None))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    scheme: &str,
    iters: usize,
    stride: usize,
    with_reference: bool,
    beta: Option<f64>,
    psi: Option<f64>,
    zeta: Option<f64>,
    rho: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let inst = &instance.inner;
    let mut d = default_config(inst.spec());
    d.beta = beta.unwrap_or(d.beta);
    d.psi = psi.unwrap_or(d.psi);
    d.zeta = zeta.unwrap_or(d.zeta);
    d.rho = rho.unwrap_or(d.rho);
    let problem = scheme_problem(scheme, &inst.problem);
    let config = default_scheme(scheme, &problem, &d).map_err(py_err)?;
    let reference = if with_reference {
        Some(reference_run(&inst.problem, &ReferenceOptions::default()).map_err(py_err)?)
    } else {
        None
    };
    let (x0, y0) = problem.default_start();
    let opts = RunOptions {
        budget: iters,
        stride,
        wall_time: false,
        reference,
    };
    let trace = run_scheme(&problem, &config, x0, y0, &opts).map_err(|f| py_err(f.error))?;
    let out = PyDict::new(py);
    out.set_item("iter", trace.rows.iter().map(|r| r.iter).collect::<Vec<_>>())?;
    out.set_item("objective", trace.rows.iter().map(|r| r.objective).collect::<Vec<_>>())?;
    out.set_item(
        "objective_error",
        trace.rows.iter().map(|r| r.objective_error).collect::<Vec<_>>(),
    )?;
    out.set_item("gap", trace.rows.iter().map(|r| r.gap).collect::<Vec<_>>())?;
    out.set_item("a_n", trace.rows.iter().map(|r| r.a_n).collect::<Vec<_>>())?;
    out.set_item("beta_n", trace.rows.iter().map(|r| r.beta_n).collect::<Vec<_>>())?;
    out.set_item("tau_n", trace.rows.iter().map(|r| r.tau_n).collect::<Vec<_>>())?;
    let s = &trace.final_state;
    let (x, y) = if problem.is_mirrored() {
        (&s.y, &s.x)
    } else {
        (&s.x, &s.y)
    };
    out.set_item("x", x.clone())?;
    out.set_item("y", y.clone())?;
    out.set_item("mirrored", problem.is_mirrored())?;
    Ok(out)
}

/// Spectral or sampled firm-nonexpansiveness check of the fixed-point map
/// of one relaxed sweep on a least-squares instance.
#[pyfunction]
#[pyo3(signature = (instance, psi, sigma = 1.0, product = None, mode = "spectral", samples = DEFAULT_SAMPLES, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn certify<'py>(
    py: Python<'py>,
    instance: &PyInstance,
    psi: f64,
    sigma: f64,
    product: Option<f64>,
    mode: &str,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    if instance.inner.spec().family == Family::MatrixGame {
        return Err(PyValueError::new_err("certification needs a least-squares instance"));
    }
    let mode = match mode {
        "spectral" => CertifyMode::Spectral,
        "sampling" => CertifyMode::Sampling,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    let problem = &instance.inner.problem;
    let l = problem.norm_bound();
    let tau = product.unwrap_or(0.99 * psi) / (sigma * l * l);
    let map = build_map(problem, tau, sigma, psi).map_err(py_err)?;
    let r = certify_firm_nonexpansive(&map, mode, samples, seed).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("passed", r.passed)?;
    d.set_item("order", r.order)?;
    d.set_item("tau", tau)?;
    d.set_item("max_modulus", r.max_modulus)?;
    if let Some(e) = &r.eigen {
        d.set_item(
            "eigenvalues",
            e.eigenvalues.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>(),
        )?;
    }
    if let Some(s) = &r.sampling {
        d.set_item("violations", s.violations)?;
        d.set_item("worst_excess", s.worst_excess)?;
    }
    Ok(d)
}

fn oracle(kind: &str, mu: Option<f64>, b: Option<Vec<f64>>) -> PyResult<ProxOracle> {
    let need_b = || {
        b.clone()
            .ok_or_else(|| PyValueError::new_err(format!("`{kind}` needs b")))
    };
    Ok(match kind {
        "l1" => ProxOracle::l1(mu.ok_or_else(|| PyValueError::new_err("`l1` needs mu"))?).map_err(py_err)?,
        "nonneg" => ProxOracle::NonNeg,
        "simplex" => ProxOracle::Simplex,
        "least-squares-conjugate" => ProxOracle::LeastSquaresConjugate { b: need_b()? },
        "equality-conjugate" => ProxOracle::EqualityConjugate { b: need_b()? },
        "zero" => ProxOracle::Zero,
        other => return Err(PyValueError::new_err(format!("unknown prox kind `{other}`"))),
    })
}

/// `Prox_{step·h}(v)`.
#[pyfunction]
#[pyo3(signature = (kind, step, v, mu = None, b = None))]
fn prox(kind: &str, step: f64, v: Vec<f64>, mu: Option<f64>, b: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    oracle(kind, mu, b)?.prox(step, &v).map_err(py_err)
}

/// `Prox_{step·h*}(u)`.
#[pyfunction]
#[pyo3(signature = (kind, step, u, mu = None, b = None))]
fn conjugate_prox(kind: &str, step: f64, u: Vec<f64>, mu: Option<f64>, b: Option<Vec<f64>>) -> PyResult<Vec<f64>> {
    oracle(kind, mu, b)?.conjugate_prox(step, &u).map_err(py_err)
}

#[pyfunction]
fn project_simplex(v: Vec<f64>) -> Vec<f64> {
    simplex(&v)
}

/// `max_i (Kx)_i − min_j (Kᵀy)_j` for `K` given by rows.
#[pyfunction]
fn matrix_game_gap(k: Vec<Vec<f64>>, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    let k = LinearMap::from_rows(&k).map_err(py_err)?;
    metrics::matrix_game_gap(&k, &x, &y).map_err(py_err)
}

/// `‖K‖₂` estimate for `K` given by rows.
#[pyfunction]
fn norm_bound(k: Vec<Vec<f64>>) -> PyResult<f64> {
    Ok(LinearMap::from_rows(&k).map_err(py_err)?.norm_bound())
}

#[pymodule]
fn grpda(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_function(wrap_pyfunction!(reference, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(prox, m)?)?;
    m.add_function(wrap_pyfunction!(conjugate_prox, m)?)?;
    m.add_function(wrap_pyfunction!(project_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_game_gap, m)?)?;
    m.add_function(wrap_pyfunction!(norm_bound, m)?)?;
    m.add("SCHEME_NAMES", SCHEME_NAMES.to_vec())?;
    m.add("GOLDEN_RATIO", GOLDEN_RATIO)?;
    Ok(())
}
