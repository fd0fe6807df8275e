//! Python bindings for `kmsync`.
//!
//! Invalid arguments raise `ValueError`; numerical failures raise
//! `RuntimeError`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use kmsync::equilibria::{SignSequence, DEFAULT_TOL};
use kmsync::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Consistency { .. } | Error::Asymmetric(_) | Error::NonFinite { .. } | Error::Numerical(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn sigma_of(s: &str) -> PyResult<SignSequence> {
    s.parse().map_err(to_py)
}

/// Model parameters: odd node count `n`, frequency slope `a`, coupling `k`.
#[pyclass(name = "ModelConfig", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModelConfig {
    inner: kmsync::model::ModelConfig,
}

#[pymethods]
impl PyModelConfig {
    #[new]
    #[pyo3(signature = (n, a = 1.0, k = 1.0))]
    fn new(n: usize, a: f64, k: f64) -> PyResult<Self> {
        Ok(Self { inner: kmsync::model::ModelConfig::new(n, a, k).map_err(to_py)? })
    }

    /// Configuration with coupling `K = ratio * a`.
    #[staticmethod]
    #[pyo3(signature = (n, ratio, a = 1.0))]
    fn from_ratio(n: usize, ratio: f64, a: f64) -> PyResult<Self> {
        Ok(Self { inner: kmsync::model::ModelConfig::from_ratio(n, a, ratio).map_err(to_py)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn n0(&self) -> usize {
        self.inner.n0()
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.k()
    }

    /// `a / K`.
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    fn __repr__(&self) -> String {
        format!("ModelConfig(n={}, a={}, k={})", self.inner.n(), self.inner.a(), self.inner.k())
    }
}

/// An equilibrium with its spectrum.
#[pyclass(name = "Equilibrium", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyEquilibrium {
    sigma: String,
    xi: f64,
    c_hat: f64,
    v: Vec<f64>,
    /// Full state with the reference node at phase 0.
    u: Vec<f64>,
    multiplicity: usize,
    eigenvalues: Vec<f64>,
    l_plus: usize,
    l_zero: usize,
    l_minus: usize,
    verdict: String,
}

#[pymethods]
impl PyEquilibrium {
    fn __repr__(&self) -> String {
        format!("Equilibrium(sigma='{}', xi={}, verdict='{}')", self.sigma, self.xi, self.verdict)
    }
}

fn wrap_equilibrium(eq: &kmsync::equilibria::Equilibrium, cfg: &kmsync::model::ModelConfig) -> PyResult<PyEquilibrium> {
    let rep = kmsync::stability::equilibrium_stability(eq, cfg).map_err(to_py)?;
    Ok(PyEquilibrium {
        sigma: eq.sigma.to_string(),
        xi: eq.xi,
        c_hat: eq.c_hat,
        v: eq.v.clone(),
        u: kmsync::model::lift(&eq.v, 0.0),
        multiplicity: eq.multiplicity,
        l_plus: rep.l_plus,
        l_zero: rep.l_zero,
        l_minus: rep.l_minus,
        verdict: rep.verdict.as_str().to_string(),
        eigenvalues: rep.eigenvalues,
    })
}

#[pyclass(name = "BifurcationEvent", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyBifurcationEvent {
    kind: String,
    participants: Vec<String>,
    k_star: f64,
    ratio: f64,
    xi_star: f64,
    chi: f64,
    criticality: String,
    degeneracy_order: usize,
}

#[pymethods]
impl PyBifurcationEvent {
    fn __repr__(&self) -> String {
        format!("BifurcationEvent(kind='{}', sigma='{}', ratio={})", self.kind, self.participants[0], self.ratio)
    }
}

#[pyclass(name = "EventCounts", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyEventCounts {
    n0: usize,
    families_distinct: usize,
    families_coarse: usize,
    saddle_nodes: usize,
    pitchforks: usize,
    saddle_node_bound: u64,
    pitchfork_bound: u64,
    pitchfork_prime_bound: Option<u64>,
}

#[pymethods]
impl PyEventCounts {
    fn bounds_hold(&self) -> bool {
        self.saddle_nodes as u64 >= self.saddle_node_bound
            && self.pitchforks as u64 >= self.pitchfork_bound
            && self.pitchfork_prime_bound.is_none_or(|b| self.pitchforks as u64 >= b)
    }
}

/// A stationary profile of the continuum limit.
#[pyclass(name = "ContinuumSolution", frozen)]
struct PyContinuumSolution {
    inner: kmsync::continuum::ContinuumSolution,
}

#[pymethods]
impl PyContinuumSolution {
    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn flip_set(&self) -> String {
        self.inner.flip_set.to_string()
    }

    #[getter]
    fn note(&self) -> Option<String> {
        self.inner.note.clone()
    }

    /// Profile value in `(-pi, pi]` at `x` in `[0, 1]`.
    fn profile(&self, x: f64) -> f64 {
        self.inner.profile(x)
    }

    /// Cell averages on `n` cells.
    fn discretize(&self, n: usize) -> PyResult<Vec<f64>> {
        Ok(kmsync::continuum::discretize(&self.inner, n).map_err(to_py)?.values)
    }

    fn __repr__(&self) -> String {
        format!("ContinuumSolution(kind='{}', c={})", self.inner.kind.as_str(), self.inner.c)
    }
}

#[pyclass(name = "Trajectory", frozen, get_all)]
struct PyTrajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    dt: f64,
    mean_phase_drift: f64,
}

#[pyclass(name = "CheckResult", frozen, get_all)]
struct PyCheckResult {
    criterion: u8,
    name: String,
    measured: f64,
    expected: f64,
    tol: f64,
    relation: String,
    passed: bool,
}

#[pymethods]
impl PyCheckResult {
    fn __repr__(&self) -> String {
        format!(
            "CheckResult({}: {} {} {} -> {})",
            self.name,
            self.measured,
            self.relation,
            self.expected,
            if self.passed { "pass" } else { "FAIL" }
        )
    }
}

/// `chi^sigma(xi)` for a sign string such as `"+-++"`.
#[pyfunction]
fn chi(sigma: &str, xi: f64) -> PyResult<f64> {
    kmsync::equilibria::chi_eval(&sigma_of(sigma)?, xi).map_err(to_py)
}

/// Roots `xi` of `|chi^sigma(xi)| = beta`, ascending.
#[pyfunction]
#[pyo3(signature = (sigma, beta, tol = DEFAULT_TOL))]
fn solve_xi(sigma: &str, beta: f64, tol: f64) -> PyResult<Vec<f64>> {
    kmsync::equilibria::solve_xi(&sigma_of(sigma)?, beta, tol).map_err(to_py)
}

/// Equilibria of one branch, or of every branch when `sigma` is omitted.
#[pyfunction]
#[pyo3(signature = (cfg, sigma = None))]
fn equilibria(cfg: &PyModelConfig, sigma: Option<&str>) -> PyResult<Vec<PyEquilibrium>> {
    let c = &cfg.inner;
    let eqs = match sigma {
        Some(s) => kmsync::equilibria::equilibria_for(&sigma_of(s)?, c, DEFAULT_TOL),
        None => kmsync::equilibria::all_equilibria(c, DEFAULT_TOL),
    }
    .map_err(to_py)?;
    eqs.iter().map(|e| wrap_equilibrium(e, c)).collect()
}

/// Verdict predicted by the sign pattern and `xi` alone.
#[pyfunction]
fn classify(sigma: &str, xi: f64, cfg: &PyModelConfig) -> PyResult<String> {
    Ok(kmsync::stability::classify_by_pattern(&sigma_of(sigma)?, xi, &cfg.inner)
        .map_err(to_py)?
        .as_str()
        .to_string())
}

fn wrap_event(e: &kmsync::bifurcation::BifurcationEvent) -> PyBifurcationEvent {
    PyBifurcationEvent {
        kind: e.kind.as_str().to_string(),
        participants: e.participants.iter().map(|s| s.to_string()).collect(),
        k_star: e.k_star,
        ratio: e.ratio,
        xi_star: e.xi_star,
        chi: e.chi,
        criticality: e.criticality.as_str().to_string(),
        degeneracy_order: e.degeneracy_order,
    }
}

/// Saddle-node and pitchfork events over every branch.
#[pyfunction]
fn bifurcations(cfg: &PyModelConfig) -> PyResult<Vec<PyBifurcationEvent>> {
    Ok(kmsync::bifurcation::all_events(&cfg.inner)
        .map_err(to_py)?
        .iter()
        .map(wrap_event)
        .collect())
}

/// Exhaustive family and event counts for `n0`.
#[pyfunction]
fn count_events(n0: usize) -> PyResult<PyEventCounts> {
    let c = kmsync::bifurcation::count_events(n0).map_err(to_py)?;
    Ok(PyEventCounts {
        n0: c.n0,
        families_distinct: c.families_distinct,
        families_coarse: c.families_coarse,
        saddle_nodes: c.saddle_nodes,
        pitchforks: c.pitchforks,
        saddle_node_bound: c.saddle_node_bound,
        pitchfork_bound: c.pitchfork_bound,
        pitchfork_prime_bound: c.pitchfork_prime_bound,
    })
}

/// Order parameter of the continuous family at `a/K = beta`, or `None`.
#[pyfunction]
fn solve_c_continuous(beta: f64) -> PyResult<Option<f64>> {
    kmsync::continuum::solve_c_continuous(beta).map_err(to_py)
}

/// Stationary profile at `K/a = ratio` reflected on `flip` ("lo:hi,...").
#[pyfunction]
#[pyo3(signature = (ratio, flip = ""))]
fn continuum(ratio: f64, flip: &str) -> PyResult<Option<PyContinuumSolution>> {
    let flip: kmsync::continuum::FlipSet = flip.parse().map_err(to_py)?;
    Ok(kmsync::continuum::build_discontinuous(&flip, 1.0 / ratio)
        .map_err(to_py)?
        .map(|inner| PyContinuumSolution { inner }))
}

/// Distance between the phase-shift families of two step functions.
#[pyfunction]
fn family_distance(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    use kmsync::continuum::StepFunctionState;
    kmsync::continuum::family_distance(&StepFunctionState::new(x), &StepFunctionState::new(y)).map_err(to_py)
}

/// RK4 integration from the full state `u0`; `dt` defaults to `0.01 / K`.
#[pyfunction]
#[pyo3(signature = (cfg, u0, t_end, dt = None, record_every = 1))]
fn simulate(cfg: &PyModelConfig, u0: Vec<f64>, t_end: f64, dt: Option<f64>, record_every: usize) -> PyResult<PyTrajectory> {
    let c = &cfg.inner;
    let opts = kmsync::dynamics::IntegrateOptions { record_every, initial: "python".into() };
    let dt = dt.unwrap_or(kmsync::dynamics::DEFAULT_DT_K / c.k());
    let traj = kmsync::dynamics::integrate_with(&u0, c, t_end, dt, &opts).map_err(to_py)?;
    Ok(PyTrajectory {
        mean_phase_drift: traj.mean_phase_drift(),
        times: traj.times,
        states: traj.states,
        dt: traj.dt,
    })
}

/// Runs one criterion (1-6) of the reference suite, or all of them.
#[pyfunction]
#[pyo3(signature = (criterion = None))]
fn selfcheck(criterion: Option<u8>) -> PyResult<Vec<PyCheckResult>> {
    let ids: Vec<u8> = criterion.map_or_else(|| (1..=6).collect(), |c| vec![c]);
    let mut out = Vec::new();
    for id in ids {
        let report = kmsync::selfcheck::run_criterion(id).map_err(to_py)?;
        out.extend(report.checks.into_iter().map(|c| PyCheckResult {
            criterion: id,
            name: c.name,
            measured: c.measured,
            expected: c.expected,
            tol: c.tol,
            relation: c.relation.symbol().to_string(),
            passed: c.pass,
        }));
    }
    Ok(out)
}

#[pymodule]
fn kmsync_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelConfig>()?;
    m.add_class::<PyEquilibrium>()?;
    m.add_class::<PyBifurcationEvent>()?;
    m.add_class::<PyEventCounts>()?;
    m.add_class::<PyContinuumSolution>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_class::<PyCheckResult>()?;
    m.add_function(wrap_pyfunction!(chi, m)?)?;
    m.add_function(wrap_pyfunction!(solve_xi, m)?)?;
    m.add_function(wrap_pyfunction!(equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(bifurcations, m)?)?;
    m.add_function(wrap_pyfunction!(count_events, m)?)?;
    m.add_function(wrap_pyfunction!(solve_c_continuous, m)?)?;
    m.add_function(wrap_pyfunction!(continuum, m)?)?;
    m.add_function(wrap_pyfunction!(family_distance, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(selfcheck, m)?)?;
    Ok(())
}
