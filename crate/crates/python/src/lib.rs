//! Python bindings. Points cross the boundary as lists of floats; compound
//! values (instances, reports) as dicts or JSON text.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use halpern_sopt::harness::{self, EnsembleReport, ExperimentConfig};
use halpern_sopt::samplers::{random_transition_matrix, stationary_distribution as stationary};
use halpern_sopt::solver::RunTrace;
use halpern_sopt::{
    Algorithm, ObjectiveKind, OperatorExpr, Point, ProblemInstance, RunOptions, SamplerKind,
    SamplerSpec, StoppingRule,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn point(x: Vec<f64>) -> PyResult<Point> {
    Point::new(x).map_err(value_err)
}

fn parse<T: std::str::FromStr>(s: &str) -> PyResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(value_err)
}

#[pyclass(module = "pyhalpern", from_py_object)]
#[derive(Clone)]
struct Ball(halpern_sopt::Ball);

#[pymethods]
impl Ball {
    #[new]
    fn new(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        Ok(Ball(
            halpern_sopt::Ball::new(point(center)?, radius).map_err(value_err)?,
        ))
    }

    #[staticmethod]
    fn unit(dim: usize) -> Self {
        Ball(halpern_sopt::Ball::unit(dim))
    }

    #[getter]
    fn center(&self) -> Vec<f64> {
        self.0.center().as_slice().to_vec()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.0.radius()
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        Ok(self.0.contains(&point(x)?))
    }

    fn project(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.project(&point(x)?).map_err(value_err)?.into_vec())
    }

    fn __repr__(&self) -> String {
        format!("Ball(dim={}, radius={})", self.0.dim(), self.0.radius())
    }
}

/// Firmly nonexpansive operator built from ball projections.
#[pyclass(module = "pyhalpern", from_py_object)]
#[derive(Clone)]
struct Operator(OperatorExpr);

#[pymethods]
impl Operator {
    #[staticmethod]
    fn identity() -> Self {
        Operator(OperatorExpr::Identity)
    }

    #[staticmethod]
    fn ball_projection(ball: Ball) -> Self {
        Operator(OperatorExpr::ball_projection(ball.0))
    }

    #[staticmethod]
    fn gcfs(outer: Ball, inner: Vec<Ball>) -> PyResult<Self> {
        let inner = inner.into_iter().map(|b| b.0).collect();
        Ok(Operator(
            OperatorExpr::gcfs(outer.0, inner).map_err(value_err)?,
        ))
    }

    #[staticmethod]
    fn half_averaged(inner: Operator) -> Self {
        Operator(OperatorExpr::half_averaged(inner.0))
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.apply(&point(x)?).map_err(value_err)?.into_vec())
    }

    fn residual(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.residual(&point(x)?).map_err(value_err)
    }

    fn firm_nonexpansivity_slack(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.0
            .firm_nonexpansivity_slack(&point(x)?, &point(y)?)
            .map_err(value_err)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.0).expect("operator serializes")
    }
}

#[pyclass(module = "pyhalpern", from_py_object)]
#[derive(Clone)]
struct ConvexFunction(halpern_sopt::ConvexFunction);

#[pymethods]
impl ConvexFunction {
    #[staticmethod]
    fn diag_quadratic(diag: Vec<f64>, linear: Vec<f64>) -> PyResult<Self> {
        halpern_sopt::ConvexFunction::diag_quadratic(diag, linear)
            .map(ConvexFunction)
            .map_err(value_err)
    }

    #[staticmethod]
    fn weighted_l1(weights: Vec<f64>, anchor: Vec<f64>) -> PyResult<Self> {
        halpern_sopt::ConvexFunction::weighted_l1(weights, anchor)
            .map(ConvexFunction)
            .map_err(value_err)
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.eval(&point(x)?).map_err(value_err)
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self.0.gradient(&point(x)?).map_err(value_err)?.into_vec())
    }

    fn subgradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .0
            .subgradient(&point(x)?)
            .map_err(value_err)?
            .into_vec())
    }

    fn prox(&self, gamma: f64, z: Vec<f64>) -> PyResult<Vec<f64>> {
        Ok(self
            .0
            .prox(gamma, &point(z)?)
            .map_err(value_err)?
            .into_vec())
    }

    fn lipschitz_grad(&self) -> Option<f64> {
        self.0.lipschitz_grad()
    }
}

/// Power-law schedule `alpha_n = s_a / (n+1)^b`, `inner_n = s_i / (n+1)^a`.
#[pyclass(module = "pyhalpern", from_py_object)]
#[derive(Clone)]
struct StepSchedule(halpern_sopt::StepSchedule);

#[pymethods]
impl StepSchedule {
    #[new]
    #[pyo3(signature = (a, b, scale_alpha = 1.0, scale_inner = 1.0))]
    fn new(a: f64, b: f64, scale_alpha: f64, scale_inner: f64) -> Self {
        StepSchedule(halpern_sopt::StepSchedule::new(
            a,
            b,
            scale_alpha,
            scale_inner,
        ))
    }

    /// `(alpha_n, inner_n)`.
    fn value(&self, n: u64) -> (f64, f64) {
        let v = self.0.value(n);
        (v.alpha, v.inner)
    }

    /// Human-readable reasons the schedule is inadmissible; empty if valid.
    fn violations(&self, algorithm: &str) -> PyResult<Vec<String>> {
        let alg: Algorithm = parse(algorithm)?;
        Ok(self
            .0
            .violations(alg)
            .iter()
            .map(ToString::to_string)
            .collect())
    }

    fn is_admissible(&self, algorithm: &str) -> PyResult<bool> {
        Ok(self.0.validate(parse(algorithm)?).is_ok())
    }
}

#[pyclass(module = "pyhalpern", from_py_object)]
#[derive(Clone)]
struct Problem(ProblemInstance);

#[pymethods]
impl Problem {
    #[staticmethod]
    #[pyo3(signature = (seed, d, i, k, objective = "quadratic"))]
    fn generate(seed: u64, d: usize, i: usize, k: usize, objective: &str) -> PyResult<Self> {
        let kind: ObjectiveKind = parse(objective)?;
        harness::generate_problem(seed, d, i, k, kind)
            .map(Problem)
            .map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        harness::problem_from_json(text)
            .map(Problem)
            .map_err(value_err)
    }

    fn to_json(&self) -> String {
        harness::problem_to_json(&self.0)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn operator(&self, i: usize) -> PyResult<Operator> {
        self.0
            .components()
            .get(i)
            .map(|c| Operator(c.operator.clone()))
            .ok_or_else(|| value_err(format!("component {i} out of range")))
    }

    fn objective(&self, i: usize) -> PyResult<ConvexFunction> {
        self.0
            .components()
            .get(i)
            .map(|c| ConvexFunction(c.objective.clone()))
            .ok_or_else(|| value_err(format!("component {i} out of range")))
    }

    fn residuals(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.residuals(&point(x)?).map_err(value_err)
    }

    fn metric_d(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.metric_d(&point(x)?).map_err(value_err)
    }

    fn metric_f(&self, x: Vec<f64>, dist: Vec<f64>) -> PyResult<f64> {
        self.0.metric_f(&point(x)?, &dist).map_err(value_err)
    }
}

/// Stationary law of a strictly positive row-stochastic matrix.
#[pyfunction]
fn stationary_distribution(transition: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    stationary(&transition).map_err(value_err)
}

fn sampler(
    kind: &str,
    count: usize,
    transition: Option<Vec<Vec<f64>>>,
    seed: u64,
) -> PyResult<SamplerSpec> {
    Ok(match parse::<SamplerKind>(kind)? {
        SamplerKind::Iid => SamplerSpec::UniformIid { count },
        SamplerKind::Greedy => SamplerSpec::GreedyMaxResidual { count },
        SamplerKind::Perm => SamplerSpec::PermutationCycle { count },
        SamplerKind::Markov => SamplerSpec::MarkovChain {
            transition: transition.unwrap_or_else(|| {
                random_transition_matrix(count, &mut ChaCha8Rng::seed_from_u64(seed))
            }),
        },
    })
}

fn trace_dict<'py>(py: Python<'py>, t: &RunTrace) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("n", t.records.iter().map(|r| r.n).collect::<Vec<_>>())?;
    out.set_item("d", t.d_series())?;
    out.set_item("f", t.f_series())?;
    out.set_item(
        "alpha",
        t.records.iter().map(|r| r.alpha).collect::<Vec<_>>(),
    )?;
    out.set_item(
        "inner",
        t.records.iter().map(|r| r.inner).collect::<Vec<_>>(),
    )?;
    out.set_item("d_crossing", t.events.d_crossing)?;
    out.set_item("f_delta_crossing", t.events.f_delta_crossing)?;
    out.set_item("final_x", t.final_x.as_slice().to_vec())?;
    Ok(out)
}

/// Single run of the gradient or proximal engine. A Markov sampler without
/// an explicit `transition` gets a random positive matrix seeded by `seed`.
#[pyfunction]
#[pyo3(signature = (
    problem, x0, schedule, algorithm = "proximal", sampler_kind = "iid", n_max = 1000,
    seed = 0, projected = true, transition = None, d_threshold = 1e-3, f_delta_threshold = 1e-5,
))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    problem: &Problem,
    x0: Vec<f64>,
    schedule: &StepSchedule,
    algorithm: &str,
    sampler_kind: &str,
    n_max: u64,
    seed: u64,
    projected: bool,
    transition: Option<Vec<Vec<f64>>>,
    d_threshold: f64,
    f_delta_threshold: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = RunOptions {
        algorithm: parse(algorithm)?,
        schedule: schedule.0,
        sampler: sampler(sampler_kind, problem.0.len(), transition, seed)?,
        stopping: StoppingRule {
            d_threshold,
            f_delta_threshold,
            n_max,
        },
        seed,
        projected,
    };
    let x0 = point(x0)?;
    let trace = py
        .detach(|| halpern_sopt::solver::run(&problem.0, x0, &opts))
        .map_err(value_err)?;
    trace_dict(py, &trace)
}

fn report_dict<'py>(py: Python<'py>, r: &EnsembleReport) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("n", r.rows.iter().map(|row| row.n).collect::<Vec<_>>())?;
    out.set_item("d", r.d_series())?;
    out.set_item("f", r.f_series())?;
    let events = PyDict::new(py);
    for e in &r.events {
        let ev = PyDict::new(py);
        ev.set_item("threshold", e.threshold)?;
        ev.set_item("n", e.n)?;
        ev.set_item("value", e.value)?;
        ev.set_item("runs_crossed", e.runs_crossed)?;
        ev.set_item("mean_run_n", e.mean_run_n)?;
        events.set_item(&e.event, ev)?;
    }
    out.set_item("events", events)?;
    out.set_item("run_seeds", r.metadata.run_seeds.clone())?;
    Ok(out)
}

/// Seeded ensemble from a TOML experiment config (the CLI `run` format).
#[pyfunction]
#[pyo3(signature = (config_toml, workers = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    config_toml: &str,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig::from_toml_str(config_toml).map_err(value_err)?;
    let report = py
        .detach(|| harness::run_experiment(&cfg, workers))
        .map_err(value_err)?;
    report_dict(py, &report)
}

#[pymodule]
fn pyhalpern(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Ball>()?;
    m.add_class::<Operator>()?;
    m.add_class::<ConvexFunction>()?;
    m.add_class::<StepSchedule>()?;
    m.add_class::<Problem>()?;
    m.add_function(wrap_pyfunction!(stationary_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
