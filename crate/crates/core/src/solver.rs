//! Halpern-anchored stochastic engines.
//!
//! Both engines share the update
//!
//! ```text
//! y_n     = T_w( S_n(x_n) )            (optionally followed by P_C)
//! x_{n+1} = alpha_n x_0 + (1 - alpha_n) y_n
//! ```
//!
//! where `S_n` is a subgradient step `x - lambda_n g_w(x)` for the gradient
//! engine and the proximity operator `Prox_{gamma_n f_w}` for the proximal
//! engine.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{ConvexFunction, ObjectiveKind};
use crate::operators::{Ball, OperatorExpr};
use crate::point::Point;
use crate::samplers::{Sampler, SamplerSpec};
use crate::schedules::{Algorithm, StepSchedule, StepSizes, ValidSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub objective: ConvexFunction,
    pub operator: OperatorExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    dim: usize,
    components: Vec<Component>,
    bounding_ball: Ball,
}

impl ProblemInstance {
    pub fn new(dim: usize, components: Vec<Component>, bounding_ball: Ball) -> Result<Self> {
        let p = ProblemInstance {
            dim,
            components,
            bounding_ball,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidProblem("dimension must be >= 1".into()));
        }
        let Some(first) = self.components.first() else {
            return Err(Error::InvalidProblem(
                "at least one component is required".into(),
            ));
        };
        let kind = first.objective.kind();
        let mismatch = |actual| Error::DimensionMismatch {
            expected: self.dim,
            actual,
        };
        if self.bounding_ball.dim() != self.dim {
            return Err(mismatch(self.bounding_ball.dim()));
        }
        for (i, c) in self.components.iter().enumerate() {
            if c.objective.dim() != self.dim {
                return Err(mismatch(c.objective.dim()));
            }
            if c.objective.kind() != kind {
                return Err(Error::InvalidProblem(format!(
                    "component {i} is {} but component 0 is {kind}",
                    c.objective.kind()
                )));
            }
            c.operator.validate()?;
            if let Some(d) = c.operator.dim() {
                if d != self.dim {
                    return Err(mismatch(d));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn bounding_ball(&self) -> &Ball {
        &self.bounding_ball
    }

    pub fn objective_kind(&self) -> ObjectiveKind {
        self.components[0].objective.kind()
    }

    /// `||x - T_i(x)||` for every component.
    pub fn residuals(&self, x: &Point) -> Result<Vec<f64>> {
        x.check_dim(self.dim)?;
        self.components
            .iter()
            .map(|c| c.operator.residual(x))
            .collect()
    }

    /// Summed fixed-point residual `sum_i ||x - T_i(x)||`.
    pub fn metric_d(&self, x: &Point) -> Result<f64> {
        Ok(self.residuals(x)?.iter().sum())
    }

    /// Expected objective `sum_i dist_i f_i(x)`.
    pub fn metric_f(&self, x: &Point, dist: &[f64]) -> Result<f64> {
        check_distribution(dist, self.len())?;
        self.components
            .iter()
            .zip(dist)
            .map(|(c, w)| Ok(w * c.objective.eval(x)?))
            .sum()
    }
}

fn check_distribution(dist: &[f64], len: usize) -> Result<()> {
    if dist.len() != len {
        return Err(Error::InvalidDistribution(format!(
            "expected {len} weights, got {}",
            dist.len()
        )));
    }
    if dist.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
        return Err(Error::InvalidDistribution(
            "weights must be nonnegative".into(),
        ));
    }
    let s: f64 = dist.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!("weights sum to {s}")));
    }
    Ok(())
}

/// Iterate `x_n` together with its fixed anchor `x_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    n: u64,
    anchor: Point,
    x: Point,
}

impl SolverState {
    pub fn new(x0: Point) -> Self {
        SolverState {
            n: 0,
            x: x0.clone(),
            anchor: x0,
        }
    }

    /// Resumes from an arbitrary iterate with anchor `x0`.
    pub fn with_iterate(n: u64, x0: Point, x: Point) -> Result<Self> {
        x.check_dim(x0.dim())?;
        Ok(SolverState { n, anchor: x0, x })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn anchor(&self) -> &Point {
        &self.anchor
    }

    pub fn x(&self) -> &Point {
        &self.x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub index: usize,
    pub y: Point,
    pub sizes: StepSizes,
}

fn step(
    algorithm: Algorithm,
    state: &mut SolverState,
    problem: &ProblemInstance,
    sampler: &mut Sampler,
    schedule: &ValidSchedule,
    projected: bool,
    residuals: Option<&[f64]>,
) -> Result<StepOutcome> {
    if !schedule.admits(algorithm) {
        let violations = schedule.schedule().violations(algorithm);
        return Err(Error::InvalidSchedule {
            algorithm,
            violations,
        });
    }
    state.x.check_dim(problem.dim)?;
    if sampler.count() != problem.len() {
        return Err(Error::InvalidSampler(format!(
            "sampler draws from {} components, problem has {}",
            sampler.count(),
            problem.len()
        )));
    }
    let owned;
    let residuals = match residuals {
        Some(r) => Some(r),
        None if sampler.spec().needs_residuals() => {
            owned = problem.residuals(&state.x)?;
            Some(owned.as_slice())
        }
        None => None,
    };
    let index = sampler.next_index(residuals)?;
    let sizes = schedule.value(state.n);
    let component = &problem.components[index];
    let z = match algorithm {
        Algorithm::Gradient => {
            if !component.objective.is_smooth() {
                return Err(Error::NonSmooth);
            }
            let g = component.objective.subgradient(&state.x)?;
            state.x.add_scaled(-sizes.inner, &g)
        }
        Algorithm::Proximal => component.objective.prox(sizes.inner, &state.x)?,
    };
    let mut y = component.operator.apply(&z)?;
    if projected {
        y = problem.bounding_ball.project_unchecked(&y);
    }
    state.x = state.anchor.convex_combination(sizes.alpha, &y);
    state.n += 1;
    Ok(StepOutcome { index, y, sizes })
}

/// One iteration of the stochastic gradient engine.
pub fn step_gradient(
    state: &mut SolverState,
    problem: &ProblemInstance,
    sampler: &mut Sampler,
    schedule: &ValidSchedule,
    projected: bool,
) -> Result<StepOutcome> {
    step(
        Algorithm::Gradient,
        state,
        problem,
        sampler,
        schedule,
        projected,
        None,
    )
}

/// One iteration of the stochastic proximal engine.
pub fn step_proximal(
    state: &mut SolverState,
    problem: &ProblemInstance,
    sampler: &mut Sampler,
    schedule: &ValidSchedule,
    projected: bool,
) -> Result<StepOutcome> {
    step(
        Algorithm::Proximal,
        state,
        problem,
        sampler,
        schedule,
        projected,
        None,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub d_threshold: f64,
    pub f_delta_threshold: f64,
    pub n_max: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            d_threshold: 1e-3,
            f_delta_threshold: 1e-5,
            n_max: 1000,
        }
    }
}

/// Which law weights the components in `F_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FDistribution {
    Uniform,
    MarkovStationary,
    /// Greedy sampling has no marginal law; the uniform average is used.
    UniformFallback,
}

impl FDistribution {
    pub fn resolve(spec: &SamplerSpec) -> Result<(FDistribution, Vec<f64>)> {
        let uniform = || vec![1.0 / spec.count() as f64; spec.count()];
        Ok(match spec.marginal_distribution()? {
            None => (FDistribution::UniformFallback, uniform()),
            Some(d) if matches!(spec, SamplerSpec::MarkovChain { .. }) => {
                (FDistribution::MarkovStationary, d)
            }
            Some(d) => (FDistribution::Uniform, d),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    pub schedule: StepSchedule,
    pub sampler: SamplerSpec,
    pub stopping: StoppingRule,
    pub seed: u64,
    pub projected: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub n: u64,
    pub d: f64,
    pub f: f64,
    /// Step sizes used to leave `x_n`.
    pub alpha: f64,
    pub inner: f64,
    pub elapsed_s: f64,
    pub residuals: Vec<f64>,
}

/// First crossings of the stopping thresholds along a trace.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CrossingEvents {
    pub d_crossing: Option<u64>,
    pub f_delta_crossing: Option<u64>,
    pub terminal: u64,
}

impl CrossingEvents {
    pub fn detect(d: &[f64], f: &[f64], rule: &StoppingRule) -> Self {
        let d_crossing = d
            .iter()
            .position(|&v| v <= rule.d_threshold)
            .map(|n| n as u64);
        let f_delta_crossing = f
            .windows(2)
            .position(|w| (w[1] - w[0]).abs() <= rule.f_delta_threshold)
            .map(|n| n as u64 + 1);
        CrossingEvents {
            d_crossing,
            f_delta_crossing,
            terminal: d.len().saturating_sub(1) as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub events: CrossingEvents,
    pub f_distribution: FDistribution,
    pub final_x: Point,
}

impl RunTrace {
    pub fn d_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.d).collect()
    }

    pub fn f_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.f).collect()
    }
}

/// Runs an engine from `x0` for `stopping.n_max` iterations, recording
/// `D_n` and `F_n` at every iterate. Threshold crossings are recorded but do
/// not stop the run.
pub fn run(problem: &ProblemInstance, x0: Point, opts: &RunOptions) -> Result<RunTrace> {
    problem.validate()?;
    x0.check_dim(problem.dim)?;
    let schedule = opts.schedule.validated(opts.algorithm)?;
    let mut sampler = Sampler::new(opts.sampler.clone(), opts.seed)?;
    let (f_distribution, dist) = FDistribution::resolve(&opts.sampler)?;

    let start = Instant::now();
    let mut state = SolverState::new(x0);
    let mut records = Vec::with_capacity(opts.stopping.n_max as usize + 1);
    loop {
        let residuals = problem.residuals(&state.x)?;
        let n = state.n;
        let sizes = schedule.value(n);
        records.push(TraceRecord {
            n,
            d: residuals.iter().sum(),
            f: problem.metric_f(&state.x, &dist)?,
            alpha: sizes.alpha,
            inner: sizes.inner,
            elapsed_s: start.elapsed().as_secs_f64(),
            residuals: residuals.clone(),
        });
        if n >= opts.stopping.n_max {
            break;
        }
        step(
            opts.algorithm,
            &mut state,
            problem,
            &mut sampler,
            &schedule,
            opts.projected,
            Some(&residuals),
        )?;
    }

    let d: Vec<f64> = records.iter().map(|r| r.d).collect();
    let f: Vec<f64> = records.iter().map(|r| r.f).collect();
    Ok(RunTrace {
        events: CrossingEvents::detect(&d, &f, &opts.stopping),
        records,
        f_distribution,
        final_x: state.x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[f64]) -> Point {
        Point::new(v.to_vec()).unwrap()
    }

    fn single(objective: ConvexFunction, operator: OperatorExpr) -> ProblemInstance {
        let dim = objective.dim();
        ProblemInstance::new(
            dim,
            vec![Component {
                objective,
                operator,
            }],
            Ball::unit(dim),
        )
        .unwrap()
    }

    /// A schedule whose first step sizes are `alpha_0 = 0.5`, `inner_0 = s`.
    fn first_step(algorithm: Algorithm, inner: f64) -> ValidSchedule {
        StepSchedule::new(0.25, 0.5, 0.5, inner)
            .validated(algorithm)
            .unwrap()
    }

    fn iid(count: usize) -> Sampler {
        Sampler::new(SamplerSpec::UniformIid { count }, 0).unwrap()
    }

    #[test]
    fn gradient_step_by_hand() {
        let f = ConvexFunction::diag_quadratic(vec![1.0], vec![0.0]).unwrap();
        let prob = single(f, OperatorExpr::Identity);
        let mut st = SolverState::new(p(&[1.0]));
        let out = step_gradient(
            &mut st,
            &prob,
            &mut iid(1),
            &first_step(Algorithm::Gradient, 0.5),
            false,
        )
        .unwrap();
        assert_eq!(out.y, p(&[0.5]));
        assert_eq!(st.x(), &p(&[0.75]));
        assert_eq!(st.n(), 1);
        assert_eq!(st.anchor(), &p(&[1.0]));
    }

    #[test]
    fn zero_objective_is_plain_halpern() {
        let op = OperatorExpr::ball_projection(Ball::unit(2));
        let prob = single(ConvexFunction::zero(2), op.clone());
        let x0 = p(&[3.0, -1.0]);
        let mut st = SolverState::new(x0.clone());
        let sched = StepSchedule::with_scale(0.25, 0.5, 0.3)
            .validated(Algorithm::Gradient)
            .unwrap();
        let mut sampler = iid(1);
        let mut expected = x0.clone();
        for n in 0..20 {
            let alpha = sched.value(n).alpha;
            expected = x0.convex_combination(alpha, &op.apply(&expected).unwrap());
            step_gradient(&mut st, &prob, &mut sampler, &sched, false).unwrap();
            assert!(st.x().distance(&expected) < 1e-15);
        }
    }

    #[test]
    fn fixed_point_case() {
        // Minimum of 1/2||x||^2 at the origin, which every operator fixes.
        let f = ConvexFunction::diag_quadratic(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let prob = single(f, OperatorExpr::ball_projection(Ball::unit(2)));
        let x0 = p(&[0.5, 0.5]);
        let mut st = SolverState::with_iterate(3, x0.clone(), Point::zeros(2)).unwrap();
        let sched = first_step(Algorithm::Gradient, 0.1);
        let out = step_gradient(&mut st, &prob, &mut iid(1), &sched, false).unwrap();
        assert_eq!(out.y, Point::zeros(2));
        let alpha = sched.value(3).alpha;
        assert_eq!(st.x(), &x0.convex_combination(alpha, &Point::zeros(2)));
    }

    #[test]
    fn gradient_rejects_nonsmooth() {
        let f = ConvexFunction::weighted_l1(vec![1.0], vec![0.0]).unwrap();
        let prob = single(f, OperatorExpr::Identity);
        let mut st = SolverState::new(p(&[1.0]));
        let err = step_gradient(
            &mut st,
            &prob,
            &mut iid(1),
            &first_step(Algorithm::Gradient, 0.5),
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonSmooth));
    }

    #[test]
    fn proximal_requires_proximal_schedule() {
        let f = ConvexFunction::weighted_l1(vec![1.0], vec![0.0]).unwrap();
        let prob = single(f, OperatorExpr::Identity);
        let mut st = SolverState::new(p(&[1.0]));
        let err = step_proximal(
            &mut st,
            &prob,
            &mut iid(1),
            &first_step(Algorithm::Gradient, 0.5),
            false,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidSchedule { .. }));
    }

    #[test]
    fn proximal_step_by_hand() {
        let f = ConvexFunction::weighted_l1(vec![1.0], vec![0.0]).unwrap();
        let prob = single(f, OperatorExpr::Identity);
        let mut st = SolverState::new(p(&[3.0]));
        let out = step_proximal(
            &mut st,
            &prob,
            &mut iid(1),
            &first_step(Algorithm::Proximal, 1.0),
            false,
        )
        .unwrap();
        assert_eq!(out.y, p(&[2.0]));
        assert_eq!(st.x(), &p(&[2.5]));
    }

    #[test]
    fn proximal_at_anchor_point() {
        let f = ConvexFunction::weighted_l1(vec![2.0, 1.0], vec![0.3, -0.4]).unwrap();
        let prob = single(f, OperatorExpr::Identity);
        let x0 = p(&[1.0, 1.0]);
        let a = p(&[0.3, -0.4]);
        let mut st = SolverState::with_iterate(0, x0.clone(), a.clone()).unwrap();
        let out = step_proximal(
            &mut st,
            &prob,
            &mut iid(1),
            &first_step(Algorithm::Proximal, 0.7),
            false,
        )
        .unwrap();
        assert_eq!(out.y, a);
        assert_eq!(st.x(), &x0.convex_combination(0.5, &a));
    }

    #[test]
    fn tiny_prox_parameter_reduces_to_operator() {
        let f = ConvexFunction::weighted_l1(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let op = OperatorExpr::gcfs(Ball::unit(2), vec![Ball::new(p(&[0.5, 0.5]), 0.2).unwrap()])
            .unwrap();
        let prob = single(f, op.clone());
        let x = p(&[0.9, -0.3]);
        let mut st = SolverState::new(x.clone());
        let sched = StepSchedule::new(0.25, 0.5, 0.5, 1e-12)
            .validated(Algorithm::Proximal)
            .unwrap();
        let out = step_proximal(&mut st, &prob, &mut iid(1), &sched, false).unwrap();
        assert!(out.y.distance(&op.apply(&x).unwrap()) <= 1e-9);
    }

    #[test]
    fn projected_variant_stays_in_ball() {
        let f = ConvexFunction::diag_quadratic(vec![0.0], vec![-5.0]).unwrap();
        let prob = single(f, OperatorExpr::Identity);
        let mut st = SolverState::new(p(&[0.9]));
        let sched = StepSchedule::with_scale(0.25, 0.5, 1.0)
            .validated(Algorithm::Gradient)
            .unwrap();
        let out = step_gradient(&mut st, &prob, &mut iid(1), &sched, true).unwrap();
        assert_eq!(out.y, p(&[1.0]));
    }

    #[test]
    fn metric_examples() {
        let op = OperatorExpr::gcfs(Ball::unit(2), vec![Ball::new(p(&[3.0, 0.0]), 1.0).unwrap()])
            .unwrap();
        let prob = single(ConvexFunction::zero(2), op);
        assert!((prob.metric_d(&Point::zeros(2)).unwrap() - 0.5).abs() < 1e-15);

        let f1 = ConvexFunction::diag_quadratic(vec![0.0], vec![3.0]).unwrap();
        let f2 = ConvexFunction::diag_quadratic(vec![0.0], vec![6.0]).unwrap();
        let prob = ProblemInstance::new(
            1,
            vec![
                Component {
                    objective: f1.clone(),
                    operator: OperatorExpr::Identity,
                },
                Component {
                    objective: f2,
                    operator: OperatorExpr::Identity,
                },
            ],
            Ball::unit(1),
        )
        .unwrap();
        let x = p(&[1.0]);
        assert!((prob.metric_f(&x, &[1.0 / 3.0, 2.0 / 3.0]).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(
            prob.metric_f(&x, &[1.0, 0.0]).unwrap(),
            f1.eval(&x).unwrap()
        );
        assert_eq!(prob.metric_d(&x).unwrap(), 0.0);
        assert!(prob.metric_f(&x, &[0.5]).is_err());
        assert!(prob.metric_f(&x, &[0.7, 0.7]).is_err());
        assert!(prob.metric_f(&x, &[1.5, -0.5]).is_err());
    }

    #[test]
    fn problem_validation() {
        let q = ConvexFunction::zero(2);
        let l = ConvexFunction::weighted_l1(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap();
        let mixed = ProblemInstance::new(
            2,
            vec![
                Component {
                    objective: q.clone(),
                    operator: OperatorExpr::Identity,
                },
                Component {
                    objective: l,
                    operator: OperatorExpr::Identity,
                },
            ],
            Ball::unit(2),
        );
        assert!(matches!(mixed, Err(Error::InvalidProblem(_))));
        let wrong_dim = ProblemInstance::new(
            2,
            vec![Component {
                objective: q,
                operator: OperatorExpr::ball_projection(Ball::unit(3)),
            }],
            Ball::unit(2),
        );
        assert!(matches!(wrong_dim, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn crossing_detection() {
        let rule = StoppingRule {
            d_threshold: 0.1,
            f_delta_threshold: 0.01,
            n_max: 4,
        };
        let ev = CrossingEvents::detect(
            &[1.0, 0.5, 0.1, 0.05, 0.2],
            &[3.0, 2.0, 1.995, 1.0, 0.0],
            &rule,
        );
        assert_eq!(ev.d_crossing, Some(2));
        assert_eq!(ev.f_delta_crossing, Some(2));
        assert_eq!(ev.terminal, 4);
        let ev = CrossingEvents::detect(&[1.0], &[1.0], &rule);
        assert_eq!(
            (ev.d_crossing, ev.f_delta_crossing, ev.terminal),
            (None, None, 0)
        );
    }
}
