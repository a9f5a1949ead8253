use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::generate::generate_problem;
use crate::point::Point;
use crate::samplers::{random_transition_matrix, SamplerKind, SamplerSpec};
use crate::solver::{self, CrossingEvents, FDistribution, ProblemInstance, RunOptions, RunTrace};

/// SplitMix64 finalizer over `(master, stream)`; gives independent,
/// reproducible per-run seeds.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const MARKOV_STREAM: u64 = u64::MAX;

/// Builds the `SamplerSpec` for `cfg`, generating the Markov
/// transition matrix when needed.
pub fn sampler_spec(cfg: &ExperimentConfig) -> SamplerSpec {
    let count = cfg.components;
    match cfg.sampler {
        SamplerKind::Iid => SamplerSpec::UniformIid { count },
        SamplerKind::Greedy => SamplerSpec::GreedyMaxResidual { count },
        SamplerKind::Perm => SamplerSpec::PermutationCycle { count },
        SamplerKind::Markov => {
            let seed = cfg
                .markov_seed
                .unwrap_or_else(|| derive_seed(cfg.master_seed, MARKOV_STREAM));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            SamplerSpec::MarkovChain {
                transition: random_transition_matrix(count, &mut rng),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub n: u64,
    pub d: f64,
    pub f: f64,
    pub alpha: f64,
    pub inner: f64,
    pub time_s: f64,
    /// Per-component residuals averaged over the ensemble.
    pub residuals: Vec<f64>,
}

/// One column group of the result tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSummary {
    pub event: String,
    pub threshold: Option<f64>,
    /// First `n` at which the averaged series meets the event.
    pub n: Option<u64>,
    pub time_s: Option<f64>,
    /// `D_n` for the residual event, `F_n` otherwise.
    pub value: Option<f64>,
    /// Number of individual runs that met the event.
    pub runs_crossed: usize,
    /// Mean over those runs of their own first crossing.
    pub mean_run_n: Option<f64>,
    pub mean_run_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config: ExperimentConfig,
    pub f_distribution: FDistribution,
    pub problem_seed: u64,
    pub run_seeds: Vec<u64>,
    pub crossing_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub rows: Vec<EnsembleRow>,
    pub events: Vec<EventSummary>,
    pub metadata: ReportMetadata,
}

impl EnsembleReport {
    pub fn d_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d).collect()
    }

    pub fn f_series(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.f).collect()
    }

    pub fn event(&self, name: &str) -> Option<&EventSummary> {
        self.events.iter().find(|e| e.event == name)
    }
}

pub const EVENT_D: &str = "d_crossing";
pub const EVENT_F: &str = "f_delta_crossing";
pub const EVENT_TERMINAL: &str = "terminal";

/// Starting point drawn uniformly from `[-1, 1]^d`.
fn random_start<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Point {
    Point::new((0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
        .expect("finite coordinates")
}

/// Runs `cfg.samplings` independent runs on one generated instance and
/// averages their traces pointwise in `n`.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<EnsembleReport> {
    cfg.validate()?;
    let problem = generate_problem(
        cfg.master_seed,
        cfg.d,
        cfg.components,
        cfg.balls,
        cfg.objective,
    )?;
    run_on_problem(cfg, &problem, workers)
}

/// Like [`run_experiment`] but on a caller-supplied instance.
pub fn run_on_problem(
    cfg: &ExperimentConfig,
    problem: &ProblemInstance,
    workers: Option<usize>,
) -> Result<EnsembleReport> {
    cfg.validate()?;
    if problem.dim() != cfg.d || problem.len() != cfg.components {
        return Err(Error::InvalidConfig(format!(
            "instance has d = {}, I = {} but config says d = {}, I = {}",
            problem.dim(),
            problem.len(),
            cfg.d,
            cfg.components
        )));
    }
    if problem.objective_kind() != cfg.objective {
        return Err(Error::InvalidConfig(
            "instance objective differs from config".into(),
        ));
    }
    let spec = sampler_spec(cfg);
    let run_seeds: Vec<u64> = (0..cfg.samplings as u64)
        .map(|s| derive_seed(cfg.master_seed, s))
        .collect();

    let one = |seed: &u64| -> Result<RunTrace> {
        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
        let x0 = random_start(cfg.d, &mut rng);
        let opts = RunOptions {
            algorithm: cfg.algorithm,
            schedule: cfg.schedule,
            sampler: spec.clone(),
            stopping: cfg.stopping(),
            seed: rng.next_u64(),
            projected: cfg.projected,
        };
        solver::run(problem, x0, &opts)
    };
    let traces: Vec<RunTrace> = match workers {
        Some(1) => run_seeds.iter().map(one).collect::<Result<_>>()?,
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(|| run_seeds.par_iter().map(one).collect::<Result<_>>())?,
        None => run_seeds.par_iter().map(one).collect::<Result<_>>()?,
    };

    let f_distribution = traces[0].f_distribution;
    Ok(EnsembleReport {
        rows: average_traces(&traces),
        events: summarize(&traces, cfg),
        metadata: ReportMetadata {
            config: cfg.clone(),
            f_distribution,
            problem_seed: cfg.master_seed,
            run_seeds,
            crossing_note: "n/time/value come from the ensemble-averaged series; \
                            mean_run_* average each run's own first crossing over the runs that crossed"
                .into(),
        },
    })
}

/// Pointwise mean in `n`. Traces are summed in run order, so the result
/// does not depend on which worker finished first.
pub fn average_traces(traces: &[RunTrace]) -> Vec<EnsembleRow> {
    let k = traces.len() as f64;
    let len = traces[0].records.len();
    let comps = traces[0].records[0].residuals.len();
    (0..len)
        .map(|i| {
            let first = &traces[0].records[i];
            let mut row = EnsembleRow {
                n: first.n,
                d: 0.0,
                f: 0.0,
                alpha: first.alpha,
                inner: first.inner,
                time_s: 0.0,
                residuals: vec![0.0; comps],
            };
            for t in traces {
                let r = &t.records[i];
                row.d += r.d;
                row.f += r.f;
                row.time_s += r.elapsed_s;
                for (acc, v) in row.residuals.iter_mut().zip(&r.residuals) {
                    *acc += v;
                }
            }
            row.d /= k;
            row.f /= k;
            row.time_s /= k;
            row.residuals.iter_mut().for_each(|v| *v /= k);
            row
        })
        .collect()
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, c) = v.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (c > 0).then(|| s / c as f64)
}

fn summarize(traces: &[RunTrace], cfg: &ExperimentConfig) -> Vec<EventSummary> {
    let rows = average_traces(traces);
    let d: Vec<f64> = rows.iter().map(|r| r.d).collect();
    let f: Vec<f64> = rows.iter().map(|r| r.f).collect();
    let series = CrossingEvents::detect(&d, &f, &cfg.stopping());

    let per_run = |pick: fn(&CrossingEvents) -> Option<u64>| {
        let hits: Vec<(u64, f64)> = traces
            .iter()
            .filter_map(|t| pick(&t.events).map(|n| (n, t.records[n as usize].elapsed_s)))
            .collect();
        (
            hits.len(),
            mean(hits.iter().map(|h| h.0 as f64)),
            mean(hits.iter().map(|h| h.1)),
        )
    };

    let block = |event: &str,
                 threshold: Option<f64>,
                 n: Option<u64>,
                 value: fn(&EnsembleRow) -> f64,
                 pick: fn(&CrossingEvents) -> Option<u64>| {
        let (runs_crossed, mean_run_n, mean_run_time_s) = per_run(pick);
        let row = n.map(|n| &rows[n as usize]);
        EventSummary {
            event: event.to_string(),
            threshold,
            n,
            time_s: row.map(|r| r.time_s),
            value: row.map(value),
            runs_crossed,
            mean_run_n,
            mean_run_time_s,
        }
    };

    vec![
        block(
            EVENT_D,
            Some(cfg.d_threshold),
            series.d_crossing,
            |r| r.d,
            |e| e.d_crossing,
        ),
        block(
            EVENT_F,
            Some(cfg.f_delta_threshold),
            series.f_delta_crossing,
            |r| r.f,
            |e| e.f_delta_crossing,
        ),
        block(
            EVENT_TERMINAL,
            None,
            Some(series.terminal),
            |r| r.f,
            |e| Some(e.terminal),
        ),
    ]
}
