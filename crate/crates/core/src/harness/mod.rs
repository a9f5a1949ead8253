//! Benchmark reproduction: random instances, seeded ensembles and output.

mod config;
mod experiment;
mod generate;
mod output;

pub use config::{ExperimentConfig, DEFAULT_TABLE_PAIRS};
pub use experiment::{
    average_traces, derive_seed, run_experiment, run_on_problem, sampler_spec, EnsembleReport,
    EnsembleRow, EventSummary, ReportMetadata, EVENT_D, EVENT_F, EVENT_TERMINAL,
};
pub use generate::generate_problem;
pub use output::{
    emit_csv, fmt_num, render_table, table_label, write_summary, write_trace, TableRow, META_FILE,
    SUMMARY_FILE, SUMMARY_HEADER, TRACE_FILE, TRACE_HEADER,
};

use crate::error::{Error, Result};
use crate::samplers::SamplerKind;
use crate::schedules::StepSchedule;
use crate::solver::ProblemInstance;

/// Runs the sampler x exponent-pair grid of `base` and returns the reports
/// with their table labels, samplers outermost.
pub fn run_table_grid(
    base: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<Vec<(String, EnsembleReport)>> {
    let mut out = Vec::new();
    for sampler in SamplerKind::ALL {
        for (i, (a, b)) in base.table_pairs().into_iter().enumerate() {
            let cfg = ExperimentConfig {
                sampler,
                schedule: StepSchedule {
                    a,
                    b,
                    ..base.schedule
                },
                ..base.clone()
            };
            let report = run_experiment(&cfg, workers)?;
            out.push((table_label(cfg.algorithm, sampler.label(), i), report));
        }
    }
    Ok(out)
}

/// Writes a problem instance as pretty JSON. Floats are written in
/// shortest round-trip form, so reading the file back is lossless.
pub fn save_problem(problem: &ProblemInstance, path: impl AsRef<std::path::Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    serde_json::to_writer_pretty(file, &ProblemFile::from(problem))?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<std::path::Path>) -> Result<ProblemInstance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    problem_from_json(&text)
}

pub fn problem_to_json(problem: &ProblemInstance) -> String {
    serde_json::to_string_pretty(&ProblemFile::from(problem)).expect("problem serializes")
}

pub fn problem_from_json(text: &str) -> Result<ProblemInstance> {
    let file: ProblemFile = serde_json::from_str(text)?;
    file.problem.validate()?;
    if file.problem.dim() != file.d || file.problem.len() != file.components {
        return Err(Error::InvalidProblem(
            "header sizes disagree with the instance body".into(),
        ));
    }
    if file.problem.objective_kind() != file.objective {
        return Err(Error::InvalidProblem(
            "header objective disagrees with body".into(),
        ));
    }
    Ok(file.problem)
}

/// Self-describing instance file: a small header followed by the full
/// instance.
#[derive(serde::Serialize, serde::Deserialize)]
struct ProblemFile {
    d: usize,
    #[serde(rename = "I")]
    components: usize,
    /// Largest number of inner balls of any operator.
    #[serde(rename = "K")]
    balls: usize,
    objective: crate::functions::ObjectiveKind,
    #[serde(flatten)]
    problem: ProblemInstance,
}

impl From<&ProblemInstance> for ProblemFile {
    fn from(p: &ProblemInstance) -> Self {
        let balls = p
            .components()
            .iter()
            .map(|c| match &c.operator {
                crate::operators::OperatorExpr::GcfsComposite { inner, .. } => inner.len(),
                _ => 0,
            })
            .max()
            .unwrap_or(0);
        ProblemFile {
            d: p.dim(),
            components: p.len(),
            balls,
            objective: p.objective_kind(),
            problem: p.clone(),
        }
    }
}
