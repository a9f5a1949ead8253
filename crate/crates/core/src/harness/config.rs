use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ObjectiveKind;
use crate::samplers::SamplerKind;
use crate::schedules::{Algorithm, StepSchedule};
use crate::solver::StoppingRule;

/// One experiment: a generated instance, an engine, a sampler and a step
/// schedule, replayed from `samplings` random starting points.
///
/// Stored as TOML, e.g.
///
/// ```toml
/// d = 64
/// I = 4
/// K = 3
/// objective = "quadratic"
/// algorithm = "gradient"
/// sampler = "iid"
/// samplings = 10
/// n_max = 1000
/// d_threshold = 1e-3
/// f_delta_threshold = 1e-5
/// master_seed = 42
///
/// [schedule]
/// a = 0.25
/// b = 0.5
/// scale_alpha = 1e-3
/// scale_inner = 1e-3
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub d: usize,
    #[serde(rename = "I")]
    pub components: usize,
    #[serde(rename = "K")]
    pub balls: usize,
    pub objective: ObjectiveKind,
    pub algorithm: Algorithm,
    pub sampler: SamplerKind,
    /// Seed of the random transition matrix for `sampler = "markov"`;
    /// derived from `master_seed` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub markov_seed: Option<u64>,
    pub schedule: StepSchedule,
    pub samplings: usize,
    pub n_max: u64,
    pub d_threshold: f64,
    pub f_delta_threshold: f64,
    pub master_seed: u64,
    /// Projected variant (`y_n` mapped back into the unit ball).
    #[serde(default = "default_projected")]
    pub projected: bool,
    /// Exponent pairs `(a, b)` swept by the `table` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_pairs: Option<Vec<(f64, f64)>>,
}

fn default_projected() -> bool {
    true
}

/// Default exponent pairs for the table grid, labelled A and B.
pub const DEFAULT_TABLE_PAIRS: [(f64, f64); 2] = [(0.25, 0.5), (0.125, 0.75)];

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn stopping(&self) -> StoppingRule {
        StoppingRule {
            d_threshold: self.d_threshold,
            f_delta_threshold: self.f_delta_threshold,
            n_max: self.n_max,
        }
    }

    pub fn table_pairs(&self) -> Vec<(f64, f64)> {
        self.table_pairs
            .clone()
            .unwrap_or_else(|| DEFAULT_TABLE_PAIRS.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.components == 0 || self.balls == 0 {
            return Err(Error::InvalidConfig(
                "d, I and K must all be at least 1".into(),
            ));
        }
        if self.samplings == 0 {
            return Err(Error::InvalidConfig("samplings must be at least 1".into()));
        }
        if self.algorithm == Algorithm::Gradient && self.objective != ObjectiveKind::Quadratic {
            return Err(Error::InvalidConfig(
                "the gradient algorithm requires the quadratic objective".into(),
            ));
        }
        if !(self.d_threshold > 0.0 && self.f_delta_threshold > 0.0) {
            return Err(Error::InvalidConfig("thresholds must be positive".into()));
        }
        self.schedule.validated(self.algorithm)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
d = 8
I = 2
K = 3
objective = "weighted_l1"
algorithm = "proximal"
sampler = "markov"
samplings = 3
n_max = 50
d_threshold = 1e-2
f_delta_threshold = 1e-5
master_seed = 9

[schedule]
a = 0.125
b = 0.75
scale_alpha = 1e-3
scale_inner = 1e-3
"#;

    #[test]
    fn parses_and_roundtrips() {
        let cfg = ExperimentConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.components, 2);
        assert_eq!(cfg.sampler, SamplerKind::Markov);
        assert!(cfg.projected);
        assert_eq!(cfg.table_pairs(), DEFAULT_TABLE_PAIRS.to_vec());
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rejects_incompatible_objective() {
        let bad = SAMPLE.replace("\"proximal\"", "\"gradient\"");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&bad),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn rejects_bad_schedule_and_sizes() {
        let bad = SAMPLE.replace("b = 0.75", "b = 0.9");
        assert!(matches!(
            ExperimentConfig::from_toml_str(&bad),
            Err(Error::InvalidSchedule { .. })
        ));
        let bad = SAMPLE.replace("samplings = 3", "samplings = 0");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
        let bad = SAMPLE.replace("K = 3", "K = 0");
        assert!(ExperimentConfig::from_toml_str(&bad).is_err());
        assert!(ExperimentConfig::from_toml_str(&format!("bogus = 1\n{SAMPLE}")).is_err());
    }
}
