//! Index sequences `(w_n)` choosing which component acts at each step.
//!
//! Indices are zero-based throughout the library; the CLI tables label
//! sampler conditions, never individual indices.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Configuration name of a sampling regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Iid,
    Greedy,
    Perm,
    Markov,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 4] = [
        SamplerKind::Iid,
        SamplerKind::Greedy,
        SamplerKind::Perm,
        SamplerKind::Markov,
    ];

    /// Roman-numeral label used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            SamplerKind::Iid => "I",
            SamplerKind::Greedy => "II",
            SamplerKind::Perm => "III",
            SamplerKind::Markov => "IV",
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplerKind::Iid => "iid",
            SamplerKind::Greedy => "greedy",
            SamplerKind::Perm => "perm",
            SamplerKind::Markov => "markov",
        })
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" => Ok(SamplerKind::Iid),
            "greedy" => Ok(SamplerKind::Greedy),
            "perm" => Ok(SamplerKind::Perm),
            "markov" => Ok(SamplerKind::Markov),
            other => Err(Error::InvalidConfig(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplerSpec {
    UniformIid {
        count: usize,
    },
    /// Picks the component whose fixed point set is farthest from the
    /// current iterate; ties go to the smallest index.
    GreedyMaxResidual {
        count: usize,
    },
    /// A fresh uniform permutation of all indices every `count` draws.
    PermutationCycle {
        count: usize,
    },
    /// Chain started in state 0 with a strictly positive row-stochastic
    /// transition matrix.
    MarkovChain {
        transition: Vec<Vec<f64>>,
    },
}

const ROW_SUM_TOL: f64 = 1e-12;

impl SamplerSpec {
    pub fn count(&self) -> usize {
        match self {
            SamplerSpec::UniformIid { count }
            | SamplerSpec::GreedyMaxResidual { count }
            | SamplerSpec::PermutationCycle { count } => *count,
            SamplerSpec::MarkovChain { transition } => transition.len(),
        }
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            SamplerSpec::UniformIid { .. } => SamplerKind::Iid,
            SamplerSpec::GreedyMaxResidual { .. } => SamplerKind::Greedy,
            SamplerSpec::PermutationCycle { .. } => SamplerKind::Perm,
            SamplerSpec::MarkovChain { .. } => SamplerKind::Markov,
        }
    }

    pub fn needs_residuals(&self) -> bool {
        matches!(self, SamplerSpec::GreedyMaxResidual { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.count() == 0 {
            return Err(Error::InvalidSampler("component count must be >= 1".into()));
        }
        if let SamplerSpec::MarkovChain { transition } = self {
            check_transition_matrix(transition)?;
        }
        Ok(())
    }

    /// Long-run marginal law of the emitted indices; `None` for the greedy
    /// rule, whose choice depends on the iterate.
    pub fn marginal_distribution(&self) -> Result<Option<Vec<f64>>> {
        self.validate()?;
        Ok(match self {
            SamplerSpec::UniformIid { count } | SamplerSpec::PermutationCycle { count } => {
                Some(vec![1.0 / *count as f64; *count])
            }
            SamplerSpec::GreedyMaxResidual { .. } => None,
            SamplerSpec::MarkovChain { transition } => Some(stationary_distribution(transition)?),
        })
    }
}

pub(crate) fn check_transition_matrix(p: &[Vec<f64>]) -> Result<()> {
    let n = p.len();
    if n == 0 {
        return Err(Error::InvalidTransitionMatrix("matrix is empty".into()));
    }
    for (i, row) in p.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidTransitionMatrix(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidTransitionMatrix(format!(
                "entry ({i}, {j}) = {} is not strictly positive",
                row[j]
            )));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidTransitionMatrix(format!(
                "row {i} sums to {s}"
            )));
        }
    }
    Ok(())
}

/// Stationary law `pi P = pi` of a strictly positive row-stochastic matrix,
/// obtained from the linear system `(P^T - I) pi = 0`, `sum pi = 1`.
pub fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_transition_matrix(p)?;
    let n = p.len();
    // Replace the last balance equation (redundant) with normalization.
    let mut a = DMatrix::from_fn(n, n, |i, j| p[j][i] - if i == j { 1.0 } else { 0.0 });
    let mut rhs = DVector::zeros(n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    rhs[n - 1] = 1.0;
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidTransitionMatrix("singular balance system".into()))?;
    let mut pi: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Ok(pi)
}

/// Random positive transition matrix: i.i.d. `U(0,1) + 0.1` entries with
/// rows normalized.
pub fn random_transition_matrix<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| {
            let mut row: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 0.1).collect();
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect()
}

/// Mutable sampling state; one per run.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: SamplerSpec,
    rng: ChaCha8Rng,
    permutation: Vec<usize>,
    cursor: usize,
    current: usize,
    /// Cumulative rows of the Markov transition matrix.
    cumulative: Vec<Vec<f64>>,
}

impl Sampler {
    pub fn new(spec: SamplerSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let count = spec.count();
        let cumulative = match &spec {
            SamplerSpec::MarkovChain { transition } => transition
                .iter()
                .map(|row| {
                    row.iter()
                        .scan(0.0, |acc, v| {
                            *acc += v;
                            Some(*acc)
                        })
                        .collect()
                })
                .collect(),
            _ => Vec::new(),
        };
        Ok(Sampler {
            spec,
            rng: ChaCha8Rng::seed_from_u64(seed),
            permutation: (0..count).collect(),
            // Forces a shuffle on the first draw.
            cursor: count,
            current: 0,
            cumulative,
        })
    }

    pub fn spec(&self) -> &SamplerSpec {
        &self.spec
    }

    pub fn count(&self) -> usize {
        self.spec.count()
    }

    /// Draws the next index. `residuals` (one per component) is required by
    /// the greedy rule and ignored otherwise.
    pub fn next_index(&mut self, residuals: Option<&[f64]>) -> Result<usize> {
        let count = self.count();
        match &self.spec {
            SamplerSpec::UniformIid { .. } => Ok(self.rng.random_range(0..count)),
            SamplerSpec::GreedyMaxResidual { .. } => {
                let r = residuals.ok_or(Error::MissingResiduals)?;
                if r.len() != count {
                    return Err(Error::ResidualCount {
                        expected: count,
                        actual: r.len(),
                    });
                }
                let mut best = 0;
                for (i, v) in r.iter().enumerate().skip(1) {
                    if v * v > r[best] * r[best] {
                        best = i;
                    }
                }
                Ok(best)
            }
            SamplerSpec::PermutationCycle { .. } => {
                if self.cursor >= count {
                    self.permutation.shuffle(&mut self.rng);
                    self.cursor = 0;
                }
                let i = self.permutation[self.cursor];
                self.cursor += 1;
                Ok(i)
            }
            SamplerSpec::MarkovChain { .. } => {
                let u: f64 = self.rng.random();
                let row = &self.cumulative[self.current];
                let next = row.iter().position(|&c| u < c).unwrap_or(count - 1);
                self.current = next;
                Ok(next)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_examples() {
        let mut s = Sampler::new(SamplerSpec::GreedyMaxResidual { count: 3 }, 0).unwrap();
        assert_eq!(s.next_index(Some(&[0.1, 0.9, 0.3])).unwrap(), 1);
        let mut s = Sampler::new(SamplerSpec::GreedyMaxResidual { count: 2 }, 0).unwrap();
        assert_eq!(s.next_index(Some(&[0.5, 0.5])).unwrap(), 0);
    }

    #[test]
    fn greedy_errors() {
        let mut s = Sampler::new(SamplerSpec::GreedyMaxResidual { count: 3 }, 0).unwrap();
        assert!(matches!(s.next_index(None), Err(Error::MissingResiduals)));
        assert!(matches!(
            s.next_index(Some(&[1.0, 2.0])),
            Err(Error::ResidualCount {
                expected: 3,
                actual: 2
            })
        ));
    }

    #[test]
    fn permutation_blocks() {
        let mut s = Sampler::new(SamplerSpec::PermutationCycle { count: 3 }, 9).unwrap();
        for _ in 0..50 {
            let mut block: Vec<usize> = (0..3).map(|_| s.next_index(None).unwrap()).collect();
            block.sort_unstable();
            assert_eq!(block, vec![0, 1, 2]);
        }
    }

    #[test]
    fn marginal_examples() {
        assert_eq!(
            SamplerSpec::UniformIid { count: 4 }
                .marginal_distribution()
                .unwrap(),
            Some(vec![0.25; 4])
        );
        let m = SamplerSpec::MarkovChain {
            transition: vec![vec![0.5, 0.5], vec![0.5, 0.5]],
        }
        .marginal_distribution()
        .unwrap()
        .unwrap();
        assert!((m[0] - 0.5).abs() < 1e-15 && (m[1] - 0.5).abs() < 1e-15);
        assert_eq!(
            SamplerSpec::GreedyMaxResidual { count: 2 }
                .marginal_distribution()
                .unwrap(),
            None
        );
    }

    #[test]
    fn stationary_examples() {
        let pi = stationary_distribution(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-12 && (pi[1] - 0.5).abs() < 1e-12);
        let pi = stationary_distribution(&[vec![0.5, 0.5], vec![0.25, 0.75]]).unwrap();
        assert!((pi[0] - 1.0 / 3.0).abs() < 1e-10 && (pi[1] - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(stationary_distribution(&[vec![1.0, 0.0], vec![0.5, 0.5]]).is_err());
        assert!(stationary_distribution(&[vec![0.6, 0.6], vec![0.5, 0.5]]).is_err());
        assert!(stationary_distribution(&[vec![0.5, 0.5]]).is_err());
        assert!(stationary_distribution(&[]).is_err());
        assert!(Sampler::new(SamplerSpec::UniformIid { count: 0 }, 1).is_err());
    }

    #[test]
    fn random_matrix_is_positive_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_transition_matrix(5, &mut rng);
        check_transition_matrix(&p).unwrap();
        assert!(p.iter().flatten().all(|&v| v > 0.1 / 6.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let spec = SamplerSpec::UniformIid { count: 7 };
        let mut a = Sampler::new(spec.clone(), 11).unwrap();
        let mut b = Sampler::new(spec, 11).unwrap();
        for _ in 0..100 {
            assert_eq!(a.next_index(None).unwrap(), b.next_index(None).unwrap());
        }
    }
}
