//! Power-law step sizes `alpha_n = s_a / (n+1)^b` and
//! `inner_n = s_i / (n+1)^a`, where `inner` is the gradient step `lambda_n`
//! or the prox parameter `gamma_n`.
//!
//! For this family the asymptotic admissibility conditions of both engines
//! reduce to open-interval tests on the exponents:
//!
//! * gradient: `a in (0, 1/2)` and `b in (a, 1 - a)`;
//! * proximal: additionally `a + b < 1`.
//!
//! Both scales must lie in `(0, 1]` so every step size stays in `(0, 1]`.

use std::cmp::Ordering::Less;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gradient,
    Proximal,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Gradient => "gradient",
            Algorithm::Proximal => "proximal",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gradient" => Ok(Algorithm::Gradient),
            "proximal" => Ok(Algorithm::Proximal),
            other => Err(Error::InvalidConfig(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    /// Exponent of the inner step (`lambda_n` or `gamma_n`).
    pub a: f64,
    /// Exponent of the anchor weight `alpha_n`.
    pub b: f64,
    #[serde(default = "unit_scale")]
    pub scale_alpha: f64,
    #[serde(default = "unit_scale")]
    pub scale_inner: f64,
}

fn unit_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizes {
    pub alpha: f64,
    pub inner: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleViolation {
    /// `a` outside `(0, 1/2)`.
    InnerExponent {
        a: f64,
    },
    /// `b` outside `(a, 1 - a)`.
    AlphaExponent {
        a: f64,
        b: f64,
    },
    /// `a + b >= 1` (proximal engine only).
    ExponentSum {
        sum: f64,
    },
    AlphaScale {
        scale: f64,
    },
    InnerScale {
        scale: f64,
    },
}

impl std::fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleViolation::InnerExponent { a } => write!(f, "a = {a} not in (0, 1/2)"),
            ScheduleViolation::AlphaExponent { a, b } => {
                write!(f, "b = {b} not in (a, 1 - a) = ({a}, {})", 1.0 - a)
            }
            ScheduleViolation::ExponentSum { sum } => write!(f, "a + b = {sum} is not < 1"),
            ScheduleViolation::AlphaScale { scale } => {
                write!(f, "scale_alpha = {scale} not in (0, 1]")
            }
            ScheduleViolation::InnerScale { scale } => {
                write!(f, "scale_inner = {scale} not in (0, 1]")
            }
        }
    }
}

fn scale_ok(s: f64) -> bool {
    s > 0.0 && s <= 1.0
}

impl StepSchedule {
    pub fn new(a: f64, b: f64, scale_alpha: f64, scale_inner: f64) -> Self {
        StepSchedule {
            a,
            b,
            scale_alpha,
            scale_inner,
        }
    }

    pub fn with_scale(a: f64, b: f64, scale: f64) -> Self {
        Self::new(a, b, scale, scale)
    }

    pub fn value(&self, n: u64) -> StepSizes {
        let m = (n as f64) + 1.0;
        StepSizes {
            alpha: self.scale_alpha / m.powf(self.b),
            inner: self.scale_inner / m.powf(self.a),
        }
    }

    /// All violated admissibility conditions for `algorithm`, empty when
    /// admissible.
    pub fn violations(&self, algorithm: Algorithm) -> Vec<ScheduleViolation> {
        let (a, b) = (self.a, self.b);
        let mut v = Vec::new();
        if !(a > 0.0 && a < 0.5) {
            v.push(ScheduleViolation::InnerExponent { a });
        }
        if !(b > a && b < 1.0 - a) {
            v.push(ScheduleViolation::AlphaExponent { a, b });
        }
        if algorithm == Algorithm::Proximal && !matches!((a + b).partial_cmp(&1.0), Some(Less)) {
            v.push(ScheduleViolation::ExponentSum { sum: a + b });
        }
        if !scale_ok(self.scale_alpha) {
            v.push(ScheduleViolation::AlphaScale {
                scale: self.scale_alpha,
            });
        }
        if !scale_ok(self.scale_inner) {
            v.push(ScheduleViolation::InnerScale {
                scale: self.scale_inner,
            });
        }
        v
    }

    pub fn validate(&self, algorithm: Algorithm) -> Result<(), Vec<ScheduleViolation>> {
        let v = self.violations(algorithm);
        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    pub fn validated(self, algorithm: Algorithm) -> Result<ValidSchedule> {
        self.validate(algorithm)
            .map_err(|violations| Error::InvalidSchedule {
                algorithm,
                violations,
            })?;
        Ok(ValidSchedule {
            schedule: self,
            algorithm,
        })
    }
}

/// A schedule that passed [`StepSchedule::validate`] for `algorithm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidSchedule {
    schedule: StepSchedule,
    algorithm: Algorithm,
}

impl ValidSchedule {
    pub fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    /// The proximal conditions imply the gradient ones.
    pub fn admits(&self, algorithm: Algorithm) -> bool {
        self.algorithm == algorithm || self.algorithm == Algorithm::Proximal
    }

    pub fn value(&self, n: u64) -> StepSizes {
        self.schedule.value(n)
    }
}
