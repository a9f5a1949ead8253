//! Separable convex objective components.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Quadratic,
    WeightedL1,
}

impl std::fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ObjectiveKind::Quadratic => "quadratic",
            ObjectiveKind::WeightedL1 => "weighted_l1",
        })
    }
}

impl std::str::FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(ObjectiveKind::Quadratic),
            "weighted_l1" => Ok(ObjectiveKind::WeightedL1),
            other => Err(Error::InvalidConfig(format!("unknown objective `{other}`"))),
        }
    }
}

/// One objective component `f^(i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "snake_case",
    try_from = "ConvexFunctionRepr"
)]
pub enum ConvexFunction {
    /// `x -> 1/2 sum_j diag_j x_j^2 + sum_j linear_j x_j` with `diag_j >= 0`.
    DiagQuadratic { diag: Vec<f64>, linear: Vec<f64> },
    /// `x -> sum_j weights_j |x_j - anchor_j|` with `weights_j > 0`.
    WeightedL1 { weights: Vec<f64>, anchor: Vec<f64> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ConvexFunctionRepr {
    DiagQuadratic { diag: Vec<f64>, linear: Vec<f64> },
    WeightedL1 { weights: Vec<f64>, anchor: Vec<f64> },
}

impl TryFrom<ConvexFunctionRepr> for ConvexFunction {
    type Error = Error;

    fn try_from(r: ConvexFunctionRepr) -> Result<Self> {
        match r {
            ConvexFunctionRepr::DiagQuadratic { diag, linear } => {
                ConvexFunction::diag_quadratic(diag, linear)
            }
            ConvexFunctionRepr::WeightedL1 { weights, anchor } => {
                ConvexFunction::weighted_l1(weights, anchor)
            }
        }
    }
}

fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(j) => Err(Error::InvalidFunction(format!("{name}[{j}] is not finite"))),
        None => Ok(()),
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() {
        return Err(Error::EmptyPoint);
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(())
}

/// `sign(t) * max(|t| - tau, 0)`
pub fn soft_threshold(t: f64, tau: f64) -> f64 {
    let m = t.abs() - tau;
    if m > 0.0 {
        m.copysign(t)
    } else {
        0.0
    }
}

impl ConvexFunction {
    pub fn diag_quadratic(diag: Vec<f64>, linear: Vec<f64>) -> Result<Self> {
        check_lengths(&diag, &linear)?;
        check_finite("diag", &diag)?;
        check_finite("linear", &linear)?;
        if let Some(j) = diag.iter().position(|&l| l < 0.0) {
            return Err(Error::InvalidFunction(format!(
                "diag[{j}] = {} is negative",
                diag[j]
            )));
        }
        Ok(ConvexFunction::DiagQuadratic { diag, linear })
    }

    pub fn weighted_l1(weights: Vec<f64>, anchor: Vec<f64>) -> Result<Self> {
        check_lengths(&weights, &anchor)?;
        check_finite("weights", &weights)?;
        check_finite("anchor", &anchor)?;
        if let Some(j) = weights.iter().position(|&w| w <= 0.0) {
            return Err(Error::InvalidFunction(format!(
                "weights[{j}] = {} is not positive",
                weights[j]
            )));
        }
        Ok(ConvexFunction::WeightedL1 { weights, anchor })
    }

    /// The identically zero function on `R^dim`.
    pub fn zero(dim: usize) -> Self {
        ConvexFunction::DiagQuadratic {
            diag: vec![0.0; dim],
            linear: vec![0.0; dim],
        }
    }

    pub fn kind(&self) -> ObjectiveKind {
        match self {
            ConvexFunction::DiagQuadratic { .. } => ObjectiveKind::Quadratic,
            ConvexFunction::WeightedL1 { .. } => ObjectiveKind::WeightedL1,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFunction::DiagQuadratic { diag, .. } => diag.len(),
            ConvexFunction::WeightedL1 { weights, .. } => weights.len(),
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, ConvexFunction::DiagQuadratic { .. })
    }

    pub fn eval(&self, x: &Point) -> Result<f64> {
        x.check_dim(self.dim())?;
        let x = x.as_slice();
        Ok(match self {
            ConvexFunction::DiagQuadratic { diag, linear } => x
                .iter()
                .zip(diag)
                .zip(linear)
                .map(|((xj, l), b)| 0.5 * l * xj * xj + b * xj)
                .sum(),
            ConvexFunction::WeightedL1 { weights, anchor } => x
                .iter()
                .zip(weights)
                .zip(anchor)
                .map(|((xj, w), a)| w * (xj - a).abs())
                .sum(),
        })
    }

    pub fn gradient(&self, x: &Point) -> Result<Point> {
        match self {
            ConvexFunction::DiagQuadratic { diag, linear } => {
                x.check_dim(diag.len())?;
                Ok(Point::from_raw(
                    x.as_slice()
                        .iter()
                        .zip(diag)
                        .zip(linear)
                        .map(|((xj, l), b)| l * xj + b)
                        .collect(),
                ))
            }
            ConvexFunction::WeightedL1 { .. } => Err(Error::NonSmooth),
        }
    }

    /// An element of the subdifferential at `x`. At kinks of the weighted
    /// `l1` term the minimal-norm choice `0` is returned.
    pub fn subgradient(&self, x: &Point) -> Result<Point> {
        match self {
            ConvexFunction::DiagQuadratic { .. } => self.gradient(x),
            ConvexFunction::WeightedL1 { weights, anchor } => {
                x.check_dim(weights.len())?;
                Ok(Point::from_raw(
                    x.as_slice()
                        .iter()
                        .zip(weights)
                        .zip(anchor)
                        .map(|((xj, w), a)| {
                            let t = xj - a;
                            if t > 0.0 {
                                *w
                            } else if t < 0.0 {
                                -w
                            } else {
                                0.0
                            }
                        })
                        .collect(),
                ))
            }
        }
    }

    /// `argmin_y f(y) + ||z - y||^2 / (2 gamma)`, in closed form.
    pub fn prox(&self, gamma: f64, z: &Point) -> Result<Point> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidProxParameter(gamma));
        }
        z.check_dim(self.dim())?;
        let z = z.as_slice();
        Ok(Point::from_raw(match self {
            ConvexFunction::DiagQuadratic { diag, linear } => z
                .iter()
                .zip(diag)
                .zip(linear)
                .map(|((zj, l), b)| (zj - gamma * b) / (1.0 + gamma * l))
                .collect(),
            ConvexFunction::WeightedL1 { weights, anchor } => z
                .iter()
                .zip(weights)
                .zip(anchor)
                .map(|((zj, w), a)| a + soft_threshold(zj - a, gamma * w))
                .collect(),
        }))
    }

    /// Lipschitz constant of the gradient; `None` for affine or nonsmooth
    /// functions.
    pub fn lipschitz_grad(&self) -> Option<f64> {
        match self {
            ConvexFunction::DiagQuadratic { diag, .. } => {
                let l = diag.iter().copied().fold(0.0, f64::max);
                (l > 0.0).then_some(l)
            }
            ConvexFunction::WeightedL1 { .. } => None,
        }
    }
}
