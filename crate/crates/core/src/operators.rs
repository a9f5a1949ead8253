//! Firmly nonexpansive mappings on `R^d`.
//!
//! Operators are a closed expression grammar rather than arbitrary
//! callables: every expressible [`OperatorExpr`] is firmly nonexpansive by
//! construction, so property tests can quantify over the grammar.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::Point;

/// Closed Euclidean ball `{x : ||x - center|| <= radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BallRepr", into = "BallRepr")]
pub struct Ball {
    center: Point,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct BallRepr {
    center: Point,
    radius: f64,
}

impl TryFrom<BallRepr> for Ball {
    type Error = Error;

    fn try_from(r: BallRepr) -> Result<Self> {
        Ball::new(r.center, r.radius)
    }
}

impl From<Ball> for BallRepr {
    fn from(b: Ball) -> Self {
        BallRepr {
            center: b.center,
            radius: b.radius,
        }
    }
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidRadius(radius));
        }
        Ok(Ball { center, radius })
    }

    /// The closed unit ball centred at the origin of `R^dim`.
    pub fn unit(dim: usize) -> Self {
        Ball {
            center: Point::zeros(dim),
            radius: 1.0,
        }
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.distance(&self.center) <= self.radius
    }

    /// Metric projection onto the ball.
    pub fn project(&self, x: &Point) -> Result<Point> {
        x.check_dim(self.dim())?;
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &Point) -> Point {
        let dist = x.distance(&self.center);
        if dist <= self.radius {
            return x.clone();
        }
        let offset = x.sub(&self.center);
        let mut scale = self.radius / dist;
        let mut p = self.center.add_scaled(scale, &offset);
        // Rounding can leave the scaled point a few ulps outside.
        while p.distance(&self.center) > self.radius {
            scale *= 1.0 - f64::EPSILON;
            p = self.center.add_scaled(scale, &offset);
        }
        p
    }
}

/// Metric projection of `x` onto `ball`.
pub fn project_ball(x: &Point, ball: &Ball) -> Result<Point> {
    ball.project(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorExpr {
    Identity,
    BallProjection {
        ball: Ball,
    },
    /// `x -> (x + P_outer(mean_k P_{inner_k}(x))) / 2`, whose fixed points
    /// are the points of `outer` minimizing the mean squared distance to the
    /// inner balls.
    GcfsComposite {
        outer: Ball,
        inner: Vec<Ball>,
    },
    /// `x -> (x + T(x)) / 2`
    HalfAveraged {
        inner: Box<OperatorExpr>,
    },
}

impl OperatorExpr {
    pub fn ball_projection(ball: Ball) -> Self {
        OperatorExpr::BallProjection { ball }
    }

    pub fn gcfs(outer: Ball, inner: Vec<Ball>) -> Result<Self> {
        let op = OperatorExpr::GcfsComposite { outer, inner };
        op.validate()?;
        Ok(op)
    }

    pub fn half_averaged(inner: OperatorExpr) -> Self {
        OperatorExpr::HalfAveraged {
            inner: Box::new(inner),
        }
    }

    /// Dimension the operator acts on; `None` for dimension-free expressions
    /// such as the identity.
    pub fn dim(&self) -> Option<usize> {
        match self {
            OperatorExpr::Identity => None,
            OperatorExpr::BallProjection { ball } => Some(ball.dim()),
            OperatorExpr::GcfsComposite { outer, .. } => Some(outer.dim()),
            OperatorExpr::HalfAveraged { inner } => inner.dim(),
        }
    }

    /// Checks internal consistency: non-empty inner lists and a single
    /// dimension throughout.
    pub fn validate(&self) -> Result<()> {
        match self {
            OperatorExpr::Identity | OperatorExpr::BallProjection { .. } => Ok(()),
            OperatorExpr::GcfsComposite { outer, inner } => {
                if inner.is_empty() {
                    return Err(Error::EmptyInnerBalls);
                }
                for b in inner {
                    if b.dim() != outer.dim() {
                        return Err(Error::DimensionMismatch {
                            expected: outer.dim(),
                            actual: b.dim(),
                        });
                    }
                }
                Ok(())
            }
            OperatorExpr::HalfAveraged { inner } => inner.validate(),
        }
    }

    fn check_input(&self, x: &Point) -> Result<()> {
        match self.dim() {
            Some(d) => x.check_dim(d),
            None => Ok(()),
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point> {
        self.check_input(x)?;
        match self {
            OperatorExpr::Identity => Ok(x.clone()),
            OperatorExpr::BallProjection { ball } => Ok(ball.project_unchecked(x)),
            OperatorExpr::GcfsComposite { outer, inner } => {
                if inner.is_empty() {
                    return Err(Error::EmptyInnerBalls);
                }
                for b in inner {
                    x.check_dim(b.dim())?;
                }
                let projections: Vec<Point> =
                    inner.iter().map(|b| b.project_unchecked(x)).collect();
                let mean = Point::mean(&projections, x.dim());
                Ok(x.midpoint(&outer.project_unchecked(&mean)))
            }
            OperatorExpr::HalfAveraged { inner } => {
                let tx = inner.apply(x)?;
                Ok(x.midpoint(&tx))
            }
        }
    }

    /// `||x - T(x)||`
    pub fn residual(&self, x: &Point) -> Result<f64> {
        let tx = self.apply(x)?;
        Ok(x.distance(&tx))
    }

    /// `||x-y||^2 - ||Tx-Ty||^2 - ||(x-Tx)-(y-Ty)||^2`, which is nonnegative
    /// exactly when `T` is firmly nonexpansive on the pair.
    pub fn firm_nonexpansivity_slack(&self, x: &Point, y: &Point) -> Result<f64> {
        x.check_dim(y.dim())?;
        let tx = self.apply(x)?;
        let ty = self.apply(y)?;
        let diff = x.sub(y);
        let tdiff = tx.sub(&ty);
        let rdiff = diff.sub(&tdiff);
        Ok(diff.norm_squared() - tdiff.norm_squared() - rdiff.norm_squared())
    }
}
