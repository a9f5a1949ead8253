use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functions::{ConvexFunction, ObjectiveKind};
use crate::operators::{Ball, OperatorExpr};
use crate::point::Point;
use crate::solver::{Component, ProblemInstance};

/// Uniform sample from `(0, 1]`.
fn unit_left_open<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Random benchmark instance with `components` pairs `(f_i, T_i)`.
///
/// Parameters are drawn i.i.d. uniform from
/// `diag_j in [0, d]`, `linear in [-1, 1]^d`, `weights_j in (0, 1]`,
/// `anchor_j in [-1, 1]`, `r_k in (0, 1]`, `c_k in [-1/sqrt d, 1/sqrt d)^d`.
/// Every operator is the composite of the unit ball with `balls` inner balls
/// and the bounding set is the unit ball.
pub fn generate_problem(
    seed: u64,
    dim: usize,
    components: usize,
    balls: usize,
    objective: ObjectiveKind,
) -> Result<ProblemInstance> {
    if dim == 0 || components == 0 || balls == 0 {
        return Err(Error::InvalidConfig(
            "d, I and K must all be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = dim as f64;
    let half_width = 1.0 / d.sqrt();
    let outer = Ball::unit(dim);

    let mut out = Vec::with_capacity(components);
    for _ in 0..components {
        let objective = match objective {
            ObjectiveKind::Quadratic => {
                let diag = (0..dim).map(|_| rng.random_range(0.0..=d)).collect();
                let linear = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
                ConvexFunction::diag_quadratic(diag, linear)?
            }
            ObjectiveKind::WeightedL1 => {
                let weights = (0..dim).map(|_| unit_left_open(&mut rng)).collect();
                let anchor = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
                ConvexFunction::weighted_l1(weights, anchor)?
            }
        };
        let inner = (0..balls)
            .map(|_| {
                let center = (0..dim)
                    .map(|_| rng.random_range(-half_width..half_width))
                    .collect();
                Ball::new(Point::new(center)?, unit_left_open(&mut rng))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Component {
            objective,
            operator: OperatorExpr::gcfs(outer.clone(), inner)?,
        });
    }
    ProblemInstance::new(dim, out, outer)
}
