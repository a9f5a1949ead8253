mod common;

use common::{ball, coords, operator, pt};
use halpern_sopt::operators::project_ball;
use halpern_sopt::{Ball, OperatorExpr};
use proptest::prelude::*;

fn dim() -> impl Strategy<Value = usize> {
    prop_oneof![Just(2usize), Just(8), Just(64)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn projection_is_idempotent_and_lands_in_ball(
        (b, x) in dim().prop_flat_map(|d| (ball(d), coords(d, 5.0)))
    ) {
        let p = project_ball(&pt(x), &b).unwrap();
        let pp = project_ball(&p, &b).unwrap();
        prop_assert!(pp.distance(&p) <= 1e-12);
        prop_assert!(p.distance(b.center()) <= b.radius() + 1e-12);
    }

    #[test]
    fn every_operator_is_firmly_nonexpansive(
        (op, x, y) in dim().prop_flat_map(|d| (operator(d), coords(d, 4.0), coords(d, 4.0)))
    ) {
        let s = op.firm_nonexpansivity_slack(&pt(x), &pt(y)).unwrap();
        prop_assert!(s >= -1e-9, "slack {s}");
    }

    #[test]
    fn half_averaging_a_nonexpansive_map_is_firm(
        (op, x, y) in dim().prop_flat_map(|d| (operator(d), coords(d, 4.0), coords(d, 4.0)))
    ) {
        let (x, y) = (pt(x), pt(y));
        // Nonexpansive inner map first...
        let tx = op.apply(&x).unwrap();
        let ty = op.apply(&y).unwrap();
        prop_assert!(tx.distance(&ty) <= x.distance(&y) + 1e-12);
        // ...so its half average is firmly nonexpansive.
        let avg = OperatorExpr::half_averaged(op);
        prop_assert!(avg.firm_nonexpansivity_slack(&x, &y).unwrap() >= -1e-9);
    }

    #[test]
    fn slack_vanishes_on_the_diagonal(
        (op, x) in dim().prop_flat_map(|d| (operator(d), coords(d, 4.0)))
    ) {
        let x = pt(x);
        prop_assert_eq!(op.firm_nonexpansivity_slack(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn composite_equals_half_average_of_projected_mean(
        (outer, inner, x) in dim().prop_flat_map(|d| {
            (ball(d), prop::collection::vec(ball(d), 1..5), coords(d, 4.0))
        })
    ) {
        let x = pt(x);
        let op = OperatorExpr::gcfs(outer.clone(), inner.clone()).unwrap();
        let mut mean = vec![0.0; x.dim()];
        for b in &inner {
            for (m, v) in mean.iter_mut().zip(b.project(&x).unwrap().as_slice()) {
                *m += v / inner.len() as f64;
            }
        }
        let p = outer.project(&pt(mean)).unwrap();
        let expected = x.midpoint(&p);
        prop_assert!(op.apply(&x).unwrap().distance(&expected) <= 1e-12);
    }

    #[test]
    fn points_inside_every_ball_are_fixed(
        (c, r1, r2, u) in (coords(8, 0.3), 0.5..1.0f64, 0.5..1.0f64, coords(8, 0.02))
    ) {
        // x sits within 0.06 of c, and c within 0.85 of the origin, so x is
        // interior to the unit ball and to both balls around c.
        let c = pt(c);
        let x = c.add(&pt(u));
        let op = OperatorExpr::gcfs(
            Ball::unit(8),
            vec![Ball::new(c.clone(), r1).unwrap(), Ball::new(c, r2).unwrap()],
        ).unwrap();
        prop_assert_eq!(op.residual(&x).unwrap(), 0.0);
        prop_assert_eq!(op.apply(&x).unwrap(), x);
    }
}

#[test]
fn dimension_mismatch_everywhere() {
    let op = OperatorExpr::ball_projection(Ball::unit(3));
    let x = pt(vec![1.0, 2.0]);
    assert!(op.apply(&x).is_err());
    assert!(op.residual(&x).is_err());
    assert!(op
        .firm_nonexpansivity_slack(&pt(vec![0.0, 0.0, 0.0]), &pt(vec![0.0, 0.0]))
        .is_err());
}
