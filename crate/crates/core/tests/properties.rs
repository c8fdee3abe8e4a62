//! Randomized invariants across the exponent calculus, the integrand, the
//! grid operations and the inequality reports.

use debound_core::exponents::{check_admissibility, derive, iteration_constants, theta_exponents, Exponent};
use debound_core::fields::{superlevel_measure, tent, truncate};
use debound_core::inequalities::{verify_caccioppoli, verify_embedding, verify_lower_bound, verify_poincare_sobolev};
use debound_core::integrand::{check_convexity, check_growth, PointState};
use debound_core::{Ball, Exponents, Grid, GridFunction, Interval, ModelIntegrand, SubBox, WeightField};
use proptest::prelude::*;

const INF: Exponent = Exponent::Infinite;

fn exponent_strategy() -> impl Strategy<Value = Exponent> {
    prop_oneof![Just(INF), (1.0f64..30.0).prop_map(Exponent::Finite)]
}

/// Tuples satisfying conditions (i) and (ii); `t` places γ inside `[q, bound)`.
fn admissible_tuple() -> impl Strategy<Value = Exponents> {
    (2usize..=4, 1.1f64..4.0, 0.0f64..0.99)
        .prop_flat_map(|(n, q, t)| {
            (
                Just(n),
                Just(q),
                Just(t),
                prop::collection::vec(0.0f64..1.0, n),
                prop::collection::vec(exponent_strategy(), n),
                exponent_strategy().prop_map(|s| match s {
                    Exponent::Finite(v) => Exponent::Finite(v + 1.01),
                    inf => inf,
                }),
            )
        })
        .prop_filter_map("conditions (i)-(ii)", |(_n, q, t, fr, r, s)| {
            let p: Vec<f64> = fr.iter().map(|f| 1.01 + f * (q - 1.01)).collect();
            let e = Exponents::new(p.clone(), q, q, r.clone(), s).ok()?;
            let d = derive(&e);
            let rep = check_admissibility(&d, &e);
            if !(rep.conditions[0] && rep.conditions[1]) {
                return None;
            }
            let gamma = q + t * (rep.gamma_upper? - q);
            Exponents::new(p, q, gamma, r, s).ok()
        })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closing_identities(e in admissible_tuple()) {
        let d = derive(&e);
        prop_assume!(d.is_admissible());
        let c = iteration_constants(&d, &e).unwrap();
        let (t1, t2) = theta_exponents(&d, &e).unwrap();
        prop_assert!(close(t2, c.delta2 / c.delta1, 1e-12));
        prop_assert!(close(t1, c.d_exponent / c.delta1, 1e-12));
        prop_assert!(c.lambda_base > 1.0 && c.alpha > 0.0);
    }

    #[test]
    fn gamma_bound_is_sharp(e in admissible_tuple(), bump in 0.0f64..2.0) {
        let d = derive(&e);
        let bound = check_admissibility(&d, &e).gamma_upper.unwrap();
        let above = Exponents::new(e.p().to_vec(), e.q(), bound + bump, e.r().to_vec(), e.s()).unwrap();
        prop_assert!(!derive(&above).admissible[2]);
    }

    #[test]
    fn growth_and_convexity(
        p1 in 1.1f64..3.0, extra in 0.0f64..1.0, gamma_extra in 0.0f64..2.0, c in 0.0f64..3.0,
        u in -5.0f64..5.0, xi in prop::collection::vec(-4.0f64..4.0, 2),
        v in -5.0f64..5.0, eta in prop::collection::vec(-4.0f64..4.0, 2),
        x in prop::collection::vec(0.0f64..1.0, 2),
    ) {
        let q = p1 + extra;
        let e = Exponents::new(vec![p1, q], q, q + gamma_extra, vec![INF; 2], INF).unwrap();
        let lam = WeightField::Power { amplitude: 1.5, exponent: -0.5, center: vec![0.5, 0.5] };
        let m = ModelIntegrand::new(e, vec![lam, WeightField::Constant(2.0)], WeightField::Constant(0.5), c).unwrap();
        let rep = check_growth(&m, &[PointState { x: x.clone(), u, xi: xi.clone() }]);
        prop_assert!(rep.holds(), "{:?}", rep);
        let conv = check_convexity(&m, &x, &[((u, xi), (v, eta))]);
        prop_assert_eq!(conv.failures, 0);
    }

    #[test]
    fn superlevel_measure_monotone(k1 in -2.0f64..2.0, dk in 0.0f64..2.0, freq in 1.0f64..6.0) {
        let grid = Grid::new(&[Interval::new(0.0, 1.0); 2], 1.0 / 16.0).unwrap();
        let u = GridFunction::from_fn(grid, |x| 2.0 * (freq * x[0]).sin() * x[1]).unwrap();
        let ball = Ball::new(vec![0.5, 0.5], 0.45).unwrap();
        prop_assert!(superlevel_measure(&u, k1 + dk, &ball) <= superlevel_measure(&u, k1, &ball));
        prop_assert!(truncate(&u, k1).values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn caccioppoli_lhs_nonincreasing_in_k(k in 1.0f64..3.0, dk in 0.0f64..1.0) {
        let grid = Grid::new(&[Interval::new(0.0, 1.0); 2], 1.0 / 16.0).unwrap();
        let u = GridFunction::from_fn(grid, |x| 1.0 + 3.0 * x[0] * x[1]).unwrap();
        let e = Exponents::isotropic(2, 2.0, 2.0, 2.0, Exponent::Finite(4.0), INF).unwrap();
        let m = ModelIntegrand::unweighted(e).unwrap();
        let a = verify_caccioppoli(&m, &u, k, 0.2, 0.4, &[0.5, 0.5]).unwrap();
        let b = verify_caccioppoli(&m, &u, k + dk, 0.2, 0.4, &[0.5, 0.5]).unwrap();
        prop_assert!(b.lhs <= a.lhs);
        prop_assert!(a.c_emp >= 0.0);
    }

    #[test]
    fn reports_are_scale_invariant(t in 0.1f64..20.0) {
        let grid = Grid::new(&[Interval::new(0.0, 1.0); 3], 0.125).unwrap();
        let e = Exponents::isotropic(3, 2.0, 2.0, 2.0, INF, INF).unwrap();
        let m = ModelIntegrand::unweighted(e.clone()).unwrap();
        let d = derive(&e);
        let omega = SubBox::new(vec![Interval::new(0.25, 0.75); 3]);
        let bump = tent(&grid, &omega).unwrap();
        let scaled = bump.scaled(t).unwrap();
        let pairs = [
            (verify_embedding(&bump, &d).unwrap(), verify_embedding(&scaled, &d).unwrap()),
            (
                verify_poincare_sobolev(&m, &bump, &d, &omega).unwrap(),
                verify_poincare_sobolev(&m, &scaled, &d, &omega).unwrap(),
            ),
            (verify_lower_bound(&m, &bump, &omega).unwrap(), verify_lower_bound(&m, &scaled, &omega).unwrap()),
        ];
        for (a, b) in pairs {
            prop_assert!(close(a.c_emp, b.c_emp, 1e-10), "{}: {} vs {}", a.check, a.c_emp, b.c_emp);
        }
    }
}
