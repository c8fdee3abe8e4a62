use debound_core::exponents::Exponent;
use debound_core::minimize::{solve, verify_quasiminimality, SolveConfig};
use debound_core::{Exponents, Grid, GridFunction, Interval, ModelIntegrand, WeightField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INF: Exponent = Exponent::Infinite;

fn unit_grid(n: usize, h: f64) -> Grid {
    Grid::new(&vec![Interval::new(0.0, 1.0); n], h).unwrap()
}

fn sqrt_weight_1d() -> ModelIntegrand {
    let e = Exponents::new(vec![2.0], 2.0, 2.0, vec![Exponent::Finite(1.5)], INF).unwrap();
    let lam = WeightField::Power { amplitude: 1.0, exponent: 0.5, center: vec![0.0] };
    ModelIntegrand::new(e, vec![lam], WeightField::Constant(1.0), 0.0).unwrap()
}

#[test]
fn weighted_1d_matches_sqrt() {
    let h = 1.0 / 256.0;
    let grid = unit_grid(1, h);
    let bc = GridFunction::from_fn(grid, |x| x[0]).unwrap();
    let out = solve(&sqrt_weight_1d(), &bc, &SolveConfig::default()).unwrap();
    assert!(out.converged, "residual {}", out.residual);
    let mut x = [0.0];
    let mut err = 0.0f64;
    for (i, v) in out.u.values().iter().enumerate() {
        out.u.grid().node_coords(i, &mut x);
        err = err.max((v - x[0].sqrt()).abs());
    }
    assert!(err <= 5.0 * h, "sup error {err}");
}

#[test]
fn affine_data_is_reproduced() {
    for (n, h) in [(1, 1.0 / 64.0), (2, 1.0 / 16.0), (3, 1.0 / 8.0)] {
        let e = Exponents::isotropic(n, 2.0, 2.0, 2.0, INF, INF).unwrap();
        let m = ModelIntegrand::unweighted(e).unwrap();
        let affine = |x: &[f64]| 0.5 + x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * v).sum::<f64>();
        let bc = GridFunction::from_fn(unit_grid(n, h), affine).unwrap();
        let out = solve(&m, &bc, &SolveConfig::default()).unwrap();
        assert!(out.converged, "n={n}");
        let err = out.u.values().iter().zip(bc.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-8, "n={n} error {err}");
    }
}

#[test]
fn anisotropic_affine_is_reproduced() {
    let e = Exponents::new(vec![1.5, 3.0], 3.0, 3.0, vec![INF, INF], INF).unwrap();
    let m = ModelIntegrand::unweighted(e).unwrap();
    let bc = GridFunction::from_fn(unit_grid(2, 1.0 / 16.0), |x| 1.0 + 2.0 * x[0] - x[1]).unwrap();
    let out = solve(&m, &bc, &SolveConfig::default()).unwrap();
    assert!(out.converged, "residual {}", out.residual);
    let err = out.u.values().iter().zip(bc.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-8, "error {err}");
}

#[test]
fn objective_never_increases() {
    let e = Exponents::new(vec![1.5, 2.0], 2.0, 2.5, vec![INF, INF], INF).unwrap();
    let m = ModelIntegrand::new(e, vec![WeightField::Constant(1.0); 2], WeightField::Constant(1.0), 1.0).unwrap();
    let bc = GridFunction::from_fn(unit_grid(2, 1.0 / 16.0), |x| 3.0 + (x[0] - 0.5) * (x[1] - 0.5) * 4.0).unwrap();
    let out = solve(&m, &bc, &SolveConfig::default()).unwrap();
    for w in out.history.windows(2) {
        assert!(w[1] <= w[0] + 1e-14 * w[0].abs(), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let m = ModelIntegrand::unweighted(Exponents::isotropic(2, 2.0, 2.0, 2.0, INF, INF).unwrap()).unwrap();
    let bc = GridFunction::from_fn(unit_grid(2, 1.0 / 32.0), |x| x[0] * x[1]).unwrap();
    let cfg = SolveConfig { max_iters: 1, ..SolveConfig::default() };
    let out = solve(&m, &bc, &cfg).unwrap();
    assert!(!out.converged);
    assert_eq!(out.iterations, 1);
}

fn random_bump(grid: &Grid, rng: &mut ChaCha8Rng) -> GridFunction {
    let amp: f64 = rng.random_range(-0.5..0.5);
    let cx: Vec<f64> = (0..grid.n()).map(|_| rng.random_range(0.2..0.8)).collect();
    let w: f64 = rng.random_range(0.05..0.2);
    GridFunction::from_fn(grid.clone(), |x| {
        let d2: f64 = x.iter().zip(&cx).map(|(a, b)| (a - b) * (a - b)).sum();
        let t = 1.0 - d2 / (w * w);
        if t > 0.0 { amp * t * t } else { 0.0 }
    })
    .unwrap()
}

#[test]
fn minimizer_passes_quasi_minimality() {
    let m = ModelIntegrand::unweighted(Exponents::isotropic(2, 2.0, 2.0, 2.0, INF, INF).unwrap()).unwrap();
    let bc = GridFunction::from_fn(unit_grid(2, 1.0 / 16.0), |x| 3.0 + x[0] * x[1]).unwrap();
    let out = solve(&m, &bc, &SolveConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let phis: Vec<GridFunction> = (0..100).map(|_| random_bump(out.u.grid(), &mut rng)).collect();
    let rep = verify_quasiminimality(&m, &out.u, 1.0, &phis).unwrap();
    assert!(rep.all_pass(), "{} failures", rep.failures);
    assert!(rep.empirical_q <= 1.0 + 1e-9);
}

#[test]
fn perturbed_function_fails_quasi_minimality() {
    let m = ModelIntegrand::unweighted(Exponents::isotropic(2, 2.0, 2.0, 2.0, INF, INF).unwrap()).unwrap();
    let grid = unit_grid(2, 1.0 / 16.0);
    // a bump is far from minimal; removing it lowers the energy
    let bump = GridFunction::from_fn(grid.clone(), |x| (x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])) * 16.0).unwrap();
    let rep = verify_quasiminimality(&m, &bump, 1.0, &[bump.negated()]).unwrap();
    assert_eq!(rep.failures, 1);
    assert!(rep.empirical_q.is_infinite());
}

#[test]
fn perturbation_must_vanish_on_boundary() {
    let m = ModelIntegrand::unweighted(Exponents::isotropic(2, 2.0, 2.0, 2.0, INF, INF).unwrap()).unwrap();
    let grid = unit_grid(2, 0.25);
    let u = GridFunction::zeros(grid.clone());
    let bad = GridFunction::from_fn(grid, |_| 1.0).unwrap();
    assert!(verify_quasiminimality(&m, &u, 1.0, &[bad]).is_err());
}
