//! Empirical constants for the inequalities behind the level-set iteration.
//!
//! Each verifier evaluates both sides on discrete data and reports
//! `c_emp = lhs / rhs_structure`, where `rhs_structure` is the right-hand side
//! without its unknown constant. All integrals are cell quadratures with
//! cell-averaged values and forward-difference gradients.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::exponents::{DerivedExponents, Exponent};
use crate::fields::{gradient, Ball, CellLattice, Grid, GridFunction, SubBox};
use crate::integrand::{check_dims, CellWeights, ModelIntegrand};
use crate::real::{abs, pow};

/// Slack on `c_emp <= 1` for the lower energy bound.
pub const LOWER_BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub check: String,
    /// Parameter echo, in a fixed order.
    pub params: Vec<(String, f64)>,
    pub lhs: f64,
    pub rhs_structure: f64,
    pub c_emp: f64,
    pub pass: bool,
}

impl InequalityReport {
    fn new(check: &str, params: Vec<(String, f64)>, lhs: f64, rhs_structure: f64, limit: f64) -> Self {
        let c_emp = empirical_constant(lhs, rhs_structure);
        let pass = lhs == 0.0 || c_emp <= limit;
        Self { check: check.into(), params, lhs, rhs_structure, c_emp, pass }
    }
}

/// `lhs / rhs`, with `0` for an empty left side and `∞` for an empty right side.
pub fn empirical_constant(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

fn param(name: &str, v: f64) -> (String, f64) {
    (name.into(), v)
}

/// `(Σ_{c ∈ cells} |f_c|^β h^n)^{1/β}` or the max over `cells` for `β = ∞`.
/// Accepts any `β > 0`.
/// `‖v‖_{L^β}` by cell quadrature with per-cell weights in `[0, 1]`; `β = ∞`
/// takes the max over cells of positive weight.
fn quad_norm(values: &[f64], beta: Exponent, weights: &[f64], vol: f64) -> f64 {
    let picked = values.iter().zip(weights).filter(|(_, w)| **w > 0.0);
    match beta {
        Exponent::Infinite => picked.fold(0.0, |m, (v, _)| m.max(abs(*v))),
        Exponent::Finite(b) => pow(picked.map(|(v, w)| w * pow(abs(*v), b)).sum::<f64>() * vol, 1.0 / b),
    }
}

fn cell_mask(lat: &CellLattice, region: impl Fn(&[f64]) -> bool) -> Vec<f64> {
    (0..lat.len()).map(|c| if region(lat.center(c)) { 1.0 } else { 0.0 }).collect()
}

/// Fraction of each cell inside `ball`.
fn ball_weights(lat: &CellLattice, ball: &Ball, h: f64) -> Vec<f64> {
    (0..lat.len()).map(|c| ball.coverage(lat.center(c), h)).collect()
}

/// `‖λ_i^{-1}‖_{L^{r_i}}` over the masked cells, for every `i`.
fn inverse_weight_norms(m: &ModelIntegrand, w: &CellWeights, mask: &[f64], vol: f64) -> Vec<f64> {
    m.exponents()
        .r()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let inv: Vec<f64> = w.lambda_component(i).iter().map(|l| 1.0 / l).collect();
            quad_norm(&inv, r, mask, vol)
        })
        .collect()
}

fn require_inside(bx: &SubBox, grid: &Grid) -> Result<()> {
    if bx.bounds.len() != grid.n() {
        bail!(Domain, "sub-box has {} axes, grid has {}", bx.bounds.len(), grid.n());
    }
    if !bx.strictly_inside(grid) {
        bail!(Domain, "sub-box is not strictly inside the grid box");
    }
    Ok(())
}

fn require_embedding_exponent(d: &DerivedExponents, n: usize) -> Result<f64> {
    if d.sigma.len() != n {
        bail!(Domain, "exponents are {}-dimensional, grid is {n}-dimensional", d.sigma.len());
    }
    match d.sigma_star {
        Some(ss) => Ok(ss),
        None => bail!(Domain, "harmonic mean {} is not below n = {n}", d.sigma_bar),
    }
}

/// Lower energy bound: `(1/n) Σ_i ‖λ_i^{-1}‖_{L^{r_i}}^{-1} ‖u_{x_i}‖_{L^{σ_i}}^{p_i}`
/// against `∫ f(x, u, Du)`, both over `omega`. Passes when `c_emp <= 1`.
pub fn verify_lower_bound(m: &ModelIntegrand, u: &GridFunction, omega: &SubBox) -> Result<InequalityReport> {
    let grid = u.grid();
    check_dims(m, grid)?;
    require_inside(omega, grid)?;
    let lat = grid.lattice()?;
    let w = m.cell_weights(&lat, grid.h());
    let mask = cell_mask(&lat, |x| omega.contains(x));
    let vol = grid.cell_volume();
    let du = gradient(u)?;
    let d = crate::exponents::derive(m.exponents());
    let inv = inverse_weight_norms(m, &w, &mask, vol);

    let n = grid.n();
    let mut lhs = 0.0;
    for i in 0..n {
        let g = du.component(i);
        let norm = quad_norm(&g, Exponent::Finite(d.sigma[i]), &mask, vol);
        if norm > 0.0 {
            lhs += pow(norm, m.exponents().p()[i]) / inv[i];
        }
    }
    lhs /= n as f64;

    let mut rhs = 0.0;
    for c in (0..lat.len()).filter(|&c| mask[c] > 0.0) {
        rhs += m.eval_with(w.lambdas(c), w.mu(c), lat.average(c, u.values()), du.at(c));
    }
    rhs *= vol;
    Ok(InequalityReport::new("lower_bound", omega_params(omega), lhs, rhs, 1.0 + LOWER_BOUND_TOL))
}

fn omega_params(omega: &SubBox) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    for (i, iv) in omega.bounds.iter().enumerate() {
        out.push((alloc::format!("lo{}", i + 1), iv.lo));
        out.push((alloc::format!("hi{}", i + 1), iv.hi));
    }
    out
}

/// Anisotropic embedding: `‖u‖_{L^{σ̄*}}` against `(Π_i ‖u_{x_i}‖_{L^{σ_i}})^{1/n}`
/// for `u` vanishing on the grid boundary.
pub fn verify_embedding(u: &GridFunction, d: &DerivedExponents) -> Result<InequalityReport> {
    let grid = u.grid();
    let n = grid.n();
    let ss = require_embedding_exponent(d, n)?;
    if !u.vanishes_on_boundary() {
        bail!(Domain, "function must vanish on the grid boundary");
    }
    let lat = grid.lattice()?;
    let mask = vec![1.0; lat.len()];
    let vol = grid.cell_volume();
    let cells = u.cell_values()?;
    let lhs = quad_norm(&cells, Exponent::Finite(ss), &mask, vol);
    let du = gradient(u)?;
    let prod: f64 = (0..n)
        .map(|i| quad_norm(&du.component(i), Exponent::Finite(d.sigma[i]), &mask, vol))
        .product();
    let rhs = pow(prod, 1.0 / n as f64);
    Ok(InequalityReport::new("embedding", vec![param("sigma_star", ss)], lhs, rhs, f64::MAX))
}

/// Weighted Poincaré–Sobolev: `(∫|v|^{σ̄*})^{1/σ̄*}` against
/// `{Π_i [‖λ_i^{-1}‖_{L^{r_i}(Ω')} ∫ λ_i |v_{x_i}|^{p_i}]^{1/p_i}}^{1/n}`.
///
/// `v` must vanish at every node outside the closed box `omega`; the
/// integrals of `v` then run over the whole grid, the weight norms over the
/// cells centered in `omega`.
pub fn verify_poincare_sobolev(
    m: &ModelIntegrand,
    v: &GridFunction,
    d: &DerivedExponents,
    omega: &SubBox,
) -> Result<InequalityReport> {
    let grid = v.grid();
    check_dims(m, grid)?;
    let n = grid.n();
    let ss = require_embedding_exponent(d, n)?;
    require_inside(omega, grid)?;
    let mut x = vec![0.0; n];
    for (i, &val) in v.values().iter().enumerate() {
        grid.node_coords(i, &mut x);
        if val != 0.0 && !omega.contains(&x) {
            bail!(Domain, "function does not vanish outside the sub-box");
        }
    }
    let lat = grid.lattice()?;
    let w = m.cell_weights(&lat, grid.h());
    let vol = grid.cell_volume();
    let all = vec![1.0; lat.len()];
    let inside = cell_mask(&lat, |x| omega.contains(x));
    let inv = inverse_weight_norms(m, &w, &inside, vol);

    let lhs = quad_norm(&v.cell_values()?, Exponent::Finite(ss), &all, vol);
    let du = gradient(v)?;
    let mut prod = 1.0;
    for i in 0..n {
        let p = m.exponents().p()[i];
        let weighted: f64 = (0..lat.len())
            .map(|c| w.lambdas(c)[i] * pow(abs(du.at(c)[i]), p))
            .sum::<f64>()
            * vol;
        prod *= pow(inv[i] * weighted, 1.0 / p);
    }
    let rhs = pow(prod, 1.0 / n as f64);
    let mut params = omega_params(omega);
    params.push(param("sigma_star", ss));
    Ok(InequalityReport::new("poincare_sobolev", params, lhs, rhs, f64::MAX))
}

/// Outcome of the `λ_i <= 2μ̃` check at cell centers.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightDominationReport {
    pub checked: usize,
    pub violations: usize,
    /// Largest `λ_i / (2μ̃)` seen.
    pub worst_ratio: f64,
}

impl WeightDominationReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

pub fn verify_weight_domination(m: &ModelIntegrand, grid: &Grid) -> Result<WeightDominationReport> {
    check_dims(m, grid)?;
    let lat = grid.lattice()?;
    let w = m.cell_weights(&lat, grid.h());
    let (mut checked, mut violations, mut worst) = (0, 0, 0.0f64);
    for c in 0..lat.len() {
        let upper = w.upper(c);
        for &l in w.lambdas(c) {
            checked += 1;
            worst = worst.max(l / (2.0 * upper));
            if !(l <= 2.0 * upper) {
                violations += 1;
            }
        }
    }
    Ok(WeightDominationReport { checked, violations, worst_ratio: worst })
}

/// Caccioppoli inequality on super-level sets.
///
/// `lhs = ∫_{A_{k,ρ}} f(x,u,Du)`, and `rhs_structure = (R-ρ)^{-q} ∫_{A_{k,R}}
/// μ̃((u-k)^q + k^γ) + ‖μ̃‖_{L^s(B_R)} |A_{k,R}|^{1/s'}`. Integrals over
/// `A_{k,·}` and the measure `|A_{k,R}|` use the cells with cell value above
/// `k`, each weighted by the fraction of it inside the ball.
pub fn verify_caccioppoli(
    m: &ModelIntegrand,
    u: &GridFunction,
    k: f64,
    rho: f64,
    radius: f64,
    x0: &[f64],
) -> Result<InequalityReport> {
    let grid = u.grid();
    check_dims(m, grid)?;
    if !(k >= 1.0) {
        bail!(Domain, "level must be >= 1, got {k}");
    }
    if !(rho > 0.0 && rho < radius) {
        bail!(Domain, "radii must satisfy 0 < rho < R, got rho={rho}, R={radius}");
    }
    let ball = Ball::new(x0.to_vec(), radius)?;
    grid.require_ball(&ball)?;
    let inner = ball.with_radius(rho)?;
    let e = m.exponents();
    let lat = grid.lattice()?;
    let w = m.cell_weights(&lat, grid.h());
    let vol = grid.cell_volume();
    let du = gradient(u)?;

    let h = grid.h();
    let outer = ball_weights(&lat, &ball, h);
    let (mut lhs, mut upper_int, mut level_measure) = (0.0, 0.0, 0.0);
    for (c, &wr) in outer.iter().enumerate() {
        if wr == 0.0 {
            continue;
        }
        let uc = lat.average(c, u.values());
        if uc <= k {
            continue;
        }
        upper_int += wr * w.upper(c) * (pow(uc - k, e.q()) + pow(k, e.gamma()));
        level_measure += wr;
        let wi = inner.coverage(lat.center(c), h);
        if wi > 0.0 {
            lhs += wi * m.eval_with(w.lambdas(c), w.mu(c), uc, du.at(c));
        }
    }
    lhs *= vol;
    upper_int *= vol;
    level_measure *= vol;
    let mu_norm = quad_norm(w.upper_all(), e.s(), &outer, vol);
    let rhs = pow(radius - rho, -e.q()) * upper_int + mu_norm * pow(level_measure, 1.0 / e.s_prime());
    let params = vec![param("k", k), param("rho", rho), param("R", radius)];
    Ok(InequalityReport::new("caccioppoli", params, lhs, rhs, f64::MAX))
}

/// `‖u‖_{L^{qs'}(B)}` by cell quadrature, cells weighted by their overlap with `ball`.
pub fn higher_integrability_norm(m: &ModelIntegrand, u: &GridFunction, ball: &Ball) -> Result<f64> {
    let grid = u.grid();
    check_dims(m, grid)?;
    grid.require_ball(ball)?;
    let lat = grid.lattice()?;
    let mask = ball_weights(&lat, ball, grid.h());
    let e = m.exponents();
    Ok(quad_norm(&u.cell_values()?, Exponent::Finite(e.q() * e.s_prime()), &mask, grid.cell_volume()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::{derive, Exponents};
    use crate::fields::{tent, Interval};
    use crate::integrand::WeightField;

    const INF: Exponent = Exponent::Infinite;

    fn grid(n: usize, h: f64) -> Grid {
        Grid::new(&vec![Interval::new(0.0, 1.0); n], h).unwrap()
    }

    fn laplace(n: usize) -> ModelIntegrand {
        ModelIntegrand::unweighted(Exponents::isotropic(n, 2.0, 2.0, 2.0, INF, INF).unwrap()).unwrap()
    }

    fn inner_box(n: usize, lo: f64, hi: f64) -> SubBox {
        SubBox::new(vec![Interval::new(lo, hi); n])
    }

    #[test]
    fn empirical_constant_conventions() {
        assert_eq!(empirical_constant(0.0, 0.0), 0.0);
        assert_eq!(empirical_constant(0.0, 3.0), 0.0);
        assert_eq!(empirical_constant(1.0, 0.0), f64::INFINITY);
        assert_eq!(empirical_constant(1.0, 4.0), 0.25);
    }

    #[test]
    fn lower_bound_constant_function() {
        let g = grid(2, 0.125);
        let u = GridFunction::from_fn(g, |_| 2.5).unwrap();
        let rep = verify_lower_bound(&laplace(2), &u, &inner_box(2, 0.25, 0.75)).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn lower_bound_affine_is_half() {
        let g = grid(2, 0.125);
        let u = GridFunction::from_fn(g, |x| x[0]).unwrap();
        let omega = inner_box(2, 0.25, 0.75);
        let rep = verify_lower_bound(&laplace(2), &u, &omega).unwrap();
        // 16 cells of area 1/64 lie in the box
        assert!((rep.rhs_structure - 0.25).abs() < 1e-14);
        assert!((rep.lhs - 0.125).abs() < 1e-14);
        assert!((rep.c_emp - 0.5).abs() < 1e-14);
        assert!(rep.pass);
    }

    #[test]
    fn lower_bound_rejects_outer_box() {
        let g = grid(2, 0.125);
        let u = GridFunction::zeros(g);
        assert!(matches!(
            verify_lower_bound(&laplace(2), &u, &inner_box(2, 0.0, 0.5)),
            Err(crate::Error::Domain(_))
        ));
    }

    #[test]
    fn embedding_needs_subcritical_exponent() {
        let g = grid(2, 0.125);
        let d = derive(&Exponents::isotropic(2, 2.0, 2.0, 2.0, INF, INF).unwrap());
        assert!(verify_embedding(&GridFunction::zeros(g), &d).is_err());
    }

    #[test]
    fn embedding_zero_and_bump() {
        let g = grid(3, 0.125);
        let d = derive(&Exponents::isotropic(3, 2.0, 2.0, 2.0, INF, INF).unwrap());
        let zero = verify_embedding(&GridFunction::zeros(g.clone()), &d).unwrap();
        assert_eq!((zero.lhs, zero.rhs_structure, zero.c_emp), (0.0, 0.0, 0.0));
        let bump = tent(&g, &inner_box(3, 0.25, 0.75)).unwrap();
        let rep = verify_embedding(&bump, &d).unwrap();
        assert!(rep.c_emp.is_finite() && rep.c_emp > 0.0);
    }

    #[test]
    fn poincare_collapses_to_embedding() {
        let g = grid(3, 0.125);
        let m = laplace(3);
        let d = derive(m.exponents());
        let omega = inner_box(3, 0.25, 0.75);
        let bump = tent(&g, &omega).unwrap();
        let a = verify_embedding(&bump, &d).unwrap();
        let b = verify_poincare_sobolev(&m, &bump, &d, &omega).unwrap();
        assert!((a.c_emp - b.c_emp).abs() <= 1e-10 * a.c_emp);
    }

    #[test]
    fn weight_domination_default_and_override() {
        let g = grid(2, 0.25);
        assert!(verify_weight_domination(&laplace(2), &g).unwrap().pass());
        let bad = laplace(2).with_upper_override(WeightField::Constant(0.25)).unwrap();
        let rep = verify_weight_domination(&bad, &g).unwrap();
        assert!(!rep.pass());
        assert_eq!(rep.violations, rep.checked);
        assert!((rep.worst_ratio - 2.0).abs() < 1e-15);
    }

    #[test]
    fn caccioppoli_empty_level_set() {
        let g = grid(2, 0.0625);
        let u = GridFunction::from_fn(g, |x| 1.0 + x[0]).unwrap();
        let rep = verify_caccioppoli(&laplace(2), &u, 3.0, 0.2, 0.4, &[0.5, 0.5]).unwrap();
        assert_eq!((rep.lhs, rep.rhs_structure), (0.0, 0.0));
        assert!(rep.pass);
    }

    #[test]
    fn caccioppoli_rejects_bad_geometry() {
        let g = grid(2, 0.0625);
        let u = GridFunction::zeros(g);
        let m = laplace(2);
        assert!(verify_caccioppoli(&m, &u, 1.0, 0.4, 0.2, &[0.5, 0.5]).is_err());
        assert!(verify_caccioppoli(&m, &u, 0.5, 0.2, 0.4, &[0.5, 0.5]).is_err());
        assert!(verify_caccioppoli(&m, &u, 1.0, 0.2, 0.6, &[0.5, 0.5]).is_err());
    }
}
