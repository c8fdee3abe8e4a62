//! Dirichlet minimization of the discrete energy.
//!
//! The interior nodal values are optimized by nonlinear conjugate gradients
//! (Polak–Ribière, clipped at zero) with an Armijo backtracking line search;
//! boundary nodes stay fixed. Terms `|t|^p` with `p < 2` are replaced by the
//! smooth `(t² + ε²)^{p/2} - ε^p`.
//!
//! Energy differences along a search line are evaluated cell by cell from the
//! exact increments of the arguments, so the sufficient-decrease test stays
//! meaningful long after plain energy values stop resolving the decrease.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::fields::{CellLattice, Grid, GridFunction};
use crate::integrand::{check_dims, energy, CellWeights, ModelIntegrand};
use crate::real::{abs, pow};

/// Descent parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// Tolerance on the sup-norm of the energy gradient divided by `h^n`.
    pub grad_tol: f64,
    /// First trial step, as a multiple of `h` for the largest nodal move.
    pub initial_step: f64,
    /// Upper bound on the backtracking contraction, in `(0, 1)`.
    pub shrink: f64,
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Smoothing for `p < 2`; `None` means `h²`.
    pub smoothing_eps: Option<f64>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            grad_tol: 1e-9,
            initial_step: 1.0,
            shrink: 0.5,
            armijo: 1e-4,
            smoothing_eps: None,
        }
    }
}

impl SolveConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            bail!(Config, "max_iters must be positive");
        }
        if !(self.grad_tol > 0.0) || !(self.initial_step > 0.0) {
            bail!(Config, "grad_tol and initial_step must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            bail!(Config, "shrink factor must lie in (0, 1), got {}", self.shrink);
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            bail!(Config, "armijo constant must lie in (0, 1), got {}", self.armijo);
        }
        if let Some(eps) = self.smoothing_eps {
            if !(eps >= 0.0) || !eps.is_finite() {
                bail!(Config, "smoothing_eps must be finite and >= 0, got {eps}");
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub u: GridFunction,
    /// Unsmoothed energy of `u`.
    pub final_energy: f64,
    /// Objective actually minimized (smoothed when some exponent is below 2).
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    /// Objective after every accepted step, starting with the initial guess.
    pub history: Vec<f64>,
}

/// `t ↦ (t² + ε²)^{p/2} - ε^p`, or `|t|^p` when `ε = 0`.
#[derive(Clone, Copy, Debug)]
struct SmoothPower {
    p: f64,
    eps2: f64,
    eps_p: f64,
}

impl SmoothPower {
    fn new(p: f64, eps: f64) -> Self {
        let eps = if p < 2.0 { eps } else { 0.0 };
        Self { p, eps2: eps * eps, eps_p: if eps > 0.0 { pow(eps, p) } else { 0.0 } }
    }

    fn exact_square(&self) -> bool {
        self.p == 2.0 && self.eps2 == 0.0
    }

    fn value(&self, t: f64) -> f64 {
        if self.exact_square() {
            t * t
        } else if self.eps2 == 0.0 {
            pow(abs(t), self.p)
        } else {
            pow(t * t + self.eps2, 0.5 * self.p) - self.eps_p
        }
    }

    fn deriv(&self, t: f64) -> f64 {
        if self.exact_square() {
            2.0 * t
        } else if self.eps2 == 0.0 {
            if t == 0.0 {
                0.0
            } else {
                self.p * pow(abs(t), self.p - 1.0) * t.signum()
            }
        } else {
            self.p * t * pow(t * t + self.eps2, 0.5 * self.p - 1.0)
        }
    }

    /// `value(b + d) - value(b)` without cancellation.
    fn delta(&self, b: f64, d: f64) -> f64 {
        if self.exact_square() {
            return (2.0 * b + d) * d;
        }
        let s = b * b + self.eps2;
        if abs(d) >= abs(b) {
            // no cancellation to avoid, and the ratio below could overflow
            return pow((b + d) * (b + d) + self.eps2, 0.5 * self.p) - pow(s, 0.5 * self.p);
        }
        let r = (2.0 * b + d) * d / s;
        pow(s, 0.5 * self.p) * libm::expm1(0.5 * self.p * libm::log1p(r))
    }
}

struct Objective {
    lat: CellLattice,
    weights: CellWeights,
    strides: Vec<usize>,
    terms: Vec<SmoothPower>,
    u_term: SmoothPower,
    u_coeff: f64,
    inv_h: f64,
    vol: f64,
    free: Vec<bool>,
}

/// Cell arguments at a point and their increments along a direction.
struct LineData {
    xi: Vec<f64>,
    dxi: Vec<f64>,
    uc: Vec<f64>,
    duc: Vec<f64>,
}

impl Objective {
    fn new(m: &ModelIntegrand, grid: &Grid, eps: f64) -> Result<Self> {
        let lat = grid.lattice()?;
        let weights = m.cell_weights(&lat, grid.h());
        let e = m.exponents();
        let free = (0..grid.node_count()).map(|i| !grid.is_boundary_node(i)).collect();
        Ok(Self {
            weights,
            strides: grid.strides().to_vec(),
            terms: e.p().iter().map(|&p| SmoothPower::new(p, eps)).collect(),
            u_term: SmoothPower::new(e.gamma(), eps),
            u_coeff: m.u_coeff(),
            inv_h: 1.0 / grid.h(),
            vol: grid.cell_volume(),
            free,
            lat,
        })
    }

    fn n(&self) -> usize {
        self.strides.len()
    }

    fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let n = self.n();
        let corner_share = 1.0 / self.lat.offsets().len() as f64;
        let mut total = 0.0;
        for c in 0..self.lat.len() {
            let base = self.lat.corner(c);
            let lams = self.weights.lambdas(c);
            for axis in 0..n {
                let nb = base + self.strides[axis];
                let xi = (x[nb] - x[base]) * self.inv_h;
                let term = &self.terms[axis];
                total += lams[axis] * term.value(xi);
                let g = lams[axis] * term.deriv(xi) * self.inv_h * self.vol;
                grad[nb] += g;
                grad[base] -= g;
            }
            if self.u_coeff > 0.0 {
                let w = self.u_coeff * self.weights.mu(c);
                let uc = self.lat.average(c, x);
                total += w * self.u_term.value(uc);
                let g = w * self.u_term.deriv(uc) * corner_share * self.vol;
                for o in self.lat.offsets() {
                    grad[base + o] += g;
                }
            }
        }
        for (g, free) in grad.iter_mut().zip(&self.free) {
            if !free {
                *g = 0.0;
            }
        }
        total * self.vol
    }

    fn line_data(&self, x: &[f64], dir: &[f64]) -> LineData {
        let n = self.n();
        let cells = self.lat.len();
        let mut xi = Vec::with_capacity(cells * n);
        let mut dxi = Vec::with_capacity(cells * n);
        let (mut uc, mut duc) = (Vec::new(), Vec::new());
        for c in 0..cells {
            let base = self.lat.corner(c);
            for axis in 0..n {
                let nb = base + self.strides[axis];
                xi.push((x[nb] - x[base]) * self.inv_h);
                dxi.push((dir[nb] - dir[base]) * self.inv_h);
            }
            if self.u_coeff > 0.0 {
                uc.push(self.lat.average(c, x));
                duc.push(self.lat.average(c, dir));
            }
        }
        LineData { xi, dxi, uc, duc }
    }

    /// `objective(x + t·dir) - objective(x)`.
    fn delta(&self, line: &LineData, t: f64) -> f64 {
        let n = self.n();
        let mut total = 0.0;
        for c in 0..self.lat.len() {
            let lams = self.weights.lambdas(c);
            for axis in 0..n {
                let k = c * n + axis;
                total += lams[axis] * self.terms[axis].delta(line.xi[k], t * line.dxi[k]);
            }
            if self.u_coeff > 0.0 {
                total += self.u_coeff * self.weights.mu(c) * self.u_term.delta(line.uc[c], t * line.duc[c]);
            }
        }
        total * self.vol
    }

    fn residual(&self, grad: &[f64]) -> f64 {
        grad.iter().zip(&self.free).filter(|(_, f)| **f).fold(0.0f64, |m, (g, _)| m.max(abs(*g))) / self.vol
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const MAX_BACKTRACKS: usize = 60;

/// Backtracking with safeguarded quadratic interpolation. Returns the
/// accepted step and the (negative) objective change.
fn line_search(obj: &Objective, line: &LineData, slope: f64, t0: f64, cfg: &SolveConfig) -> Option<(f64, f64)> {
    let mut t = t0;
    for _ in 0..MAX_BACKTRACKS {
        let dt = obj.delta(line, t);
        let curvature = dt - slope * t;
        if dt.is_finite() && dt <= cfg.armijo * t * slope {
            // One interpolation step toward the line minimum, kept only if it helps.
            if curvature > 0.0 {
                let t_star = -slope * t * t / (2.0 * curvature);
                if t_star.is_finite() && (t_star > 1.1 * t || t_star < 0.9 * t) && t_star > 0.0 {
                    let ds = obj.delta(line, t_star);
                    if ds.is_finite() && ds < dt && ds <= cfg.armijo * t_star * slope {
                        return Some((t_star, ds));
                    }
                }
            }
            return Some((t, dt));
        }
        let t_quad = -slope * t * t / (2.0 * curvature);
        t = if dt.is_finite() && curvature > 0.0 && t_quad.is_finite() {
            t_quad.clamp(0.1 * t, cfg.shrink * t)
        } else {
            cfg.shrink * t
        };
        if !(t > 0.0) {
            break;
        }
    }
    None
}

/// Minimizes the discrete energy with the boundary values of `boundary`,
/// starting from zero in the interior.
pub fn solve(m: &ModelIntegrand, boundary: &GridFunction, cfg: &SolveConfig) -> Result<SolveResult> {
    let grid = boundary.grid();
    let start: Vec<f64> = (0..grid.node_count())
        .map(|i| if grid.is_boundary_node(i) { boundary.values()[i] } else { 0.0 })
        .collect();
    solve_from(m, &GridFunction::new(grid.clone(), start)?, cfg)
}

/// Minimizes starting from `initial`, whose boundary values stay fixed.
pub fn solve_from(m: &ModelIntegrand, initial: &GridFunction, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let grid = initial.grid().clone();
    check_dims(m, &grid)?;
    let eps = cfg.smoothing_eps.unwrap_or(grid.h() * grid.h());
    let obj = Objective::new(m, &grid, eps)?;

    let mut x = initial.values().to_vec();
    let mut grad = vec![0.0; x.len()];
    let mut f = obj.value_grad(&x, &mut grad);
    let mut dir: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut history = vec![f];
    let mut residual = obj.residual(&grad);
    let mut converged = residual <= cfg.grad_tol;
    let mut iterations = 0;
    let mut previous: Option<(f64, f64)> = None;
    let mut next_grad = vec![0.0; x.len()];

    while !converged && iterations < cfg.max_iters {
        let gg = dot(&grad, &grad);
        let mut slope = dot(&grad, &dir);
        if !(slope < 0.0) {
            dir.iter_mut().zip(&grad).for_each(|(d, g)| *d = -g);
            slope = -gg;
        }
        let max_dir = dir.iter().fold(0.0f64, |a, d| a.max(abs(*d)));
        let t0 = match previous {
            Some((t_prev, slope_prev)) => t_prev * slope_prev / slope,
            None => cfg.initial_step * grid.h() / max_dir,
        };
        let mut line = obj.line_data(&x, &dir);
        let mut step = line_search(&obj, &line, slope, t0, cfg);
        if step.is_none() && slope != -gg {
            // retry along steepest descent
            dir.iter_mut().zip(&grad).for_each(|(d, g)| *d = -g);
            slope = -gg;
            let max_dir = dir.iter().fold(0.0f64, |a, d| a.max(abs(*d)));
            line = obj.line_data(&x, &dir);
            step = line_search(&obj, &line, slope, cfg.initial_step * grid.h() / max_dir, cfg);
        }
        let Some((t, _)) = step else { break };

        x.iter_mut().zip(&dir).for_each(|(xi, d)| *xi += t * d);
        f = obj.value_grad(&x, &mut next_grad);
        history.push(f);
        iterations += 1;
        previous = Some((t, slope));

        let beta = (dot(&next_grad, &next_grad) - dot(&next_grad, &grad)) / gg;
        let beta = if beta.is_finite() { beta.max(0.0) } else { 0.0 };
        core::mem::swap(&mut grad, &mut next_grad);
        dir.iter_mut().zip(&grad).for_each(|(d, g)| *d = -g + beta * *d);
        residual = obj.residual(&grad);
        converged = residual <= cfg.grad_tol;
    }

    let u = GridFunction::new(grid, x)?;
    let final_energy = energy(m, &u, |_| true)?;
    Ok(SolveResult { u, final_energy, objective: f, iterations, converged, residual, history })
}

/// One perturbation outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiMinCheck {
    /// `F(u; supp φ)`.
    pub energy_u: f64,
    /// `F(u + φ; supp φ)`.
    pub energy_perturbed: f64,
    pub support_cells: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuasiMinReport {
    pub q: f64,
    pub checks: Vec<QuasiMinCheck>,
    pub failures: usize,
    /// Smallest `Q >= 1` satisfying every sampled inequality.
    pub empirical_q: f64,
}

impl QuasiMinReport {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

const QUASI_MIN_TOL: f64 = 1e-10;

/// Tests `F(u; supp φ) <= Q F(u + φ; supp φ)` for each perturbation.
///
/// `supp φ` is the set of cells with a corner where `φ != 0`, which are the
/// only cells whose integrand changes.
pub fn verify_quasiminimality(
    m: &ModelIntegrand,
    u: &GridFunction,
    q: f64,
    perturbations: &[GridFunction],
) -> Result<QuasiMinReport> {
    if !(q >= 1.0) {
        bail!(Domain, "quasi-minimality constant must be >= 1, got {q}");
    }
    let grid = u.grid();
    check_dims(m, grid)?;
    let lat = grid.lattice()?;
    let weights = m.cell_weights(&lat, grid.h());
    let cell_energy = |vals: &[f64], c: usize| -> f64 {
        let base = lat.corner(c);
        let xi: Vec<f64> = grid
            .strides()
            .iter()
            .map(|s| (vals[base + s] - vals[base]) / grid.h())
            .collect();
        m.eval_with(weights.lambdas(c), weights.mu(c), lat.average(c, vals), &xi)
    };

    let mut checks = Vec::with_capacity(perturbations.len());
    let mut empirical_q = 1.0f64;
    for phi in perturbations {
        if phi.grid() != grid {
            bail!(Config, "perturbation lives on a different grid");
        }
        if !phi.vanishes_on_boundary() {
            bail!(Domain, "perturbation does not vanish on the boundary");
        }
        let moved: Vec<f64> = u.values().iter().zip(phi.values()).map(|(a, b)| a + b).collect();
        let (mut fu, mut fp, mut support) = (0.0, 0.0, 0);
        for c in 0..lat.len() {
            let base = lat.corner(c);
            if lat.offsets().iter().all(|o| phi.values()[base + o] == 0.0) {
                continue;
            }
            support += 1;
            fu += cell_energy(u.values(), c);
            fp += cell_energy(&moved, c);
        }
        fu *= grid.cell_volume();
        fp *= grid.cell_volume();
        let pass = fu <= q * fp + QUASI_MIN_TOL;
        if fp > 0.0 {
            empirical_q = empirical_q.max(fu / fp);
        } else if fu > 0.0 {
            empirical_q = f64::INFINITY;
        }
        checks.push(QuasiMinCheck { energy_u: fu, energy_perturbed: fp, support_cells: support, pass });
    }
    let failures = checks.iter().filter(|c| !c.pass).count();
    Ok(QuasiMinReport { q, checks, failures, empirical_q })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_power_delta_matches_difference() {
        for &(p, eps) in &[(2.0, 0.0), (3.0, 0.0), (1.5, 0.01), (2.5, 0.0), (1.2, 1e-4)] {
            let sp = SmoothPower::new(p, eps);
            for &(b, d) in &[(0.3, 0.1), (-1.2, 0.5), (0.0, 0.7), (2.0, -2.0), (0.5, -1.5)] {
                let direct = sp.value(b + d) - sp.value(b);
                assert!((sp.delta(b, d) - direct).abs() < 1e-12, "p={p} b={b} d={d}");
            }
        }
    }

    #[test]
    fn smooth_power_delta_with_tiny_base() {
        let sp = SmoothPower::new(3.0, 0.0);
        for b in [1e-160, -1e-170, 5e-324] {
            let d = sp.delta(b, 0.5);
            assert!(d.is_finite() && (d - 0.125).abs() < 1e-15, "b={b}: {d}");
        }
    }

    #[test]
    fn smooth_power_derivative() {
        for &(p, eps) in &[(2.0, 0.0), (3.0, 0.0), (1.5, 0.05)] {
            let sp = SmoothPower::new(p, eps);
            for &t in &[-0.8, -0.01, 0.2, 1.7] {
                let fd = (sp.value(t + 1e-6) - sp.value(t - 1e-6)) / 2e-6;
                assert!((sp.deriv(t) - fd).abs() < 1e-6 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn config_validation() {
        let bad = SolveConfig { shrink: 1.0, ..SolveConfig::default() };
        assert!(bad.validate().is_err());
        let bad = SolveConfig { max_iters: 0, ..SolveConfig::default() };
        assert!(bad.validate().is_err());
        assert!(SolveConfig::default().validate().is_ok());
    }
}
