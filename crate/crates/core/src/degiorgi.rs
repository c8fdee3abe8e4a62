//! Level-set iteration: radius and level sequences, the integrals `J_h`,
//! the two iteration lemmas, calibration of the recursion constant and the
//! L∞ certificate.
//!
//! The recursion checked along a trace is
//! `J_{h+1} <= C [1+N]^{E'} d^{-δ1} R^{-δ2} λ^h J_h^{1+α}` with `N` the
//! `L^{σ̄*}(B_R)` norm of `u` and `E'` from [`IterationConstants`].

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::exponents::{
    bound_constant, bound_rhs, choose_d, default_c0, derive, iteration_constants, Exponents,
    IterationConstants,
};
use crate::fields::{Ball, GridFunction};
use crate::integrand::{check_dims, ModelIntegrand};
use crate::real::{abs, exp, ln, pow};

/// Default number of iteration steps `H`.
pub const DEFAULT_STEPS: usize = 40;
/// `J_H <= DECAY_RATIO · max(J_0, DECAY_FLOOR)` counts as decay.
pub const DECAY_RATIO: f64 = 1e-10;
pub const DECAY_FLOOR: f64 = 1e-30;
/// Relative slack on `d <= c R^{-θ2} [1+N]^{θ1}`.
pub const BOUND_TOL: f64 = 1e-6;
/// Safety factor applied to the largest per-step constant in calibration.
pub const CALIBRATION_SAFETY: f64 = 2.0;
/// Levels `d = max(2, f·sup_{B_R}|u|)` used to build calibration traces.
pub const CALIBRATION_FACTORS: [f64; 4] = [1.0, 1.25, 1.5, 1.75];

/// `(ρ_h, k_h, ρ̄_h)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Levels {
    pub rho: f64,
    pub k: f64,
    pub rho_bar: f64,
}

/// `ρ_h = (R/2)(1 + 2^{-h})`, `k_h = d(1 - 2^{-(h+1)})`, `ρ̄_h = (R/2)(1 + 3/(4·2^h))`.
pub fn sequences(radius: f64, d: f64, h: usize) -> Result<Levels> {
    if !(radius > 0.0) || !radius.is_finite() {
        bail!(Domain, "radius must be positive, got {radius}");
    }
    if !(d >= 2.0) || !d.is_finite() {
        bail!(Domain, "level scale d must be >= 2, got {d}");
    }
    let half = pow(2.0, -(h as f64));
    Ok(Levels {
        rho: 0.5 * radius * (1.0 + half),
        k: d * (1.0 - 0.5 * half),
        rho_bar: 0.5 * radius * (1.0 + 0.75 * half),
    })
}

fn level_integral(u: &GridFunction, ball: &Ball, k: f64, power: f64) -> Result<f64> {
    let grid = u.grid();
    let lat = grid.lattice()?;
    let mut total = 0.0;
    for c in 0..lat.len() {
        if !ball.contains(lat.center(c)) {
            continue;
        }
        let uc = lat.average(c, u.values());
        if uc > k {
            total += pow(uc - k, power);
        }
    }
    Ok(total * grid.cell_volume())
}

/// `J_h = ∫_{A_{k_h,ρ_h}} (u - k_h)^{qs'}` for `h = 0..=steps`.
pub fn j_sequence(u: &GridFunction, x0: &[f64], radius: f64, d: f64, e: &Exponents, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 {
        bail!(Domain, "need at least one iteration step");
    }
    if e.n() != u.grid().n() || x0.len() != u.grid().n() {
        bail!(Domain, "dimension mismatch between grid, center and exponents");
    }
    let ball = Ball::new(x0.to_vec(), radius)?;
    u.grid().require_ball(&ball)?;
    let power = e.q() * e.s_prime();
    (0..=steps)
        .map(|h| {
            let lv = sequences(radius, d, h)?;
            level_integral(u, &ball.with_radius(lv.rho)?, lv.k, power)
        })
        .collect()
}

/// Hole-filling check on sampled data.
#[derive(Clone, Debug, PartialEq)]
pub struct HoleFillingReport {
    /// First sampled pair `(s, t)` violating the hypothesis, if any.
    pub hypothesis_violation: Option<(f64, f64)>,
    /// Interpolation constant `C(θ, α)`.
    pub constant: f64,
    /// Largest `φ(ρ) / (A/(R-ρ)^α + B)` over sampled `ρ < R`; `None` when the
    /// hypothesis fails.
    pub empirical_c: Option<f64>,
    pub conclusion_holds: bool,
}

impl HoleFillingReport {
    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis_violation.is_none()
    }
}

const LEMMA_TOL: f64 = 1e-12;

/// `C = (1-τ)^{-α} · 2/(1-θ)` with `τ^α = 2θ/(1+θ)`, from iterating the
/// hypothesis along `t_{i+1} = t_i + (1-τ)τ^i (R-ρ)`.
pub fn hole_filling_constant(theta: f64, alpha: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0) {
        bail!(Domain, "theta must lie in (0, 1), got {theta}");
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        bail!(Domain, "alpha must be finite and >= 0, got {alpha}");
    }
    if alpha == 0.0 {
        // the A-term no longer depends on the gap
        return Ok(1.0 / (1.0 - theta));
    }
    let tau = pow(2.0 * theta / (1.0 + theta), 1.0 / alpha);
    Ok(pow(1.0 - tau, -alpha) * 2.0 / (1.0 - theta))
}

/// Checks `φ(s) <= θφ(t) + A/(t-s)^α + B` on every sampled pair `s < t`,
/// then `φ(ρ) <= C {A/(R-ρ)^α + B}` on every sampled pair `ρ < R`.
pub fn hole_filling(taus: &[f64], phi: &[f64], theta: f64, a: f64, b: f64, alpha: f64) -> Result<HoleFillingReport> {
    if taus.len() != phi.len() || taus.len() < 2 {
        bail!(Domain, "need at least two samples with matching lengths");
    }
    if taus.windows(2).any(|w| !(w[0] < w[1])) {
        bail!(Domain, "sample points must be strictly increasing");
    }
    if phi.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        bail!(Domain, "phi must be finite and non-negative");
    }
    if !(a >= 0.0 && b >= 0.0) {
        bail!(Domain, "A and B must be non-negative");
    }
    let constant = hole_filling_constant(theta, alpha)?;
    let gap_term = |s: f64, t: f64| a * pow(t - s, -alpha) + b;

    for i in 0..taus.len() {
        for j in i + 1..taus.len() {
            let rhs = theta * phi[j] + gap_term(taus[i], taus[j]);
            if phi[i] > rhs * (1.0 + LEMMA_TOL) {
                return Ok(HoleFillingReport {
                    hypothesis_violation: Some((taus[i], taus[j])),
                    constant,
                    empirical_c: None,
                    conclusion_holds: false,
                });
            }
        }
    }
    let mut worst = 0.0f64;
    let mut holds = true;
    for i in 0..taus.len() {
        for j in i + 1..taus.len() {
            let structure = gap_term(taus[i], taus[j]);
            let ratio = if phi[i] == 0.0 { 0.0 } else if structure == 0.0 { f64::INFINITY } else { phi[i] / structure };
            worst = worst.max(ratio);
            holds &= phi[i] <= constant * structure * (1.0 + LEMMA_TOL);
        }
    }
    Ok(HoleFillingReport { hypothesis_violation: None, constant, empirical_c: Some(worst), conclusion_holds: holds })
}

/// Outcome of iterating `J_{h+1} = A λ^h J_h^{1+α}` from the threshold side.
#[derive(Clone, Debug, PartialEq)]
pub struct FastConvergence {
    /// `A^{-1/α} λ^{-1/α²}`.
    pub threshold: f64,
    /// `false` when `J_0` exceeds the threshold; nothing is iterated then.
    pub applicable: bool,
    pub values: Vec<f64>,
    /// `λ^{-h/α} J_0`.
    pub bounds: Vec<f64>,
    pub bound_holds: bool,
    /// `J_H <= 10^{-10} J_0`.
    pub decayed: bool,
}

/// Iterates the extremal recursion for `h = 0..=steps`.
///
/// Works with `y_h = J_h / (λ^{-h/α} J_0)`, which obeys `y_{h+1} = κ y_h^{1+α}`
/// with `κ = (J_0/threshold)^α <= 1`. At the threshold the plain recursion sits
/// on an unstable fixed point and rounding alone drives it away.
pub fn fast_convergence(j0: f64, a: f64, lambda: f64, alpha: f64, steps: usize) -> Result<FastConvergence> {
    if !(a > 0.0) || !(lambda > 1.0) || !(alpha > 0.0) {
        bail!(Domain, "need A > 0, lambda > 1 and alpha > 0");
    }
    if !(j0 >= 0.0) || !j0.is_finite() {
        bail!(Domain, "J0 must be finite and non-negative, got {j0}");
    }
    let log_threshold = -ln(a) / alpha - ln(lambda) / (alpha * alpha);
    let threshold = exp(log_threshold);
    let bounds: Vec<f64> = (0..=steps)
        .map(|h| {
            let factor = pow(lambda, -(h as f64) / alpha);
            if j0 == 0.0 || factor >= f64::MIN_POSITIVE {
                j0 * factor
            } else {
                // λ^{-h/α} alone underflows while the product may not
                exp(ln(j0) - h as f64 / alpha * ln(lambda))
            }
        })
        .collect();
    if j0 > threshold {
        return Ok(FastConvergence { threshold, applicable: false, values: Vec::new(), bounds, bound_holds: false, decayed: false });
    }
    let kappa = if j0 == 0.0 { 0.0 } else { exp(alpha * (ln(j0) - log_threshold)).min(1.0) };
    let mut values = Vec::with_capacity(steps + 1);
    let mut y = 1.0f64;
    for bound in &bounds {
        values.push(bound * y);
        y = kappa * pow(y, 1.0 + alpha);
    }
    let bound_holds = values.iter().zip(&bounds).all(|(v, b)| v <= b);
    let decayed = values.last().is_some_and(|&last| last <= DECAY_RATIO * j0);
    Ok(FastConvergence { threshold, applicable: true, values, bounds, bound_holds, decayed })
}

/// One step of a trace. `c_step` is the smallest `C` with
/// `J_{h+1} <= C G λ^h J_h^{1+α}`, and `rhs` that right side evaluated with
/// the trace's reference constant; both are absent on the last step.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub h: usize,
    pub rho: f64,
    pub k: f64,
    pub rho_bar: f64,
    pub j: f64,
    pub rhs: Option<f64>,
    pub c_step: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationTrace {
    pub d: f64,
    pub radius: f64,
    pub x0: Vec<f64>,
    pub norm: f64,
    /// Constant used for `rhs`.
    pub c_ref: f64,
    pub steps: Vec<TraceStep>,
    /// Largest `c_step`.
    pub c_emp: f64,
}

impl IterationTrace {
    /// Builds a trace from `J_0..=J_H`; `c_ref = None` uses `c_emp`.
    pub fn from_levels(
        js: &[f64],
        d: f64,
        radius: f64,
        x0: &[f64],
        norm: f64,
        c: &IterationConstants,
        c_ref: Option<f64>,
    ) -> Result<Self> {
        if js.len() < 2 {
            bail!(Domain, "a trace needs at least J_0 and J_1");
        }
        // log of [1+N]^{E'} d^{-δ1} R^{-δ2}
        let log_g = c.norm_exponent * libm::log1p(norm) - c.delta1 * ln(d) - c.delta2 * ln(radius);
        let log_lambda = ln(c.lambda_base);
        let log_rhs_core = |h: usize, j: f64| log_g + h as f64 * log_lambda + (1.0 + c.alpha) * ln(j);
        let c_steps: Vec<f64> = js
            .windows(2)
            .enumerate()
            .map(|(h, w)| if w[1] == 0.0 { 0.0 } else { exp(ln(w[1]) - log_rhs_core(h, w[0])) })
            .collect();
        let c_emp = c_steps.iter().fold(0.0f64, |m, v| m.max(*v));
        let c_ref = c_ref.unwrap_or(c_emp);
        let steps = js
            .iter()
            .enumerate()
            .map(|(h, &j)| {
                let lv = sequences(radius, d, h)?;
                let last = h + 1 == js.len();
                let rhs = (!last).then(|| if j == 0.0 { 0.0 } else { c_ref * exp(log_rhs_core(h, j)) });
                Ok(TraceStep { h, rho: lv.rho, k: lv.k, rho_bar: lv.rho_bar, j, rhs, c_step: (!last).then(|| c_steps[h]) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { d, radius, x0: x0.to_vec(), norm, c_ref, steps, c_emp })
    }

    pub fn j_values(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.j).collect()
    }

    /// `J_H <= 10^{-10} max(J_0, 10^{-30})`.
    pub fn decayed(&self) -> bool {
        let j0 = self.steps[0].j;
        self.steps.last().is_some_and(|s| s.j <= DECAY_RATIO * j0.max(DECAY_FLOOR))
    }
}

/// `2 ×` the largest per-step constant over all traces.
pub fn calibrate_c(traces: &[IterationTrace]) -> Result<f64> {
    if traces.is_empty() {
        bail!(Domain, "calibration needs at least one trace");
    }
    let worst = traces.iter().fold(0.0f64, |m, t| m.max(t.c_emp));
    if !(worst > 0.0) || !worst.is_finite() {
        bail!(Domain, "no trace has a non-trivial recursion step");
    }
    Ok(CALIBRATION_SAFETY * worst)
}

/// `‖u‖_{L^β(B)}` by cell quadrature.
fn ball_norm(u: &GridFunction, ball: &Ball, beta: f64) -> Result<f64> {
    let grid = u.grid();
    let lat = grid.lattice()?;
    let sum: f64 = (0..lat.len())
        .filter(|&c| ball.contains(lat.center(c)))
        .map(|c| pow(abs(lat.average(c, u.values())), beta))
        .sum();
    Ok(pow(sum * grid.cell_volume(), 1.0 / beta))
}

struct Setup {
    constants: IterationConstants,
    ball: Ball,
    norm: f64,
}

fn setup(m: &ModelIntegrand, u: &GridFunction, x0: &[f64], radius: f64) -> Result<Setup> {
    check_dims(m, u.grid())?;
    if x0.len() != u.grid().n() {
        bail!(Domain, "center has {} coordinates, grid is {}-dimensional", x0.len(), u.grid().n());
    }
    if !(radius > 0.0 && radius <= 1.0) {
        bail!(Domain, "radius must lie in (0, 1], got {radius}");
    }
    let e = m.exponents();
    let constants = iteration_constants(&derive(e), e)?;
    let ball = Ball::new(x0.to_vec(), radius)?;
    u.grid().require_ball(&ball)?;
    let norm = ball_norm(u, &ball, constants.sigma_star)?;
    Ok(Setup { constants, ball, norm })
}

/// Traces of `u` and `-u` at `d = max(2, f·sup_{B_R}|u|)` for each
/// calibration factor `f`, with `c_ref = c_emp`.
pub fn calibration_traces(m: &ModelIntegrand, u: &GridFunction, x0: &[f64], radius: f64, steps: usize) -> Result<Vec<IterationTrace>> {
    let s = setup(m, u, x0, radius)?;
    let sup = u.max_abs_in_ball(&s.ball);
    let minus = u.negated();
    let mut traces = Vec::new();
    for f in CALIBRATION_FACTORS {
        let d = (f * sup).max(2.0);
        for v in [u, &minus] {
            let js = j_sequence(v, x0, radius, d, m.exponents(), steps)?;
            traces.push(IterationTrace::from_levels(&js, d, radius, x0, s.norm, &s.constants, None)?);
        }
    }
    Ok(traces)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub x0: Vec<f64>,
    pub radius: f64,
    /// `‖u‖_{L^{σ̄*}(B_R)}`.
    pub norm: f64,
    pub c_cal: f64,
    pub c0: f64,
    /// Level scale: the larger of the values for `u` and `-u`.
    pub d: f64,
    pub sup_half_ball: f64,
    pub slack: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// Power of `[1+N]` in `d`, `E/δ1`.
    pub d_norm_exponent: f64,
    pub bound_constant: f64,
    pub rhs_bound: f64,
    /// `A^{-1/α} λ^{-1/α²}` for the recursion at this `d`.
    pub lemma_threshold: f64,
    pub decay: bool,
    pub valid: bool,
    pub trace_plus: IterationTrace,
    pub trace_minus: IterationTrace,
}

/// Certifies `sup_{B_{R/2}(x0)} |u| <= d` by running the level-set iteration
/// on `u` and `-u`.
pub fn certify(m: &ModelIntegrand, u: &GridFunction, x0: &[f64], radius: f64, c_cal: f64, steps: usize) -> Result<Certificate> {
    let s = setup(m, u, x0, radius)?;
    let c = &s.constants;
    let n = u.grid().n();
    let c0 = default_c0(c, n);
    let minus = u.negated();
    let d_plus = choose_d(c, c_cal, c0, radius, s.norm)?;
    let d_minus = choose_d(c, c_cal, c0, radius, ball_norm(&minus, &s.ball, c.sigma_star)?)?;
    let d = d_plus.max(d_minus);

    let e = m.exponents();
    let js_plus = j_sequence(u, x0, radius, d, e, steps)?;
    let js_minus = j_sequence(&minus, x0, radius, d, e, steps)?;
    let trace_plus = IterationTrace::from_levels(&js_plus, d, radius, x0, s.norm, c, Some(c_cal))?;
    let trace_minus = IterationTrace::from_levels(&js_minus, d, radius, x0, s.norm, c, Some(c_cal))?;
    let decay = trace_plus.decayed() && trace_minus.decayed();

    let sup_half_ball = u.max_abs_in_ball(&s.ball.with_radius(0.5 * radius)?);
    let slack = d - sup_half_ball;
    let k = bound_constant(c, c_cal, c0);
    let rhs_bound = bound_rhs(c, k, radius, s.norm);
    let log_a = ln(c_cal) + c.norm_exponent * libm::log1p(s.norm) - c.delta1 * ln(d) - c.delta2 * ln(radius);
    let lemma_threshold = exp(-log_a / c.alpha - ln(c.lambda_base) / (c.alpha * c.alpha));
    let valid = decay && slack >= 0.0 && d <= rhs_bound * (1.0 + BOUND_TOL);

    Ok(Certificate {
        x0: x0.to_vec(),
        radius,
        norm: s.norm,
        c_cal,
        c0,
        d,
        sup_half_ball,
        slack,
        theta1: c.theta1,
        theta2: c.theta2,
        d_norm_exponent: c.d_exponent / c.delta1,
        bound_constant: k,
        rhs_bound,
        lemma_threshold,
        decay,
        valid,
        trace_plus,
        trace_minus,
    })
}

/// `‖u‖_{L^{qs'}(B_R)}^{qs'}`, the bound on `J_0`.
pub fn j0_bound(u: &GridFunction, x0: &[f64], radius: f64, e: &Exponents) -> Result<f64> {
    let ball = Ball::new(x0.to_vec(), radius)?;
    u.grid().require_ball(&ball)?;
    let qs = e.q() * e.s_prime();
    level_integral(&u.map(abs)?, &ball, 0.0, qs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequences_example() {
        let lv = sequences(1.0, 4.0, 0).unwrap();
        assert_eq!((lv.rho, lv.k, lv.rho_bar), (1.0, 2.0, 0.875));
        assert!(sequences(1.0, 1.5, 0).is_err());
    }

    #[test]
    fn sequences_nest() {
        for h in 0..50 {
            let a = sequences(0.7, 3.0, h).unwrap();
            let b = sequences(0.7, 3.0, h + 1).unwrap();
            assert!(b.rho < a.rho_bar && a.rho_bar < a.rho, "h = {h}");
            assert!(b.k > a.k);
        }
        let far = sequences(0.7, 3.0, 60).unwrap();
        assert!((far.rho - 0.35).abs() < 1e-15 && (far.k - 3.0).abs() < 1e-15);
    }

    #[test]
    fn hole_filling_constant_grows() {
        let c1 = hole_filling_constant(0.5, 1.0).unwrap();
        let c2 = hole_filling_constant(0.9, 1.0).unwrap();
        assert!(c1 >= 2.0 && c2 > c1);
        assert!(hole_filling_constant(1.0, 1.0).is_err());
    }

    #[test]
    fn fast_convergence_gate() {
        let out = fast_convergence(0.6, 1.0, 2.0, 1.0, 5).unwrap();
        assert!(!out.applicable && out.values.is_empty());
        let zero = fast_convergence(0.0, 1.0, 2.0, 1.0, 5).unwrap();
        assert!(zero.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn calibrate_needs_input() {
        assert!(calibrate_c(&[]).is_err());
    }
}
