//! Exponent calculus: the raw tuple `(p_i, q, γ, r_i, s)`, the quantities
//! derived from it, the three admissibility conditions and the closed-form
//! constants driving the level-set iteration.
//!
//! Infinite exponents carry an explicit tag ([`Exponent::Infinite`]) and every
//! formula applies the conventions `1/∞ = 0`, `r/(r+1) = 1` and `∞' = 1`
//! directly instead of leaning on IEEE infinity arithmetic.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{bail, Result};
use crate::real::{ln, pow, exp, unit_ball_volume};

/// An integrability exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// Maps `f64::INFINITY` to [`Exponent::Infinite`], anything else to a finite value.
    pub fn new(value: f64) -> Self {
        if value == f64::INFINITY {
            Exponent::Infinite
        } else {
            Exponent::Finite(value)
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinite => None,
        }
    }

    /// `1/β` with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Infinite => 0.0,
        }
    }

    /// `β/(β+1)` with the value 1 at infinity.
    pub fn ratio_to_successor(self) -> f64 {
        match self {
            Exponent::Finite(v) => v / (v + 1.0),
            Exponent::Infinite => 1.0,
        }
    }

    /// IEEE view of the exponent, for printing and comparisons only.
    pub fn to_f64(self) -> f64 {
        match self {
            Exponent::Finite(v) => v,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl From<f64> for Exponent {
    fn from(value: f64) -> Self {
        Exponent::new(value)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

/// Hölder conjugate `β' = β/(β-1)`, with `1' = ∞` and `∞' = 1`.
pub fn conjugate_exponent(beta: Exponent) -> Result<Exponent> {
    match beta {
        Exponent::Infinite => Ok(Exponent::Finite(1.0)),
        Exponent::Finite(b) if !(b >= 1.0) || !b.is_finite() => {
            bail!(Domain, "conjugate exponent needs beta >= 1, got {b}")
        }
        Exponent::Finite(b) if b == 1.0 => Ok(Exponent::Infinite),
        Exponent::Finite(b) => Ok(Exponent::Finite(b / (b - 1.0))),
    }
}

/// Harmonic average `n / Σ 1/β_i`; infinite exactly when every `β_i` is.
pub fn harmonic_mean(betas: &[Exponent]) -> Result<Exponent> {
    if betas.is_empty() {
        bail!(Domain, "harmonic mean of an empty list");
    }
    let mut total = 0.0;
    for b in betas {
        if let Exponent::Finite(v) = *b {
            if !(v >= 1.0) || !v.is_finite() {
                bail!(Domain, "harmonic mean needs exponents >= 1, got {v}");
            }
        }
        total += b.recip();
    }
    if total == 0.0 {
        return Ok(Exponent::Infinite);
    }
    Ok(Exponent::Finite(betas.len() as f64 / total))
}

/// Sobolev exponent `nβ/(n-β)` for `1 <= β < n`.
pub fn sobolev_star(beta_bar: Exponent, n: usize) -> Result<f64> {
    let nf = n as f64;
    match beta_bar {
        Exponent::Infinite => bail!(Domain, "Sobolev exponent needs beta < n = {n}, got inf"),
        Exponent::Finite(b) if !(b >= 1.0) => {
            bail!(Domain, "Sobolev exponent needs beta >= 1, got {b}")
        }
        Exponent::Finite(b) if b >= nf => {
            bail!(Domain, "Sobolev exponent needs beta < n = {n}, got {b}")
        }
        Exponent::Finite(b) => Ok(nf * b / (nf - b)),
    }
}

/// The exponent tuple of the growth conditions.
///
/// Construction enforces `1 < p_i <= q <= γ`, `r_i >= 1` and `s > 1`.
/// Dimension 1 is accepted so that one-dimensional solver problems can be
/// described; statements that need `n >= 2` check it themselves.
#[derive(Clone, Debug, PartialEq)]
pub struct Exponents {
    n: usize,
    p: Vec<f64>,
    q: f64,
    gamma: f64,
    r: Vec<Exponent>,
    s: Exponent,
}

impl Exponents {
    pub fn new(p: Vec<f64>, q: f64, gamma: f64, r: Vec<Exponent>, s: Exponent) -> Result<Self> {
        let n = p.len();
        if n == 0 {
            bail!(InvalidExponents, "need at least one p_i");
        }
        if r.len() != n {
            bail!(InvalidExponents, "got {} p_i but {} r_i", n, r.len());
        }
        if !q.is_finite() || !gamma.is_finite() {
            bail!(InvalidExponents, "q and gamma must be finite");
        }
        for (i, &pi) in p.iter().enumerate() {
            if !(pi > 1.0) || !pi.is_finite() {
                bail!(InvalidExponents, "p_{} = {pi} must exceed 1", i + 1);
            }
            if pi > q {
                bail!(InvalidExponents, "p_{} = {pi} exceeds q = {q}", i + 1);
            }
        }
        if q > gamma {
            bail!(InvalidExponents, "q = {q} exceeds gamma = {gamma}");
        }
        for (i, ri) in r.iter().enumerate() {
            if let Exponent::Finite(v) = *ri {
                if !(v >= 1.0) || !v.is_finite() {
                    bail!(InvalidExponents, "r_{} = {v} must be >= 1", i + 1);
                }
            }
        }
        if let Exponent::Finite(v) = s {
            if !(v > 1.0) || !v.is_finite() {
                bail!(InvalidExponents, "s = {v} must exceed 1");
            }
        }
        Ok(Self { n, p, q, gamma, r, s })
    }

    /// `p_i = p`, `r_i = r` for every axis.
    pub fn isotropic(n: usize, p: f64, q: f64, gamma: f64, r: Exponent, s: Exponent) -> Result<Self> {
        Self::new(alloc::vec![p; n], q, gamma, alloc::vec![r; n], s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r(&self) -> &[Exponent] {
        &self.r
    }

    pub fn s(&self) -> Exponent {
        self.s
    }

    /// Conjugate of `s`; always finite because `s > 1`.
    pub fn s_prime(&self) -> f64 {
        match self.s {
            Exponent::Infinite => 1.0,
            Exponent::Finite(v) => v / (v - 1.0),
        }
    }
}

/// Quantities derived from an [`Exponents`] tuple.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedExponents {
    /// `σ_i = p_i r_i/(r_i+1)`.
    pub sigma: Vec<f64>,
    pub sigma_bar: f64,
    /// `σ̄* = nσ̄/(n-σ̄)`, present only when `σ̄ < n`.
    pub sigma_star: Option<f64>,
    pub p_bar: f64,
    pub s_prime: f64,
    /// Conditions (i) `σ̄ < n`, (ii) `q < σ̄*/s'`, (iii) `γ < (σ̄*/s')(p̄/q) + q - p̄`.
    pub admissible: [bool; 3],
}

impl DerivedExponents {
    pub fn is_admissible(&self) -> bool {
        self.admissible.iter().all(|&c| c)
    }
}

fn harmonic_of(values: &[f64]) -> f64 {
    values.len() as f64 / values.iter().map(|v| 1.0 / v).sum::<f64>()
}

/// Upper end of the admissible γ-range, `(σ̄*/s')(p̄/q) + q - p̄`.
fn gamma_bound(sigma_star: f64, s_prime: f64, p_bar: f64, q: f64) -> f64 {
    sigma_star / s_prime * (p_bar / q) + q - p_bar
}

pub fn derive(e: &Exponents) -> DerivedExponents {
    let sigma: Vec<f64> = e
        .p
        .iter()
        .zip(&e.r)
        .map(|(&p, r)| p * r.ratio_to_successor())
        .collect();
    let sigma_bar = harmonic_of(&sigma);
    let p_bar = harmonic_of(&e.p);
    let s_prime = e.s_prime();
    let nf = e.n as f64;
    let sigma_star = (sigma_bar < nf).then(|| nf * sigma_bar / (nf - sigma_bar));
    let cond_ii = sigma_star.is_some_and(|ss| e.q < ss / s_prime);
    let cond_iii = sigma_star.is_some_and(|ss| e.gamma < gamma_bound(ss, s_prime, p_bar, e.q));
    DerivedExponents {
        sigma,
        sigma_bar,
        sigma_star,
        p_bar,
        s_prime,
        admissible: [sigma_star.is_some(), cond_ii, cond_iii],
    }
}

/// Outcome of the three-condition admissibility test.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub conditions: [bool; 3],
    /// `(σ̄*/s')(p̄/q) + q - p̄`, when `σ̄*` exists.
    pub gamma_upper: Option<f64>,
    /// Whether `[q, gamma_upper)` is non-empty; implied by condition (ii).
    pub gamma_range_nonempty: bool,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.conditions.iter().all(|&c| c)
    }
}

pub fn check_admissibility(d: &DerivedExponents, e: &Exponents) -> AdmissibilityReport {
    let gamma_upper = d
        .sigma_star
        .map(|ss| gamma_bound(ss, d.s_prime, d.p_bar, e.q));
    AdmissibilityReport {
        conditions: d.admissible,
        gamma_upper,
        gamma_range_nonempty: gamma_upper.is_some_and(|g| g > e.q),
    }
}

fn require_admissible(d: &DerivedExponents, e: &Exponents) -> Result<f64> {
    if e.n < 2 {
        bail!(Domain, "the boundedness estimate needs n >= 2, got n = {}", e.n);
    }
    let labels = ["(i) sigma_bar < n", "(ii) q < sigma*/s'", "(iii) gamma below its bound"];
    for (ok, label) in d.admissible.iter().zip(labels) {
        if !ok {
            bail!(Inadmissible, "condition {label} fails");
        }
    }
    Ok(d.sigma_star.expect("condition (i) guarantees sigma*"))
}

/// Exponents `(θ1, θ2)` of the L∞ estimate `c R^{-θ2} [1 + N]^{θ1}`.
pub fn theta_exponents(d: &DerivedExponents, e: &Exponents) -> Result<(f64, f64)> {
    let ss = require_admissible(d, e)?;
    let (q, gamma, sp, pb) = (e.q, e.gamma, d.s_prime, d.p_bar);
    let denom = pb * ss - q * sp * (gamma - q + pb);
    let theta1 = (ss * gamma - q * sp * pb) / denom;
    let theta2 = q * ss / denom;
    if !(theta1 > 0.0 && theta2 > 0.0) {
        bail!(Domain, "non-positive theta exponents ({theta1}, {theta2})");
    }
    Ok((theta1, theta2))
}

/// Closed-form constants of the recursion `J_{h+1} <= C [1+N]^{E'} d^{-δ1} R^{-δ2} λ^h J_h^{1+α}`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationConstants {
    pub delta1: f64,
    pub delta2: f64,
    pub alpha: f64,
    /// `λ = 8^{q² s'/p̄}`.
    pub lambda_base: f64,
    /// `1 - (γ-q)s'/σ̄*`.
    pub theta: f64,
    pub theta1: f64,
    pub theta2: f64,
    /// `q s'`, the exponent of the level-set integrals `J_h`.
    pub qs_prime: f64,
    /// `E' = (q/p̄)(γ-q)s'(1 + qs'/σ̄*)`, the power of `[1 + N]` in the recursion.
    pub norm_exponent: f64,
    /// `E = E' + qs'α`, the power of `[1 + N]` inside the choice of `d`.
    pub d_exponent: f64,
    pub sigma_star: f64,
    pub p_bar: f64,
}

pub fn iteration_constants(d: &DerivedExponents, e: &Exponents) -> Result<IterationConstants> {
    let ss = require_admissible(d, e)?;
    let (q, gamma, sp, pb) = (e.q, e.gamma, d.s_prime, d.p_bar);
    let qs = q * sp;
    let delta2 = q * q * sp / pb;
    // factored so that δ1 shares the denominator of θ1, θ2
    let delta1 = qs * (pb * ss - qs * (gamma - q + pb)) / (pb * ss);
    let alpha = q * (ss - sp * (gamma - q + pb)) / (pb * ss);
    let theta = 1.0 - (gamma - q) * sp / ss;
    let lambda_base = pow(8.0, delta2);
    let norm_exponent = q / pb * (gamma - q) * sp * (1.0 + qs / ss);
    let d_exponent = norm_exponent + qs * alpha;
    let (theta1, theta2) = theta_exponents(d, e)?;
    if !(delta1 > 0.0 && alpha > 0.0) {
        bail!(Domain, "non-positive iteration constants delta1 = {delta1}, alpha = {alpha}");
    }
    Ok(IterationConstants {
        delta1,
        delta2,
        alpha,
        lambda_base,
        theta,
        theta1,
        theta2,
        qs_prime: qs,
        norm_exponent,
        d_exponent,
        sigma_star: ss,
        p_bar: pb,
    })
}

/// `c0 = |B_1|^{1 - qs'/σ̄*}`, the volume factor of the Hölder step bounding
/// `‖u‖_{qs'}^{qs'}` by `[1 + ‖u‖_{σ̄*}]^{qs'}` on balls of radius at most 1.
pub fn default_c0(c: &IterationConstants, n: usize) -> f64 {
    pow(unit_ball_volume(n), 1.0 - c.qs_prime / c.sigma_star)
}

fn check_choose_inputs(c_cal: f64, c0: f64, radius: f64, norm: f64) -> Result<()> {
    if !(radius > 0.0 && radius <= 1.0) {
        bail!(Domain, "radius must lie in (0, 1], got {radius}");
    }
    if !(norm >= 0.0) || !norm.is_finite() {
        bail!(Domain, "norm must be finite and non-negative, got {norm}");
    }
    if !(c_cal > 0.0 && c0 > 0.0) || !c_cal.is_finite() || !c0.is_finite() {
        bail!(Domain, "calibration constants must be positive, got C = {c_cal}, c0 = {c0}");
    }
    Ok(())
}

/// Level scale `d = max(2, {C c0^α λ^{1/α} R^{-δ2} (1+N)^E}^{1/δ1})`.
///
/// Evaluated in logarithms; `λ^{1/α}` overflows for moderately large `δ2/α`.
pub fn choose_d(c: &IterationConstants, c_cal: f64, c0: f64, radius: f64, norm: f64) -> Result<f64> {
    check_choose_inputs(c_cal, c0, radius, norm)?;
    let log_inner = ln(c_cal) + c.alpha * ln(c0) + ln(c.lambda_base) / c.alpha
        - c.delta2 * ln(radius)
        + c.d_exponent * libm::log1p(norm);
    Ok(exp(log_inner / c.delta1).max(2.0))
}

/// Composite constant `c` of the closed-form bound `c R^{-θ2} [1+N]^{θ1}`.
///
/// Equal to `(C c0^α λ^{1/α})^{1/δ1}`, enlarged to 2 when smaller so that the
/// bound dominates the clamped `d >= 2` for every `R <= 1`.
pub fn bound_constant(c: &IterationConstants, c_cal: f64, c0: f64) -> f64 {
    let log_k = ln(c_cal) + c.alpha * ln(c0) + ln(c.lambda_base) / c.alpha;
    exp(log_k / c.delta1).max(2.0)
}

/// Right-hand side `c R^{-θ2} [1+N]^{θ1}` of the L∞ estimate.
pub fn bound_rhs(c: &IterationConstants, constant: f64, radius: f64, norm: f64) -> f64 {
    constant * exp(-c.theta2 * ln(radius) + c.theta1 * libm::log1p(norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    const INF: Exponent = Exponent::Infinite;

    fn fin(v: f64) -> Exponent {
        Exponent::Finite(v)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn conjugates() {
        assert_eq!(conjugate_exponent(fin(2.0)).unwrap(), fin(2.0));
        assert_eq!(conjugate_exponent(INF).unwrap(), fin(1.0));
        assert_eq!(conjugate_exponent(fin(1.0)).unwrap(), INF);
        let c = conjugate_exponent(fin(4.0)).unwrap().finite().unwrap();
        assert!(close(c, 4.0 / 3.0, 1e-15));
        assert!(conjugate_exponent(fin(0.5)).is_err());
    }

    #[test]
    fn harmonic_means() {
        assert_eq!(harmonic_mean(&[fin(2.0); 3]).unwrap(), fin(2.0));
        assert_eq!(harmonic_mean(&[fin(1.0), INF]).unwrap(), fin(2.0));
        let h = harmonic_mean(&[fin(2.0), fin(4.0)]).unwrap().finite().unwrap();
        assert!(close(h, 8.0 / 3.0, 1e-15));
        assert_eq!(harmonic_mean(&[INF, INF]).unwrap(), INF);
        assert!(harmonic_mean(&[]).is_err());
    }

    #[test]
    fn sobolev_exponents() {
        assert!(close(sobolev_star(fin(2.0), 3).unwrap(), 6.0, 1e-15));
        assert!(close(sobolev_star(fin(2.0), 4).unwrap(), 4.0, 1e-15));
        assert!(sobolev_star(fin(3.0), 3).is_err());
        assert!(sobolev_star(INF, 3).is_err());
    }

    #[test]
    fn construction_rejects_bad_tuples() {
        assert!(Exponents::isotropic(3, 1.0, 2.0, 2.0, INF, INF).is_err());
        assert!(Exponents::isotropic(3, 2.5, 2.0, 2.0, INF, INF).is_err());
        assert!(Exponents::isotropic(3, 2.0, 2.0, 1.9, INF, INF).is_err());
        assert!(Exponents::isotropic(3, 2.0, 2.0, 2.0, fin(0.5), INF).is_err());
        assert!(Exponents::isotropic(3, 2.0, 2.0, 2.0, INF, fin(1.0)).is_err());
        assert!(Exponents::new(vec![2.0, 2.0], 2.0, 2.0, vec![INF], INF).is_err());
    }

    #[test]
    fn derive_isotropic_unweighted() {
        let e = Exponents::isotropic(3, 2.0, 2.0, 2.0, INF, INF).unwrap();
        let d = derive(&e);
        assert_eq!(d.sigma, vec![2.0; 3]);
        assert_eq!(d.sigma_bar, 2.0);
        assert!(close(d.sigma_star.unwrap(), 6.0, 1e-15));
        assert_eq!(d.p_bar, 2.0);
        assert_eq!(d.s_prime, 1.0);
    }

    #[test]
    fn derive_weighted() {
        let e = Exponents::isotropic(3, 2.0, 2.0, 2.5, fin(4.0), fin(4.0)).unwrap();
        let d = derive(&e);
        for s in &d.sigma {
            assert!(close(*s, 1.6, 1e-15));
        }
        assert!(close(d.sigma_bar, 1.6, 1e-15));
        assert!(close(d.sigma_star.unwrap(), 24.0 / 7.0, 1e-14));
        assert!(close(d.s_prime, 4.0 / 3.0, 1e-15));

        let e = Exponents::isotropic(3, 2.0, 2.0, 2.0, fin(1.0), INF).unwrap();
        let d = derive(&e);
        assert!(close(d.sigma_bar, 1.0, 1e-15));
        assert!(close(d.sigma_star.unwrap(), 1.5, 1e-15));
    }

    #[test]
    fn admissibility_examples() {
        let e = Exponents::isotropic(3, 2.0, 2.0, 4.0, INF, INF).unwrap();
        let rep = check_admissibility(&derive(&e), &e);
        assert!(rep.is_admissible());
        assert!(close(rep.gamma_upper.unwrap(), 6.0, 1e-14));

        let e = Exponents::isotropic(3, 2.0, 2.0, 2.5, fin(4.0), fin(4.0)).unwrap();
        let rep = check_admissibility(&derive(&e), &e);
        assert!(rep.is_admissible());
        assert!(close(rep.gamma_upper.unwrap(), 18.0 / 7.0, 1e-14));
        assert!(rep.gamma_range_nonempty);

        let e = Exponents::isotropic(3, 2.0, 2.0, 3.0, fin(4.0), fin(4.0)).unwrap();
        let rep = check_admissibility(&derive(&e), &e);
        assert_eq!(rep.conditions, [true, true, false]);
    }

    #[test]
    fn boundary_equality_is_inadmissible() {
        // sigma_bar = n exactly
        let e = Exponents::isotropic(2, 2.0, 2.0, 2.0, INF, INF).unwrap();
        assert_eq!(derive(&e).admissible, [false, false, false]);
        // gamma = p* exactly
        let e = Exponents::isotropic(3, 2.0, 2.0, 6.0, INF, INF).unwrap();
        assert_eq!(derive(&e).admissible, [true, true, false]);
    }

    #[test]
    fn theta_examples() {
        let e = Exponents::isotropic(3, 2.0, 2.0, 4.0, INF, INF).unwrap();
        let (t1, t2) = theta_exponents(&derive(&e), &e).unwrap();
        assert!(close(t1, 5.0, 1e-14) && close(t2, 3.0, 1e-14));

        let e = Exponents::isotropic(3, 2.0, 2.0, 2.0, INF, INF).unwrap();
        let (t1, t2) = theta_exponents(&derive(&e), &e).unwrap();
        assert!(close(t1, 1.0, 1e-14) && close(t2, 1.5, 1e-14));

        let e = Exponents::isotropic(3, 2.0, 2.0, 3.0, fin(4.0), fin(4.0)).unwrap();
        assert!(matches!(theta_exponents(&derive(&e), &e), Err(crate::Error::Inadmissible(_))));
    }

    #[test]
    fn theta_at_gamma_equal_q() {
        let e = Exponents::new(vec![1.8, 2.2, 2.0], 2.4, 2.4, vec![fin(6.0), INF, fin(9.0)], fin(12.0))
            .unwrap();
        let d = derive(&e);
        let (t1, t2) = theta_exponents(&d, &e).unwrap();
        let (q, ss, sp, pb) = (e.q(), d.sigma_star.unwrap(), d.s_prime, d.p_bar);
        assert!(close(t1, q * (ss - sp * pb) / (pb * (ss - q * sp)), 1e-13));
        assert!(close(t2, q * ss / (pb * (ss - q * sp)), 1e-13));
    }

    #[test]
    fn iteration_constants_isotropic() {
        let e = Exponents::isotropic(3, 2.0, 2.0, 2.0, INF, INF).unwrap();
        let c = iteration_constants(&derive(&e), &e).unwrap();
        assert!(close(c.delta1, 4.0 / 3.0, 1e-14));
        assert!(close(c.alpha, 2.0 / 3.0, 1e-14));
        assert!(close(c.delta2, 2.0, 1e-15));
        assert!(close(c.lambda_base, 64.0, 1e-14));
        assert!(close(c.theta2, c.delta2 / c.delta1, 1e-14));
    }

    #[test]
    fn choose_d_isotropic_example() {
        let e = Exponents::isotropic(3, 2.0, 2.0, 2.0, INF, INF).unwrap();
        let c = iteration_constants(&derive(&e), &e).unwrap();
        let d = choose_d(&c, 1.0, 1.0, 1.0, 0.0).unwrap();
        // 512^{3/4}
        assert!(close(d, 512f64.powf(0.75), 1e-12), "{d}");
        assert!((d - 107.63).abs() < 5e-3);
        assert!(choose_d(&c, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(choose_d(&c, 1.0, 1.0, 1.5, 0.0).is_err());
        // tiny calibration still respects the floor
        assert_eq!(choose_d(&c, 1e-300, 1.0, 1.0, 0.0).unwrap(), 2.0);
        assert!(choose_d(&c, 1.0, 1.0, 0.5, 3.0).unwrap() >= choose_d(&c, 1.0, 1.0, 0.5, 2.0).unwrap());
    }

    #[test]
    fn bound_dominates_d() {
        let e = Exponents::isotropic(3, 2.0, 2.0, 3.0, INF, INF).unwrap();
        let c = iteration_constants(&derive(&e), &e).unwrap();
        for &(cal, r, n) in &[(1.0, 0.4, 1.0), (1e-12, 1.0, 0.0), (3.0, 0.05, 20.0)] {
            let d = choose_d(&c, cal, 1.3, r, n).unwrap();
            let rhs = bound_rhs(&c, bound_constant(&c, cal, 1.3), r, n);
            assert!(d <= rhs * (1.0 + 1e-12), "{d} > {rhs}");
        }
    }

    #[test]
    fn unit_ball_c0() {
        let e = Exponents::isotropic(3, 2.0, 2.0, 2.0, INF, INF).unwrap();
        let c = iteration_constants(&derive(&e), &e).unwrap();
        let vol = 4.0 / 3.0 * core::f64::consts::PI;
        assert!(close(default_c0(&c, 3), pow(vol, 2.0 / 3.0), 1e-14));
    }
}
