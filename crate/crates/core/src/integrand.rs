//! The separable model integrand
//!
//! ```text
//! f(x, u, ξ) = Σ_i λ_i(x) |ξ_i|^{p_i} + c μ(x) |u|^γ
//! ```
//!
//! with constant or power-law weights. It is convex in `(u, ξ)`, satisfies
//! the lower growth bound with equality when `c = 0`, and the upper bound
//! with the effective weight `μ̃ = Σ λ_i + c μ` because `|ξ_i|^{p_i} <= 1 + |ξ|^q`
//! for `p_i <= q`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::exponents::{Exponent, Exponents};
use crate::fields::{gradient, CellLattice, Grid, GridFunction};
use crate::real::{abs, pow, sqrt};

/// A nonnegative weight `x ↦ w(x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightField {
    Constant(f64),
    /// `amplitude · |x - center|^exponent`.
    Power { amplitude: f64, exponent: f64, center: Vec<f64> },
}

impl WeightField {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            WeightField::Constant(c) => *c,
            WeightField::Power { amplitude, exponent, center } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                amplitude * pow(sqrt(d2), *exponent)
            }
        }
    }

    /// Value at a cell center. A center that lands on the singular point of a
    /// power weight is moved by `h/2` along the first axis.
    pub fn sample_cell(&self, center: &[f64], h: f64) -> f64 {
        if let WeightField::Power { exponent, center: c, .. } = self {
            if *exponent != 0.0 && center.iter().zip(c).all(|(a, b)| a == b) {
                let mut moved = center.to_vec();
                moved[0] += 0.5 * h;
                return self.eval(&moved);
            }
        }
        self.eval(center)
    }

    fn check_shape(&self, n: usize, what: &str) -> Result<()> {
        match self {
            WeightField::Constant(c) if !(*c >= 0.0) || !c.is_finite() => {
                bail!(Config, "{what}: constant weight must be finite and >= 0, got {c}")
            }
            WeightField::Power { amplitude, exponent, center } => {
                if !(*amplitude >= 0.0) || !amplitude.is_finite() || !exponent.is_finite() {
                    bail!(Config, "{what}: power weight needs finite amplitude >= 0 and exponent");
                }
                if center.len() != n {
                    bail!(Config, "{what}: center has {} coordinates, expected {n}", center.len());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `λ > 0` with `λ^{-1} ∈ L^r_loc`: a power `a` needs `a r < n` (or `a <= 0` when `r = ∞`).
    fn check_lower_weight(&self, r: Exponent, n: usize, what: &str) -> Result<()> {
        self.check_shape(n, what)?;
        match self {
            WeightField::Constant(c) if *c <= 0.0 => {
                bail!(Config, "{what}: lower weight must be positive")
            }
            WeightField::Power { amplitude, exponent, .. } => {
                if *amplitude <= 0.0 {
                    bail!(Config, "{what}: lower weight must be positive");
                }
                let ok = match r {
                    Exponent::Infinite => *exponent <= 0.0,
                    Exponent::Finite(rv) => exponent * rv < n as f64,
                };
                if !ok {
                    bail!(Config, "{what}: exponent {exponent} makes the inverse weight leave L^{r}");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `μ ∈ L^s_loc`: a power `a` needs `-a s < n` (or `a >= 0` when `s = ∞`).
    fn check_upper_weight(&self, s: Exponent, n: usize, what: &str) -> Result<()> {
        self.check_shape(n, what)?;
        if let WeightField::Power { exponent, .. } = self {
            let ok = match s {
                Exponent::Infinite => *exponent >= 0.0,
                Exponent::Finite(sv) => -exponent * sv < n as f64,
            };
            if !ok {
                bail!(Config, "{what}: exponent {exponent} makes the weight leave L^{s}");
            }
        }
        Ok(())
    }
}

/// Weights sampled at cell centers.
#[derive(Clone, Debug)]
pub struct CellWeights {
    n: usize,
    lambdas: Vec<f64>,
    mu: Vec<f64>,
    upper: Vec<f64>,
}

impl CellWeights {
    pub fn lambdas(&self, cell: usize) -> &[f64] {
        &self.lambdas[cell * self.n..(cell + 1) * self.n]
    }

    pub fn mu(&self, cell: usize) -> f64 {
        self.mu[cell]
    }

    /// Effective upper weight `μ̃` at `cell`.
    pub fn upper(&self, cell: usize) -> f64 {
        self.upper[cell]
    }

    pub fn upper_all(&self) -> &[f64] {
        &self.upper
    }

    /// All samples of `λ_i`.
    pub fn lambda_component(&self, i: usize) -> Vec<f64> {
        self.lambdas.iter().skip(i).step_by(self.n).copied().collect()
    }
}

/// The model integrand with its exponents and weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelIntegrand {
    exponents: Exponents,
    lambdas: Vec<WeightField>,
    mu: WeightField,
    u_coeff: f64,
    upper_override: Option<WeightField>,
}

impl ModelIntegrand {
    pub fn new(exponents: Exponents, lambdas: Vec<WeightField>, mu: WeightField, u_coeff: f64) -> Result<Self> {
        let n = exponents.n();
        if lambdas.len() != n {
            bail!(Config, "expected {n} lambda weights, got {}", lambdas.len());
        }
        for (i, (w, r)) in lambdas.iter().zip(exponents.r()).enumerate() {
            w.check_lower_weight(*r, n, &alloc::format!("lambda{}", i + 1))?;
        }
        mu.check_upper_weight(exponents.s(), n, "mu")?;
        if !(u_coeff >= 0.0) || !u_coeff.is_finite() {
            bail!(Config, "u_coeff must be finite and >= 0, got {u_coeff}");
        }
        Ok(Self { exponents, lambdas, mu, u_coeff, upper_override: None })
    }

    /// Constant unit weights and no `|u|^γ` term.
    pub fn unweighted(exponents: Exponents) -> Result<Self> {
        let n = exponents.n();
        Self::new(exponents, vec![WeightField::Constant(1.0); n], WeightField::Constant(1.0), 0.0)
    }

    /// Replaces the effective upper weight `μ̃` reported to the verifiers.
    ///
    /// The integrand itself is unchanged; this exists to exercise the weight
    /// domination check with a deliberately wrong upper weight.
    pub fn with_upper_override(mut self, w: WeightField) -> Result<Self> {
        w.check_shape(self.exponents.n(), "upper override")?;
        self.upper_override = Some(w);
        Ok(self)
    }

    pub fn exponents(&self) -> &Exponents {
        &self.exponents
    }

    pub fn lambdas(&self) -> &[WeightField] {
        &self.lambdas
    }

    pub fn mu(&self) -> &WeightField {
        &self.mu
    }

    pub fn u_coeff(&self) -> f64 {
        self.u_coeff
    }

    pub fn upper_override(&self) -> Option<&WeightField> {
        self.upper_override.as_ref()
    }

    /// `f(x, u, ξ)`.
    pub fn eval(&self, x: &[f64], u: f64, xi: &[f64]) -> f64 {
        let lams: Vec<f64> = self.lambdas.iter().map(|w| w.eval(x)).collect();
        self.eval_with(&lams, self.mu.eval(x), u, xi)
    }

    /// `f` with the weights already evaluated.
    pub fn eval_with(&self, lambdas: &[f64], mu: f64, u: f64, xi: &[f64]) -> f64 {
        self.lower_with(lambdas, xi) + self.u_coeff * mu * pow(abs(u), self.exponents.gamma())
    }

    fn lower_with(&self, lambdas: &[f64], xi: &[f64]) -> f64 {
        lambdas
            .iter()
            .zip(xi)
            .zip(self.exponents.p())
            .map(|((l, x), p)| l * pow(abs(*x), *p))
            .sum()
    }

    /// `Σ λ_i(x)|ξ_i|^{p_i}`.
    pub fn lower_envelope(&self, x: &[f64], xi: &[f64]) -> f64 {
        let lams: Vec<f64> = self.lambdas.iter().map(|w| w.eval(x)).collect();
        self.lower_with(&lams, xi)
    }

    /// `μ̃(x) = Σ λ_i(x) + c μ(x)` unless overridden.
    pub fn upper_weight(&self, x: &[f64]) -> f64 {
        match &self.upper_override {
            Some(w) => w.eval(x),
            None => self.lambdas.iter().map(|w| w.eval(x)).sum::<f64>() + self.u_coeff * self.mu.eval(x),
        }
    }

    /// Samples every weight at the cell centers of `lattice`.
    pub fn cell_weights(&self, lattice: &CellLattice, h: f64) -> CellWeights {
        let n = self.exponents.n();
        let cells = lattice.len();
        let mut lambdas = Vec::with_capacity(cells * n);
        let mut mu = Vec::with_capacity(cells);
        let mut upper = Vec::with_capacity(cells);
        for c in 0..cells {
            let x = lattice.center(c);
            let start = lambdas.len();
            lambdas.extend(self.lambdas.iter().map(|w| w.sample_cell(x, h)));
            let m = self.mu.sample_cell(x, h);
            mu.push(m);
            upper.push(match &self.upper_override {
                Some(w) => w.sample_cell(x, h),
                None => lambdas[start..].iter().sum::<f64>() + self.u_coeff * m,
            });
        }
        CellWeights { n, lambdas, mu, upper }
    }
}

/// A point `(x, u, ξ)` of the integrand's domain.
#[derive(Clone, Debug, PartialEq)]
pub struct PointState {
    pub x: Vec<f64>,
    pub u: f64,
    pub xi: Vec<f64>,
}

/// Largest violations of the two growth bounds over a sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport {
    /// `max (Σ λ_i|ξ_i|^{p_i} - f)`.
    pub lower_violation: f64,
    /// `max (f - μ̃(|ξ|^q + |u|^γ + 1))`.
    pub upper_violation: f64,
    pub samples: usize,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_violation <= 0.0 && self.upper_violation <= 0.0
    }
}

pub fn check_growth(m: &ModelIntegrand, samples: &[PointState]) -> SandwichReport {
    let e = m.exponents();
    let mut lower_violation = f64::NEG_INFINITY;
    let mut upper_violation = f64::NEG_INFINITY;
    for s in samples {
        let f = m.eval(&s.x, s.u, &s.xi);
        let norm = sqrt(s.xi.iter().map(|v| v * v).sum());
        let upper = m.upper_weight(&s.x) * (pow(norm, e.q()) + pow(abs(s.u), e.gamma()) + 1.0);
        lower_violation = lower_violation.max(m.lower_envelope(&s.x, &s.xi) - f);
        upper_violation = upper_violation.max(f - upper);
    }
    SandwichReport { lower_violation, upper_violation, samples: samples.len() }
}

/// Midpoint-convexity outcome over sampled pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexityReport {
    /// `max (f(mid) - (f(a)+f(b))/2)`, negative when strictly convex on the sample.
    pub max_violation: f64,
    /// Pairs exceeding the `1e-12` relative tolerance.
    pub failures: usize,
    pub pairs: usize,
}

const CONVEXITY_TOL: f64 = 1e-12;

/// Checks `f(x, (a+b)/2) <= (f(x,a) + f(x,b))/2` for `(u, ξ)` pairs at a common `x`.
pub fn check_convexity(m: &ModelIntegrand, x: &[f64], pairs: &[((f64, Vec<f64>), (f64, Vec<f64>))]) -> ConvexityReport {
    let mut max_violation = f64::NEG_INFINITY;
    let mut failures = 0;
    for ((ua, xa), (ub, xb)) in pairs {
        let mid_xi: Vec<f64> = xa.iter().zip(xb).map(|(a, b)| 0.5 * (a + b)).collect();
        let mid = m.eval(x, 0.5 * (ua + ub), &mid_xi);
        let avg = 0.5 * (m.eval(x, *ua, xa) + m.eval(x, *ub, xb));
        let gap = mid - avg;
        max_violation = max_violation.max(gap);
        if gap > CONVEXITY_TOL * avg.max(1.0) {
            failures += 1;
        }
    }
    ConvexityReport { max_violation, failures, pairs: pairs.len() }
}

/// Discrete energy `Σ f(x_c, u_c, Du_c) h^n` over cells whose centers satisfy `region`.
pub fn energy(m: &ModelIntegrand, u: &GridFunction, region: impl Fn(&[f64]) -> bool) -> Result<f64> {
    let grid = u.grid();
    check_dims(m, grid)?;
    let lat = grid.lattice()?;
    let weights = m.cell_weights(&lat, grid.h());
    let du = gradient(u)?;
    let mut total = 0.0;
    for c in 0..lat.len() {
        if region(lat.center(c)) {
            let uc = lat.average(c, u.values());
            total += m.eval_with(weights.lambdas(c), weights.mu(c), uc, du.at(c));
        }
    }
    Ok(total * grid.cell_volume())
}

/// Per-cell integrand values `f(x_c, u_c, Du_c)`.
pub fn cell_integrand(m: &ModelIntegrand, u: &GridFunction) -> Result<Vec<f64>> {
    let grid = u.grid();
    check_dims(m, grid)?;
    let lat = grid.lattice()?;
    let weights = m.cell_weights(&lat, grid.h());
    let du = gradient(u)?;
    Ok((0..lat.len())
        .map(|c| m.eval_with(weights.lambdas(c), weights.mu(c), lat.average(c, u.values()), du.at(c)))
        .collect())
}

pub(crate) fn check_dims(m: &ModelIntegrand, grid: &Grid) -> Result<()> {
    if m.exponents().n() != grid.n() {
        bail!(Config, "integrand is {}-dimensional but the grid is {}-dimensional", m.exponents().n(), grid.n());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Interval;

    const INF: Exponent = Exponent::Infinite;

    fn quad2(u_coeff: f64) -> ModelIntegrand {
        let e = Exponents::isotropic(2, 2.0, 2.0, 2.0, INF, INF).unwrap();
        ModelIntegrand::new(e, vec![WeightField::Constant(1.0); 2], WeightField::Constant(1.0), u_coeff).unwrap()
    }

    #[test]
    fn pointwise_values() {
        let m = quad2(1.0);
        assert_eq!(m.eval(&[0.3, 0.3], 1.0, &[1.0, 1.0]), 3.0);
        assert_eq!(m.eval(&[0.3, 0.3], 0.0, &[0.0, 0.0]), 0.0);
        let a = m.eval(&[0.0, 0.0], 0.0, &[0.7, -1.1]);
        let b = m.eval(&[0.0, 0.0], 0.0, &[1.4, -2.2]);
        assert!((b - 4.0 * a).abs() < 1e-14);
    }

    #[test]
    fn weight_validation() {
        let e = Exponents::isotropic(2, 2.0, 2.0, 2.0, Exponent::Finite(2.0), INF).unwrap();
        let power = |a: f64| WeightField::Power { amplitude: 1.0, exponent: a, center: vec![0.5, 0.5] };
        assert!(ModelIntegrand::new(e.clone(), vec![power(0.5), power(0.9)], WeightField::Constant(1.0), 0.0).is_ok());
        assert!(ModelIntegrand::new(e.clone(), vec![power(1.0), power(0.5)], WeightField::Constant(1.0), 0.0).is_err());
        assert!(ModelIntegrand::new(e.clone(), vec![power(0.5); 2], power(-0.5), 0.0).is_err());
        assert!(ModelIntegrand::new(e, vec![WeightField::Constant(0.0); 2], WeightField::Constant(1.0), 0.0).is_err());
    }

    #[test]
    fn singular_center_is_nudged() {
        let w = WeightField::Power { amplitude: 1.0, exponent: 0.5, center: vec![0.25, 0.25] };
        assert_eq!(w.eval(&[0.25, 0.25]), 0.0);
        let v = w.sample_cell(&[0.25, 0.25], 0.5);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lower_bound_is_tight_without_u_term() {
        let m = quad2(0.0);
        let pts: Vec<PointState> = (0..20)
            .map(|i| PointState { x: vec![0.1 * i as f64, 0.3], u: i as f64 - 7.0, xi: vec![0.2 * i as f64, -1.0] })
            .collect();
        let rep = check_growth(&m, &pts);
        assert_eq!(rep.lower_violation, 0.0);
        assert!(rep.holds());
    }

    #[test]
    fn convexity_trivial_pairs() {
        let m = quad2(1.0);
        let a = (1.5, vec![0.3, -0.2]);
        let rep = check_convexity(&m, &[0.5, 0.5], &[(a.clone(), a.clone())]);
        assert!(rep.max_violation.abs() < 1e-15 && rep.failures == 0);
        let b = (-1.5, vec![-0.3, 0.2]);
        let rep = check_convexity(&m, &[0.5, 0.5], &[(a, b)]);
        assert!(rep.max_violation < 0.0);
    }

    #[test]
    fn energy_of_affine() {
        let m = quad2(0.0);
        let g = Grid::new(&[Interval::new(0.0, 1.0); 2], 0.125).unwrap();
        let u = GridFunction::from_fn(g.clone(), |x| x[0]).unwrap();
        assert!((energy(&m, &u, |_| true).unwrap() - 1.0).abs() < 1e-14);
        let zero = GridFunction::zeros(g);
        assert_eq!(energy(&quad2(1.0), &zero, |_| true).unwrap(), 0.0);

        let e1 = Exponents::new(vec![2.0], 2.0, 2.0, vec![INF], INF).unwrap();
        let m1 = ModelIntegrand::unweighted(e1).unwrap();
        let g1 = Grid::new(&[Interval::new(0.0, 1.0)], 1.0 / 256.0).unwrap();
        let u1 = GridFunction::from_fn(g1, |x| x[0]).unwrap();
        assert!((energy(&m1, &u1, |_| true).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn energy_is_additive() {
        let m = quad2(1.0);
        let g = Grid::new(&[Interval::new(0.0, 1.0); 2], 0.125).unwrap();
        let u = GridFunction::from_fn(g, |x| (3.0 * x[0]).sin() + x[1] * x[1]).unwrap();
        let all = energy(&m, &u, |_| true).unwrap();
        let left = energy(&m, &u, |x| x[0] < 0.5).unwrap();
        let right = energy(&m, &u, |x| x[0] >= 0.5).unwrap();
        assert!((all - left - right).abs() < 1e-13 * all);
    }
}
