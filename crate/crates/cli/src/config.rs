//! Run configuration files (TOML).
//!
//! Only `[exponents]` is always required; every command asks for the other
//! sections it needs. `inf` (bare or quoted) is accepted wherever an exponent
//! may be infinite.

use std::path::{Path, PathBuf};

use debound_core::degiorgi::DEFAULT_STEPS;
use debound_core::exponents::Exponent;
use debound_core::minimize::SolveConfig;
use debound_core::{Exponents, Grid, GridFunction, Interval, ModelIntegrand, SubBox, WeightField};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<ProblemSection>,
    pub grid: Option<GridSection>,
    pub exponents: ExponentsSection,
    pub weights: Option<WeightsSection>,
    pub boundary: Option<BoundarySpec>,
    pub solver: Option<SolverSection>,
    pub certify: Option<CertifySection>,
    pub verify: Option<VerifySection>,
    pub output: Option<OutputSection>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub name: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub h: f64,
}

/// A number, or the string `"inf"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Value(f64),
    Text(String),
}

impl Num {
    fn exponent(&self, field: &str) -> Result<Exponent, CliError> {
        match self {
            Num::Value(v) => Ok(Exponent::new(*v)),
            Num::Text(t) if matches!(t.trim(), "inf" | "+inf" | "infinity") => Ok(Exponent::Infinite),
            Num::Text(t) => Err(CliError::Config(format!("{field}: expected a number or \"inf\", got {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(Num),
    Many(Vec<Num>),
}

impl OneOrMany {
    fn expand(&self, n: usize, field: &str) -> Result<Vec<Exponent>, CliError> {
        match self {
            OneOrMany::One(v) => Ok(vec![v.exponent(field)?; n]),
            OneOrMany::Many(vs) if vs.len() == n => {
                vs.iter().enumerate().map(|(i, v)| v.exponent(&format!("{field}[{i}]"))).collect()
            }
            OneOrMany::Many(vs) => Err(CliError::Config(format!("{field}: expected {n} entries, got {}", vs.len()))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentsSection {
    pub n: usize,
    pub p: OneOrMany,
    pub q: f64,
    pub gamma: f64,
    pub r: Option<OneOrMany>,
    pub s: Option<Num>,
}

/// Exponent values before validation, so that sweeps can report tuples the
/// core rejects.
#[derive(Clone, Debug, PartialEq)]
pub struct RawExponents {
    pub p: Vec<f64>,
    pub q: f64,
    pub gamma: f64,
    pub r: Vec<Exponent>,
    pub s: Exponent,
}

impl RawExponents {
    pub fn build(&self) -> Result<Exponents, CliError> {
        Ok(Exponents::new(self.p.clone(), self.q, self.gamma, self.r.clone(), self.s)?)
    }
}

impl ExponentsSection {
    pub fn raw(&self) -> Result<RawExponents, CliError> {
        if self.n == 0 {
            return Err(CliError::Config("exponents.n must be positive".into()));
        }
        let p = self
            .p
            .expand(self.n, "exponents.p")?
            .into_iter()
            .map(|e| e.finite().ok_or_else(|| CliError::Config("exponents.p must be finite".into())))
            .collect::<Result<Vec<_>, _>>()?;
        let r = match &self.r {
            Some(r) => r.expand(self.n, "exponents.r")?,
            None => vec![Exponent::Infinite; self.n],
        };
        let s = match &self.s {
            Some(s) => s.exponent("exponents.s")?,
            None => Exponent::Infinite,
        };
        Ok(RawExponents { p, q: self.q, gamma: self.gamma, r, s })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightSpec {
    Constant { value: f64 },
    Power { amplitude: f64, exponent: f64, center: Vec<f64> },
}

impl WeightSpec {
    fn field(&self) -> WeightField {
        match self {
            WeightSpec::Constant { value } => WeightField::Constant(*value),
            WeightSpec::Power { amplitude, exponent, center } => {
                WeightField::Power { amplitude: *amplitude, exponent: *exponent, center: center.clone() }
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum WeightList {
    One(WeightSpec),
    Many(Vec<WeightSpec>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub lambda: Option<WeightList>,
    pub mu: Option<WeightSpec>,
    #[serde(default)]
    pub u_coeff: f64,
    pub upper_override: Option<WeightSpec>,
}

/// Dirichlet data.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BoundarySpec {
    Zero,
    Constant { value: f64 },
    /// `offset + Σ coeffs_i x_i`.
    Affine { offset: f64, coeffs: Vec<f64> },
    /// `offset + amplitude Π (x_i - center_i)`.
    Product { offset: f64, amplitude: f64, center: Vec<f64> },
    /// `offset + amplitude |x - center|^exponent`.
    Radial { offset: f64, amplitude: f64, exponent: f64, center: Vec<f64> },
}

impl BoundarySpec {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            BoundarySpec::Zero => 0.0,
            BoundarySpec::Constant { value } => *value,
            BoundarySpec::Affine { offset, coeffs } => offset + coeffs.iter().zip(x).map(|(c, v)| c * v).sum::<f64>(),
            BoundarySpec::Product { offset, amplitude, center } => {
                offset + amplitude * x.iter().zip(center).map(|(v, c)| v - c).product::<f64>()
            }
            BoundarySpec::Radial { offset, amplitude, exponent, center } => {
                let r = x.iter().zip(center).map(|(v, c)| (v - c) * (v - c)).sum::<f64>().sqrt();
                offset + amplitude * r.powf(*exponent)
            }
        }
    }

    fn check(&self, n: usize) -> Result<(), CliError> {
        let len = match self {
            BoundarySpec::Affine { coeffs, .. } => Some(coeffs.len()),
            BoundarySpec::Product { center, .. } | BoundarySpec::Radial { center, .. } => Some(center.len()),
            _ => None,
        };
        match len {
            Some(l) if l != n => Err(CliError::Config(format!("boundary: expected {n} coordinates, got {l}"))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub initial_step: Option<f64>,
    pub shrink: Option<f64>,
    pub armijo: Option<f64>,
    pub smoothing_eps: Option<f64>,
}

/// `C_cal`: a number or `"calibrate"`.
#[derive(Clone, Debug, PartialEq)]
pub enum CalibrationChoice {
    Value(f64),
    Calibrate,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    pub x0: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "H")]
    pub steps: Option<usize>,
    #[serde(rename = "C_cal")]
    pub c_cal: Option<Num>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifySettings {
    pub x0: Vec<f64>,
    pub radius: f64,
    pub steps: usize,
    pub c_cal: CalibrationChoice,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub x0: Option<Vec<f64>>,
    pub k: Vec<f64>,
    pub rho: Vec<f64>,
    #[serde(rename = "R")]
    pub radius: Vec<f64>,
    pub subbox: Vec<[f64; 2]>,
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    pub perturbations: Option<usize>,
    pub amplitude: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifySettings {
    pub x0: Vec<f64>,
    pub levels: Vec<f64>,
    pub inner_radii: Vec<f64>,
    pub outer_radii: Vec<f64>,
    pub subbox: SubBox,
    pub q: f64,
    pub perturbations: usize,
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

fn missing(section: &str) -> CliError {
    CliError::Config(format!("missing [{section}] section"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string().trim_end().to_string()))
    }

    pub fn name(&self) -> &str {
        self.problem.as_ref().map_or("unnamed", |p| p.name.as_str())
    }

    pub fn n(&self) -> usize {
        self.exponents.n
    }

    pub fn raw_exponents(&self) -> Result<RawExponents, CliError> {
        self.exponents.raw()
    }

    pub fn build_exponents(&self) -> Result<Exponents, CliError> {
        self.raw_exponents()?.build()
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = self.grid.as_ref().ok_or_else(|| missing("grid"))?;
        if g.bounds.len() != self.n() {
            return Err(CliError::Config(format!("grid.box has {} axes, exponents.n = {}", g.bounds.len(), self.n())));
        }
        let bounds: Vec<Interval> = g.bounds.iter().map(|b| Interval::new(b[0], b[1])).collect();
        Ok(Grid::new(&bounds, g.h)?)
    }

    pub fn model(&self) -> Result<ModelIntegrand, CliError> {
        let e = self.build_exponents()?;
        let n = e.n();
        let w = self.weights.clone().unwrap_or(WeightsSection { lambda: None, mu: None, u_coeff: 0.0, upper_override: None });
        let lambdas = match &w.lambda {
            None => vec![WeightField::Constant(1.0); n],
            Some(WeightList::One(spec)) => vec![spec.field(); n],
            Some(WeightList::Many(specs)) if specs.len() == n => specs.iter().map(WeightSpec::field).collect(),
            Some(WeightList::Many(specs)) => {
                return Err(CliError::Config(format!("weights.lambda: expected {n} entries, got {}", specs.len())))
            }
        };
        let mu = w.mu.as_ref().map_or(WeightField::Constant(1.0), WeightSpec::field);
        let mut m = ModelIntegrand::new(e, lambdas, mu, w.u_coeff)?;
        if let Some(over) = &w.upper_override {
            m = m.with_upper_override(over.field())?;
        }
        Ok(m)
    }

    pub fn boundary(&self, grid: &Grid) -> Result<GridFunction, CliError> {
        let spec = self.boundary.as_ref().ok_or_else(|| missing("boundary"))?;
        spec.check(grid.n())?;
        Ok(GridFunction::from_fn(grid.clone(), |x| spec.eval(x))?)
    }

    pub fn solve_config(&self) -> SolveConfig {
        let s = self.solver.clone().unwrap_or_default();
        let d = SolveConfig::default();
        SolveConfig {
            max_iters: s.max_iters.unwrap_or(d.max_iters),
            grad_tol: s.grad_tol.unwrap_or(d.grad_tol),
            initial_step: s.initial_step.unwrap_or(d.initial_step),
            shrink: s.shrink.unwrap_or(d.shrink),
            armijo: s.armijo.unwrap_or(d.armijo),
            smoothing_eps: s.smoothing_eps.or(d.smoothing_eps),
        }
    }

    pub fn certify_settings(&self) -> Result<CertifySettings, CliError> {
        let c = self.certify.as_ref().ok_or_else(|| missing("certify"))?;
        if c.x0.len() != self.n() {
            return Err(CliError::Config(format!("certify.x0 has {} coordinates, expected {}", c.x0.len(), self.n())));
        }
        let c_cal = match &c.c_cal {
            None => CalibrationChoice::Value(1.0),
            Some(Num::Value(v)) => CalibrationChoice::Value(*v),
            Some(Num::Text(t)) if t == "calibrate" => CalibrationChoice::Calibrate,
            Some(Num::Text(t)) => {
                return Err(CliError::Config(format!("certify.C_cal: expected a number or \"calibrate\", got {t:?}")))
            }
        };
        Ok(CertifySettings { x0: c.x0.clone(), radius: c.radius, steps: c.steps.unwrap_or(DEFAULT_STEPS), c_cal })
    }

    pub fn verify_settings(&self) -> Result<VerifySettings, CliError> {
        let v = self.verify.as_ref().ok_or_else(|| missing("verify"))?;
        let x0 = match (&v.x0, &self.certify) {
            (Some(x0), _) => x0.clone(),
            (None, Some(c)) => c.x0.clone(),
            (None, None) => return Err(CliError::Config("verify.x0 is required without a [certify] section".into())),
        };
        if x0.len() != self.n() || v.subbox.len() != self.n() {
            return Err(CliError::Config(format!("verify: x0 and subbox need {} coordinates", self.n())));
        }
        Ok(VerifySettings {
            x0,
            levels: v.k.clone(),
            inner_radii: v.rho.clone(),
            outer_radii: v.radius.clone(),
            subbox: SubBox::new(v.subbox.iter().map(|b| Interval::new(b[0], b[1])).collect()),
            q: v.q.unwrap_or(1.0),
            perturbations: v.perturbations.unwrap_or(20),
            amplitude: v.amplitude.unwrap_or(0.1),
            seed: v.seed.unwrap_or(0),
        })
    }

    /// `--out` wins over `[output] dir`; the fallback is `out`.
    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        cli.map(Path::to_path_buf)
            .or_else(|| self.output.as_ref().map(|o| o.dir.clone()))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}
