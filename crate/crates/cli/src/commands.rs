//! The five subcommands. Each returns the exit status; files go to the
//! output directory, short summaries to `out`.

use std::fs;
use std::io::Write;
use std::path::Path;

use debound_core::degiorgi::{calibrate_c, calibration_traces, certify, Certificate, IterationTrace};
use debound_core::exponents::{check_admissibility, derive, iteration_constants, Exponent};
use debound_core::fields::tent;
use debound_core::inequalities::{
    higher_integrability_norm, verify_caccioppoli, verify_embedding, verify_lower_bound, verify_poincare_sobolev,
    verify_weight_domination, InequalityReport,
};
use debound_core::minimize::{solve, verify_quasiminimality};
use debound_core::{Ball, Error as CoreError, GridFunction, ModelIntegrand};

use crate::config::{CalibrationChoice, RawExponents, RunConfig};
use crate::error::{CliError, Status};
use crate::gridfn;
use crate::output::{flag, list, num, opt_num, Table};
use crate::perturb::random_bumps;

pub const SOLUTION_FILE: &str = "solution.gridfn";
pub const SUMMARY_FILE: &str = "minimize_summary.csv";
pub const CERTIFICATE_FILE: &str = "certificate.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const INEQUALITIES_FILE: &str = "inequalities.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

pub const EXPONENT_COLUMNS: [&str; 19] = [
    "n", "p", "q", "gamma", "r", "s", "status", "cond_i", "cond_ii", "cond_iii", "sigma_bar", "sigma_star",
    "gamma_upper", "theta1", "theta2", "delta1", "delta2", "alpha", "lambda_base",
];

fn exponent_text(e: Exponent) -> String {
    match e {
        Exponent::Finite(v) => num(v),
        Exponent::Infinite => "inf".into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    Invalid,
    Admissible,
    Inadmissible,
}

fn exponent_row(raw: &RawExponents) -> (Vec<String>, Verdict) {
    let mut row = vec![
        raw.p.len().to_string(),
        list(&raw.p),
        num(raw.q),
        num(raw.gamma),
        raw.r.iter().map(|r| exponent_text(*r)).collect::<Vec<_>>().join(";"),
        exponent_text(raw.s),
    ];
    let Ok(e) = raw.build() else {
        row.push("invalid".into());
        row.extend(std::iter::repeat_n(String::new(), EXPONENT_COLUMNS.len() - row.len()));
        return (row, Verdict::Invalid);
    };
    let d = derive(&e);
    let rep = check_admissibility(&d, &e);
    let constants = iteration_constants(&d, &e).ok();
    let verdict = if constants.is_some() { Verdict::Admissible } else { Verdict::Inadmissible };
    row.push(if verdict == Verdict::Admissible { "admissible" } else { "inadmissible" }.into());
    row.extend(rep.conditions.iter().map(|c| flag(*c)));
    row.push(num(d.sigma_bar));
    row.push(opt_num(d.sigma_star));
    row.push(opt_num(rep.gamma_upper));
    let c = constants.as_ref();
    for v in [
        c.map(|c| c.theta1),
        c.map(|c| c.theta2),
        c.map(|c| c.delta1),
        c.map(|c| c.delta2),
        c.map(|c| c.alpha),
        c.map(|c| c.lambda_base),
    ] {
        row.push(opt_num(v));
    }
    (row, verdict)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Prints the admissibility table row; 0 if admissible, 2 if not.
pub fn admissible(cfg: &RunConfig, out: &mut dyn Write) -> Result<Status, CliError> {
    let raw = cfg.raw_exponents()?;
    // invalid tuples are configuration errors here
    raw.build()?;
    let (row, verdict) = exponent_row(&raw);
    let mut table = Table::new(&EXPONENT_COLUMNS);
    table.push(row);
    write!(out, "{}", table.to_csv()?).map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(if verdict == Verdict::Admissible { Status::Ok } else { Status::Inadmissible })
}

/// Axis specification `param=lo:hi:steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: String,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl Axis {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("axis must look like param=lo:hi:steps, got {spec:?}"));
        let (param, range) = spec.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = range.split(':').collect();
        let [lo, hi, steps] = parts.as_slice() else { return Err(bad()) };
        let param = param.trim().to_string();
        if !matches!(param.as_str(), "gamma" | "q" | "s" | "r" | "p") {
            return Err(CliError::Config(format!("unknown sweep axis {param:?}; use gamma, q, s, r or p")));
        }
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let steps: usize = steps.trim().parse().map_err(|_| bad())?;
        if steps == 0 {
            return Err(CliError::Config("sweep needs at least one step".into()));
        }
        Ok(Self { param, lo, hi, steps })
    }

    /// `lo + i (hi - lo)/(steps - 1)`, with both endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| if i == last { self.hi } else { self.lo + i as f64 * (self.hi - self.lo) / last as f64 })
            .collect()
    }

    fn apply(&self, raw: &RawExponents, v: f64) -> RawExponents {
        let mut out = raw.clone();
        match self.param.as_str() {
            "gamma" => out.gamma = v,
            "q" => out.q = v,
            "s" => out.s = Exponent::new(v),
            "r" => out.r = vec![Exponent::new(v); raw.r.len()],
            "p" => out.p = vec![v; raw.p.len()],
            _ => unreachable!("axis names are checked on parse"),
        }
        out
    }
}

/// One admissibility row per axis value.
pub fn sweep(cfg: &RunConfig, axis: &Axis, out_dir: Option<&Path>, out: &mut dyn Write) -> Result<Status, CliError> {
    let raw = cfg.raw_exponents()?;
    let mut table = Table::new(&EXPONENT_COLUMNS);
    for v in axis.values() {
        table.push(exponent_row(&axis.apply(&raw, v)).0);
    }
    match out_dir {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = dir.join(SWEEP_FILE);
            table.write(&path)?;
            writeln!(out, "wrote {} rows to {}", table.rows.len(), path.display())
        }
        None => write!(out, "{}", table.to_csv()?),
    }
    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(Status::Ok)
}

/// Perturbation count, amplitude and seed for quasi-minimality checks.
fn perturbation_plan(cfg: &RunConfig) -> (f64, usize, f64, u64) {
    match cfg.verify_settings() {
        Ok(v) => (v.q, v.perturbations, v.amplitude, v.seed),
        Err(_) => (1.0, 20, 0.1, 0),
    }
}

/// Solves the Dirichlet problem; 0 on convergence, 3 otherwise.
pub fn minimize(cfg: &RunConfig, out_dir: &Path, out: &mut dyn Write) -> Result<Status, CliError> {
    let grid = cfg.grid()?;
    let m = cfg.model()?;
    let bc = cfg.boundary(&grid)?;
    let result = solve(&m, &bc, &cfg.solve_config())?;
    let (q, count, amplitude, seed) = perturbation_plan(cfg);
    let phis = random_bumps(&grid, count, amplitude, seed)?;
    let qm = verify_quasiminimality(&m, &result.u, q, &phis)?;

    ensure_dir(out_dir)?;
    gridfn::write(&out_dir.join(SOLUTION_FILE), &result.u)?;
    let mut table = Table::new(&[
        "problem", "energy", "objective", "iterations", "converged", "residual", "Q", "empirical_Q", "qm_failures",
    ]);
    table.push(vec![
        cfg.name().into(),
        num(result.final_energy),
        num(result.objective),
        result.iterations.to_string(),
        flag(result.converged),
        num(result.residual),
        num(q),
        num(qm.empirical_q),
        qm.failures.to_string(),
    ]);
    table.write(&out_dir.join(SUMMARY_FILE))?;
    writeln!(
        out,
        "{}: converged={} iterations={} residual={} energy={}",
        cfg.name(),
        result.converged,
        result.iterations,
        num(result.residual),
        num(result.final_energy)
    )
    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(if result.converged { Status::Ok } else { Status::NonConvergence })
}

fn load_solution(cfg: &RunConfig, path: &Path) -> Result<(ModelIntegrand, GridFunction), CliError> {
    let grid = cfg.grid()?;
    let u = gridfn::read(path)?;
    if u.grid() != &grid {
        return Err(CliError::Config(format!("{}: solution grid does not match the configured grid", path.display())));
    }
    Ok((cfg.model()?, u))
}

pub const CERTIFICATE_COLUMNS: [&str; 16] = [
    "x0", "R", "d", "sup_half_ball", "slack", "theta1", "theta2", "rhs_bound", "valid", "norm", "C_cal", "c0", "decay",
    "lemma_threshold", "bound_constant", "d_norm_exponent",
];

pub fn certificate_row(c: &Certificate) -> Vec<String> {
    vec![
        list(&c.x0),
        num(c.radius),
        num(c.d),
        num(c.sup_half_ball),
        num(c.slack),
        num(c.theta1),
        num(c.theta2),
        num(c.rhs_bound),
        flag(c.valid),
        num(c.norm),
        num(c.c_cal),
        num(c.c0),
        flag(c.decay),
        num(c.lemma_threshold),
        num(c.bound_constant),
        num(c.d_norm_exponent),
    ]
}

fn trace_rows(table: &mut Table, sign: &str, trace: &IterationTrace) {
    for s in &trace.steps {
        table.push(vec![
            sign.into(),
            s.h.to_string(),
            num(s.rho),
            num(s.k),
            num(s.rho_bar),
            num(s.j),
            opt_num(s.rhs),
            opt_num(s.c_step),
        ]);
    }
}

/// L∞ certificate on `B_{R/2}(x0)`; 0 if valid, 4 if not.
pub fn certify_cmd(cfg: &RunConfig, solution: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<Status, CliError> {
    let (m, u) = load_solution(cfg, solution)?;
    let s = cfg.certify_settings()?;
    if !(s.radius > 0.0 && s.radius <= 1.0) {
        return Err(CliError::Core(CoreError::Domain(format!("certify.R must lie in (0, 1], got {}", s.radius))));
    }
    let c_cal = match s.c_cal {
        CalibrationChoice::Value(v) => v,
        CalibrationChoice::Calibrate => calibrate_c(&calibration_traces(&m, &u, &s.x0, s.radius, s.steps)?)?,
    };
    let cert = certify(&m, &u, &s.x0, s.radius, c_cal, s.steps)?;

    ensure_dir(out_dir)?;
    let mut table = Table::new(&CERTIFICATE_COLUMNS);
    table.push(certificate_row(&cert));
    table.write(&out_dir.join(CERTIFICATE_FILE))?;
    let mut trace = Table::new(&["sign", "h", "rho", "k", "rho_bar", "J", "rhs", "c_step"]);
    trace_rows(&mut trace, "+", &cert.trace_plus);
    trace_rows(&mut trace, "-", &cert.trace_minus);
    trace.write(&out_dir.join(TRACE_FILE))?;
    writeln!(
        out,
        "{}: valid={} d={} sup_half_ball={} rhs_bound={}",
        cfg.name(),
        cert.valid,
        num(cert.d),
        num(cert.sup_half_ball),
        num(cert.rhs_bound)
    )
    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(if cert.valid { Status::Ok } else { Status::Failure })
}

pub const INEQUALITY_COLUMNS: [&str; 6] = ["check", "params", "lhs", "rhs_structure", "c_emp", "pass"];

fn params_text(params: &[(String, f64)]) -> String {
    params.iter().map(|(k, v)| format!("{k}={}", num(*v))).collect::<Vec<_>>().join(";")
}

fn report_row(r: &InequalityReport) -> Vec<String> {
    vec![r.check.clone(), params_text(&r.params), num(r.lhs), num(r.rhs_structure), num(r.c_emp), flag(r.pass)]
}

/// Every inequality verifier over the configured sweep; 0 if all pass, 4 otherwise.
pub fn verify_cmd(cfg: &RunConfig, solution: &Path, out_dir: &Path, out: &mut dyn Write) -> Result<Status, CliError> {
    let (m, u) = load_solution(cfg, solution)?;
    let v = cfg.verify_settings()?;
    let grid = u.grid().clone();
    let mut table = Table::new(&INEQUALITY_COLUMNS);
    let mut failures = 0usize;
    let mut record = |table: &mut Table, row: Vec<String>, pass: bool| {
        if !pass {
            failures += 1;
        }
        table.push(row);
    };

    let wd = verify_weight_domination(&m, &grid)?;
    let row = vec![
        "weight_domination".into(),
        format!("checked={};violations={}", wd.checked, wd.violations),
        num(wd.worst_ratio),
        num(1.0),
        num(wd.worst_ratio),
        flag(wd.pass()),
    ];
    record(&mut table, row, wd.pass());

    let lb = verify_lower_bound(&m, &u, &v.subbox)?;
    record(&mut table, report_row(&lb), lb.pass);

    // compactly supported test function built from u
    let bump = tent(&grid, &v.subbox)?;
    let vals: Vec<f64> = u.values().iter().zip(bump.values()).map(|(a, b)| a * b).collect();
    let compact = GridFunction::new(grid.clone(), vals)?;
    let d = derive(m.exponents());
    if d.sigma_star.is_some() {
        let emb = verify_embedding(&compact, &d)?;
        record(&mut table, report_row(&emb), emb.pass);
        let ps = verify_poincare_sobolev(&m, &compact, &d, &v.subbox)?;
        record(&mut table, report_row(&ps), ps.pass);
    } else {
        for check in ["embedding", "poincare_sobolev"] {
            let row = vec![check.into(), "sigma_bar>=n".into(), String::new(), String::new(), String::new(), "skipped".into()];
            record(&mut table, row, true);
        }
    }

    for &k in &v.levels {
        for &rho in &v.inner_radii {
            for &radius in &v.outer_radii {
                if rho >= radius {
                    continue;
                }
                let rep = verify_caccioppoli(&m, &u, k, rho, radius, &v.x0)?;
                record(&mut table, report_row(&rep), rep.pass);
            }
        }
    }

    for &radius in &v.outer_radii {
        let norm = higher_integrability_norm(&m, &u, &Ball::new(v.x0.clone(), radius)?)?;
        let row = vec![
            "higher_integrability".into(),
            format!("R={}", num(radius)),
            num(norm),
            String::new(),
            String::new(),
            flag(norm.is_finite()),
        ];
        record(&mut table, row, norm.is_finite());
    }

    let phis = random_bumps(&grid, v.perturbations, v.amplitude, v.seed)?;
    let qm = verify_quasiminimality(&m, &u, v.q, &phis)?;
    let row = vec![
        "quasi_minimality".into(),
        format!("Q={};count={};failures={}", num(v.q), qm.checks.len(), qm.failures),
        num(qm.empirical_q),
        num(v.q),
        num(qm.empirical_q),
        flag(qm.all_pass()),
    ];
    record(&mut table, row, qm.all_pass());

    ensure_dir(out_dir)?;
    table.write(&out_dir.join(INEQUALITIES_FILE))?;
    writeln!(out, "{}: {} checks, {} failures", cfg.name(), table.rows.len(), failures)
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    Ok(if failures == 0 { Status::Ok } else { Status::Failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing() {
        let a = Axis::parse("gamma=2:6:9").unwrap();
        assert_eq!(a.values().len(), 9);
        assert_eq!(a.values()[0], 2.0);
        assert_eq!(a.values()[8], 6.0);
        assert_eq!(a.values()[4], 4.0);
        assert_eq!(Axis::parse("q=1.5:2.5:1").unwrap().values(), vec![1.5]);
        assert!(Axis::parse("zeta=1:2:3").is_err());
        assert!(Axis::parse("gamma=1:2").is_err());
        assert!(Axis::parse("gamma=1:2:0").is_err());
    }

    #[test]
    fn sweep_endpoint_is_exact() {
        let a = Axis::parse("q=0.1:0.7:7").unwrap();
        assert_eq!(*a.values().last().unwrap(), 0.7);
    }
}
