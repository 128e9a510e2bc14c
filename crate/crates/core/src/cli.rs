//! Batch front end: job files in, reports out.

pub mod jobspec;

use std::fmt::Write as _;
use std::time::Instant;

use serde_json::{json, Value};

use crate::formf::{check_form_f, smear};
use crate::logpow::{Coefficient, SingExpansion};
use crate::nested::{eval_nested, eval_prop43, eval_prop45, Kernel, StructureBound};
use crate::oracle::{
    verify, verify_smear, CriterionResult, QuadOptions, Sample, SampleRay, Tolerances, Verdict,
    VerifyOptions,
};
use crate::prep::{preset, prepare_grid, run_scenario, AnalyticSurface};
use crate::rational::Rational;

pub use jobspec::{parse_jobspec, Command, Format, JobError, JobSpec, OracleParams, Target};

/// Environment variable giving the working precision in decimal digits.
pub const PRECISION_VAR: &str = "SINGULOG_PRECISION";

/// Applies a precision override: `d` digits asks the quadrature for a
/// relative error of `10^-d`.
pub fn apply_precision(job: &mut JobSpec, digits: Option<&str>) -> Result<(), JobError> {
    if let Some(d) = digits {
        let d: u32 = d
            .trim()
            .parse()
            .map_err(|_| JobError::Invalid(format!("{PRECISION_VAR} must be a digit count, got {d:?}")))?;
        job.oracle.target_rel_err = format!("1e-{d}").parse().expect("float literal");
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Report {
    pub job: JobSpec,
    pub symbolic: Option<SingExpansion>,
    pub bound: Option<StructureBound>,
    /// Additional named facts (form-F text, prep residuals, …).
    pub facts: Vec<(String, String)>,
    /// Name of the expansion variable.
    pub variable: &'static str,
    pub samples: Vec<Sample>,
    pub sample_residuals: Vec<f64>,
    pub criteria: Vec<CriterionResult>,
    pub seconds: f64,
}

impl Report {
    fn new(job: &JobSpec) -> Self {
        Report {
            job: job.clone(),
            symbolic: None,
            bound: None,
            facts: Vec::new(),
            variable: "t",
            samples: Vec::new(),
            sample_residuals: Vec::new(),
            criteria: Vec::new(),
            seconds: 0.0,
        }
    }

    pub fn verdict(&self) -> Verdict {
        Verdict::combine(self.criteria.iter().map(|c| c.verdict))
    }

    /// 0 all pass, 1 any fail, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.verdict() {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    fn fail(&mut self, name: &str, err: impl std::fmt::Display) {
        self.criteria.push(CriterionResult::new(name, Verdict::Fail, err.to_string()));
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Csv => self.to_csv(),
            Format::Structured => serde_json::to_string_pretty(&self.to_json()).expect("json"),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "singulog {} {}", env!("CARGO_PKG_VERSION"), self.job.command.as_str());
        if let Some(e) = &self.symbolic {
            let _ = writeln!(s, "expansion: {}", e.display_in(self.variable));
            if let Some(l) = e.leading() {
                let _ = writeln!(s, "leading: {}", l.display_in(self.variable));
            }
        }
        if let Some(b) = &self.bound {
            let _ = writeln!(
                s,
                "bound: exponent >= {}, log power <= {}",
                crate::rational::fmt_rational(&b.min_t_exponent),
                b.max_log_power
            );
        }
        for (k, v) in &self.facts {
            let _ = writeln!(s, "{k}: {v}");
        }
        if !self.samples.is_empty() {
            let _ = writeln!(s, "samples:");
            for (i, x) in self.samples.iter().enumerate() {
                let r = self.sample_residuals.get(i).copied().unwrap_or(f64::NAN);
                let _ = writeln!(s, "  eps {:.3e}  value {:.15e} {:+.15e}i  residual {r:.2e}", x.epsilon, x.value.re, x.value.im);
            }
        }
        for c in &self.criteria {
            let _ = writeln!(s, "[{:?}] {}: {}", c.verdict, c.name, c.detail);
        }
        let _ = writeln!(s, "verdict: {:?} (seed {}, {:.2} s)", self.verdict(), self.job.oracle.seed, self.seconds);
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,re_value,im_value,fit_residual\n");
        for (i, x) in self.samples.iter().enumerate() {
            let r = self.sample_residuals.get(i).copied().unwrap_or(f64::NAN);
            let _ = writeln!(s, "{:e},{:e},{:e},{:e}", x.epsilon, x.value.re, x.value.im, r);
        }
        s
    }

    pub fn to_json(&self) -> Value {
        let samples: Vec<Value> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, x)| {
                json!({
                    "epsilon": x.epsilon,
                    "t": [x.t.re, x.t.im],
                    "value": [x.value.re, x.value.im],
                    "quad_error": x.quad_error,
                    "fit_residual": self.sample_residuals.get(i),
                })
            })
            .collect();
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.job.command.as_str(),
            "job": self.job.to_text(),
            "seed": self.job.oracle.seed,
            "tolerances": {
                "coefficient_rel": self.job.oracle.coefficient_tol,
                "target_rel_err": self.job.oracle.target_rel_err,
            },
            "variable": self.variable,
            "expansion": self.symbolic.as_ref().map(expansion_json),
            "bound": self.bound.as_ref().map(|b| json!({
                "min_exponent": rational_json(&b.min_t_exponent),
                "max_log_power": b.max_log_power,
            })),
            "facts": self.facts.iter().map(|(k, v)| json!({ "name": k, "value": v })).collect::<Vec<_>>(),
            "samples": samples,
            "verdicts": self.criteria.iter().map(|c| json!({
                "name": c.name,
                "verdict": format!("{:?}", c.verdict),
                "detail": c.detail,
            })).collect::<Vec<_>>(),
            "verdict": format!("{:?}", self.verdict()),
            "seconds": self.seconds,
        })
    }
}

fn rational_json(r: &Rational) -> Value {
    json!([r.numer().to_string(), r.denom().to_string()])
}

fn expansion_json(e: &SingExpansion) -> Value {
    Value::Array(
        e.terms()
            .iter()
            .map(|t| {
                let coeff = match &t.coeff {
                    Coefficient::Exact(r) => json!({ "exact": rational_json(r) }),
                    Coefficient::Undetermined(l) => json!({ "undetermined": l.iter().collect::<Vec<_>>() }),
                    Coefficient::Fitted { value, stderr } => json!({ "value": value, "stderr": stderr }),
                };
                json!({ "exponent": rational_json(&t.exponent), "logpow": t.logpow, "coefficient": coeff })
            })
            .collect(),
    )
}

/// Symbolic expansion and bound for a nested target.
fn symbolic_for(target: &Target) -> Result<(SingExpansion, Option<StructureBound>), String> {
    let Target::Integral { family, spec } = target else {
        return Err("not an integral target".into());
    };
    if let Some(f) = family {
        return f.symbolic().map(|e| (e, None)).map_err(|e| e.to_string());
    }
    let r = if spec.outer_log_power > 0 && spec.kernel == Kernel::Log {
        eval_prop45(spec).map(|(e, b)| (e, Some(b)))
    } else if spec.outer_log_power == 0 && !matches!(spec.kernel, Kernel::PowerLog(_)) {
        eval_prop43(spec).map(|(e, b)| (e, Some(b)))
    } else {
        eval_nested(spec).map(|e| (e, None))
    };
    r.map_err(|e| e.to_string())
}

pub fn run(job: &JobSpec) -> Report {
    let start = Instant::now();
    let mut rep = Report::new(job);
    match job.command {
        Command::Analyze => match symbolic_for(&job.target) {
            Ok((e, b)) => {
                if let Some(b) = &b {
                    let ok = b.admits(&e);
                    rep.criteria.push(CriterionResult::new(
                        "structure bound",
                        if ok { Verdict::Pass } else { Verdict::Fail },
                        "every singular term within the bound",
                    ));
                } else {
                    rep.criteria.push(CriterionResult::new("expansion", Verdict::Pass, "evaluated"));
                }
                rep.symbolic = Some(e);
                rep.bound = b;
            }
            Err(e) => rep.fail("expansion", e),
        },
        Command::Verify => run_verify(job, &mut rep),
        Command::Formf => run_formf(job, &mut rep),
        Command::Prep => run_prep(job, &mut rep),
        Command::Scenario => run_named_scenario(job, &mut rep),
    }
    rep.seconds = start.elapsed().as_secs_f64();
    rep
}

fn run_verify(job: &JobSpec, rep: &mut Report) {
    let (mut sym, bound) = match symbolic_for(&job.target) {
        Ok(x) => x,
        Err(e) => return rep.fail("expansion", e),
    };
    if let Some(c) = &job.expect_coefficient {
        sym = replace_leading(&sym, c);
    }
    let Target::Integral { spec, .. } = &job.target else { unreachable!("verify has an integral target") };
    let o = &job.oracle;
    let ray = match SampleRay::geometric(o.theta, o.eps_max, o.eps_min, o.points) {
        Ok(r) => r,
        Err(e) => return rep.fail("sample ray", e),
    };
    let opts = VerifyOptions {
        ray,
        quad: QuadOptions { target_rel_err: o.target_rel_err, max_depth: o.max_depth, ..QuadOptions::default() },
        tolerances: Tolerances { coefficient_rel: o.coefficient_tol, ..Tolerances::default() },
        max_logpow: None,
    };
    let v = verify(spec, &sym, &opts);
    rep.samples = v.samples.clone();
    if let Some(fit) = v.blind.as_ref().or(v.guided.as_ref()) {
        rep.sample_residuals = fit.sample_residuals.clone();
    }
    if let Some(b) = &bound {
        let ok = b.admits(&sym);
        rep.criteria.push(CriterionResult::new(
            "structure bound",
            if ok { Verdict::Pass } else { Verdict::Fail },
            "every singular term within the bound",
        ));
    }
    rep.criteria.extend(v.criteria);
    rep.symbolic = Some(sym);
    rep.bound = bound;
}

/// Same expansion with the first term's coefficient set to `c`.
fn replace_leading(e: &SingExpansion, c: &Rational) -> SingExpansion {
    let mut terms = e.terms().to_vec();
    if let Some(t) = terms.first_mut() {
        t.coeff = Coefficient::exact(c.clone());
    }
    SingExpansion::from_terms(terms)
}

fn run_formf(job: &JobSpec, rep: &mut Report) {
    let Target::Chain(p) = &job.target else { unreachable!("formf has a chain target") };
    let f = match smear(p) {
        Ok(f) => f,
        Err(e) => return rep.fail("smear", e),
    };
    rep.facts.push(("chain".into(), p.to_string()));
    rep.facts.push(("smeared".into(), f.to_string()));
    let strict = check_form_f(&f, true);
    rep.criteria.push(CriterionResult::new(
        "form F",
        if strict.is_ok() { Verdict::Pass } else { Verdict::Fail },
        strict.err().map_or("strict check passed".into(), |e| e.to_string()),
    ));
    let o = &job.oracle;
    rep.criteria.extend(verify_smear(p, &f, &o.r0, o.samples, o.seed, 3.0));
}

fn surface_by_name(name: &str) -> Result<AnalyticSurface, String> {
    match name {
        "exponential" => Ok(AnalyticSurface::toy_exponential()),
        "linear" => Ok(AnalyticSurface::toy_linear()),
        "shifted" => Ok(AnalyticSurface::toy_shifted()),
        "critical" => AnalyticSurface::toy_critical().map_err(|e| e.to_string()),
        other => Err(format!("unknown surface {other:?}; known: exponential, linear, shifted, critical")),
    }
}

fn run_prep(job: &JobSpec, rep: &mut Report) {
    let Target::Surface(name) = &job.target else { unreachable!("prep has a surface target") };
    let s = match surface_by_name(name) {
        Ok(s) => s,
        Err(e) => return rep.fail("surface hypothesis", e),
    };
    let o = &job.oracle;
    match prepare_grid(&s, o.half_width, 1e-13) {
        Err(e) => rep.fail("preparation", e),
        Ok(p) => {
            rep.facts.push(("grid points".into(), p.grid.len().to_string()));
            rep.facts.push(("min |B|".into(), format!("{:.6e}", p.min_abs_b)));
            rep.facts.push(("identity error".into(), format!("{:.3e}", p.identity_error)));
            let ok = p.residual_grid < o.residual_tol;
            rep.criteria.push(CriterionResult::new(
                "factorization residual",
                if ok { Verdict::Pass } else { Verdict::Fail },
                format!("{:.3e} (limit {:e})", p.residual_grid, o.residual_tol),
            ));
        }
    }
}

fn run_named_scenario(job: &JobSpec, rep: &mut Report) {
    let Target::Scenario(name) = &job.target else { unreachable!("scenario has a scenario target") };
    let r = match preset(name).and_then(|s| run_scenario(&s)) {
        Ok(r) => r,
        Err(e) => return rep.fail("scenario", e),
    };
    rep.facts.push(("expansion in t".into(), r.in_t.to_string()));
    rep.symbolic = Some(r.in_phi);
    rep.variable = "φ";
    rep.bound = r.bound;
    rep.criteria = r.criteria;
}
