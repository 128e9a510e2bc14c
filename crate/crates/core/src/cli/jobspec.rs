//! Flat `key = value` job files.
//!
//! ```text
//! # verify the α = −1, j = 2 chain
//! command = verify
//! family = J
//! alpha = -1
//! j = 2
//! ```
//!
//! `measure` and `r0` may repeat; every other key appears at most once.
//! Unknown keys are errors. Defaults: `delta = 1`, `theta = π/2`, `seed = 0`.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::formf::chain::ChainExpr;
use crate::nested::{Family, IntegralSpec, Kernel, Prop44Variant};
use crate::rational::{fmt_rational, int, parse_rational, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum JobError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("invalid job: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Analyze,
    Verify,
    Formf,
    Prep,
    Scenario,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Verify => "verify",
            Command::Formf => "formf",
            Command::Prep => "prep",
            Command::Scenario => "scenario",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "analyze" => Command::Analyze,
            "verify" => Command::Verify,
            "formf" => Command::Formf,
            "prep" => Command::Prep,
            "scenario" => Command::Scenario,
            _ => return Err(format!("unknown command {s:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Structured,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Text => "text",
            Format::Csv => "csv",
            Format::Structured => "structured",
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "text" => Format::Text,
            "csv" => Format::Csv,
            "structured" => Format::Structured,
            _ => return Err(format!("unknown format {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// A named family (its spec is derived) or a bare nested spec.
    Integral { family: Option<Family>, spec: IntegralSpec },
    Chain(ChainExpr),
    Scenario(String),
    Surface(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub theta: f64,
    pub eps_max: f64,
    pub eps_min: f64,
    pub points: usize,
    pub seed: u64,
    pub coefficient_tol: f64,
    pub target_rel_err: f64,
    pub max_depth: u32,
    /// Monte Carlo sample count for `formf` jobs.
    pub samples: usize,
    pub r0: Vec<f64>,
    /// Half width of the complex `q` grid for `prep` jobs.
    pub half_width: f64,
    pub residual_tol: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            theta: std::f64::consts::FRAC_PI_2,
            eps_max: 1e-2,
            eps_min: 1e-6,
            points: 24,
            seed: 0,
            coefficient_tol: 0.02,
            target_rel_err: 1e-9,
            max_depth: 2,
            samples: 100_000,
            r0: vec![0.05, 0.1, 0.5],
            half_width: 0.2,
            residual_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub target: Target,
    pub oracle: OracleParams,
    /// Replaces the symbolic leading coefficient before verification.
    pub expect_coefficient: Option<Rational>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

const KEYS: &[&str] = &[
    "command",
    "family",
    "alpha",
    "j",
    "n",
    "m",
    "a",
    "measure",
    "kernel",
    "outer_log",
    "delta",
    "chain",
    "scenario",
    "surface",
    "theta",
    "eps_max",
    "eps_min",
    "points",
    "seed",
    "coefficient_tol",
    "target_rel_err",
    "max_depth",
    "samples",
    "r0",
    "half_width",
    "residual_tol",
    "expect_coefficient",
    "format",
    "out",
];

const REPEATED: &[&str] = &["measure", "r0"];

struct Entry {
    line: usize,
    value: String,
}

struct Fields {
    entries: Vec<(String, Entry)>,
    used: BTreeSet<String>,
}

impl Fields {
    fn get(&mut self, key: &str) -> Option<&Entry> {
        self.used.insert(key.to_string());
        self.entries.iter().find(|(k, _)| k == key).map(|(_, e)| e)
    }

    fn all(&mut self, key: &str) -> Vec<&Entry> {
        self.used.insert(key.to_string());
        self.entries.iter().filter(|(k, _)| k == key).map(|(_, e)| e).collect()
    }

    fn parsed<T>(&mut self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<Option<T>, JobError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => f(&e.value).map(Some).map_err(|msg| JobError::Parse { line: e.line, msg: format!("{key}: {msg}") }),
        }
    }

    fn required<T>(&mut self, key: &str, f: impl Fn(&str) -> Result<T, String>) -> Result<T, JobError> {
        self.parsed(key, f)?.ok_or_else(|| JobError::Invalid(format!("missing key {key:?}")))
    }

    fn present(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _)| k == key)
    }
}

fn num<T: FromStr>(s: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    s.parse::<T>().map_err(|e| format!("{e} in {s:?}"))
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("not a rational: {s:?}"))
}

fn exponent(s: &str) -> Result<u32, String> {
    let v: i64 = num(s)?;
    u32::try_from(v).map_err(|_| format!("measure exponent {v} must be a nonnegative integer"))
}

fn kernel(s: &str) -> Result<Kernel, String> {
    let mut it = s.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some("log"), None, _) => Ok(Kernel::Log),
        (Some("power"), Some(a), None) => Ok(Kernel::Power(rational(a)?)),
        (Some("powerlog"), Some(n), None) => Ok(Kernel::PowerLog(num(n)?)),
        _ => Err(format!("kernel must be `log`, `power <α>` or `powerlog <n>`, got {s:?}")),
    }
}

fn kernel_text(k: &Kernel) -> String {
    match k {
        Kernel::Log => "log".into(),
        Kernel::Power(a) => format!("power {}", fmt_rational(a)),
        Kernel::PowerLog(n) => format!("powerlog {n}"),
    }
}

fn positive(name: &str, v: f64) -> Result<(), JobError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(JobError::Invalid(format!("{name} must be positive, got {v}")))
    }
}

pub fn parse_jobspec(text: &str) -> Result<JobSpec, JobError> {
    let mut entries: Vec<(String, Entry)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| JobError::Parse { line, msg: format!("expected `key = value`, got {content:?}") })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(JobError::UnknownKey { line, key: key.into() });
        }
        if !REPEATED.contains(&key) && entries.iter().any(|(k, _)| k == key) {
            return Err(JobError::Parse { line, msg: format!("duplicate key {key:?}") });
        }
        entries.push((key.into(), Entry { line, value: value.into() }));
    }
    let mut f = Fields { entries, used: BTreeSet::new() };

    let command: Command = f.required("command", |s| s.parse())?;
    let target = match command {
        Command::Analyze | Command::Verify => integral_target(&mut f)?,
        Command::Formf => Target::Chain(f.required("chain", |s| s.parse::<ChainExpr>().map_err(|e| e.to_string()))?),
        Command::Scenario => Target::Scenario(f.required("scenario", |s| Ok(s.to_string()))?),
        Command::Prep => Target::Surface(f.required("surface", |s| Ok(s.to_string()))?),
    };

    let d = OracleParams::default();
    let r0s: Result<Vec<f64>, JobError> = f
        .all("r0")
        .into_iter()
        .map(|e| num(&e.value).map_err(|msg| JobError::Parse { line: e.line, msg }))
        .collect();
    let r0s = r0s?;
    let oracle = OracleParams {
        theta: f.parsed("theta", num)?.unwrap_or(d.theta),
        eps_max: f.parsed("eps_max", num)?.unwrap_or(d.eps_max),
        eps_min: f.parsed("eps_min", num)?.unwrap_or(d.eps_min),
        points: f.parsed("points", num)?.unwrap_or(d.points),
        seed: f.parsed("seed", num)?.unwrap_or(d.seed),
        coefficient_tol: f.parsed("coefficient_tol", num)?.unwrap_or(d.coefficient_tol),
        target_rel_err: f.parsed("target_rel_err", num)?.unwrap_or(d.target_rel_err),
        max_depth: f.parsed("max_depth", num)?.unwrap_or(d.max_depth),
        samples: f.parsed("samples", num)?.unwrap_or(d.samples),
        r0: if r0s.is_empty() { d.r0 } else { r0s },
        half_width: f.parsed("half_width", num)?.unwrap_or(d.half_width),
        residual_tol: f.parsed("residual_tol", num)?.unwrap_or(d.residual_tol),
    };
    let expect_coefficient = f.parsed("expect_coefficient", rational)?;
    let format = f.parsed("format", |s| s.parse())?.unwrap_or_default();
    let out = f.parsed("out", |s| Ok(PathBuf::from(s)))?;

    if let Some((key, e)) = f.entries.iter().find(|(k, _)| !f.used.contains(k)) {
        return Err(JobError::Parse {
            line: e.line,
            msg: format!("key {key:?} does not apply to command {}", command.as_str()),
        });
    }
    let job = JobSpec { command, target, oracle, expect_coefficient, format, out };
    job.validate()?;
    Ok(job)
}

fn integral_target(f: &mut Fields) -> Result<Target, JobError> {
    let Some(name) = f.parsed("family", |s| Ok(s.to_string()))? else {
        let exps: Result<Vec<u32>, JobError> = f
            .all("measure")
            .into_iter()
            .map(|e| exponent(&e.value).map_err(|msg| JobError::Parse { line: e.line, msg }))
            .collect();
        let mut spec = IntegralSpec::new(exps?, f.required("kernel", kernel)?);
        spec.outer_log_power = f.parsed("outer_log", num)?.unwrap_or(0);
        spec.delta = f.parsed("delta", rational)?.unwrap_or_else(|| int(1));
        return Ok(Target::Integral { family: None, spec });
    };
    for k in ["measure", "kernel", "outer_log", "delta"] {
        if f.present(k) {
            return Err(JobError::Invalid(format!("key {k:?} conflicts with family = {name}")));
        }
    }
    let family = match name.as_str() {
        "J" => Family::J { alpha: f.required("alpha", rational)?, j: f.required("j", num)? },
        "K42" => Family::K42 { alpha: f.required("alpha", rational)?, j: f.required("j", num)? },
        "I42" => Family::I42 { n: f.required("n", num)?, j: f.required("j", num)? },
        "Itilde" => Family::Itilde { n: f.required("n", num)?, j: f.required("j", num)? },
        "L41" => Family::L41 { m: f.required("m", num)?, a: f.parsed("a", rational)?.unwrap_or_else(|| int(1)) },
        "prop44-K" | "prop44-J" => Family::Prop44 {
            n: f.required("n", num)?,
            m: f.required("m", num)?,
            which: if name == "prop44-K" { Prop44Variant::K } else { Prop44Variant::J },
        },
        other => return Err(JobError::Invalid(format!("unknown family {other:?}"))),
    };
    let spec = family.spec();
    Ok(Target::Integral { family: Some(family), spec })
}

impl JobSpec {
    pub fn validate(&self) -> Result<(), JobError> {
        let o = &self.oracle;
        for (name, v) in [
            ("eps_max", o.eps_max),
            ("eps_min", o.eps_min),
            ("coefficient_tol", o.coefficient_tol),
            ("target_rel_err", o.target_rel_err),
            ("half_width", o.half_width),
            ("residual_tol", o.residual_tol),
        ] {
            positive(name, v)?;
        }
        if o.r0.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return Err(JobError::Invalid("every r0 must lie in (0, 1]".into()));
        }
        if let Target::Integral { spec, .. } = &self.target {
            spec.validate().map_err(|e| JobError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    /// Canonical text form; `parse_jobspec(&job.to_text())` returns `job`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("write to string");
        kv("command", self.command.as_str().into());
        match &self.target {
            Target::Integral { family: Some(fam), .. } => {
                kv("family", fam.name().into());
                match fam {
                    Family::J { alpha, j } | Family::K42 { alpha, j } => {
                        kv("alpha", fmt_rational(alpha));
                        kv("j", j.to_string());
                    }
                    Family::I42 { n, j } | Family::Itilde { n, j } => {
                        kv("n", n.to_string());
                        kv("j", j.to_string());
                    }
                    Family::L41 { m, a } => {
                        kv("m", m.to_string());
                        kv("a", fmt_rational(a));
                    }
                    Family::Prop44 { n, m, .. } => {
                        kv("n", n.to_string());
                        kv("m", m.to_string());
                    }
                }
            }
            Target::Integral { family: None, spec } => {
                for e in &spec.measure_exponents {
                    kv("measure", e.to_string());
                }
                kv("kernel", kernel_text(&spec.kernel));
                kv("outer_log", spec.outer_log_power.to_string());
                kv("delta", fmt_rational(&spec.delta));
            }
            Target::Chain(c) => kv("chain", c.to_string()),
            Target::Scenario(n) => kv("scenario", n.clone()),
            Target::Surface(n) => kv("surface", n.clone()),
        }
        let o = &self.oracle;
        kv("theta", format!("{:?}", o.theta));
        kv("eps_max", format!("{:?}", o.eps_max));
        kv("eps_min", format!("{:?}", o.eps_min));
        kv("points", o.points.to_string());
        kv("seed", o.seed.to_string());
        kv("coefficient_tol", format!("{:?}", o.coefficient_tol));
        kv("target_rel_err", format!("{:?}", o.target_rel_err));
        kv("max_depth", o.max_depth.to_string());
        kv("samples", o.samples.to_string());
        for r in &o.r0 {
            kv("r0", format!("{r:?}"));
        }
        kv("half_width", format!("{:?}", o.half_width));
        kv("residual_tol", format!("{:?}", o.residual_tol));
        if let Some(c) = &self.expect_coefficient {
            kv("expect_coefficient", fmt_rational(c));
        }
        kv("format", self.format.as_str().into());
        if let Some(p) = &self.out {
            kv("out", p.display().to_string());
        }
        s
    }
}
