use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use singulog::cli::{apply_precision, parse_jobspec, run, Format, PRECISION_VAR};

const IO_ERROR: u8 = 3;

/// Job keys that may repeat; `--set` appends to these instead of replacing.
const REPEATED: &[&str] = &["measure", "r0"];

#[derive(Parser)]
#[command(name = "singulog", version, about = "Singular expansions of nested integrals")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// Job file (`key = value` lines).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Extra `key=value` job lines, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Directory for the report file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Fmt>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_depth: Option<u32>,
    /// Relative tolerance on fitted coefficients.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    Analyze,
    Verify,
    Formf,
    Prep,
    Scenario,
}

impl Cmd {
    fn name(self) -> &'static str {
        match self {
            Cmd::Analyze => "analyze",
            Cmd::Verify => "verify",
            Cmd::Formf => "formf",
            Cmd::Prep => "prep",
            Cmd::Scenario => "scenario",
        }
    }
}

#[derive(ValueEnum, Clone, Copy)]
enum Fmt {
    Text,
    Csv,
    Structured,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { IO_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(args) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("singulog: {msg}");
            ExitCode::from(IO_ERROR)
        }
    }
}

fn execute(args: Args) -> Result<u8, String> {
    let mut text = match &args.spec {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
        None => String::new(),
    };
    let has_command = text.lines().any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("command"));
    if !has_command {
        text = format!("command = {}\n{text}", args.command.name());
    }
    for kv in &args.set {
        let key = kv.split('=').next().unwrap_or("").trim();
        if !REPEATED.contains(&key) {
            text = text
                .lines()
                .filter(|l| l.split('#').next().unwrap_or("").split('=').next().unwrap_or("").trim() != key)
                .collect::<Vec<_>>()
                .join("\n");
        }
        text.push('\n');
        text.push_str(kv);
    }
    let mut job = parse_jobspec(&text).map_err(|e| e.to_string())?;
    if job.command.as_str() != args.command.name() {
        return Err(format!("job file is a {} job, not {}", job.command.as_str(), args.command.name()));
    }
    if let Some(s) = args.seed {
        job.oracle.seed = s;
    }
    if let Some(d) = args.max_depth {
        job.oracle.max_depth = d;
    }
    if let Some(t) = args.tolerance {
        job.oracle.coefficient_tol = t;
    }
    if let Some(f) = args.format {
        job.format = match f {
            Fmt::Text => Format::Text,
            Fmt::Csv => Format::Csv,
            Fmt::Structured => Format::Structured,
        };
    }
    if let Some(o) = args.out {
        job.out = Some(o);
    }
    apply_precision(&mut job, std::env::var(PRECISION_VAR).ok().as_deref()).map_err(|e| e.to_string())?;
    job.validate().map_err(|e| e.to_string())?;

    let report = run(&job);
    let body = report.render(job.format);
    print!("{body}");
    if let Some(dir) = &job.out {
        let ext = match job.format {
            Format::Text => "txt",
            Format::Csv => "csv",
            Format::Structured => "json",
        };
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let path = dir.join(format!("report.{ext}"));
        std::fs::write(&path, &body).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(report.exit_code() as u8)
}
