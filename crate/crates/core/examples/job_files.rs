//! Runs every job file in `examples/jobs` through the batch front end and
//! prints the verdicts. Pass `--structured` for JSON reports.
//!
//! `cargo run --release --example job_files`

use std::path::Path;

use singulog::cli::{parse_jobspec, run, Format};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let structured = std::env::args().any(|a| a == "--structured");
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/jobs");
    let mut paths: Vec<_> = std::fs::read_dir(&dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    paths.sort();
    let mut worst = 0;
    for path in paths.iter().filter(|p| p.extension().is_some_and(|e| e == "job")) {
        let job = parse_jobspec(&std::fs::read_to_string(path)?)?;
        let report = run(&job);
        worst = worst.max(report.exit_code());
        if structured {
            println!("{}", report.render(Format::Structured));
        } else {
            let name = path.file_name().expect("file").to_string_lossy();
            println!("{name:20} {:?} ({:.2} s)", report.verdict(), report.seconds);
        }
    }
    std::process::exit(worst);
}
