use std::process::Command;

fn singulog() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_singulog"));
    c.env_remove("SINGULOG_PRECISION");
    c
}

fn job(name: &str) -> String {
    format!("{}/examples/jobs/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn verify_job_passes_and_prints_the_half() {
    let out = singulog().args(["verify", "--spec", &job("j-log-squared.job")]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("leading: 1/2·(log t)^2"), "{text}");
}

#[test]
fn corrupted_coefficient_exits_one() {
    let out = singulog()
        .args(["verify", "--spec", &job("j-log-squared.job"), "--set", "expect_coefficient = 11/20"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unattainable_precision_exits_two() {
    let out = singulog()
        .args(["verify", "--spec", &job("j-log-squared.job"), "--set", "points = 8"])
        .env("SINGULOG_PRECISION", "30")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_three() {
    let out = singulog().args(["verify", "--spec", "/nonexistent/job"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = singulog().args(["analyze", "--set", "alpha_ = 1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha_"));
}

#[test]
fn reports_are_written_in_each_format() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let csv = singulog()
        .args(["verify", "--spec", &job("j-log-squared.job"), "--format", "csv", "--out", out_dir])
        .output()
        .unwrap();
    assert_eq!(csv.status.code(), Some(0));
    let body = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(body.starts_with("epsilon,re_value,im_value,fit_residual\n"));
    assert_eq!(body.lines().count(), 17);

    let js = singulog()
        .args(["scenario", "--spec", &job("sec2ii.job"), "--format", "structured", "--out", out_dir, "--seed", "5"])
        .output()
        .unwrap();
    assert_eq!(js.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["verdict"], "Pass");
    assert_eq!(v["seed"], 5);
    assert_eq!(v["expansion"][0]["coefficient"]["exact"], serde_json::json!(["1", "8"]));
    assert_eq!(v["expansion"][0]["logpow"], 2);
}

#[test]
fn embedded_job_reproduces_the_verdicts() {
    let out = singulog()
        .args(["formf", "--spec", &job("smear-three.job"), "--format", "structured"])
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("again.job");
    std::fs::write(&path, v["job"].as_str().unwrap()).unwrap();
    let again = singulog().args(["formf", "--spec", path.to_str().unwrap(), "--format", "structured"]).output().unwrap();
    let w: serde_json::Value = serde_json::from_slice(&again.stdout).unwrap();
    assert_eq!(v["verdicts"], w["verdicts"]);
}

#[test]
fn mismatched_subcommand_is_rejected() {
    let out = singulog().args(["verify", "--spec", &job("sec2i.job")]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}
