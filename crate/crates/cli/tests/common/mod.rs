#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use langevin_gauss::experiments::ExperimentReport;

pub fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn problem(name: &str) -> PathBuf {
    configs().join("problems").join(format!("{name}.json"))
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the binary with `args`; `threads` sets the environment variable.
pub fn run_cli(args: &[&str], threads: Option<usize>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_langevin-gauss"));
    cmd.args(args).env_remove("LANGEVIN_GAUSS_THREADS").env("RUST_LOG", "error");
    if let Some(t) = threads {
        cmd.env("LANGEVIN_GAUSS_THREADS", t.to_string());
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// `<cmd> --problem <p> --config <c> --seed <seed> --out <out>`.
pub fn run_experiment(cmd: &str, problem_name: &str, config: &Path, seed: u64, out: &Path) -> Run {
    run_cli(
        &[
            cmd,
            "--problem",
            problem(problem_name).to_str().unwrap(),
            "--config",
            config.to_str().unwrap(),
            "--seed",
            &seed.to_string(),
            "--out",
            out.to_str().unwrap(),
        ],
        None,
    )
}

pub fn report(out: &Path, stem: &str) -> ExperimentReport {
    let text = std::fs::read_to_string(out.join(format!("{stem}.json"))).expect("report written");
    serde_json::from_str(&text).expect("report parses")
}
