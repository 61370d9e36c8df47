use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use langevin_gauss::experiments::{self as ex, ExperimentConfig, ExperimentReport};
use langevin_gauss::model::{audit_hypotheses, AuditVerdict, ProblemSpec};
use langevin_gauss::sde::{simulate_ensemble, write_snapshots_csv, SimConfig};
use langevin_gauss::Error;
use serde::Serialize;

use crate::args::{Command, Common};
use crate::manifest::{RunManifest, WallClock};
use crate::plot::{emit_plot_script, kind_for};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

const AUDIT_SAMPLES: usize = 4096;
const AUDIT_RADIUS: f64 = 4.0;

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn from_core(context: &str, e: Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
        let message = match &e {
            Error::EpsilonTooLarge { .. } => format!("{context}: config key `epsilons`/`epsilon`: {e}"),
            _ => format!("{context}: {e}"),
        };
        CliError { code, message }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// What a finished run printed and wrote.
#[derive(Debug)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub outputs: Vec<PathBuf>,
    pub all_pass: bool,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.all_pass {
            EXIT_PASS
        } else {
            EXIT_VERDICT
        }
    }
}

fn read(path: &Path, what: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{what} `{}`: {e}", path.display())))
}

/// Problem and effective config, from files or from a manifest.
fn load_inputs(cmd: &Command, common: &Common) -> Result<(ProblemSpec, ExperimentConfig), CliError> {
    let (spec, mut cfg) = if let Some(m) = &common.manifest {
        let text = read(m, "manifest")?;
        let man = RunManifest::from_json(&text)
            .map_err(|e| CliError::usage(format!("manifest `{}`: {e}", m.display())))?;
        if man.command != cmd.name() {
            return Err(CliError::usage(format!(
                "manifest `{}`: key `command` is `{}`, but `{}` was invoked",
                m.display(),
                man.command,
                cmd.name()
            )));
        }
        let spec = ProblemSpec::from_doc(&man.problem).map_err(|e| CliError::from_core("manifest key `problem`", e))?;
        man.config
            .validate()
            .map_err(|e| CliError::from_core("manifest key `config`", e))?;
        (spec, man.config)
    } else {
        let p = common.problem.as_ref().ok_or_else(|| CliError::usage("--problem is required"))?;
        let spec = ProblemSpec::from_json(&read(p, "problem file")?)
            .map_err(|e| CliError::from_core(&format!("problem file `{}`", p.display()), e))?;
        let cfg = match &common.config {
            Some(c) => ExperimentConfig::from_json(&read(c, "config file")?)
                .map_err(|e| CliError::from_core(&format!("config file `{}`", c.display()), e))?,
            None => ExperimentConfig::default(),
        };
        (spec, cfg)
    };
    if let Some(s) = common.seed {
        cfg.seed = Some(s);
    }
    cfg.override_eps_star |= common.override_eps_star;
    Ok((spec, cfg))
}

fn write(out: &Path, name: &str, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let path = out.join(name);
    fs::write(&path, bytes).map_err(|e| CliError::usage(format!("--out: cannot write `{}`: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct SnapshotSummary {
    time: f64,
    n: usize,
    blown_up: usize,
    mean_sq_norm: f64,
}

/// Runs one subcommand and writes its outputs into `--out`.
pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let common = cmd.common();
    if common.threads == Some(0) {
        return Err(CliError::usage("--threads: must be at least 1"));
    }
    if let Some(n) = common.threads {
        // a second call in the same process keeps the first pool; results do not depend on it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let (spec, cfg) = load_inputs(cmd, common)?;
    fs::create_dir_all(&common.out)
        .map_err(|e| CliError::usage(format!("--out `{}`: {e}", common.out.display())))?;
    let stem = cmd.stem();
    let ctx = cmd.name();
    let core = |e: Error| CliError::from_core(ctx, e);
    let mut written = Vec::new();
    let mut lines = Vec::new();
    let mut all_pass = true;

    let report: Option<ExperimentReport> = match cmd {
        Command::Audit(_) => {
            let audit = audit_hypotheses(
                &spec,
                cfg.n_samples.unwrap_or(AUDIT_SAMPLES),
                cfg.radius.unwrap_or(AUDIT_RADIUS),
                cfg.seed.unwrap_or(0),
            )
            .map_err(core)?;
            let mut csv = String::from("hypothesis,verdict,declared,empirical,violation\n");
            for c in &audit.checks {
                let h = serde_json::to_value(c.hypothesis).expect("enum serializes");
                let h = h.as_str().unwrap_or_default().to_string();
                let v = serde_json::to_value(c.verdict).expect("enum serializes");
                let v = v.as_str().unwrap_or_default().to_string();
                csv.push_str(&format!(
                    "{h},{v},{},{},{}\n",
                    fmt17(c.declared),
                    fmt17(c.empirical),
                    fmt17(c.violation)
                ));
                lines.push(format!(
                    "[{}] audit {h}: declared {:.6e}, sampled {:.6e}, violation {:.3e}",
                    v.to_uppercase(),
                    c.declared,
                    c.empirical,
                    c.violation
                ));
                if c.verdict == AuditVerdict::Fail {
                    all_pass = false;
                }
            }
            write(&common.out, &format!("{stem}.csv"), csv.as_bytes(), &mut written)?;
            let json = serde_json::to_string_pretty(&audit).expect("audit serializes");
            write(&common.out, &format!("{stem}.json"), json.as_bytes(), &mut written)?;
            None
        }
        Command::Constants(_) => {
            let c = ex::constants(&spec).map_err(core)?;
            let json = serde_json::to_string_pretty(&c).expect("constants serialize");
            let mut csv = String::from("name,value\n");
            if let serde_json::Value::Object(map) = serde_json::to_value(&c).expect("constants serialize") {
                for (k, v) in map {
                    if let Some(x) = v.as_f64() {
                        csv.push_str(&format!("{k},{}\n", fmt17(x)));
                    }
                }
            }
            write(&common.out, &format!("{stem}.csv"), csv.as_bytes(), &mut written)?;
            write(&common.out, &format!("{stem}.json"), json.as_bytes(), &mut written)?;
            lines.push(json);
            None
        }
        Command::Sample(_) => {
            let c = ex::constants(&spec).map_err(core)?;
            let r = cfg.resolve(&spec);
            let eps = cfg.epsilon.unwrap_or(0.1);
            let times = match &cfg.record_times {
                Some(t) => t.clone(),
                None => vec![cfg.burn_in.unwrap_or_else(|| c.burn_in(eps))],
            };
            let t_end = *times.last().expect("validated nonempty");
            let mut sim = SimConfig::new(eps, r.dt, t_end, r.n_paths, r.seed).with_record_times(times);
            sim.x0 = cfg.x0.clone();
            sim.override_eps_star = r.override_eps_star;
            sim.acceptance = r.acceptance;
            sim.check_eps_star(c.eps_star).map_err(core)?;
            let snaps = simulate_ensemble(&spec, &sim).map_err(core)?;
            let mut csv = Vec::new();
            write_snapshots_csv(&snaps, &mut csv).map_err(|e| core(e.into()))?;
            write(&common.out, &format!("{stem}.csv"), &csv, &mut written)?;
            let summary: Vec<SnapshotSummary> = snaps
                .iter()
                .map(|s| {
                    let sq = s.samples.sq_norms();
                    SnapshotSummary {
                        time: s.time,
                        n: s.n(),
                        blown_up: s.blown_up,
                        mean_sq_norm: sq.iter().sum::<f64>() / sq.len().max(1) as f64,
                    }
                })
                .collect();
            for s in &summary {
                lines.push(format!(
                    "[INFO] sample t={}: n {}, blown up {}, mean |x|^2 {:.6e}",
                    s.time, s.n, s.blown_up, s.mean_sq_norm
                ));
            }
            let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
            write(&common.out, &format!("{stem}.json"), json.as_bytes(), &mut written)?;
            None
        }
        Command::ScalingLaw(_) => Some(ex::run_scaling_law(&spec, &cfg)),
        Command::Coupling(_) => Some(ex::run_coupling_contraction(&spec, &cfg)),
        Command::SecondMoment(_) => Some(ex::run_second_moment(&spec, &cfg)),
        Command::LinearizationGap(_) => Some(ex::run_linearization_gap(&spec, &cfg)),
        Command::OuMoments(_) => Some(ex::run_ou_moment_suite(&spec, &cfg)),
        Command::CovarianceDecay(_) => Some(ex::run_covariance_decay(&spec, &cfg)),
        Command::Concentration(_) => Some(ex::run_concentration(&spec, &cfg)),
        Command::Pwasserstein(_) => Some(ex::run_p_wasserstein(&spec, &cfg)),
        Command::OracleGibbs(_) => Some(ex::run_gibbs_crosscheck(&spec, &cfg)),
    }
    .transpose()
    .map_err(core)?;

    if let Some(rep) = &report {
        if rep.cells.is_empty() {
            return Err(CliError {
                code: EXIT_NUMERICAL,
                message: format!("{ctx}: runner produced no cells"),
            });
        }
        let csv_name = format!("{stem}.csv");
        write(&common.out, &csv_name, rep.to_csv_string().as_bytes(), &mut written)?;
        write(&common.out, &format!("{stem}.json"), rep.to_json().as_bytes(), &mut written)?;
        if common.plot {
            match kind_for(&rep.experiment) {
                Some(kind) => {
                    let script = emit_plot_script(rep, kind, &csv_name);
                    write(&common.out, &format!("{stem}.gp"), script.as_bytes(), &mut written)?;
                }
                None => log::warn!("no plot template for `{}`", cmd.name()),
            }
        }
        lines.extend(rep.summary_lines());
        let failed = rep.failures().count();
        all_pass = failed == 0;
        lines.push(format!(
            "{}: {} cells, {} failed: {}",
            cmd.name(),
            rep.cells.len(),
            failed,
            if all_pass { "PASS" } else { "FAIL" }
        ));
    }

    let manifest = RunManifest {
        command: cmd.name().to_string(),
        problem: spec.doc().clone(),
        resolved: cfg.resolve(&spec),
        seed: cfg.seed.unwrap_or(0),
        config: cfg,
        out_dir: common.out.display().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: written
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .chain(std::iter::once("manifest.json".to_string()))
            .collect(),
        wall_clock: WallClock {
            started_unix: started.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        },
    };
    write(&common.out, "manifest.json", manifest.to_json().as_bytes(), &mut written)?;
    Ok(Outcome {
        lines,
        outputs: written,
        all_pass,
    })
}
