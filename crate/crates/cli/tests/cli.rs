mod common;

use std::fs;

use common::{configs, problem, report, run_cli, run_experiment};
use langevin_gauss_cli::RunManifest;

/// Bad config file and the key its error message must name.
const BAD: &[(&str, &str)] = &[
    ("unknown_key", "epsilon_grid"),
    ("epsilons_zero", "epsilons"),
    ("epsilons_above_one", "epsilons"),
    ("epsilons_empty", "epsilons"),
    ("epsilon_negative", "epsilon"),
    ("dt_negative", "dt"),
    ("dt_string", "dt"),
    ("n_paths_one", "n_paths"),
    ("n_paths_negative", "n_paths"),
    ("burn_in_zero", "burn_in"),
    ("record_times_decreasing", "record_times"),
    ("pairs_length_mismatch", "pairs[0]"),
    ("pairs_empty", "pairs"),
    ("pairs_extra_field", "pairs"),
    ("x0_empty", "x0"),
    ("times_negative", "times"),
    ("lambdas_one", "lambdas"),
    ("n_samples_one", "n_samples"),
    ("beta_half", "beta"),
    ("p_three", "p"),
    ("p_list_half", "p_list"),
    ("replicates_small", "replicates"),
    ("gibbs_intervals_odd", "gibbs_intervals"),
    ("radius_zero", "radius"),
    ("seed_negative", "seed"),
    ("override_string", "override_eps_star"),
    ("min_slope_string", "min_slope"),
    ("not_json", "config"),
];

#[test]
fn bad_config_corpus_exits_two_naming_the_key() {
    let on_disk = fs::read_dir(configs().join("bad")).unwrap().count();
    assert_eq!(on_disk, BAD.len(), "every corpus file has an expectation");
    assert!(BAD.len() >= 20);
    let out = tempfile::tempdir().unwrap();
    for (file, key) in BAD {
        let path = configs().join("bad").join(format!("{file}.json"));
        let r = run_experiment("scaling-law", "quartic1d", &path, 1, out.path());
        assert_eq!(r.code, 2, "{file}: {}", r.stderr);
        assert!(r.stderr.contains(&format!("`{key}`")), "{file}: message does not name `{key}`: {}", r.stderr);
    }
    assert!(fs::read_dir(out.path()).unwrap().next().is_none(), "no outputs on config errors");
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let r = run_cli(&["frobnicate"], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("Usage"), "{}", r.stderr);
}

#[test]
fn help_exits_zero() {
    let r = run_cli(&["--help"], None);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("scaling-law"));
}

#[test]
fn missing_problem_is_usage_error() {
    let r = run_cli(&["constants"], None);
    assert_eq!(r.code, 2);
}

#[test]
fn unreadable_problem_names_the_file() {
    let r = run_cli(&["constants", "--problem", "/nonexistent/p.json"], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("/nonexistent/p.json"));
}

#[test]
fn bad_problem_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    fs::write(&p, r#"{"d": 1, "field": {"builtin": "quartic1d"}, "constants": {"detla": 1.0}}"#).unwrap();
    let r = run_cli(&["constants", "--problem", p.to_str().unwrap(), "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("detla"), "{}", r.stderr);
}

#[test]
fn constants_of_linear1d() {
    let out = tempfile::tempdir().unwrap();
    let r = run_cli(
        &["constants", "--problem", problem("linear1d").to_str().unwrap(), "--out", out.path().to_str().unwrap()],
        None,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.path().join("constants.json")).unwrap()).unwrap();
    assert_eq!(v["C0"].as_f64(), Some(1.0));
    assert_eq!(v["C_star"].as_f64(), Some(1.0));
    assert!(out.path().join("manifest.json").exists());
    assert!(out.path().join("constants.csv").exists());
}

#[test]
fn fast_scaling_law_writes_reports_and_plot() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().to_str().unwrap();
    let fast = configs().join("fast.json");
    let r = run_cli(
        &[
            "scaling-law",
            "--problem",
            problem("quartic1d").to_str().unwrap(),
            "--config",
            fast.to_str().unwrap(),
            "--seed",
            "7",
            "--out",
            dir,
            "--plot",
        ],
        None,
    );
    assert!(r.code == 0 || r.code == 1, "{}", r.stderr);
    let rep = report(out.path(), "scaling_law");
    assert_eq!(rep.find("w2").count(), 2);
    assert_eq!(r.code == 0, rep.all_pass());
    // one summary line per cell plus the total
    assert_eq!(r.stdout.lines().count(), rep.cells.len() + 1);
    let gp = fs::read_to_string(out.path().join("scaling_law.gp")).unwrap();
    assert!(gp.contains("set logscale xy") && gp.contains("'scaling_law.csv'"));
    let csv = fs::read_to_string(out.path().join("scaling_law.csv")).unwrap();
    assert!(csv.starts_with("cell,quantity,epsilon,observed,bound,tolerance,se,relation,verdict\n"));
}

#[test]
fn verdict_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"epsilons": [0.4, 0.1], "dt": 0.002, "n_paths": 200, "burn_in": 4.0, "beta": -2.0}"#).unwrap();
    // beta = -2 demands a trend slope of -2.45, far steeper than the law allows
    let r = run_experiment("concentration", "quartic1d", &cfg, 3, dir.path());
    assert_eq!(r.code, 1, "{}", r.stderr);
    assert!(r.stdout.contains("[FAIL]"));
}

#[test]
fn blow_up_is_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"epsilon": 1.0, "dt": 0.9, "burn_in": 50.0, "n_paths": 20, "x0": [5.0], "acceptance": true}"#).unwrap();
    let r = run_cli(
        &[
            "sample",
            "--problem",
            problem("quartic1d").to_str().unwrap(),
            "--config",
            cfg.to_str().unwrap(),
            "--override-eps-star",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(r.code, 3, "{}{}", r.stdout, r.stderr);
}

#[test]
fn eps_star_violation_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"epsilons": [0.3], "n_paths": 50, "burn_in": 1.0}"#).unwrap();
    let r = run_experiment("scaling-law", "rotational2d", &cfg, 1, dir.path());
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("eps_star"));
}

#[test]
fn manifest_rerun_reproduces_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let r = run_experiment("second-moment", "quartic1d", &configs().join("fast.json"), 5, a.path());
    assert!(r.code <= 1, "{}", r.stderr);
    let man = a.path().join("manifest.json");
    let r2 = run_cli(
        &["second-moment", "--manifest", man.to_str().unwrap(), "--out", b.path().to_str().unwrap(), "--threads", "2"],
        None,
    );
    assert_eq!(r.code, r2.code, "{}", r2.stderr);
    let csv = |d: &std::path::Path| fs::read(d.join("second_moment.csv")).unwrap();
    assert_eq!(csv(a.path()), csv(b.path()));
    let m1 = RunManifest::from_json(&fs::read_to_string(man).unwrap()).unwrap();
    let m2 = RunManifest::from_json(&fs::read_to_string(b.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m1.config, m2.config);
    assert_eq!(m1.problem, m2.problem);
    assert_eq!(m1.seed, 5);
}

#[test]
fn manifest_for_other_command_is_rejected() {
    let a = tempfile::tempdir().unwrap();
    let r = run_cli(
        &["constants", "--problem", problem("linear1d").to_str().unwrap(), "--out", a.path().to_str().unwrap()],
        None,
    );
    assert_eq!(r.code, 0);
    let man = a.path().join("manifest.json");
    let r = run_cli(&["coupling", "--manifest", man.to_str().unwrap(), "--out", a.path().to_str().unwrap()], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("`command`"), "{}", r.stderr);
}

#[test]
fn audit_and_sample_run() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().to_str().unwrap();
    let p = problem("coupled2d_expr");
    let r = run_cli(&["audit", "--problem", p.to_str().unwrap(), "--out", dir], None);
    assert!(r.code <= 1, "{}", r.stderr);
    assert!(out.path().join("audit.json").exists());
    assert!(r.stdout.lines().count() >= 4);

    let cfg = out.path().join("s.json");
    fs::write(&cfg, r#"{"epsilon": 0.02, "n_paths": 30, "record_times": [0.5, 1.0]}"#).unwrap();
    let r = run_cli(
        &["sample", "--problem", p.to_str().unwrap(), "--config", cfg.to_str().unwrap(), "--out", dir],
        None,
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = fs::read_to_string(out.path().join("sample.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 30);
}

#[test]
fn zero_threads_rejected() {
    let r = run_cli(&["constants", "--problem", problem("linear1d").to_str().unwrap(), "--threads", "0"], None);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("--threads"));
}
