mod common;

use common::{number, parse_csv_number, read_json, run_cli};
use hammerstein_cli::{parse_config, run_spectral, RunSpec};
use hammerstein_core::catalog::{self, ProblemParams, WeightChoice};

#[test]
fn analyze_linear_probe_has_no_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_cli(dir.path(), "analyze", "problem = linear_probe\n", &[]);
    assert_eq!(run.code, 2, "{}", run.stderr);
    let report = read_json(&run.out.join("report.json"));
    let cert = &report["analysis"]["certificate"];
    assert_eq!(cert["t1_holds"], false);
    assert_eq!(cert["t2_holds"], false);
    for key in ["f_sup_0", "f_inf_0", "f_sup_inf", "f_inf_inf"] {
        assert!((number(&cert["f_limits"][key]["value"]) - 1.0).abs() < 1e-12, "{key}");
    }
    assert!(run.out.join("report.txt").exists());
}

#[test]
fn solve_with_one_iteration_does_not_converge() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_cli(dir.path(), "solve", "problem = sine_exp\nmax_iter = 1\n", &[]);
    assert_eq!(run.code, 1, "{}", run.stderr);
    let report = read_json(&run.out.join("solve.json"));
    assert_eq!(report["converged"], false);
    assert_eq!(report["iterations"], 1);
}

#[test]
fn zero_start_collapses_to_the_trivial_solution() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_cli(dir.path(), "solve", "problem = sine_exp\ninitial_amplitude = 0\n", &[]);
    assert_eq!(run.code, 4, "{}", run.stderr);
    let report = read_json(&run.out.join("solve.json"));
    assert_eq!(report["trivial"], true);
    assert_eq!(report["restarted"], true);
    let log: Vec<String> = serde_json::from_value(report["log"].clone()).unwrap();
    assert!(log.iter().any(|l| l.contains("restarting")), "{log:?}");
}

#[test]
fn solution_csv_layout() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_cli(dir.path(), "solve", "problem = sine_exp\n", &["--nodes", "120"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = std::fs::read_to_string(run.out.join("solution.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,tau,u,u_tilde");
    assert_eq!(lines.len() - 1, 120 + 2);
    assert!(lines[1].starts_with("-inf,"));
    assert!(lines.last().unwrap().starts_with("inf,"));
    let ts: Vec<f64> = lines[1..].iter().map(|l| parse_csv_number(l.split(',').next().unwrap())).collect();
    assert!(ts.windows(2).all(|w| w[0] < w[1]));
    for line in &lines[2..lines.len() - 1] {
        let cols: Vec<f64> = line.split(',').map(parse_csv_number).collect();
        assert_eq!(cols.len(), 4);
        assert!(cols.iter().all(|c| c.is_finite()));
    }
    let report = read_json(&run.out.join("solve.json"));
    assert_eq!(report["nodes"], 120);
}

#[test]
fn zero_kernel_reports_infinite_characteristic_value() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_cli(dir.path(), "spectral", "problem = sine_exp\namplitude = 0\n", &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = read_json(&run.out.join("spectral.json"));
    assert_eq!(number(&report["spectral"]["l1"]["radius"]), 0.0);
    assert_eq!(report["spectral"]["l1"]["char_value"], "inf");
}

#[test]
fn spectral_ordering_passes_for_sine_exp() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_cli(dir.path(), "spectral", "problem = sine_exp\n", &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = read_json(&run.out.join("spectral.json"));
    assert_eq!(report["ordering"]["passed"], true);
    let r = number(&report["spectral"]["l1"]["radius"]);
    assert!((r - catalog::r_l1_closed_form()).abs() < 1e-3 * r);
    assert!(report["spectral"]["doubling"]["relative_delta_l1"].as_f64().unwrap() < 1e-3);
}

#[test]
fn bad_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_cli(dir.path(), "analyze", "problme = sine_exp\n", &[]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("problme"), "{}", run.stderr);
    let run = run_cli(dir.path(), "spectral", "problem = nowhere\n", &[]);
    assert_eq!(run.code, 1);
    let run = run_cli(dir.path(), "solve", "problem = sine_exp\n", &["--nodes", "3"]);
    assert_eq!(run.code, 1);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_cli(dir.path(), "spectral", "problem = sine_exp\nseed = 1\n", &["--seed", "9", "--nodes", "64"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report = read_json(&run.out.join("spectral.json"));
    assert_eq!(report["run"]["seed"], 9);
    assert_eq!(report["run"]["n_nodes"], 64);
}

#[test]
fn catalog_entries_round_trip_through_config() {
    let mut tuned = ProblemParams::new("sine_exp");
    tuned.weight = Some(WeightChoice::AbsT);
    tuned.window = Some((0.9, 2.0));
    tuned.amplitude = Some(1.5);
    for params in [
        ProblemParams::new("sine_exp"),
        ProblemParams::new("rocket"),
        ProblemParams::new("linear_probe"),
        tuned,
    ] {
        let entry = catalog::build(&params).unwrap();
        let text = entry.params.to_config();
        let spec = parse_config(&text).unwrap();
        assert_eq!(spec.problem, entry.params);

        let mut direct = RunSpec::new(entry.params.clone());
        direct.n_nodes = 64;
        let mut parsed = spec;
        parsed.n_nodes = 64;
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_spectral(&direct, a.path()).unwrap();
        run_spectral(&parsed, b.path()).unwrap();
        assert_eq!(
            std::fs::read(a.path().join("spectral.json")).unwrap(),
            std::fs::read(b.path().join("spectral.json")).unwrap()
        );
    }
}
