use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use epimit_cli::config::{Algorithm, Metric};
use epimit_cli::{parse_config, run_experiment, write_csv, Row};

const BASE: &str = r#"
schema_version = 1
id = "small"
seed = 11
budgets = [0, 3, 6]
algorithms = ["greedy-dsir", "greedy-ic-sigma", "max-degree", "random"]
metrics = ["dsir-sigma", "dsir-sigma-hat", "ic-estimate", "gsir-estimate"]

[network]
kind = "er"
n = 40
p = 0.1

[rates]
kind = "uniform"
b = [0.02, 0.05]
d = [0.3, 0.4]

[seeds]
kind = "count"
count = 3
x0 = [0.8, 0.9]

[initial]
r0 = [0.0, 0.05]

[estimator]
rounds = 4000

[replication]
gsir = 2000
"#;

fn run(text: &str) -> Vec<Row> {
    let cfg = parse_config(text).unwrap();
    run_experiment(&cfg, Path::new(".")).unwrap()
}

fn csv_of(rows: &[Row]) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(rows, &mut out).unwrap();
    out
}

fn value(rows: &[Row], alg: Algorithm, k: usize, metric: Metric) -> &Row {
    rows.iter()
        .find(|r| r.algorithm == alg && r.k == k && r.metric == metric)
        .unwrap()
}

#[test]
fn zero_budget_gives_identical_baselines() {
    let rows = run(&BASE.replace("budgets = [0, 3, 6]", "budgets = [0]"));
    let mut by_metric: HashMap<Metric, Vec<f64>> = HashMap::new();
    for r in &rows {
        by_metric.entry(r.metric).or_default().push(*r.value.as_ref().unwrap());
    }
    assert_eq!(by_metric.len(), 4);
    for values in by_metric.values() {
        assert_eq!(values.len(), 4);
        assert!(values.iter().all(|v| v == &values[0]), "{values:?}");
    }
}

#[test]
fn csv_is_byte_identical_across_runs_and_thread_counts() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = csv_of(&one.install(|| run(BASE)));
    let b = csv_of(&four.install(|| run(BASE)));
    let c = csv_of(&run(BASE));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("experiment_id,algorithm,k,metric,value,half_width,seed\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 3 * 4);
}

#[test]
fn cross_model_bounds_hold_row_wise() {
    let rows = run(BASE);
    for alg in [Algorithm::GreedyDsir, Algorithm::GreedyIcSigma, Algorithm::MaxDegree, Algorithm::Random] {
        for k in [0, 3, 6] {
            let hat = *value(&rows, alg, k, Metric::DsirSigmaHat).value.as_ref().unwrap();
            let sigma = *value(&rows, alg, k, Metric::DsirSigma).value.as_ref().unwrap();
            let g = value(&rows, alg, k, Metric::GsirEstimate);
            assert!(sigma <= hat + 1e-8, "{alg} k={k}: {sigma} > {hat}");
            assert!(g.value.as_ref().unwrap() <= &(hat + g.half_width.unwrap()), "{alg} k={k}");
        }
    }
}

#[test]
fn deterministic_metrics_carry_no_half_width_or_seed() {
    let rows = run(BASE);
    for r in &rows {
        assert_eq!(r.half_width.is_some(), r.metric.is_stochastic());
        assert_eq!(r.seed.is_some(), r.metric.is_stochastic());
    }
}

#[test]
fn greedy_ic_variants_agree_within_half_widths() {
    let text = BASE
        .replace(
            r#"algorithms = ["greedy-dsir", "greedy-ic-sigma", "max-degree", "random"]"#,
            r#"algorithms = ["greedy-ic-sigma", "greedy-ic-sigma-prime"]"#,
        )
        .replace(
            r#"metrics = ["dsir-sigma", "dsir-sigma-hat", "ic-estimate", "gsir-estimate"]"#,
            r#"metrics = ["ic-estimate"]"#,
        )
        .replace("rounds = 4000", "rounds = 20000\nd_end = 0.5");
    let rows = run(&text);
    for k in [0, 3, 6] {
        let a = value(&rows, Algorithm::GreedyIcSigma, k, Metric::IcEstimate);
        let b = value(&rows, Algorithm::GreedyIcSigmaPrime, k, Metric::IcEstimate);
        let gap = (a.value.as_ref().unwrap() - b.value.as_ref().unwrap()).abs();
        assert!(gap <= a.half_width.unwrap() + b.half_width.unwrap(), "k={k}: gap {gap}");
    }
}

#[test]
fn single_direction_deletions() {
    let text = BASE
        .replace(
            r#"algorithms = ["greedy-dsir", "greedy-ic-sigma", "max-degree", "random"]"#,
            r#"algorithms = ["greedy-dsir", "max-degree"]"#,
        )
        .replace(
            r#"metrics = ["dsir-sigma", "dsir-sigma-hat", "ic-estimate", "gsir-estimate"]"#,
            r#"metrics = ["dsir-sigma-hat"]"#,
        )
        + "\n[candidates]\ndirections = \"single\"\n";
    let single = run(&text);
    let both = run(&text.replace("directions = \"single\"", "directions = \"both\""));
    // three directed deletions can never beat three whole contacts
    let s = value(&single, Algorithm::GreedyDsir, 3, Metric::DsirSigmaHat).value.clone().unwrap();
    let b = value(&both, Algorithm::GreedyDsir, 3, Metric::DsirSigmaHat).value.clone().unwrap();
    assert!(b <= s + 1e-12, "{b} > {s}");
}

#[test]
fn network_dependent_problems_are_config_errors() {
    let cfg = parse_config(&BASE.replace("budgets = [0, 3, 6]", "budgets = [0, 100000]")).unwrap();
    let err = run_experiment(&cfg, Path::new(".")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("budgets"), "{err}");

    let cfg = parse_config(&BASE.replace("count = 3", "count = 41")).unwrap();
    assert_eq!(run_experiment(&cfg, Path::new(".")).unwrap_err().exit_code(), 2);
}

#[test]
fn edge_list_networks_with_probability_column() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("net.txt"), "# a path\n0 1 0.5\n1 2 0.5\n2 3 0.5\n1 0 0.9\n").unwrap();
    let text = r#"
schema_version = 1
id = "file"
seed = 3
budgets = [0, 1]
algorithms = ["greedy-ic-sigma", "max-degree"]
metrics = ["ic-estimate"]

[network]
kind = "edge-list"
path = "net.txt"

[rates]
kind = "file"

[seeds]
kind = "fixed"
vertices = [0]

[estimator]
rounds = 20000
"#;
    let cfg = parse_config(text).unwrap();
    let rows = run_experiment(&cfg, dir.path()).unwrap();
    // the duplicate pair is dropped, so seed 0 reaches 1, 2, 3 with 0.5, 0.25, 0.125
    let base = value(&rows, Algorithm::GreedyIcSigma, 0, Metric::IcEstimate);
    assert!((base.value.as_ref().unwrap() - 0.875).abs() <= base.half_width.unwrap());
    // cutting the seed's only edge stops everything
    let cut = value(&rows, Algorithm::GreedyIcSigma, 1, Metric::IcEstimate);
    assert_eq!(cut.value, Ok(0.0));
}

fn epimit(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_epimit")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes_and_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    fs::write(path("bad.toml"), BASE.replace("schema_version = 1", "schema_version = 9")).unwrap();
    let out = epimit(&["run", &path("bad.toml"), "--out", &path("x.csv")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema_version"));

    let out = epimit(&["gen", "er", "--n", "6", "--p", "1", "--out", &path("k6.txt")]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(path("k6.txt")).unwrap().lines().count(), 1 + 15);

    fs::write(
        path("prism.txt"),
        "0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n0 3\n1 4\n2 5\n",
    )
    .unwrap();
    let out = epimit(&["reduce-hardness", &path("prism.txt"), "--b", "3", "--side", "0,1,2"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("budget 12") && stdout.contains("threshold 6") && stdout.contains("reachable 6"));
    let out = epimit(&["reduce-hardness", &path("k6.txt"), "--b", "3"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(
        path("sys.toml"),
        "n = 2\nhealing = [0.5, 0.5]\nx0 = [0.8, 0.0]\nedges = [[0, 1, 0.1]]\n",
    )
    .unwrap();
    let out = epimit(&["check-stability", &path("sys.toml")]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("sigma_hat 0.16"), "{stdout}");

    fs::write(
        path("hot.toml"),
        "n = 2\nhealing = [0.1, 0.1]\nx0 = [0.5, 0.0]\nedges = [[0, 1, 0.5], [1, 0, 0.5]]\n",
    )
    .unwrap();
    let out = epimit(&["check-stability", &path("hot.toml")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("not certified"));

    let out = epimit(&["simulate", &path("sys.toml"), "--delete", "0", "--reps", "100"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    let number = |key: &str| -> f64 {
        let line = stdout.lines().find(|l| l.starts_with(&format!("{key} "))).unwrap();
        line.split_whitespace().nth(1).unwrap().parse().unwrap()
    };
    // the only edge is deleted
    assert!(number("dsir-sigma").abs() < 1e-12, "{stdout}");
    assert!(number("dsir-sigma-hat").abs() < 1e-12, "{stdout}");
    assert_eq!(number("gsir-estimate"), 0.0);
}
