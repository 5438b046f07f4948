use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clrbte"))
        .args(args)
        .current_dir(root())
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn numbers(o: &Output) -> Vec<f64> {
    stdout(o).lines().map(|l| l.parse().unwrap()).collect()
}

#[test]
fn describe_reports_moments() {
    let o = run(&["describe", "--lambda", "0.5", "--p1", "0.5", "--p2", "0.5"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["command"], "clrbte describe --lambda 0.5 --p1 0.5 --p2 0.5");
    assert_eq!(v["timestamp"], "2023-11-14T22:13:20Z");
    let mean = v["payload"]["moments"]["mean"].as_f64().unwrap();
    assert!((mean - 1.3550).abs() < 2e-3);

    let exp = json(&run(&["describe", "--lambda", "1", "--p1", "1", "--p2", "0"]));
    let m = &exp["payload"]["moments"];
    for (key, want) in [("mean", 1.0), ("variance", 1.0), ("skewness", 2.0), ("kurtosis", 9.0)] {
        assert!((m[key].as_f64().unwrap() - want).abs() < 1e-8, "{key}");
    }
}

#[test]
fn describe_names_violated_constraint() {
    let o = run(&["describe", "--lambda", "1", "--p1", "0.7", "--p2", "0.7"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("p1 + p2 ≤ 1 violated"));
    let relaxed = run(&["describe", "--lambda", "1", "--p1", "0.7", "--p2", "0.7", "--relaxed"]);
    assert_eq!(code(&relaxed), 0);
}

#[test]
fn json_output_is_stable_and_round_trips() {
    let args = ["describe", "--lambda", "2", "--p1", "0.2", "--p2", "0.4"];
    let a = run(&args);
    assert_eq!(a.stdout, run(&args).stdout);
    let text = stdout(&a);
    let v: Value = serde_json::from_str(&text).unwrap();
    let sd = v["payload"]["moments"]["sd"].as_f64().unwrap();
    assert!(text.contains(&clrbte::format::g17(sd)));
}

#[test]
fn sample_is_deterministic() {
    let args = ["sample", "--n", "5", "--lambda", "1", "--p1", "0.5", "--p2", "0.3", "--seed", "42"];
    let a = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, run(&args).stdout);
    assert_eq!(numbers(&a).len(), 5);
}

#[test]
fn exponential_sample_mean() {
    let o = run(&["sample", "--p1", "1", "--p2", "0", "--lambda", "2", "--n", "100000", "--seed", "7"]);
    let v = numbers(&o);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    assert!((mean - 0.5).abs() < 0.02, "{mean}");
}

#[test]
fn ar_and_composition_agree() {
    let base = ["sample", "--n", "10000", "--lambda", "0.6", "--p1", "0.3", "--p2", "0.2", "--seed", "5"];
    let comp = numbers(&run(&base));
    let mut ar_args = base.to_vec();
    ar_args.extend(["--method", "ar"]);
    let o = run(&ar_args);
    assert_eq!(code(&o), 0);
    let mut ar = numbers(&o);
    let mut comp = comp;
    ar.sort_by(f64::total_cmp);
    comp.sort_by(f64::total_cmp);
    let (_, p) = clrbte::gof::ks_two_sample(&ar, &comp);
    assert!(p > 0.01, "{p}");
}

#[test]
fn sample_rejects_bad_params() {
    let o = run(&["sample", "--n", "5", "--lambda", "-1", "--p1", "0.5", "--p2", "0.3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fit_survival_clrbte() {
    let o = run(&["fit", "--data", "data/survival.txt", "--dist", "clrbte", "--estimator", "mle"]);
    assert_eq!(code(&o), 0);
    let f = &json(&o)["payload"]["fit"];
    let est: Vec<f64> = f["estimates"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (got, want) in est.iter().zip([0.0174, 0.6369, 0.0878]) {
        assert!((got - want).abs() <= 0.002, "{est:?}");
    }
    assert!((f["aic"].as_f64().unwrap() - 312.4142).abs() < 0.05);
}

#[test]
fn fit_failure_exponential() {
    let o = run(&["fit", "--data", "data/failure.txt", "--dist", "e", "--estimator", "mle"]);
    assert_eq!(code(&o), 0);
    let lambda = json(&o)["payload"]["fit"]["estimates"][0].as_f64().unwrap();
    assert!((lambda - 0.4413).abs() < 0.001);
}

#[test]
fn fit_msade_converges() {
    let o = run(&["fit", "--estimator", "msade", "--data", "data/failure.txt", "--dist", "clrbte"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["payload"]["fit"]["diagnostics"]["converged"], true);
}

#[test]
fn fit_with_bootstrap() {
    let args = ["fit", "--data", "data/failure.txt", "--dist", "e", "--bootstrap-p", "40", "--seed", "3"];
    let o = run(&args);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["seed"], 3);
    let b = &v["payload"]["bootstrap"];
    assert_eq!(b["replications"], 40);
    let p = b["p_ks"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
    assert_eq!(o.stdout, run(&args).stdout);
}

#[test]
fn fit_reports_file_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "1.5\n2.5\n-4\n").unwrap();
    let o = run(&["fit", "--data", bad.to_str().unwrap(), "--dist", "e"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains(":3:"));
    let missing = run(&["fit", "--data", "no/such/file.txt", "--dist", "e"]);
    assert_eq!(code(&missing), 2);
    let unsupported = run(&["fit", "--data", "data/failure.txt", "--dist", "te", "--estimator", "lse"]);
    assert_eq!(code(&unsupported), 2);
}

#[test]
fn compare_survival() {
    let o = run(&["compare", "--data", "data/survival.txt", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let t = &json(&o)["payload"]["table"];
    for key in ["min_ks", "min_ad", "min_cvm"] {
        assert_eq!(t[key], "CLRBTE");
    }
    let text = stdout(&run(&["compare", "--data", "data/survival.txt"]));
    assert!(text.starts_with("Distribution"));
    assert!(text.contains("CLRBTE*"));
}

#[test]
fn compare_failure() {
    let o = run(&["compare", "--data", "data/failure.txt", "--format", "json"]);
    let t = &json(&o)["payload"]["table"];
    assert_eq!(t["min_aic"], "TGR");
    assert_eq!(t["min_ks"], "CLRBTE");
    let tgr = t["rows"].as_array().unwrap().iter().find(|r| r["distribution"] == "TGR").unwrap();
    assert!((tgr["aic"].as_f64().unwrap() - 73.6468).abs() < 0.05);
}

#[test]
fn compare_needs_two_models() {
    let o = run(&["compare", "--data", "data/failure.txt", "--dists", "clrbte"]);
    assert_eq!(code(&o), 2);
}

fn small_config(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("small.cfg");
    std::fs::write(
        &path,
        "truth = 1.5, 0.5, 0.3\nsizes = 30, 60\nestimators = mle, msade, tade\nreps = 6\nseed = 9\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let one = run(&["simulate", "--config", &cfg, "--parallel", "1"]);
    let eight = run(&["simulate", "--config", &cfg, "--parallel", "8"]);
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, eight.stdout);
    let csv = stdout(&one);
    assert!(csv.starts_with("estimator,n,parameter,bias,mse,mre,mc_se_bias,convergence_rate\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 3);
}

#[test]
fn simulate_single_replication_flags_degenerate_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let o = run(&["simulate", "--config", &cfg, "--reps", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let cells = json(&o)["payload"]["report"]["cells"].as_array().unwrap().clone();
    assert!(cells.iter().all(|c| c["degenerate"] == true));
}

#[test]
fn simulate_text_with_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(&dir);
    let o = run(&["simulate", "--config", &cfg, "--format", "text", "--rank"]);
    let text = stdout(&o);
    assert!(text.contains("TADE") && text.contains("MSE ranking"));
}

#[test]
fn shipped_scenarios_parse() {
    for i in 1..=4 {
        let text = std::fs::read_to_string(root().join(format!("scenarios/scenario{i}.cfg"))).unwrap();
        let sc = clrbte::sim::SimScenario::parse(&text).unwrap();
        assert_eq!(sc.sizes, vec![50, 100, 200, 500, 1000]);
        assert_eq!(sc.estimators.len(), 9);
    }
}

#[test]
fn plotdata_grid() {
    let o = run(&["plotdata", "--data", "data/failure.txt", "--dist", "clrbte"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,empirical_cdf,fitted_cdf,fitted_pdf");
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 400);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[399][0], 13.6866 * 1.05);
    assert!(rows.windows(2).all(|w| w[1][2] >= w[0][2]));
    assert_eq!(rows[399][1], 1.0);
    for r in rows.iter().filter(|r| r[0] >= 13.6866) {
        assert_eq!(r[1], 1.0);
    }

    let fixed = run(&["plotdata", "--data", "data/failure.txt", "--dist", "te", "--params", "0.3,-0.2"]);
    assert_eq!(code(&fixed), 0);
    let bad = run(&["plotdata", "--data", "data/failure.txt", "--dist", "te", "--params", "0.3"]);
    assert_eq!(code(&bad), 2);
}
