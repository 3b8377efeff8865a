use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dcor-chisq"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "expected one line of output: {text}");
    serde_json::from_str(&text).unwrap()
}

/// Deterministic pseudo-noise in [−1, 1).
fn noise(i: usize, salt: f64) -> f64 {
    let v = ((i as f64 + salt) * 12.9898).sin() * 43758.5453;
    2.0 * (v - v.floor()) - 1.0
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture {
            dir: TempDir::new().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn column(&self, name: &str, header: Option<&str>, values: &[f64]) -> String {
        let mut text = String::new();
        if let Some(h) = header {
            text.push_str(h);
            text.push('\n');
        }
        for v in values {
            text.push_str(&format!("{v}\n"));
        }
        self.write(name, &text)
    }

    fn matrix(&self, name: &str, rows: &[Vec<f64>]) -> String {
        let text: String = rows
            .iter()
            .map(|r| r.iter().map(f64::to_string).collect::<Vec<_>>().join(",") + "\n")
            .collect();
        self.write(name, &text)
    }

    /// `Y = X + 0.3·noise` with `n = 80`.
    fn linear(&self) -> (String, String) {
        let x: Vec<f64> = (0..80).map(|i| noise(i, 0.0)).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| v + 0.3 * noise(i, 0.5)).collect();
        (self.column("x.csv", Some("x"), &x), self.column("y.csv", None, &y))
    }
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn chisq_detects_linear_dependence() {
    let f = Fixture::new();
    let (x, y) = f.linear();
    let v = json(&run(&["test", "--x", &x, "--y", &y, "--method", "chisq"]));
    assert_eq!(v["command"], "test");
    assert_eq!(v["method"], "chisq");
    assert_eq!(v["metric"], "euclidean");
    assert_eq!(v["n"], 80);
    assert!(v["pvalue"].as_f64().unwrap() < 0.05);
    assert_eq!(v["reject"], true);
}

#[test]
fn fast_path_matches_matrix_path() {
    let f = Fixture::new();
    let (x, y) = f.linear();
    let slow = json(&run(&["test", "--x", &x, "--y", &y]));
    let fast = json(&run(&["test", "--x", &x, "--y", &y, "--fast"]));
    let (a, b) = (slow["statistic"].as_f64().unwrap(), fast["statistic"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-12);
    assert_eq!(fast["fast"], true);
}

#[test]
fn permutation_output_is_byte_identical() {
    let f = Fixture::new();
    let (x, y) = f.linear();
    let args = ["test", "--x", &x, "--y", &y, "--method", "perm", "--reps", "100", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["reps"], 100);
    assert_eq!(v["seed"], 7);
}

#[test]
fn thread_count_does_not_change_results() {
    let f = Fixture::new();
    let (x, y) = f.linear();
    let base = ["test", "--x", &x, "--y", &y, "--method", "perm", "--reps", "300", "--seed", "3"];
    let one = run(&[&base[..], &["--threads", "1"]].concat());
    let four = run(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
    let p1 = run(&["power", "--scenario", "linear", "--n", "30", "--reps", "40", "--threads", "1"]);
    let p3 = run(&["power", "--scenario", "linear", "--n", "30", "--reps", "40", "--threads", "3"]);
    assert_eq!(p1.stdout, p3.stdout);
}

#[test]
fn ksample_reports_pvalue() {
    let f = Fixture::new();
    let a: Vec<Vec<f64>> = (0..40).map(|i| vec![noise(i, 1.0), noise(i, 2.0)]).collect();
    let b: Vec<Vec<f64>> = (0..30).map(|i| vec![noise(i, 3.0), noise(i, 4.0)]).collect();
    let (a, b) = (f.matrix("a.csv", &a), f.matrix("b.csv", &b));
    for method in ["chisq", "perm", "ttest"] {
        let v = json(&run(&["ksample", "--files", &a, &b, "--method", method]));
        let p = v["pvalue"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert_eq!(v["groups"], serde_json::json!([40, 30]));
    }
    let repeated = json(&run(&["ksample", "--files", &a, "--files", &b]));
    assert_eq!(repeated["n"], 70);
}

#[test]
fn ksample_detects_shift() {
    let f = Fixture::new();
    let a: Vec<f64> = (0..60).map(|i| noise(i, 1.0)).collect();
    let b: Vec<f64> = (0..60).map(|i| noise(i, 2.0) + 1.5).collect();
    let v = json(&run(&[
        "ksample",
        "--files",
        &f.column("a.csv", None, &a),
        &f.column("b.csv", None, &b),
    ]));
    assert!(v["pvalue"].as_f64().unwrap() < 0.01);
}

#[test]
fn partial_test_runs() {
    let f = Fixture::new();
    let (x, y) = f.linear();
    let z: Vec<f64> = (0..80).map(|i| noise(i, 9.0)).collect();
    let z = f.column("z.csv", None, &z);
    let v = json(&run(&["partial", "--x", &x, "--y", &y, "--z", &z]));
    assert_eq!(v["command"], "partial");
    assert!(v["pvalue"].as_f64().unwrap() < 0.05);
}

#[test]
fn header_row_is_optional() {
    let f = Fixture::new();
    let (x, y) = f.linear();
    let bare = f.write("bare.csv", &std::fs::read_to_string(&x).unwrap().replacen("x\n", "", 1));
    let with = json(&run(&["test", "--x", &x, "--y", &y]));
    let without = json(&run(&["test", "--x", &bare, "--y", &y]));
    assert_eq!(with["statistic"], without["statistic"]);
}

#[test]
fn gaussian_metric_and_bandwidth() {
    let f = Fixture::new();
    let (x, y) = f.linear();
    let v = json(&run(&["test", "--x", &x, "--y", &y, "--metric", "gaussian", "--bandwidth", "0.5"]));
    assert_eq!(v["metric"], "gaussian");
    assert_eq!(v["bandwidth"], 0.5);
}

#[test]
fn nullsim_csv_round_trips() {
    let f = Fixture::new();
    let out = f.path("null.csv");
    let args = [
        "nullsim",
        "--scenario",
        "linear",
        "--n",
        "40",
        "--reps",
        "5000",
        "--seed",
        "2",
        "--out",
        out.to_str().unwrap(),
    ];
    let first = run(&args);
    let v = json(&first);
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["prob", "simulated", "chisq", "normal"]);
    let quantiles = v["quantiles"].as_array().unwrap();
    assert_eq!(rows.len(), quantiles.len());
    for (row, q) in rows.iter().zip(quantiles) {
        for (cell, key) in row.iter().zip(["prob", "simulated", "chisq", "normal"]) {
            let parsed: f64 = cell.parse().unwrap();
            assert_eq!(parsed.to_bits(), q[key].as_f64().unwrap().to_bits(), "{key}");
        }
    }
    assert_eq!(run(&args).stdout, first.stdout);
}

#[test]
fn nullsim_from_files() {
    let f = Fixture::new();
    let x: Vec<f64> = (0..30).map(|i| if noise(i, 0.0) > 0.0 { 1.0 } else { 0.0 }).collect();
    let y: Vec<f64> = (0..30).map(|i| if noise(i, 5.0) > 0.0 { 1.0 } else { 0.0 }).collect();
    let v = json(&run(&[
        "nullsim",
        "--x",
        &f.column("bx.csv", None, &x),
        "--y",
        &f.column("by.csv", None, &y),
        "--reps",
        "20000",
    ]));
    assert_eq!(v["rank_x"], 1);
    assert_eq!(v["rank_y"], 1);
    assert!(v["ks_chisq"].as_f64().unwrap() < 0.02);
}

#[test]
fn power_table_matches_json() {
    let f = Fixture::new();
    let out = f.path("power.csv");
    let v = json(&run(&[
        "power",
        "--scenario",
        "quadratic",
        "--n",
        "40",
        "--reps",
        "50",
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["scenario", "n", "p", "method", "alpha", "reps", "power", "stderr"]);
    let results = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for (row, r) in rows.iter().zip(results) {
        assert_eq!(row[3], r["method"].as_str().unwrap());
        assert_eq!(row[6].parse::<f64>().unwrap(), r["power"].as_f64().unwrap());
    }
    let single = json(&run(&["power", "--scenario", "quadratic", "--n", "40", "--reps", "50", "--seed", "4", "--method", "chisq"]));
    assert_eq!(single["results"][0]["power"], results[0]["power"]);
}

#[test]
fn bench_reports_ladder() {
    let f = Fixture::new();
    let out = f.path("bench.csv");
    let v = json(&run(&["bench", "--n", "4096", "--reps", "1", "--out", out.to_str().unwrap()]));
    let rows = v["rows"].as_array().unwrap();
    let ns: Vec<u64> = rows.iter().map(|r| r["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, [1024, 2048, 4096]);
    assert_eq!(read_csv(&out).1.len(), 3);
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    let (x, y) = f.linear();
    let short = f.column("short.csv", None, &[1.0, 2.0, 3.0, 4.0, 5.0]);
    let text = f.write("text.csv", "a\n1\nfoo\n2\n");
    let ragged = f.write("ragged.csv", "1,2\n3\n4,5\n");
    let empty = f.write("empty.csv", "");
    let missing = f.path("missing.csv");
    let missing = missing.to_str().unwrap();

    assert_eq!(code(&run(&["test", "--x", missing, "--y", &y])), 3);
    assert_eq!(code(&run(&["test", "--x", &x, "--y", &short])), 4);
    assert_eq!(code(&run(&["test", "--x", &text, "--y", &y])), 4);
    assert_eq!(code(&run(&["test", "--x", &ragged, "--y", &y])), 4);
    assert_eq!(code(&run(&["test", "--x", &empty, "--y", &y])), 4);
    assert_eq!(code(&run(&["test", "--x", &x])), 2);
    assert_eq!(code(&run(&["test", "--x", &x, "--y", &y, "--method", "wilcoxon"])), 2);
    assert_eq!(code(&run(&["test", "--x", &x, "--y", &y, "--fast", "--metric", "gaussian"])), 2);
    assert_eq!(code(&run(&["test", "--x", &x, "--y", &y, "--bandwidth", "1"])), 2);
    assert_eq!(code(&run(&["test", "--x", &x, "--y", &y, "--threads", "0"])), 2);
    assert_eq!(code(&run(&["power", "--scenario", "circle"])), 2);
    assert_eq!(code(&run(&["power", "--scenario", "spiral", "--p", "3"])), 2);
    assert_eq!(code(&run(&["nullsim", "--reps", "10"])), 2);
    assert_eq!(code(&run(&["bogus"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);

    let constant = f.column("const.csv", None, &[1.0; 80]);
    assert_eq!(code(&run(&["nullsim", "--x", &constant, "--y", &y])), 4);
    let wide: Vec<Vec<f64>> = (0..80).map(|i| vec![noise(i, 1.0), noise(i, 2.0)]).collect();
    let wide = f.matrix("wide.csv", &wide);
    assert_eq!(code(&run(&["test", "--x", &wide, "--y", &y, "--fast"])), 4);
}

#[test]
fn errors_are_one_line_diagnostics() {
    let out = run(&["test", "--x", "/nonexistent/x.csv", "--y", "/nonexistent/y.csv"]);
    assert!(out.stdout.is_empty());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
}
