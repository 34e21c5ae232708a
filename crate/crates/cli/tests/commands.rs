use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_privmeasure")).args(args).output().unwrap()
}

fn write_points(path: &Path, n: usize) {
    let text: String = (0..n)
        .map(|i| format!("{},{}\n", (i % 10) as f64 / 10.0, (i * 7 % 13) as f64 / 13.0))
        .collect();
    fs::write(path, text).unwrap();
}

fn provenance(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synth_is_deterministic_and_records_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("points.csv");
    write_points(&input, 100);
    let out = dir.path().join("synth.csv");
    let meta = dir.path().join("synth.json");
    let args = [
        "synth",
        "--input",
        input.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--epsilon",
        "1",
        "--seed",
        "42",
    ];
    let first = run(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let (csv1, json1) = (fs::read(&out).unwrap(), fs::read(&meta).unwrap());
    assert!(run(&args).status.success());
    assert_eq!(fs::read(&out).unwrap(), csv1);
    assert_eq!(fs::read(&meta).unwrap(), json1);

    let p = provenance(&meta);
    assert_eq!(p["schema_version"], 1);
    assert_eq!(p["seed"], 42);
    assert_eq!(p["provenance"]["alpha"], 100.0);
    assert_eq!(p["provenance"]["n"], 100);
    assert!(p["provenance"]["tour_length"].as_f64().unwrap() > 0.0);
    let m = p["provenance"]["m"].as_u64().unwrap() as usize;
    let rows = String::from_utf8(csv1).unwrap();
    assert_eq!(rows.lines().count(), m);
    assert!(rows.lines().all(|l| l.split(',').count() == 2));
}

#[test]
fn different_seeds_differ() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("points.csv");
    write_points(&input, 200);
    let mut outputs = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(format!("out{seed}.csv"));
        let o = run(&["synth", "-i", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--seed", seed]);
        assert!(o.status.success());
        outputs.push(fs::read(out).unwrap());
    }
    assert_ne!(outputs[0], outputs[1]);
}

#[test]
fn synth_on_distance_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    fs::write(&input, "0,1,2\n1,0,1\n2,1,0\n").unwrap();
    let out = dir.path().join("out.csv");
    let o = run(&[
        "synth",
        "-i",
        input.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--distance-matrix",
        "--epsilon",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = provenance(&dir.path().join("out.json"));
    assert_eq!(p["domain"]["kind"], "generic");
    let m = p["provenance"]["m"].as_u64().unwrap() as usize;
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), m);
}

#[test]
fn privatize_writes_a_probability_measure() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mu.csv");
    fs::write(&input, "0.1,0.5\n0.4,0.25\n0.9,0.25\n").unwrap();
    let out = dir.path().join("nu.csv");
    let o = run(&["privatize", "-i", input.to_str().unwrap(), "-o", out.to_str().unwrap(), "--alpha", "64"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let total: f64 = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
    let p = provenance(&dir.path().join("nu.json"));
    assert_eq!(p["diagnostics"]["net_size"], 64);
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "0.1,0.2\n0.3,1.4\n").unwrap();
    let out = dir.path().join("out.csv");
    let o = run(&["synth", "-i", bad.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 2"));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = run(&["synth", "-i", empty.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let good = dir.path().join("good.csv");
    write_points(&good, 10);
    let o = run(&["synth", "-i", good.to_str().unwrap(), "-o", out.to_str().unwrap(), "--epsilon", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(run(&["bench-walk", "--grid", "9:3"]).status.code(), Some(2));
    assert_eq!(run(&["bench-accuracy", "--trials"]).status.code(), Some(2));
}

#[test]
fn missing_input_is_an_io_error() {
    let o = run(&["synth", "-i", "/nonexistent/in.csv", "-o", "/nonexistent/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/in.csv"));
}

#[test]
fn audit_passes_and_catches_a_faulty_potential() {
    let o = run(&["audit-regularity", "--grid", "1:6", "--pairs", "200"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("PASS"));
    let o = run(&["audit-regularity", "--grid", "1:6", "--pairs", "200", "--fault-scale", "3"]);
    assert_eq!(o.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("FAIL"));
    assert!(stdout.contains("\"x\""), "{stdout}");
}

#[test]
fn benchmarks_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("acc.csv");
    let json = dir.path().join("acc.json");
    let o = run(&[
        "bench-accuracy",
        "--grid",
        "3:6",
        "--trials",
        "5",
        "--output",
        csv.to_str().unwrap(),
        "--report",
        json.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("param,mean,std,std_err,bound,reference"));
    assert_eq!(text.lines().count(), 5);
    assert!(provenance(&json)["report"]["slope"].is_number());

    let walk = dir.path().join("walk.csv");
    let o = run(&["bench-walk", "--grid", "4:7", "--trials", "20", "--output", walk.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&walk).unwrap().lines().count(), 5);
}
