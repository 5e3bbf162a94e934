use std::path::Path;
use std::process::{Command, Output};

fn relshap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relshap")).args(args).output().unwrap()
}

fn gen_example(dir: &Path, preset: &str) {
    let out = relshap(&["gen", "--preset", preset, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn input(dir: &Path) -> [String; 4] {
    [
        "--schema".into(),
        dir.join("schema.json").display().to_string(),
        "--query".into(),
        dir.join("query.json").display().to_string(),
    ]
}

fn run(cmd: &str, dir: &Path, extra: &[&str]) -> Output {
    let inp = input(dir);
    let mut args: Vec<&str> = vec![cmd];
    args.extend(inp.iter().map(String::as_str));
    args.extend(extra);
    relshap(&args)
}

#[test]
fn provenance_lists_the_lineage() {
    let dir = tempfile::tempdir().unwrap();
    gen_example(dir.path(), "example1");
    let out = run("provenance", dir.path(), &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("lineitem (4): lineitem#0 lineitem#1 lineitem#2 lineitem#3"), "{text}");
    assert!(text.contains("players: 6"));
}

#[test]
fn exact_methods_and_report_file() {
    let dir = tempfile::tempdir().unwrap();
    gen_example(dir.path(), "example1");
    let report = dir.path().join("exact.json");
    for (m, want) in [("subset", 2319.5 / 3.0), ("perm", 2319.5 / 3.0), ("banzhaf", 579.875)] {
        let out = run(
            "exact",
            dir.path(),
            &["--target", "orders#0", "--method", m, "--out", report.to_str().unwrap()],
        );
        assert!(out.status.success());
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
        assert!((v["value"].as_f64().unwrap() - want).abs() < 1e-9, "{m}");
    }
}

#[test]
fn estimate_is_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    gen_example(dir.path(), "example1");
    let mut values = Vec::new();
    for w in ["1", "3"] {
        let out_path = dir.path().join(format!("r{w}.json"));
        let out = run(
            "estimate",
            dir.path(),
            &[
                "--target", "10", "--method", "arss", "--budget", "3000", "--seed", "5",
                "--workers", w, "--cache-capacity", "1000", "--out", out_path.to_str().unwrap(),
            ],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
        assert_eq!(v["samples_used"], 3000);
        assert_eq!(v["allocations"].as_array().unwrap().len(), 5);
        values.push(v["value"].as_f64().unwrap());
    }
    assert_eq!(values[0].to_bits(), values[1].to_bits());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    gen_example(dir.path(), "example1");
    let cap = run("exact", dir.path(), &["--target", "orders#0", "--cap", "2"]);
    assert_eq!(cap.status.code(), Some(3));
    let bad = run("estimate", dir.path(), &["--target", "orders#0", "--method", "xyz", "--budget", "10"]);
    assert_eq!(bad.status.code(), Some(2));
    let zero = run("estimate", dir.path(), &["--target", "orders#0", "--method", "ss", "--budget", "0"]);
    assert_eq!(zero.status.code(), Some(2));
    let missing = relshap(&["provenance", "--schema", "/nope/schema.json", "--query", "/nope/q.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nope/schema.json"));
}

#[test]
fn generated_instance_and_bench_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = relshap(&[
        "gen", "--seed", "3", "--fact", "30", "--orders", "3", "--customers", "2", "--skew", "2",
        "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report = dir.path().join("bench.json");
    let out = relshap(&[
        "bench",
        "--schema", dir.path().join("schema.json").to_str().unwrap(),
        "--query", dir.path().join("query.json").to_str().unwrap(),
        "--targets", "orders#0",
        "--methods", "ss,arss",
        "--budgets", "100,400",
        "--reps", "3",
        "--out", report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(report.with_extension("csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 3);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["targets"][0]["cells"].as_array().unwrap().len(), 4);
}
