use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercomm")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn threshold_prints_divergences() {
    let o = run(&["threshold", "--layers", "4:128:72"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("d_gh   1.000000"), "{text}");
    assert!(text.contains("d_sdp  0.80"), "{text}");

    let o = run(&["threshold", "--layers", "2:4:1", "--layers", "3:130:98", "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let gh = v["d_gh"].as_f64().unwrap();
    assert!((gh - 1.064196).abs() < 1e-6, "{gh}");
    assert!(v["d_sdp"].as_f64().unwrap() <= gh);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["threshold", "--layers", "4:128"]).status.code(), Some(2));
    assert_eq!(run(&["threshold", "--layers", "1:2:1"]).status.code(), Some(2));
    assert_eq!(run(&["threshold"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.json");
    let o = run(&["sample", "--n", "99", "--layers", "2:4:1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["detect", "--algo", "spectral", "--in", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_input_exits_one() {
    let o = run(&["detect", "--algo", "adjacency", "--in", "/nonexistent/h.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sample_is_deterministic_and_detectable() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.json");
    let p2 = dir.path().join("b.json");
    for p in [&p1, &p2] {
        let o = run(&["sample", "--n", "60", "--layers", "2:30:1", "--layers", "3:40:4", "--seed", "9", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());

    for algo in ["adjacency", "laplacian", "sdp"] {
        let o = run(&["detect", "--algo", algo, "--in", p1.to_str().unwrap(), "--json"]);
        assert!(o.status.success(), "{algo}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["exact"], true, "{algo}");
    }
}

#[test]
fn detect_with_separate_truth() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    fs::write(&h, r#"{"n": 4, "layers": [{"m": 2, "edges": [[0, 1], [2, 3]]}]}"#).unwrap();
    let truth = dir.path().join("t.json");
    fs::write(&truth, "[1, 1, -1, -1]").unwrap();
    let o = run(&["detect", "--algo", "adjacency", "--in", h.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("exact      true"));
    fs::write(&truth, "[1, 1, 1, -1]").unwrap();
    let o = run(&["detect", "--algo", "adjacency", "--in", h.to_str().unwrap(), "--truth", truth.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn experiment_output_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"kind": "phase-grid", "base": {"n": 40, "layers": {"3": {"a": 30, "b": 5}}},
            "a_values": [10, 30], "b_values": [2, 5], "trials": 3,
            "algorithms": ["adjacency", "laplacian"], "master_seed": 4}"#,
    )
    .unwrap();
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("out{threads}"));
        let o = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("summary.json").exists());
        csvs.push(fs::read_to_string(out.join("results.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0].lines().count(), 1 + 4 * 3 * 2);

    fs::write(&cfg, r#"{"kind": "phase-grid", "base": {"n": 40, "layers": {"3": {"a": 30, "b": 5}}}, "trials": 3, "algorithms": [], "master_seed": 4}"#).unwrap();
    let o = run(&["experiment", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
