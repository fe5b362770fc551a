use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_density-lab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn sqrt_trace_ends_near_one_half() {
    let o = run(&["trace", "--f", "log1p", "--g", "identity", "--set", "sqrt", "--horizon", "1000000", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,count,f_count,f_g,ratio"));
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], "1000000");
    assert_eq!(last[1], "1000");
    let ratio: f64 = last[4].parse().unwrap();
    assert!((ratio - 0.5).abs() <= 0.02, "{ratio}");
}

#[test]
fn outputs_are_byte_identical() {
    for args in [
        &["trace", "--set", "pow2", "--g", "eeu3", "--horizon", "2^64", "--format", "json"][..],
        &["decompose", "--f", "log1p", "--g", "eeu", "--set", "sqrt", "--m-max", "6"],
        &["check", "--claim", "TD1", "--seed", "7"],
    ] {
        let (a, b) = (run(args), run(args));
        assert_eq!(a.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn smoke_suite_exits_zero() {
    let o = run(&["suite", "smoke"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "smoke");
    assert!(v["checks"].as_array().unwrap().len() >= 12);
    assert!(v["checks"][0].get("runtime").is_none());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["trace", "--set", "sqrt", "--horizon", "0"][..],
        &["trace", "--horizon", "0"],
        &["trace", "--set", "no-such-set", "--horizon", "10"],
        &["check", "--claim", "no-such-claim"],
        &["suite", "weekly"],
        &["trace", "--set", "sqrt", "--horizon", "100", "--schedule", "wobbly"],
        &["frobnicate"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failing_check_exits_one() {
    let o = run(&["check", "--claim", "ExE", "--params", r#"{"f": "identity"}"#]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "FAIL");
}

#[test]
fn weak_representation_exits_three() {
    let o = run(&["trace", "--set", "sqrt", "--horizon", "2^70000"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("representation too weak"));
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("trace.csv");
    std::fs::write(&cfg, r#"{"f": "log1p", "g": "eeu3", "set": "evens", "horizon": "10^5", "schedule": "powers_of_four"}"#).unwrap();
    let o = run(&["trace", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let ks: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, ["1", "4", "16", "64", "256", "1024", "4096", "16384", "65536", "100000"]);
}

#[test]
fn constructions_run() {
    let o = run(&["construct", "ts1", "--anchors", "6", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("m,k,ratio"));
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(1), Some("63"));
    let o = run(&["construct", "eeu4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["dominance"]["holds"], true);
    assert_eq!(v["verdict_C"]["verdict"], "LIKELY_OUT");
    assert_eq!(v["verdict_D"]["verdict"], "LIKELY_IN");
}
