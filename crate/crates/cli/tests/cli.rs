use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fluxgraph::ingest::{parse_edgelist_str, read_edgelist};

fn fluxgraph(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluxgraph"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn fluxgraph")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = fluxgraph(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: [&str; 6] = ["--snapshots", "10", "--s", "3", "--s0", "5"];

fn synth(dir: &Path, seed: &str, out: &str) {
    let mut args = vec!["synth", "--seed", seed, "--out", out];
    args.extend(SMALL);
    ok(dir, &args);
}

#[test]
fn synth_writes_a_parseable_edge_list_and_metadata() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "1", "pa.txt");
    let parsed = read_edgelist(tmp.path().join("pa.txt")).unwrap();
    assert_eq!(parsed.malformed, 0);
    assert_eq!(parsed.events.iter().map(|e| e.t).max(), Some(10));

    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("pa.txt.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "synth");
    assert_eq!(meta["seed"], 1);
    assert!(meta["rng"].as_str().unwrap().contains("ChaCha8"));
}

#[test]
fn seeds_change_the_output() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "1", "a.txt");
    synth(tmp.path(), "2", "b.txt");
    synth(tmp.path(), "1", "c.txt");
    let read = |f: &str| fs::read(tmp.path().join(f)).unwrap();
    assert_ne!(read("a.txt"), read("b.txt"));
    assert_eq!(read("a.txt"), read("c.txt"));
}

#[test]
fn predict_dumps_one_graph_per_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "4", "pa.txt");
    ok(tmp.path(), &["predict", "--input", "pa.txt", "--horizons", "1..2", "--out", "pred"]);
    for h in 1..=2 {
        let text = fs::read_to_string(tmp.path().join(format!("pred/prediction_h{h}.txt"))).unwrap();
        let declared: usize = text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# vertex_count="))
            .unwrap()
            .parse()
            .unwrap();
        let parsed = parse_edgelist_str(&text).unwrap();
        assert!(parsed.events.iter().all(|e| e.t == 10 + h));
        assert!(declared >= parsed.events.iter().map(|e| e.v.0.max(e.u.0) as usize + 1).max().unwrap());
    }
    assert!(tmp.path().join("pred/metadata.json").exists());
}

#[test]
fn config_file_values_apply_and_flags_override_them() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "4", "pa.txt");
    fs::write(tmp.path().join("run.conf"), "gammas = 0.5\nus = 0.7\nhorizons = 2\n").unwrap();
    ok(tmp.path(), &["sweep", "--input", "pa.txt", "--config", "run.conf", "--out", "a.csv"]);
    let a = fs::read_to_string(tmp.path().join("a.csv")).unwrap();
    assert_eq!(a.lines().count(), 2);
    assert!(a.lines().nth(1).unwrap().starts_with("2,0.5,0.7,"));

    ok(
        tmp.path(),
        &["sweep", "--input", "pa.txt", "--config", "run.conf", "--us", "0.6,0.9", "--out", "b.csv"],
    );
    let b = fs::read_to_string(tmp.path().join("b.csv")).unwrap();
    assert_eq!(b.lines().count(), 3);
}

#[test]
fn eval_synth_csv_has_two_rows_per_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    ok(
        tmp.path(),
        &["eval-synth", "--runs", "1", "--train", "10", "--horizons", "1,2", "--seed", "3", "--out", "r.csv"],
    );
    let csv = fs::read_to_string(tmp.path().join("r.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("pa,1,1,last_seen,"));
    assert!(rows[2].starts_with("pa,1,1,proposed,"));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "4", "pa.txt");
    let cases: [&[&str]; 4] = [
        &["predict", "--input", "missing.txt", "--out", "p"],
        &["predict", "--input", "pa.txt", "--gamma", "1.5", "--out", "p"],
        &["eval-synth", "--experiment", "3", "--out", "x.csv"],
        &["eval-real", "--input", "pa.txt", "--granularity", "hourly", "--out", "x.csv"],
    ];
    for args in cases {
        let out = fluxgraph(tmp.path(), args);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty());
    }
}
