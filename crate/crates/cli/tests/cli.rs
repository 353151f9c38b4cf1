use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn tsplab(args: &[&str], dir: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_tsplab"))
        .args(args)
        .current_dir(dir)
        .env_remove("TSPLAB_SEED")
        .output()
        .expect("spawn tsplab");
    assert!(out.status.success(), "tsplab {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn gen(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("u{n}_{seed}.txt"));
    tsplab(&["gen", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", path.to_str().unwrap()], dir);
    path
}

#[test]
fn config_line_comes_first_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let o = tsplab(&["gen", "--n", "7", "--seed", "4"], dir.path());
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let cfg: Value = serde_json::from_str(err.lines().next().unwrap()).unwrap();
    assert_eq!(cfg["command"]["gen"]["n"], 7);
    std::fs::write(dir.path().join("cfg.json"), err.lines().next().unwrap()).unwrap();
    let again = tsplab(&["replay", "cfg.json"], dir.path());
    assert_eq!(stdout(&again), stdout(&o));
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let explicit = tsplab(&["gen", "--n", "5", "--seed", "11"], dir.path());
    let env = Command::new(env!("CARGO_BIN_EXE_tsplab"))
        .args(["gen", "--n", "5"])
        .env("TSPLAB_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(env.stdout, explicit.stdout);
}

#[test]
fn heuristics_are_never_below_the_optimum() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), 11, 5);
    let f = f.to_str().unwrap();
    let solved: Value = serde_json::from_str(&stdout(&tsplab(&["solve", "--file", f], dir.path()))).unwrap();
    let opt = solved["length"].as_f64().unwrap();
    let order: Vec<u64> = solved["order"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(order.len(), 11);
    assert!(order.iter().all(|&v| (1..=11).contains(&v)));

    let csv = stdout(&tsplab(&["heur", "--file", f, "--reference", "exact"], dir.path()));
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let len: f64 = cols[1].parse().unwrap();
        assert!((cols[2].parse::<f64>().unwrap() - opt).abs() < 1e-12);
        assert!(len >= opt - 1e-9, "{row}");
    }
}

#[test]
fn fixed_path_endpoints_are_one_based() {
    let dir = tempfile::tempdir().unwrap();
    let f = gen(dir.path(), 8, 2);
    let o = tsplab(&["solve", "--file", f.to_str().unwrap(), "--mode", "path", "--endpoints", "3,8"], dir.path());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let order = v["order"].as_array().unwrap();
    assert_eq!(order.first().unwrap(), 3);
    assert_eq!(order.last().unwrap(), 8);
}

fn bnb_json(dir: &Path, incumbent: &str) -> Value {
    let o = tsplab(&["bnb", "--n", "8", "--seed", "3", "--incumbent", incumbent, "--format", "json"], dir);
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn a_loose_incumbent_grows_the_tree() {
    let dir = tempfile::tempdir().unwrap();
    let exact = bnb_json(dir.path(), "exact");
    let loose = bnb_json(dir.path(), "fixed:1e9");
    assert_eq!(exact["termination"], "certified");
    assert!(loose["nodes"].as_u64().unwrap() > exact["nodes"].as_u64().unwrap());
    assert_eq!(loose["best"].as_array().unwrap().len(), 8);

    let csv = stdout(&tsplab(&["bnb", "--n", "8", "--seed", "3", "--incumbent", "fixed:1e9"], dir.path()));
    assert!(csv.starts_with("level,open,expanded,pruned,leaves,incumbent"));
}

#[test]
fn planted_copies_are_detected() {
    let dir = tempfile::tempdir().unwrap();
    let base = gen(dir.path(), 4096, 1);
    tsplab(
        &[
            "plant", "--file", base.to_str().unwrap(), "--gadget", "nn", "--scale", "0.05", "--copies", "3",
            "--R", "0.3", "--gadget-out", "g.txt", "--out", "p.txt",
        ],
        dir.path(),
    );
    let found = stdout(&tsplab(&["detect", "--file", "p.txt", "--gadget-file", "g.txt", "--R", "0.3"], dir.path()));
    assert_eq!(found.lines().count(), 3);
    for line in found.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v["members"].as_array().unwrap().iter().all(|m| m.as_u64().unwrap() >= 1));
    }
}

#[test]
fn decide_answers_both_variants() {
    let dir = tempfile::tempdir().unwrap();
    for (variant, want) in [("yes", true), ("no", false)] {
        let o = tsplab(&["decide", "--variant", variant, "--heuristic", "nn"], dir.path());
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["answer"], want, "{variant}");
    }
}

#[test]
fn bad_arguments_fail_cleanly() {
    let bin = env!("CARGO_BIN_EXE_tsplab");
    for args in [&["bnb", "--incumbent", "fixed:-2"][..], &["plant", "--file", "x", "--gadget", "pi:x"], &["gen"]] {
        let o = Command::new(bin).args(args).output().unwrap();
        assert!(!o.status.success(), "{args:?}");
    }
}
