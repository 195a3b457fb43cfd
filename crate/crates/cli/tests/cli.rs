use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const AND2: &str = "aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n";

/// Two inputs, two outputs: x = a & b, y = !(a & b).
const TWO_OUT: &str = "aag 3 2 0 2 1\n2\n4\n6\n7\n6 2 4\n";

const NAND_INV: &str = "GATE inv 1 O=!a; PIN * INV 1 999 1 0 1 0\nGATE nand2 2 O=!(a*b); PIN * INV 1 999 1 0 1 0\n";

fn techmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_techmap")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// AND chain over `n` inputs.
fn wide_and(n: usize) -> String {
    let mut s = format!("aag {} {n} 0 1 {}\n", 2 * n - 1, n - 1);
    for i in 1..=n {
        s += &format!("{}\n", 2 * i);
    }
    s += &format!("{}\n", 2 * (2 * n - 1));
    let mut prev = 2;
    for k in 0..n - 1 {
        let lhs = 2 * (n + 1 + k);
        s += &format!("{lhs} {prev} {}\n", 2 * (k + 2));
        prev = lhs;
    }
    s
}

#[test]
fn and_toy_maps_to_nand_and_inverter() {
    let dir = tempfile::tempdir().unwrap();
    let aig = write(dir.path(), "and.aag", AND2);
    let lib = write(dir.path(), "lib.genlib", NAND_INV);
    let out = techmap(&["map", &aig, "--genlib", &lib]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let gates = stdout(&out).lines().filter(|l| l.starts_with(".gate")).count();
    assert_eq!(gates, 2);

    let out = techmap(&["map", &aig, "--genlib", &lib, "--json", "--no-check"]);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["circuit"]["area"], 3.0);
    assert_eq!(report["circuit"]["delay"], 2.0);
    assert!(report.get("equivalence").is_none());
}

#[test]
fn input_errors_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let aig = write(dir.path(), "and.aag", AND2);
    let bad_lib = write(dir.path(), "bad.genlib", "GATE inv 1 O=!(a; PIN * INV 1 999 1 0 1 0\n");
    let no_inv = write(dir.path(), "noinv.genlib", "GATE nand2 2 O=!(a*b); PIN * INV 1 999 1 0 1 0\n");
    let bad_aig = write(dir.path(), "bad.aag", "aag 3 2 0 1\n");
    let missing = dir.path().join("missing.aag").display().to_string();

    assert_eq!(code(&techmap(&["map", &aig, "--genlib", &bad_lib])), 11);
    assert_eq!(code(&techmap(&["map", &aig, "--genlib", &no_inv])), 11);
    assert_eq!(code(&techmap(&["map", &bad_aig])), 11);
    assert_eq!(code(&techmap(&["map", &missing])), 10);
    assert_eq!(code(&techmap(&["map", &aig, "--rounds", "0,0,0"])), 13);
    assert_eq!(code(&techmap(&["map", &aig, "--alpha-schedule", "1,0.5"])), 13);
    assert_eq!(code(&techmap(&["map", &aig, "--no-such-flag"])), 13);
    assert_eq!(code(&techmap(&["--help"])), 0);
}

#[test]
fn library_that_cannot_realize_an_and_fails_mapping() {
    let dir = tempfile::tempdir().unwrap();
    let aig = write(dir.path(), "and.aag", AND2);
    // an inverter alone cannot realize an AND
    let lib = write(dir.path(), "inv.genlib", "GATE inv 1 O=!a; PIN * INV 1 999 1 0 1 0\n");
    let out = techmap(&["map", &aig, "--genlib", &lib]);
    assert_eq!(code(&out), 12, "{}", stderr(&out));
}

#[test]
fn same_seed_gives_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let aig = repo().join("benchmarks/bundled/mult6.aig").display().to_string();
    let mut runs = Vec::new();
    for i in 0..2 {
        let blif = dir.path().join(format!("m{i}.blif")).display().to_string();
        let report = dir.path().join(format!("m{i}.json")).display().to_string();
        let out = techmap(&["map", &aig, "-o", &blif, "--report", &report, "--seed", "9", "--exhaustive-limit", "4"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        runs.push((std::fs::read(&blif).unwrap(), std::fs::read(&report).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);

    let suite = repo().join("benchmarks/toy").display().to_string();
    let a = techmap(&["suite", &suite, "--json", "--seed", "3", "--jobs", "1"]);
    let b = techmap(&["suite", &suite, "--json", "--seed", "3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cec_verdicts_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let aig = write(dir.path(), "two.aag", TWO_OUT);
    let lib = write(dir.path(), "lib.genlib", NAND_INV);
    let blif = dir.path().join("two.blif").display().to_string();
    assert_eq!(code(&techmap(&["map", &aig, "--genlib", &lib, "-o", &blif])), 0);

    let out = techmap(&["cec", &aig, &blif, "--genlib", &lib]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("equivalent"));

    // drive the AND output from the NAND net
    let text = std::fs::read_to_string(&blif).unwrap();
    let faulty = text.replace(".names n3 po0", ".names n3_n po0");
    assert_ne!(faulty, text);
    let faulty = write(dir.path(), "faulty.blif", &faulty);
    let out = techmap(&["cec", &aig, &faulty, "--genlib", &lib]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
    assert!(stdout(&out).contains("counterexample: output"));

    let one_out = write(dir.path(), "and.aag", AND2);
    assert_eq!(code(&techmap(&["cec", &one_out, &blif, "--genlib", &lib])), 3);

    let wide = write(dir.path(), "wide.aag", &wide_and(20));
    let wide_blif = dir.path().join("wide.blif").display().to_string();
    assert_eq!(code(&techmap(&["map", &wide, "--no-check", "-o", &wide_blif])), 0);
    let out = techmap(&["cec", &wide, &wide_blif, "--vectors", "4096"]);
    assert_eq!(code(&out), 2, "{}", stdout(&out));
    let out = techmap(&["cec", &wide, &wide_blif, "--external", "exit 0"]);
    assert_eq!(code(&out), 0);
    let out = techmap(&["cec", &wide, &wide_blif, "--external", "exit 1"]);
    assert_eq!(code(&out), 1);
}

fn report(rows: &[(&str, f64, f64)]) -> String {
    let rows: Vec<Value> = rows
        .iter()
        .map(|&(name, area, delay)| {
            serde_json::json!({
                "name": name, "aig_size": 10, "aig_depth": 3,
                "area": area, "delay": delay, "verdict": "equivalent"
            })
        })
        .collect();
    serde_json::json!({ "rows": rows }).to_string()
}

fn score_json(dir: &Path, base: &str, cand: &str, extra: &[&str]) -> (i32, Value, String) {
    let empty = dir.join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let b = write(dir, "base.json", base);
    let c = write(dir, "cand.json", cand);
    let mut args = vec!["score", empty.to_str().unwrap(), &b, &c, "--json"];
    args.extend_from_slice(extra);
    let out = techmap(&args);
    (code(&out), serde_json::from_str(&stdout(&out)).unwrap_or(Value::Null), stderr(&out))
}

#[test]
fn score_examples() {
    let dir = tempfile::tempdir().unwrap();
    let base = report(&[("a", 10.0, 4.0), ("b", 20.0, 8.0)]);

    let (c, s, _) = score_json(dir.path(), &base, &base, &[]);
    assert_eq!(c, 0);
    assert_eq!((s["s_area"].as_f64(), s["s_delay"].as_f64(), s["e"].as_f64()), (Some(0.0), Some(0.0), Some(0.0)));

    let halved = report(&[("a", 5.0, 4.0), ("b", 10.0, 8.0)]);
    let (_, s, _) = score_json(dir.path(), &base, &halved, &[]);
    assert_eq!(s["s_area"].as_f64(), Some(0.5));
    assert_eq!(s["s_overall"].as_f64(), Some(0.25));
    let (_, s, _) = score_json(dir.path(), &base, &halved, &["--alpha", "1"]);
    assert_eq!(s["s_overall"].as_f64(), Some(0.5));

    let missing = report(&[("a", 10.0, 4.0)]);
    let (_, s, err) = score_json(dir.path(), &base, &missing, &[]);
    assert_eq!(s["e"].as_f64(), Some(0.5));
    assert!(err.contains("missing"), "{err}");
}

#[test]
fn suite_report_compares_against_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let suite = repo().join("benchmarks/toy").display().to_string();
    let base = dir.path().join("base.json").display().to_string();
    let out = techmap(&["suite", &suite, "--report", &base]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("t(s)"));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&base).unwrap()).unwrap();
    let rows = saved["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.get("runtime_seconds").is_none() && r["verdict"] == "equivalent"));

    let out = techmap(&["suite", &suite, "--baseline", &base, "--json", "--timing"]);
    let again: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(again["rows"][0]["runtime_seconds"].is_number());
    let agg = &again["aggregate"];
    assert_eq!(agg["s_overall"].as_f64(), Some(0.0));
    assert_eq!(agg["area_ratio"].as_f64(), Some(1.0));
    assert_eq!(agg["e"].as_f64(), Some(0.0));

    let scored = techmap(&["score", &suite, &base, &base]);
    assert_eq!(code(&scored), 0);
    assert!(stdout(&scored).contains("e = 0.0000"));
}

#[test]
fn evolve_command() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        "iterations = 2\nseed = 5\nsuite = [\"{}\"]\n[mapping]\ncut_limit = 8\n",
        repo().join("benchmarks/toy").display()
    );
    let cfg = write(dir.path(), "run.toml", &cfg);
    let report = dir.path().join("report.json").display().to_string();
    let genome = dir.path().join("best.json").display().to_string();

    let out = techmap(&["evolve", &cfg, "--iterations", "0", "--report", &report, "--genome-out", &genome]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["iterations"].as_array().unwrap().len(), 0);
    assert_eq!(r["best_score"]["s_overall"].as_f64(), Some(0.0));
    assert!(techmap::HeuristicGenome::from_json_str(&std::fs::read_to_string(&genome).unwrap()).is_ok());

    let out = techmap(&["evolve", &cfg]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let trace = stdout(&out);
    assert_eq!(trace.lines().filter(|l| l.contains("accepted") || l.contains("rejected")).count(), 2, "{trace}");

    let a = techmap(&["evolve", &cfg, "--json", "--jobs", "1"]);
    let b = techmap(&["evolve", &cfg, "--json", "--jobs", "3"]);
    assert_eq!(a.stdout, b.stdout);

    let bad = write(dir.path(), "bad.toml", "tau = 0.6\n");
    assert_eq!(code(&techmap(&["evolve", &bad])), 13);
    let garbled = write(dir.path(), "garbled.toml", "tau = = 1\n");
    assert_eq!(code(&techmap(&["evolve", &garbled])), 11);
}

#[test]
fn stats_reports_size_and_depth() {
    let dir = tempfile::tempdir().unwrap();
    let aig = write(dir.path(), "wide.aag", &wide_and(5));
    let out = techmap(&["stats", &aig, "--json"]);
    let s: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!((s["inputs"].as_u64(), s["ands"].as_u64(), s["depth"].as_u64()), (Some(5), Some(4), Some(4)));
}
