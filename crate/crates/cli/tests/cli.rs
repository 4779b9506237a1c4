use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn instance_dirs() -> Vec<PathBuf> {
    std::fs::read_dir(corpus_dir()).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_dir()).collect()
}

fn unijoin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unijoin")).args(args).output().expect("binary runs")
}

fn files(dir: &Path) -> (String, String) {
    (dir.join("catalog").display().to_string(), dir.join("query").display().to_string())
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_json(dir: &Path, extra: &[&str]) -> Value {
    let (cat, q) = files(dir);
    let mut args = vec!["run", "--catalog", &cat, "--query", &q, "--json"];
    args.extend_from_slice(extra);
    let o = unijoin(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn clover_example_passes_the_oracle() {
    let (cat, q) = files(&corpus_dir().join("clover_example"));
    let o = unijoin(&["run", "--catalog", &cat, "--query", &q, "--plan", "gj", "--dicts", "hash", "--check"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("cardinality 1 total multiplicity 1"), "{out}");
    assert!(out.contains("(1, 10, 100) x1"), "{out}");
    assert!(out.contains("check PASS"), "{out}");
}

#[test]
fn optimizations_change_stats_not_results() {
    // Projecting onto x lets pruning drop a and b.
    let dir = corpus_dir().join("clover_x");
    let on = run_json(&dir, &["--plan", "fj", "--dicts", "hybrid", "--opts", "O1..O5"]);
    let off = run_json(&dir, &["--plan", "fj", "--dicts", "hybrid", "--opts", "none"]);
    assert_eq!(on["result"], off["result"]);
    assert_ne!(on["strategy"], off["strategy"]);
    let counters = |v: &Value| {
        let mut s = v["stats"].clone();
        s.as_object_mut().unwrap().retain(|k, _| !k.ends_with("_ms"));
        s
    };
    assert_ne!(counters(&on), counters(&off));
}

#[test]
fn plan_files_run_and_invalid_ones_exit_2() {
    let dir = corpus_dir().join("clover_example");
    let (cat, q) = files(&dir);
    let good = format!("file:{}", dir.join("free_join.plan").display());
    let o = unijoin(&["run", "--catalog", &cat, "--query", &q, "--plan", &good, "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("plan     Q = [[R(x, a), S(x), T(x)], [S(b)]]"));

    let bad = format!("file:{}", dir.join("bad.plan").display());
    let o = unijoin(&["run", "--catalog", &cat, "--query", &q, "--plan", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not disjoint"));
}

#[test]
fn errors_exit_1() {
    let dir = corpus_dir().join("clover_example");
    let (cat, _) = files(&dir);
    let tmp = tempfile::tempdir().unwrap();
    let q = tmp.path().join("query");
    std::fs::write(&q, "Q(x) :- R(x,a), Missing(x)\n").unwrap();
    let o = unijoin(&["run", "--catalog", &cat, "--query", q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let o = unijoin(&["run", "--catalog", "/nonexistent/catalog", "--query", q.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn listed_tuples_are_in_lexicographic_order() {
    let v = run_json(&corpus_dir().join("chain4"), &["--limit", "1000", "--dicts", "hash"]);
    let tuples: Vec<Vec<i64>> = v["result"]["tuples"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["tuple"].as_array().unwrap().iter().map(|x| x["Int"].as_i64().or(x.as_i64()).unwrap()).collect())
        .collect();
    assert!(!tuples.is_empty());
    assert!(tuples.windows(2).all(|w| w[0] < w[1]));
}

/// Every bundled instance, every plan, policy and optimization set agrees with the oracle.
#[test]
fn bundled_corpus_passes_every_strategy_cell() {
    let mut dirs = instance_dirs();
    dirs.sort();
    assert!(dirs.len() >= 12);
    let start = Instant::now();
    for dir in &dirs {
        let (cat, q) = files(dir);
        let o = unijoin(&[
            "bench", "--catalog", &cat, "--query", &q, "--repeat", "1", "--check", "--json", "-",
            "--plans", "binary,gj,fj", "--dicts", "hash,sorted,hybrid",
            "--opts", "all", "--opts", "none", "--opts", "O2,O3,O4,O5", "--opts", "O1,O3,O4,O5",
            "--opts", "O1,O2,O4,O5", "--opts", "O1,O2,O3,O5", "--opts", "O1,O2,O3,O4",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}: {}", dir.display(), String::from_utf8_lossy(&o.stderr));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        let cells = v["cells"].as_array().unwrap();
        assert_eq!(cells.len(), 63);
        for c in cells {
            assert_eq!(c["check"], "PASS", "{} {}", dir.display(), c["strategy"]);
        }
    }
    assert!(start.elapsed().as_secs_f64() < 10.0 * dirs.len() as f64);
}

#[test]
fn smoke_bench_over_the_corpus_is_fast() {
    let start = Instant::now();
    for dir in instance_dirs() {
        let (cat, q) = files(&dir);
        let o = unijoin(&["bench", "--catalog", &cat, "--query", &q, "--repeat", "1"]);
        assert!(o.status.success());
        assert!(stdout(&o).contains("mean of 1 runs"));
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn generic_join_avoids_the_quadratic_intermediate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert!(unijoin(&["gen", "triangle", "--n", "160", "--out", out]).status.success());
    let (cat, q) = files(tmp.path());
    let json = tmp.path().join("bench.json");
    let o = unijoin(&[
        "bench", "--catalog", &cat, "--query", &q, "--plans", "binary,gj", "--repeat", "1", "--check", "--json",
        json.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("binary/hash"));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    let inter = |i: usize| v["cells"][i]["counters"]["intermediate_tuples"].as_u64().unwrap();
    assert_eq!(v["cells"][0]["plan"], "binary");
    assert_eq!(v["cells"][1]["plan"], "gj");
    assert!(inter(1) < inter(0), "gj {} vs binary {}", inter(1), inter(0));
}

#[test]
fn empty_strategy_matrix_is_an_error() {
    let (cat, q) = files(&corpus_dir().join("triangle"));
    let o = unijoin(&["bench", "--catalog", &cat, "--query", &q, "--plans", ""]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nothing to benchmark"));
    let o = unijoin(&["bench", "--catalog", &cat, "--query", &q, "--repeat", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn generation_is_deterministic_per_seed() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = unijoin(&["gen", "corpus", "--seed", "9", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    for name in ["clover", "strings", "bushy4"] {
        for f in ["catalog", "query", "R.csv"] {
            let (pa, pb) = (a.path().join(name).join(f), b.path().join(name).join(f));
            if pa.exists() {
                assert_eq!(std::fs::read(&pa).unwrap(), std::fs::read(pb).unwrap(), "{name}/{f}");
            }
        }
    }
    let tree = std::fs::read_to_string(a.path().join("bushy4/query")).unwrap();
    assert!(tree.contains("tree ((R,S),(T,U))"));
}
