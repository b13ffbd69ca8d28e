use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use curvegrid::{StampedPoint, TwdIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvegrid")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_lines(path: &Path, lines: impl IntoIterator<Item = Value>) {
    let text: String = lines.into_iter().map(|v| format!("{v}\n")).collect();
    fs::write(path, text).unwrap();
}

fn random_curves(rng: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Value> {
    (0..n)
        .map(|i| {
            let m = rng.gen_range(1..=4);
            let pts: Vec<[f64; 2]> = (0..m).map(|_| [rng.gen_range(0.0..side), rng.gen_range(0.0..side)]).collect();
            json!({"id": format!("c{i}"), "points": pts})
        })
        .collect()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture { dir: TempDir::new().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn asym(&self, n: usize, seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let curves = format!("curves{n}.jsonl");
        write_lines(&self.path(&curves), random_curves(&mut rng, n, 0.7));
        let out = format!("asym{n}.json");
        let o = run(&[
            "build", "--kind", "asym", "--curves", &self.arg(&curves), "--delta", "1", "--eps", "1", "--k", "2",
            "--out", &self.arg(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        self.arg(&out)
    }
}

#[test]
fn build_and_query_asym() {
    let f = Fixture::new();
    let index = f.asym(10, 1);
    write_lines(
        &f.path("q.jsonl"),
        [json!({"id": "near", "points": [[0.3, 0.3], [0.4, 0.4]]}), json!({"id": "far", "points": [[0.3, 0.3], [90.0, 0.0]]})],
    );
    let o = run(&["query", "--index", &index, "--query", &f.arg("q.jsonl")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# near");
    assert!(lines[1].starts_with('c'));
    let far = lines.iter().position(|l| *l == "# far").unwrap();
    assert_eq!(&lines[far + 1..], ["REJECTED_OUTSIDE_GRID"]);
}

#[test]
fn invalid_parameters_exit_2() {
    let f = Fixture::new();
    write_lines(&f.path("c.jsonl"), [json!({"id": "a", "points": [[0.0, 0.0]]})]);
    let o = run(&["build", "--kind", "asym", "--curves", &f.arg("c.jsonl"), "--delta", "1", "--eps", "2", "--k", "1", "--out", &f.arg("x.json")]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["build", "--kind", "asym", "--curves", &f.arg("c.jsonl"), "--delta", "1", "--eps", "1", "--out", &f.arg("x.json")]);
    assert_eq!(o.status.code(), Some(2));
    let index = f.asym(10, 2);
    assert_eq!(run(&["bench", "--index", &index, "--reps", "0"]).status.code(), Some(2));
}

#[test]
fn budget_exceeded_exit_3() {
    let f = Fixture::new();
    write_lines(&f.path("c.jsonl"), [json!({"id": "a", "points": [[0.0, 0.0], [0.5, 0.5]]})]);
    let o = run(&[
        "build", "--kind", "asym", "--curves", &f.arg("c.jsonl"), "--delta", "1", "--eps", "0.5", "--k", "3",
        "--budget", "1000", "--out", &f.arg("x.json"),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!f.path("x.json").exists());
}

#[test]
fn io_and_format_errors_exit_4() {
    let f = Fixture::new();
    let o = run(&["query", "--index", &f.arg("missing.json"), "--query", &f.arg("missing.jsonl")]);
    assert_eq!(o.status.code(), Some(4));
    fs::write(f.path("bad.jsonl"), "{\"id\": \"a\", \"points\": [[0, 0]]}\nnot json\n").unwrap();
    let o = run(&["build", "--kind", "asym", "--curves", &f.arg("bad.jsonl"), "--delta", "1", "--eps", "1", "--k", "1", "--out", &f.arg("x.json")]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));
    write_lines(
        &f.path("mixed.jsonl"),
        [json!({"id": "a", "points": [[0.0, 0.0]]}), json!({"id": "b", "points": [[0.0, 0.0, 1.0]]})],
    );
    let o = run(&["build", "--kind", "asym", "--curves", &f.arg("mixed.jsonl"), "--delta", "1", "--eps", "1", "--k", "1", "--out", &f.arg("x.json")]);
    assert_eq!(o.status.code(), Some(4));
    fs::write(f.path("v.json"), "{\"kind\":\"asym\",\"format_version\":99}").unwrap();
    let o = run(&["check", "--index", &f.arg("v.json")]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn check_passes_and_catches_a_planted_entry() {
    let f = Fixture::new();
    let index = f.asym(10, 3);
    let o = run(&["check", "--index", &index, "--trials", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let summary: Value = serde_json::from_str(stdout(&o).lines().last().unwrap()).unwrap();
    assert_eq!(summary["violations"], 0);

    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&index).unwrap()).unwrap();
    doc["curves"].as_array_mut().unwrap().push(json!({"id": "planted", "points": [[7.0, 7.0], [7.5, 7.0]]}));
    let buckets = doc["buckets"].as_object_mut().unwrap();
    let first = buckets.keys().next().unwrap().clone();
    buckets[&first].as_array_mut().unwrap().push(json!("planted"));
    fs::write(f.path("mutated.json"), doc.to_string()).unwrap();
    let o = run(&["check", "--index", &f.arg("mutated.json"), "--trials", "50"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("VIOLATION") && l.contains("planted")));
}

#[test]
fn twd_query_matches_library() {
    let f = Fixture::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pts: Vec<StampedPoint> =
        (0..50).map(|_| StampedPoint::new(format!("r{}", rng.gen_range(0..5)), rng.gen_range(0.0..0.45))).collect();
    write_lines(&f.path("p.jsonl"), pts.iter().map(|p| serde_json::to_value(p).unwrap()));
    let o = run(&["build", "--kind", "twd", "--points", &f.arg("p.jsonl"), "--theta", "2", "--eps", "0.1", "--out", &f.arg("t.json")]);
    assert!(o.status.success());
    let lib = TwdIndex::build(pts, 2, 0.1).unwrap();
    for (a, b) in [(0.05, 0.3), (0.0, 0.45), (-1.0, 2.0), (0.2, 0.21)] {
        let o = run(&["query", "--index", &f.arg("t.json"), "--from", &a.to_string(), "--to", &b.to_string()]);
        assert_eq!(o.status.code(), Some(0));
        let s = lib.query(a, b).unwrap();
        let expected: Vec<String> =
            s.inner.iter().map(|r| format!("S1\t{r}")).chain(s.outer.iter().map(|r| format!("S2\t{r}"))).collect();
        assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), expected);
    }
    write_lines(&f.path("w.jsonl"), [json!([0.1, 0.2]), json!({"from": 0.0, "to": 0.4})]);
    let o = run(&["bench", "--index", &f.arg("t.json"), "--query", &f.arg("w.jsonl"), "--reps", "2"]);
    let report: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(report["queries"], 2);
    assert_eq!(report["constant_cost"], true);
}

#[test]
fn asrs_query_prints_ranges() {
    let f = Fixture::new();
    write_lines(&f.path("p.jsonl"), [json!({"id": "p", "points": [[0.0, 0.0], [0.6, 0.0], [0.6, 0.6]]})]);
    let o = run(&["build", "--kind", "asrs", "--curves", &f.arg("p.jsonl"), "--delta", "1", "--eps", "1", "--k", "1", "--out", &f.arg("a.json")]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    write_lines(&f.path("q.jsonl"), [json!({"id": "q", "points": [[0.3, 0.0]]})]);
    let o = run(&["query", "--index", &f.arg("a.json"), "--query", &f.arg("q.jsonl")]);
    let text = stdout(&o);
    let ranges: Vec<curvegrid::SubcurveRange> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert!(!ranges.is_empty());
}

#[test]
fn bench_cost_does_not_grow_with_corpus() {
    let f = Fixture::new();
    write_lines(
        &f.path("q.jsonl"),
        (0..20).map(|i| json!({"id": format!("q{i}"), "points": [[0.05 * i as f64, 0.2], [0.6, 0.03 * i as f64]]})),
    );
    let mut ops = Vec::new();
    for n in [10, 100, 1000] {
        let index = f.asym(n, 5);
        let o = run(&["bench", "--index", &index, "--query", &f.arg("q.jsonl")]);
        assert_eq!(o.status.code(), Some(0));
        let report: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
        assert_eq!(report["catalog"], n);
        assert_eq!(report["constant_cost"], true);
        ops.push(report["ops_per_query"].clone());
    }
    assert!(ops.windows(2).all(|w| w[0] == w[1]), "{ops:?}");
}

#[test]
fn seeded_runs_repeat() {
    let f = Fixture::new();
    let index = f.asym(10, 6);
    let a = run(&["check", "--index", &index, "--trials", "100", "--seed", "9"]);
    let b = run(&["check", "--index", &index, "--trials", "100", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    let first = fs::read(&index).unwrap();
    let again = f.asym(10, 6);
    assert_eq!(first, fs::read(again).unwrap());
}
