use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("covergff-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covergff")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn triangle(dir: &Path) -> String {
    let p = dir.join("triangle.txt");
    std::fs::write(&p, "# u v c\n0 1 1\n1 2 1\n2 0 2\n").unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn resistance_and_hitting_on_a_triangle() {
    let dir = scratch("tri");
    let g = triangle(&dir);
    // resistance 1 in parallel with 1/2 + 1
    let r = json(&run(&["--graph", &g, "resistance", "0", "1"]));
    assert!((r["resistance"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    let h = json(&run(&["--graph", &g, "hitting", "0", "1"]));
    assert!((h["hitting_time"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn walk_cover_prints_one_row_per_run() {
    let dir = scratch("cover");
    let g = triangle(&dir);
    let out = run(&["--graph", &g, "--seed", "5", "walk-cover", "--runs", "7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(text.starts_with("run,"));
    let again = run(&["--graph", &g, "--seed", "5", "walk-cover", "--runs", "7"]);
    assert_eq!(text.as_bytes(), &again.stdout[..]);
}

#[test]
fn eulerian_count_matches_brute_force() {
    let dir = scratch("euler");
    let p = dir.join("mg.txt");
    std::fs::write(&p, "0 1 2\n1 2 1\n1 0 1\n2 0 1\n").unwrap();
    let v = json(&run(&["eulerian-count", p.to_str().unwrap(), "--brute"]));
    assert_eq!(v["circuits"], v["brute_force_circuits"]);
}

#[test]
fn bad_input_is_a_clean_error() {
    let dir = scratch("bad");
    let p = dir.join("neg.txt");
    std::fs::write(&p, "0 1 -1\n").unwrap();
    let out = run(&["--graph", p.to_str().unwrap(), "resistance", "0", "1"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());

    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"suite": "nonsense"}"#).unwrap();
    let out = run(&["experiment", "--config", cfg.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense"));
}

#[test]
fn experiment_is_reproducible() {
    let dir = scratch("exp");
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out_dir = dir.join(format!("run{i}"));
        let cfg = dir.join(format!("smoke{i}.json"));
        let body = serde_json::json!({
            "suite": "smoke",
            "seed": 11,
            "output_dir": out_dir,
        });
        std::fs::write(&cfg, body.to_string()).unwrap();
        let out = run(&["experiment", "--config", cfg.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        for f in ["smoke.csv", "smoke.json", "manifest.json"] {
            assert!(out_dir.join(f).exists(), "{f} missing");
        }
        outputs.push((
            std::fs::read(out_dir.join("smoke.csv")).unwrap(),
            std::fs::read(out_dir.join("smoke.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}
