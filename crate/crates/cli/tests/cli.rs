use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthotree"))
        .args(args)
        .env_remove("ORTHOTREE_THREADS")
        .output()
        .expect("spawn orthotree")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn header(text: &str) -> Value {
    let line = text.lines().next().unwrap();
    serde_json::from_str(line.strip_prefix("# ").expect("header line")).unwrap()
}

#[test]
fn pants_spectrum_json() {
    let o = run(&["spectrum", "--surface", "pants", "--basis", "3,3,3", "--depth", "8", "--mode", "exact", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["schema"], "1");
    assert_eq!(doc["precision"], 128);
    let got: Vec<(String, u64)> = doc["spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .take(7)
        .map(|e| (e["value"].as_str().unwrap().to_string(), e["multiplicity"].as_u64().unwrap()))
        .collect();
    let want = [("3", 3), ("19", 3), ("63", 6), ("179", 6), ("243", 6), ("483", 6), ("723", 12)];
    let want: Vec<(String, u64)> = want.iter().map(|(v, m)| (v.to_string(), *m)).collect();
    assert_eq!(got, want);
}

#[test]
fn spectrum_csv_and_float_agree() {
    let exact = run(&["spectrum", "--basis", "3,3,3", "--depth", "5", "--format", "csv"]);
    let float = run(&["spectrum", "--basis", "3,3,3", "--depth", "5", "--format", "csv", "--mode", "float"]);
    assert_eq!(code(&exact), 0);
    assert_eq!(code(&float), 0);
    let rows = |s: &str| -> Vec<(f64, String)> {
        s.lines()
            .skip(2)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].parse().unwrap(), f[1].to_string())
            })
            .collect()
    };
    let (e, f) = (rows(&stdout(&exact)), rows(&stdout(&float)));
    assert_eq!(e.len(), f.len());
    for (a, b) in e.iter().zip(&f) {
        assert!((a.0 - b.0).abs() <= 1e-12 * a.0);
        assert_eq!(a.1, b.1);
    }
}

#[test]
fn torus_integral_and_perturbed() {
    let ok = run(&["spectrum", "--surface", "torus", "--basis", "3,17,21", "--depth", "8", "--expect-integral"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
    let bad = run(&["spectrum", "--surface", "torus", "--basis", "3,17,22", "--depth", "6", "--expect-integral"]);
    assert_eq!(code(&bad), 2);
    let msg = stderr(&bad);
    assert!(msg.contains("not integral") && msg.contains('/'), "{msg}");
}

#[test]
fn usage_errors() {
    for args in [
        &["spectrum", "--surface", "pants", "--basis", "1,3,3"][..],
        &["spectrum", "--surface", "klein", "--basis", "3,3,3"],
        &["spectrum", "--basis", "3,3"],
        &["spectrum", "--basis", "3,3,x"],
        &["spectrum", "--basis", "3.000000000000000000000000000000000000000000001,3,3"],
        &["spectrum", "--basis", "3,3,3", "--precision", "100"],
        &["frobnicate"],
        &["topograph"],
        &["topograph", "--form", "1,0,1", "--catalog", "pants-3"],
        &["verify", "--only", "no-such-family"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 64, "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn basmajian_rows_close() {
    let o = run(&["identity", "basmajian", "--surface", "pants", "--basis", "3,3,3", "--depth", "9", "--tol", "1e-12"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let h = header(&text);
    assert_eq!(h["schema"], "1");
    assert_eq!(h["tol"], 1e-12);
    let rows: Vec<Vec<f64>> = text.lines().skip(2).map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10);
    let target = (3.0 + 5f64.sqrt()).ln();
    let mut last = 0.0;
    for r in &rows {
        assert!(r[1] > last);
        last = r[1];
        assert!((r[1] + r[2] - r[3]).abs() < 1e-12);
        assert!(r[4] < 1e-30);
    }
    assert!((rows[0][3] - target).abs() < 1e-12, "{} vs {target}", rows[0][3]);
}

#[test]
fn product_reports_golden_note() {
    let o = run(&["identity", "product", "--surface", "pants", "--basis", "3,3,3", "--depth", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let h = header(&text);
    assert!(h["note"].as_str().unwrap().contains("phi^2"));
    assert_eq!(h["factors"][0]["factor"], "2");
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((last[3] - (3.0 + 5f64.sqrt())).abs() < 1e-14);
    assert!((last[1] * last[2] - last[3]).abs() < 1e-12);
}

#[test]
fn bridgeman_budget_exhausted() {
    let o = run(&["identity", "bridgeman", "--surface", "torus", "--basis", "37,17,19", "--budget", "2e3", "--tol", "1e-3"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("budget exhausted"));
    let text = stdout(&o);
    let h = header(&text);
    assert_eq!(h["brackets_target"], true);
    let last: Vec<f64> = text.lines().last().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((last[3] - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
    assert!(last[1] < last[3] && last[3] < last[1] + last[2]);
}

#[test]
fn bridgeman_rejects_cusped() {
    let o = run(&["identity", "bridgeman", "--surface", "cusped", "--depth", "3"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn verify_small_run_and_floor() {
    let o = run(&["verify", "--samples", "6", "--rng-seed", "7", "--only", "harmonic,cayley-menger,mixed-hhhh"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["schema"], "1");
    assert_eq!(doc["report"]["families"].as_array().unwrap().len(), 3);
    assert_eq!(doc["report"]["tol"], 1e-9);

    let floor = run(&["verify", "--tol", "1e-30", "--precision", "64"]);
    assert_eq!(code(&floor), 1);
    assert!(stderr(&floor).contains("floor"));
    assert!(floor.stdout.is_empty());
}

#[test]
fn verify_failures_listed() {
    let o = run(&["verify", "--samples", "30", "--precision", "64", "--tol", "1e-16", "--only", "geodesic-ptolemy-minus"]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.lines().any(|l| l.starts_with("FAIL geodesic-ptolemy-minus seed 42 sample")), "{err}");
}

#[test]
fn verify_deterministic() {
    let args = ["verify", "--samples", "4", "--rng-seed", "11", "--only", "quintet"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn topograph_form_and_dump() {
    let dir = std::env::temp_dir().join(format!("orthotree-dump-{}", std::process::id()));
    let o = run(&["topograph", "--form", "1,0,1", "--depth", "8", "--dump", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["discriminant"], "-4");
    let dump = std::fs::read_to_string(&dir).unwrap();
    std::fs::remove_file(&dir).ok();
    assert_eq!(dump.lines().count() as u64, doc["regions"].as_u64().unwrap());
    for l in dump.lines() {
        let _: Value = serde_json::from_str(l).unwrap();
    }

    let neg = run(&["topograph", "--form", "1,1,-1", "--depth", "5"]);
    assert_eq!(code(&neg), 0, "{}", stderr(&neg));
}

#[test]
fn topograph_catalog_and_compare() {
    let o = run(&["topograph", "--catalog", "pants-3", "--depth", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["report"]["all_zero"], true);
    assert_eq!(doc["report"]["equation"], "X^2+Y^2+Z^2-3XY-3YZ-3XZ=10");

    let c = run(&["topograph", "--compare-cusped-pants", "--depth", "4"]);
    assert_eq!(code(&c), 0);
    let text = stdout(&c);
    assert!(text.lines().nth(1).unwrap().starts_with("fraction,word,lambda"));
    assert!(text.lines().count() > 3);
}

#[test]
fn output_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("orthotree-out-{}.json", std::process::id()));
    let args = ["spectrum", "--surface", "torus", "--basis", "3,17,21", "--depth", "5"];
    let a = run(&args);
    let mut with_file: Vec<&str> = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let b = run(&with_file);
    assert_eq!(code(&b), 0);
    assert!(b.stdout.is_empty());
    let file = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(a.stdout, file);
}

#[test]
fn threads_env_and_flag() {
    let o = Command::new(env!("CARGO_BIN_EXE_orthotree"))
        .args(["topograph", "--form", "2,1,3", "--depth", "4"])
        .env("ORTHOTREE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["--threads", "0", "topograph", "--form", "1,0,1"])), 64);
}
