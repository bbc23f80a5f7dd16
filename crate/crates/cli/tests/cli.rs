use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn truss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_truss")).args(args).env_remove("TRUSS_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Writes a built-in structure to a temporary directory.
fn builtin_file(dir: &Path, name: &str) -> PathBuf {
    let out = truss(&["example", name]);
    assert!(out.status.success());
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, out.stdout).unwrap();
    path
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Compares CSV output with a stored file: text cells exactly, numbers to 1e-9 relative.
/// Set TRUSS_UPDATE_GOLDEN=1 to rewrite the files.
fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("TRUSS_UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    let (e, a): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), actual.lines().collect());
    assert_eq!(e.len(), a.len(), "{name}: line count");
    for (le, la) in e.iter().zip(&a) {
        let (ce, ca): (Vec<&str>, Vec<&str>) = (le.split(',').collect(), la.split(',').collect());
        assert_eq!(ce.len(), ca.len(), "{name}: {le} vs {la}");
        for (x, y) in ce.iter().zip(&ca) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(p), Ok(q)) => assert!((p - q).abs() <= 1e-9 * p.abs().max(q.abs()).max(1e-6), "{name}: {le} vs {la}"),
                _ => assert_eq!(x, y, "{name}"),
            }
        }
    }
}

#[test]
fn golden_freqs_and_modes() {
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let br = builtin_file(dir.path(), "bridge");
    for (name, file) in [("square", &sq), ("bridge", &br)] {
        let f = truss(&["freqs", file.to_str().unwrap()]);
        assert!(f.status.success(), "{}", stderr(&f));
        check_golden(&format!("freqs_{name}.csv"), &stdout(&f));
        // modes at every listed frequency
        let mut all = String::new();
        let mut seen = Vec::new();
        for r in rows(&stdout(&f)) {
            if seen.contains(&r[1]) {
                continue;
            }
            seen.push(r[1].clone());
            let m = truss(&["modes", file.to_str().unwrap(), "--omega", &r[1]]);
            assert!(m.status.success(), "{}", stderr(&m));
            all.push_str(&stdout(&m));
        }
        check_golden(&format!("modes_{name}.csv"), &all);
    }
    let c = truss(&["compare", sq.to_str().unwrap(), "--divisions", "1,2,4", "--count", "5"]);
    assert!(c.status.success());
    check_golden("compare_square.csv", &stdout(&c));
    let c = truss(&["compare", br.to_str().unwrap(), "--divisions", "1,2", "--count", "5"]);
    assert!(c.status.success());
    check_golden("compare_bridge.csv", &stdout(&c));
}

#[test]
fn bridge_frequencies_include_one_resonant() {
    let dir = tempfile::tempdir().unwrap();
    let br = builtin_file(dir.path(), "bridge");
    let out = truss(&["freqs", br.to_str().unwrap(), "--method", "laplacian", "--omega-max", "3.2"]);
    assert!(out.status.success());
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 6);
    assert_eq!(r.iter().filter(|row| row[2] == "resonant").count(), 1);
}

#[test]
fn fem_count_limits_rows() {
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let out = truss(&["freqs", sq.to_str().unwrap(), "--method", "fem-consistent", "--divisions", "8", "--count", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(rows(&stdout(&out)).len(), 5);
}

#[test]
fn missing_file_is_input_error() {
    let out = truss(&["freqs", "/nonexistent/structure.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("cannot read"));
}

#[test]
fn invalid_document_names_the_rod() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"dimension": 2, "dimensionless": true,
            "joints": [{"id": "a", "position": [0, 0]}, {"id": "b", "position": [0, 0]}],
            "rods": [{"id": "ab", "joints": ["a", "b"], "area": 1}]}"#,
    )
    .unwrap();
    let out = truss(&["freqs", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ab"));
    std::fs::write(&path, "{not json").unwrap();
    assert_eq!(truss(&["freqs", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn modes_kinds_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let out = truss(&["--format", "json", "modes", sq.to_str().unwrap(), "--omega", &std::f64::consts::PI.to_string()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let modes = v["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 2);
    assert!(modes.iter().all(|m| m["kind"] == "resonant"));

    let out = truss(&["modes", sq.to_str().unwrap(), "--omega", "1.5"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("freqs"));

    let br = builtin_file(dir.path(), "bridge");
    let omega = (-1.0f64 / 3.0).acos();
    let out = truss(&["--format", "json", "modes", br.to_str().unwrap(), "--omega", &omega.to_string()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let m = &v["modes"][0];
    assert_eq!(m["kind"], "regular");
    assert_eq!(m["displacements"].as_array().unwrap().len(), 3);
    assert_eq!(m["anchor_forces"].as_array().unwrap().len(), 2);
}

#[test]
fn json_floats_have_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let out = truss(&["--format", "json", "freqs", sq.to_str().unwrap()]);
    let text = stdout(&out);
    let omega = text.split("\"omega\":").nth(1).unwrap().split([',', '}']).next().unwrap();
    let mantissa = omega.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{omega}");
}

#[test]
fn compare_rows_and_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let out = truss(&["compare", sq.to_str().unwrap(), "--divisions", "1,2,3,4,5,6,7,8", "--count", "5"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let r = rows(&stdout(&out));
    assert!(r.len() >= 5 * (2 * 8 + 1));
    let value = |m: &str, n: &str, k: &str, col: usize| -> f64 {
        r.iter().find(|x| x[0] == m && x[1] == n && x[2] == k).unwrap()[col].parse().unwrap()
    };
    for k in ["1", "2", "3", "4", "5"] {
        let first = value("laplacian", "1", k, 3);
        for n in 2..=8 {
            assert!((value("laplacian", &n.to_string(), k, 3) - first).abs() <= 1e-8);
        }
        for m in ["fem-consistent", "fem-lumped"] {
            for n in 2..=8 {
                let prev = value(m, &(n - 1).to_string(), k, 4);
                let cur = value(m, &n.to_string(), k, 4);
                assert!(cur <= prev + 1e-9, "{m} index {k}: error rose from {prev} to {cur} at n = {n}");
            }
        }
    }
}

#[test]
fn bench_reports_four_methods() {
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let out = truss(&["bench", sq.to_str().unwrap(), "--divisions", "1,2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "divisions,laplacian_s,reverberation_s,fem_consistent_s,fem_lumped_s");
    let r = rows(&text);
    assert_eq!(r.len(), 2);
    for row in &r {
        assert!(row[1..].iter().all(|t| t.parse::<f64>().unwrap() > 0.0));
    }
    // spectral methods are timed once and replicated
    assert_eq!(r[0][1], r[1][1]);
    assert_eq!(r[0][2], r[1][2]);
}

#[test]
fn simulate_square_impulse() {
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let snap = dir.path().join("snap.csv");
    let times = format!("{},{},{}", 1.0 / 3.0, 4.0 / 3.0, 7.0 / 3.0);
    let out = truss(&[
        "simulate", sq.to_str().unwrap(), "--impulse", "12:1:-1", "--t-max", "2.5", "--snapshot", &times,
        "--snapshot-file", snap.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let events = rows(&stdout(&out));
    let first: Vec<_> = events.iter().filter(|r| r[0] == "1").collect();
    assert_eq!(first.len(), 3);
    assert!(first.iter().all(|r| r[1] == "2" && r[2] == "12"));

    let profile = rows(&std::fs::read_to_string(&snap).unwrap());
    // leading edge of the stressed region on each rod
    let front = |t: f64, rod: &str| -> f64 {
        profile
            .iter()
            .filter(|r| (r[0].parse::<f64>().unwrap() - t).abs() < 1e-12 && r[1] == rod)
            .filter(|r| r[4].parse::<f64>().unwrap().abs() > 1e-9)
            .map(|r| r[3].parse::<f64>().unwrap())
            .fold(0.0, f64::max)
    };
    assert!((front(1.0 / 3.0, "12") - 1.0 / 3.0).abs() < 1e-9);
    assert!((front(4.0 / 3.0, "24") - 1.0 / 3.0).abs() < 1e-9);
    assert!((front(4.0 / 3.0, "23") - (1.0 / 3.0) / 2f64.sqrt()).abs() < 1e-9);
    // rod 23's front has not reached joint 3 at t = 7/3
    assert!((front(7.0 / 3.0, "23") - (4.0 / 3.0) / 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn simulate_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let snap = dir.path().join("snap.csv");
    let out = truss(&["simulate", sq.to_str().unwrap(), "--t-max", "0", "--snapshot-file", snap.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);
    assert_eq!(std::fs::read_to_string(&snap).unwrap().lines().count(), 1);

    let out = truss(&["simulate", sq.to_str().unwrap(), "--impulse", "12:4:-1", "--t-max", "1"]);
    assert_eq!(out.status.code(), Some(2));

    let irregular = dir.path().join("irregular.json");
    std::fs::write(
        &irregular,
        r#"{"dimension": 2, "dimensionless": true,
            "joints": [{"id": "1", "position": [0, 0]}, {"id": "2", "position": [1, 0]},
                       {"id": "3", "position": [0.1, 1.3]}, {"id": "4", "position": [1.2, 0.9]}],
            "rods": [{"id": "12", "joints": ["1", "2"], "area": 1}, {"id": "13", "joints": ["1", "3"], "area": 1},
                     {"id": "24", "joints": ["2", "4"], "area": 1}, {"id": "34", "joints": ["3", "4"], "area": 1},
                     {"id": "23", "joints": ["2", "3"], "area": 1}]}"#,
    )
    .unwrap();
    let out = truss(&["simulate", irregular.to_str().unwrap(), "--impulse", "12:1:-1", "--t-max", "50", "--max-fronts", "1000"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("min_amplitude"));
}

#[test]
fn verify_commands() {
    for name in ["square", "bridge"] {
        let out = truss(&["verify", "--builtin", name]);
        assert!(out.status.success(), "{}\n{}", stdout(&out), stderr(&out));
        assert!(rows(&stdout(&out)).iter().all(|r| r.last().unwrap() == "pass"));
    }
    let dir = tempfile::tempdir().unwrap();
    let sq = builtin_file(dir.path(), "square");
    let out = truss(&["verify", sq.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(rows(&stdout(&out)).len(), 4);
}

#[test]
fn example_command() {
    assert!(stdout(&truss(&["example", "bridge"])).contains("\"anchored\": true"));
    assert_eq!(truss(&["example", "pyramid"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let br = builtin_file(dir.path(), "bridge");
    let one = truss(&["--threads", "1", "freqs", br.to_str().unwrap()]);
    let many = Command::new(env!("CARGO_BIN_EXE_truss"))
        .args(["freqs", br.to_str().unwrap()])
        .env("TRUSS_THREADS", "4")
        .output()
        .unwrap();
    assert!(one.status.success() && many.status.success());
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(truss(&["--threads", "0", "freqs", br.to_str().unwrap()]).status.code(), Some(2));
}
