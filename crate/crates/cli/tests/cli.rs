use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nodal(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn field<'a>(doc: &'a str, key: &str) -> &'a str {
    doc.lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
        .unwrap_or_else(|| panic!("missing {key} in\n{doc}"))
}

#[test]
fn solve_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = nodal(&["solve", "--t-star", "0.4", "--samples", "1024"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = fs::read_to_string(dir.path().join("result.txt")).unwrap();
    assert_eq!(field(&doc, "epsilon"), "-1");
    assert_eq!(field(&doc, "checks_passed"), "true");
    for name in ["wave.csv", "potential.csv"] {
        let csv = fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(csv.lines().count() > 256, "{name}");
    }
}

#[test]
fn solve_is_byte_for_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["solve", "--m", "3", "--i", "2", "--p", "2.5", "--t-star", "0.55", "--samples", "1024"];
    for d in [&a, &b] {
        assert_eq!(nodal(&args, d.path()).status.code(), Some(0));
    }
    for name in ["result.txt", "wave.csv", "potential.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn out_of_range_input_exits_with_domain_code() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--t-star", "1.4"][..],
        &["solve", "--t-star", "0.3", "--p", "1.0"],
        &["solve", "--t-star", "0.3", "--i", "2", "--m", "2"],
    ] {
        let out = nodal(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    assert!(!dir.path().join("result.txt").exists());
}

#[test]
fn degenerate_node_gives_zero_norm() {
    let dir = tempfile::tempdir().unwrap();
    let out = nodal(&["solve", "--t-star", "0.5", "--q0", "-3", "--samples", "64"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let doc = fs::read_to_string(dir.path().join("result.txt")).unwrap();
    assert_eq!(field(&doc, "epsilon"), "0");
    assert_eq!(field(&doc, "norm"), "0");
}

#[test]
fn sweep_rows_cover_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = nodal(&["sweep", "--t-min", "0.1", "--t-max", "0.9", "--t-step", "0.2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "t_star,epsilon,lambda,norm,status");
    assert_eq!(rows.len(), 6);
    assert!(rows[1..].iter().all(|r| r.ends_with(",ok")));
}

#[test]
fn forward_reads_a_written_potential() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nodal(&["solve", "--t-star", "0.3", "--samples", "1024"], dir.path()).status.code(), Some(0));
    let profile = dir.path().join("potential.csv");
    let out = nodal(
        &["forward", "--profile", profile.to_str().unwrap(), "--m", "2", "--i", "1"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = fs::read_to_string(dir.path().join("forward.txt")).unwrap();
    let node: f64 = field(&doc, "nodes").parse().unwrap();
    assert!((node - 0.3).abs() < 1e-5, "{node}");
}

#[test]
fn oracle_runs_on_a_coarse_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = nodal(&["oracle", "--t-star", "0.4", "--bins", "48"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["oracle.txt", "oracle_potential.csv", "oracle_history.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}
