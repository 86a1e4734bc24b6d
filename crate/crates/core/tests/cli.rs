use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qmaps::snapshot::{read_classical, read_wigner};

const BAKER: &str = "
# small baker run
map = baker
n = 16
alpha = 0.3   # coupling
steps = 6
outputs = entropy_series, classical_parallel
";

fn qmaps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmaps")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn run_writes_series_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BAKER);
    let out_dir = dir.path().join("out");
    let out = qmaps(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(out_dir.join("series.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("t,"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 7);
    assert!(rows[0].starts_with("0,"));
}

#[test]
fn run_to_stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BAKER);
    let stdout = qmaps(&["run", &cfg]);
    assert_eq!(stdout.status.code(), Some(0));
    let out_dir = dir.path().join("out");
    qmaps(&["run", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(
        String::from_utf8(stdout.stdout).unwrap(),
        fs::read_to_string(out_dir.join("series.csv")).unwrap()
    );
}

#[test]
fn snapshot_grids_read_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BAKER);
    let out_dir = dir.path().join("snaps");
    let out = qmaps(&["snapshot", &cfg, "--every", "3", "--out", out_dir.to_str().unwrap(), "--csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let w = read_wigner(&mut fs::File::open(out_dir.join("wigner_t00003.wgrd")).unwrap()).unwrap();
    assert_eq!(w.side(), 32);
    assert!((w.sum() - 1.0).abs() < 1e-10);
    let c = read_classical(&mut fs::File::open(out_dir.join("classical_t00006.cgrd")).unwrap()).unwrap();
    assert!((c.mass() - 1.0).abs() < 1e-10);
    let csv = fs::read_to_string(out_dir.join("wigner_t00000.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("q,p,value"));
    assert_eq!(csv.lines().count(), 1 + 32 * 32);
}

#[test]
fn sweep_has_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BAKER);
    let out = qmaps(&["sweep", &cfg, "--axis", "alpha=0.1,0.5,0.9"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
}

#[test]
fn toy_prints_series() {
    let out = qmaps(&["toy", "--alpha", "0.5", "--tmax", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,entropy,purity"));
    assert_eq!(text.lines().count(), 12);
    let first: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 1.0]);
}

#[test]
fn selftest_passes() {
    let out = qmaps(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        format!("{BAKER}\ncolour = red\n"),
        BAKER.replace("alpha = 0.3", "alpha = 1.5"),
        BAKER.replace("n = 16", "n = 15"),
        BAKER.replace("map = baker", "map = harper"),
        "map = baker\n n 16\n".to_owned(),
    ] {
        let cfg = write_config(dir.path(), &bad);
        let out = qmaps(&["run", &cfg]);
        assert_eq!(out.status.code(), Some(2), "config:\n{bad}\nstderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(qmaps(&["run", "/nonexistent/run.cfg"]).status.code(), Some(2));
    assert_eq!(qmaps(&["toy", "--alpha", "2", "--tmax", "3"]).status.code(), Some(2));
    let cfg = write_config(dir.path(), BAKER);
    assert_eq!(qmaps(&["snapshot", &cfg, "--every", "0"]).status.code(), Some(2));
    assert_eq!(qmaps(&["sweep", &cfg, "--axis", "beta=1"]).status.code(), Some(2));
}
