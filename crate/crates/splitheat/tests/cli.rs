use std::path::Path;
use std::process::{Command, Output};

fn splitheat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitheat")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn run_writes_table_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let o = splitheat(&["run", "--mesh-level", "3", "--nk", "8,16,32", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["scheme", "domain", "datum", "p", "lambda", "T", "h_level", "N_k", "tau", "E_u", "rate", "wall_ms"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(&rows[0][..3], ["lie", "square", "phi0"]);
    assert_eq!(rows[0][7], "8");
    assert!(rows[0][10].is_empty());
    for row in &rows {
        // E_u in scientific notation with four decimals, e.g. 1.2345E-3.
        let (mantissa, exponent) = row[9].split_once('E').unwrap();
        assert_eq!(mantissa.split_once('.').unwrap().1.len(), 4);
        assert!(exponent.parse::<i32>().is_ok());
    }
    for row in &rows[1..] {
        let rate: f64 = row[10].parse().unwrap();
        assert_eq!(row[10].split_once('.').unwrap().1.len(), 2);
        assert!((0.5..1.5).contains(&rate));
    }
}

#[test]
fn run_to_stdout_and_config_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lshape.cfg");
    std::fs::write(&cfg, "# small L-shape run\ndatum = sing\nscheme = type2\nmesh_level = 3\nnk = 4,8\nlambda = -1\n").unwrap();
    let o = splitheat(&["run", "--config", cfg.to_str().unwrap(), "--scheme", "type1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("scheme,domain,datum"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&first[..5], ["type1", "lshape", "sing", "2.5", "-1"]);
    assert_eq!(lines.count(), 1);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "p = 3\nstrang = yes\n").unwrap();
    let o = splitheat(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2"));
}

#[test]
fn exit_codes() {
    assert_eq!(splitheat(&["run", "--datum", "nope", "--nk", "2,4"]).status.code(), Some(2));
    assert_eq!(splitheat(&["run", "--domain", "cube", "--datum", "phi0", "--nk", "2,4"]).status.code(), Some(2));
    assert_eq!(splitheat(&["run", "--nk", "8,24", "--mesh-level", "2"]).status.code(), Some(2));
    // tau = 1/2 with p = 5 and |phi| = 1 leaves the admissible range of the flow.
    assert_eq!(splitheat(&["run", "--p", "5", "--T", "1", "--nk", "2,4", "--mesh-level", "3"]).status.code(), Some(3));
    // A tolerance CG can never reach.
    assert_eq!(splitheat(&["run", "--nk", "8,16", "--mesh-level", "3", "--cg-tol", "1e-300"]).status.code(), Some(4));
    let missing = splitheat(&["run", "--nk", "8,16", "--mesh-level", "2", "--out", "/nonexistent/dir/t.csv"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn timing_reports_every_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("timing.csv");
    let o = splitheat(&["timing", "--mesh-level", "3", "--steps", "8", "--repeat", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = read_csv(&out);
    let schemes: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(schemes, ["lie", "type1", "type2"]);
}

#[test]
fn mesh_dump() {
    let o = splitheat(&["mesh", "--domain", "lshape", "--level", "1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let head: Vec<usize> = lines[0].split_whitespace().map(|x| x.parse().unwrap()).collect();
    let (nv, nc) = (head[1], head[2]);
    assert_eq!(head[0], 2);
    assert_eq!(lines.len(), 1 + nv + nc + 1);
    assert_eq!(lines[nv + nc + 1].split_whitespace().count(), nv);
    assert_eq!(splitheat(&["mesh", "--domain", "torus"]).status.code(), Some(2));
}

#[test]
fn verify_writes_fits() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fits.csv");
    let o = splitheat(&[
        "verify",
        "--mesh-level",
        "3",
        "--ladder",
        "16,32,64",
        "--samples",
        "500",
        "--out",
        out.to_str().unwrap(),
    ]);
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert_eq!(stderr.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).count(), 5);
    assert_eq!(o.status.code(), Some(if stderr.contains("FAIL") { 1 } else { 0 }));
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["lambda", "tau", "error", "slope", "intercept"]);
    assert_eq!(rows.len(), 6);
}
