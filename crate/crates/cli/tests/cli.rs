use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pointproc"));
    c.env_remove("POINTPROC_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn read_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn hpp_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        ok(&["simulate", "hpp", "--rate", "2", "--horizon", "10", "--seed", "7", "--out", s(d)]);
    }
    assert_eq!(fs::read(a.join("events.csv")).unwrap(), fs::read(b.join("events.csv")).unwrap());
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
    assert_eq!(fs::read_to_string(a.join("events.csv")).unwrap().lines().next(), Some("t"));
}

#[test]
fn seed_falls_back_to_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let o = bin()
        .env("POINTPROC_SEED", "42")
        .args(["simulate", "hpp", "--rate", "2", "--horizon", "10", "--out", s(&a)])
        .output()
        .unwrap();
    assert!(o.status.success());
    ok(&["simulate", "hpp", "--rate", "2", "--horizon", "10", "--seed", "42", "--out", s(&b)]);
    assert_eq!(manifest(&a)["seed"], 42);
    assert_eq!(fs::read(a.join("events.csv")).unwrap(), fs::read(b.join("events.csv")).unwrap());
}

#[test]
fn hawkes_manifest_reports_branching() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ok(&[
        "simulate", "hawkes", "--mu", "1", "--alpha", "0.5", "--beta", "1", "--horizon", "100", "--seed", "1",
        "--out", s(tmp.path()),
    ]);
    let m = manifest(tmp.path());
    assert_eq!(m["summary"]["n_star"], 0.5);
    assert_eq!(m["summary"]["regime"], "subcritical");
    assert!(o.stderr.is_empty());
}

#[test]
fn supercritical_hawkes_warns_on_stderr() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ok(&[
        "simulate", "hawkes", "--mu", "1", "--alpha", "2", "--beta", "1", "--horizon", "5", "--out", s(tmp.path()),
    ]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("warning") && err.contains("supercritical"), "{err}");
    assert_eq!(manifest(tmp.path())["summary"]["regime"], "supercritical");
    // the warning never reaches the data file
    assert!(!fs::read_to_string(tmp.path().join("events.csv")).unwrap().contains("warning"));
}

#[test]
fn nhpp_intensity_forms() {
    let tmp = tempfile::tempdir().unwrap();
    for (i, extra) in [
        vec!["--intensity", "constant", "--rate", "2"],
        vec!["--intensity", "piecewise", "--breakpoints", "0,5,10", "--rates", "1,3"],
        vec!["--intensity", "sinusoid", "--base", "3", "--amplitude", "2", "--period", "24"],
    ]
    .into_iter()
    .enumerate()
    {
        let out = tmp.path().join(i.to_string());
        let mut args = vec!["simulate", "nhpp", "--horizon", "10", "--out", s(&out)];
        args.extend(extra);
        ok(&args);
        assert!(manifest(&out)["summary"]["expected_events"].as_f64().unwrap() > 0.0);
    }
    let o = run(&["simulate", "nhpp", "--horizon", "10", "--intensity", "sinusoid", "--base", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--amplitude"));
}

#[test]
fn nni_of_coincident_points_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "same.csv", "x,y\n0.5,0.5\n0.5,0.5\n0.5,0.5\n");
    let out = tmp.path().join("o");
    ok(&["analyze", "nni", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(manifest(&out)["summary"]["nni"], 0.0);
}

#[test]
fn kde_on_empty_file_is_all_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "empty.csv", "");
    let out = tmp.path().join("o");
    ok(&["analyze", "kde", "--input", s(&input), "--nx", "50", "--ny", "50", "--bandwidth", "0.05", "--out", s(&out)]);
    let rows = read_rows(&out.join("kde.csv"));
    assert_eq!(rows.len(), 2500);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn k_envelope_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let pts = tmp.path().join("p");
    ok(&["simulate", "csr", "--rate", "200", "--seed", "3", "--out", s(&pts)]);
    let out = tmp.path().join("k");
    ok(&[
        "analyze", "k", "--input", s(&pts.join("points.csv")), "--radii", "0.01:0.1:10", "--correction", "border",
        "--envelope", "99", "--out", s(&out),
    ]);
    let text = fs::read_to_string(out.join("k.csv")).unwrap();
    assert!(text.starts_with("r,observed,lower,upper\n"));
    let rows = read_rows(&out.join("k.csv"));
    assert_eq!(rows.len(), 10);
    for r in rows {
        let v: Vec<f64> = r.iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[2] <= v[3]);
    }
}

#[test]
fn geojson_input() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(
        tmp.path(),
        "pts.geojson",
        r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","geometry":{"type":"Point","coordinates":[0.1,0.1]},"properties":{}},
            {"type":"Feature","geometry":{"type":"Point","coordinates":[0.4,0.5]},"properties":{"t":1}}]}"#,
    );
    let out = tmp.path().join("o");
    ok(&["analyze", "g", "--input", s(&input), "--radii", "0.1,0.6", "--out", s(&out)]);
    let rows = read_rows(&out.join("g.csv"));
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[1][1].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn parse_errors_name_the_row_and_leave_nothing_behind() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "bad.csv", "x,y\n0.1,0.2\n0.3,oops\n");
    let out = tmp.path().join("o");
    let o = run(&["analyze", "nni", "--input", s(&input), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row 3"));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn points_outside_region_are_named() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "p.csv", "x,y\n0.1,0.2\n1.5,0.2\n");
    let o = run(&["analyze", "nni", "--input", s(&input), "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[1]"));
}

#[test]
fn gistar_single_hot_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let mut body = String::from("x,y\n");
    // one point per cell of a 5x5 grid, plus 20 extra in cell (3, 1)
    for iy in 0..5 {
        for ix in 0..5 {
            body.push_str(&format!("{},{}\n", 0.1 + 0.2 * ix as f64, 0.1 + 0.2 * iy as f64));
        }
    }
    for _ in 0..20 {
        body.push_str("0.7,0.3\n");
    }
    let input = write(tmp.path(), "hot.csv", &body);
    let out = tmp.path().join("o");
    ok(&["detect", "gistar", "--input", s(&input), "--nx", "5", "--ny", "5", "--radius", "0", "--out", s(&out)]);
    let rows = read_rows(&out.join("gistar.csv"));
    let best = rows
        .iter()
        .max_by(|a, b| a[2].parse::<f64>().unwrap().total_cmp(&b[2].parse::<f64>().unwrap()))
        .unwrap();
    assert_eq!((best[0].as_str(), best[1].as_str()), ("3", "1"));
    assert_eq!(manifest(&out)["summary"]["hot_cells"], serde_json::json!([[3, 1]]));
}

#[test]
fn degenerate_gistar_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "flat.csv", "x,y\n0.25,0.25\n0.75,0.25\n0.25,0.75\n0.75,0.75\n");
    let o = run(&["detect", "gistar", "--input", s(&input), "--nx", "2", "--ny", "2", "--radius", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

fn planted_events(dir: &Path) -> PathBuf {
    let mut body = String::from("x,y,t\n");
    // deterministic low-discrepancy background plus a tight cluster at (0.3, 0.7), t in [4, 5)
    for i in 0..150 {
        let x = (i as f64 * 0.618_033_988_75).fract();
        let y = (i as f64 * 0.754_877_666_25).fract();
        let t = 10.0 * (i as f64 * 0.569_840_290_99).fract();
        body.push_str(&format!("{x},{y},{t}\n"));
    }
    for i in 0..20 {
        let a = i as f64 * 0.9;
        let r = 0.03 * ((i % 5) as f64 + 1.0) / 5.0;
        body.push_str(&format!("{},{},{}\n", 0.3 + r * a.cos(), 0.7 + r * a.sin(), 4.0 + 0.05 * i as f64));
    }
    write(dir, "st.csv", &body)
}

#[test]
fn scan_recovers_planted_cluster() {
    let tmp = tempfile::tempdir().unwrap();
    let input = planted_events(tmp.path());
    let out = tmp.path().join("o");
    ok(&[
        "detect", "scan", "--input", s(&input), "--horizon", "10", "--nx", "10", "--ny", "10", "--radii",
        "0.05,0.1", "--durations", "1,2", "--slices", "10", "--nsim", "99", "--out", s(&out),
    ]);
    let rows = read_rows(&out.join("scan.csv"));
    let top: Vec<f64> = rows[0].iter().map(|v| v.parse().unwrap()).collect();
    assert!((top[0] - 0.3).abs() <= 0.1 + 1e-9 && (top[1] - 0.7).abs() <= 0.1 + 1e-9, "{top:?}");
    assert!(top[3] <= 4.0 && top[4] >= 5.0 - 1e-9);
}

#[test]
fn scan_nsim_below_minimum_is_usage_error() {
    let o = run(&[
        "detect", "scan", "--input", "x.csv", "--horizon", "1", "--nx", "2", "--ny", "2", "--radii", "0.1",
        "--durations", "0.5", "--slices", "2", "--nsim", "98",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("99"));
}

#[test]
fn scan_with_zero_baseline_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let input = planted_events(tmp.path());
    let base = write(tmp.path(), "base.csv", "slice,cell_x,cell_y,value\n0,0,0,0\n");
    let o = run(&[
        "detect", "scan", "--input", s(&input), "--horizon", "10", "--nx", "4", "--ny", "4", "--radii", "0.1",
        "--durations", "2", "--slices", "5", "--nsim", "99", "--baseline", s(&base), "--baseline-nx", "2",
        "--baseline-ny", "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("baseline"));
}

#[test]
fn manifest_and_command_conflict() {
    let o = run(&["--manifest", "m.json", "simulate", "hpp", "--rate", "1", "--horizon", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&[]);
    assert_eq!(o.status.code(), Some(2));
}
