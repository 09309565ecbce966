use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use knotmeasure::geometry::{Point3, PolygonalCurve};
use knotmeasure_cli::curve_io::{parse_curve, read_curve, write_curve, CurveFormat};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knotmeasure")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn save(dir: &Path, name: &str, c: &PolygonalCurve) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, write_curve(c, CurveFormat::Json)).unwrap();
    p
}

fn square(center: Point3, u: Point3, v: Point3) -> PolygonalCurve {
    PolygonalCurve::closed(vec![center + u + v, center - u + v, center - u - v, center + u - v]).unwrap()
}

#[test]
fn round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, fmt) in [("random-walk", "json"), ("trefoil", "csv"), ("near-closed-trefoil", "csv")] {
        let path = dir.path().join(format!("{kind}.{fmt}"));
        stdout(&bin(&["generate", "--kind", kind, "--curve-format", fmt, "--output", path.to_str().unwrap()]));
        let c = read_curve(&path).unwrap();
        for f in [CurveFormat::Json, CurveFormat::Csv] {
            let back = parse_curve(&write_curve(&c, f), Some(f)).unwrap();
            assert_eq!(back, c);
        }
    }
}

#[test]
fn csv_grammar() {
    let c = parse_curve("# a comment\n#closed\n0, 0, 0\n1,0,0\n\n0,1,0.5\n", None).unwrap();
    assert!(c.is_closed());
    assert_eq!(c.vertices().len(), 3);
    assert!(parse_curve("0,0\n1,1,1\n", Some(CurveFormat::Csv)).is_err());
    assert!(parse_curve("{\"closed\": true}", None).is_err());
}

#[test]
fn linking_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let x = Point3::new(1.0, 0.0, 0.0);
    let y = Point3::new(0.0, 1.0, 0.0);
    let z = Point3::new(0.0, 0.0, 1.0);
    let a = save(dir.path(), "a.json", &square(Point3::new(0.0, 0.0, 0.0), x, y));
    let b = save(dir.path(), "b.json", &square(x, x, z));
    let far = save(dir.path(), "far.json", &square(z * 50.0, x, z));
    let args = |p: &Path, q: &Path| vec!["lk".to_string(), "--input".into(), p.display().to_string(), "--input".into(), q.display().to_string(), "--format".into(), "records".into()];
    let lk = |p: &Path, q: &Path| -> f64 {
        let a: Vec<String> = args(p, q);
        let out = stdout(&bin(&a.iter().map(String::as_str).collect::<Vec<_>>()));
        serde_json::from_str::<serde_json::Value>(&out).unwrap()["lk"].as_f64().unwrap()
    };
    assert!((lk(&a, &b).abs() - 1.0).abs() < 1e-6);
    assert!(lk(&a, &far).abs() < 1e-3);
    let a2: Vec<String> = args(&a, &a);
    let o = bin(&a2.iter().map(String::as_str).collect::<Vec<_>>());
    assert!(!o.status.success());
}

#[test]
fn v2_paths_agree_on_trefoil_and_unknot() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    stdout(&bin(&["generate", "--kind", "trefoil", "--output", t.to_str().unwrap()]));
    let out = stdout(&bin(&["v2", "--input", t.to_str().unwrap(), "--samples", "20", "--format", "records"]));
    for line in out.lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(r["v2_state_sum"], "-23/4");
        assert_eq!(r["v2_combinatorial"], "-23/4");
    }
    let u = save(dir.path(), "u.json", &square(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.2), Point3::new(0.0, 1.0, 0.0)));
    let out = stdout(&bin(&["v2", "--input", u.to_str().unwrap(), "--format", "records"]));
    assert!(out.lines().all(|l| l.contains("\"v2_state_sum\":\"1/4\"")));
}

#[test]
fn non_generic_direction_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let c = PolygonalCurve::open(vec![Point3::new(0.0, 0.0, 0.0), Point3::new(0.0, 0.0, 1.0), Point3::new(1.0, 0.0, 1.0)]).unwrap();
    let p = save(dir.path(), "c.json", &c);
    let o = bin(&["v2", "--input", p.to_str().unwrap(), "--direction", "0,0,1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parallel to the projection direction"));
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["wk", "--input", "/nonexistent.json"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.json");
    stdout(&bin(&["generate", "--kind", "trefoil", "--output", t.to_str().unwrap()]));
    assert_eq!(bin(&["wk", "--input", t.to_str().unwrap(), "--samples", "1"]).status.code(), Some(2));
    assert_eq!(bin(&["spectrum", "--input", t.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(bin(&["verify-skein", "--gauss", "open:O0 U1 U0 O1", "--signs", "1,1"]).status.code(), Some(1));
    assert_eq!(bin(&["verify-skein", "--gauss", "O0 U1 O2 U0 O1 U2", "--signs", "1,1,1"]).status.code(), Some(0));
}

#[test]
fn generators() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.json");
    stdout(&bin(&["generate", "--kind", "four-edge", "--seed", "4", "--output", f.to_str().unwrap()]));
    let c = read_curve(&f).unwrap();
    assert_eq!((c.vertices().len(), c.is_closed()), (5, false));
    let n = dir.path().join("n.json");
    stdout(&bin(&["generate", "--kind", "near-closed-trefoil", "--gap", "0.25", "--output", n.to_str().unwrap()]));
    assert!((read_curve(&n).unwrap().endpoint_gap() - 0.25).abs() < 1e-9);
}

#[test]
fn four_edge_spectrum_and_repeatability() {
    let dir = tempfile::tempdir().unwrap();
    // Seed 6 gives a curve with a k2.1 region (probability about 0.003).
    let f = save(dir.path(), "f.json", &knotmeasure::curves::random_four_edge(6).unwrap());
    let f = f.to_str().unwrap();
    let run = || stdout(&bin(&["spectrum", "--input", f, "--samples", "40000", "--format", "records"]));
    let out = run();
    assert_eq!(out, run());
    let r: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let entries = r["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2, "{out}");
    let total: f64 = entries.iter().map(|e| e["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}
