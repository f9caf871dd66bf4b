use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn bergman(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Parses a CSV file into rows of fields; fields are unquoted numbers here.
fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn project_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = bergman(&["project", "--domain", "disk"], dir.path());
    assert!(o.status.success());
    for r in rows(&dir.path().join("project_disk_coefficients.csv")) {
        assert!(num(&r[4]).hypot(num(&r[5])) < 1e-10);
    }
    let s = rows(&dir.path().join("project_disk_summary.csv"));
    assert!((num(&s[0][1]) - PI / 2.0).abs() < 1e-8);
}

#[test]
fn project_annulus_with_pole() {
    let dir = tempfile::tempdir().unwrap();
    let o = bergman(&["project", "--domain", "annulus:0.5,1", "--poles", "0:3"], dir.path());
    assert!(o.status.success());
    let r = rows(&dir.path().join("project_annulus_0.5_1_coefficients.csv"));
    let pole = r.iter().find(|r| r[0] == "pole" && r[3] == "-1").unwrap();
    assert!((num(&pole[4]) - 0.54101).abs() < 1e-5);
}

#[test]
fn project_ellipse() {
    let dir = tempfile::tempdir().unwrap();
    let o = bergman(&["project", "--domain", "ellipse:2,1", "--degree", "8"], dir.path());
    assert!(o.status.success());
    let r = rows(&dir.path().join("project_ellipse_2_1_coefficients.csv"));
    let z = r.iter().find(|r| r[0] == "monomial" && r[3] == "1").unwrap();
    assert!((num(&z[4]) - 0.6).abs() < 1e-9);
}

#[test]
fn project_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("wide.toml");
    std::fs::write(&spec, "kind = \"ellipse\"\na = 2.0\nb = 1.0\n").unwrap();
    let o = bergman(&["project", "--domain", spec.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    assert!(dir.path().join("project_wide_summary.csv").exists());
}

#[test]
fn identical_runs_give_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(bergman(&["project", "--domain", "square", "--seed", "7"], dir.path()).status.success());
        assert!(bergman(&["trace", "--family", "fig3.5"], dir.path()).status.success());
    }
    for name in [
        "project_square_coefficients.csv",
        "project_square_samples.csv",
        "trace_fig3.5.csv",
        "trace_fig3.5.svg",
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
}

#[test]
fn trace_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = bergman(&["trace", "--family", "fig3.1"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("loops 1\n"), "{text}");
    assert!(text.contains("3-fold rotation") && text.contains("(symmetric)"), "{text}");
    assert!(dir.path().join("trace_fig3.1.svg").exists());

    let o = bergman(&["trace", "--family", "circle"], dir.path());
    let text = stdout(&o);
    assert!(text.contains("loops 1\n"));
    let area: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("selected domain: area "))
        .and_then(|l| l.split(',').next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((area - PI).abs() < 1e-4);

    let o = bergman(&["trace", "--family", "fig3.9"], dir.path());
    assert!(stdout(&o).contains("origin: not in selected domain"));
}

#[test]
fn trace_custom_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let o = bergman(&["trace", "--coefficients", "0,0,0,0.1", "--resolution", "256"], dir.path());
    assert!(o.status.success());
    assert!(stdout(&o).contains("3-fold rotation"));
}

#[test]
fn sandwich_disk_and_square() {
    let dir = tempfile::tempdir().unwrap();
    let o = bergman(&["sandwich", "--domain", "disk"], dir.path());
    assert!(o.status.success());
    let r = &rows(&dir.path().join("sandwich_disk.csv"))[0];
    let (sqrt_rho, lambda, upper) = (num(&r[3]), num(&r[4]), num(&r[5]));
    for x in [sqrt_rho, lambda] {
        assert!((x - upper).abs() < 1e-6 * upper);
    }
    let o = bergman(&["sandwich", "--domain", "square"], dir.path());
    assert!(o.status.success());
    let r = &rows(&dir.path().join("sandwich_square.csv"))[0];
    assert!((num(&r[9]) - 0.0186).abs() < 1e-4);
}

#[test]
fn sweep_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let o = bergman(&["sweep", "--domains", "builtin", "--h-rel", "0.0078125"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(!stdout(&o).contains("VIOLATED"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(["project", "--domain", "disk"])
        .env("BERGMAN_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("project_disk_summary.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bergman(&["project", "--domain", "blob"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[input]"));
    let o = bergman(&["project", "--domain", "disk", "--degree", "65"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = bergman(&["project", "--domain", "disk", "--poles", "0.1:1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[bergman]"));
    let o = bergman(&["trace", "--family", "circle", "--window", "3,3,4,4"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[tracer]"));
}
