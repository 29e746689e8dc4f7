use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn cmrev(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmrev")).args(args).output().expect("binary runs")
}

fn write_spec(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(sub: &str, spec: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    cmrev(&args)
}

fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn diagnostics(out: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(out.join("diagnostics.json")).unwrap()).unwrap()
}

const BALL: &str = "schema = 1\nkind = \"cm\"\nn = 2\nj = 1\n[measure]\npreset = \"area_ball\"\n";

#[test]
fn ball_preset_support_is_one_plus_height() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "ball.toml", BALL);
    let out = dir.path().join("out");
    let o = run("solve", &spec, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&out.join("samples.csv"));
    assert_eq!(rows.len(), 721);
    assert_eq!(rows[0][0], -FRAC_PI_2);
    assert_eq!(rows[720][0], FRAC_PI_2);
    for r in &rows {
        assert!((r[1] - (1.0 + r[0].sin())).abs() < 1e-6, "{r:?}");
        assert!(r[2] >= 0.0);
    }
    let d = diagnostics(&out);
    assert_eq!(d["status"], "solved");
    assert!((d["cm"]["c_mu"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(d["cm"]["c_mu_tail_upper"]["truncation_point"].as_f64().is_some());
    assert!(out.join("meridian.csv").exists());
    assert!(!out.join("mesh.obj").exists());
}

#[test]
fn hessian_dirichlet_profile() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "h.toml",
        "schema = 1\nkind = \"hessian_dirichlet\"\nn = 2\nk = 2\nR = 1.0\n[measure]\npreset = \"lebesgue\"\n",
    );
    let out = dir.path().join("out");
    let o = run("solve", &spec, &out, &["--samples", "41", "--mesh"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_rows(&out.join("samples.csv"));
    assert_eq!(rows.len(), 41);
    for r in &rows {
        assert!((r[1] - (r[0] * r[0] - 1.0) / 2.0).abs() < 1e-8, "{r:?}");
    }
    let obj = fs::read_to_string(out.join("mesh.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("f ")));
    assert_eq!(diagnostics(&out)["condition"]["f_non_decreasing"], true);
}

#[test]
fn north_pole_atom_is_not_centered() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "p.toml",
        "schema = 1\nkind = \"cm\"\nn = 2\nj = 1\n[measure]\natoms = [[1.5707963267948966, 1.0]]\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run("solve", &spec, &out, &[]).status.code(), Some(2));
    let d = diagnostics(&out);
    assert_eq!(d["status"], "inadmissible");
    let reasons: Vec<_> = d["cm"]["reasons"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert!(reasons.contains(&"NotCentered"));
    assert!(!out.join("samples.csv").exists());
}

#[test]
fn origin_atom_below_full_order_is_inadmissible() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "o.toml",
        "schema = 1\nkind = \"hessian_dirichlet\"\nn = 2\nk = 1\nR = 1.0\n[measure]\npreset = \"origin_atom\"\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run("solve", &spec, &out, &[]).status.code(), Some(2));
    let d = diagnostics(&out);
    assert!(d["condition"]["violation_witness"]["r1"].as_f64().is_some());
}

#[test]
fn roundtrips() {
    let dir = TempDir::new().unwrap();
    for (name, body) in [
        ("ball", "schema = 1\nkind = \"roundtrip\"\nn = 3\nj = 2\n[measure]\npreset = \"area_ball\"\n"),
        ("cyl", "schema = 1\nkind = \"roundtrip\"\nn = 2\nj = 1\n[measure]\npreset = \"cylinder\"\nlength = 1.5\n"),
        ("cyl_full", "schema = 1\nkind = \"roundtrip\"\nn = 3\nj = 3\n[measure]\npreset = \"cylinder\"\nlength = 0.5\n"),
        ("disk", "schema = 1\nkind = \"roundtrip\"\nvariant = \"disk\"\nn = 2\nj = 1\n[measure]\npreset = \"area_ball\"\n"),
    ] {
        let spec = write_spec(&dir, &format!("{name}.toml"), body);
        let out = dir.path().join(name);
        let o = run("roundtrip", &spec, &out, &[]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let d = diagnostics(&out);
        let dev = d["roundtrip"]["max_relative_deviation"].as_f64().unwrap();
        assert!(dev < 1e-6, "{name}: {dev}");
    }
}

#[test]
fn inadmissible_roundtrip_stops_before_forward() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "bad.toml",
        "schema = 1\nkind = \"roundtrip\"\nn = 2\nj = 1\n[measure]\natoms = [[0.0, 2.0]]\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run("roundtrip", &spec, &out, &[]).status.code(), Some(2));
    assert!(!out.join("cap_moments.csv").exists());
    assert!(diagnostics(&out).get("roundtrip").is_none());
}

#[test]
fn forward_cylinder_cap_moments() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "f.toml",
        "schema = 1\nkind = \"forward_body\"\nn = 2\nj = 2\n[body]\npreset = \"cylinder\"\nlength = 1.5\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run("forward", &spec, &out, &[]).status.code(), Some(0));
    let pi = std::f64::consts::PI;
    for r in read_rows(&out.join("cap_moments.csv")) {
        assert_eq!(r[1], pi);
        assert_eq!(r[2], pi);
    }
    let d = diagnostics(&out);
    assert!((d["forward"]["equator_mass"].as_f64().unwrap() - 2.0 * pi * 1.5).abs() < 1e-12);
}

#[test]
fn invalid_specs_exit_three() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("no_j", "schema = 1\nkind = \"cm\"\nn = 2\n[measure]\npreset = \"area_ball\"\n", "`j`"),
        ("neg", "schema = 1\nkind = \"cm\"\nn = 2\nj = 1\n[measure]\natoms = [[0.5, -1.0]]\n", "negative"),
        ("schema", "schema = 7\nkind = \"cm\"\nn = 2\nj = 1\n[measure]\npreset = \"area_ball\"\n", "schema"),
        ("syntax", "schema = 1\nkind = = 2\n", "line 2"),
        ("preset", "schema = 1\nkind = \"cm\"\nn = 2\nj = 1\n[measure]\npreset = \"lebesgue\"\n", "radial"),
        ("order", "schema = 1\nkind = \"cm\"\nn = 2\nj = 3\n[measure]\npreset = \"area_ball\"\n", "[1, 2]"),
    ];
    for (name, body, needle) in cases {
        let spec = write_spec(&dir, &format!("{name}.toml"), body);
        let o = cmrev(&["validate", "--spec", spec.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(3), "{name}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{name}: {err}");
        let out = dir.path().join(name);
        assert_eq!(run("solve", &spec, &out, &[]).status.code(), Some(3), "{name}");
    }
}

#[test]
fn validate_accepts_and_subcommands_check_kind() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "ball.toml", BALL);
    assert_eq!(cmrev(&["validate", "--spec", spec.to_str().unwrap()]).status.code(), Some(0));
    let out = dir.path().join("out");
    assert_eq!(run("forward", &spec, &out, &[]).status.code(), Some(3));
    assert_eq!(diagnostics(&out)["status"], "invalid_spec");
    assert_eq!(run("solve", &spec, &out, &["--tol", "-1"]).status.code(), Some(3));
}

#[test]
fn exhausted_budget_exits_four() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "b.toml",
        "schema = 1\nkind = \"cm\"\nn = 2\nj = 1\n[measure]\npreset = \"area_ball\"\n[tolerance]\ntail_tol = 1e-300\nmax_subdivisions = 3\n",
    );
    let out = dir.path().join("out");
    assert_eq!(run("solve", &spec, &out, &[]).status.code(), Some(4));
    assert_eq!(diagnostics(&out)["status"], "error");
}

#[test]
fn outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(
        &dir,
        "c.toml",
        "schema = 1\nkind = \"roundtrip\"\nn = 2\nj = 1\n[measure]\npreset = \"cylinder\"\nlength = 0.75\n",
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("roundtrip", &spec, &a, &["--mesh"]).status.code(), Some(0));
    assert_eq!(run("roundtrip", &spec, &b, &["--mesh"]).status.code(), Some(0));
    for f in ["samples.csv", "meridian.csv", "mesh.obj", "cap_moments.csv", "diagnostics.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn numbers_use_seventeen_digits() {
    let dir = TempDir::new().unwrap();
    let spec = write_spec(&dir, "ball.toml", BALL);
    let out = dir.path().join("out");
    run("solve", &spec, &out, &[]);
    let text = fs::read_to_string(out.join("samples.csv")).unwrap();
    for field in text.lines().nth(5).unwrap().split(',') {
        let mantissa = field.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
        assert_eq!(mantissa.len(), 17, "{field}");
    }
}
