use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn manifests() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../manifests")
}

fn conelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(args)
        .env_remove("CONELAB_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

/// Compares against `tests/golden/<name>`; set `UPDATE_GOLDEN=1` to rewrite.
fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "report differs from {}", path.display());
}

#[test]
fn sphere_cone_is_flat() {
    let path = manifests().join("sphere_cone.toml");
    let out = conelab(&["check", "--no-timing", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    let flat = &report["checks"][0];
    assert_eq!(flat["name"], "flatness");
    assert!(flat["residuals"]["max_curvature"].as_f64().unwrap() < 1e-6);
    assert_eq!(flat["tolerances"]["max_curvature"].as_f64(), Some(1e-6));
    assert_eq!(report["source"], "sphere_cone.toml");
    golden("check_sphere_cone.json", &stdout(&out));
}

#[test]
fn every_manifest_passes() {
    for entry in std::fs::read_dir(manifests()).unwrap() {
        let path = entry.unwrap().path();
        let out = conelab(&["check", "--no-timing", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), stdout(&out));
    }
}

#[test]
fn berger_lists_g2() {
    let out = conelab(&["berger", "--signature", "0,7", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let table: Vec<String> = serde_json::from_value(json(&out)["table"].clone()).unwrap();
    assert!(table.contains(&"g₂ ⊂ so(7)".to_string()), "{table:?}");
    golden("berger_0_7.json", &stdout(&out));
}

#[test]
fn radial_geodesic_escapes_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = conelab(&["geodesic", "--r0", "1", "--a", "-1", "--c", "0", "--no-timing", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    assert_eq!(report["checks"][0]["details"]["T"], "1");
    assert_eq!(report["checks"][0]["details"]["case"], "null-tangent");
    golden("geodesic_radial.json", &stdout(&out));
    let table = std::fs::read_to_string(csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("t,r,theta,v_r,v_theta"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 1.0, 0.0, -1.0, 0.0]);
}

#[test]
fn time_like_base_uses_t_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = conelab(&["geodesic", "--r0", "1", "--a", "0.5", "--c", "-1", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("t,r,t,v_r,v_t\n"));
}

#[test]
fn reports_are_byte_stable() {
    let path = manifests().join("horosphere_cone.toml");
    let args = ["check", "--no-timing", "--seed", "7", path.to_str().unwrap()];
    let (a, b) = (conelab(&args), conelab(&args));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 7);
}

#[test]
fn seed_precedence() {
    let path = manifests().join("product.toml");
    let p = path.to_str().unwrap();
    // no seed line in the manifest: the environment applies
    let out = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(["check", "--no-timing", p])
        .env("CONELAB_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 1234);
    let out = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(["check", "--no-timing", "--seed", "5", p])
        .env("CONELAB_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 5);
    // the sphere manifest sets its own seed
    let sphere = manifests().join("sphere_cone.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_conelab"))
        .args(["check", "--no-timing", sphere.to_str().unwrap()])
        .env("CONELAB_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(json(&out)["seed"], 42);
    assert_eq!(json(&conelab(&["berger", "--signature", "1,3"]))["seed"], 42);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curved.toml");
    std::fs::write(
        &path,
        "coordinates = [theta in (0, pi), phi]\nmetric = [[1, 0], [0, sin(theta)^2]]\ncheck flatness()\n",
    )
    .unwrap();
    let out = conelab(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["checks"][0]["status"], "fail");
    assert!(report["checks"][0]["wall_time_ms"].is_number());
    assert_eq!(report["summary"]["failed"], 1);
}

#[test]
fn tolerance_override_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.toml");
    std::fs::write(&path, "coordinates = [x, y]\nmetric = [[1, 0], [0, 1]]\ncheck flatness()\ncheck cross_mode(tol = 1e-3)\n")
        .unwrap();
    let out = conelab(&["check", "--tol", "1e-4", "--no-timing", path.to_str().unwrap()]);
    let report = json(&out);
    assert_eq!(report["checks"][0]["tolerances"]["max_curvature"].as_f64(), Some(1e-4));
    assert_eq!(report["checks"][1]["tolerances"]["christoffel"].as_f64(), Some(1e-3));
}

#[test]
fn undetermined_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h.toml");
    // one probe of hyperbolic space fixes an axis that held-out elements rotate
    std::fs::write(
        &path,
        "coordinates = [x, y, z]\nmetric = [[1, 0, 0], [0, exp(2*x), 0], [0, 0, exp(2*x)]]\ncheck holonomy(probes = 1)\n",
    )
    .unwrap();
    let out = conelab(&["check", "--no-timing", path.to_str().unwrap()]);
    let report = json(&out);
    assert_eq!(report["checks"][0]["status"], "undetermined", "{report}");
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn manifest_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("coordinates = [x, y]\nmetric = [[1, x], [y, 1]]\n", "metric entry (1,2) `x` does not match (2,1) `y`"),
        ("coordinates = [x, y]\nmetric = [[1, 0], [0, 1 +]]\n", "2:26: expected"),
        ("coordinates = [x, y]\nmetric = [[1, 0], [0, w]]\n", "2:23: unknown identifier `w`"),
        ("coordinates = [x]\nmetric = [[1]]\ncheck nonsense()\n", "unknown check `nonsense`"),
        ("coordinates = [x]\nmetric = [[1]]\ncheck flatness(sample = 3)\n", "does not take `sample`"),
    ];
    for (k, (text, message)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{k}.toml"));
        std::fs::write(&path, text).unwrap();
        let out = conelab(&["check", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(stderr(&out).contains(message), "{text}: {}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(conelab(&["geodesic", "--r0", "1", "--a", "1", "--c", "2"]).status.code(), Some(2));
    assert_eq!(conelab(&["spin", "--signature", "7,4"]).status.code(), Some(2));
    assert_eq!(conelab(&["spin", "--signature", "seven"]).status.code(), Some(2));
    assert_eq!(conelab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(conelab(&["check", "/definitely/not/here.toml"]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = conelab(&["berger", "--signature", "1,3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(report["command"], "berger");
}

#[test]
fn spin_and_split_pass() {
    let out = conelab(&["spin", "--signature", "1,4", "--trials", "2000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let report = json(&out);
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["clifford", "causality", "equivariance", "killing_warps"]);
    for ex in ["cosh", "horosphere"] {
        let out = conelab(&["split", "--example", ex]);
        assert_eq!(out.status.code(), Some(0), "{ex}: {}", stdout(&out));
    }
}

#[test]
fn holonomy_command_at_a_point() {
    let path = manifests().join("product.toml");
    let out = conelab(&["holonomy", path.to_str().unwrap(), "--point", "1.0,0.5,-0.2", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["checks"][0]["details"]["classification"], "decomposable");
    let out = conelab(&["holonomy", path.to_str().unwrap(), "--point", "4.0,0.5,0"]);
    assert_eq!(out.status.code(), Some(2));
}
