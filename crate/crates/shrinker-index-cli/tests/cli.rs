use std::f64::consts::E;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use shrinker_index::geometry::ProfileCurve;
use shrinker_index::profiles::circle_profile;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrinker-index"))
        .args(args)
        .env_remove("SHRINKER_INDEX_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_owned()
}

/// Shot torus at a coarse step, written to `dir/profile.json`.
fn shoot_torus(dir: &Path) -> String {
    let out = run(&["profile", "--shoot", "--n", "2", "--bracket", "0.3:2.5", "--h", "4e-3", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    p(dir, "profile.json")
}

#[test]
fn sphere_profile_matches_golden() {
    let dir = TempDir::new().unwrap();
    let out = run(&["profile", "--kind", "sphere", "--n", "2", "--h", "0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let written = read_json(&dir.path().join("profile.json"));
    let golden: Value =
        serde_json::from_str(include_str!("golden/sphere_h0.5.json")).unwrap();
    assert_eq!(written["schema"], "shrinker-index/profile/v1");
    for key in ["closed", "n", "m"] {
        assert_eq!(written[key], golden[key]);
    }
    assert!((written["h"].as_f64().unwrap() - golden["h"].as_f64().unwrap()).abs() < 1e-15);
    let (a, b) = (written["points"].as_array().unwrap(), golden["points"].as_array().unwrap());
    assert_eq!(a.len(), b.len());
    for (pa, pb) in a.iter().zip(b) {
        for i in 0..3 {
            assert!((pa[i].as_f64().unwrap() - pb[i].as_f64().unwrap()).abs() < 1e-14);
        }
    }
    for f in ["profile.svg", "profile.csv"] {
        assert!(dir.path().join(f).exists());
    }
    assert!(fs::read_to_string(dir.path().join("profile.svg")).unwrap().contains("<svg"));
}

#[test]
fn profile_round_trips_bitwise() {
    let dir = TempDir::new().unwrap();
    let out = run(&["profile", "--kind", "sphere", "--h", "1e-2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let residual = stdout(&out)
        .rsplit("residual ")
        .next()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .unwrap();
    assert!(residual < 1e-10);
    let text = fs::read_to_string(dir.path().join("profile.json")).unwrap();
    let curve = ProfileCurve::from_json(&text).unwrap();
    let again = ProfileCurve::from_json(&curve.to_json()).unwrap();
    assert_eq!(curve, again);
}

#[test]
fn plane_profile_touches_no_axis() {
    let dir = TempDir::new().unwrap();
    let out = run(&["profile", "--kind", "plane", "--h", "0.05", "--half-length", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let v = read_json(&dir.path().join("profile.json"));
    assert_eq!(v["closed"], false);
}

#[test]
fn validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    let missing = p(dir.path(), "nope.json");
    for args in [
        vec!["profile", "--kind", "torus", "--out", d],
        vec!["profile", "--kind", "sphere", "--h", "-1", "--out", d],
        vec!["profile", "--kind", "sphere", "--n", "1", "--out", d],
        vec!["profile", "--shoot", "--bracket", "0.3-2.5", "--out", d],
        vec!["profile", "--kind", "sphere", "--schedule", "4,2", "--out", d],
        vec!["spectrum", "--profile", &missing, "--out", d],
        vec!["certify", "--profile", &missing, "--out", d],
        vec!["entropy", "--profile", &missing, "--out", d],
        vec!["--threads", "0", "profile", "--kind", "sphere", "--out", d],
    ] {
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn empty_k_list_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["profile", "--kind", "sphere", "--h", "1e-2", "--out", d])), 0);
    let prof = p(dir.path(), "profile.json");
    assert_eq!(code(&run(&["spectrum", "--profile", &prof, "--k", ",", "--out", d])), 2);
    assert_eq!(code(&run(&["spectrum", "--profile", &prof, "--count", "0", "--out", d])), 2);
}

#[test]
fn help_documents_exit_codes() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for line in ["0  success", "2  validation", "3  shooting", "4  eigensolver", "5  certificate"] {
        assert!(text.contains(line), "missing '{line}'");
    }
}

#[test]
fn shooting_failure_exits_3() {
    let dir = TempDir::new().unwrap();
    // no sign change of the return angle inside this bracket
    let out = run(&["profile", "--shoot", "--bracket", "1.6:1.7", "--h", "1e-2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn torus_pipeline() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let prof = shoot_torus(&d.join("t"));
    let shooting = read_json(&d.join("t/shooting.json"));
    assert_eq!(shooting["schema"], "shrinker-index/shooting/v1");
    assert!((shooting["r_star"].as_f64().unwrap() - 0.4371239671).abs() < 1e-8);

    let spec = run(&["spectrum", "--profile", &prof, "--k", "0,1", "--out", &p(d, "s")]);
    assert_eq!(code(&spec), 0);
    let text = stdout(&spec);
    assert!(text.contains("< -1") && text.contains("< -0.5"), "{text}");
    let sj = read_json(&d.join("s/spectrum.json"));
    let rows = sj["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["eigenvalues"][0].as_f64().unwrap() < -1.0);
    assert!(rows[1]["eigenvalues"][0].as_f64().unwrap() < -0.5);
    assert!(d.join("s/spectrum.svg").exists() && d.join("s/spectrum.csv").exists());

    let cert = run(&["certify", "--profile", &prof, "--out", &p(d, "c")]);
    assert_eq!(code(&cert), 0);
    assert!(stdout(&cert).contains("verdict: F-index >= 3"));
    let cj = read_json(&d.join("c/certificate.json"));
    assert_eq!(cj["index_lower_bound"], 3);

    let ent = run(&[
        "entropy",
        "--profile",
        &prof,
        "--witness",
        &p(d, "c/witnesses.json"),
        "--s-values",
        "-0.02,-0.01,0.01,0.02",
        "--out",
        &p(d, "e"),
    ]);
    assert_eq!(code(&ent), 0, "{}", String::from_utf8_lossy(&ent.stderr));
    let ej = read_json(&d.join("e/entropy.json"));
    assert_eq!(ej["schema"], "shrinker-index/entropy/v1");
    let v = &ej["variation"]["result"];
    assert_eq!(v["strictly_decreasing"], true);
    let lambda0 = v["lambda0"].as_f64().unwrap();
    for e in v["samples"].as_array().unwrap() {
        assert!(e["lambda"].as_f64().unwrap() < lambda0);
    }
    let csv = fs::read_to_string(d.join("e/entropy_variation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    // a witness file for another profile is refused
    let sphere_dir = d.join("sp");
    assert_eq!(code(&run(&["profile", "--kind", "sphere", "--h", "1e-2", "--out", sphere_dir.to_str().unwrap()])), 0);
    let other = run(&["entropy", "--profile", &p(&sphere_dir, "profile.json"), "--witness", &p(d, "c/witnesses.json"), "--out", &p(d, "e2")]);
    assert_eq!(code(&other), 2);
}

#[test]
fn certify_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let prof = shoot_torus(&d.join("t"));
    for run_dir in ["a", "b"] {
        assert_eq!(code(&run(&["certify", "--profile", &prof, "--seed", "7", "--out", &p(d, run_dir)])), 0);
    }
    for f in ["certificate.json", "witnesses.json"] {
        let a = fs::read(d.join("a").join(f)).unwrap();
        let b = fs::read(d.join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between runs");
    }
    // a different seed changes only the random trials
    assert_eq!(code(&run(&["certify", "--profile", &prof, "--seed", "8", "--out", &p(d, "c")])), 0);
    let (a, c) = (read_json(&d.join("a/certificate.json")), read_json(&d.join("c/certificate.json")));
    assert_eq!(a["margins"], c["margins"]);
    assert_ne!(a["trials"], c["trials"]);
}

#[test]
fn sphere_certificate_is_negative() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(&["profile", "--kind", "sphere", "--h", "4e-3", "--out", &p(d, "s")])), 0);
    let out = run(&["certify", "--profile", &p(d, "s/profile.json"), "--out", &p(d, "c")]);
    assert_eq!(code(&out), 5);
    let text = stdout(&out);
    assert!(text.contains("failing: H sign change"), "{text}");
    let cj = read_json(&d.join("c/certificate.json"));
    assert_eq!(cj["index_lower_bound"], 0);
}

#[test]
fn unit_circle_is_rejected() {
    let dir = TempDir::new().unwrap();
    let circle = circle_profile(0.0, 3.0, 1.0, 2, 1e-2).unwrap();
    let path = dir.path().join("circle.json");
    fs::write(&path, circle.to_json()).unwrap();
    let out = run(&["certify", "--profile", path.to_str().unwrap(), "--out", &p(dir.path(), "c")]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual"));
    assert!(!dir.path().join("c/certificate.json").exists());
}

#[test]
fn entropy_of_sphere_and_plane() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(&["profile", "--kind", "sphere", "--h", "1e-3", "--out", &p(d, "s")])), 0);
    let out = run(&["entropy", "--profile", &p(d, "s/profile.json"), "--out", &p(d, "es")]);
    assert_eq!(code(&out), 0);
    let lambda = read_json(&d.join("es/entropy.json"))["lambda"].as_f64().unwrap();
    assert!((lambda - 4.0 / E).abs() < 1e-5, "{lambda}");
    assert!(!d.join("es/entropy_variation.csv").exists());

    assert_eq!(code(&run(&["profile", "--kind", "plane", "--h", "1e-2", "--out", &p(d, "p")])), 0);
    let out = run(&["entropy", "--profile", &p(d, "p/profile.json"), "--out", &p(d, "ep")]);
    assert_eq!(code(&out), 0);
    let lambda = read_json(&d.join("ep/entropy.json"))["lambda"].as_f64().unwrap();
    assert!((lambda - 1.0).abs() < 1e-6, "{lambda}");

    let bad = run(&["entropy", "--profile", &p(d, "p/profile.json"), "--theta-points", "2", "--out", &p(d, "ep")]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn cylinder_spectrum_column_is_monotone() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(
        code(&run(&["profile", "--kind", "cylinder", "--h", "1e-2", "--half-length", "17", "--out", &p(d, "c")])),
        0
    );
    let out = run(&["spectrum", "--profile", &p(d, "c/profile.json"), "--k", "0", "--out", &p(d, "s")]);
    assert_eq!(code(&out), 0);
    let sweep = &read_json(&d.join("s/spectrum.json"))["sweeps"][0];
    let mu: Vec<f64> = sweep["mu1_values"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(mu.len() > 1);
    assert!(mu.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{mu:?}");
}
