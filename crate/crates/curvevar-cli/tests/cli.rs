use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_curvevar"))
        .args(args)
        .env("CURVEVAR_THREADS", "2")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn energy_of_the_unit_sphere() {
    let v = json(&["energy", "--surface", "sphere:r=1", "--density", "willmore", "--k0", "0", "--grid", "32"]);
    assert_eq!(v["schema"], "curvevar/1");
    let w = v["value"].as_f64().unwrap();
    assert!((w - 4.0 * std::f64::consts::PI).abs() < 1e-10);
}

#[test]
fn sphere_stability_for_p3() {
    let v = json(&["sphere-stability", "--p", "3", "--r", "1", "--lmax", "5"]);
    assert!(v["l1_index"].as_f64().unwrap() < 0.0);
    assert_eq!(v["verdict"], "unstable in first eigenspace");
}

#[test]
fn evolution_of_gauss_curvature_on_the_torus() {
    let v = json(&[
        "verify-evolution",
        "--surface",
        "torus:R=2,a=1",
        "--quantity",
        "K",
        "--u",
        "random:seed=7",
    ]);
    let order = v["convergence_order"].as_f64().unwrap();
    assert!((order - 2.0).abs() < 0.1, "{order}");
    assert_eq!(v["passed"], true);
}

#[test]
fn output_is_deterministic() {
    let args = ["first-variation", "--surface", "torus:R=2,a=1", "--u", "random:seed=3", "--grid", "32"];
    assert_eq!(run(&args).1, run(&args).1);
}

#[test]
fn validation_errors_exit_with_one_and_name_the_flag() {
    let (code, _, err) = run(&["energy", "--u", "noise"]);
    assert_eq!(code, 1);
    assert!(err.contains("--u"), "{err}");
    let (code, _, err) = run(&["energy", "--surfce", "sphere"]);
    assert_eq!(code, 1);
    assert!(err.contains("--surfce"), "{err}");
    let (code, _, err) = run(&["energy", "--density", "elastic"]);
    assert_eq!(code, 1);
    assert!(err.contains("--density"), "{err}");
    let (code, _, err) = run(&["energy", "--config", "/nonexistent.json"]);
    assert_eq!(code, 1);
    assert!(err.contains("--config"), "{err}");
}

#[test]
fn second_variation_off_critical_needs_force() {
    let base = ["second-variation", "--surface", "torus:R=2,a=1", "--grid", "32"];
    let (code, _, err) = run(&base);
    assert_eq!(code, 1);
    assert!(err.contains("not critical"), "{err}");
    let mut forced = base.to_vec();
    forced.push("--force");
    let v = json(&forced);
    assert_eq!(v["second_variation"]["validity"], "formula outside stated validity");
}

#[test]
fn config_file_merges_with_flags() {
    let dir = std::env::temp_dir().join(format!("curvevar-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.json");
    std::fs::write(&path, r#"{"surface": "sphere:r=2", "density": "pwillmore", "p": 3, "grid": 32}"#).unwrap();
    let p = path.to_str().unwrap();
    let v = json(&["energy", "--config", p]);
    assert!((v["value"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    let v = json(&["energy", "--config", p, "--p", "1"]);
    assert!((v["value"].as_f64().unwrap() - 8.0 * std::f64::consts::PI).abs() < 1e-9);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn curvature_csv_has_one_row_per_node() {
    let (code, out, _) = run(&["curvature", "--surface", "torus:R=2,a=1", "--grid", "16", "--format", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "u,v,H,K,K_E,kappa1,kappa2");
    assert_eq!(lines.len(), 1 + 16 * 8);
}

#[test]
fn verify_all_reports_numerical_failure_with_two() {
    let (code, _, err) = run(&["verify-all", "--only", "1,11"]);
    assert_eq!(code, 2);
    assert!(err.contains("criterion  1 PASS"), "{err}");
    assert!(err.contains("criterion 11 FAIL"), "{err}");
}
