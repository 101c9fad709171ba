use nilmap_cli::{run, Output};
use serde_json::Value;

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn nilmap(args: &[&str]) -> Output {
    run(std::iter::once("nilmap").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (u8, Value) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let out = nilmap(&full);
    let v = serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", out.stdout));
    (out.code, v)
}

#[test]
fn every_example_verifies() {
    for k in 1..=5 {
        let k = k.to_string();
        let out = nilmap(&["verify-example", &k]);
        assert_eq!(out.code, 0, "example {k}:\n{}{}", out.stdout, out.stderr);
        assert!(!out.stdout.contains("FAIL"), "{}", out.stdout);
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(nilmap(&["no-such-command"]).code, 2);
    assert_eq!(nilmap(&["verify-example", "6"]).code, 2);
    assert_eq!(nilmap(&["orbit", &data("example3.map"), "--start", "1,2,3"]).code, 2);
    assert_eq!(nilmap(&["check-unipotent", &data("missing.map")]).code, 2);
    let (code, v) = json(&["invert", &data("example3.map"), "--point", "1,2"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "error");
    assert!(v["error"].is_string());
}

#[test]
fn help_exits_0() {
    let out = nilmap(&["--help"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.contains("verify-example"));
}

#[test]
fn unipotence_verdicts() {
    let (code, v) = json(&["check-unipotent", &data("example3.map")]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "ok");
    let (code, v) = json(&["check-unipotent", &data("double.map")]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "negative");
    assert_eq!(v["verdict"], "ProvenNot");
    let (code, v) = json(&["check-unipotent", &data("example1.map")]);
    assert_eq!(code, 0);
    assert_eq!(v["seed"], 42);
}

#[test]
fn seed_controls_sampled_runs() {
    let a = nilmap(&["--seed", "7", "--format", "json", "spectral", &data("example3.map"), "--samples", "20"]);
    let b = nilmap(&["--seed", "7", "--format", "json", "spectral", &data("example3.map"), "--samples", "20"]);
    let c = nilmap(&["--seed", "8", "--format", "json", "spectral", &data("example3.map"), "--samples", "20"]);
    assert_eq!(a, b);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn exact_inverse_of_escaping_orbit_map() {
    // f(1, 2, 3) = (1 + 3 phi(7), 2 - phi(7), 3) with phi = -t^2.
    let (code, v) = json(&["invert", &data("example3.map"), "--point", "-146,51,3"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["report"]["point"], serde_json::json!(["1", "2", "3"]));
}

#[test]
fn orbit_csv_layout() {
    let out = nilmap(&["orbit", &data("example5_h.map"), "--iterate", "--start", "1,0,0", "--steps", "3"]);
    assert_eq!(out.code, 0);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "t,x1,x2,x3,norm");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,1,0,0,"));
    let out = nilmap(&["orbit", &data("example3.map"), "--flow", "--start", "18,-12,1", "--steps", "100"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.stdout.lines().count(), 102);
}

#[test]
fn strong_nilpotence_and_triangularization() {
    let (code, _) = json(&["check-strong-nilpotence", &data("triangular.map")]);
    assert_eq!(code, 0);
    let (code, v) = json(&["triangularize", &data("triangular.map")]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["report"]["S"][0], serde_json::json!(["0", "0", "1"]));
    // Unipotent, but the 2x2 block of J(h) is rank one with a z-dependent kernel.
    let (code, v) = json(&["check-strong-nilpotence", &data("example3.map")]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "NotStrong");
    let (code, _) = json(&["triangularize", &data("example3.map")]);
    assert_eq!(code, 1);
}

#[test]
fn newclass_recipe_builds() {
    let out = nilmap(&["build-newclass", &data("example3.recipe")]);
    assert_eq!(out.code, 0, "{}{}", out.stdout, out.stderr);
    assert!(out.stdout.contains("dim 3;"));
}

#[test]
fn planar_and_infinity() {
    let (code, v) = json(&["planar-extract", &data("planar.map")]);
    assert_eq!(code, 0, "{v}");
    let (code, v) = json(&["infinity-check", &data("planar.map")]);
    assert_eq!(code, 1, "{v}");
    let (code, v) = json(&["infinity-check", &data("randall.map")]);
    assert_eq!(code, 0, "{v}");
}

#[test]
fn unique_fixed_point() {
    let (code, v) = json(&["unique-fixed-point", &data("affine.map")]);
    assert_eq!(code, 0, "{v}");
    let (code, _) = json(&["fixed-points", &data("randall.map"), "--starts", "20"]);
    assert_eq!(code, 0);
}
