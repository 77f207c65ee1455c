use std::path::Path;
use std::process::{Command, Output};

fn moebius(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moebius")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const VERDICTS: [&str; 6] = [
    "moebius-isotropic",
    "branch-1-sphere",
    "branch-2-euclidean",
    "branch-3-hyperbolic",
    "branch-4-LS",
    "not-classified",
];

#[test]
fn classify_ls_example_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("ls.json");
    let out = moebius(&["classify", "--example", "ls-1-0-sqrt3-0", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&json);
    assert_eq!(r["verdict"], "branch-4-LS");
    assert_eq!(r["name"], "ls-1-0-sqrt3-0");
    assert_eq!(r["samples"], 16);
    assert_eq!(r["order"], 5);
    assert_eq!(r["seed"], 42);
    let spectrum = r["spectrum"].as_array().unwrap();
    assert_eq!(spectrum.len(), 2);
    assert!((spectrum[0]["value"].as_f64().unwrap() + 1.0 / 6.0).abs() < 1e-5);
    assert_eq!(spectrum[1]["multiplicity"], 2);
    for key in ["c_norm", "parallel_residual", "residuals", "tolerances"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert!(r.get("witness").is_none());
}

#[test]
fn emitted_spec_classifies_like_the_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spheres.json");
    let json = dir.path().join("report.json");
    let out = moebius(&["gallery", "emit", "product-spheres-s4", "--out", spec.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let out = moebius(&["classify", "--spec", spec.to_str().unwrap(), "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = report(&json);
    assert_eq!(r["verdict"], "branch-1-sphere");
    assert_eq!(r["witness"]["causal_type"], "timelike");
    assert!((r["witness"]["a"].as_f64().unwrap() + 7.0 / 72.0).abs() < 1e-5);
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out =
            moebius(&["classify", "--example", "cylinder-sigma-s4", "--samples", "6", "--json", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r = report(&a);
    assert_eq!(r["verdict"], "branch-2-euclidean");
    assert_eq!(r["samples"], 6);
}

#[test]
fn every_builtin_yields_a_known_verdict_or_input_error() {
    let list = moebius(&["gallery", "list"]);
    assert_eq!(code(&list), 0);
    let text = String::from_utf8(list.stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for name in text.lines().filter_map(|l| l.split_whitespace().next()) {
        let json = dir.path().join(format!("{name}.json"));
        let out = moebius(&["classify", "--example", name, "--samples", "4", "--json", json.to_str().unwrap()]);
        match code(&out) {
            2 => assert_eq!(name, "round-sphere-s4"),
            c => {
                let v = report(&json)["verdict"].as_str().unwrap().to_string();
                assert!(VERDICTS.contains(&v.as_str()));
                assert_eq!(c == 0, v != "not-classified", "{name}");
            }
        }
    }
}

#[test]
fn umbilic_input_exits_with_two() {
    let out = moebius(&["classify", "--example", "round-sphere-s4"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("umbilic"));
}

#[test]
fn not_classified_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("t.json");
    let out = moebius(&["classify", "--example", "perturbed-torus-s3", "--json", json.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let r = report(&json);
    assert_eq!(r["verdict"], "not-classified");
    assert!(r["c_norm"].as_f64().unwrap() > 1e-3);
    assert!(!r["failures"].as_array().unwrap().is_empty());
    let out = moebius(&["verify", "--example", "perturbed-torus-s3"]);
    assert_eq!(code(&out), 0, "identities hold even when classification fails");
}

#[test]
fn bad_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"name":"x","ambient":{"kind":"sphere","n":3,"c":1},"m":2,"coords":["sin(u1"],"domain":[[0,1],[0,1]]}"#,
    )
    .unwrap();
    let out = moebius(&["verify", "--spec", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("column 7"));
    assert_eq!(code(&moebius(&["verify", "--spec", "/nonexistent/spec.json"])), 2);
    assert_eq!(code(&moebius(&["classify", "--example", "no-such-example"])), 2);
    assert_eq!(code(&moebius(&["classify", "--example", "ls-1-0-sqrt3-0", "--samples", "0"])), 2);
    assert_eq!(code(&moebius(&["classify", "--example", "ls-1-0-sqrt3-0", "--order", "3"])), 2);
}

#[test]
fn json_to_stdout() {
    let out = moebius(&["verify", "--example", "clifford-torus-s3", "--samples", "3", "--json", "-"]);
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["verdict"], "moebius-isotropic");
}

#[test]
fn thread_cap_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_moebius"))
        .args(["classify", "--example", "clifford-torus-s3", "--samples", "4"])
        .env("MOEBIUS_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
}
