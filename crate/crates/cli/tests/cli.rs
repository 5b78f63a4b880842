use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcc")).args(args).output().expect("spawn qcc")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/example4q.qc")
}

fn report(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn compile_with_preset_and_pass_list() {
    let fig = fixture();
    let r = report(&qcc(&["compile", fig.to_str().unwrap(), "--preset", "o1"]));
    assert!(r["two_qubit_gates"].as_u64().unwrap() >= 4);
    assert_eq!(r["executable"], true);

    let dir = tempfile::tempdir().unwrap();
    let out = qcc(&[
        "compile",
        fig.to_str().unwrap(),
        "--passes",
        "translate;merge_rz;layout_fixed=3,2,4,1;route",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let r = report(&out);
    assert_eq!(r["two_qubit_gates"], 7);
    assert_eq!(r["swaps"], 1);
    assert!(dir.path().join("compiled.qc").exists());
    assert_eq!(fs::read(dir.path().join("report.json")).unwrap(), out.stdout);
}

#[test]
fn missing_device_file_is_a_parse_error() {
    let fig = fixture();
    let out = qcc(&["compile", fig.to_str().unwrap(), "--device", "no_such_device.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ParseError"));
}

#[test]
fn bad_pass_list_is_a_validation_error() {
    let fig = fixture();
    let out = qcc(&["compile", fig.to_str().unwrap(), "--passes", "translate;frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ValidationError"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(qcc(&[]).status.code(), Some(1));
    assert_eq!(qcc(&["compile"]).status.code(), Some(1));
    assert_eq!(qcc(&["--help"]).status.code(), Some(0));
}

#[test]
fn train_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = qcc(&["train", "--epochs", "1", "--preset", "o1", "--seed", "5", "--out", d.path().to_str().unwrap()]);
        let s = report(&out);
        assert!(s["first_best_kl"].as_f64().unwrap() <= std::f64::consts::LN_2 + 1e-9);
    }
    let csv = fs::read_to_string(a.path().join("training.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    for f in ["training.csv", "compiled.qc", "summary.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn experiment_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"instance": {"layers": 1}, "baseline": {"num_runs": 3},
            "search": {"strategy": {"kind": "beam", "width": 2}, "random_layouts": 1, "max_steps": 8},
            "training": {"epochs": 3}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("bundle");
    let out = qcc(&["experiment", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    let s = report(&out);
    assert_eq!(s["num_runs"], 3);
    let m: serde_json::Value = serde_json::from_slice(&fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    let curves = m["curves"].as_array().unwrap();
    assert_eq!(curves.iter().filter(|c| c["kind"] == "baseline").count(), 3);
    assert_eq!(curves.iter().filter(|c| c["kind"] == "search").count(), 1);

    let v = qcc(&["verify", out_dir.to_str().unwrap()]);
    assert!(v.status.success());
    assert!(String::from_utf8_lossy(&v.stdout).starts_with("ok:"));

    fs::write(out_dir.join("spread.csv"), "nope\n").unwrap();
    assert_ne!(qcc(&["verify", out_dir.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"epochs": 3}"#).unwrap();
    let out = qcc(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn device_show_prints_json() {
    let out = qcc(&["device", "show", "quito"]);
    let d = report(&out);
    assert_eq!(d["num_qubits"], 5);
}
