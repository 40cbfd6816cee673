use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dymlab"))
}

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{name}"));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const SIGNATURE: &str = r#"{"schema_version": 1, "command": {"name": "signature", "y": -12.0, "t": 1.0,
    "re_range": [-3.0, 3.0], "im_range": [-3.0, 3.0], "n_re": 100, "n_im": 100}}"#;

#[test]
fn signature_run_writes_table_and_manifest() {
    let d = scratch("signature");
    let cfg = d.join("cfg.json");
    fs::write(&cfg, SIGNATURE).unwrap();
    let out = run(&["signature", "--config", cfg.to_str().unwrap(), "--out", d.join("out").to_str().unwrap(), "--threads", "2", "--seed", "9"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.join("out/signature.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re_lambda,im_lambda,sign"));
    assert_eq!(lines.count(), 10_000);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], true);
    assert_eq!(manifest["seed"], 9);
    let hash = run(&["hash", "--config", cfg.to_str().unwrap()]);
    assert_eq!(String::from_utf8_lossy(&hash.stdout).trim(), manifest["config_hash"].as_str().unwrap());
}

#[test]
fn empty_spectrum_gives_zero_field() {
    let d = scratch("soliton");
    let cfg = d.join("cfg.json");
    fs::write(&cfg, r#"{"schema_version": 1, "out_dir": "OUT", "command": {"name": "soliton", "poles": [], "norming": [], "y_range": [-4.0, 4.0], "n": 9, "times": [0.0, 3.0]}}"#.replace("OUT", d.join("out").to_str().unwrap())).unwrap();
    let out = run(&["soliton", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(d.join("out/soliton_field.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let q: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert_eq!(q, 0.0);
    }
}

#[test]
fn failing_invariant_exits_one() {
    let d = scratch("fail");
    let cfg = d.join("cfg.json");
    fs::write(&cfg, SIGNATURE.replace(r#""n_im": 100"#, r#""n_im": 100, "agreement_tol": 1e-300"#)).unwrap();
    let out = run(&["signature", "--config", cfg.to_str().unwrap(), "--out", d.join("out").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], false);
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let d = scratch("bad");
    let cfg = d.join("cfg.json");
    fs::write(&cfg, SIGNATURE.replace(r#""t": 1.0"#, r#""t": -1.0"#)).unwrap();
    let out = run(&["signature", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("command.t"));
    // config written for another command
    fs::write(&cfg, SIGNATURE).unwrap();
    let out = run(&["scatter", "--config", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // unknown artifact
    let art = d.join("weird.json");
    fs::write(&art, r#"{"artifact": "histogram"}"#).unwrap();
    let out = run(&["emit", art.to_str().unwrap(), "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("histogram"));
}

#[test]
fn scatter_run_is_byte_reproducible() {
    let d = scratch("scatter");
    let cfg = d.join("cfg.json");
    fs::write(
        &cfg,
        r#"{"schema_version": 1, "command": {"name": "scatter",
            "profile": {"family": {"family": "gaussian_second_derivative", "components": [{"amplitude": 0.3, "center": 0.0, "width": 1.0}]},
                        "x_min": -15.0, "x_max": 15.0, "n": 1501},
            "grid": {"lambda_max": 3.0, "half_points": 20}}}"#,
    )
    .unwrap();
    for (sub, threads) in [("a", "1"), ("b", "3")] {
        let out = run(&["scatter", "--config", cfg.to_str().unwrap(), "--out", d.join(sub).to_str().unwrap(), "--threads", threads]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["scattering.csv", "artifact.json", "manifest.json"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
}
