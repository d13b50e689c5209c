use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn mockq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mockq"))
        .args(args)
        .env_remove("MOCKQ_SEED")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"a": 2.0, "d": 0.5, "levels": 3, "seed": 11}"#).unwrap();
    let out = tmp.path().join("run");
    let o = mockq(&["spectrum", "--config", cfg.to_str().unwrap(), "--d", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out);
    assert_eq!(m["config"]["a"], 2.0);
    assert_eq!(m["config"]["d"], 2.0);
    assert_eq!(m["config"]["levels"], 3);
    assert_eq!(m["config"]["hbar"], 1.0);
    assert_eq!(m["seed"], 11);
    assert_eq!(m["command"], "spectrum");
    let text = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("n,re_E,im_E,residual\n"));
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    fs::write(&cfg, r#"{"alpha": 1}"#).unwrap();
    let o = mockq(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpha: unknown key"), "{}", stderr(&o));
}

#[test]
fn invalid_values_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = mockq(&["lv", "mock", "--a", "-1", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("a: must be > 0, got -1"), "{}", stderr(&o));
    let o = mockq(&["spectrum", "--levels", "two"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mockq(&["spectrum", "--no-such-flag", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_with_one_and_a_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = mockq(&["variety", "--input", "/nonexistent/views.csv", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("io_not_found: /nonexistent/views.csv"), "{}", stderr(&o));
    let o = mockq(&["spectrum", "--points", "100", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("invalid_grid:"), "{}", stderr(&o));
    let o = mockq(&["spectrum", "--spec", "full-lv", "--hbar", "4", "--points", "256", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("multiplier_overflow:"), "{}", stderr(&o));
}

#[test]
fn manifest_digests_match_files() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("views.csv");
    fs::write(&input, "element_id,v1,v2\n0,0,0\n1,3,4\n").unwrap();
    let out = tmp.path().join("run");
    let o = mockq(&["variety", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = manifest(&out);
    for (name, digest) in m["outputs"].as_object().unwrap() {
        let bytes = fs::read(out.join(name)).unwrap();
        assert_eq!(digest.as_str().unwrap(), hex::encode(Sha256::digest(&bytes)), "{name}");
    }
    let key = input.display().to_string();
    assert_eq!(m["inputs"][&key], hex::encode(Sha256::digest(fs::read(&input).unwrap())));
    let text = fs::read_to_string(out.join("variety.csv")).unwrap();
    assert!(text.contains("discrete_variety,2.5000000000000000e1"), "{text}");
    for key in ["tool", "version", "git_describe", "wall_time_s"] {
        assert!(!m[key].is_null(), "{key}");
    }
}

#[test]
fn density_input_gives_fisher_information() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("rho.csv");
    let n = 256;
    let mut text = String::from("x,rho\n");
    for i in 0..n {
        let x = -12.0 + 24.0 * i as f64 / n as f64;
        text += &format!("{x},{}\n", (-x * x / 2.0).exp());
    }
    fs::write(&input, text).unwrap();
    let out = tmp.path().join("run");
    let o = mockq(&["variety", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("variety.csv")).unwrap();
    let value: f64 = csv
        .lines()
        .find_map(|l| l.strip_prefix("continuum_variety,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 1.0).abs() < 1e-8, "{value}");
}

#[test]
fn seed_comes_from_the_environment_last() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, seed_flag: Option<&str>| {
        let out = tmp.path().join(dir);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mockq"));
        cmd.args(["langevin", "--steps", "50", "--out", out.to_str().unwrap()]).env("MOCKQ_SEED", "5");
        if let Some(s) = seed_flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.output().unwrap().status.success());
        manifest(&out)
    };
    assert_eq!(run("env", None)["seed"], 5);
    assert_eq!(run("flag", Some("9"))["seed"], 9);
}

#[test]
fn scaling_reads_a_column() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("field.csv");
    // Linear ramp: D2(l) = l^2, exponent 2.
    let mut text = String::from("t,value\n");
    for i in 0..4096 {
        text += &format!("{i},{}\n", 0.01 * i as f64);
    }
    fs::write(&input, text).unwrap();
    let out = tmp.path().join("run");
    let o = mockq(&["hydro", "scaling", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("summary.csv")).unwrap();
    let c: f64 = csv.lines().find_map(|l| l.strip_prefix("exponent,")).unwrap().parse().unwrap();
    assert!((c - 2.0).abs() < 1e-9, "{c}");
}
