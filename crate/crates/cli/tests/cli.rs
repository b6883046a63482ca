use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn mereo(dir: &Path, cmd: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{cmd}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_mereo"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .output()
        .unwrap()
}

/// CSV body without the `#` provenance lines, parsed into header + rows.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let header = rdr.headers().unwrap().iter().map(String::from).collect();
    let rows = rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn unknown_config_field_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = mereo(dir.path(), "toy-abelian", r#"{"epsilon": [1.0]}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = mereo(dir.path(), "toy-factor", r#"{"schema_version": 99}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema_version"));
}

#[test]
fn mismatched_toy_lengths_are_rejected() {
    let dir = TempDir::new().unwrap();
    let o = mereo(dir.path(), "toy-abelian", r#"{"params": {"eps": [1.0, 2.0], "j": [1.0]}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn provenance_header_precedes_csv() {
    let dir = TempDir::new().unwrap();
    let o = mereo(dir.path(), "toy-factor", "{}", &["--seed", "9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# mereo toy-factor");
    assert_eq!(lines[1], "# schema_version: 1");
    assert!(lines[2].starts_with("# build: "));
    assert_eq!(lines[3], "# seed: 9");
    let cfg: serde_json::Value = serde_json::from_str(lines[4].strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(cfg["seed"], 9);
    assert!(!lines[5].starts_with('#'));
}

#[test]
fn toy_abelian_symmetric_site_is_a_quarter_turn() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"params": {"eps": [1.0], "j": [1.0]}, "deps": [1.0], "dj": [0.0]}"#;
    let o = mereo(dir.path(), "toy-abelian", cfg, &[]);
    assert!(o.status.success());
    let (h, rows) = table(&stdout(&o));
    let theta: f64 = rows[0][col(&h, "theta_min")].parse().unwrap();
    assert!((theta - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    let sigma: f64 = rows[0][col(&h, "sigma_s")].parse().unwrap();
    assert!(sigma < 1e-12);
}

#[test]
fn toy_abelian_zero_displacement_has_zero_metric() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"params": {"eps": [0.7, -0.2], "j": [0.4, 1.1]}, "deps": [0.0, 0.0], "dj": [0.0, 0.0]}"#;
    let o = mereo(dir.path(), "toy-abelian", cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r[col(&h, "metric_closed")].parse::<f64>().unwrap(), 0.0);
        assert!(r[col(&h, "metric_fd")].parse::<f64>().unwrap().abs() < 1e-12);
    }
}

#[test]
fn disorder_sweep_shape_and_zero_strength() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("d.csv");
    let cfg = r#"{"n_sites": 4, "n_steps": 3, "n_avg": 2, "delta": 0.0}"#;
    let o = mereo(dir.path(), "sweep-disorder", cfg, &["--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = table(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 7);
    for r in &rows {
        assert_eq!(r[col(&h, "mean_g")].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[col(&h, "n_realizations")], "2");
    }
    let endpoints: Vec<bool> = rows.iter().map(|r| r[col(&h, "endpoint")] == "true").collect();
    assert_eq!(endpoints, [true, false, false, false, false, false, true]);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["schema_version"], 1);
    assert_eq!(side["command"], "sweep-disorder");
    assert_eq!(side["result"]["rows"].as_array().unwrap().len(), 7);
}

#[test]
fn same_seed_same_bytes() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"n_sites": 4, "n_steps": 2, "n_avg": 2}"#;
    let run = |name: &str, seed: &str| -> (Vec<u8>, Vec<u8>) {
        let out: PathBuf = dir.path().join(name);
        let o = mereo(dir.path(), "sweep-disorder", cfg, &["--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        (std::fs::read(&out).unwrap(), std::fs::read(out.with_extension("json")).unwrap())
    };
    let a = run("a.csv", "5");
    let b = run("b.csv", "5");
    let c = run("c.csv", "6");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
}

#[test]
fn injected_kappa_fault_fails_metric_oracle() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"metric_algebras": 3, "nrc_samples": 256, "covariance_instances": 2, "inject": "kappa_sign"}"#;
    let o = mereo(dir.path(), "verify", cfg, &["--threads", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let (h, rows) = table(&stdout(&o));
    let failed: Vec<&str> = rows.iter().filter(|r| r[col(&h, "pass")] == "false").map(|r| r[0].as_str()).collect();
    assert!(failed.contains(&"metric_oracle"), "{failed:?}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("metric_oracle"));
}

#[test]
fn zero_threads_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = mereo(dir.path(), "toy-factor", "{}", &["--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
