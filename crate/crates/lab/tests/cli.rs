use std::path::Path;
use std::process::Command;

const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");

fn wkbflow(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_wkbflow")).args(args).env("WKBFLOW_THREADS", "2").output().expect("binary runs")
}

fn config(name: &str) -> String {
    format!("{CONFIGS}/{name}")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let head = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect()).collect();
    (head, rows)
}

#[test]
fn rest_state_keeps_every_diagnostic_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = wkbflow(&["run-base", "--config", &config("rest.toml"), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (head, rows) = read_csv(&dir.path().join("base.csv"));
    assert_eq!(head, ["t", "mass", "momentum", "energy", "circulation"]);
    assert_eq!(rows.len(), 5);
    assert!((rows.last().unwrap()[0] - 1.0).abs() < 1e-12);
    for row in &rows {
        for (c, (v, v0)) in row.iter().zip(&rows[0]).enumerate().skip(1) {
            assert!((v - v0).abs() <= 1e-12 * v0.abs().max(1.0), "column {} drifted: {v} vs {v0}", head[c]);
        }
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "ok");
    assert_eq!(report["steps"], 20);
    assert_eq!(report["snapshots"].as_array().unwrap().len(), 2);
}

#[test]
fn runs_are_bitwise_reproducible() {
    let csvs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let out = wkbflow(&["run-reduced", "--config", &config("wave_packet.toml"), "--out", dir.path().to_str().unwrap()]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            std::fs::read(dir.path().join("reduced.csv")).unwrap()
        })
        .collect();
    assert!(!csvs[0].is_empty());
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn extended_run_writes_periodic_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = wkbflow(&["run-extended", "--config", &config("wave_train_2d.toml"), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (head, rows) = read_csv(&dir.path().join("extended.csv"));
    assert!(head.contains(&"wave_action_mean".to_string()));
    let i = head.iter().position(|h| h == "mass").unwrap();
    let m0 = rows[0][i];
    assert!(rows.iter().all(|r| (r[i] - m0).abs() < 1e-10 * m0));
    assert!(std::fs::read_dir(dir.path().join("snapshots")).unwrap().count() >= 2);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(config("rest.toml")).unwrap().replace("dt = 0.05", "dt = 0.05\nsteps = 3");
    std::fs::write(&cfg, text).unwrap();
    let out = wkbflow(&["run-base", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("steps"));
}

#[test]
fn invalid_thread_count_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_wkbflow"))
        .args(["check", "operators"])
        .env("WKBFLOW_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_suite_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = wkbflow(&["check", "operators", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports[0]["suite"], "operators");
    assert_eq!(reports[0]["passed"], true);
    assert!(dir.path().join("check_operators.json").exists());
}

#[test]
fn compare_and_convergence_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = wkbflow(&["compare", "--config", &config("wave_packet.toml"), "--out", d, "--eps", "0.0625,0.03125"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["points"].as_array().unwrap().len(), 2);
    assert!(report["slope"].as_f64().unwrap() > 0.8);
    assert!(dir.path().join("compare.csv").exists());

    let out = wkbflow(&["convergence", "--config", &config("wave_packet.toml"), "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let slope = report["invariance_slope"].as_f64().unwrap();
    assert!((0.7..1.5).contains(&slope), "invariance slope {slope}");
    assert!(dir.path().join("convergence.json").exists());
}

#[test]
fn compare_output_does_not_depend_on_thread_count() {
    let csvs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|threads| {
            let dir = tempfile::tempdir().unwrap();
            let out = Command::new(env!("CARGO_BIN_EXE_wkbflow"))
                .args(["compare", "--config", &config("wave_packet.toml"), "--eps", "0.0625,0.03125"])
                .args(["--out", dir.path().to_str().unwrap()])
                .env("WKBFLOW_THREADS", threads)
                .output()
                .unwrap();
            assert!(out.status.success());
            std::fs::read(dir.path().join("compare.csv")).unwrap()
        })
        .collect();
    assert_eq!(csvs[0], csvs[1]);
}
