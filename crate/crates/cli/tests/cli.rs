use std::path::Path;
use std::process::{Command, Output};

use otfs_core::montecarlo::SWEEP_CSV_HEADER;

const TINY: &str = r#"
[grid]
m = 2
n = 2

[channel]
paths = 2
l_max = 1
k_max = 1

[sim]
snr_db = [0.0, 10.0]
max_trials = 500
max_frame_errors = 20
seed = 4
"#;

fn otfs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otfs"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn missing_config_exits_2_with_path() {
    let o = otfs(&["sim", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/cfg.toml"));
}

#[test]
fn unknown_key_exits_2_naming_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("seed = 4", "seed = 4\nsnr = 3"));
    let o = otfs(&[
        "sim",
        "--config",
        &cfg,
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("snr"), "{}", stderr(&o));
}

#[test]
fn invalid_value_exits_2_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("l_max = 1", "l_max = 9"));
    let o = otfs(&[
        "sim",
        "--config",
        &cfg,
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("channel.l_max"), "{}", stderr(&o));
}

#[test]
fn infeasible_detector_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("m = 2\nn = 2", "m = 8\nn = 8"));
    let o = otfs(&[
        "sim",
        "--config",
        &cfg,
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn tiny_sim_writes_schema_exact_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("tiny.csv");
    let o = otfs(&[
        "sim",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], SWEEP_CSV_HEADER);
    assert_eq!(lines.len(), 3);
    for row in &lines[1..] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 9);
        assert_eq!(cols[8], "0");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("tiny.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["master_seed"], 4);
    assert_eq!(manifest["command"], "sim");
    assert_eq!(manifest["config"]["grid"]["m"], 2);
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("s.csv");
    let o = otfs(&[
        "sim",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "77",
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("s.manifest.json")).unwrap();
    assert!(text.contains("\"master_seed\": 77"));
}

#[test]
fn gain_requires_distances() {
    let o = otfs(&["gain"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gain_fig3_config_and_path_sweep() {
    let o = otfs(&["gain", "--d-e2", "4,8", "--budget", "5000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("d_e2,p,l_max,k_max,avg_gain_db,bound_db,cases,excluded\n"));
    assert_eq!(text.lines().count(), 3);

    let o = otfs(&["gain", "--d-e2", "8", "--paths", "2,4,6,8", "--budget", "2000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let bounds: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(5).unwrap().parse().unwrap())
        .collect();
    assert_eq!(bounds.len(), 4);
    assert!(bounds.windows(2).all(|w| w[1] < w[0]), "{bounds:?}");
}

#[test]
fn verify_reports_and_rejects_zero_cases() {
    let o = otfs(&["verify", "--cases", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = otfs(&["verify", "--cases", "300", "--seed", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("diagonal_equality yes"));
    assert!(text.contains("det_below_d_e2_pow_p"));
    assert!(text.contains("result PASS"));
}

#[test]
fn mindist_reference_codes_and_errors() {
    let o = otfs(&["mindist", "--code", "A"]);
    assert!(stdout(&o).contains("min_d_e2 12.0000"));
    assert!(stdout(&o).contains("d_free 3"));
    let o = otfs(&["mindist", "--code", "d"]);
    assert!(stdout(&o).contains("min_d_e2 40.0000"));
    let o = otfs(&["mindist", "--generators", "5,7"]);
    assert!(stdout(&o).contains("d_free 5"));
    let o = otfs(&["mindist", "--code", "Q"]);
    assert_eq!(o.status.code(), Some(2));
    let o = otfs(&["mindist", "--code", "C", "--frame-bits", "1"]);
    assert!(stdout(&o).contains("frame_limited yes"));
}

#[test]
fn channel_sample_lists_every_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let o = otfs(&["channel-sample", "--config", &cfg, "--count", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 5 * 2);
    assert_eq!(
        text,
        stdout(&otfs(&["channel-sample", "--config", &cfg, "--count", "5"]))
    );
}

#[test]
fn ofdm_and_manifest_rerun_match() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(otfs(&["ofdm", "--config", &cfg, "--out", a.to_str().unwrap()])
        .status
        .success());
    let manifest = dir.path().join("a.manifest.json");
    let o = otfs(&[
        "sim",
        "--from-manifest",
        manifest.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}
