use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use faces::formats::{read_report_rows, Layout};
use faces::ExperimentConfig;

fn faces(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faces")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let path = dir.join("input.json");
    fs::write(&path, json).unwrap();
    path
}

fn stage(stage: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![stage, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    faces(&args)
}

fn pipeline(config: &Path, out: &Path, extra: &[&str]) -> Vec<Output> {
    ["generate", "run", "estimate", "report"]
        .iter()
        .map(|s| {
            let o = stage(s, config, out, extra);
            assert_eq!(code(&o), 0, "{s}: {}", String::from_utf8_lossy(&o.stderr));
            o
        })
        .collect()
}

const SMALL: &str = r#"{"qubits": 2, "bins": 4, "circuits": {"count_z": 30, "count_x": 30}, "shots": 500, "seed": 3}"#;

#[test]
fn small_pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let config = write_config(dir.path(), SMALL);
    let outputs = pipeline(&config, &out, &[]);
    let summary = String::from_utf8_lossy(&outputs[3].stdout);
    assert!(summary.contains("median"), "{summary}");
    let layout = Layout::new(&out);
    for path in [
        layout.config(),
        layout.noise_model(),
        layout.circuits(),
        layout.design(),
        layout.manifest(),
        layout.report_csv(),
        layout.report_json(),
        layout.histogram_csv(),
        layout.histogram_json(),
        layout.summary(),
    ] {
        assert!(path.is_file(), "{}", path.display());
    }
    let rows = read_report_rows(&layout.report_csv()).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.rel_error.is_finite() && r.shots == "500"));
}

#[test]
fn single_shot_gives_one_count_per_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let json = r#"{"qubits": 2, "bins": 2, "circuits": {"count_z": 12, "count_x": 12}, "shots": 1, "seed": 4}"#;
    let config = write_config(dir.path(), json);
    assert_eq!(code(&stage("generate", &config, &out, &[])), 0);
    assert_eq!(code(&stage("run", &config, &out, &[])), 0);
    let layout = Layout::new(&out);
    let mut total = 0;
    for j in 0..24 {
        let text = fs::read_to_string(layout.shot_file(j)).unwrap();
        let counts: u64 = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
        assert_eq!(counts, 1, "circuit {j}");
        total += counts;
    }
    assert_eq!(total, 24);
}

#[test]
fn exact_probabilities_recover_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let config = write_config(dir.path(), SMALL);
    assert_eq!(code(&stage("generate", &config, &out, &[])), 0);
    assert_eq!(code(&stage("run", &config, &out, &["--exact-probabilities"])), 0);
    assert_eq!(code(&stage("estimate", &config, &out, &["--exact-probabilities"])), 0);
    let rows = read_report_rows(&Layout::new(&out).report_csv()).unwrap();
    assert!(rows.iter().all(|r| r.shots == "exact"));
    let worst = rows.iter().map(|r| r.rel_error).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn noiseless_pipeline_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let json = r#"{"qubits": 2, "bins": 4, "noise": {"kind": "noiseless"}, "circuits": {"count_z": 30, "count_x": 30}, "shots": 200}"#;
    let config = write_config(dir.path(), json);
    pipeline(&config, &out, &[]);
    let rows = read_report_rows(&Layout::new(&out).report_csv()).unwrap();
    assert!(rows.iter().all(|r| r.xi_true == 1.0 && r.xi_hat == 1.0 && r.rel_error == 0.0));
}

#[test]
fn missing_z_circuits_exit_with_identifiability_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let json = r#"{"qubits": 2, "bins": 2, "circuits": {"count_z": 0, "count_x": 20}}"#;
    let config = write_config(dir.path(), json);
    let o = stage("generate", &config, &out, &[]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!Layout::new(&out).design().exists());
}

#[test]
fn high_cutoff_exits_with_rank_loss_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let json = r#"{"qubits": 3, "bins": 4, "circuits": {"count_z": 40, "count_x": 40}, "shots": 100, "estimator": {"cutoff": 0.9}}"#;
    let config = write_config(dir.path(), json);
    assert_eq!(code(&stage("generate", &config, &out, &[])), 0);
    assert_eq!(code(&stage("run", &config, &out, &[])), 0);
    let o = stage("estimate", &config, &out, &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn estimate_without_run_reports_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let config = write_config(dir.path(), SMALL);
    assert_eq!(code(&stage("generate", &config, &out, &[])), 0);
    let o = stage("estimate", &config, &out, &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn saved_config_resumes_the_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let config = write_config(dir.path(), SMALL);
    assert_eq!(code(&stage("generate", &config, &out, &[])), 0);
    let saved = ExperimentConfig::load(&Layout::new(&out).config()).unwrap();
    assert_eq!(saved.qubits, 2);
    assert_eq!(saved.seed, 3);
    let out_arg = out.to_str().unwrap();
    for s in ["run", "estimate"] {
        assert_eq!(code(&faces(&[s, "--out", out_arg])), 0, "{s}");
    }
}

#[test]
fn seeded_run_matches_golden_files() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    let config = golden.join("config.json");
    pipeline(&config, &out, &["--workers", "2"]);
    let layout = Layout::new(&out);
    let files = [
        layout.config(),
        layout.noise_model(),
        layout.circuits(),
        layout.design(),
        layout.manifest(),
        layout.report_csv(),
        layout.histogram_csv(),
    ];
    let update = std::env::var_os("FACES_UPDATE_GOLDEN").is_some();
    for path in files {
        let name = path.file_name().unwrap();
        let expected_path = golden.join(name);
        let actual = fs::read(&path).unwrap();
        if update {
            fs::write(&expected_path, &actual).unwrap();
        } else {
            assert!(fs::read(&expected_path).unwrap() == actual, "{} differs", name.to_string_lossy());
        }
    }
}
