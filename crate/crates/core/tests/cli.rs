use std::path::{Path, PathBuf};
use std::process::Command;

use orchid::output::RunManifest;

fn orchid() -> Command {
    Command::new(env!("CARGO_BIN_EXE_orchid"))
}

fn find(dir: &Path, prefix: &str, ext: &str) -> PathBuf {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            let name = p.file_name().unwrap().to_string_lossy();
            name.starts_with(prefix) && name.ends_with(ext)
        })
        .unwrap_or_else(|| panic!("no {prefix}*{ext} in {}", dir.display()))
}

fn column(csv_path: &Path, name: &str) -> Vec<f64> {
    let mut reader = csv::Reader::from_path(csv_path).unwrap();
    let idx = reader.headers().unwrap().iter().position(|h| h == name).unwrap();
    reader.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn no_arguments_prints_usage_and_exits_two() {
    let out = orchid().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn unknown_flag_exits_two_and_invalid_params_exit_one() {
    assert_eq!(orchid().args(["oscillate", "--bogus"]).status().unwrap().code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let status = orchid()
        .args(["oscillate", "--param", "mean_degree=7", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn oscillate_reaches_high_order() {
    let dir = tempfile::tempdir().unwrap();
    let status = orchid().args(["oscillate", "--n", "25", "--seed", "7", "--out"]).arg(dir.path()).status().unwrap();
    assert!(status.success());
    let r = column(&find(dir.path(), "oscillate_series", ".csv"), "r");
    assert_eq!(r.len(), 601);
    assert!(r.iter().copied().fold(0.0, f64::max) >= 0.95);

    let manifest = RunManifest::read(&find(dir.path(), "oscillate", ".manifest.json")).unwrap();
    assert_eq!(manifest.seed, 7);
    assert_eq!(manifest.params_snapshot.n, 25);
    assert!(!manifest.outputs.is_empty());
    for path in &manifest.outputs {
        assert!(path.exists(), "{}", path.display());
    }
}

#[test]
fn qss_fidelity_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = orchid().args(["qss-fidelity", "--trials", "60", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let path = find(dir.path(), "qss_fidelity", ".csv");
    let c = column(&path, "coherence");
    let f = column(&path, "fidelity");
    let crossing = c.iter().zip(&f).find(|(_, &f)| f >= 0.5).map(|(&c, _)| c).unwrap();
    assert!((0.78..=0.86).contains(&crossing), "first grid point with F >= 0.5: {crossing}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("c*"));
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = orchid()
        .env("ORCHID_SEED", "99")
        .args(["consensus", "--trials", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = RunManifest::read(&find(dir.path(), "consensus", ".manifest.json")).unwrap();
    assert_eq!(manifest.seed, 99);
    assert_eq!(manifest.trials, 2);
}

#[test]
fn params_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.txt");
    std::fs::write(&file, "# small run\nn = 12\nstep_budget = 50\n").unwrap();
    let status = orchid()
        .args(["oscillate", "--params-file"])
        .arg(&file)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = RunManifest::read(&find(dir.path(), "oscillate", ".manifest.json")).unwrap();
    assert_eq!(manifest.params_snapshot.n, 12);
    assert_eq!(column(&find(dir.path(), "oscillate_series", ".csv"), "r").len(), 51);
}
