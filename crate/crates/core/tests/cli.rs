// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn qsde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsde")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    qsde(&args)
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_config(dir: &Path, doc: &serde_json::Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, doc.to_string()).unwrap();
    path
}

#[test]
fn validate_bundled_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to(dir.path(), "validate", &bundled("pauli_worked.json"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("validate.csv"));
    assert_eq!(rows[0], ["target", "passed", "max_residual", "alpha_min_eigenvalue", "alpha_psd"]);
    assert_eq!(rows[1][1], "true");
    assert_eq!(read_csv(&dir.path().join("validate_violations.csv")).len(), 1);
}

#[test]
fn oracle_residuals_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to(dir.path(), "oracle", &bundled("pauli_worked.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&dir.path().join("oracle.csv"));
    assert!(rows.len() > 5);
    for r in &rows[1..] {
        let residual: f64 = r[2].parse().unwrap();
        assert!(residual <= 1e-8, "{r:?}");
        assert_eq!(r[4], "true");
    }
}

#[test]
fn weak_residual_trend_is_non_increasing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to(dir.path(), "weak", &bundled("pauli_worked.json"), &["--eps", "0.2,0.1,0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&dir.path().join("weak_asymptotics.csv"));
    let eps: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(eps, vec![0.2, 0.1, 0.05]);
    assert!(rows[1..].iter().all(|r| r[4] == "true"));
    let rate = read_csv(&dir.path().join("pauli_rate.csv"));
    let ratio: f64 = rate[1][4].parse().unwrap();
    assert!((ratio - 2.0).abs() < 1e-12);
}

#[test]
fn identical_inputs_give_identical_bytes() {
    for cmd in ["coeffs", "mean-flow", "spectrum", "decoherence", "weak", "oracle"] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for d in [&a, &b] {
            let out = run_to(d.path(), cmd, &bundled("pauli_worked.json"), &["--seed", "11"]);
            assert_eq!(out.status.code(), Some(0), "{cmd}");
        }
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            let x = std::fs::read(a.path().join(&n)).unwrap();
            let y = std::fs::read(b.path().join(&n)).unwrap();
            assert_eq!(x, y, "{cmd}: {n:?}");
        }
    }
}

#[test]
fn stdout_mode_prints_named_tables() {
    let out = qsde(&["steady", "--config", bundled("pauli_worked.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# steady\ntarget,index,mu\n"));
    assert!(text.contains("pauli,2,1.0000000000000000e0"));
}

#[test]
fn composite_pair_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_to(dir.path(), "composite", &bundled("pauli_pair.json"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&dir.path().join("composite.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][..3], ["ab", "15", "true"]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.json");
    assert_eq!(qsde(&["validate", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let bad = write_config(dir.path(), &serde_json::json!({"systems": [{"name": "p"}]}));
    assert_eq!(qsde(&["validate", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    let grid = bundled("pauli_worked.json");
    assert_eq!(qsde(&["mean-flow", "--config", grid.to_str().unwrap(), "--grid", "5:1:3"]).status.code(), Some(2));

    let isolated = write_config(
        dir.path(),
        &serde_json::json!({"systems": [{"name": "p", "constants": "pauli", "energy": [0, 0, 1],
                                          "coupling": [[0, 0, 0], [0, 0, 0]]}]}),
    );
    assert_eq!(qsde(&["steady", "--config", isolated.to_str().unwrap()]).status.code(), Some(4));

    // Commutative algebra on 17 variables: too large for the second-moment operator.
    let n = 17;
    let alpha: Vec<Vec<[f64; 2]>> =
        (0..n).map(|i| (0..n).map(|j| [if i == j { 1.0 } else { 0.0 }, 0.0]).collect()).collect();
    let zero: Vec<Vec<[f64; 2]>> = vec![vec![[0.0, 0.0]; n]; n];
    let big = write_config(
        dir.path(),
        &serde_json::json!({"systems": [{"name": "big", "constants": {"alpha": alpha, "beta": vec![zero; n]},
                                          "energy": vec![0.0; n], "coupling": vec![vec![0.0; n]; 2]}]}),
    );
    assert_eq!(qsde(&["spectrum", "--config", big.to_str().unwrap()]).status.code(), Some(3));
}
