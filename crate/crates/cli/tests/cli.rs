//! End-to-end checks of the binary: exit codes, stdout/file output, and
//! byte-identical reruns.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zonal-cnn"))
}

fn temp_path(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("zonal-cnn-test-{}-{name}", std::process::id()));
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = run(&[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_family_is_a_usage_error() {
    let out = run(&[
        "thm2-rate",
        "--m",
        "1",
        "--d",
        "3",
        "--S",
        "2",
        "--ridge",
        "sawtooth",
        "--N",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sawtooth"));
}

#[test]
fn factorize_taps_to_stdout() {
    let out = run(&["factorize", "--taps", "1,2,1", "--S", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("# schema factorization v1"));
    assert!(stdout.contains("# rel_error = 0.0000000000000000e0"));
    assert!(stdout.contains("factor,tap_index,value"));
}

#[test]
fn factorize_requires_an_input() {
    let out = run(&["factorize", "--S", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ridge_rate_runs_and_is_reproducible() {
    let args = [
        "thm2-rate",
        "--m",
        "2",
        "--d",
        "3",
        "--S",
        "2",
        "--ridge",
        "abs",
        "--N",
        "8,16,32",
        "--grid-size",
        "300",
        "--seed",
        "9",
    ];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout, "CSV must be byte-identical");
    let csv = String::from_utf8(first.stdout).unwrap();
    assert!(csv.contains("# schema rate-study v1"));
    assert!(csv.contains("control_param,sup_error,param_count,seed,grid_size"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn bench_factor_writes_file() {
    let path = temp_path("bench.csv");
    let out = run(&[
        "bench-factor",
        "--M",
        "1,4",
        "--S",
        "2",
        "--trials",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let content = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(content.starts_with("# schema factor-bench v1"));
    assert!(content.contains("M,S,max_rel_err,max_factor_count"));
}

#[test]
fn export_net_roundtrips() {
    use zonal_cnn::network::SphericalNetwork;

    let path = temp_path("net.txt");
    let out = run(&[
        "export-net",
        "--flavor",
        "kernel",
        "--d",
        "3",
        "--S",
        "2",
        "--m",
        "2",
        "--n",
        "2",
        "--r",
        "1.0",
        "--N",
        "4",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let content = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    let net = SphericalNetwork::read_text(content.as_slice()).unwrap();
    assert_eq!(net.dim(), 3);
    assert_eq!(net.feature_count(), 2);

    let out = run(&[
        "export-net",
        "--flavor",
        "bogus",
        "--d",
        "3",
        "--S",
        "2",
        "--m",
        "1",
        "--N",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn discretize_smoke() {
    let out = run(&[
        "discretize",
        "--r",
        "1.0",
        "--n",
        "2",
        "--d",
        "3",
        "--m",
        "32,128,512",
        "--seeds",
        "6",
        "--grid-size",
        "150",
        "--seed",
        "4",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("# study = discretize"));
}

#[test]
fn thm1_rate_smoke() {
    let out = run(&[
        "thm1-rate",
        "--f",
        "lowdeg",
        "--r",
        "1.0",
        "--d",
        "3",
        "--S",
        "2",
        "--J",
        "6,12",
        "--seeds",
        "3",
        "--grid-size",
        "200",
        "--seed",
        "8",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("# study = thm1-rate"));
    assert!(csv.contains("# coupling_J6"));
}
