use std::path::Path;
use std::process::{Command, Output};

fn sle_rho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sle-rho")).args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn simulate_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let out = sle_rho(&[
            "simulate",
            "--domain",
            "H",
            "--kappa",
            "6",
            "--paths",
            "1",
            "--seed",
            "7",
            "--format",
            "jsonl",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((out.stdout, read(&dir, "stats.json"), read(&dir, "paths/path_000000.jsonl")));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(sle_rho(&["simulate", "--kappa", "not-a-number"]).status.code(), Some(1));
    assert_eq!(sle_rho(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(sle_rho(&["simulate", "--kappa", "-1"]).status.code(), Some(1));
    assert_eq!(sle_rho(&["--help"]).status.code(), Some(0));
}

#[test]
fn wrong_kappa_for_percolation_fails_statistically() {
    let out = sle_rho(&["verify-martingale", "--flavor", "percolation", "--kappa", "4"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(2), "{text}");
    assert!(text.contains("FAIL"));
}

#[test]
fn coordinate_change_passes() {
    let out = sle_rho(&["verify-coordinate-change", "--kappa", "2", "--paths", "4000"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS"));
}

#[test]
fn transform_maps_a_dumped_path() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("sim");
    let sim = sle_rho(&[
        "simulate",
        "--domain",
        "D",
        "--kappa",
        "3",
        "--paths",
        "1",
        "--t-max",
        "0.2",
        "--dt",
        "1e-4",
        "--format",
        "binary",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(sim.status.code(), Some(0));
    let mapped = tmp.path().join("mapped.jsonl");
    let out = sle_rho(&[
        "transform",
        "--input",
        dir.join("paths/path_000000.bin").to_str().unwrap(),
        "--to",
        "H",
        "--out",
        mapped.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sample = sle_rho::io::read_jsonl(std::io::BufReader::new(std::fs::File::open(&mapped).unwrap())).unwrap();
    assert_eq!(sample.params.domain, sle_rho::Domain::HalfPlane);
    assert!(sample.len() > 10);
    assert!(sample.w.iter().all(|w| w.im == 0.0));

    let missing = sle_rho(&["transform", "--input", "/nonexistent.jsonl", "--to", "H"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn manifest_rerun_reproduces_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let out = sle_rho(&[
        "girsanov-check",
        "--kappa",
        "4",
        "--force-point",
        "0,1",
        "--rho",
        "1.5",
        "--paths",
        "5",
        "--t-max",
        "0.05",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let manifest = first.join("manifest.json");
    let again =
        sle_rho(&["girsanov-check", "--manifest", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    for f in ["stats.json", "checkpoints.csv"] {
        assert_eq!(read(&first, f), read(&second, f), "{f}");
    }
}
