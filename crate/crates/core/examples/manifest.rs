//! An experiment described by a JSON manifest: run it, write the artifacts,
//! and re-run from the emitted manifest.

use sle_rho::harness::{run_ensemble, ExperimentKind, ExperimentManifest};
use sle_rho::process::SleParams;
use sle_rho::{Domain, Point};

fn main() -> sle_rho::Result<()> {
    let params = SleParams::new(Domain::Disk, 2.0, Point::real(1.0))
        .with_force_point(Point::new(0.2, -0.3), 1.0)
        .with_time(0.3, 1e-3);
    let mut manifest = ExperimentManifest::new(ExperimentKind::Simulate, params, 500, vec![0.1, 0.2, 0.3], 42);
    let dir = std::env::temp_dir().join("sle-rho-manifest-example");
    manifest.output.dir = Some(dir.clone());
    println!("{}", manifest.to_json()?);

    let stats = run_ensemble(&manifest)?;
    for c in &stats.checkpoints {
        println!("t={} mean W={:+.4} se={:.4} n={}", c.time, c.driving.mean, c.driving.std_error, c.driving.count);
    }
    let again = ExperimentManifest::from_json(&std::fs::read_to_string(dir.join("manifest.json"))?)?;
    let same = run_ensemble(&again)? == stats;
    println!("artifacts in {}; re-run identical: {same}", dir.display());
    Ok(())
}
