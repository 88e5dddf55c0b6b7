//! The percolation observable is a martingale for kappa = 6 and drifts for
//! kappa = 4.

use std::f64::consts::FRAC_PI_2;

use sle_rho::martingale::{drift_test, evaluate_series, ObservableSpec};
use sle_rho::process::{run_process, SleParams};
use sle_rho::{Domain, Point};

fn main() -> sle_rho::Result<()> {
    let points: Vec<Point> =
        (1..4).map(|k| Point::new((FRAC_PI_2 * k as f64).cos(), (FRAC_PI_2 * k as f64).sin())).collect();
    let spec = ObservableSpec::percolation(points.clone())?;
    let checkpoints = [0.1, 0.2, 0.4];
    for kappa in [6.0, 4.0] {
        let mut params = SleParams::new(Domain::Disk, kappa, Point::real(1.0)).with_time(0.4, 1e-3).with_seed(11);
        for &p in &points {
            params = params.with_force_point(p, 0.0);
        }
        let series = (0..1000)
            .map(|i| evaluate_series(&spec, &run_process(&params.clone().with_path_index(i))?, 0.05, &checkpoints))
            .collect::<sle_rho::Result<Vec<_>>>()?;
        let report = drift_test(&series, &checkpoints)?;
        for c in &report.checkpoints {
            println!("kappa={kappa} t={} mean-1={:+.4} z={:+.2}", c.time, c.mean_deviation, c.z_score);
        }
        println!("kappa={kappa}: {}", if report.pass { "no drift detected" } else { "drift detected" });
    }
    Ok(())
}
