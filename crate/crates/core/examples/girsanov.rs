//! Pathwise check that `dM/M = c dW` for the chordal observable of
//! SLE(kappa; rho), by regressing observable increments on `c dW`.

use sle_rho::martingale::{girsanov_drift_check, ObservableSpec};
use sle_rho::process::{run_process, SleParams};
use sle_rho::{Domain, Point};

fn main() -> sle_rho::Result<()> {
    let kappa = 3.0;
    let points = vec![Point::new(0.0, 1.0), Point::real(1.5)];
    let rhos = vec![2.0, -1.0];
    let spec = ObservableSpec::chordal(kappa, points.clone(), rhos)?;
    let mut params = SleParams::new(Domain::HalfPlane, kappa, Point::real(0.0)).with_time(0.2, 1e-4);
    for p in points {
        params = params.with_force_point(p, 0.0);
    }
    for i in 0..5 {
        let path = run_process(&params.clone().with_seed(5).with_path_index(i))?;
        let r = girsanov_drift_check(&path, &spec, 0.05)?;
        println!(
            "path {i}: {} steps, slope {:.5} +- {:.5}, |slope-1| = {:.5}",
            r.steps, r.slope, r.slope_std_error, r.discrepancy
        );
    }
    Ok(())
}
