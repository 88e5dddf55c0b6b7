//! One path of chordal SLE(kappa; rho) with an interior force point, then a
//! short radial ensemble.

use sle_rho::process::{run_process, SleParams};
use sle_rho::{Domain, Point};

fn main() -> sle_rho::Result<()> {
    let params = SleParams::new(Domain::HalfPlane, 8.0 / 3.0, Point::real(0.0))
        .with_force_point(Point::new(0.5, 1.0), 2.0)
        .with_force_point(Point::real(-1.0), -1.0)
        .with_time(0.5, 1e-4)
        .with_record_every(100)
        .with_seed(7);
    let path = run_process(&params)?;
    println!("{} records, stopped at t = {} ({:?})", path.len(), path.stopped_at.time, path.stopped_at.reason);
    for (i, t) in path.times.iter().enumerate().step_by(10) {
        println!("t={t:.2}  W={:+.5}  V1={}  V2={}", path.w[i].re, path.v[0][i], path.v[1][i]);
    }

    let radial = SleParams::new(Domain::Disk, 4.0, Point::real(1.0)).with_time(0.2, 1e-3).with_seed(1);
    let angles: Vec<f64> = (0..2000)
        .map(|i| run_process(&radial.clone().with_path_index(i)).map(|s| s.w.last().unwrap().arg()))
        .collect::<sle_rho::Result<_>>()?;
    let var = angles.iter().map(|a| a * a).sum::<f64>() / angles.len() as f64;
    println!("radial kappa=4: Var(arg W_0.2) = {var:.3} (about {:.3})", 4.0 * 0.2);
    Ok(())
}
