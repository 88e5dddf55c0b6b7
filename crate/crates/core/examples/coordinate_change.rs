//! Radial SLE(6) from `i` seen in the half-plane: the mapped driving
//! function is again Brownian with variance 6 per unit half-plane time.

use sle_rho::coordinate::{simulate_transformed, TransformOptions};
use sle_rho::mobius::mobius_between;
use sle_rho::process::{append_neutral_force_point, SleParams};
use sle_rho::{Domain, Point};

fn main() -> sle_rho::Result<()> {
    let psi = mobius_between(Domain::Disk, Domain::HalfPlane, Point::real(0.0), Point::real(1.0))?;
    let base =
        append_neutral_force_point(&SleParams::new(Domain::Disk, 6.0, Point::new(0.0, 1.0)).with_time(1.0, 1e-4));
    let opts = TransformOptions { grid_step: 0.01, target_max: Some(0.1), ..Default::default() };
    let mut sq = 0.0;
    let mut n = 0;
    for i in 0..200 {
        let out = simulate_transformed(&base.clone().with_seed(3).with_path_index(i), &psi, &opts)?;
        if i == 0 {
            println!("first path: {} disk records -> {} half-plane records", out.native.len(), out.sample.len());
            for k in (0..out.sample.len()).step_by(2) {
                println!("  s={:.2}  W={:+.4}", out.sample.times[k], out.sample.w[k].re);
            }
        }
        for pair in out.sample.w.windows(2) {
            sq += (pair[1].re - pair[0].re).powi(2);
            n += 1;
        }
    }
    println!("increment variance / grid step = {:.3} (kappa = 6)", sq / n as f64 / 0.01);
    Ok(())
}
