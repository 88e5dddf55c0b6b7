//! Deterministic Loewner flows: a constant driving function in the
//! half-plane has the closed form `g_t(z) = sqrt(z^2 + 4t)`, and in the disk
//! `g_t'(0) = e^t`.

use num_complex::Complex64;
use sle_rho::loewner::{evolve_point, swallow_time, DrivingPath, LoewnerConfig};
use sle_rho::{Domain, Point};

fn main() {
    let cfg = LoewnerConfig::default();
    let driving = DrivingPath::constant(Complex64::new(0.0, 0.0), 1.0, 1000);
    for z in [Complex64::new(1.0, 1.0), Complex64::new(-0.5, 2.0), Complex64::new(3.0, 0.1)] {
        let flowed = evolve_point(Domain::HalfPlane, Point::Finite(z), &driving, &cfg);
        let root = (z * z + 4.0).sqrt();
        let exact = if root.im < 0.0 { -root } else { root };
        let g = flowed.current.finite().unwrap();
        println!("g_1({z}) = {g:.12}  exact {exact:.12}  error {:.1e}", (g - exact).norm());
    }
    let hit = swallow_time(Domain::HalfPlane, Point::new(0.0, 1.0), &driving, &cfg);
    println!("i is swallowed at t = {hit:?} (exact 0.25)");

    let disk = DrivingPath::constant(Complex64::new(1.0, 0.0), 2.0, 2000);
    let origin = evolve_point(Domain::Disk, Point::real(0.0), &disk, &cfg);
    println!("disk: g_2'(0) = {:.10}, e^2 = {:.10}", origin.derivative().re, 2f64.exp());
}
