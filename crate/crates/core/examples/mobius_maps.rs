//! Mobius maps between the half-plane and the disk, the mid-flow uniformizer
//! `phi_t` and the capacity rate it induces.

use num_complex::Complex64;
use sle_rho::mobius::{capacity_rate, mobius_between, phi_t, strip_to_half_plane};
use sle_rho::{Domain, Point};

fn main() -> sle_rho::Result<()> {
    let psi = mobius_between(Domain::Disk, Domain::HalfPlane, Point::real(0.0), Point::real(1.0))?;
    println!(
        "psi(0) = {}, psi(1) = {}, psi(-1) = {}",
        psi.apply(Point::real(0.0)),
        psi.apply(Point::real(1.0)),
        psi.apply(Point::real(-1.0))
    );
    let back = psi.inverse().compose(&psi);
    println!("|psi^-1 o psi - id| = {:.1e}", back.distance(&sle_rho::mobius::MobiusMap::identity(Domain::Disk)));

    let z = Point::new(0.3, 0.7);
    let phi = phi_t(z, Complex64::new(1.0, 0.0))?;
    println!(
        "|phi(z)| = {:.1e}, |phi(2)| = {:.15}",
        phi.apply(z).finite().unwrap().norm(),
        phi.apply(Point::real(2.0)).finite().unwrap().norm()
    );
    for w in [-1.0, 0.0, 0.3, 2.0] {
        println!("capacity rate at W={w:+.1}: {:.6}", capacity_rate(z, w)?);
    }
    println!(
        "strip: 0 -> {}, +inf -> {}",
        strip_to_half_plane(Point::real(0.0)),
        strip_to_half_plane(Point::PlusInfinity)
    );
    Ok(())
}
