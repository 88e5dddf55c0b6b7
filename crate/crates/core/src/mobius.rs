//! Mobius transformations between the half-plane and the disk.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point};
use crate::error::{Result, SleError};

const ZERO_TOL: f64 = 1e-300;
/// A denominator this small relative to its terms is a pole.
const POLE_TOL: f64 = 1e-15;

/// `z -> (a z + b) / (c z + d)` with `ad - bc = 1`, tagged with the domains
/// it carries onto each other.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
    pub from: Domain,
    pub to: Domain,
}

impl MobiusMap {
    /// Build and normalize; fails when `ad - bc = 0`.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64, from: Domain, to: Domain) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() <= ZERO_TOL || !det.norm().is_finite() {
            return Err(SleError::Degenerate(format!("Mobius determinant {det}")));
        }
        let k = det.sqrt();
        Ok(MobiusMap { a: a / k, b: b / k, c: c / k, d: d / k, from, to })
    }

    pub fn identity(domain: Domain) -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        MobiusMap { a: one, b: zero, c: zero, d: one, from: domain, to: domain }
    }

    /// `z -> scale * z + shift` on the half-plane (`scale > 0`, real shift).
    pub fn half_plane_affine(scale: f64, shift: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(SleError::Degenerate(format!("affine scale {scale}")));
        }
        Self::new(
            Complex64::new(scale, 0.0),
            Complex64::new(shift, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Domain::HalfPlane,
            Domain::HalfPlane,
        )
    }

    /// The Cayley map `z -> i (1 + z) / (1 - z)` from the disk onto the
    /// half-plane.
    pub fn cayley() -> Self {
        let i = Complex64::i();
        Self::new(i, i, Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0), Domain::Disk, Domain::HalfPlane)
            .expect("Cayley map is non-degenerate")
    }

    pub fn apply(&self, p: Point) -> Point {
        match p {
            Point::Finite(z) => {
                if self.at_pole(z) {
                    Point::Infinity
                } else {
                    Point::Finite((self.a * z + self.b) / (self.c * z + self.d))
                }
            }
            Point::Infinity => {
                if self.c.norm() <= ZERO_TOL {
                    Point::Infinity
                } else {
                    Point::Finite(self.a / self.c)
                }
            }
            // Strip ends are not points of the sphere.
            other => other,
        }
    }

    /// Apply to a finite point, returning `None` at the pole.
    #[inline]
    pub fn apply_finite(&self, z: Complex64) -> Option<Complex64> {
        (!self.at_pole(z)).then(|| (self.a * z + self.b) / (self.c * z + self.d))
    }

    fn at_pole(&self, z: Complex64) -> bool {
        let den = (self.c * z + self.d).norm();
        den <= ZERO_TOL || den <= POLE_TOL * ((self.c * z).norm() + self.d.norm())
    }

    /// Complex derivative `1 / (c z + d)^2`.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let den = self.c * z + self.d;
        1.0 / (den * den)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
            from: inner.from,
            to: self.to,
        }
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a, from: self.to, to: self.from }
    }

    /// Largest coefficient difference after fixing the sign ambiguity of the
    /// normalized matrix.
    pub fn distance(&self, other: &MobiusMap) -> f64 {
        let diff = |s: f64| {
            [
                (self.a - s * other.a).norm(),
                (self.b - s * other.b).norm(),
                (self.c - s * other.c).norm(),
                (self.d - s * other.d).norm(),
            ]
            .into_iter()
            .fold(0.0, f64::max)
        };
        diff(1.0).min(diff(-1.0))
    }
}

/// Normalized map of `domain` onto the disk sending `anchor -> 0` and
/// `boundary_anchor -> 1`.
fn to_disk(domain: Domain, anchor: Complex64, boundary_anchor: Point) -> Result<MobiusMap> {
    let one = Complex64::new(1.0, 0.0);
    match domain {
        Domain::Disk => {
            let Point::Finite(b) = boundary_anchor else {
                return Err(SleError::Degenerate("disk boundary anchor must be finite".into()));
            };
            // z -> u (z - a) / (1 - conj(a) z)
            let m = (b - anchor) / (one - anchor.conj() * b);
            let u = one / m;
            MobiusMap::new(u, -u * anchor, -anchor.conj(), one, Domain::Disk, Domain::Disk)
        }
        Domain::HalfPlane => {
            // z -> u (z - a) / (z - conj(a)), which sends infinity to u.
            let u = match boundary_anchor {
                Point::Infinity => one,
                Point::Finite(b) => (b - anchor.conj()) / (b - anchor),
                _ => return Err(SleError::Degenerate("bad half-plane boundary anchor".into())),
            };
            MobiusMap::new(u, -u * anchor, one, -anchor.conj(), Domain::HalfPlane, Domain::Disk)
        }
        Domain::Strip => Err(SleError::InvalidParams(
            "the strip is not Mobius-equivalent to the disk; use strip_to_half_plane".into(),
        )),
    }
}

/// The Mobius map of `from` onto `to` that sends `anchor` to the canonical
/// interior point of `to` (`0` for the disk, `i` for the half-plane) and
/// `boundary_anchor` to the canonical boundary point (`1` for the disk,
/// `infinity` for the half-plane).
///
/// From the disk to the half-plane with anchors `0` and `1` this is the
/// Cayley map `i (1 + z) / (1 - z)`.
pub fn mobius_between(from: Domain, to: Domain, anchor: Point, boundary_anchor: Point) -> Result<MobiusMap> {
    let Point::Finite(a) = anchor else {
        return Err(SleError::Degenerate(format!("anchor {anchor} must be finite")));
    };
    if from.boundary_gap(anchor).is_none_or(|g| g <= 0.0) {
        return Err(SleError::Degenerate(format!("anchor {anchor} is not interior to {from}")));
    }
    if !from.is_boundary(from.snap(boundary_anchor)) {
        return Err(SleError::Degenerate(format!(
            "boundary anchor {boundary_anchor} is not on the boundary of {from}"
        )));
    }
    let first = to_disk(from, a, from.snap(boundary_anchor))?;
    match to {
        Domain::Disk => Ok(first),
        Domain::HalfPlane => Ok(MobiusMap::cayley().compose(&first)),
        Domain::Strip => {
            Err(SleError::InvalidParams("the strip is not Mobius-equivalent to the disk or half-plane".into()))
        }
    }
}

/// Mid-flow uniformizer `z -> lambda (z - z_t) / (z - conj(z_t))` of the
/// half-plane onto the disk, sending `z_t` to `0` and infinity to `lambda`.
pub fn phi_t(z_t: Point, lambda: Complex64) -> Result<MobiusMap> {
    let Point::Finite(z) = z_t else {
        return Err(SleError::Degenerate("z_t must be finite".into()));
    };
    if !(z.im > 0.0) {
        return Err(SleError::Degenerate(format!("z_t = {z} is not in the upper half-plane")));
    }
    if (lambda.norm() - 1.0).abs() > 1e-9 {
        return Err(SleError::Degenerate(format!("|lambda| = {} is not 1", lambda.norm())));
    }
    MobiusMap::new(lambda, -lambda * z, Complex64::new(1.0, 0.0), -z.conj(), Domain::HalfPlane, Domain::Disk)
}

/// `s'(t) = 4 y^2 / |z - W|^4`, the rate of radial capacity seen from `z`
/// per unit of half-plane capacity.
pub fn capacity_rate(z_t: Point, w: f64) -> Result<f64> {
    let Point::Finite(z) = z_t else {
        return Err(SleError::Degenerate("z_t must be finite".into()));
    };
    if !(z.im > 0.0) {
        return Err(SleError::Degenerate(format!("z_t = {z} is not in the upper half-plane")));
    }
    let d2 = (z - w).norm_sqr();
    Ok(4.0 * z.im * z.im / (d2 * d2))
}

/// The conformal map `z -> exp(2 z)` of the strip `0 < Im z < pi/2` onto
/// the half-plane. The ends `-inf` and `+inf` go to `0` and `infinity`.
pub fn strip_to_half_plane(p: Point) -> Point {
    match p {
        Point::Finite(z) => Point::Finite((2.0 * z).exp()),
        Point::MinusInfinity => Point::Finite(Complex64::new(0.0, 0.0)),
        Point::PlusInfinity | Point::Infinity => Point::Infinity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(p: Point, z: Complex64, tol: f64) -> bool {
        p.finite().is_some_and(|w| (w - z).norm() <= tol)
    }

    #[test]
    fn cayley_examples() {
        let psi = mobius_between(Domain::Disk, Domain::HalfPlane, Point::real(0.0), Point::real(1.0)).unwrap();
        assert!(psi.distance(&MobiusMap::cayley()) < 1e-15);
        assert!(close(psi.apply(Point::real(0.0)), c(0.0, 1.0), 1e-15));
        assert_eq!(psi.apply(Point::real(1.0)), Point::Infinity);
        assert!(close(psi.apply(Point::real(-1.0)), c(0.0, 0.0), 1e-15));
    }

    #[test]
    fn identity_for_fixed_anchors() {
        let d = mobius_between(Domain::Disk, Domain::Disk, Point::real(0.0), Point::real(1.0)).unwrap();
        assert!(d.distance(&MobiusMap::identity(Domain::Disk)) < 1e-15);
        let h = mobius_between(Domain::HalfPlane, Domain::HalfPlane, Point::new(0.0, 1.0), Point::Infinity).unwrap();
        assert!(h.distance(&MobiusMap::identity(Domain::HalfPlane)) < 1e-15);
    }

    #[test]
    fn round_trip_with_matched_anchors() {
        let to_disk = mobius_between(Domain::HalfPlane, Domain::Disk, Point::new(0.3, 2.0), Point::real(-1.0)).unwrap();
        let back = mobius_between(Domain::Disk, Domain::HalfPlane, Point::real(0.0), Point::real(1.0)).unwrap();
        let expected =
            mobius_between(Domain::HalfPlane, Domain::HalfPlane, Point::new(0.3, 2.0), Point::real(-1.0)).unwrap();
        assert!(back.compose(&to_disk).distance(&expected) < 1e-13);
        let dh = mobius_between(Domain::Disk, Domain::HalfPlane, Point::real(0.0), Point::real(1.0)).unwrap();
        let hd = mobius_between(Domain::HalfPlane, Domain::Disk, Point::new(0.0, 1.0), Point::Infinity).unwrap();
        assert!(dh.compose(&hd).distance(&MobiusMap::identity(Domain::HalfPlane)) < 1e-14);
    }

    #[test]
    fn maps_domains_onto_each_other() {
        let psi = mobius_between(Domain::Disk, Domain::HalfPlane, Point::new(0.2, -0.1), Point::new(0.6, 0.8)).unwrap();
        assert!(close(psi.apply(Point::new(0.2, -0.1)), c(0.0, 1.0), 1e-14));
        assert_eq!(psi.apply(Point::new(0.6, 0.8)), Point::Infinity);
        for k in 1..32 {
            let u = Complex64::from_polar(1.0, k as f64 * 0.2);
            let img = psi.apply(Point::Finite(u)).finite().unwrap();
            assert!(img.im.abs() < 1e-9 * (1.0 + img.norm()), "{img}");
            let inner = psi.apply(Point::Finite(0.9 * u)).finite().unwrap();
            assert!(inner.im > 0.0);
        }
    }

    #[test]
    fn degenerate_anchors() {
        assert!(mobius_between(Domain::Disk, Domain::HalfPlane, Point::real(1.0), Point::real(1.0)).is_err());
        assert!(mobius_between(Domain::Disk, Domain::HalfPlane, Point::real(0.0), Point::real(0.5)).is_err());
        assert!(mobius_between(Domain::HalfPlane, Domain::Disk, Point::real(2.0), Point::Infinity).is_err());
        assert!(mobius_between(Domain::Strip, Domain::HalfPlane, Point::new(0.0, 0.5), Point::real(0.0)).is_err());
        assert!(MobiusMap::new(c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), Domain::Disk, Domain::Disk).is_err());
    }

    #[test]
    fn phi_t_examples() {
        let phi = phi_t(Point::new(0.0, 1.0), c(1.0, 0.0)).unwrap();
        assert!(close(phi.apply(Point::real(0.0)), c(-1.0, 0.0), 1e-15));
        assert!(close(phi.apply(Point::new(0.0, 1.0)), c(0.0, 0.0), 1e-15));
        let phi = phi_t(Point::new(0.0, 2.0), c(1.0, 0.0)).unwrap();
        assert!(close(phi.apply(Point::Infinity), c(1.0, 0.0), 1e-15));
        assert!(phi_t(Point::real(1.0), c(1.0, 0.0)).is_err());
        assert!(phi_t(Point::new(0.0, 1.0), c(2.0, 0.0)).is_err());
    }

    #[test]
    fn capacity_rate_examples() {
        assert_eq!(capacity_rate(Point::new(0.0, 1.0), 0.0).unwrap(), 4.0);
        assert_eq!(capacity_rate(Point::new(0.0, 2.0), 0.0).unwrap(), 1.0);
        assert!((capacity_rate(Point::new(1.0, 1.0), 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(capacity_rate(Point::real(1.0), 0.0).is_err());
    }

    #[test]
    fn strip_map() {
        let p = strip_to_half_plane(Point::new(0.3, 0.7)).finite().unwrap();
        assert!(p.im > 0.0);
        let top = strip_to_half_plane(Point::new(0.3, std::f64::consts::FRAC_PI_2)).finite().unwrap();
        assert!(top.im.abs() < 1e-15 && top.re < 0.0);
        assert_eq!(strip_to_half_plane(Point::PlusInfinity), Point::Infinity);
    }
}
