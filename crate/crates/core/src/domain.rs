//! Coordinate systems and points of the extended plane.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};

/// Height of the strip `{x + iy : 0 < y < pi/2}`.
pub const STRIP_HEIGHT: f64 = std::f64::consts::FRAC_PI_2;

/// Distance below which a point is snapped onto the domain boundary.
pub const BOUNDARY_SNAP: f64 = 1e-12;

/// The canonical domain a Loewner chain lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Upper half-plane, chordal normalization at infinity.
    HalfPlane,
    /// Unit disk, radial normalization at 0.
    Disk,
    /// Horizontal strip of height pi/2, dipolar normalization.
    Strip,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::HalfPlane, Domain::Disk, Domain::Strip];

    /// The interior point whose force has no effect (`infinity` for the
    /// half-plane, `0` for the disk). The strip has none.
    pub fn neutral_point(self) -> Option<Point> {
        match self {
            Domain::HalfPlane => Some(Point::Infinity),
            Domain::Disk => Some(Point::Finite(Complex64::new(0.0, 0.0))),
            Domain::Strip => None,
        }
    }

    /// Reflection across the boundary: conjugation for the half-plane and
    /// strip, `z -> 1/conj(z)` for the disk.
    ///
    /// The strip uses plain conjugation, i.e. reflection in its lower edge.
    pub fn inversion(self, p: Point) -> Point {
        match (self, p) {
            (Domain::Disk, Point::Finite(z)) => {
                if z.re == 0.0 && z.im == 0.0 {
                    Point::Infinity
                } else {
                    Point::Finite(z / z.norm_sqr())
                }
            }
            (Domain::Disk, Point::Infinity) => Point::Finite(Complex64::new(0.0, 0.0)),
            (_, Point::Finite(z)) => Point::Finite(z.conj()),
            (_, other) => other,
        }
    }

    /// Signed distance-like quantity to the boundary; zero on the boundary,
    /// positive inside. Infinite points report `None`.
    pub fn boundary_gap(self, p: Point) -> Option<f64> {
        let z = p.finite()?;
        Some(match self {
            Domain::HalfPlane => z.im,
            Domain::Disk => 1.0 - z.norm(),
            Domain::Strip => z.im.min(STRIP_HEIGHT - z.im),
        })
    }

    /// Whether `p` lies on the boundary of the domain (infinite points count
    /// as boundary points for the half-plane and the strip).
    pub fn is_boundary(self, p: Point) -> bool {
        match p {
            Point::Finite(_) => self.boundary_gap(p).is_some_and(|g| g.abs() <= BOUNDARY_SNAP),
            Point::Infinity => self == Domain::HalfPlane,
            Point::PlusInfinity | Point::MinusInfinity => self == Domain::Strip,
        }
    }

    /// Whether `p` is in the closure of the domain (with the appropriate
    /// points at infinity).
    pub fn contains_closure(self, p: Point) -> bool {
        match p {
            Point::Finite(_) => self.boundary_gap(p).is_some_and(|g| g >= 0.0),
            Point::Infinity => self == Domain::HalfPlane,
            Point::PlusInfinity | Point::MinusInfinity => self == Domain::Strip,
        }
    }

    /// Snap points within [`BOUNDARY_SNAP`] of the boundary onto it.
    pub fn snap(self, p: Point) -> Point {
        let Point::Finite(z) = p else { return p };
        match self {
            Domain::HalfPlane => {
                if z.im.abs() <= BOUNDARY_SNAP {
                    Point::Finite(Complex64::new(z.re, 0.0))
                } else {
                    p
                }
            }
            Domain::Disk => {
                let r = z.norm();
                if (r - 1.0).abs() <= BOUNDARY_SNAP && r > 0.0 {
                    Point::Finite(z / r)
                } else {
                    p
                }
            }
            Domain::Strip => {
                if z.im.abs() <= BOUNDARY_SNAP {
                    Point::Finite(Complex64::new(z.re, 0.0))
                } else if (z.im - STRIP_HEIGHT).abs() <= BOUNDARY_SNAP {
                    Point::Finite(Complex64::new(z.re, STRIP_HEIGHT))
                } else {
                    p
                }
            }
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::HalfPlane => "H",
            Domain::Disk => "D",
            Domain::Strip => "S",
        })
    }
}

impl FromStr for Domain {
    type Err = SleError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h" | "half_plane" | "halfplane" | "chordal" => Ok(Domain::HalfPlane),
            "d" | "disk" | "radial" => Ok(Domain::Disk),
            "s" | "strip" | "dipolar" => Ok(Domain::Strip),
            other => Err(SleError::Parse(format!("unknown domain {other:?}"))),
        }
    }
}

/// A point of the Riemann sphere, extended with the two ends of the strip.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Finite(Complex64),
    /// The point at infinity of the sphere.
    Infinity,
    /// The right end `+inf` of the strip.
    PlusInfinity,
    /// The left end `-inf` of the strip.
    MinusInfinity,
}

impl Point {
    pub fn new(re: f64, im: f64) -> Self {
        Point::Finite(Complex64::new(re, im))
    }

    pub fn real(x: f64) -> Self {
        Point::Finite(Complex64::new(x, 0.0))
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            Point::Finite(z) => Some(z),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Point::Finite(_))
    }

    /// Real and imaginary parts, with `(inf, inf)` for the sphere's infinity
    /// and `(+-inf, 0)` for the strip ends.
    pub fn parts(self) -> (f64, f64) {
        match self {
            Point::Finite(z) => (z.re, z.im),
            Point::Infinity => (f64::INFINITY, f64::INFINITY),
            Point::PlusInfinity => (f64::INFINITY, 0.0),
            Point::MinusInfinity => (f64::NEG_INFINITY, 0.0),
        }
    }

    /// Inverse of [`Point::parts`].
    pub fn from_parts(re: f64, im: f64) -> Self {
        if re.is_finite() && im.is_finite() {
            Point::new(re, im)
        } else if im.is_infinite() {
            Point::Infinity
        } else if re == f64::INFINITY {
            Point::PlusInfinity
        } else if re == f64::NEG_INFINITY {
            Point::MinusInfinity
        } else {
            Point::Infinity
        }
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::Finite(z)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(z) => write!(f, "{},{}", z.re, z.im),
            Point::Infinity => f.write_str("inf"),
            Point::PlusInfinity => f.write_str("+inf"),
            Point::MinusInfinity => f.write_str("-inf"),
        }
    }
}

/// Parses `re,im`, a bare real `x`, `inf`, `+inf` or `-inf`.
impl FromStr for Point {
    type Err = SleError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "inf" | "infinity" => return Ok(Point::Infinity),
            "+inf" | "+infinity" => return Ok(Point::PlusInfinity),
            "-inf" | "-infinity" => return Ok(Point::MinusInfinity),
            _ => {}
        }
        let num = |t: &str| {
            t.trim().parse::<f64>().map_err(|e| SleError::Parse(format!("bad number {t:?} in point {s:?}: {e}")))
        };
        match s.split_once(',') {
            Some((re, im)) => Ok(Point::new(num(re)?, num(im)?)),
            None => Ok(Point::real(num(s)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Point {
        Point::new(re, im)
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(Domain::HalfPlane.inversion(c(2.0, 3.0)), c(2.0, -3.0));
        assert_eq!(Domain::Disk.inversion(c(0.5, 0.0)), c(2.0, 0.0));
        let u = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
        let back = Domain::Disk.inversion(Point::Finite(u)).finite().unwrap();
        assert!((back - u).norm() < 1e-15);
        assert_eq!(Domain::Disk.inversion(c(0.0, 0.0)), Point::Infinity);
        assert_eq!(Domain::Disk.inversion(Point::Infinity), c(0.0, 0.0));
        assert_eq!(Domain::Strip.inversion(Point::PlusInfinity), Point::PlusInfinity);
    }

    #[test]
    fn infinity_only_equals_itself() {
        assert_eq!(Point::Infinity, Point::Infinity);
        assert_ne!(Point::Infinity, Point::PlusInfinity);
        assert_ne!(Point::Infinity, c(f64::MAX, f64::MAX));
    }

    #[test]
    fn parse_points() {
        assert_eq!("1.5,-2".parse::<Point>().unwrap(), c(1.5, -2.0));
        assert_eq!("3".parse::<Point>().unwrap(), c(3.0, 0.0));
        assert_eq!("-inf".parse::<Point>().unwrap(), Point::MinusInfinity);
        assert!("1,x".parse::<Point>().is_err());
    }

    #[test]
    fn parts_round_trip_for_infinities() {
        for p in [Point::Infinity, Point::PlusInfinity, Point::MinusInfinity, c(1.0, -0.5)] {
            let (re, im) = p.parts();
            assert_eq!(Point::from_parts(re, im), p);
        }
    }

    #[test]
    fn snapping() {
        assert_eq!(Domain::HalfPlane.snap(c(1.0, 1e-13)), c(1.0, 0.0));
        assert_eq!(Domain::HalfPlane.snap(c(1.0, 1e-9)), c(1.0, 1e-9));
        let s = Domain::Disk.snap(c(0.0, 1.0 + 5e-13)).finite().unwrap();
        assert_eq!(s.norm(), 1.0);
        assert!(Domain::Disk.is_boundary(Domain::Disk.snap(c(1.0, 0.0))));
    }
}
