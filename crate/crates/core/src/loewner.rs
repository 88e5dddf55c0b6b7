//! Deterministic Loewner kernel: vector fields, reflections, averaged fields
//! and the flow of marked points with derivative tracking.
//!
//! The three coordinate systems share one signature `Psi_X(w, z)`, the
//! velocity at `z` of the Loewner flow driven from the boundary point `w`:
//!
//! | domain     | field                     | `d/dz` of the field              |
//! |------------|---------------------------|----------------------------------|
//! | half-plane | `2 / (z - w)`             | `-2 / (z - w)^2`                 |
//! | disk       | `-z (z + w) / (z - w)`    | `-(z^2 - 2wz - w^2) / (z - w)^2` |
//! | strip      | `2 coth(z - w)`           | `-2 / sinh(z - w)^2`             |
//!
//! Points are moved with a classical fourth-order Runge-Kutta scheme whose
//! substep shrinks with the squared distance to the driving point. The
//! logarithm of `g_t'` is carried along the same integrator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point};
use crate::error::{Result, SleError};

/// Smallest `|z - w|` at which the vector fields are evaluated.
pub const COINCIDENCE_FLOOR: f64 = 1e-14;

/// Default distance at which a point counts as swallowed.
pub const DEFAULT_EPS_SWALLOW: f64 = 1e-5;

/// Vector field `Psi_X(w, z)` for finite arguments, without guards.
#[inline]
pub fn field(domain: Domain, w: Complex64, z: Complex64) -> Complex64 {
    match domain {
        Domain::HalfPlane => 2.0 / (z - w),
        Domain::Disk => -z * (z + w) / (z - w),
        Domain::Strip => {
            let d = z - w;
            2.0 * d.cosh() / d.sinh()
        }
    }
}

/// `d/dz Psi_X(w, z)` for finite arguments.
#[inline]
pub fn field_derivative(domain: Domain, w: Complex64, z: Complex64) -> Complex64 {
    match domain {
        Domain::HalfPlane => {
            let d = z - w;
            -2.0 / (d * d)
        }
        Domain::Disk => {
            let d = z - w;
            -(z * z - 2.0 * w * z - w * w) / (d * d)
        }
        Domain::Strip => {
            let s = (z - w).sinh();
            -2.0 / (s * s)
        }
    }
}

/// The Loewner vector field `Psi_X(w, z)`.
///
/// `w` may be a point at infinity: the half-plane field from infinity
/// vanishes, the disk field from infinity is `z`, and the strip fields from
/// `+inf` / `-inf` are the constants `-2` / `+2`.
pub fn psi_field(domain: Domain, w: Point, z: Point) -> Result<Point> {
    use Point::*;
    let zero = Point::Finite(Complex64::new(0.0, 0.0));
    match (domain, w, z) {
        // Exact form so that the averaged field at the disk's centre cancels
        // to zero bit for bit.
        (Domain::Disk, Finite(w), Finite(z)) if w.re == 0.0 && w.im == 0.0 => Ok(Finite(-z)),
        (_, Finite(w), Finite(z)) => {
            let distance = (z - w).norm();
            let singular = match domain {
                Domain::Strip => (z - w).sinh().norm() < COINCIDENCE_FLOOR,
                _ => distance < COINCIDENCE_FLOOR,
            };
            if singular {
                return Err(SleError::CoincidentPoints { distance });
            }
            Ok(Finite(field(domain, w, z)))
        }
        (Domain::HalfPlane, Infinity, Finite(_)) => Ok(zero),
        (Domain::HalfPlane, Finite(_), Infinity) => Ok(zero),
        (Domain::Disk, Infinity, Finite(z)) => Ok(Finite(z)),
        (Domain::Disk, Finite(_), Infinity) => Ok(Infinity),
        (Domain::Strip, PlusInfinity, Finite(_)) => Ok(Finite(Complex64::new(-2.0, 0.0))),
        (Domain::Strip, MinusInfinity, Finite(_)) => Ok(Finite(Complex64::new(2.0, 0.0))),
        (Domain::Strip, Finite(_), PlusInfinity) => Ok(Finite(Complex64::new(2.0, 0.0))),
        (Domain::Strip, Finite(_), MinusInfinity) => Ok(Finite(Complex64::new(-2.0, 0.0))),
        _ => Err(SleError::InvalidPoint(format!("field on {domain} evaluated with w = {w}, z = {z}"))),
    }
}

/// Reflection in the boundary of `domain`.
pub fn inversion(domain: Domain, z: Point) -> Point {
    domain.inversion(z)
}

/// The field averaged with its reflection,
/// `(Psi_X(v, w) + Psi_X(I_X(v), w)) / 2`.
///
/// For `v` fixed by the reflection this is exactly `psi_field(domain, v, w)`.
pub fn tilde_psi(domain: Domain, v: Point, w: Point) -> Result<Point> {
    let reflected = domain.inversion(v);
    if reflected == v {
        return psi_field(domain, v, w);
    }
    let a = psi_field(domain, v, w)?;
    let b = psi_field(domain, reflected, w)?;
    match (a, b) {
        (Point::Finite(a), Point::Finite(b)) => Ok(Point::Finite((a + b) * 0.5)),
        _ => Err(SleError::InvalidPoint(format!("averaged field on {domain} is infinite at w = {w}"))),
    }
}

/// Driving function over one step, interpolated linearly (in angle for the
/// disk).
#[derive(Clone, Copy, Debug)]
pub struct DrivingSegment {
    pub start: Complex64,
    pub end: Complex64,
    pub duration: f64,
    angle_increment: f64,
    domain: Domain,
}

impl DrivingSegment {
    pub fn new(domain: Domain, start: Complex64, end: Complex64, duration: f64) -> Self {
        let angle_increment = match domain {
            Domain::Disk => (end / start).arg(),
            _ => 0.0,
        };
        DrivingSegment { start, end, duration, angle_increment, domain }
    }

    /// Constant driving over `duration`.
    pub fn constant(domain: Domain, w: Complex64, duration: f64) -> Self {
        Self::new(domain, w, w, duration)
    }

    /// Driving value at local time `tau` in `[0, duration]`.
    #[inline]
    pub fn at(&self, tau: f64) -> Complex64 {
        if self.duration <= 0.0 {
            return self.start;
        }
        let frac = tau / self.duration;
        match self.domain {
            Domain::Disk => {
                if self.angle_increment == 0.0 {
                    self.start
                } else {
                    self.start * Complex64::from_polar(1.0, frac * self.angle_increment)
                }
            }
            _ => self.start + (self.end - self.start) * frac,
        }
    }

    /// Largest displacement of the driving point over the segment.
    fn travel(&self) -> f64 {
        match self.domain {
            Domain::Disk => self.angle_increment.abs(),
            _ => (self.end - self.start).norm(),
        }
    }
}

/// A sampled driving function `t_i -> W_{t_i}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DrivingPath {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl DrivingPath {
    /// `W = w` at `steps + 1` equally spaced times on `[0, t_max]`.
    pub fn constant(w: Complex64, t_max: f64, steps: usize) -> Self {
        let times = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
        DrivingPath { times, values: vec![w; steps + 1] }
    }

    pub fn from_fn(t_max: f64, steps: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let times: Vec<f64> = (0..=steps).map(|k| t_max * k as f64 / steps as f64).collect();
        let values = times.iter().map(|&t| f(t)).collect();
        DrivingPath { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn segment(&self, domain: Domain, i: usize) -> DrivingSegment {
        DrivingSegment::new(domain, self.values[i], self.values[i + 1], self.times[i + 1] - self.times[i])
    }
}

/// Integrator settings for the Loewner flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoewnerConfig {
    /// `|g_t(z) - W_t|` below which `z` counts as swallowed.
    pub eps_swallow: f64,
    /// Substep bound `h <= safety * |g - W|^2`.
    pub safety: f64,
    /// Largest driving displacement per substep, as a fraction of `|g - W|`.
    #[serde(default = "default_travel_fraction")]
    pub travel_fraction: f64,
    /// Hard cap on the number of substeps per driving segment.
    pub max_substeps: usize,
}

fn default_travel_fraction() -> f64 {
    0.02
}

impl Default for LoewnerConfig {
    fn default() -> Self {
        LoewnerConfig {
            eps_swallow: DEFAULT_EPS_SWALLOW,
            safety: 0.02,
            travel_fraction: default_travel_fraction(),
            max_substeps: 1 << 22,
        }
    }
}

/// A point carried by the flow together with `log g_t'` at that point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub initial: Point,
    pub current: Point,
    /// Continuous branch of `log g_t'(initial)`; zero at `t = 0`.
    pub log_derivative: Complex64,
    pub swallowed_at: Option<f64>,
    pub on_boundary: bool,
}

impl MarkedPoint {
    pub fn new(domain: Domain, p: Point) -> Self {
        let p = domain.snap(p);
        MarkedPoint {
            initial: p,
            current: p,
            log_derivative: Complex64::new(0.0, 0.0),
            swallowed_at: None,
            on_boundary: domain.is_boundary(p),
        }
    }

    /// `g_t'` at the point.
    pub fn derivative(&self) -> Complex64 {
        self.log_derivative.exp()
    }

    pub fn is_alive(&self) -> bool {
        self.swallowed_at.is_none()
    }
}

#[derive(Clone, Copy)]
struct FlowState {
    g: Complex64,
    log_d: Complex64,
}

#[inline]
fn rk4(domain: Domain, seg: &DrivingSegment, tau: f64, h: f64, s: FlowState) -> FlowState {
    let eval = |t: f64, g: Complex64| {
        let w = seg.at(t);
        (field(domain, w, g), field_derivative(domain, w, g))
    };
    let (k1, l1) = eval(tau, s.g);
    let (k2, l2) = eval(tau + 0.5 * h, s.g + k1 * (0.5 * h));
    let (k3, l3) = eval(tau + 0.5 * h, s.g + k2 * (0.5 * h));
    let (k4, l4) = eval(tau + h, s.g + k3 * h);
    FlowState {
        g: s.g + (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0),
        log_d: s.log_d + (l1 + 2.0 * l2 + 2.0 * l3 + l4) * (h / 6.0),
    }
}

fn is_valid(domain: Domain, on_boundary: bool, s: &FlowState) -> bool {
    if !(s.g.re.is_finite() && s.g.im.is_finite() && s.log_d.re.is_finite()) {
        return false;
    }
    // Interior points of the half-plane and strip stay above the real line.
    on_boundary || domain == Domain::Disk || s.g.im > 0.0
}

fn renormalize(domain: Domain, on_boundary: bool, s: &mut FlowState) {
    if on_boundary {
        match domain {
            Domain::Disk => s.g /= s.g.norm(),
            _ => {
                // Real axis (or the strip's upper edge) is invariant.
                if s.g.im.abs() < 0.5 {
                    s.g.im = 0.0;
                }
            }
        }
    }
}

/// Advance one point over `seg`, starting at absolute time `t0`.
pub fn advance_point(domain: Domain, point: &mut MarkedPoint, t0: f64, seg: &DrivingSegment, cfg: &LoewnerConfig) {
    if point.swallowed_at.is_some() || seg.duration <= 0.0 {
        return;
    }
    let Point::Finite(g0) = point.current else {
        // Infinity and the strip ends are fixed by every flow considered here.
        return;
    };
    let mut state = FlowState { g: g0, log_d: point.log_derivative };
    let eps = cfg.eps_swallow;
    let travel = seg.travel();
    let mut tau = 0.0;
    let mut substeps = 0usize;
    while tau < seg.duration {
        let remaining = seg.duration - tau;
        let dist = (state.g - seg.at(tau)).norm();
        if dist < eps {
            point.swallowed_at = Some(t0 + tau);
            break;
        }
        let mut h = remaining.min(cfg.safety * dist * dist);
        if travel > 0.0 {
            h = h.min(seg.duration * cfg.travel_fraction * dist / travel);
        }
        if dist < 10.0 * eps {
            h *= 0.5;
        }
        substeps += 1;
        if substeps > cfg.max_substeps {
            point.swallowed_at = Some(t0 + tau);
            break;
        }
        // Land exactly on the segment end when the remainder is tiny.
        if remaining - h < 1e-3 * h {
            h = remaining;
        }
        let mut next = rk4(domain, seg, tau, h, state);
        renormalize(domain, point.on_boundary, &mut next);
        let ok = is_valid(domain, point.on_boundary, &next) && (next.g - seg.at(tau + h)).norm() >= eps;
        if ok {
            state = next;
            tau = if h == remaining { seg.duration } else { tau + h };
            continue;
        }
        // Crossing of the swallowing guard inside [tau, tau + h]: bisect.
        let (mut lo, mut hi) = (0.0, h);
        let mut last_good = state;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let mut trial = rk4(domain, seg, tau, mid, state);
            renormalize(domain, point.on_boundary, &mut trial);
            if is_valid(domain, point.on_boundary, &trial) && (trial.g - seg.at(tau + mid)).norm() >= eps {
                lo = mid;
                last_good = trial;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * (t0 + tau + h).max(1.0) {
                break;
            }
        }
        state = last_good;
        point.swallowed_at = Some(t0 + tau + hi);
        break;
    }
    point.current = Point::Finite(state.g);
    point.log_derivative = state.log_d;
}

/// Advance every point over `seg` in place.
pub fn advance_in_place(
    domain: Domain,
    points: &mut [MarkedPoint],
    t0: f64,
    seg: &DrivingSegment,
    cfg: &LoewnerConfig,
) {
    for p in points.iter_mut() {
        advance_point(domain, p, t0, seg, cfg);
    }
}

/// Advance a list of marked points by one driving segment.
pub fn advance_points(
    domain: Domain,
    points: &[MarkedPoint],
    t0: f64,
    seg: &DrivingSegment,
    cfg: &LoewnerConfig,
) -> Vec<MarkedPoint> {
    let mut out = points.to_vec();
    advance_in_place(domain, &mut out, t0, seg, cfg);
    out
}

/// Flow `point` along the whole sampled driving path.
pub fn evolve_point(domain: Domain, point: Point, driving: &DrivingPath, cfg: &LoewnerConfig) -> MarkedPoint {
    let mut p = MarkedPoint::new(domain, point);
    for i in 0..driving.len().saturating_sub(1) {
        let seg = driving.segment(domain, i);
        advance_point(domain, &mut p, driving.times[i], &seg, cfg);
        if !p.is_alive() {
            break;
        }
    }
    p
}

/// First time the swallowing guard trips for `point`, or `None` if the
/// point survives the whole driving path.
pub fn swallow_time(domain: Domain, point: Point, driving: &DrivingPath, cfg: &LoewnerConfig) -> Option<f64> {
    evolve_point(domain, point, driving, cfg).swallowed_at
}
