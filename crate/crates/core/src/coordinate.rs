//! Change of coordinates between the half-plane and the disk.
//!
//! A path of X-SLE(kappa; rho) with `sum rho = kappa - 6` is pushed through
//! a Mobius map `psi: X -> Y` and reparameterized by the capacity of `Y`.
//! The uniformizer `phi_t(z) = lambda (z - z_t) / (z - conj(z_t))` of the
//! mapped hull is tracked alongside the path:
//!
//! * half-plane to disk: `z_t = g_t(psi^-1(0))` follows the chordal flow,
//!   `ds/dt = 4 y^2 / |z - W|^4` and `lambda_t` is the image of infinity;
//! * disk to half-plane: `z_s` and `lambda_s = g_s(psi^-1(infinity))` are
//!   integrated in radial time, with `dt/ds = |z - W|^4 / (4 y^2)`.
//!
//! The target-time clock is tabulated on the native grid and inverted with
//! monotone cubic interpolation to resample the mapped path on a uniform
//! grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point};
use crate::error::{Result, SleError};
use crate::loewner::{self, DrivingSegment};
use crate::mobius::{capacity_rate, phi_t, MobiusMap};
use crate::process::{PathSample, SleParams, Stop, StopReason};
use crate::stats::{ks_two_sample, KsResult};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing and `y` monotone.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(SleError::InvalidParams(format!("{n} abscissae for {} values", y.len())));
        }
        if x.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(SleError::InvalidParams("abscissae must increase strictly".into()));
        }
        let secant: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
        let mut m = vec![0.0; n];
        m[0] = secant[0];
        m[n - 1] = secant[n - 2];
        for k in 1..n - 1 {
            m[k] = if secant[k - 1] * secant[k] <= 0.0 { 0.0 } else { 0.5 * (secant[k - 1] + secant[k]) };
        }
        for k in 0..n - 1 {
            if secant[k] == 0.0 {
                m[k] = 0.0;
                m[k + 1] = 0.0;
                continue;
            }
            let a = m[k] / secant[k];
            let b = m[k + 1] / secant[k];
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                m[k] = tau * a * secant[k];
                m[k + 1] = tau * b * secant[k];
            }
        }
        Ok(MonotoneCubic { x, y, slopes: m })
    }

    /// Value at `t`, clamped to the end values outside the knot range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|&v| v <= t) - 1;
        let h = self.x[k + 1] - self.x[k];
        let u = (t - self.x[k]) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.y[k] + h10 * h * self.slopes[k] + h01 * self.y[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

/// Source time against target time, both strictly increasing from zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReparamTable {
    pub source: Vec<f64>,
    pub target: Vec<f64>,
}

impl ReparamTable {
    pub fn new(source: Vec<f64>, target: Vec<f64>) -> Result<Self> {
        if source.len() != target.len() || source.len() < 2 {
            return Err(SleError::GridExhausted(target.last().copied().unwrap_or(0.0)));
        }
        if source[0] != 0.0 || target[0] != 0.0 {
            return Err(SleError::InvalidParams("reparameterization must start at 0".into()));
        }
        let increasing = |v: &[f64]| v.windows(2).all(|p| p[1] > p[0]);
        if !increasing(&source) || !increasing(&target) {
            return Err(SleError::InvalidParams("reparameterization is not strictly increasing".into()));
        }
        Ok(ReparamTable { source, target })
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// Last tabulated target time.
    pub fn target_end(&self) -> f64 {
        *self.target.last().expect("table is non-empty")
    }

    /// Target time at source time `t`.
    pub fn target_at(&self, t: f64) -> f64 {
        MonotoneCubic::new(self.source.clone(), self.target.clone()).expect("validated table").eval(t)
    }

    /// Source time at target time `s`.
    pub fn source_at(&self, s: f64) -> f64 {
        self.inverse().eval(s)
    }

    fn inverse(&self) -> MonotoneCubic {
        MonotoneCubic::new(self.target.clone(), self.source.clone()).expect("validated table")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformOptions {
    /// Spacing of the uniform output grid in target time.
    pub grid_step: f64,
    /// Stop once the target clock passes this value.
    pub target_max: Option<f64>,
    /// Distance at which the driving point is considered to have reached the
    /// image of the target's normalization point.
    pub eps_target: f64,
    /// Substep bound `h <= safety * distance^2`.
    pub safety: f64,
    pub max_substeps: usize,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { grid_step: 1e-3, target_max: None, eps_target: 1e-4, safety: 0.02, max_substeps: 1 << 22 }
    }
}

/// State of the uniformizer on the native grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformizerRecord {
    pub source_time: f64,
    pub target_time: f64,
    pub z: Complex64,
    pub lambda: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformedPath {
    /// The mapped path on a uniform target-time grid. Brownian increments
    /// and derivatives are not carried over.
    pub sample: PathSample,
    pub table: ReparamTable,
    pub native: Vec<UniformizerRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Direction {
    HalfPlaneToDisk,
    DiskToHalfPlane,
}

#[derive(Clone, Copy, Debug)]
struct Frame {
    z: Complex64,
    lambda: Complex64,
    clock: f64,
}

impl Frame {
    fn axpy(self, k: Frame, h: f64) -> Frame {
        Frame { z: self.z + k.z * h, lambda: self.lambda + k.lambda * h, clock: self.clock + k.clock * h }
    }
}

fn chordal_rates(w: f64, f: Frame) -> Frame {
    let d = f.z - w;
    let d2 = d.norm_sqr();
    let y = f.z.im;
    let q = 4.0 * y / (d2 * d2);
    Frame { z: 2.0 / d, lambda: f.lambda * Complex64::new(0.0, q * (w - f.z.re)), clock: q * y }
}

/// Half-plane driving value seen through `phi_t^-1`.
fn pulled_back_driving(w_hat: Complex64, f: &Frame) -> f64 {
    ((w_hat * f.z.conj() - f.lambda * f.z) / (w_hat - f.lambda)).re
}

fn radial_rates(w_hat: Complex64, f: Frame) -> Frame {
    let w = pulled_back_driving(w_hat, &f);
    let d = f.z - w;
    let d2 = d.norm_sqr();
    let y2 = f.z.im * f.z.im;
    Frame {
        z: (f.z.conj() - w) * (d2 / (2.0 * y2)),
        lambda: -f.lambda * (f.lambda + w_hat) / (f.lambda - w_hat),
        clock: d2 * d2 / (4.0 * y2),
    }
}

impl Direction {
    fn rates(self, w: Complex64, f: Frame) -> Frame {
        match self {
            Direction::HalfPlaneToDisk => chordal_rates(w.re, f),
            Direction::DiskToHalfPlane => radial_rates(w, f),
        }
    }

    fn gap(self, w: Complex64, f: &Frame) -> f64 {
        match self {
            Direction::HalfPlaneToDisk => (f.z - w.re).norm(),
            Direction::DiskToHalfPlane => (w - f.lambda).norm(),
        }
    }
}

fn rk4_frame(dir: Direction, seg: &DrivingSegment, tau: f64, h: f64, f: Frame) -> Frame {
    let k1 = dir.rates(seg.at(tau), f);
    let k2 = dir.rates(seg.at(tau + 0.5 * h), f.axpy(k1, 0.5 * h));
    let k3 = dir.rates(seg.at(tau + 0.5 * h), f.axpy(k2, 0.5 * h));
    let k4 = dir.rates(seg.at(tau + h), f.axpy(k3, h));
    let mut out = f.axpy(k1, h / 6.0).axpy(k2, h / 3.0).axpy(k3, h / 3.0).axpy(k4, h / 6.0);
    out.lambda /= out.lambda.norm();
    out
}

fn frame_ok(f: &Frame) -> bool {
    f.z.re.is_finite() && f.z.im > 0.0 && f.lambda.re.is_finite() && f.lambda.im.is_finite() && f.clock.is_finite()
}

/// Advance the frame over one driving segment. Returns the local time at
/// which the target guard tripped, if it did.
fn integrate_segment(dir: Direction, seg: &DrivingSegment, frame: &mut Frame, opts: &TransformOptions) -> Option<f64> {
    let travel = match dir {
        Direction::HalfPlaneToDisk => (seg.end - seg.start).norm(),
        Direction::DiskToHalfPlane => (seg.end / seg.start).arg().abs(),
    };
    let mut tau = 0.0;
    let mut substeps = 0usize;
    while tau < seg.duration {
        let remaining = seg.duration - tau;
        let dist = dir.gap(seg.at(tau), frame);
        if dist < opts.eps_target {
            return Some(tau);
        }
        let mut h = remaining.min(opts.safety * dist * dist);
        if travel > 0.0 {
            h = h.min(seg.duration * 0.25 * dist / travel);
        }
        let speed = dir.rates(seg.at(tau), *frame).z.norm();
        if speed > 0.0 {
            h = h.min(0.1 * frame.z.im / speed);
        }
        if remaining - h < 1e-3 * h {
            h = remaining;
        }
        let mut accepted = false;
        for _ in 0..40 {
            substeps += 1;
            if substeps > opts.max_substeps {
                return Some(tau);
            }
            let next = rk4_frame(dir, seg, tau, h, *frame);
            if frame_ok(&next) && dir.gap(seg.at(tau + h), &next) >= opts.eps_target {
                *frame = next;
                tau = if h == remaining { seg.duration } else { tau + h };
                accepted = true;
                break;
            }
            h *= 0.5;
        }
        if !accepted {
            return Some(tau);
        }
    }
    None
}

fn direction_of(psi: &MobiusMap) -> Result<Direction> {
    match (psi.from, psi.to) {
        (Domain::HalfPlane, Domain::Disk) => Ok(Direction::HalfPlaneToDisk),
        (Domain::Disk, Domain::HalfPlane) => Ok(Direction::DiskToHalfPlane),
        (a, b) => Err(SleError::Precondition(format!("no coordinate change from {a} to {b}"))),
    }
}

/// Driving value and force points in the target domain at one native node.
fn target_values(dir: Direction, frame: &Frame, w: Complex64, v: &[Point]) -> Result<(Complex64, Vec<Point>)> {
    let phi = phi_t(Point::Finite(frame.z), frame.lambda)?;
    match dir {
        Direction::HalfPlaneToDisk => {
            let w_hat = phi
                .apply(Point::Finite(w))
                .finite()
                .ok_or_else(|| SleError::Degenerate("driving point mapped to infinity".into()))?;
            let pts = v.iter().map(|&p| Domain::Disk.snap(phi.apply(p))).collect();
            Ok((w_hat / w_hat.norm(), pts))
        }
        Direction::DiskToHalfPlane => {
            let inv = phi.inverse();
            let w_ch = inv
                .apply(Point::Finite(w))
                .finite()
                .ok_or_else(|| SleError::Degenerate("driving point mapped to infinity".into()))?;
            let pts = v.iter().map(|&p| Domain::HalfPlane.snap(inv.apply(p))).collect();
            Ok((Complex64::new(w_ch.re, 0.0), pts))
        }
    }
}

fn lerp_point(domain: Domain, a: Point, b: Point, frac: f64) -> Point {
    match (a, b) {
        (Point::Finite(x), Point::Finite(y)) => {
            if domain == Domain::Disk && domain.is_boundary(a) && domain.is_boundary(b) {
                Point::Finite(x * Complex64::from_polar(1.0, frac * (y / x).arg()))
            } else {
                Point::Finite(x + (y - x) * frac)
            }
        }
        _ => {
            if frac < 0.5 {
                a
            } else {
                b
            }
        }
    }
}

/// Incremental form of [`transform_sample`]: records of a path are fed as
/// they are produced, so a simulation can stop as soon as the target clock
/// has gone far enough.
#[derive(Clone, Debug)]
pub struct Transformer {
    dir: Direction,
    psi: MobiusMap,
    opts: TransformOptions,
    frame: Frame,
    native: Vec<UniformizerRecord>,
    w_out: Vec<Complex64>,
    v_out: Vec<Vec<Point>>,
    /// Next record of the source path to integrate up to.
    next: usize,
    finished: Option<(StopReason, Option<f64>)>,
}

impl Transformer {
    /// Requires `sum rho = kappa - 6` (append the neutral force point first
    /// if needed) and `psi` between the half-plane and the disk.
    pub fn new(params: &SleParams, psi: &MobiusMap, opts: &TransformOptions) -> Result<Self> {
        let dir = direction_of(psi)?;
        if psi.from != params.domain {
            return Err(SleError::Precondition(format!(
                "map starts in {} but the path lives in {}",
                psi.from, params.domain
            )));
        }
        let excess = params.rho_sum() - (params.kappa - 6.0);
        if excess.abs() > 1e-9 {
            return Err(SleError::Precondition(format!(
                "force strengths sum to {} but kappa - 6 = {}",
                params.rho_sum(),
                params.kappa - 6.0
            )));
        }
        if !(opts.grid_step > 0.0) {
            return Err(SleError::InvalidParams(format!("grid step {}", opts.grid_step)));
        }
        let frame = match dir {
            Direction::HalfPlaneToDisk => {
                let p = psi.inverse().apply(Point::real(0.0));
                let lambda = psi
                    .apply(Point::Infinity)
                    .finite()
                    .ok_or_else(|| SleError::Degenerate("infinity is sent to infinity".into()))?;
                match p {
                    Point::Finite(z) if z.im > 0.0 => Frame { z, lambda: lambda / lambda.norm(), clock: 0.0 },
                    other => return Err(SleError::Degenerate(format!("preimage of 0 is {other}"))),
                }
            }
            Direction::DiskToHalfPlane => {
                let a = psi
                    .inverse()
                    .apply(Point::Infinity)
                    .finite()
                    .ok_or_else(|| SleError::Degenerate("preimage of infinity is not finite".into()))?;
                let z = psi
                    .apply(Point::real(0.0))
                    .finite()
                    .ok_or_else(|| SleError::Degenerate("0 is sent to infinity".into()))?;
                Frame { z, lambda: a / a.norm(), clock: 0.0 }
            }
        };
        let m = params.force_points.len();
        Ok(Transformer {
            dir,
            psi: *psi,
            opts: *opts,
            frame,
            native: Vec::new(),
            w_out: Vec::new(),
            v_out: vec![Vec::new(); m],
            next: 0,
            finished: None,
        })
    }

    /// Whether the target clock has reached `target_max` or the target
    /// guard tripped.
    pub fn is_finished(&self) -> bool {
        self.finished.is_some()
    }

    /// Current value of the target clock.
    pub fn clock(&self) -> f64 {
        self.frame.clock
    }

    fn push(&mut self, sample: &PathSample, i: usize) -> Result<()> {
        let row: Vec<Point> = sample.v.iter().map(|tr| tr[i]).collect();
        let (w, pts) = target_values(self.dir, &self.frame, sample.w[i], &row)?;
        self.native.push(UniformizerRecord {
            source_time: sample.times[i],
            target_time: self.frame.clock,
            z: self.frame.z,
            lambda: self.frame.lambda,
        });
        self.w_out.push(w);
        for (tr, p) in self.v_out.iter_mut().zip(pts) {
            tr.push(p);
        }
        Ok(())
    }

    /// Integrate over the records of `sample` not seen yet. Returns whether
    /// the transform is finished.
    pub fn feed(&mut self, sample: &PathSample) -> Result<bool> {
        if self.finished.is_some() {
            return Ok(true);
        }
        if self.next == 0 {
            if sample.is_empty() {
                return Ok(false);
            }
            self.push(sample, 0)?;
            self.next = 1;
        }
        let domain = sample.params.domain;
        while self.next < sample.len() {
            let i = self.next - 1;
            self.next += 1;
            let duration = sample.times[i + 1] - sample.times[i];
            if duration <= 0.0 {
                continue;
            }
            let seg = DrivingSegment::new(domain, sample.w[i], sample.w[i + 1], duration);
            let mut next = self.frame;
            if integrate_segment(self.dir, &seg, &mut next, &self.opts).is_some() {
                self.finished = Some((StopReason::TargetReached, Some(next.clock)));
                return Ok(true);
            }
            let moved = next.clock > self.frame.clock;
            self.frame = next;
            if !moved {
                continue;
            }
            if self.push(sample, i + 1).is_err() {
                self.finished = Some((StopReason::TargetReached, Some(self.frame.clock)));
                return Ok(true);
            }
            if self.opts.target_max.is_some_and(|s| self.frame.clock >= s) {
                self.finished = Some((StopReason::TimeLimit, None));
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Resample on the uniform target grid. `sample` is the source path the
    /// transformer was fed with.
    pub fn finish(self, sample: &PathSample) -> Result<TransformedPath> {
        let params = &sample.params;
        let (stop_reason, stop_time) = self.finished.unwrap_or((sample.stopped_at.reason, None));
        let native = self.native;
        let (w_out, v_out) = (self.w_out, self.v_out);
        let m = v_out.len();
        let table = ReparamTable::new(
            native.iter().map(|r| r.source_time).collect(),
            native.iter().map(|r| r.target_time).collect(),
        )?;
        let inverse = table.inverse();
        let mut t_end = table.target_end();
        if let Some(s) = self.opts.target_max {
            t_end = t_end.min(s);
        }
        let grid_step = self.opts.grid_step;
        let steps = (t_end / grid_step + 1e-9).floor() as usize;
        let mut times = Vec::with_capacity(steps + 1);
        let mut w_grid = Vec::with_capacity(steps + 1);
        let mut v_grid: Vec<Vec<Point>> = vec![Vec::with_capacity(steps + 1); m];
        let target_domain = self.psi.to;
        for k in 0..=steps {
            let s = (k as f64 * grid_step).min(t_end);
            let sigma = inverse.eval(s);
            let i = table.source.partition_point(|&x| x <= sigma).clamp(1, table.len() - 1) - 1;
            let frac = ((sigma - table.source[i]) / (table.source[i + 1] - table.source[i])).clamp(0.0, 1.0);
            times.push(s);
            let w = match target_domain {
                Domain::Disk => w_out[i] * Complex64::from_polar(1.0, frac * (w_out[i + 1] / w_out[i]).arg()),
                _ => w_out[i] + (w_out[i + 1] - w_out[i]) * frac,
            };
            w_grid.push(w);
            for (tr, src) in v_grid.iter_mut().zip(&v_out) {
                tr.push(lerp_point(target_domain, src[i], src[i + 1], frac));
            }
        }
        let stop = Stop { time: stop_time.unwrap_or(t_end).max(t_end), reason: stop_reason };
        let out_params = SleParams {
            domain: target_domain,
            kappa: params.kappa,
            rhos: params.rhos.clone(),
            w0: Point::Finite(w_grid[0]),
            force_points: v_grid.iter().map(|tr| tr[0]).collect(),
            t_max: t_end,
            dt: grid_step,
            eps_stop: params.eps_stop,
            seed: params.seed,
            path_index: params.path_index,
            loewner: params.loewner,
            record_every: 1,
        };
        Ok(TransformedPath {
            sample: PathSample {
                params: out_params,
                times,
                w: w_grid,
                v: v_grid,
                log_derivatives: vec![Vec::new(); m],
                brownian_increments: Vec::new(),
                stopped_at: stop,
            },
            table,
            native,
        })
    }
}

/// Push a path through `psi` and resample it in the target's capacity.
///
/// Requires `sum rho = kappa - 6` (append the neutral force point first if
/// needed) and `psi` between the half-plane and the disk.
pub fn transform_sample(sample: &PathSample, psi: &MobiusMap, opts: &TransformOptions) -> Result<TransformedPath> {
    let mut tr = Transformer::new(&sample.params, psi, opts)?;
    if sample.len() < 2 {
        return Err(SleError::GridExhausted(0.0));
    }
    tr.feed(sample)?;
    tr.finish(sample)
}

/// Simulate a path and transform it on the fly, stopping the simulation as
/// soon as the target clock passes `opts.target_max`.
pub fn simulate_transformed(params: &SleParams, psi: &MobiusMap, opts: &TransformOptions) -> Result<TransformedPath> {
    let mut tr = Transformer::new(params, psi, opts)?;
    let mut failure = None;
    let sample = crate::process::run_process_until(params, |s| match tr.feed(s) {
        Ok(done) => !done,
        Err(e) => {
            failure = Some(e);
            false
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    tr.feed(&sample)?;
    tr.finish(&sample)
}

/// Radial capacity `s(t) = log|g_t'(p)| + log(y_0 / y_t)` seen from the
/// interior force point `index` of a half-plane path, on the recorded grid.
pub fn capacity_profile(sample: &PathSample, index: usize) -> Result<Vec<f64>> {
    if sample.params.domain != Domain::HalfPlane {
        return Err(SleError::Precondition("capacity profile needs a half-plane path".into()));
    }
    let track = sample.v.get(index).ok_or_else(|| SleError::InvalidParams(format!("no force point {index}")))?;
    let logs = &sample.log_derivatives[index];
    if logs.len() != track.len() {
        return Err(SleError::Precondition("derivatives were not recorded".into()));
    }
    let y0 = match track[0] {
        Point::Finite(z) if z.im > 0.0 => z.im,
        other => return Err(SleError::Precondition(format!("force point {index} = {other} is not interior"))),
    };
    track
        .iter()
        .zip(logs)
        .map(|(p, l)| match p {
            Point::Finite(z) if z.im > 0.0 => Ok(l.re + (y0 / z.im).ln()),
            _ => Err(SleError::Degenerate(format!("force point {index} reached the boundary"))),
        })
        .collect()
}

/// Trapezoidal integral of `4 y^2 / |z - W|^4` along the recorded path; a
/// quadrature cross-check of [`capacity_profile`].
pub fn capacity_quadrature(sample: &PathSample, index: usize) -> Result<Vec<f64>> {
    let track = sample.v.get(index).ok_or_else(|| SleError::InvalidParams(format!("no force point {index}")))?;
    let rates: Vec<f64> = track.iter().zip(&sample.w).map(|(&p, w)| capacity_rate(p, w.re)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(rates.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..rates.len() {
        acc += 0.5 * (rates[i] + rates[i - 1]) * (sample.times[i] - sample.times[i - 1]);
        out.push(acc);
    }
    Ok(out)
}

/// Cut a half-plane path where the radial capacity seen from force point
/// `index` first reaches `s_max`.
pub fn truncate_at_capacity(sample: &PathSample, index: usize, s_max: f64) -> Result<PathSample> {
    let s = capacity_profile(sample, index)?;
    let Some(cut) = s.iter().position(|&v| v >= s_max) else {
        return Ok(sample.clone());
    };
    let keep = cut + 1;
    let mut out = sample.clone();
    out.times.truncate(keep);
    out.w.truncate(keep);
    for tr in &mut out.v {
        tr.truncate(keep);
    }
    for tr in &mut out.log_derivatives {
        tr.truncate(keep.min(tr.len()));
    }
    out.stopped_at = Stop { time: out.times[cut], reason: StopReason::CapacityLimit };
    Ok(out)
}

/// Which scalar of a point enters a marginal comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    Re,
    Im,
    Arg,
    Abs,
}

impl Component {
    pub fn of(self, z: Complex64) -> f64 {
        match self {
            Component::Re => z.re,
            Component::Im => z.im,
            Component::Arg => z.arg(),
            Component::Abs => z.norm(),
        }
    }

    /// Natural coordinate of a point of `domain`: the position along the
    /// boundary for boundary points, the distance to it otherwise.
    pub fn natural(domain: Domain, on_boundary: bool) -> Self {
        match (domain, on_boundary) {
            (Domain::Disk, true) => Component::Arg,
            (Domain::Disk, false) => Component::Abs,
            (_, true) => Component::Re,
            (_, false) => Component::Im,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub significance: f64,
    /// Force point whose marginal is compared, if any.
    pub force_index: Option<usize>,
    /// Defaults to [`Component::natural`].
    pub force_component: Option<Component>,
    pub min_paths: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig { significance: 0.01, force_index: Some(0), force_component: None, min_paths: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointComparison {
    pub time: f64,
    pub paths_a: usize,
    pub paths_b: usize,
    pub excluded_a: usize,
    pub excluded_b: usize,
    pub driving: KsResult,
    pub force: Option<KsResult>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub domain: Domain,
    pub significance: f64,
    pub checkpoints: Vec<CheckpointComparison>,
    pub pass: bool,
}

/// Driving value and force points of a path at time `t`, interpolated on
/// the recorded grid. `None` if the path stopped before `t`.
pub fn state_at(sample: &PathSample, t: f64) -> Option<(Complex64, Vec<Point>)> {
    let last = *sample.times.last()?;
    if last < t - 1e-9 || sample.stopped_at.time < t - 1e-9 {
        return None;
    }
    let i = sample.index_at_or_before(t)?;
    let domain = sample.params.domain;
    if i + 1 >= sample.len() || sample.times[i] >= t {
        return Some((sample.w[i], sample.v.iter().map(|tr| tr[i]).collect()));
    }
    let frac = (t - sample.times[i]) / (sample.times[i + 1] - sample.times[i]);
    let w = match domain {
        Domain::Disk => sample.w[i] * Complex64::from_polar(1.0, frac * (sample.w[i + 1] / sample.w[i]).arg()),
        _ => sample.w[i] + (sample.w[i + 1] - sample.w[i]) * frac,
    };
    let v = sample.v.iter().map(|tr| lerp_point(domain, tr[i], tr[i + 1], frac)).collect();
    Some((w, v))
}

struct Marginals {
    driving: Vec<f64>,
    force: Vec<f64>,
    excluded: usize,
}

fn marginals(ensemble: &[PathSample], t: f64, cfg: &CompareConfig) -> Marginals {
    let mut out = Marginals { driving: Vec::new(), force: Vec::new(), excluded: 0 };
    for s in ensemble {
        let Some((w, v)) = state_at(s, t) else {
            out.excluded += 1;
            continue;
        };
        let domain = s.params.domain;
        out.driving.push(match domain {
            Domain::Disk => w.arg(),
            _ => w.re,
        });
        if let Some(j) = cfg.force_index {
            if let Some(Point::Finite(z)) = v.get(j).copied() {
                let on_boundary = domain.is_boundary(s.v[j][0]);
                let comp = cfg.force_component.unwrap_or(Component::natural(domain, on_boundary));
                out.force.push(comp.of(z));
            }
        }
    }
    out
}

/// Two-sample KS comparison of two ensembles at each checkpoint, on the
/// driving marginal and optionally on one force point.
pub fn compare_laws(
    a: &[PathSample],
    b: &[PathSample],
    checkpoints: &[f64],
    cfg: &CompareConfig,
) -> Result<ComparisonReport> {
    if a.len() != b.len() {
        return Err(SleError::Precondition(format!("ensemble sizes differ: {} vs {}", a.len(), b.len())));
    }
    if a.len() < cfg.min_paths {
        return Err(SleError::InsufficientSamples { needed: cfg.min_paths, got: a.len() });
    }
    let domain = a[0].params.domain;
    if a.iter().chain(b).any(|s| s.params.domain != domain) {
        return Err(SleError::Precondition("ensembles live in different domains".into()));
    }
    let mut rows = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        let ma = marginals(a, t, cfg);
        let mb = marginals(b, t, cfg);
        let driving = ks_two_sample(&ma.driving, &mb.driving)?;
        let force = if cfg.force_index.is_some() { Some(ks_two_sample(&ma.force, &mb.force)?) } else { None };
        let pass = driving.p_value >= cfg.significance && force.is_none_or(|f| f.p_value >= cfg.significance);
        rows.push(CheckpointComparison {
            time: t,
            paths_a: ma.driving.len(),
            paths_b: mb.driving.len(),
            excluded_a: ma.excluded,
            excluded_b: mb.excluded,
            driving,
            force,
            pass,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(ComparisonReport { domain, significance: cfg.significance, checkpoints: rows, pass })
}

/// Swallowing time of a point under a recorded path, as a convenience over
/// [`loewner::swallow_time`].
pub fn swallow_time_along(sample: &PathSample, point: Point) -> Option<f64> {
    loewner::swallow_time(sample.params.domain, point, &sample.driving_path(), &sample.params.loewner)
}
