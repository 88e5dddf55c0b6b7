//! The driving process of X-SLE(kappa; rho_1, ..., rho_m).
//!
//! The driving point moves by
//!
//! ```text
//! dW = G_X(W, dB, dt) + sum_j (rho_j / 2) tildePsi_X(V^j, W) dt
//! ```
//!
//! while each force point follows the Loewner flow `dV^j = Psi_X(W, V^j) dt`.
//! In the half-plane and the strip `G_X = sqrt(kappa) dB`. In the disk the
//! driving point is written `W = exp(i theta)` and `theta` is stepped with
//! noise `sqrt(kappa) dB` and drift `Re(sum_j (rho_j/2) tildePsi / (i W))`;
//! the `-(kappa/2) W dt` part of `G_D` is the Ito correction of the
//! exponential and does not appear in the angle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point};
use crate::error::{Result, SleError};
use crate::loewner::{self, DrivingPath, DrivingSegment, LoewnerConfig, MarkedPoint};
use crate::rng;

/// Number of bridge substeps used when the driving point is close to a
/// force point.
pub const REFINE_PIECES: usize = 16;

/// Collision guard: the run stops once `|W - V^j|` drops below the guard.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopGuard {
    pub boundary: f64,
    pub interior: f64,
}

impl Default for StopGuard {
    fn default() -> Self {
        StopGuard { boundary: 1e-3, interior: 1e-4 }
    }
}

impl StopGuard {
    pub fn uniform(eps: f64) -> Self {
        StopGuard { boundary: eps, interior: eps }
    }

    fn for_point(&self, p: &MarkedPoint) -> f64 {
        if p.on_boundary {
            self.boundary
        } else {
            self.interior
        }
    }
}

fn default_record_every() -> usize {
    1
}

/// Parameters of one X-SLE(kappa; rho) path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SleParams {
    pub domain: Domain,
    pub kappa: f64,
    pub rhos: Vec<f64>,
    pub w0: Point,
    pub force_points: Vec<Point>,
    pub t_max: f64,
    pub dt: f64,
    #[serde(default)]
    pub eps_stop: StopGuard,
    pub seed: u64,
    /// Index of the path inside an ensemble; part of the random key.
    #[serde(default)]
    pub path_index: u64,
    #[serde(default)]
    pub loewner: LoewnerConfig,
    /// Keep every n-th base step in the recorded path.
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

impl SleParams {
    /// Ordinary SLE(kappa) from `w0` with the default grid (`dt = 1e-4`,
    /// `t_max = 1`).
    pub fn new(domain: Domain, kappa: f64, w0: Point) -> Self {
        SleParams {
            domain,
            kappa,
            rhos: Vec::new(),
            w0,
            force_points: Vec::new(),
            t_max: 1.0,
            dt: 1e-4,
            eps_stop: StopGuard::default(),
            seed: 0,
            path_index: 0,
            loewner: LoewnerConfig::default(),
            record_every: 1,
        }
    }

    pub fn with_force_point(mut self, point: Point, rho: f64) -> Self {
        self.force_points.push(point);
        self.rhos.push(rho);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_path_index(mut self, index: u64) -> Self {
        self.path_index = index;
        self
    }

    pub fn with_time(mut self, t_max: f64, dt: f64) -> Self {
        self.t_max = t_max;
        self.dt = dt;
        self
    }

    pub fn with_record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }

    pub fn rho_sum(&self) -> f64 {
        self.rhos.iter().sum()
    }

    /// Number of base steps on `[0, t_max]`.
    pub fn steps(&self) -> usize {
        ((self.t_max / self.dt) - 1e-9).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SleError::InvalidParams(m));
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be a finite non-negative number, got {}", self.kappa));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return bad(format!("t_max must be positive, got {}", self.t_max));
        }
        if !(self.eps_stop.boundary > 0.0 && self.eps_stop.interior > 0.0) {
            return bad("stop guards must be positive".into());
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if self.rhos.len() != self.force_points.len() {
            return bad(format!("{} rho values for {} force points", self.rhos.len(), self.force_points.len()));
        }
        if self.rhos.iter().any(|r| !r.is_finite()) {
            return bad("rho values must be finite".into());
        }
        let w0 = self.domain.snap(self.w0);
        let Point::Finite(w) = w0 else {
            return bad(format!("w0 must be a finite boundary point, got {}", self.w0));
        };
        let on_edge = match self.domain {
            Domain::HalfPlane | Domain::Strip => w.im == 0.0,
            Domain::Disk => self.domain.is_boundary(w0),
        };
        if !on_edge {
            return bad(format!("w0 = {} is not on the boundary of {}", self.w0, self.domain));
        }
        for (j, &v) in self.force_points.iter().enumerate() {
            let v = self.domain.snap(v);
            if !self.domain.contains_closure(v) {
                return bad(format!("force point {j} = {v} is outside the closed domain"));
            }
            if v == w0 {
                return bad(format!("force point {j} coincides with w0"));
            }
        }
        Ok(())
    }
}

/// Why a path stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopReason {
    /// Reached `t_max`.
    TimeLimit,
    /// `|W - V^j|` dropped below the stop guard.
    Collision { index: usize },
    /// Force point `index` was swallowed by the flow without the collision
    /// guard tripping first.
    Swallowed { index: usize },
    /// After a change of coordinates: the driving point reached the image of
    /// the target domain's normalization point.
    TargetReached,
    /// Truncated once the capacity seen from a reference point passed a
    /// limit.
    CapacityLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stop {
    pub time: f64,
    pub reason: StopReason,
}

/// Instantaneous state of the process.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessState {
    pub t: f64,
    pub w: Complex64,
    /// Angle of `w` (disk only; zero otherwise).
    pub theta: f64,
    pub points: Vec<MarkedPoint>,
    pub stopped: Option<Stop>,
}

impl ProcessState {
    pub fn initial(params: &SleParams) -> Self {
        let domain = params.domain;
        let w = match domain.snap(params.w0) {
            Point::Finite(w) => w,
            _ => Complex64::new(0.0, 0.0),
        };
        let (w, theta) = match domain {
            Domain::Disk => {
                let theta = w.arg();
                (Complex64::from_polar(1.0, theta), theta)
            }
            _ => (Complex64::new(w.re, 0.0), 0.0),
        };
        let points = params.force_points.iter().map(|&p| MarkedPoint::new(domain, p)).collect();
        ProcessState { t: 0.0, w, theta, points, stopped: None }
    }

    pub fn force_positions(&self) -> Vec<Point> {
        self.points.iter().map(|p| p.current).collect()
    }
}

fn drift_from_points(
    domain: Domain,
    rhos: &[f64],
    guard: &StopGuard,
    w: Complex64,
    points: &[MarkedPoint],
) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for (index, (p, &rho)) in points.iter().zip(rhos).enumerate() {
        if let Point::Finite(v) = p.current {
            let distance = (w - v).norm();
            if distance < guard.for_point(p) {
                return Err(SleError::Collision { index, distance });
            }
        }
        if rho == 0.0 {
            continue;
        }
        match loewner::tilde_psi(domain, p.current, Point::Finite(w))? {
            Point::Finite(f) => total += f * (rho * 0.5),
            other => return Err(SleError::InvalidPoint(format!("drift of force point {index} is {other}"))),
        }
    }
    Ok(total)
}

/// `sum_j (rho_j / 2) tildePsi_X(V^j, W)`.
///
/// Fails with [`SleError::Collision`] when `W` is within the stop guard of a
/// force point.
pub fn drift_term(params: &SleParams, w: Point, v: &[Point]) -> Result<Point> {
    let Point::Finite(w) = params.domain.snap(w) else {
        return Err(SleError::InvalidPoint(format!("driving point {w}")));
    };
    let points: Vec<MarkedPoint> = v.iter().map(|&p| MarkedPoint::new(params.domain, p)).collect();
    drift_from_points(params.domain, &params.rhos, &params.eps_stop, w, &points).map(Point::Finite)
}

/// One Euler-Maruyama step of length `dt` with Brownian increment `db`.
///
/// A collision detected before the step (or after moving the force points)
/// marks the returned state as stopped.
pub fn step(params: &SleParams, state: &ProcessState, db: f64, dt: f64) -> ProcessState {
    let mut next = state.clone();
    step_in_place(params, &mut next, db, dt);
    next
}

fn step_in_place(params: &SleParams, state: &mut ProcessState, db: f64, dt: f64) {
    if state.stopped.is_some() {
        return;
    }
    let domain = params.domain;
    let drift = match drift_from_points(domain, &params.rhos, &params.eps_stop, state.w, &state.points) {
        Ok(d) => d,
        Err(SleError::Collision { index, .. }) => {
            state.stopped = Some(Stop { time: state.t, reason: StopReason::Collision { index } });
            return;
        }
        // Any other failure (a field evaluated at its singularity) means the
        // point has effectively been reached.
        Err(_) => {
            let index = nearest_point(state).unwrap_or(0);
            state.stopped = Some(Stop { time: state.t, reason: StopReason::Collision { index } });
            return;
        }
    };
    let noise = params.kappa.sqrt() * db;
    let w_old = state.w;
    match domain {
        Domain::Disk => {
            let angular = (drift / (Complex64::i() * w_old)).re;
            state.theta += angular * dt + noise;
            state.w = Complex64::from_polar(1.0, state.theta);
        }
        Domain::HalfPlane | Domain::Strip => {
            state.w = Complex64::new(w_old.re + drift.re * dt + noise, 0.0);
        }
    }
    let seg = DrivingSegment::new(domain, w_old, state.w, dt);
    loewner::advance_in_place(domain, &mut state.points, state.t, &seg, &params.loewner);
    state.t += dt;
    for (index, p) in state.points.iter().enumerate() {
        if let Some(ts) = p.swallowed_at {
            state.stopped = Some(Stop { time: ts, reason: StopReason::Swallowed { index } });
            return;
        }
    }
    if let Some(index) = colliding_point(params, state) {
        state.stopped = Some(Stop { time: state.t, reason: StopReason::Collision { index } });
    }
}

fn nearest_point(state: &ProcessState) -> Option<usize> {
    state
        .points
        .iter()
        .enumerate()
        .filter_map(|(j, p)| p.current.finite().map(|v| (j, (v - state.w).norm())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(j, _)| j)
}

fn colliding_point(params: &SleParams, state: &ProcessState) -> Option<usize> {
    state
        .points
        .iter()
        .position(|p| p.current.finite().is_some_and(|v| (v - state.w).norm() < params.eps_stop.for_point(p)))
}

fn needs_refinement(params: &SleParams, state: &ProcessState) -> bool {
    state
        .points
        .iter()
        .any(|p| p.current.finite().is_some_and(|v| (v - state.w).norm() < 10.0 * params.eps_stop.for_point(p)))
}

/// A recorded trajectory of the process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub params: SleParams,
    pub times: Vec<f64>,
    /// Driving values `W_t` at each recorded time.
    pub w: Vec<Complex64>,
    /// `v[j][i]` is the image of force point `j` at `times[i]`.
    pub v: Vec<Vec<Point>>,
    /// `log g_t'` at each force point; empty when not tracked.
    pub log_derivatives: Vec<Vec<Complex64>>,
    /// The base-grid increments `dB` that produced the path.
    pub brownian_increments: Vec<f64>,
    pub stopped_at: Stop,
}

impl PathSample {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn driving_path(&self) -> DrivingPath {
        DrivingPath { times: self.times.clone(), values: self.w.clone() }
    }

    fn push_state(&mut self, state: &ProcessState) {
        self.times.push(state.t);
        self.w.push(state.w);
        for (j, p) in state.points.iter().enumerate() {
            self.v[j].push(p.current);
            self.log_derivatives[j].push(p.log_derivative);
        }
    }

    /// Largest recorded index with `times[i] <= t`.
    pub fn index_at_or_before(&self, t: f64) -> Option<usize> {
        let n = self.times.partition_point(|&s| s <= t + 1e-12);
        n.checked_sub(1)
    }

    /// Thin the record to every `stride`-th entry (keeping the last one).
    pub fn thinned(&self, stride: usize) -> PathSample {
        let stride = stride.max(1);
        let n = self.len();
        let keep: Vec<usize> = (0..n).filter(|i| i % stride == 0 || *i + 1 == n).collect();
        PathSample {
            params: self.params.clone(),
            times: keep.iter().map(|&i| self.times[i]).collect(),
            w: keep.iter().map(|&i| self.w[i]).collect(),
            v: self.v.iter().map(|tr| keep.iter().map(|&i| tr[i]).collect()).collect(),
            log_derivatives: self
                .log_derivatives
                .iter()
                .map(|tr| if tr.is_empty() { Vec::new() } else { keep.iter().map(|&i| tr[i]).collect() })
                .collect(),
            brownian_increments: self.brownian_increments.clone(),
            stopped_at: self.stopped_at,
        }
    }
}

/// Simulate one path up to the first collision or `t_max`.
pub fn run_process(params: &SleParams) -> Result<PathSample> {
    run_process_until(params, |_| true)
}

/// As [`run_process`], but after every base step `keep_going` sees the path
/// recorded so far; returning `false` ends the run there (reported as a time
/// limit at the current time).
pub fn run_process_until(params: &SleParams, mut keep_going: impl FnMut(&PathSample) -> bool) -> Result<PathSample> {
    params.validate()?;
    let n = params.steps();
    let increments = rng::brownian_increments(params.seed, params.path_index, n, params.dt);
    let m = params.force_points.len();
    let mut state = ProcessState::initial(params);
    let mut sample = PathSample {
        params: params.clone(),
        times: Vec::with_capacity(n / params.record_every + 2),
        w: Vec::with_capacity(n / params.record_every + 2),
        v: vec![Vec::new(); m],
        log_derivatives: vec![Vec::new(); m],
        brownian_increments: increments,
        stopped_at: Stop { time: params.t_max, reason: StopReason::TimeLimit },
    };
    sample.push_state(&state);
    if let Some(index) = colliding_point(params, &state) {
        sample.stopped_at = Stop { time: 0.0, reason: StopReason::Collision { index } };
        return Ok(sample);
    }
    for k in 0..n {
        let t_next = ((k + 1) as f64 * params.dt).min(params.t_max);
        let h = t_next - state.t;
        let db = sample.brownian_increments[k] * (h / params.dt).sqrt();
        if needs_refinement(params, &state) {
            let pieces = rng::bridge_increments(params.seed, params.path_index, k as u64, db, h, REFINE_PIECES);
            let sub = h / REFINE_PIECES as f64;
            for piece in pieces {
                step_in_place(params, &mut state, piece, sub);
                if state.stopped.is_some() {
                    break;
                }
            }
        } else {
            step_in_place(params, &mut state, db, h);
        }
        if state.stopped.is_none() {
            state.t = t_next;
        }
        let last = k + 1 == n;
        if state.stopped.is_some() || last || (k + 1) % params.record_every == 0 {
            sample.push_state(&state);
        }
        if let Some(stop) = state.stopped {
            sample.stopped_at = stop;
            break;
        }
        if !keep_going(&sample) {
            sample.stopped_at = Stop { time: state.t, reason: StopReason::TimeLimit };
            break;
        }
    }
    Ok(sample)
}

/// Append the force point `o_X` (or, for the strip, adjust the pair at
/// `+inf`/`-inf`) so that the strengths sum to `kappa - 6`. The law of the
/// driving function is unchanged.
pub fn append_neutral_force_point(params: &SleParams) -> SleParams {
    let mut out = params.clone();
    let missing = (params.kappa - 6.0) - params.rho_sum();
    match params.domain.neutral_point() {
        Some(o) => {
            out.force_points.push(o);
            out.rhos.push(missing);
        }
        None => {
            let half = 0.5 * missing;
            for end in [Point::PlusInfinity, Point::MinusInfinity] {
                match out.force_points.iter().position(|&p| p == end) {
                    Some(j) => out.rhos[j] += half,
                    None => {
                        out.force_points.push(end);
                        out.rhos.push(half);
                    }
                }
            }
        }
    }
    out
}

/// Stored-path counterpart of [`append_neutral_force_point`]: the neutral
/// point is fixed by the flow, so its track is filled in without
/// re-simulating. Samples whose strengths already sum to `kappa - 6` are
/// returned unchanged.
pub fn append_neutral_track(sample: &PathSample) -> Result<PathSample> {
    let params = &sample.params;
    let missing = (params.kappa - 6.0) - params.rho_sum();
    let mut out = sample.clone();
    if missing.abs() <= 1e-9 {
        return Ok(out);
    }
    let o = params
        .domain
        .neutral_point()
        .ok_or_else(|| SleError::Precondition("the strip has no neutral interior point".into()))?;
    out.params.force_points.push(o);
    out.params.rhos.push(missing);
    out.v.push(vec![o; sample.len()]);
    let tracked = sample.log_derivatives.iter().any(|l| !l.is_empty());
    out.log_derivatives.push(if tracked && params.domain == Domain::Disk {
        sample.times.iter().map(|&t| Complex64::new(t, 0.0)).collect()
    } else {
        Vec::new()
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn drift_examples() {
        let p = SleParams::new(Domain::HalfPlane, 2.0, Point::real(0.0)).with_force_point(Point::new(1.0, 1.0), 2.0);
        let d = drift_term(&p, Point::real(0.0), &[Point::new(1.0, 1.0)]).unwrap();
        assert!((d.finite().unwrap() - c(-1.0, 0.0)).norm() < 1e-15);

        let p = SleParams::new(Domain::HalfPlane, 2.0, Point::real(0.0)).with_force_point(Point::new(0.0, 1.0), 5.0);
        let d = drift_term(&p, Point::real(0.0), &[Point::new(0.0, 1.0)]).unwrap();
        assert_eq!(d.finite().unwrap().re, 0.0);

        let p = SleParams::new(Domain::Strip, 2.0, Point::real(0.0))
            .with_force_point(Point::PlusInfinity, 1.3)
            .with_force_point(Point::MinusInfinity, 1.3);
        let d = drift_term(&p, Point::real(0.4), &p.force_points.clone()).unwrap();
        assert_eq!(d.finite().unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn drift_reports_collision() {
        let p = SleParams::new(Domain::HalfPlane, 2.0, Point::real(0.0)).with_force_point(Point::new(0.0, 1e-5), 1.0);
        let err = drift_term(&p, Point::real(0.0), &[Point::new(0.0, 5e-5)]);
        assert!(matches!(err, Err(SleError::Collision { index: 0, .. })));
    }

    #[test]
    fn half_plane_step_without_force_points() {
        let p = SleParams::new(Domain::HalfPlane, 3.0, Point::real(0.25));
        let s = ProcessState::initial(&p);
        let n = step(&p, &s, 0.1, 1e-2);
        assert_eq!(n.w.re, 0.25 + 3f64.sqrt() * 0.1);
        assert_eq!(n.t, 1e-2);
    }

    #[test]
    fn disk_step_without_noise_keeps_angle() {
        let p = SleParams::new(Domain::Disk, 4.0, Point::Finite(Complex64::from_polar(1.0, 0.7)));
        let s = ProcessState::initial(&p);
        let n = step(&p, &s, 0.0, 1e-3);
        assert_eq!(n.theta, s.theta);
        assert!((n.w.norm() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn force_point_increment_matches_loewner_velocity() {
        let dt = 1e-6;
        let p = SleParams::new(Domain::HalfPlane, 0.0, Point::real(0.0)).with_force_point(Point::new(1.0, 1.0), 2.0);
        let s = ProcessState::initial(&p);
        let n = step(&p, &s, 0.0, dt);
        let dv = n.points[0].current.finite().unwrap() - c(1.0, 1.0);
        // 2 dt / (V - W) = (1 - i) dt to first order; W moves by -dt.
        assert!((dv / dt - c(1.0, -1.0)).norm() < 1e-5, "{dv}");
    }

    #[test]
    fn zero_kappa_no_force_is_constant() {
        let p = SleParams::new(Domain::HalfPlane, 0.0, Point::real(0.5)).with_time(0.1, 1e-3);
        let s = run_process(&p).unwrap();
        assert!(s.w.iter().all(|&w| w == c(0.5, 0.0)));
        assert_eq!(s.stopped_at.reason, StopReason::TimeLimit);
        assert_eq!(s.times.len(), 101);
        assert!((s.times[100] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn run_is_reproducible() {
        let p = SleParams::new(Domain::HalfPlane, 8.0 / 3.0, Point::real(0.0))
            .with_force_point(Point::new(0.0, 1.0), 1.0)
            .with_time(0.05, 1e-4)
            .with_seed(11);
        assert_eq!(run_process(&p).unwrap(), run_process(&p).unwrap());
    }

    #[test]
    fn invalid_params() {
        let p = SleParams::new(Domain::HalfPlane, 2.0, Point::new(0.0, 1.0));
        assert!(run_process(&p).is_err());
        let p = SleParams::new(Domain::HalfPlane, 2.0, Point::Infinity);
        assert!(p.validate().is_err());
        let mut p = SleParams::new(Domain::HalfPlane, 2.0, Point::real(0.0));
        p.rhos.push(1.0);
        assert!(p.validate().is_err());
        let p = SleParams::new(Domain::HalfPlane, -1.0, Point::real(0.0));
        assert!(p.validate().is_err());
        let p = SleParams::new(Domain::Disk, 2.0, Point::real(1.0)).with_force_point(Point::real(1.0), 1.0);
        assert!(p.validate().is_err());
        let p = SleParams::new(Domain::Disk, 2.0, Point::real(1.0)).with_force_point(Point::real(2.0), 1.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn neutral_point_examples() {
        let p = SleParams::new(Domain::HalfPlane, 2.5, Point::real(0.0));
        let q = append_neutral_force_point(&p);
        assert_eq!(q.force_points, vec![Point::Infinity]);
        assert_eq!(q.rhos, vec![2.5 - 6.0]);

        let p = SleParams::new(Domain::Disk, 4.0, Point::real(1.0)).with_force_point(Point::real(-1.0), 1.0);
        let q = append_neutral_force_point(&p);
        assert_eq!(q.force_points[1], Point::real(0.0));
        assert_eq!(q.rhos, vec![1.0, 4.0 - 7.0]);

        let p = SleParams::new(Domain::Strip, 2.0, Point::real(0.0)).with_force_point(Point::PlusInfinity, 1.0);
        let q = append_neutral_force_point(&p);
        assert!((q.rho_sum() - (2.0 - 6.0)).abs() < 1e-15);
        assert_eq!(q.force_points, vec![Point::PlusInfinity, Point::MinusInfinity]);
    }

    #[test]
    fn refinement_near_force_point_keeps_determinism() {
        // Start close enough to a boundary force point that refinement kicks in.
        let p = SleParams::new(Domain::HalfPlane, 2.0, Point::real(0.0))
            .with_force_point(Point::real(0.005), -1.0)
            .with_time(0.01, 1e-4)
            .with_seed(3);
        let a = run_process(&p).unwrap();
        let b = run_process(&p).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn neutral_track_matches_a_simulated_one() {
        let p = SleParams::new(Domain::Disk, 3.0, Point::real(1.0)).with_time(0.05, 1e-3).with_seed(4);
        let filled = append_neutral_track(&run_process(&p).unwrap()).unwrap();
        let simulated = run_process(&append_neutral_force_point(&p)).unwrap();
        assert_eq!(filled.params.rhos, simulated.params.rhos);
        assert_eq!(filled.w, simulated.w);
        assert_eq!(filled.v, simulated.v);
        let strip = SleParams { domain: Domain::Strip, w0: Point::real(0.0), ..p };
        assert!(append_neutral_track(&run_process(&strip).unwrap()).is_err());
    }
}
