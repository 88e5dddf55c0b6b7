//! Local-martingale observables of SLE(kappa) and tests of their drift.
//!
//! Chordal, with `z^j_t = g_t(z^j) = x^j_t + i y^j_t`:
//!
//! ```text
//! M_t = prod_j |g_t'(z^j)|^((8 - 2k + r_j) r_j / 8k) (y^j_t)^(r_j^2 / 8k) |W_t - z^j_t|^(r_j / k)
//!     * prod_{j<l} (|z^j_t - z^l_t| |conj(z^j_t) - z^l_t|)^(r_j r_l / 4k)
//! ```
//!
//! with `y^j_t` replaced by `|g_t'(z^j)|` for points on the real line.
//! The radial form runs over the points and their reflections
//! `z^{n+j} = 1 / conj(z^j)`:
//!
//! ```text
//! M_t = exp(q_0 t) prod_{j<=2n} |W_t - z^j_t|^(r_j / 2k) |g_t'(z^j)|^(q_j)
//!     * prod_{j<l<=2n} |z^j_t - z^l_t|^(r_j r_l / 8k)
//! ```
//!
//! where `q_0 = (4 + rbar) rbar / 8k`, `q_j = (8 - 2k + r_j) r_j / 16k`, and
//! for a point on the circle the vanishing pair `|z^j_t - z^{n+j}_t|` is
//! replaced by `|g_t'(z^j)|`. Everything is computed in log space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Point};
use crate::error::{Result, SleError};
use crate::process::PathSample;
use crate::stats::mean_se;

/// Default guard band for martingale tests.
pub const DEFAULT_GUARD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    ChordalGeneral,
    RadialGeneral,
    /// Radial, `kappa = 6`, all `rho = 2`; the driving point is the last
    /// of the `n` circle points.
    PercolationK6,
    /// Radial, `kappa = 2`, all `rho = 2`.
    UstK2,
}

impl Flavor {
    pub fn domain(self) -> Domain {
        match self {
            Flavor::ChordalGeneral => Domain::HalfPlane,
            _ => Domain::Disk,
        }
    }
}

impl std::str::FromStr for Flavor {
    type Err = SleError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "chordal" | "chordal_general" => Ok(Flavor::ChordalGeneral),
            "radial" | "radial_general" => Ok(Flavor::RadialGeneral),
            "percolation" | "percolation_k6" => Ok(Flavor::PercolationK6),
            "ust" | "ust_k2" => Ok(Flavor::UstK2),
            other => Err(SleError::Parse(format!("unknown flavor {other:?}"))),
        }
    }
}

fn unit() -> f64 {
    1.0
}

/// Which observable to evaluate and at which marked points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub flavor: Flavor,
    /// Initial positions `z^j`. For the percolation and UST flavors these
    /// are the circle points other than the driving point.
    pub points: Vec<Point>,
    pub rhos: Vec<f64>,
    /// The `kappa` in the exponents.
    pub kappa: f64,
    /// Multiplier on the `rho^2 / 8k` self-interaction exponent (chordal).
    /// Anything other than 1 breaks the martingale property.
    #[serde(default = "unit")]
    pub self_exponent_factor: f64,
}

impl ObservableSpec {
    pub fn chordal(kappa: f64, points: Vec<Point>, rhos: Vec<f64>) -> Result<Self> {
        Self::new(Flavor::ChordalGeneral, kappa, points, rhos)
    }

    pub fn radial(kappa: f64, points: Vec<Point>, rhos: Vec<f64>) -> Result<Self> {
        Self::new(Flavor::RadialGeneral, kappa, points, rhos)
    }

    /// `points` are the `n - 1` circle points besides the driving point.
    pub fn percolation(points: Vec<Point>) -> Result<Self> {
        let rhos = vec![2.0; points.len()];
        Self::new(Flavor::PercolationK6, 6.0, points, rhos)
    }

    pub fn ust(points: Vec<Point>) -> Result<Self> {
        let rhos = vec![2.0; points.len()];
        Self::new(Flavor::UstK2, 2.0, points, rhos)
    }

    pub fn new(flavor: Flavor, kappa: f64, points: Vec<Point>, rhos: Vec<f64>) -> Result<Self> {
        let spec = ObservableSpec { flavor, points, rhos, kappa, self_exponent_factor: 1.0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_self_exponent_factor(mut self, factor: f64) -> Self {
        self.self_exponent_factor = factor;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SleError::InvalidParams(m));
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if self.points.len() != self.rhos.len() {
            return bad(format!("{} points for {} rho values", self.points.len(), self.rhos.len()));
        }
        let domain = self.flavor.domain();
        for (j, p) in self.points.iter().enumerate() {
            let Point::Finite(z) = domain.snap(*p) else {
                return bad(format!("point {j} must be finite"));
            };
            if !domain.contains_closure(Point::Finite(z)) {
                return bad(format!("point {j} = {z} is outside {domain}"));
            }
            if domain == Domain::Disk && z.norm() == 0.0 {
                return bad("the origin enters only through rbar".into());
            }
            for q in &self.points[..j] {
                if domain.snap(*q) == Point::Finite(z) {
                    return bad(format!("point {j} is repeated"));
                }
            }
        }
        match self.flavor {
            Flavor::PercolationK6 | Flavor::UstK2 => {
                let k = if self.flavor == Flavor::PercolationK6 { 6.0 } else { 2.0 };
                if self.kappa != k || self.rhos.iter().any(|&r| r != 2.0) {
                    return bad(format!("{:?} requires kappa = {k} and rho = 2", self.flavor));
                }
                if self.points.iter().any(|p| !domain.is_boundary(domain.snap(*p))) {
                    return bad("special-case observables take circle points only".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn on_boundary(&self, j: usize) -> bool {
        let d = self.flavor.domain();
        d.is_boundary(d.snap(self.points[j]))
    }

    /// `log M` in the given state.
    pub fn log_value(&self, state: &ObservableState) -> Result<f64> {
        if state.points.len() != self.points.len() || state.log_derivatives.len() != self.points.len() {
            return Err(SleError::InvalidParams("state does not match the observable's points".into()));
        }
        match self.flavor {
            Flavor::ChordalGeneral => log_chordal(self, state),
            Flavor::RadialGeneral => log_radial(self, state),
            Flavor::PercolationK6 => log_percolation(state),
            Flavor::UstK2 => log_ust(state),
        }
    }

    pub fn value(&self, state: &ObservableState) -> Result<f64> {
        self.log_value(state).map(f64::exp)
    }
}

/// `q_0 = (4 + rbar) rbar / (8 kappa)`.
pub fn q0(rbar: f64, kappa: f64) -> f64 {
    (4.0 + rbar) * rbar / (8.0 * kappa)
}

/// `q_j = (8 - 2 kappa + rho) rho / (16 kappa)`.
pub fn qj(rho: f64, kappa: f64) -> f64 {
    (8.0 - 2.0 * kappa + rho) * rho / (16.0 * kappa)
}

/// Exponent of `g_t'(0)` in the percolation observable, `(n^2 - 1) / 12`.
pub fn percolation_exponent(n: usize) -> f64 {
    ((n * n) as f64 - 1.0) / 12.0
}

/// Exponent of `g_t'(0)` in the UST observable, `(n^2 - 1) / 4`.
pub fn ust_exponent(n: usize) -> f64 {
    ((n * n) as f64 - 1.0) / 4.0
}

/// Data of the Loewner chain needed by the observables.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableState {
    pub t: f64,
    pub w: Complex64,
    /// Current images `g_t(z^j)`.
    pub points: Vec<Point>,
    /// `log g_t'(z^j)`.
    pub log_derivatives: Vec<Complex64>,
}

impl ObservableState {
    /// The state at record `i` of a path whose first force points are the
    /// observable's points.
    pub fn from_sample(sample: &PathSample, n: usize, i: usize) -> Result<Self> {
        if sample.v.len() < n || sample.log_derivatives.iter().take(n).any(|l| l.len() != sample.len()) {
            return Err(SleError::Precondition("path does not track the observable's points".into()));
        }
        Ok(ObservableState {
            t: sample.times[i],
            w: sample.w[i],
            points: sample.v[..n].iter().map(|tr| tr[i]).collect(),
            log_derivatives: sample.log_derivatives[..n].iter().map(|tr| tr[i]).collect(),
        })
    }
}

fn positive_log(value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value.ln())
    } else {
        Err(SleError::NonPositiveBase { value })
    }
}

fn finite_point(state: &ObservableState, j: usize) -> Result<Complex64> {
    state.points[j].finite().ok_or(SleError::Swallowed { index: j })
}

fn log_chordal(spec: &ObservableSpec, state: &ObservableState) -> Result<f64> {
    let k = spec.kappa;
    let n = spec.points.len();
    let w = state.w.re;
    let z: Vec<Complex64> = (0..n).map(|j| finite_point(state, j)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for (j, zj) in z.iter().enumerate() {
        let r = spec.rhos[j];
        if r == 0.0 {
            continue;
        }
        let log_d = state.log_derivatives[j].re;
        let self_exp = spec.self_exponent_factor * r * r / (8.0 * k);
        let log_y = if spec.on_boundary(j) { log_d } else { positive_log(zj.im)? };
        total += (8.0 - 2.0 * k + r) * r / (8.0 * k) * log_d;
        total += self_exp * log_y;
        total += r / k * positive_log((w - zj).norm())?;
    }
    for j in 0..n {
        for l in j + 1..n {
            let e = spec.rhos[j] * spec.rhos[l] / (4.0 * k);
            if e == 0.0 {
                continue;
            }
            total += e * positive_log((z[j] - z[l]).norm() * (z[j].conj() - z[l]).norm())?;
        }
    }
    Ok(total)
}

fn log_radial(spec: &ObservableSpec, state: &ObservableState) -> Result<f64> {
    let k = spec.kappa;
    let n = spec.points.len();
    let rbar: f64 = spec.rhos.iter().sum();
    let mut total = q0(rbar, k) * state.t;
    // Points 0..n and their reflections n..2n.
    let mut z = Vec::with_capacity(2 * n);
    let mut log_d = Vec::with_capacity(2 * n);
    let mut rho = Vec::with_capacity(2 * n);
    for j in 0..n {
        z.push(finite_point(state, j)?);
        log_d.push(state.log_derivatives[j].re);
        rho.push(spec.rhos[j]);
    }
    for j in 0..n {
        let zj = z[j];
        let z0 = spec.points[j].finite().expect("validated");
        // |g'(1/conj z)| = |g'(z)| |z|^2 / |g(z)|^2
        let reflected = positive_log(zj.norm())?;
        z.push(zj / zj.norm_sqr());
        log_d.push(log_d[j] + 2.0 * z0.norm().ln() - 2.0 * reflected);
        rho.push(spec.rhos[j]);
    }
    for j in 0..2 * n {
        if rho[j] == 0.0 {
            continue;
        }
        total += rho[j] / (2.0 * k) * positive_log((state.w - z[j]).norm())?;
        total += qj(rho[j], k) * log_d[j];
    }
    for j in 0..2 * n {
        for l in j + 1..2 * n {
            let e = rho[j] * rho[l] / (8.0 * k);
            if e == 0.0 {
                continue;
            }
            if l == j + n && spec.on_boundary(j) {
                total += e * log_d[j];
            } else {
                total += e * positive_log((z[j] - z[l]).norm())?;
            }
        }
    }
    Ok(total)
}

fn circle_points_with_driving(state: &ObservableState) -> Result<Vec<Complex64>> {
    let mut z: Vec<Complex64> = (0..state.points.len()).map(|j| finite_point(state, j)).collect::<Result<_>>()?;
    z.push(state.w);
    Ok(z)
}

fn log_pair_product(z: &[Complex64]) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..z.len() {
        for l in j + 1..z.len() {
            let d = (z[j] - z[l]).norm();
            if d == 0.0 {
                return Err(SleError::CoincidentPoints { distance: 0.0 });
            }
            total += d.ln();
        }
    }
    Ok(total)
}

fn log_percolation(state: &ObservableState) -> Result<f64> {
    let z = circle_points_with_driving(state)?;
    Ok(percolation_exponent(z.len()) * state.t + log_pair_product(&z)? / 3.0)
}

fn log_ust(state: &ObservableState) -> Result<f64> {
    let z = circle_points_with_driving(state)?;
    let derivs: f64 = state.log_derivatives.iter().map(|l| l.re).sum();
    Ok(ust_exponent(z.len()) * state.t + derivs + log_pair_product(&z)?)
}

/// The chordal observable.
pub fn chordal_m(spec: &ObservableSpec, state: &ObservableState) -> Result<f64> {
    log_chordal(spec, state).map(f64::exp)
}

/// The radial observable, with `g_t'(0)^{q_0} = exp(q_0 t)`.
pub fn radial_m(spec: &ObservableSpec, state: &ObservableState) -> Result<f64> {
    log_radial(spec, state).map(f64::exp)
}

/// `exp(t (n^2 - 1) / 12) prod_{j<l} |z^j - z^l|^(1/3)` with the driving
/// point as the `n`-th point.
pub fn percolation_observable(state: &ObservableState) -> Result<f64> {
    log_percolation(state).map(f64::exp)
}

/// `exp(t (n^2 - 1) / 4) prod_{j<n} |g_t'(z^j)| prod_{j<l} |z^j - z^l|` with
/// the driving point as the `n`-th point.
pub fn ust_observable(state: &ObservableState) -> Result<f64> {
    log_ust(state).map(f64::exp)
}

/// Whether the guard band has been entered: some point within `eps` of the
/// driving point, of the boundary (interior points), or of another point.
pub fn guard_tripped(spec: &ObservableSpec, state: &ObservableState, eps: f64) -> bool {
    let domain = spec.flavor.domain();
    let mut z = Vec::with_capacity(state.points.len());
    for (j, p) in state.points.iter().enumerate() {
        let Point::Finite(v) = *p else { return true };
        if (v - state.w).norm() < eps {
            return true;
        }
        if !spec.on_boundary(j) && domain.boundary_gap(*p).is_none_or(|g| g < eps) {
            return true;
        }
        z.push(v);
    }
    for j in 0..z.len() {
        for l in j + 1..z.len() {
            if (z[j] - z[l]).norm() < eps {
                return true;
            }
        }
    }
    false
}

/// `M_{t ^ stop}` of one path at a list of output times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub path_index: u64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Time at which the guard band stopped the observable, if it did.
    pub stopped_at: Option<f64>,
}

impl ObservableSeries {
    pub fn initial(&self) -> f64 {
        self.values[0]
    }

    /// Value at the first output time `>= t - 1e-9`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let i = self.times.iter().position(|&s| s >= t - 1e-9)?;
        Some(self.values[i])
    }
}

/// Evaluate the observable along a path of plain SLE(kappa) whose first
/// force points are `spec.points` (with zero strength), freezing it when the
/// guard band is entered. Values are reported at `output_times` (time 0 is
/// always included first).
pub fn evaluate_series(
    spec: &ObservableSpec,
    sample: &PathSample,
    guard: f64,
    output_times: &[f64],
) -> Result<ObservableSeries> {
    let n = spec.points.len();
    let domain = spec.flavor.domain();
    if sample.params.domain != domain {
        return Err(SleError::Precondition(format!(
            "{:?} needs a path in {domain}, got {}",
            spec.flavor, sample.params.domain
        )));
    }
    for j in 0..n {
        if sample.params.force_points.get(j).map(|&p| domain.snap(p)) != Some(domain.snap(spec.points[j])) {
            return Err(SleError::Precondition(format!("force point {j} is not the observable's point {j}")));
        }
    }
    let mut log_values = Vec::with_capacity(sample.len());
    let mut stopped_at = None;
    for i in 0..sample.len() {
        let state = ObservableState::from_sample(sample, n, i)?;
        if guard_tripped(spec, &state, guard) {
            if i == 0 {
                return Err(SleError::Precondition("observable starts inside the guard band".into()));
            }
            // Freeze at the first grid time past the guard: a stopping time
            // of the discrete chain.
            if let Ok(v) = spec.log_value(&state) {
                if v.is_finite() {
                    log_values.push(v);
                }
            }
            stopped_at = Some(state.t);
            break;
        }
        log_values.push(spec.log_value(&state)?);
    }
    if stopped_at.is_none() && sample.stopped_at.time < sample.params.t_max {
        stopped_at = Some(sample.stopped_at.time);
    }
    let end = *sample.times.last().expect("non-empty sample");
    let mut times = vec![0.0];
    let mut values = vec![log_values[0].exp()];
    for &t in output_times {
        if t <= 0.0 {
            continue;
        }
        let frozen = stopped_at.is_some_and(|s| s <= t);
        if !frozen && t > end + 1e-9 {
            break;
        }
        let i = sample.index_at_or_before(t).unwrap_or(0).min(log_values.len() - 1);
        times.push(t);
        values.push(log_values[i].exp());
    }
    Ok(ObservableSeries { path_index: sample.params.path_index, times, values, stopped_at })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftCheckpoint {
    pub time: f64,
    pub paths: usize,
    /// Ensemble mean of `M_{t ^ stop} / M_0 - 1`.
    pub mean_deviation: f64,
    pub std_error: f64,
    pub z_score: f64,
    /// Fraction of paths already stopped by the guard band.
    pub stopped_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub checkpoints: Vec<DriftCheckpoint>,
    pub threshold: f64,
    pub pass: bool,
    pub guard: Option<f64>,
    pub seed: Option<u64>,
}

/// Minimum ensemble size accepted by [`drift_test`].
pub const DRIFT_MIN_PATHS: usize = 1000;

/// Mean of `M_{t ^ stop} / M_0 - 1` at each checkpoint; passes when every
/// `|z| < 3`.
pub fn drift_test(series: &[ObservableSeries], checkpoints: &[f64]) -> Result<DriftReport> {
    if series.len() < DRIFT_MIN_PATHS {
        return Err(SleError::InsufficientSamples { needed: DRIFT_MIN_PATHS, got: series.len() });
    }
    let threshold = 3.0;
    let mut rows = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        let mut ratios = Vec::with_capacity(series.len());
        let mut stopped = 0usize;
        for s in series {
            let Some(v) = s.at(t) else { continue };
            let m0 = s.initial();
            if !(m0 > 0.0 && m0.is_finite() && v.is_finite()) {
                return Err(SleError::Degenerate(format!("path {} has M = {v}, M_0 = {m0}", s.path_index)));
            }
            if s.stopped_at.is_some_and(|x| x <= t) {
                stopped += 1;
            }
            ratios.push(v / m0 - 1.0);
        }
        if ratios.len() < DRIFT_MIN_PATHS {
            return Err(SleError::InsufficientSamples { needed: DRIFT_MIN_PATHS, got: ratios.len() });
        }
        let ms = mean_se(&ratios);
        let z = if ms.std_error > 0.0 {
            ms.mean / ms.std_error
        } else if ms.mean == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(ms.mean)
        };
        rows.push(DriftCheckpoint {
            time: t,
            paths: ratios.len(),
            mean_deviation: ms.mean,
            std_error: ms.std_error,
            z_score: z,
            stopped_fraction: stopped as f64 / ratios.len() as f64,
        });
    }
    let pass = rows.iter().all(|r| r.z_score.abs() < threshold);
    Ok(DriftReport { checkpoints: rows, threshold, pass, guard: None, seed: None })
}

/// Coefficient of `dW` in `dM / M`: `(1/kappa) Re sum_j rho_j / (W - z^j)`.
pub fn predicted_coefficient(spec: &ObservableSpec, state: &ObservableState) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..spec.points.len() {
        let z = finite_point(state, j)?;
        let d = state.w - z;
        if d.norm() == 0.0 {
            return Err(SleError::CoincidentPoints { distance: 0.0 });
        }
        total += (spec.rhos[j] / d).re;
    }
    Ok(total / spec.kappa)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub path_index: u64,
    pub steps: usize,
    /// Least-squares slope of `dM/M` on `c_n dW_n`; 1 when the predicted
    /// coefficients `c_n` are right.
    pub slope: f64,
    pub slope_std_error: f64,
    /// `|slope - 1|`.
    pub discrepancy: f64,
    /// `max_n |dM_n/M_n - c_n dW_n| / sqrt(kappa dt_n)`.
    pub max_normalized_residual: f64,
    /// Predicted coefficient at the first step.
    pub first_coefficient: Option<f64>,
    pub guard: f64,
}

/// Pathwise check of `dM = M (1/kappa) Re sum_j rho_j / (W - z^j) dW` along
/// one chordal SLE(kappa) path recorded at every base step.
pub fn girsanov_drift_check(sample: &PathSample, spec: &ObservableSpec, guard: f64) -> Result<RegressionReport> {
    if spec.flavor != Flavor::ChordalGeneral {
        return Err(SleError::Precondition("the regression is defined for the chordal observable".into()));
    }
    let params = &sample.params;
    if params.record_every != 1 || sample.brownian_increments.is_empty() {
        return Err(SleError::Precondition("regression needs every base step and its increment".into()));
    }
    if params.rhos.iter().any(|&r| r != 0.0) {
        return Err(SleError::Precondition("regression needs plain SLE(kappa) without force".into()));
    }
    let n = spec.points.len();
    let sk = params.kappa.sqrt();
    let (mut sxy, mut sxx) = (0.0, 0.0);
    let mut pairs = Vec::new();
    let mut max_resid: f64 = 0.0;
    let mut first = None;
    let mut prev = ObservableState::from_sample(sample, n, 0)?;
    if guard_tripped(spec, &prev, guard) {
        return Err(SleError::Precondition("observable starts inside the guard band".into()));
    }
    let mut prev_log = spec.log_value(&prev)?;
    for i in 0..sample.len() - 1 {
        let next = ObservableState::from_sample(sample, n, i + 1)?;
        if guard_tripped(spec, &next, guard) {
            break;
        }
        let next_log = spec.log_value(&next)?;
        let c = predicted_coefficient(spec, &prev)?;
        first.get_or_insert(c);
        let h = next.t - prev.t;
        let db = sample.brownian_increments[i] * (h / params.dt).sqrt();
        let dw = sk * db;
        let ratio = (next_log - prev_log).exp_m1();
        let x = c * dw;
        sxy += x * ratio;
        sxx += x * x;
        pairs.push((x, ratio));
        if h > 0.0 && params.kappa > 0.0 {
            max_resid = max_resid.max((ratio - x).abs() / (params.kappa * h).sqrt());
        }
        prev = next;
        prev_log = next_log;
    }
    let steps = pairs.len();
    let (slope, slope_se) = if sxx > 0.0 {
        let b = sxy / sxx;
        let rss: f64 = pairs.iter().map(|(x, y)| (y - b * x).powi(2)).sum();
        let se = if steps > 1 { (rss / (steps - 1) as f64 / sxx).sqrt() } else { f64::NAN };
        (b, se)
    } else {
        // No signal: the observable is constant when all rho vanish.
        (if pairs.iter().all(|p| p.1 == 0.0) { 0.0 } else { f64::NAN }, 0.0)
    };
    let discrepancy = if sxx > 0.0 { (slope - 1.0).abs() } else { 0.0 };
    Ok(RegressionReport {
        path_index: params.path_index,
        steps,
        slope,
        slope_std_error: slope_se,
        discrepancy,
        max_normalized_residual: max_resid,
        first_coefficient: first,
        guard,
    })
}
