//! Ensembles: manifests, parallel path generation and reductions.
//!
//! Path `i` of an ensemble is simulated with the key `(seed, i)`, so results
//! do not depend on scheduling. Paths run on a rayon pool and are collected
//! in index order.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coordinate::{
    compare_laws, simulate_transformed, state_at, truncate_at_capacity, CompareConfig, ComparisonReport,
    TransformOptions,
};
use crate::domain::{Domain, Point};
use crate::error::{Result, SleError};
use crate::io::{fmt_f64, write_path, PathFormat};
use crate::martingale::{
    drift_test, evaluate_series, girsanov_drift_check, DriftReport, ObservableSpec, RegressionReport,
};
use crate::mobius::{mobius_between, MobiusMap};
use crate::process::{run_process, PathSample, SleParams, StopReason};
use crate::stats::{mean_se, MeanSe};

/// Salt mixed into the seed of the second ensemble of a comparison.
const DIRECT_SALT: u64 = 0xd1ec_7000_0000_0001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExperimentKind {
    Simulate,
    CoordChange,
    Martingale,
    Girsanov,
}

fn default_anchor() -> Point {
    Point::real(0.0)
}

fn default_boundary_anchor() -> Point {
    Point::real(1.0)
}

fn default_scale() -> f64 {
    2.0
}

fn default_grid_step() -> f64 {
    0.005
}

fn default_min_paths() -> usize {
    1000
}

/// How a disk ensemble is mapped to the half-plane and compared with a
/// direct half-plane ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordChangeSetup {
    /// Disk point sent to `scale * i`.
    #[serde(default = "default_anchor")]
    pub anchor: Point,
    /// Circle point sent to infinity.
    #[serde(default = "default_boundary_anchor")]
    pub boundary_anchor: Point,
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Spacing of the half-plane time grid both ensembles are compared on.
    #[serde(default = "default_grid_step")]
    pub grid_step: f64,
    /// Drop the force of the direct ensemble (plain SLE(kappa)).
    #[serde(default)]
    pub negative_control: bool,
    #[serde(default = "default_min_paths")]
    pub min_paths: usize,
}

impl Default for CoordChangeSetup {
    fn default() -> Self {
        CoordChangeSetup {
            anchor: default_anchor(),
            boundary_anchor: default_boundary_anchor(),
            scale: default_scale(),
            grid_step: default_grid_step(),
            negative_control: false,
            min_paths: default_min_paths(),
        }
    }
}

impl CoordChangeSetup {
    pub fn map(&self) -> Result<MobiusMap> {
        let base = mobius_between(Domain::Disk, Domain::HalfPlane, self.anchor, self.boundary_anchor)?;
        Ok(MobiusMap::half_plane_affine(self.scale, 0.0)?.compose(&base))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    /// Directory for `stats.json`, `checkpoints.csv`, `manifest.json` and
    /// path dumps.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Dump every path in this format under `paths/`.
    #[serde(default)]
    pub dump_paths: Option<PathFormat>,
}

fn default_significance() -> f64 {
    0.01
}

fn default_guard() -> f64 {
    crate::martingale::DEFAULT_GUARD
}

fn default_tolerance() -> f64 {
    0.05
}

/// Everything needed to reproduce an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub kind: ExperimentKind,
    pub params: SleParams,
    /// Parameters of the second ensemble of a comparison; derived from
    /// `params` and `coord` when absent.
    #[serde(default)]
    pub params_b: Option<SleParams>,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default)]
    pub coord: Option<CoordChangeSetup>,
    pub paths: usize,
    pub checkpoints: Vec<f64>,
    #[serde(default = "default_significance")]
    pub significance: f64,
    /// Master seed; path `i` uses the key `(seed, i)`.
    pub seed: u64,
    /// Guard band of martingale observables.
    #[serde(default = "default_guard")]
    pub guard: f64,
    /// Largest accepted `|slope - 1|` in the Girsanov regression.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub output: OutputSpec,
    /// Worker threads; `None` uses the global pool.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentManifest {
    pub fn new(kind: ExperimentKind, params: SleParams, paths: usize, checkpoints: Vec<f64>, seed: u64) -> Self {
        ExperimentManifest {
            kind,
            params,
            params_b: None,
            observable: None,
            coord: None,
            paths,
            checkpoints,
            significance: default_significance(),
            seed,
            guard: default_guard(),
            tolerance: default_tolerance(),
            output: OutputSpec::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SleError::InvalidParams(m.into()));
        if self.paths == 0 {
            return bad("an ensemble needs at least one path");
        }
        if self.checkpoints.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return bad("checkpoints must be finite and non-negative");
        }
        if !(self.significance > 0.0 && self.significance < 1.0) {
            return bad("significance must lie in (0, 1)");
        }
        match self.kind {
            ExperimentKind::Martingale | ExperimentKind::Girsanov if self.observable.is_none() => {
                bad("martingale experiments need an observable")
            }
            ExperimentKind::CoordChange if self.params.domain != Domain::Disk => {
                bad("the coordinate-change experiment maps a disk ensemble to the half-plane")
            }
            _ => self.params.validate(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn path_params(&self, base: &SleParams, index: usize) -> SleParams {
        let mut p = base.clone();
        p.seed = self.seed;
        p.path_index = index as u64;
        p
    }

    fn last_checkpoint(&self) -> f64 {
        self.checkpoints.iter().copied().fold(0.0, f64::max)
    }
}

/// A path left out of later checkpoints because it stopped early.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub path_index: u64,
    pub time: f64,
    pub reason: StopReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointStats {
    pub time: f64,
    /// Driving position: `Re W`, or `arg W` in the disk.
    pub driving: MeanSe,
    pub excluded: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GirsanovSummary {
    pub paths: usize,
    pub tolerance: f64,
    pub max_discrepancy: f64,
    pub mean_slope: f64,
    pub max_normalized_residual: f64,
    pub reports: Vec<RegressionReport>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub kind: ExperimentKind,
    pub paths: usize,
    pub seed: u64,
    pub checkpoints: Vec<CheckpointStats>,
    pub exclusions: Vec<Exclusion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub girsanov: Option<GirsanovSummary>,
    /// Outcome of the statistical test, if the experiment has one.
    pub pass: Option<bool>,
}

fn driving_coordinate(sample: &PathSample, t: f64) -> Option<f64> {
    let (w, _) = state_at(sample, t)?;
    Some(match sample.params.domain {
        Domain::Disk => w.arg(),
        _ => w.re,
    })
}

fn checkpoint_stats(samples: &[PathSample], checkpoints: &[f64]) -> Vec<CheckpointStats> {
    checkpoints
        .iter()
        .map(|&t| {
            let values: Vec<f64> = samples.iter().filter_map(|s| driving_coordinate(s, t)).collect();
            CheckpointStats { time: t, excluded: samples.len() - values.len(), driving: mean_se(&values) }
        })
        .collect()
}

fn exclusions(samples: &[PathSample], horizon: f64) -> Vec<Exclusion> {
    samples
        .iter()
        .filter(|s| s.stopped_at.time < horizon - 1e-9 || s.times.last().is_some_and(|&t| t < horizon - 1e-9))
        .map(|s| Exclusion { path_index: s.params.path_index, time: s.stopped_at.time, reason: s.stopped_at.reason })
        .collect()
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| SleError::InvalidParams(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn dump(manifest: &ExperimentManifest, sample: &PathSample, tag: &str) -> Result<()> {
    let (Some(dir), Some(format)) = (&manifest.output.dir, manifest.output.dump_paths) else {
        return Ok(());
    };
    let ext = match format {
        PathFormat::Jsonl => "jsonl",
        PathFormat::Binary => "bin",
    };
    let dir = dir.join("paths");
    fs::create_dir_all(&dir)?;
    let file = fs::File::create(dir.join(format!("{tag}_{:06}.{ext}", sample.params.path_index)))?;
    write_path(sample, format, BufWriter::new(file))
}

/// Observable points tracked as zero-strength force points.
fn observable_params(manifest: &ExperimentManifest, spec: &ObservableSpec) -> SleParams {
    let mut p = manifest.params.clone();
    p.domain = spec.flavor.domain();
    p.force_points = spec.points.clone();
    p.rhos = vec![0.0; spec.points.len()];
    p
}

/// Run the experiment described by `manifest` and, if an output directory
/// is set, write its artifacts.
pub fn run_ensemble(manifest: &ExperimentManifest) -> Result<EnsembleStats> {
    manifest.validate()?;
    let stats = in_pool(manifest.threads, || match manifest.kind {
        ExperimentKind::Simulate => run_simulate(manifest),
        ExperimentKind::CoordChange => run_coord_change(manifest),
        ExperimentKind::Martingale => run_martingale(manifest),
        ExperimentKind::Girsanov => run_girsanov(manifest),
    })??;
    if let Some(dir) = &manifest.output.dir {
        write_artifacts(dir, manifest, &stats)?;
    }
    Ok(stats)
}

fn run_simulate(manifest: &ExperimentManifest) -> Result<EnsembleStats> {
    let samples: Vec<PathSample> = (0..manifest.paths)
        .into_par_iter()
        .map(|i| {
            let s = run_process(&manifest.path_params(&manifest.params, i))?;
            dump(manifest, &s, "path")?;
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(EnsembleStats {
        kind: manifest.kind,
        paths: manifest.paths,
        seed: manifest.seed,
        checkpoints: checkpoint_stats(&samples, &manifest.checkpoints),
        exclusions: exclusions(&samples, manifest.last_checkpoint()),
        comparison: None,
        drift: None,
        girsanov: None,
        pass: None,
    })
}

/// The radial parameters with the neutral force point at the origin
/// carrying `kappa - 6 - sum rho`, and the index of that point.
fn with_origin_force(params: &SleParams) -> (SleParams, usize) {
    let mut p = params.clone();
    let missing = (p.kappa - 6.0) - p.rho_sum();
    let origin = Point::real(0.0);
    match p.force_points.iter().position(|&v| v == origin) {
        Some(j) => {
            p.rhos[j] += missing;
            (p, j)
        }
        None => {
            p.force_points.push(origin);
            p.rhos.push(missing);
            let j = p.force_points.len() - 1;
            (p, j)
        }
    }
}

/// Parameters of the direct half-plane ensemble matched to a disk ensemble.
pub fn matched_half_plane_params(
    radial: &SleParams,
    psi: &MobiusMap,
    setup: &CoordChangeSetup,
    t_max: f64,
) -> Result<SleParams> {
    let w0 = psi.apply(radial.w0);
    let mut q = SleParams::new(Domain::HalfPlane, radial.kappa, Domain::HalfPlane.snap(w0));
    for (&v, &rho) in radial.force_points.iter().zip(&radial.rhos) {
        let rho = if setup.negative_control { 0.0 } else { rho };
        q = q.with_force_point(Domain::HalfPlane.snap(psi.apply(v)), rho);
    }
    q.t_max = t_max;
    q.dt = radial.dt;
    q.eps_stop = radial.eps_stop;
    q.loewner = radial.loewner;
    q.record_every = ((setup.grid_step / radial.dt).round() as usize).max(1);
    q.validate()?;
    Ok(q)
}

fn run_coord_change(manifest: &ExperimentManifest) -> Result<EnsembleStats> {
    let setup = manifest.coord.clone().unwrap_or_default();
    let psi = setup.map()?;
    let (radial, origin) = with_origin_force(&manifest.params);
    let horizon = manifest.last_checkpoint() + setup.grid_step;
    let opts = TransformOptions { grid_step: setup.grid_step, target_max: Some(horizon), ..Default::default() };
    let mapped: Vec<PathSample> = (0..manifest.paths)
        .into_par_iter()
        .map(|i| {
            let out = simulate_transformed(&manifest.path_params(&radial, i), &psi, &opts)?;
            dump(manifest, &out.sample, "mapped")?;
            Ok(out.sample)
        })
        .collect::<Result<_>>()?;

    let direct_base = match &manifest.params_b {
        Some(p) => p.clone(),
        None => matched_half_plane_params(&radial, &psi, &setup, horizon)?,
    };
    let capacity_limit = radial.t_max;
    let direct: Vec<PathSample> = (0..manifest.paths)
        .into_par_iter()
        .map(|i| {
            let mut p = manifest.path_params(&direct_base, i);
            p.seed ^= DIRECT_SALT;
            let s = run_process(&p)?;
            let s = if manifest.params_b.is_none() { truncate_at_capacity(&s, origin, capacity_limit)? } else { s };
            dump(manifest, &s, "direct")?;
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let cfg = CompareConfig {
        significance: manifest.significance,
        force_index: Some(origin),
        force_component: None,
        min_paths: setup.min_paths,
    };
    let comparison = compare_laws(&mapped, &direct, &manifest.checkpoints, &cfg)?;
    let pass = comparison.pass;
    Ok(EnsembleStats {
        kind: manifest.kind,
        paths: manifest.paths,
        seed: manifest.seed,
        checkpoints: checkpoint_stats(&mapped, &manifest.checkpoints),
        exclusions: exclusions(&mapped, manifest.last_checkpoint()),
        comparison: Some(comparison),
        drift: None,
        girsanov: None,
        pass: Some(pass),
    })
}

fn run_martingale(manifest: &ExperimentManifest) -> Result<EnsembleStats> {
    let spec = manifest.observable.as_ref().expect("validated");
    let base = observable_params(manifest, spec);
    let results: Vec<(crate::martingale::ObservableSeries, Option<Exclusion>)> = (0..manifest.paths)
        .into_par_iter()
        .map(|i| {
            let s = run_process(&manifest.path_params(&base, i))?;
            dump(manifest, &s, "path")?;
            let series = evaluate_series(spec, &s, manifest.guard, &manifest.checkpoints)?;
            let horizon = manifest.last_checkpoint();
            let excluded = (series.times.last().copied().unwrap_or(0.0) < horizon - 1e-9).then_some(Exclusion {
                path_index: i as u64,
                time: s.stopped_at.time,
                reason: s.stopped_at.reason,
            });
            Ok((series, excluded))
        })
        .collect::<Result<_>>()?;
    let exclusions: Vec<Exclusion> = results.iter().filter_map(|r| r.1).collect();
    let series: Vec<_> = results.into_iter().map(|r| r.0).collect();
    let mut drift = drift_test(&series, &manifest.checkpoints)?;
    drift.guard = Some(manifest.guard);
    drift.seed = Some(manifest.seed);
    let checkpoints = manifest
        .checkpoints
        .iter()
        .map(|&t| {
            let ratios: Vec<f64> = series.iter().filter_map(|s| s.at(t).map(|v| v / s.initial())).collect();
            CheckpointStats { time: t, excluded: series.len() - ratios.len(), driving: mean_se(&ratios) }
        })
        .collect();
    let pass = drift.pass;
    Ok(EnsembleStats {
        kind: manifest.kind,
        paths: manifest.paths,
        seed: manifest.seed,
        checkpoints,
        exclusions,
        comparison: None,
        drift: Some(drift),
        girsanov: None,
        pass: Some(pass),
    })
}

fn run_girsanov(manifest: &ExperimentManifest) -> Result<EnsembleStats> {
    let spec = manifest.observable.as_ref().expect("validated");
    let mut base = observable_params(manifest, spec);
    base.record_every = 1;
    let reports: Vec<RegressionReport> = (0..manifest.paths)
        .into_par_iter()
        .map(|i| {
            let s = run_process(&manifest.path_params(&base, i))?;
            dump(manifest, &s, "path")?;
            girsanov_drift_check(&s, spec, manifest.guard)
        })
        .collect::<Result<_>>()?;
    let used: Vec<&RegressionReport> = reports.iter().filter(|r| r.steps > 1).collect();
    if used.is_empty() {
        return Err(SleError::Degenerate("no path produced a regression".into()));
    }
    let max_discrepancy = used.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
    let mean_slope = used.iter().map(|r| r.slope).sum::<f64>() / used.len() as f64;
    let max_normalized_residual = used.iter().map(|r| r.max_normalized_residual).fold(0.0, f64::max);
    let pass = max_discrepancy < manifest.tolerance;
    let summary = GirsanovSummary {
        paths: used.len(),
        tolerance: manifest.tolerance,
        max_discrepancy,
        mean_slope,
        max_normalized_residual,
        reports,
        pass,
    };
    Ok(EnsembleStats {
        kind: manifest.kind,
        paths: manifest.paths,
        seed: manifest.seed,
        checkpoints: Vec::new(),
        exclusions: Vec::new(),
        comparison: None,
        drift: None,
        girsanov: Some(summary),
        pass: Some(pass),
    })
}

/// CSV table with one row per checkpoint.
pub fn checkpoint_csv(stats: &EnsembleStats) -> String {
    let mut out = String::from("time,mean,std_error,count,excluded");
    if stats.comparison.is_some() {
        out.push_str(",driving_statistic,driving_p,force_statistic,force_p,pass");
    }
    if stats.drift.is_some() {
        out.push_str(",mean_deviation,z_score");
    }
    out.push('\n');
    let bare = |x: f64| fmt_f64(x).replace('"', "");
    for (k, c) in stats.checkpoints.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}",
            bare(c.time),
            bare(c.driving.mean),
            bare(c.driving.std_error),
            c.driving.count,
            c.excluded
        ));
        if let Some(cmp) = &stats.comparison {
            let row = &cmp.checkpoints[k];
            let (fs, fp) = row.force.map_or((f64::NAN, f64::NAN), |f| (f.statistic, f.p_value));
            out.push_str(&format!(
                ",{},{},{},{},{}",
                bare(row.driving.statistic),
                bare(row.driving.p_value),
                bare(fs),
                bare(fp),
                row.pass
            ));
        }
        if let Some(d) = &stats.drift {
            let row = &d.checkpoints[k];
            out.push_str(&format!(",{},{}", bare(row.mean_deviation), bare(row.z_score)));
        }
        out.push('\n');
    }
    out
}

/// Write `stats.json`, `checkpoints.csv` and `manifest.json` into `dir`.
pub fn write_artifacts(dir: &Path, manifest: &ExperimentManifest, stats: &EnsembleStats) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("stats.json"), serde_json::to_string_pretty(stats)? + "\n")?;
    fs::write(dir.join("checkpoints.csv"), checkpoint_csv(stats))?;
    fs::write(dir.join("manifest.json"), manifest.to_json()? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simulate_manifest(kappa: f64, paths: usize) -> ExperimentManifest {
        let p = SleParams::new(Domain::HalfPlane, kappa, Point::real(0.0)).with_time(0.02, 1e-3);
        ExperimentManifest::new(ExperimentKind::Simulate, p, paths, vec![0.01, 0.02], 9)
    }

    #[test]
    fn zero_kappa_has_zero_variance() {
        let stats = run_ensemble(&simulate_manifest(0.0, 20)).unwrap();
        for c in &stats.checkpoints {
            assert_eq!(c.driving.std_error, 0.0);
            assert_eq!(c.driving.count, 20);
        }
        assert!(stats.exclusions.is_empty());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let mut a = simulate_manifest(3.0, 16);
        a.threads = Some(1);
        let mut b = a.clone();
        b.threads = Some(4);
        assert_eq!(run_ensemble(&a).unwrap(), run_ensemble(&b).unwrap());
    }

    #[test]
    fn manifest_round_trips() {
        let m = simulate_manifest(2.0, 3);
        assert_eq!(ExperimentManifest::from_json(&m.to_json().unwrap()).unwrap(), m);
    }

    #[test]
    fn origin_force_is_added_once() {
        let p = SleParams::new(Domain::Disk, 2.0, Point::new(0.0, 1.0));
        let (q, j) = with_origin_force(&p);
        assert_eq!((q.force_points[j], q.rhos[j]), (Point::real(0.0), -4.0));
        let (r, k) = with_origin_force(&q);
        assert_eq!(k, j);
        assert_eq!(r.rhos, q.rhos);
    }
}
