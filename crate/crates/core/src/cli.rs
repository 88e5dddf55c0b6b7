//! The `sle-rho` command line.
//!
//! Every run subcommand accepts `--manifest FILE`; flags given on the
//! command line override the manifest, and the merged manifest is written
//! next to the results. Exit status: 0 on success or a passed test, 2 on a
//! failed statistical test, 1 on usage or runtime errors.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::coordinate::{transform_sample, TransformOptions};
use crate::domain::{Domain, Point};
use crate::error::{Result, SleError};
use crate::harness::{run_ensemble, CoordChangeSetup, EnsembleStats, ExperimentKind, ExperimentManifest, OutputSpec};
use crate::io::{read_binary, read_jsonl, write_path, PathFormat};
use crate::martingale::{Flavor, ObservableSpec};
use crate::mobius::{mobius_between, MobiusMap};
use crate::process::{append_neutral_track, SleParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_STAT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sle-rho",
    version,
    about = "Simulate SLE(kappa; rho) and check its coordinate changes and martingales"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an ensemble and report driving statistics.
    Simulate(RunArgs),
    /// Map a stored path to another domain.
    Transform(TransformArgs),
    /// Check that an observable has no drift.
    VerifyMartingale(RunArgs),
    /// Compare a mapped disk ensemble with a direct half-plane ensemble.
    VerifyCoordinateChange(RunArgs),
    /// Regress observable increments on the Brownian increments.
    GirsanovCheck(RunArgs),
}

#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// JSON experiment manifest; flags override its fields.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// `H`, `D` or `S`.
    #[arg(long)]
    pub domain: Option<Domain>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Initial driving point (`x`, `re,im`).
    #[arg(long, allow_hyphen_values = true)]
    pub w0: Option<Point>,
    /// Force (or observable) point; repeat for several.
    #[arg(long = "force-point", allow_hyphen_values = true)]
    pub force_points: Vec<Point>,
    /// Weight of the matching force point; repeat in the same order.
    #[arg(long = "rho", allow_hyphen_values = true)]
    pub rhos: Vec<f64>,
    #[arg(long)]
    pub flavor: Option<Flavor>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Comma-separated checkpoint times.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub significance: Option<f64>,
    #[arg(long)]
    pub guard: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Half-plane grid spacing for coordinate-change comparisons.
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Compare against plain SLE(kappa) instead of the matched process.
    #[arg(long)]
    pub negative_control: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dump every path in this format (`jsonl` or `binary`).
    #[arg(long)]
    pub format: Option<PathFormat>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// Stored path (`.jsonl` or binary).
    #[arg(long)]
    pub input: PathBuf,
    /// Target domain.
    #[arg(long)]
    pub to: Domain,
    /// Interior point sent to the target's anchor.
    #[arg(long, allow_hyphen_values = true)]
    pub anchor: Option<Point>,
    /// Boundary point sent to the target's boundary anchor (default: the
    /// point opposite the starting driving point, or infinity).
    #[arg(long, allow_hyphen_values = true)]
    pub boundary_anchor: Option<Point>,
    /// Dilation applied after mapping to the half-plane.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub grid_step: f64,
    /// Output file; JSONL on stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "jsonl")]
    pub format: PathFormat,
}

fn default_w0(domain: Domain) -> Point {
    match domain {
        Domain::Disk => Point::real(1.0),
        _ => Point::real(0.0),
    }
}

/// Circle points completing the driving point to the vertices of a square
/// (percolation) or a triangle (UST).
fn default_circle_points(flavor: Flavor, w0: Point) -> Vec<Point> {
    let n = if flavor == Flavor::PercolationK6 { 4 } else { 3 };
    let w = w0.finite().filter(|w| w.norm() > 0.0).map_or(Complex64::new(1.0, 0.0), |w| w / w.norm());
    (1..n)
        .map(|k| Point::Finite(w * Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)))
        .map(|p| Domain::Disk.snap(p))
        .collect()
}

fn base_manifest(kind: ExperimentKind, args: &RunArgs) -> ExperimentManifest {
    let (domain, kappa, paths, dt, t_max, checkpoints) = match kind {
        ExperimentKind::Simulate => (Domain::HalfPlane, 2.0, 100, 1e-3, 1.0, vec![0.25, 0.5, 1.0]),
        ExperimentKind::CoordChange => (Domain::Disk, 2.0, 4000, 1e-4, 1.0, vec![0.05, 0.1, 0.2]),
        ExperimentKind::Martingale => {
            let flavor = args.flavor.unwrap_or(Flavor::ChordalGeneral);
            (flavor.domain(), 2.0, 10_000, 1e-4, 0.25, vec![0.0625, 0.125, 0.25])
        }
        ExperimentKind::Girsanov => {
            let flavor = args.flavor.unwrap_or(Flavor::ChordalGeneral);
            (flavor.domain(), 2.0, 100, 1e-4, 0.5, vec![0.5])
        }
    };
    let w0 = match kind {
        ExperimentKind::CoordChange => Point::new(0.0, 1.0),
        _ => default_w0(domain),
    };
    let params = SleParams::new(domain, kappa, w0).with_time(t_max, dt);
    let mut m = ExperimentManifest::new(kind, params, paths, checkpoints, 0);
    if kind == ExperimentKind::CoordChange {
        m.coord = Some(CoordChangeSetup::default());
    }
    m
}

/// The manifest for `kind` from an optional file plus the flags.
pub fn merge_manifest(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentManifest> {
    let mut m = match &args.manifest {
        Some(path) => {
            let m = ExperimentManifest::from_json(&fs::read_to_string(path)?)?;
            if m.kind != kind {
                return Err(SleError::InvalidParams(format!("manifest is for {:?}, not {kind:?}", m.kind)));
            }
            m
        }
        None => base_manifest(kind, args),
    };
    let p = &mut m.params;
    if let Some(d) = args.domain {
        if d != p.domain && args.w0.is_none() {
            p.w0 = default_w0(d);
        }
        p.domain = d;
    }
    if let Some(k) = args.kappa {
        p.kappa = k;
    }
    if let Some(w) = args.w0 {
        p.w0 = w;
    }
    if let Some(dt) = args.dt {
        p.dt = dt;
    }
    if let Some(t) = args.t_max {
        p.t_max = t;
    }
    let fixed_rho = matches!(args.flavor, Some(Flavor::PercolationK6 | Flavor::UstK2));
    if !args.force_points.is_empty() || !args.rhos.is_empty() {
        let rhos =
            if fixed_rho && args.rhos.is_empty() { vec![2.0; args.force_points.len()] } else { args.rhos.clone() };
        if args.force_points.len() != rhos.len() {
            return Err(SleError::InvalidParams(format!(
                "{} force points for {} rho values",
                args.force_points.len(),
                args.rhos.len()
            )));
        }
        p.force_points = args.force_points.clone();
        p.rhos = rhos;
    }
    let domain = p.domain;
    p.w0 = domain.snap(p.w0);
    for v in &mut p.force_points {
        *v = domain.snap(*v);
    }
    if let Some(n) = args.paths {
        m.paths = n;
    }
    if let Some(c) = &args.checkpoints {
        m.checkpoints = c.clone();
    } else if args.manifest.is_none() && kind != ExperimentKind::CoordChange {
        let t = m.params.t_max;
        m.checkpoints = vec![0.25 * t, 0.5 * t, t];
    }
    if let Some(s) = args.seed {
        m.seed = s;
    }
    if let Some(a) = args.significance {
        m.significance = a;
    }
    if let Some(g) = args.guard {
        m.guard = g;
    }
    if let Some(t) = args.tolerance {
        m.tolerance = t;
    }
    if args.threads.is_some() {
        m.threads = args.threads;
    }
    if args.out.is_some() || args.format.is_some() {
        m.output = OutputSpec {
            dir: args.out.clone().or(m.output.dir.take()),
            dump_paths: args.format.or(m.output.dump_paths),
        };
    }
    if kind == ExperimentKind::CoordChange {
        let setup = m.coord.get_or_insert_with(CoordChangeSetup::default);
        if let Some(g) = args.grid_step {
            setup.grid_step = g;
        }
        setup.negative_control |= args.negative_control;
    }
    if matches!(kind, ExperimentKind::Martingale | ExperimentKind::Girsanov) {
        let rebuild = m.observable.is_none() || args.flavor.is_some() || args.kappa.is_some() || !args.rhos.is_empty();
        if rebuild {
            let flavor = args.flavor.or(m.observable.as_ref().map(|o| o.flavor)).unwrap_or(Flavor::ChordalGeneral);
            let domain = flavor.domain();
            m.params.domain = domain;
            if !domain.contains_closure(m.params.w0) || !domain.is_boundary(domain.snap(m.params.w0)) {
                m.params.w0 = default_w0(domain);
            }
            let mut points: Vec<Point> = m.params.force_points.iter().map(|v| domain.snap(*v)).collect();
            // The special observables fix their own kappa; a different
            // simulation kappa given on the command line is kept as is.
            let spec = match flavor {
                Flavor::PercolationK6 | Flavor::UstK2 => {
                    if points.is_empty() {
                        points = default_circle_points(flavor, m.params.w0);
                        m.params.force_points = points.clone();
                    }
                    let spec = if flavor == Flavor::PercolationK6 {
                        ObservableSpec::percolation(points)?
                    } else {
                        ObservableSpec::ust(points)?
                    };
                    m.params.rhos = vec![2.0; spec.points.len()];
                    if args.kappa.is_none() {
                        m.params.kappa = spec.kappa;
                    }
                    spec
                }
                _ => ObservableSpec::new(flavor, m.params.kappa, points, m.params.rhos.clone())?,
            };
            m.observable = Some(spec);
        }
    }
    Ok(m)
}

fn summarize(stats: &EnsembleStats) -> String {
    let mut out = String::new();
    for c in &stats.checkpoints {
        out.push_str(&format!(
            "t={:<8} mean={:+.6} se={:.6} n={} excluded={}\n",
            c.time, c.driving.mean, c.driving.std_error, c.driving.count, c.excluded
        ));
    }
    if let Some(cmp) = &stats.comparison {
        for c in &cmp.checkpoints {
            let force = c.force.map(|f| format!(" force D={:.4} p={:.4}", f.statistic, f.p_value)).unwrap_or_default();
            out.push_str(&format!(
                "ks t={} driving D={:.4} p={:.4}{force}\n",
                c.time, c.driving.statistic, c.driving.p_value
            ));
        }
    }
    if let Some(d) = &stats.drift {
        for c in &d.checkpoints {
            out.push_str(&format!(
                "drift t={} mean-1={:+.3e} z={:+.3} stopped={:.3}\n",
                c.time, c.mean_deviation, c.z_score, c.stopped_fraction
            ));
        }
    }
    if let Some(g) = &stats.girsanov {
        out.push_str(&format!(
            "girsanov paths={} mean slope={:.5} max |slope-1|={:.5} tolerance={}\n",
            g.paths, g.mean_slope, g.max_discrepancy, g.tolerance
        ));
    }
    if !stats.exclusions.is_empty() {
        out.push_str(&format!("{} paths stopped before the last checkpoint\n", stats.exclusions.len()));
    }
    match stats.pass {
        Some(true) => out.push_str("PASS\n"),
        Some(false) => out.push_str("FAIL\n"),
        None => {}
    }
    out
}

fn run_kind(kind: ExperimentKind, args: &RunArgs) -> Result<i32> {
    let manifest = merge_manifest(kind, args)?;
    let stats = run_ensemble(&manifest)?;
    print!("{}", summarize(&stats));
    Ok(match stats.pass {
        Some(false) => EXIT_STAT_FAIL,
        _ => EXIT_OK,
    })
}

fn read_any(path: &Path) -> Result<crate::process::PathSample> {
    let file = fs::File::open(path)?;
    if path.extension().is_some_and(|e| e == "jsonl" || e == "json") {
        read_jsonl(BufReader::new(file))
    } else {
        read_binary(BufReader::new(file))
    }
}

fn transform_map(from: Domain, w0: Point, args: &TransformArgs) -> Result<MobiusMap> {
    let (anchor, boundary) = match (from, w0) {
        (Domain::Disk, Point::Finite(w)) => (Point::real(0.0), Point::Finite(-w / w.norm())),
        _ => (Point::new(0.0, 1.0), Point::Infinity),
    };
    let base = mobius_between(from, args.to, args.anchor.unwrap_or(anchor), args.boundary_anchor.unwrap_or(boundary))?;
    if args.to == Domain::HalfPlane {
        Ok(MobiusMap::half_plane_affine(args.scale, 0.0)?.compose(&base))
    } else {
        Ok(base)
    }
}

fn run_transform(args: &TransformArgs) -> Result<i32> {
    let sample = append_neutral_track(&read_any(&args.input)?)?;
    let psi = transform_map(sample.params.domain, sample.params.w0, args)?;
    let opts = TransformOptions { grid_step: args.grid_step, ..Default::default() };
    let mapped = transform_sample(&sample, &psi, &opts)?;
    match &args.out {
        Some(path) => write_path(&mapped.sample, args.format, BufWriter::new(fs::File::create(path)?))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_path(&mapped.sample, PathFormat::Jsonl, &mut lock)?;
            lock.flush()?;
        }
    }
    eprintln!("mapped {} records to {} ({} in the new time)", sample.len(), args.to, mapped.table.target_end());
    Ok(EXIT_OK)
}

/// Run a parsed command and return the exit status.
pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Simulate(a) => run_kind(ExperimentKind::Simulate, a),
        Command::Transform(a) => run_transform(a),
        Command::VerifyMartingale(a) => run_kind(ExperimentKind::Martingale, a),
        Command::VerifyCoordinateChange(a) => run_kind(ExperimentKind::CoordChange, a),
        Command::GirsanovCheck(a) => run_kind(ExperimentKind::Girsanov, a),
    }
}

/// Parse `argv`, run, and map every outcome to an exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(argv: &[&str]) -> Cli {
        Cli::try_parse_from(argv).unwrap()
    }

    #[test]
    fn flags_override_defaults() {
        let cli = parse(&[
            "sle-rho",
            "simulate",
            "--kappa",
            "3",
            "--force-point",
            "-1",
            "--rho",
            "-0.5",
            "--paths",
            "7",
            "--seed",
            "11",
        ]);
        let Command::Simulate(args) = &cli.command else { panic!() };
        let m = merge_manifest(ExperimentKind::Simulate, args).unwrap();
        assert_eq!(m.params.kappa, 3.0);
        assert_eq!(m.params.force_points, vec![Point::real(-1.0)]);
        assert_eq!(m.params.rhos, vec![-0.5]);
        assert_eq!((m.paths, m.seed), (7, 11));
    }

    #[test]
    fn mismatched_rho_count_is_an_error() {
        let cli = parse(&["sle-rho", "simulate", "--force-point", "1", "--force-point", "2", "--rho", "1"]);
        let Command::Simulate(args) = &cli.command else { panic!() };
        assert!(merge_manifest(ExperimentKind::Simulate, args).is_err());
    }

    #[test]
    fn percolation_flavor_fixes_kappa() {
        let cli = parse(&["sle-rho", "verify-martingale", "--flavor", "percolation", "--force-point", "-1,0"]);
        let Command::VerifyMartingale(args) = &cli.command else { panic!() };
        let m = merge_manifest(ExperimentKind::Martingale, args).unwrap();
        assert_eq!(m.params.kappa, 6.0);
        assert_eq!(m.params.domain, Domain::Disk);
        assert_eq!(m.observable.unwrap().rhos, vec![2.0]);
    }

    #[test]
    fn percolation_keeps_simulation_kappa_and_gets_default_points() {
        let cli = parse(&["sle-rho", "verify-martingale", "--flavor", "percolation", "--kappa", "4"]);
        let Command::VerifyMartingale(args) = &cli.command else { panic!() };
        let m = merge_manifest(ExperimentKind::Martingale, args).unwrap();
        let spec = m.observable.unwrap();
        assert_eq!((m.params.kappa, spec.kappa), (4.0, 6.0));
        assert_eq!(spec.points.len(), 3);
        assert!(spec.points.iter().all(|p| Domain::Disk.is_boundary(*p)));
    }

    #[test]
    fn bad_usage_exits_one() {
        assert_eq!(main_with_args(["sle-rho", "simulate", "--kappa", "abc"]), EXIT_ERROR);
        assert_eq!(main_with_args(["sle-rho", "simulate", "--kappa", "-1", "--paths", "2"]), EXIT_ERROR);
    }
}
