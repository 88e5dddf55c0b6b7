use num_complex::Complex64;
use sle_rho::coordinate::{
    compare_laws, simulate_transformed, transform_sample, CompareConfig, TransformOptions, TransformedPath,
};
use sle_rho::loewner::{evolve_point, DrivingPath, LoewnerConfig};
use sle_rho::mobius::{capacity_rate, mobius_between, phi_t, MobiusMap};
use sle_rho::process::{append_neutral_force_point, run_process, PathSample, SleParams};
use sle_rho::{Domain, Point};

fn upper_to_disk() -> MobiusMap {
    mobius_between(Domain::HalfPlane, Domain::Disk, Point::new(0.0, 1.0), Point::Infinity).unwrap()
}

fn chordal_with_interior_force(seed: u64) -> PathSample {
    let p = SleParams::new(Domain::HalfPlane, 1.0, Point::real(0.0))
        .with_force_point(Point::new(0.0, 1.0), -5.0)
        .with_time(0.2, 1e-4)
        .with_seed(seed);
    run_process(&p).unwrap()
}

fn fine() -> TransformOptions {
    TransformOptions { grid_step: 1e-4, ..Default::default() }
}

#[test]
fn half_plane_to_disk_clock_and_rotation_match_closed_forms() {
    let s = chordal_with_interior_force(9);
    let out = transform_sample(&s, &upper_to_disk(), &fine()).unwrap();
    assert_eq!(out.native.len(), s.len());
    for (k, r) in out.native.iter().enumerate() {
        assert_eq!(r.source_time, s.times[k]);
        let log_d = s.log_derivatives[0][k];
        let y = s.v[0][k].finite().unwrap().im;
        // Radial capacity seen from the force point: log|g'| + log(y_0 / y_t).
        let s_oracle = log_d.re - y.ln();
        assert!((r.target_time - s_oracle).abs() < 1e-7, "k={k}: {} vs {s_oracle}", r.target_time);
        // Positive derivative at the origin fixes lambda = exp(-i arg g').
        assert!((r.lambda * Complex64::from_polar(1.0, log_d.im) - 1.0).norm() < 1e-7);
    }
}

#[test]
fn first_slice_is_the_mobius_image() {
    let s = chordal_with_interior_force(4);
    let psi = upper_to_disk();
    let out = transform_sample(&s, &psi, &fine()).unwrap();
    let w0 = psi.apply(Point::real(0.0)).finite().unwrap();
    assert!((out.sample.w[0] - w0).norm() < 1e-12);
    assert_eq!(out.sample.v[0][0], Point::real(0.0));
    assert_eq!(out.sample.times[0], 0.0);
}

#[test]
fn clock_rate_is_the_squared_uniformizer_derivative() {
    let s = chordal_with_interior_force(12);
    let out = transform_sample(&s, &upper_to_disk(), &fine()).unwrap();
    for (k, r) in out.native.iter().enumerate().step_by(25) {
        let w = s.w[k].re;
        let rate = capacity_rate(Point::Finite(r.z), w).unwrap();
        let phi = phi_t(Point::Finite(r.z), r.lambda).unwrap();
        let d = phi.derivative(Complex64::new(w, 0.0)).norm_sqr();
        assert!((rate / d - 1.0).abs() < 1e-6);
    }
}

#[test]
fn mapped_force_points_follow_the_disk_flow() {
    let p = SleParams::new(Domain::HalfPlane, 2.0, Point::real(0.0))
        .with_force_point(Point::new(0.0, 1.0), -4.0)
        .with_force_point(Point::new(1.5, 0.8), 0.0)
        .with_time(0.1, 1e-4)
        .with_seed(21);
    let s = run_process(&p).unwrap();
    let out = transform_sample(&s, &upper_to_disk(), &fine()).unwrap();
    let driving = DrivingPath { times: out.sample.times.clone(), values: out.sample.w.clone() };
    let start = out.sample.v[1][0];
    let flowed = evolve_point(Domain::Disk, start, &driving, &LoewnerConfig::default());
    let recorded = *out.sample.v[1].last().unwrap();
    let err = (flowed.current.finite().unwrap() - recorded.finite().unwrap()).norm();
    assert!(err < 1e-3, "disk flow {flowed:?} vs recorded {recorded:?}");
}

#[test]
fn round_trip_recovers_the_driving_path() {
    let s = chordal_with_interior_force(9);
    let psi = upper_to_disk();
    let there = transform_sample(&s, &psi, &fine()).unwrap();
    let back = transform_sample(&there.sample, &psi.inverse(), &fine()).unwrap();
    assert_eq!(back.sample.params.domain, Domain::HalfPlane);
    let mut compared = 0;
    for (t, w) in back.sample.times.iter().zip(&back.sample.w) {
        let i = s.index_at_or_before(*t).unwrap();
        if i + 1 >= s.len() {
            break;
        }
        let f = (t - s.times[i]) / (s.times[i + 1] - s.times[i]);
        let orig = s.w[i] * (1.0 - f) + s.w[i + 1] * f;
        assert!((w - orig).norm() < 1e-2, "t={t}: {w} vs {orig}");
        compared += 1;
    }
    assert!(compared > 1000);
    assert!(back.table.source.windows(2).all(|p| p[1] > p[0]));
}

fn radial_to_upper(kappa: f64, paths: usize, grid: f64, s_max: f64) -> Vec<TransformedPath> {
    let psi = mobius_between(Domain::Disk, Domain::HalfPlane, Point::real(0.0), Point::real(1.0)).unwrap();
    let base =
        append_neutral_force_point(&SleParams::new(Domain::Disk, kappa, Point::new(0.0, 1.0)).with_time(1.0, 1e-4));
    let opts = TransformOptions { grid_step: grid, target_max: Some(s_max), ..Default::default() };
    (0..paths as u64)
        .map(|i| simulate_transformed(&base.clone().with_seed(8).with_path_index(i), &psi, &opts).unwrap())
        .collect()
}

#[test]
fn radial_six_maps_to_brownian_driving_with_variance_six() {
    let grid = 0.01;
    let paths = radial_to_upper(6.0, 400, grid, 0.2);
    let mut incs = Vec::new();
    for p in &paths {
        let w = &p.sample.w;
        for k in 0..20.min(w.len() - 1) {
            incs.push(w[k + 1].re - w[k].re);
        }
    }
    let n = incs.len() as f64;
    let mean = incs.iter().sum::<f64>() / n;
    let var = incs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let target = 6.0 * grid;
    // Relative standard error of a Gaussian sample variance is sqrt(2 / n).
    let se = target * (2.0 / n).sqrt();
    assert!((var - target).abs() < 4.0 * se, "var {var} vs {target} (se {se}, n {n})");
    assert!(mean.abs() < 4.0 * (target / n).sqrt(), "mean {mean}");
}

#[test]
fn identical_ensembles_have_zero_statistic() {
    let p = SleParams::new(Domain::HalfPlane, 3.0, Point::real(0.0))
        .with_force_point(Point::new(0.5, 1.0), 1.0)
        .with_time(0.1, 1e-3);
    let a: Vec<PathSample> = (0..60).map(|i| run_process(&p.clone().with_path_index(i)).unwrap()).collect();
    let cfg = CompareConfig { min_paths: 50, ..Default::default() };
    let r = compare_laws(&a, &a.clone(), &[0.05, 0.1], &cfg).unwrap();
    assert!(r.pass);
    for c in &r.checkpoints {
        assert_eq!(c.driving.statistic, 0.0);
        assert_eq!(c.force.unwrap().statistic, 0.0);
        assert_eq!(c.driving.p_value, 1.0);
    }
}

#[test]
fn interior_force_is_detected() {
    let plain = SleParams::new(Domain::HalfPlane, 6.0, Point::real(0.0))
        .with_force_point(Point::new(0.0, 1.0), 0.0)
        .with_time(0.5, 1e-3)
        .with_record_every(10);
    let forced = SleParams { rhos: vec![3.0], ..plain.clone() };
    let run = |p: &SleParams, seed: u64| -> Vec<PathSample> {
        (0..1000).map(|i| run_process(&p.clone().with_seed(seed).with_path_index(i)).unwrap()).collect()
    };
    let r = compare_laws(&run(&plain, 1), &run(&forced, 2), &[0.5], &CompareConfig::default()).unwrap();
    assert!(!r.pass, "{r:?}");
}
