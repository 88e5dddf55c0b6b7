use num_complex::Complex64;
use proptest::prelude::*;
use sle_rho::coordinate::ReparamTable;
use sle_rho::loewner::{advance_point, evolve_point, DrivingPath, LoewnerConfig, MarkedPoint};
use sle_rho::mobius::{capacity_rate, mobius_between, phi_t, MobiusMap};
use sle_rho::process::{drift_term, run_process, step, ProcessState, SleParams};
use sle_rho::{Domain, Point};

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.9f64, -3.2..3.2f64).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

fn upper_point() -> impl Strategy<Value = Complex64> {
    (-3.0..3.0f64, 0.1..3.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

fn circle_point() -> impl Strategy<Value = Point> {
    (-3.2..3.2f64).prop_map(|a| Point::Finite(Complex64::from_polar(1.0, a)))
}

fn disk_to_upper() -> impl Strategy<Value = MobiusMap> {
    (disk_point(), circle_point(), 0.5..3.0f64, -2.0..2.0f64).prop_map(|(a, b, scale, shift)| {
        let base = mobius_between(Domain::Disk, Domain::HalfPlane, Point::Finite(a), b).unwrap();
        MobiusMap::half_plane_affine(scale, shift).unwrap().compose(&base)
    })
}

fn smooth_driving(domain: Domain, amp: f64, freq: f64, t_max: f64) -> DrivingPath {
    DrivingPath::from_fn(t_max, 400, move |t| match domain {
        Domain::Disk => Complex64::from_polar(1.0, amp * (freq * t).sin()),
        _ => Complex64::new(amp * (freq * t).sin(), 0.0),
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn mobius_composition_is_associative(f in disk_to_upper(), g in disk_to_upper(), h in disk_to_upper()) {
        let a = f.compose(&g.inverse()).compose(&h);
        let b = f.compose(&g.inverse().compose(&h));
        prop_assert!(a.distance(&b) < 1e-12);
    }

    #[test]
    fn mobius_inverse_and_identity(f in disk_to_upper(), z in disk_point()) {
        prop_assert!(f.inverse().compose(&f).distance(&MobiusMap::identity(Domain::Disk)) < 1e-12);
        prop_assert!(f.compose(&MobiusMap::identity(Domain::Disk)).distance(&f) < 1e-15);
        let back = f.inverse().apply(f.apply(Point::Finite(z))).finite().unwrap();
        prop_assert!((back - z).norm() < 1e-10);
        prop_assert!(f.apply(Point::Finite(z)).finite().unwrap().im > 0.0);
    }

    #[test]
    fn uniformizer_sends_the_line_to_the_circle(z in upper_point(), x in -50.0..50.0f64, arg in -3.2..3.2f64) {
        let lambda = Complex64::from_polar(1.0, arg);
        let phi = phi_t(Point::Finite(z), lambda).unwrap();
        prop_assert!(phi.apply(Point::Finite(z)).finite().unwrap().norm() < 1e-12);
        let u = phi.apply(Point::real(x)).finite().unwrap();
        prop_assert!((u.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn capacity_rate_is_squared_derivative(z in upper_point(), w in -5.0..5.0f64, arg in -3.2..3.2f64) {
        let rate = capacity_rate(Point::Finite(z), w).unwrap();
        let phi = phi_t(Point::Finite(z), Complex64::from_polar(1.0, arg)).unwrap();
        let d = phi.derivative(Complex64::new(w, 0.0)).norm_sqr();
        prop_assert!((rate / d - 1.0).abs() < 1e-10);
    }

    #[test]
    fn radial_flow_commutes_with_reflection(z in (0.2..0.6f64, -3.2..3.2f64), amp in 0.0..2.0f64, freq in 0.0..10.0f64) {
        let z = Complex64::from_polar(z.0, z.1);
        let driving = smooth_driving(Domain::Disk, amp, freq, 0.3);
        let cfg = LoewnerConfig::default();
        let inner = evolve_point(Domain::Disk, Point::Finite(z), &driving, &cfg);
        let outer = evolve_point(Domain::Disk, Point::Finite(1.0 / z.conj()), &driving, &cfg);
        let g = inner.current.finite().unwrap();
        prop_assume!(inner.is_alive() && g.norm() < 0.95);
        prop_assert!((outer.current.finite().unwrap() - 1.0 / g.conj()).norm() < 1e-8);
    }

    #[test]
    fn chordal_height_never_increases(z in upper_point(), amp in 0.0..2.0f64, freq in 0.0..10.0f64) {
        let driving = smooth_driving(Domain::HalfPlane, amp, freq, 0.5);
        let cfg = LoewnerConfig::default();
        let mut p = MarkedPoint::new(Domain::HalfPlane, Point::Finite(z));
        let mut last = z.im;
        for i in 0..driving.len() - 1 {
            advance_point(Domain::HalfPlane, &mut p, driving.times[i], &driving.segment(Domain::HalfPlane, i), &cfg);
            if !p.is_alive() {
                break;
            }
            let y = p.current.finite().unwrap().im;
            prop_assert!(y > 0.0 && y <= last + 1e-15);
            last = y;
        }
    }

    #[test]
    fn strip_ends_cancel_exactly(w in -5.0..5.0f64, rho in -10.0..10.0f64) {
        let params = SleParams::new(Domain::Strip, 2.0, Point::real(0.0))
            .with_force_point(Point::PlusInfinity, rho)
            .with_force_point(Point::MinusInfinity, rho);
        let d = drift_term(&params, Point::real(w), &params.force_points).unwrap();
        prop_assert_eq!(d, Point::real(0.0));
    }

    #[test]
    fn neutral_point_is_a_bitwise_no_op(kappa in 0.5..8.0f64, rho in -5.0..5.0f64, seed in 0u64..1000, disk in any::<bool>()) {
        let (domain, w0) = if disk { (Domain::Disk, Point::real(1.0)) } else { (Domain::HalfPlane, Point::real(0.0)) };
        let base = SleParams::new(domain, kappa, w0).with_time(0.05, 1e-3).with_seed(seed);
        let with = base.clone().with_force_point(domain.neutral_point().unwrap(), rho);
        prop_assert_eq!(run_process(&base).unwrap().w, run_process(&with).unwrap().w);
    }

    #[test]
    fn disk_step_rotates_by_the_noise(kappa in 0.1..8.0f64, theta in -3.2..3.2f64, db in -0.05..0.05f64) {
        let params = SleParams::new(Domain::Disk, kappa, Point::Finite(Complex64::from_polar(1.0, theta)));
        let state = ProcessState::initial(&params);
        let next = step(&params, &state, db, 1e-3);
        let expected = Complex64::from_polar(1.0, theta + kappa.sqrt() * db);
        prop_assert!((next.w - expected).norm() < 1e-12);
        prop_assert!((next.w.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reparameterization_is_monotone(incs in prop::collection::vec((0.01..1.0f64, 0.01..1.0f64), 2..40), probe in 0.0..1.0f64) {
        let mut src = vec![0.0];
        let mut tgt = vec![0.0];
        for (a, b) in &incs {
            src.push(src.last().unwrap() + a);
            tgt.push(tgt.last().unwrap() + b);
        }
        let table = ReparamTable::new(src.clone(), tgt.clone()).unwrap();
        let end = *src.last().unwrap();
        let (t1, t2) = (probe * end * 0.5, probe * end * 0.5 + 0.3 * end);
        prop_assert!(table.target_at(t1) <= table.target_at(t2));
        for (s, t) in src.iter().zip(&tgt) {
            prop_assert!((table.target_at(*s) - t).abs() < 1e-12);
            prop_assert!((table.source_at(*t) - s).abs() < 1e-12);
        }
    }
}
