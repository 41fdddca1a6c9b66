use conelab::cone::*;
use conelab::metric_core::{CoordinateChart, Interval, Jet, MetricField};
use conelab::stock;
use conelab::warped::{build_warped, Warp, WarpedSpec};
use conelab::GeomError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The line with metric −dt².
fn timelike_line() -> MetricField {
    let chart = CoordinateChart::new(vec!["t"], vec![Interval::unbounded()]).unwrap();
    MetricField::diagonal(chart, |_| vec![Jet::constant(-1.0)]).with_signature_hint(1, 0)
}

#[test]
fn flat_and_non_flat_cones() {
    for (eps, base) in [(1.0, stock::round_sphere()), (-1.0, stock::hyperbolic_polar())] {
        let spec = ConeSpec::new(eps, base).unwrap();
        let cone = build_cone(&spec).unwrap();
        for p in spec.sample_points(20, 4) {
            assert!(cone.riemann(&p).unwrap().max_abs() < 1e-6);
        }
    }
    let horo = WarpedSpec::new(-1.0, Warp::custom("exp(-s)", |s| (-s).exp()), stock::round_sphere(), Interval::unbounded())
        .unwrap();
    let spec = ConeSpec::new(-1.0, build_warped(&horo).unwrap()).unwrap();
    let cone = build_cone(&spec).unwrap();
    let worst = spec
        .sample_points(10, 4)
        .iter()
        .map(|p| cone.riemann(p).unwrap().max_abs())
        .fold(0.0, f64::max);
    assert!(worst > 1e-2, "{worst}");
}

#[test]
fn closed_form_examples() {
    let g = closed_form_geodesic(1.0, 1.0, 0, 0.0, 1.0).unwrap();
    assert_eq!(g.t_max, MaxTime::Infinite);
    for t in [0.0, 0.5, 3.0] {
        assert_eq!(g.radius(t), t + 1.0);
        assert!((g.base_parameter(t) - t / (t + 1.0)).abs() < 1e-15);
    }
    assert_eq!(closed_form_geodesic(1.0, -1.0, 0, 0.0, 1.0).unwrap().t_max, MaxTime::Finite(1.0));
    let g = closed_form_geodesic(1.0, 0.0, 1, 1.0, -1.0).unwrap();
    assert_eq!(g.case_tag, CaseTag::OppositeSign);
    assert_eq!(g.t_max, MaxTime::Finite(1.0));
    assert!((g.base_parameter(0.5) - 0.5f64.atanh()).abs() < 1e-15);
    assert!(matches!(closed_form_geodesic(1.0, 0.0, 2, 1.0, 1.0), Err(GeomError::InvalidCase(_))));
}

#[test]
fn opposite_sign_boundary_is_infinite() {
    // a = L r sits on the infinite side of the table
    let g = closed_form_geodesic(2.0, 3.0, -1, 1.5, 1.0).unwrap();
    assert_eq!(g.t_max, MaxTime::Infinite);
    let expect = ((3.0 * 10.0 + 2.0f64).powi(2) - (1.5 * 2.0 * 10.0f64).powi(2)).sqrt();
    assert!((g.radius(10.0) - expect).abs() < 1e-12);
    let x = [1.5];
    let esc = numeric_escape_time(&ConeSpec::new(1.0, timelike_line()).unwrap(), &[0.0], 2.0, 3.0, &x, 50.0, 1e-10).unwrap();
    assert_eq!(esc, None);
}

#[test]
fn curvature_relation_between_base_and_cone() {
    let sphere = ConeSpec::new(1.0, stock::round_sphere()).unwrap();
    let r = cone_curvature_residual(&sphere, &sphere.sample_points(20, 1)).unwrap();
    assert!(r.formula < 1e-6 && r.radial < 1e-6, "{r:?}");

    let cosh_base = build_warped(&WarpedSpec::new(-1.0, Warp::Cosh, stock::flat_torus(), Interval::unbounded()).unwrap()).unwrap();
    let spec = ConeSpec::new(-1.0, cosh_base).unwrap();
    let r = cone_curvature_residual(&spec, &spec.sample_points(20, 2)).unwrap();
    assert!(r.formula < 1e-6 && r.radial < 1e-6, "{r:?}");
}

#[test]
fn degenerate_base_is_rejected() {
    let chart = CoordinateChart::new(vec!["x", "y"], vec![Interval::unbounded(); 2]).unwrap();
    let base = MetricField::diagonal(chart, |x| vec![Jet::constant(1.0), x[0] * 0.0]);
    let spec = ConeSpec::new(1.0, base).unwrap();
    let err = cone_curvature_residual(&spec, &[vec![1.0, 0.1, 0.2]]).unwrap_err();
    assert!(matches!(err, GeomError::DegenerateMetric { .. }));
}

#[test]
fn constant_curvature_base_scales_by_r_squared() {
    // R̂(X,Y,Y,X) = r²(κ−ε)(g(X,X)g(Y,Y) − g(X,Y)²) for base vectors
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (kappa, base) in [(1.0, stock::round_sphere()), (-1.0, stock::hyperbolic_polar())] {
        for eps in [1.0, -1.0] {
            let spec = ConeSpec::new(eps, base.clone()).unwrap();
            let cone = build_cone(&spec).unwrap();
            for p in spec.sample_points(10, 6) {
                let curv = cone.riemann(&p).unwrap();
                let x = [0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let y = [0.0, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let g = base.eval(&p[1..]).unwrap();
                let gb = |u: &[f64], w: &[f64]| conelab::metric_core::bilinear(&g, &u[1..], &w[1..]);
                let model = p[0] * p[0] * (kappa - eps) * (gb(&x, &x) * gb(&y, &y) - gb(&x, &y).powi(2));
                let got = curv.eval4(&x, &y, &y, &x);
                assert!((got - model).abs() < 1e-5 * model.abs().max(1.0), "{got} vs {model}");
            }
        }
    }
}

#[test]
fn closed_form_matches_integration() {
    let circle = ConeSpec::new(1.0, stock::circle()).unwrap();
    let cmp = closed_form_vs_integrator(&circle, &[0.0], 1.0, 0.0, &[1.0], 10.0).unwrap();
    assert_eq!(cmp.closed_form.case_tag, CaseTag::SameSign);
    assert_eq!(cmp.closed_form.t_max, MaxTime::Infinite);
    assert!(cmp.max_deviation < 1e-6, "{}", cmp.max_deviation);
    assert_eq!(cmp.numeric_escape, None);

    let cmp = closed_form_vs_integrator(&circle, &[0.0], 1.0, -0.5, &[0.0], 10.0).unwrap();
    assert_eq!(cmp.closed_form.t_max, MaxTime::Finite(2.0));
    let t = cmp.numeric_escape.unwrap();
    assert!((t - 2.0).abs() < 2e-2, "{t}");

    let cmp = closed_form_vs_integrator(&circle, &[0.4], 1.0, 0.7, &[0.0], 5.0).unwrap();
    assert!(cmp.max_deviation < 1e-9, "{}", cmp.max_deviation);

    let sphere = ConeSpec::new(-1.0, stock::round_sphere()).unwrap();
    let cmp = closed_form_vs_integrator(&sphere, &[1.2, 0.3], 1.5, 0.4, &[0.2, 0.3], 5.0).unwrap();
    assert_eq!(cmp.closed_form.case_tag, CaseTag::OppositeSign);
    assert!(cmp.max_deviation < 1e-6, "{}", cmp.max_deviation);
}

#[test]
fn same_sign_geodesic_continues_past_the_table_time() {
    // ε = 1 over the circle, a < 0: the line misses the apex, so the integrator runs past −r/a
    let circle = ConeSpec::new(1.0, stock::circle()).unwrap();
    let g = closed_form_geodesic(1.0, -1.0, 1, 1.0, 1.0).unwrap();
    assert_eq!(g.t_max, MaxTime::Finite(1.0));
    assert_eq!(numeric_escape_time(&circle, &[0.0], 1.0, -1.0, &[1.0], 5.0, 1e-10).unwrap(), None);
    assert!(g.radius(1.0) > 0.5);
}

/// Draws `(r0, a, c, L, ε)` covering the three table branches and compares the
/// closed-form T with the first boundary event of the integrator.
#[test]
fn random_escape_times_match_the_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let horizon = 50.0;
    let mut counts = [0usize; 3];
    for k in 0..30 {
        let eps: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let r0 = rng.gen_range(0.5..2.0);
        let l = rng.gen_range(0.3..2.0);
        let (c, a) = match k % 3 {
            0 => (0, rng.gen_range(-2.0..2.0)),
            1 => (-(eps as i32), rng.gen_range(-2.0..2.0)),
            _ => (eps as i32, rng.gen_range(0.0..2.0)),
        };
        let base = if c == 0 || c == 1 { stock::circle() } else { timelike_line() };
        let x = if c == 0 { 0.0 } else { l };
        let spec = ConeSpec::new(eps, base).unwrap();
        let cf = closed_form_geodesic(r0, a, c, l, eps).unwrap();
        counts[cf.case_tag as usize] += 1;
        let esc = numeric_escape_time(&spec, &[0.0], r0, a, &[x], horizon, 1e-10).unwrap();
        match (cf.t_max.finite().filter(|t| *t < horizon), esc) {
            (Some(t), Some(e)) => assert!((e - t).abs() < 1e-2 * t, "case {k}: T={t}, numeric {e}"),
            (None, None) => {}
            other => panic!("case {k}: {cf:?} vs {other:?}"),
        }
    }
    assert!(counts.iter().all(|&n| n > 0), "{counts:?}");
}
