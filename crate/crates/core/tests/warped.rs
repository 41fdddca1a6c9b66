use conelab::metric_core::{Interval, Jet};
use conelab::stock;
use conelab::warped::*;

#[test]
fn cosh_over_complete_base_is_complete() {
    for eps in [1.0, -1.0] {
        let spec = WarpedSpec::new(eps, Warp::Cosh, stock::circle(), Interval::unbounded()).unwrap();
        let v = completeness_verdict(&spec, true, 42).unwrap();
        assert_eq!(v.verdict, Completeness::Complete, "eps {eps}: {v:?}");
        assert_eq!(v.reason, CompletenessClause::Cosh);
        assert_eq!(v.spot_checked, SPOT_CHECK_COUNT);
    }
}

#[test]
fn exp_over_riemannian_base_with_definite_total_is_complete() {
    let spec = WarpedSpec::new(-1.0, Warp::Exp, stock::flat(1), Interval::unbounded()).unwrap();
    let v = completeness_verdict(&spec, true, 42).unwrap();
    assert_eq!(v.verdict, Completeness::Complete, "{v:?}");
    assert_eq!(v.reason, CompletenessClause::ExpDefinite);
}

#[test]
fn exp_indefinite_has_escaping_null_witness() {
    for (eps, base) in [(1.0, stock::flat(1)), (-1.0, stock::minkowski2())] {
        let spec = WarpedSpec::new(eps, Warp::Exp, base, Interval::unbounded()).unwrap();
        let v = completeness_verdict(&spec, true, 42).unwrap();
        assert_eq!(v.verdict, Completeness::Incomplete);
        assert_eq!(v.reason, CompletenessClause::ExpIndefinite);
        let w = v.witness.unwrap();
        assert!(w.escape_time < ESCAPE_CAP);
        // the |det| > 1e-10 guard stops the run slightly before ξ reaches zero
        assert!((w.escape_time - 1.0).abs() < 1e-2, "escape {}", w.escape_time);
        assert!(w.affine_residual.unwrap() < 1e-6, "{:?}", w.affine_residual);
    }
}

#[test]
fn incomplete_base_yields_witness() {
    // the open half line x > 0 with the flat metric is incomplete
    let chart = conelab::metric_core::CoordinateChart::new(vec!["x"], vec![Interval::positive()]).unwrap();
    let base = conelab::metric_core::MetricField::diagonal(chart, |_| vec![Jet::constant(1.0)]);
    let spec = WarpedSpec::new(-1.0, Warp::Cosh, base, Interval::unbounded()).unwrap();
    let v = completeness_verdict(&spec, false, 42).unwrap();
    assert_eq!(v.reason, CompletenessClause::BaseIncomplete);
    assert_eq!(v.verdict, Completeness::Incomplete);
    assert!(v.witness.unwrap().escape_time < ESCAPE_CAP);
}

#[test]
fn connection_formulas_hold() {
    let specs = vec![
        WarpedSpec::new(-1.0, Warp::Cosh, stock::circle(), Interval::unbounded()).unwrap(),
        WarpedSpec::new(1.0, Warp::Cosh, stock::round_sphere(), Interval::unbounded()).unwrap(),
        WarpedSpec::new(-1.0, Warp::custom("exp(-s)", |s| (-s).exp()), stock::flat_torus(), Interval::unbounded())
            .unwrap(),
        WarpedSpec::new(1.0, Warp::Exp, stock::minkowski2(), Interval::unbounded()).unwrap(),
    ];
    for spec in specs {
        let pts = spec.sample_points(20, 7);
        let r = warped_connection_residual(&spec, &pts).unwrap();
        assert!(r < 1e-6, "{:?}: {r}", spec.warp);
    }
}

#[test]
fn slice_geodesics_are_pregeodesics_of_the_base() {
    let spec = WarpedSpec::new(-1.0, Warp::Cosh, stock::round_sphere(), Interval::unbounded()).unwrap();
    let r = slice_pregeodesic_residual(&spec, &[0.3, 1.2, 0.4], &[0.2, 0.5], 3.0).unwrap();
    assert!(r < 1e-5, "{r}");
}

#[test]
fn example_metrics_as_warped_products() {
    // ds² + cosh²(s) g_N and ds² + e^{−2s} g_N both use ε = −1
    let ex33 = WarpedSpec::new(-1.0, Warp::Cosh, stock::flat_torus(), Interval::unbounded()).unwrap();
    let g = build_warped(&ex33).unwrap().eval(&[0.5, 0.0, 0.0]).unwrap();
    assert_eq!(g[(0, 0)], 1.0);
    assert!((g[(1, 1)] - 0.5f64.cosh().powi(2)).abs() < 1e-15);
    let horo = WarpedSpec::new(-1.0, Warp::custom("exp(-s)", |s| (-s).exp()), stock::flat_torus(), Interval::unbounded())
        .unwrap();
    let g = build_warped(&horo).unwrap().eval(&[0.5, 0.0, 0.0]).unwrap();
    assert!((g[(2, 2)] - (-1.0f64).exp()).abs() < 1e-15);
}
