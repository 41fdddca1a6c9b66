use std::sync::Arc;

use conelab::metric_core::{Jet, VectorField};
use conelab::nullplane::*;
use conelab::GeomError;

fn linear_inputs() -> NullPlaneInputs {
    // f₁ ≡ 1, f₂ = x e^{−2s}, g₀ = dx²
    NullPlaneInputs::new(
        1,
        |_| Jet::constant(1.0),
        |y| y[0] * (y[1] * -2.0).exp(),
        |y| vec![(y[1] * -2.0).exp()],
        |_| vec![Jet::constant(1.0)],
    )
}

#[test]
fn h_matches_closed_form() {
    let (_, spec) = generate_nullplane_metric(linear_inputs()).unwrap();
    for s in [-1.7, -0.3, 0.0, 0.8, 2.0] {
        let h = spec.transverse_coefficients(&Jet::constants(&[0.4, s, 0.1, 0.0]))[0].value();
        let want = s * (-2.0 * s).exp();
        assert!((h - want).abs() < 1e-13, "s {s}: {h} vs {want}");
    }
    let pts = grid_points(&spec, 6);
    assert!(spec.ode_residual(&pts) < 1e-8);
}

#[test]
fn six_equations_hold_for_generated_eta() {
    let (_, spec) = generate_nullplane_metric(linear_inputs()).unwrap();
    let pts = grid_points(&spec, 10);
    let r = eta_system_residuals(&spec, &pts);
    assert!(r.iter().all(|&x| x < 1e-6), "{r:?}");
}

#[test]
fn dropping_the_linear_t_term_breaks_one_equation() {
    let mut inputs = linear_inputs();
    inputs.f1 = Arc::new(|u: Jet| u * 0.5 + 3.0);
    inputs.u_range = conelab::metric_core::Interval::new(-1.0, 1.0);
    let (_, spec) = generate_nullplane_metric(inputs).unwrap();
    let broken = |y: &[Jet]| {
        let mut e = spec.eta(y);
        let f1 = y[2] * 0.5 + 3.0;
        e[1] = e[1] - y[3] * f1 * 2.0;
        e
    };
    let pts = grid_points(&spec, 5);
    let r = eta_system_residuals_for(&broken, 1, &pts);
    let max_f1 = pts.iter().map(|p| (0.5 * p[2] + 3.0f64).abs()).fold(0.0, f64::max);
    assert!((r[4] - 2.0 * max_f1).abs() < 1e-6, "{r:?}");
    assert!(r[0] < 1e-6 && r[1] < 1e-6 && r[2] < 1e-6 && r[3] < 1e-6);
}

#[test]
fn vanishing_f1_is_rejected() {
    let mut inputs = linear_inputs();
    inputs.f1 = Arc::new(|u: Jet| u);
    assert!(matches!(generate_nullplane_metric(inputs), Err(GeomError::F1HasZero { .. })));
}

#[test]
fn trivial_f2_gives_zero_h() {
    let inputs = NullPlaneInputs::new(
        2,
        |u: Jet| u.cosh(),
        |_| Jet::constant(0.0),
        |_| vec![Jet::constant(0.0); 2],
        |_| vec![Jet::constant(1.0), Jet::constant(0.0), Jet::constant(0.0), Jet::constant(1.0)],
    );
    let (_, spec) = generate_nullplane_metric(inputs).unwrap();
    let y = Jet::constants(&[0.2, 0.3, 0.5, 0.7, 1.1]);
    let eta: Vec<f64> = spec.eta(&y).iter().map(Jet::value).collect();
    let f1 = 0.7f64.cosh();
    assert_eq!(&eta[..2], &[0.0, 0.0]);
    assert!((eta[2] - 2.0 * 1.1 * f1).abs() < 1e-15);
    assert_eq!(eta[3], 0.0);
    assert!((eta[4] - f1).abs() < 1e-15);
}

fn frame(n: usize) -> (VectorField, VectorField) {
    // V = ∂_t, Z = ∂_s in the chart (x…, s, u, t)
    (VectorField::coordinate(n - 1, n), VectorField::coordinate(n - 3, n))
}

#[test]
fn coordinate_pair_satisfies_frame_equations() {
    let mut inputs = linear_inputs();
    inputs.f1 = Arc::new(|u: Jet| u.exp());
    inputs.g0 = Arc::new(|y: &[Jet]| vec![(y[1] * 0.3).cosh() + y[0] * y[0]]);
    let (field, spec) = generate_nullplane_metric(inputs).unwrap();
    let pts = grid_points(&spec, 4);
    let (v, z) = frame(4);
    let rep = vz_residuals(&field, &v, &z, &pts).unwrap();
    assert!(rep.max() < 1e-5, "{rep:?}");
    assert_eq!(rep.alpha.len(), pts.len());
    assert!(integrability_residual(&field, &v, &pts).unwrap() < 1e-5);
}

#[test]
fn scaled_z_is_not_admissible() {
    let (field, spec) = generate_nullplane_metric(linear_inputs()).unwrap();
    let pts = grid_points(&spec, 2);
    let (v, z) = frame(4);
    let err = vz_residuals(&field, &v, &z.scaled(2.0), &pts).unwrap_err();
    assert!(matches!(err, GeomError::PairNotAdmissible { .. }));
}

#[test]
fn broken_eta_breaks_frame_equations() {
    let (_, spec) = generate_nullplane_metric(linear_inputs()).unwrap();
    let inner = spec.clone();
    let broken: VectorFn = Arc::new(move |y: &[Jet]| {
        let mut e = inner.eta(y);
        e[1] = e[1] - y[3] * 2.0;
        e
    });
    let field = assemble_metric(spec.chart.clone(), 1, spec.inputs.g0.clone(), broken);
    let pts = grid_points(&spec, 3);
    let (v, z) = frame(4);
    let rep = vz_residuals(&field, &v, &z, &pts).unwrap();
    assert!(rep.max() > 1e-2, "{rep:?}");
}
