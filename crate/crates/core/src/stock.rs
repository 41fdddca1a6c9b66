//! Frequently used base metrics.

use crate::metric_core::{CoordinateChart, Interval, Jet, MetricField};

fn chart(names: &[&str], domain: Vec<Interval>) -> CoordinateChart {
    CoordinateChart::new(names.to_vec(), domain).expect("stock chart")
}

/// Euclidean `R^n` in Cartesian coordinates `x0..`.
pub fn flat(n: usize) -> MetricField {
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let c = CoordinateChart::new(names, vec![Interval::unbounded(); n]).expect("stock chart");
    MetricField::diagonal(c, move |_| vec![Jet::constant(1.0); n]).with_signature_hint(0, n)
}

/// Flat torus `dx² + dy²` (periodicity is not modelled; the chart is the universal cover).
pub fn flat_torus() -> MetricField {
    let c = chart(&["x", "y"], vec![Interval::unbounded(); 2]);
    MetricField::diagonal(c, |_| vec![Jet::constant(1.0); 2]).with_signature_hint(0, 2)
}

/// Unit circle `dθ²`, charted on its universal cover.
pub fn circle() -> MetricField {
    let c = chart(&["theta"], vec![Interval::unbounded()]);
    MetricField::diagonal(c, |_| vec![Jet::constant(1.0)]).with_signature_hint(0, 1)
}

/// Round unit sphere `dθ² + sin²θ dφ²`, θ ∈ (0, π).
pub fn round_sphere() -> MetricField {
    let c = chart(
        &["theta", "phi"],
        vec![Interval::new(0.0, std::f64::consts::PI), Interval::unbounded()],
    );
    MetricField::diagonal(c, |x| {
        let s = x[0].sin();
        vec![Jet::constant(1.0), s * s]
    })
    .with_signature_hint(0, 2)
}

/// Round unit sphere in stereographic coordinates, `4 (dx² + dy²) / (1 + x² + y²)²`.
pub fn sphere_stereographic() -> MetricField {
    let c = chart(&["x", "y"], vec![Interval::unbounded(); 2]);
    MetricField::diagonal(c, |x| {
        let q = x[0] * x[0] + x[1] * x[1] + 1.0;
        let c = 4.0 / (q * q);
        vec![c, c]
    })
    .with_signature_hint(0, 2)
}

/// Hyperbolic upper half plane `(dx² + dy²) / y²`.
pub fn hyperbolic_half_plane() -> MetricField {
    let c = chart(&["x", "y"], vec![Interval::unbounded(), Interval::positive()]);
    MetricField::diagonal(c, |x| {
        let c = x[1].powi(-2);
        vec![c, c]
    })
    .with_signature_hint(0, 2)
}

/// Hyperbolic plane in geodesic polar coordinates `dρ² + sinh²ρ dφ²`.
pub fn hyperbolic_polar() -> MetricField {
    let c = chart(&["rho", "phi"], vec![Interval::positive(), Interval::unbounded()]);
    MetricField::diagonal(c, |x| {
        let s = x[0].sinh();
        vec![Jet::constant(1.0), s * s]
    })
    .with_signature_hint(0, 2)
}

/// Two-dimensional Minkowski space `−dτ² + dx²`.
pub fn minkowski2() -> MetricField {
    let c = chart(&["tau", "x"], vec![Interval::unbounded(); 2]);
    MetricField::diagonal(c, |_| vec![Jet::constant(-1.0), Jet::constant(1.0)]).with_signature_hint(1, 1)
}

/// Two-dimensional de Sitter space `−dτ² + cosh²τ dθ²`.
pub fn de_sitter2() -> MetricField {
    let c = chart(&["tau", "theta"], vec![Interval::unbounded(); 2]);
    MetricField::diagonal(c, |x| {
        let c = x[0].cosh();
        vec![Jet::constant(-1.0), c * c]
    })
    .with_signature_hint(1, 1)
}

/// Block-diagonal product metric `a ⊕ b` on the concatenated chart.
pub fn product(a: &MetricField, b: &MetricField) -> crate::Result<MetricField> {
    let c = a.chart().product(b.chart())?;
    let (na, nb) = (a.dim(), b.dim());
    let (fa, fb) = (a.func().clone(), b.func().clone());
    let n = na + nb;
    let mut field = MetricField::new(c, move |x| {
        let ga = fa(&x[..na]);
        let gb = fb(&x[na..]);
        let mut m = vec![Jet::constant(0.0); n * n];
        for i in 0..na {
            for j in 0..na {
                m[i * n + j] = ga[i * na + j];
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                m[(na + i) * n + na + j] = gb[i * nb + j];
            }
        }
        m
    });
    if let (Some((a0, a1)), Some((b0, b1))) = (a.signature_hint(), b.signature_hint()) {
        field = field.with_signature_hint(a0 + b0, a1 + b1);
    }
    Ok(field)
}

/// The stock metrics used for cross-mode differentiation checks.
pub fn catalogue() -> Vec<(&'static str, MetricField)> {
    vec![
        ("round-sphere", round_sphere()),
        ("sphere-stereographic", sphere_stereographic()),
        ("hyperbolic-half-plane", hyperbolic_half_plane()),
        ("hyperbolic-polar", hyperbolic_polar()),
        ("minkowski-2", minkowski2()),
        ("de-sitter-2", de_sitter2()),
    ]
}
