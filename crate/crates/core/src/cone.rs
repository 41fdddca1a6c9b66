//! Cones `ε dr² + r² g` over a base metric, their closed-form geodesics and
//! the base/cone curvature relation.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result};
use crate::metric_core::{
    geodesic_integrate_with, CoordinateChart, Interval, Jet, MetricField, OdeOptions,
};

/// Threshold below which `|g(X,X)|` counts as a null (or zero) tangent.
pub const NULL_TANGENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ConeSpec {
    pub epsilon: f64,
    pub base: MetricField,
    pub r_range: Interval,
}

impl ConeSpec {
    pub fn new(epsilon: f64, base: MetricField) -> Result<Self> {
        ConeSpec::with_range(epsilon, base, Interval::positive())
    }

    pub fn with_range(epsilon: f64, base: MetricField, r_range: Interval) -> Result<Self> {
        if epsilon != 1.0 && epsilon != -1.0 {
            return Err(GeomError::InvalidInput(format!("epsilon must be ±1, got {epsilon}")));
        }
        if r_range.lo < 0.0 || r_range.is_empty() {
            return Err(GeomError::InvalidInput("radial range must lie in (0, ∞)".into()));
        }
        Ok(ConeSpec {
            epsilon,
            base,
            r_range,
        })
    }

    /// Random cone points `(r, x)` with `x` sampled from the base chart.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let chart = self
            .base
            .chart()
            .prepend("r", self.r_range)
            .expect("cone chart");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| chart.sample_point(&mut rng)).collect()
    }
}

/// Chart `(r, base coordinates…)` and metric `blockdiag(ε, r² g)`.
pub fn build_cone(spec: &ConeSpec) -> Result<MetricField> {
    let chart: CoordinateChart = spec.base.chart().prepend("r", spec.r_range)?;
    let n = spec.base.dim();
    let base = spec.base.func().clone();
    let eps = spec.epsilon;
    let m = n + 1;
    let mut field = MetricField::new(chart, move |x| {
        let g = base(&x[1..]);
        let r2 = x[0] * x[0];
        let mut out = vec![Jet::constant(0.0); m * m];
        out[0] = Jet::constant(eps);
        for i in 0..n {
            for j in 0..n {
                out[(i + 1) * m + j + 1] = r2 * g[i * n + j];
            }
        }
        out
    })
    .with_mode(spec.base.mode());
    if let Some((neg, pos)) = spec.base.signature_hint() {
        field = if eps > 0.0 {
            field.with_signature_hint(neg, pos + 1)
        } else {
            field.with_signature_hint(neg + 1, pos)
        };
    }
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `g(X,X) = 0`: zero or light-like base velocity.
    NullTangent,
    /// `c·ε = +1`
    SameSign,
    /// `c·ε = −1`
    OppositeSign,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::NullTangent => "null-tangent",
            CaseTag::SameSign => "c*eps=+1",
            CaseTag::OppositeSign => "c*eps=-1",
        }
    }
}

/// Right end of a maximal existence interval `[0, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxTime {
    Finite(f64),
    Infinite,
}

impl MaxTime {
    pub fn finite(&self) -> Option<f64> {
        match self {
            MaxTime::Finite(t) => Some(*t),
            MaxTime::Infinite => None,
        }
    }
}

impl fmt::Display for MaxTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxTime::Finite(t) => write!(f, "{t}"),
            MaxTime::Infinite => f.write_str("inf"),
        }
    }
}

/// Closed-form cone geodesic `t ↦ (ρ(t), β(f(t)))` with initial data
/// `ρ(0) = r0`, `ρ′(0) = a`, `g(X,X) = c L²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeGeodesic {
    pub r0: f64,
    pub a: f64,
    pub c: i32,
    pub l: f64,
    pub epsilon: f64,
    pub case_tag: CaseTag,
    pub t_max: MaxTime,
}

pub fn closed_form_geodesic(r0: f64, a: f64, c: i32, l: f64, epsilon: f64) -> Result<ConeGeodesic> {
    if !(-1..=1).contains(&c) {
        return Err(GeomError::InvalidCase(format!("c must be -1, 0 or 1, got {c}")));
    }
    if !(r0 > 0.0) {
        return Err(GeomError::InvalidInput(format!("r0 must be positive, got {r0}")));
    }
    if epsilon != 1.0 && epsilon != -1.0 {
        return Err(GeomError::InvalidInput(format!("epsilon must be ±1, got {epsilon}")));
    }
    if c != 0 && !(l > 0.0) {
        return Err(GeomError::InvalidInput("L must be positive when c ≠ 0".into()));
    }
    let sigma = c as f64 * epsilon;
    let (case_tag, l) = if c == 0 {
        (CaseTag::NullTangent, 0.0)
    } else if sigma > 0.0 {
        (CaseTag::SameSign, l)
    } else {
        (CaseTag::OppositeSign, l)
    };
    let t_max = match case_tag {
        CaseTag::NullTangent | CaseTag::SameSign => {
            if a >= 0.0 {
                MaxTime::Infinite
            } else {
                MaxTime::Finite(-r0 / a)
            }
        }
        CaseTag::OppositeSign => {
            if a >= l * r0 {
                MaxTime::Infinite
            } else {
                MaxTime::Finite(r0 / (l * r0 - a))
            }
        }
    };
    Ok(ConeGeodesic {
        r0,
        a,
        c,
        l,
        epsilon,
        case_tag,
        t_max,
    })
}

impl ConeGeodesic {
    pub fn radius(&self, t: f64) -> f64 {
        let lin = self.a * t + self.r0;
        match self.case_tag {
            CaseTag::NullTangent => lin,
            CaseTag::SameSign => (lin * lin + (self.l * self.r0 * t).powi(2)).sqrt(),
            CaseTag::OppositeSign => (lin * lin - (self.l * self.r0 * t).powi(2)).sqrt(),
        }
    }

    pub fn radial_speed(&self, t: f64) -> f64 {
        let lin = self.a * t + self.r0;
        let sigma = match self.case_tag {
            CaseTag::NullTangent => return self.a,
            CaseTag::SameSign => 1.0,
            CaseTag::OppositeSign => -1.0,
        };
        (self.a * lin + sigma * (self.l * self.r0).powi(2) * t) / self.radius(t)
    }

    /// Base-geodesic parameter reached at time `t`.
    pub fn base_parameter(&self, t: f64) -> f64 {
        let lin = self.a * t + self.r0;
        match self.case_tag {
            CaseTag::NullTangent => self.r0 * t / lin,
            // atan2 keeps f continuous where at + r changes sign
            CaseTag::SameSign => (self.l * self.r0 * t).atan2(lin) / self.l,
            CaseTag::OppositeSign => (self.l * self.r0 * t / lin).atanh() / self.l,
        }
    }

    /// `f′ = r0² / ρ²` (conservation of the angular momentum).
    pub fn base_parameter_rate(&self, t: f64) -> f64 {
        (self.r0 / self.radius(t)).powi(2)
    }
}

/// Returns `(c, L)` with `g(X,X) = c L²` for a base tangent with the given square norm.
pub fn tangent_class(norm_sq: f64) -> (i32, f64) {
    if norm_sq.abs() <= NULL_TANGENT_TOL {
        (0, 0.0)
    } else {
        (norm_sq.signum() as i32, norm_sq.abs().sqrt())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConeCurvatureResidual {
    /// `max |R̂(X,Y)Z − [R(X,Y)Z − ε(g(Y,Z)X − g(X,Z)Y)]|` over coordinate lifts.
    pub formula: f64,
    /// `max |R̂(∂r, ·)·|` and `|R̂(·,·)∂r|`.
    pub radial: f64,
}

pub fn cone_curvature_residual(spec: &ConeSpec, samples: &[Vec<f64>]) -> Result<ConeCurvatureResidual> {
    let cone = build_cone(spec)?;
    let n = spec.base.dim();
    let m = n + 1;
    let eps = spec.epsilon;
    let (mut formula, mut radial): (f64, f64) = (0.0, 0.0);
    for p in samples {
        let rc = cone.riemann(p)?;
        let rb = spec.base.riemann(&p[1..])?;
        let g = &rb.g;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut expect = rb.up(l, i, j, k);
                        if l == i {
                            expect -= eps * g[(j, k)];
                        }
                        if l == j {
                            expect += eps * g[(i, k)];
                        }
                        formula = formula.max((rc.up(l + 1, i + 1, j + 1, k + 1) - expect).abs());
                    }
                    // the r-component of R̂(X,Y)Z vanishes as well
                    formula = formula.max(rc.up(0, i + 1, j + 1, k + 1).abs());
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                for l in 0..m {
                    radial = radial
                        .max(rc.up(l, 0, a, b).abs())
                        .max(rc.up(l, a, b, 0).abs());
                }
            }
        }
    }
    Ok(ConeCurvatureResidual { formula, radial })
}

#[derive(Debug, Clone)]
pub struct GeodesicComparison {
    pub closed_form: ConeGeodesic,
    /// Largest coordinate deviation over the checkpoints.
    pub max_deviation: f64,
    pub checkpoints: Vec<f64>,
    /// First boundary event of the integrator on `[0, horizon]`, if any.
    pub numeric_escape: Option<f64>,
}

/// Compares the closed form `(ρ(t), β(f(t)))` against direct integration of
/// the cone geodesic equation. Checkpoints are 100 equally spaced times on
/// `[0, min(0.9·T, horizon)]`; the base geodesic `β` is integrated separately.
pub fn closed_form_vs_integrator(
    spec: &ConeSpec,
    base_point: &[f64],
    r0: f64,
    a: f64,
    x: &[f64],
    horizon: f64,
) -> Result<GeodesicComparison> {
    let gx = spec.base.inner(base_point, x, x)?;
    let (c, l) = tangent_class(gx);
    let cf = closed_form_geodesic(r0, a, c, if c == 0 { 1.0 } else { l }, spec.epsilon)?;
    let t_end = match cf.t_max {
        MaxTime::Finite(t) => (0.9 * t).min(horizon),
        MaxTime::Infinite => horizon,
    };
    let checkpoints: Vec<f64> = (1..=100).map(|k| t_end * k as f64 / 100.0).collect();
    let opts = OdeOptions {
        rtol: 1e-11,
        atol: 1e-13,
        ..OdeOptions::default()
    };
    let cone = build_cone(spec)?;
    let mut p = vec![r0];
    p.extend_from_slice(base_point);
    let mut v = vec![a];
    v.extend_from_slice(x);
    let numeric = geodesic_integrate_with(&cone, &p, &v, t_end, &checkpoints, &opts, false)?;
    let f_times: Vec<f64> = checkpoints.iter().map(|&t| cf.base_parameter(t)).collect();
    let f_end = f_times.last().copied().unwrap_or(0.0);
    let base_geo = geodesic_integrate_with(&spec.base, base_point, x, f_end, &f_times, &opts, false)?;
    let mut dev: f64 = 0.0;
    for (k, &t) in checkpoints.iter().enumerate() {
        let Some(i) = numeric.index_of_time(t) else {
            return Err(GeomError::OdeSolveFailure(format!(
                "cone geodesic stopped before checkpoint t = {t}"
            )));
        };
        let pos = numeric.position(i);
        dev = dev.max((pos[0] - cf.radius(t)).abs());
        let beta = if f_times[k] == 0.0 {
            base_point.to_vec()
        } else {
            match base_geo.index_of_time(f_times[k]) {
                Some(j) => base_geo.position(j).to_vec(),
                None => {
                    return Err(GeomError::OdeSolveFailure(format!(
                        "base geodesic stopped before parameter {}",
                        f_times[k]
                    )))
                }
            }
        };
        for (q, b) in pos[1..].iter().zip(&beta) {
            dev = dev.max((q - b).abs());
        }
    }
    let escape = numeric_escape_time(spec, base_point, r0, a, x, horizon, 1e-10)?;
    Ok(GeodesicComparison {
        closed_form: cf,
        max_deviation: dev,
        checkpoints,
        numeric_escape: escape,
    })
}

/// Integrates the cone geodesic up to `horizon` and returns the first boundary
/// event (domain exit or blow-up), if any.
pub fn numeric_escape_time(
    spec: &ConeSpec,
    base_point: &[f64],
    r0: f64,
    a: f64,
    x: &[f64],
    horizon: f64,
    tol: f64,
) -> Result<Option<f64>> {
    let cone = build_cone(spec)?;
    let mut p = vec![r0];
    p.extend_from_slice(base_point);
    let mut v = vec![a];
    v.extend_from_slice(x);
    let res = geodesic_integrate_with(&cone, &p, &v, horizon, &[], &OdeOptions::with_tol(tol), false)?;
    Ok(res.escape_time_estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stock;
    use approx::assert_relative_eq;

    #[test]
    fn metric_over_circle() {
        let cone = build_cone(&ConeSpec::new(1.0, stock::circle()).unwrap()).unwrap();
        let g = cone.eval(&[2.0, 0.0]).unwrap();
        assert_eq!(g[(0, 0)], 1.0);
        assert_eq!(g[(1, 1)], 4.0);
        assert_eq!(g[(0, 1)], 0.0);
        let g1 = cone.eval(&[1.0, 0.0]).unwrap();
        assert_eq!(g1, nalgebra::DMatrix::identity(2, 2));
    }

    #[test]
    fn connection_over_circle() {
        let cone = build_cone(&ConeSpec::new(1.0, stock::circle()).unwrap()).unwrap();
        let gamma = cone.christoffel(&[2.0, 0.0]).unwrap();
        // ∇_X ∂r = X / r
        assert_relative_eq!(gamma.get(1, 0, 1), 0.5, epsilon = 1e-14);
        // r-component of ∇_X Y is −ε r g(X,Y) for coordinate lifts
        assert_relative_eq!(gamma.get(0, 1, 1), -2.0, epsilon = 1e-14);
        let spacelike_minus = build_cone(&ConeSpec::new(-1.0, stock::circle()).unwrap()).unwrap();
        let gm = spacelike_minus.christoffel(&[2.0, 0.0]).unwrap();
        assert_relative_eq!(gm.get(0, 1, 1), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_form_table() {
        let g = closed_form_geodesic(1.0, 1.0, 0, 0.0, 1.0).unwrap();
        assert_eq!(g.t_max, MaxTime::Infinite);
        assert_relative_eq!(g.radius(3.0), 4.0);
        assert_relative_eq!(g.base_parameter(3.0), 0.75);
        let g = closed_form_geodesic(1.0, -1.0, 0, 0.0, 1.0).unwrap();
        assert_eq!(g.t_max, MaxTime::Finite(1.0));
        let g = closed_form_geodesic(1.0, 0.0, -1, 1.0, 1.0).unwrap();
        assert_eq!(g.case_tag, CaseTag::OppositeSign);
        assert_eq!(g.t_max, MaxTime::Finite(1.0));
        assert_relative_eq!(g.base_parameter(0.5), 0.5f64.atanh(), epsilon = 1e-15);
        // boundary case a = L r of the opposite-sign branch
        let g = closed_form_geodesic(2.0, 3.0, 1, 1.5, -1.0).unwrap();
        assert_eq!(g.t_max, MaxTime::Infinite);
        assert!(closed_form_geodesic(1.0, 0.0, 2, 1.0, 1.0).is_err());
    }

    #[test]
    fn closed_form_solves_the_radial_equations() {
        // ρ″ = c ε L² ρ f′², ρ f″ + 2 ρ′ f′ = 0
        for &(a, c, eps) in &[(0.3, 1, 1.0), (-0.4, 1, -1.0), (0.2, -1, 1.0), (-0.5, 0, -1.0)] {
            let g = closed_form_geodesic(1.3, a, c, 0.8, eps).unwrap();
            let h = 1e-4;
            for &t in &[0.1, 0.4, 0.7] {
                let rdd = (g.radius(t + h) - 2.0 * g.radius(t) + g.radius(t - h)) / (h * h);
                let fd = (g.base_parameter(t + h) - g.base_parameter(t - h)) / (2.0 * h);
                let fdd = (g.base_parameter(t + h) - 2.0 * g.base_parameter(t) + g.base_parameter(t - h)) / (h * h);
                let rd = (g.radius(t + h) - g.radius(t - h)) / (2.0 * h);
                let sigma = (c as f64) * eps;
                assert!((rdd - sigma * g.l * g.l * g.radius(t) * fd * fd).abs() < 1e-5);
                assert!((g.radius(t) * fdd + 2.0 * rd * fd).abs() < 1e-5);
                assert!((fd - g.base_parameter_rate(t)).abs() < 1e-6 * g.base_parameter_rate(t).max(1.0));
                assert!((rd - g.radial_speed(t)).abs() < 1e-6 * g.radial_speed(t).abs().max(1.0));
            }
        }
    }

    #[test]
    fn hyperbolic_base_coefficient() {
        // ε = 1 over the κ = −1 half plane at y = 1 where g is the identity
        let spec = ConeSpec::new(1.0, stock::hyperbolic_half_plane()).unwrap();
        let cone = build_cone(&spec).unwrap();
        let r = 1.7;
        let curv = cone.riemann(&[r, 0.3, 1.0]).unwrap();
        let e1 = [0.0, 1.0, 0.0];
        let e2 = [0.0, 0.0, 1.0];
        assert_relative_eq!(curv.eval4(&e1, &e2, &e2, &e1), -2.0 * r * r, epsilon = 1e-9);
    }
}
