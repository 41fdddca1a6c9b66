use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::metric_core::geodesic::{christoffel_quiet, GeodesicResult, GeodesicVerdict};
use crate::metric_core::metric::MetricField;
use crate::metric_core::ode::{integrate, OdeOptions, Termination};

/// Parametrised curve on `[0, 1]`.
pub trait Curve: Sync {
    fn point(&self, t: f64) -> Vec<f64>;
    fn velocity(&self, t: f64) -> Vec<f64>;
}

/// Straight coordinate segment.
#[derive(Debug, Clone)]
pub struct Segment {
    pub from: Vec<f64>,
    pub to: Vec<f64>,
}

impl Curve for Segment {
    fn point(&self, t: f64) -> Vec<f64> {
        self.from
            .iter()
            .zip(&self.to)
            .map(|(a, b)| a + t * (b - a))
            .collect()
    }

    fn velocity(&self, _t: f64) -> Vec<f64> {
        self.from.iter().zip(&self.to).map(|(a, b)| b - a).collect()
    }
}

/// Curve given by closures for position and velocity.
pub struct FnCurve<P, V> {
    pub point: P,
    pub velocity: V,
}

impl<P, V> Curve for FnCurve<P, V>
where
    P: Fn(f64) -> Vec<f64> + Sync,
    V: Fn(f64) -> Vec<f64> + Sync,
{
    fn point(&self, t: f64) -> Vec<f64> {
        (self.point)(t)
    }

    fn velocity(&self, t: f64) -> Vec<f64> {
        (self.velocity)(t)
    }
}

fn pack(frame: &DMatrix<f64>) -> Vec<f64> {
    frame.as_slice().to_vec()
}

fn unpack(y: &[f64], n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, m, y)
}

/// Transports the columns of `frame` along `curve` by solving `V′ = −Γ(γ′, V)`.
pub fn parallel_transport(
    field: &MetricField,
    curve: &dyn Curve,
    frame: &DMatrix<f64>,
    opts: &OdeOptions,
) -> Result<DMatrix<f64>> {
    let n = field.dim();
    if frame.nrows() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: frame.nrows(),
        });
    }
    let start = curve.point(0.0);
    field.chart().check(&start)?;
    let m = frame.ncols();
    let sol = integrate(
        |t, y, dy| {
            let x = curve.point(t);
            let Some(gamma) = christoffel_quiet(field, &x) else {
                return false;
            };
            let gm = gamma.matrix(&curve.velocity(t));
            let v = DMatrix::from_column_slice(n, m, y);
            let d = -(gm * v);
            dy.copy_from_slice(d.as_slice());
            true
        },
        0.0,
        &pack(frame),
        1.0,
        &[],
        false,
        opts,
    );
    match sol.termination {
        Termination::Completed => Ok(unpack(sol.last().1, n, m)),
        Termination::LeftDomain { t } => {
            let p = curve.point(t);
            field.chart().check(&curve.point(1.0))?;
            Err(GeomError::OutOfDomain {
                coords: p,
                coord: "curve".into(),
            })
        }
        other => Err(GeomError::OdeSolveFailure(format!("{other:?}"))),
    }
}

/// Transport around the closed or open polygon through `vertices`.
pub fn transport_polyline(
    field: &MetricField,
    vertices: &[Vec<f64>],
    frame: &DMatrix<f64>,
    opts: &OdeOptions,
) -> Result<DMatrix<f64>> {
    for v in vertices {
        field.chart().check(v)?;
    }
    let mut current = frame.clone();
    for w in vertices.windows(2) {
        let seg = Segment {
            from: w[0].clone(),
            to: w[1].clone(),
        };
        current = parallel_transport(field, &seg, &current, opts)?;
    }
    Ok(current)
}

/// Integrates a geodesic together with frames transported along it.
/// Returns the geodesic result and the transported frame at every recorded time.
pub fn transport_along_geodesic(
    field: &MetricField,
    p: &[f64],
    v: &[f64],
    frame: &DMatrix<f64>,
    horizon: f64,
    checkpoints: &[f64],
    opts: &OdeOptions,
) -> Result<(GeodesicResult, Vec<DMatrix<f64>>)> {
    let n = field.dim();
    field.chart().check(p)?;
    let m = frame.ncols();
    let mut y0 = p.to_vec();
    y0.extend_from_slice(v);
    y0.extend_from_slice(frame.as_slice());
    let sol = integrate(
        |_, y, dy| {
            let (x, rest) = y.split_at(n);
            let (vel, fr) = rest.split_at(n);
            let Some(gamma) = christoffel_quiet(field, x) else {
                return false;
            };
            let gm = gamma.matrix(vel);
            let acc = &gm * nalgebra::DVector::from_column_slice(vel);
            dy[..n].copy_from_slice(vel);
            for i in 0..n {
                dy[n + i] = -acc[i];
            }
            let d = -(gm * DMatrix::from_column_slice(n, m, fr));
            dy[2 * n..].copy_from_slice(d.as_slice());
            true
        },
        0.0,
        &y0,
        horizon,
        checkpoints,
        false,
        opts,
    );
    let (verdict, escape) = match sol.termination {
        Termination::Completed => (GeodesicVerdict::ReachedHorizon, None),
        Termination::LeftDomain { t } => (GeodesicVerdict::LeftDomain, Some(t)),
        Termination::BlowUp { t } | Termination::StepLimit { t } => {
            (GeodesicVerdict::BlowUpDetected, Some(t))
        }
    };
    let frames = sol
        .states
        .iter()
        .map(|s| unpack(&s[2 * n..], n, m))
        .collect();
    let states = sol.states.iter().map(|s| s[..2 * n].to_vec()).collect();
    Ok((
        GeodesicResult {
            times: sol.times,
            states,
            verdict,
            escape_time_estimate: escape,
            speed_drift: 0.0,
        },
        frames,
    ))
}

/// Largest `|Pᵀ g(q) P − g(p)|` entry for a transport matrix `P` from `p` to `q`.
pub fn pairing_defect(g_start: &DMatrix<f64>, g_end: &DMatrix<f64>, transported: &DMatrix<f64>) -> f64 {
    (transported.transpose() * g_end * transported - g_start).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stock;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn flat_loop_is_trivial() {
        let plane = stock::flat(2);
        let verts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 0.7],
            vec![0.0, 0.7],
            vec![0.0, 0.0],
        ];
        let p = transport_polyline(&plane, &verts, &DMatrix::identity(2, 2), &OdeOptions::default())
            .unwrap();
        assert!((p - DMatrix::identity(2, 2)).amax() < 1e-12);
    }

    #[test]
    fn sphere_octant_triangle_rotates_by_a_right_angle() {
        // stereographic chart: origin (south pole) → (1,0) on the equator,
        // equator arc to (0,1), back to the origin; enclosed area π/2
        let s2 = stock::sphere_stereographic();
        let opts = OdeOptions::default();
        let id = DMatrix::identity(2, 2);
        let leg1 = Segment { from: vec![0.0, 0.0], to: vec![1.0, 0.0] };
        let arc = FnCurve {
            point: |t: f64| vec![(FRAC_PI_2 * t).cos(), (FRAC_PI_2 * t).sin()],
            velocity: |t: f64| vec![-FRAC_PI_2 * (FRAC_PI_2 * t).sin(), FRAC_PI_2 * (FRAC_PI_2 * t).cos()],
        };
        let leg3 = Segment { from: vec![0.0, 1.0], to: vec![0.0, 0.0] };
        let mut frame = parallel_transport(&s2, &leg1, &id, &opts).unwrap();
        frame = parallel_transport(&s2, &arc, &frame, &opts).unwrap();
        frame = parallel_transport(&s2, &leg3, &frame, &opts).unwrap();
        // g = 4 I at the origin, so the holonomy is an ordinary rotation there
        let angle = frame[(1, 0)].atan2(frame[(0, 0)]);
        assert!((angle.abs() - FRAC_PI_2).abs() < 1e-4, "angle {angle}");
        assert!((frame.determinant() - 1.0).abs() < 1e-7);
    }
}
