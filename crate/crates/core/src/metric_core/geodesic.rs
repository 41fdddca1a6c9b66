use crate::error::{GeomError, Result};
use crate::metric_core::metric::{bilinear, Christoffel, MetricField};
use crate::metric_core::ode::{integrate, OdeOptions, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeodesicVerdict {
    ReachedHorizon,
    LeftDomain,
    BlowUpDetected,
}

impl GeodesicVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            GeodesicVerdict::ReachedHorizon => "reached-horizon",
            GeodesicVerdict::LeftDomain => "left-domain",
            GeodesicVerdict::BlowUpDetected => "blow-up-detected",
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeodesicResult {
    pub times: Vec<f64>,
    /// Each state is `[x^1..x^n, v^1..v^n]`.
    pub states: Vec<Vec<f64>>,
    pub verdict: GeodesicVerdict,
    pub escape_time_estimate: Option<f64>,
    /// Largest `|g(γ′,γ′) − g(γ′(0),γ′(0))|` over recorded states, relative to `max(1, |γ′(0)|²)`.
    pub speed_drift: f64,
}

impl GeodesicResult {
    pub fn dim(&self) -> usize {
        self.states[0].len() / 2
    }

    pub fn position(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.states[i][..n]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.states[i][n..]
    }

    pub fn index_of_time(&self, t: f64) -> Option<usize> {
        self.times.iter().position(|&s| s == t)
    }

    pub fn escaped(&self) -> bool {
        self.verdict != GeodesicVerdict::ReachedHorizon
    }
}

/// Geodesic acceleration `−Γ(v, v)` at `x`, `None` outside the chart or where
/// the metric degenerates.
pub fn geodesic_acceleration(field: &MetricField, x: &[f64], v: &[f64]) -> Option<Vec<f64>> {
    let gamma = christoffel_quiet(field, x)?;
    Some(gamma.contract(v, v).into_iter().map(|a| -a).collect())
}

pub(crate) fn christoffel_quiet(field: &MetricField, x: &[f64]) -> Option<Christoffel> {
    if !field.chart().contains(x) {
        return None;
    }
    field.christoffel(x).ok()
}

/// Integrates the geodesic equation with adaptive step control, `tol` setting
/// the relative tolerance (absolute tolerance `tol·1e-3`).
pub fn geodesic_integrate(
    field: &MetricField,
    p: &[f64],
    v: &[f64],
    horizon: f64,
    tol: f64,
) -> Result<GeodesicResult> {
    geodesic_integrate_with(field, p, v, horizon, &[], &OdeOptions::with_tol(tol), true)
}

pub fn geodesic_integrate_with(
    field: &MetricField,
    p: &[f64],
    v: &[f64],
    horizon: f64,
    checkpoints: &[f64],
    opts: &OdeOptions,
    record_steps: bool,
) -> Result<GeodesicResult> {
    let n = field.dim();
    if p.len() != n || v.len() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: p.len().min(v.len()),
        });
    }
    if !(opts.rtol > 0.0) {
        return Err(GeomError::InvalidInput("tolerance must be positive".into()));
    }
    field.eval(p)?;
    let mut y0 = p.to_vec();
    y0.extend_from_slice(v);
    let sol = integrate(
        |_, y, dy| {
            let (x, vel) = y.split_at(n);
            match geodesic_acceleration(field, x, vel) {
                Some(acc) => {
                    dy[..n].copy_from_slice(vel);
                    dy[n..].copy_from_slice(&acc);
                    true
                }
                None => false,
            }
        },
        0.0,
        &y0,
        horizon,
        checkpoints,
        record_steps,
        opts,
    );
    let (verdict, escape) = match sol.termination {
        Termination::Completed => (GeodesicVerdict::ReachedHorizon, None),
        Termination::LeftDomain { t } => (GeodesicVerdict::LeftDomain, Some(t)),
        Termination::BlowUp { t } | Termination::StepLimit { t } => {
            (GeodesicVerdict::BlowUpDetected, Some(t))
        }
    };
    let q0 = bilinear(&field.eval(p)?, v, v);
    let scale = v.iter().map(|a| a * a).sum::<f64>().max(1.0);
    let mut drift: f64 = 0.0;
    for s in &sol.states {
        if let Ok(g) = field.eval(&s[..n]) {
            drift = drift.max((bilinear(&g, &s[n..], &s[n..]) - q0).abs() / scale);
        }
    }
    Ok(GeodesicResult {
        times: sol.times,
        states: sol.states,
        verdict,
        escape_time_estimate: escape,
        speed_drift: drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stock;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_equator_is_a_great_circle() {
        let s2 = stock::round_sphere();
        let p = [std::f64::consts::FRAC_PI_2, 0.0];
        let res = geodesic_integrate_with(
            &s2,
            &p,
            &[0.0, 1.0],
            3.0,
            &[1.0, 2.0],
            &OdeOptions::default(),
            false,
        )
        .unwrap();
        assert_eq!(res.verdict, GeodesicVerdict::ReachedHorizon);
        let i = res.index_of_time(2.0).unwrap();
        assert_relative_eq!(res.position(i)[0], std::f64::consts::FRAC_PI_2, epsilon = 1e-9);
        assert_relative_eq!(res.position(i)[1], 2.0, epsilon = 1e-9);
        assert!(res.speed_drift < 1e-8);
    }

    #[test]
    fn meridian_hits_the_pole_chart_boundary() {
        // θ decreases at unit speed from θ=1 and reaches the pole at t = 1; the
        // metric counts as degenerate once sin²θ ≤ 1e-10, i.e. θ ≲ 1e-5
        let s2 = stock::round_sphere();
        let res = geodesic_integrate(&s2, &[1.0, 0.0], &[-1.0, 0.0], 5.0, 1e-9).unwrap();
        assert!(res.escaped());
        assert!((res.escape_time_estimate.unwrap() - 1.0).abs() < 2e-5);
    }
}
