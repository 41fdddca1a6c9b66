//! Parallel vector fields on cones, their potential `u = ĝ(V, ∂r)`, and the
//! reconstruction of the cosh and exp splittings of the base.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cone::{build_cone, ConeSpec};
use crate::error::{GeomError, Result};
use crate::metric_core::{
    bilinear, covariant_derivative, geodesic_integrate_with, GeodesicResult, Interval, Jet, MetricField,
    OdeOptions, ScalarField, VectorField,
};
use crate::warped::{build_warped, Warp, WarpedSpec};

/// Tolerance for recognising `ν ∈ {−1, 0, +1}`.
pub const NU_TOL: f64 = 1e-9;
const GRADIENT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParallelCase {
    /// `ĝ(V,V) = ε`: the cone is flat.
    Flat,
    /// `ĝ(V,V) = −ε`.
    Cosh,
    /// `ĝ(V,V) = 0`.
    Exp,
}

impl ParallelCase {
    pub fn as_str(&self) -> &'static str {
        match self {
            ParallelCase::Flat => "flat",
            ParallelCase::Cosh => "cosh",
            ParallelCase::Exp => "exp",
        }
    }
}

pub fn classify_parallel_case(epsilon: f64, nu: f64) -> Result<ParallelCase> {
    if epsilon != 1.0 && epsilon != -1.0 {
        return Err(GeomError::InvalidInput(format!("epsilon must be ±1, got {epsilon}")));
    }
    if nu.abs() < NU_TOL {
        Ok(ParallelCase::Exp)
    } else if (nu - epsilon).abs() < NU_TOL {
        Ok(ParallelCase::Flat)
    } else if (nu + epsilon).abs() < NU_TOL {
        Ok(ParallelCase::Cosh)
    } else {
        Err(GeomError::NotNormalised(nu))
    }
}

/// Max over samples of `|(∇̂V)^i_k|`.
pub fn verify_parallel(cone: &MetricField, v: &VectorField, samples: &[Vec<f64>]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in samples {
        worst = worst.max(covariant_derivative(cone, v, p)?.amax());
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct ParallelFieldReport {
    /// The field rescaled so that `ĝ(V,V) ∈ {−1, 0, +1}`.
    pub field: VectorField,
    pub residual: f64,
    pub nu: f64,
    /// Spread of `ĝ(V,V)` over the samples before rescaling.
    pub nu_spread: f64,
    pub scale: f64,
    /// `u = ĝ(V, ∂r)` as a function on the base chart.
    pub potential: ScalarField,
    /// Largest `|∂r u|` over the samples.
    pub radial_residual: f64,
    pub case: ParallelCase,
}

fn reference_radius(r_range: Interval) -> f64 {
    if r_range.contains(1.0) {
        1.0
    } else {
        let (lo, hi) = r_range.sampling_window();
        0.5 * (lo + hi)
    }
}

/// Checks that `v` is parallel, normalises its causal type and extracts the potential.
pub fn parallel_field_report(spec: &ConeSpec, v: &VectorField, samples: &[Vec<f64>]) -> Result<ParallelFieldReport> {
    if samples.is_empty() {
        return Err(GeomError::InvalidInput("no sample points".into()));
    }
    let cone = build_cone(spec)?;
    let residual = verify_parallel(&cone, v, samples)?;
    let mut nus = Vec::with_capacity(samples.len());
    for p in samples {
        let val = v.eval(p);
        nus.push(bilinear(&cone.eval(p)?, &val, &val));
    }
    let nu_raw = nus[0];
    let nu_spread = nus.iter().map(|n| (n - nu_raw).abs()).fold(0.0, f64::max);
    let (scale, nu) = if nu_raw.abs() < 1e-9 {
        (1.0, 0.0)
    } else {
        (nu_raw.abs().powf(-0.5), nu_raw.signum())
    };
    let case = classify_parallel_case(spec.epsilon, nu)?;
    let field = v.scaled(scale);
    let eps = spec.epsilon;
    let r_ref = reference_radius(spec.r_range);
    let inner = field.clone();
    let potential = ScalarField::new(move |x| {
        let mut y = Vec::with_capacity(x.len() + 1);
        y.push(Jet::constant(r_ref));
        y.extend_from_slice(x);
        inner.eval_jets(&y)[0] * eps
    });
    let radial_residual = samples
        .iter()
        .map(|p| field.jacobian(p)[(0, 0)].abs())
        .fold(0.0, f64::max);
    Ok(ParallelFieldReport {
        field,
        residual: residual * scale,
        nu,
        nu_spread,
        scale,
        potential,
        radial_residual,
        case,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialResiduals {
    /// `V − (εu∂r + (1/r)∇u)`.
    pub reconstruction: f64,
    /// `∇du + εu g`.
    pub hessian: f64,
    /// `g(∇u,∇u)` against `−εu²` or `−ε(1+u²)`.
    pub gradient_norm: f64,
}

impl PotentialResiduals {
    pub fn max(&self) -> f64 {
        self.reconstruction.max(self.hessian).max(self.gradient_norm)
    }
}

/// Hessian and gradient-norm identities of a potential on the base.
/// Returns `(hessian, gradient_norm)` residuals.
pub fn potential_identities_on_base(
    base: &MetricField,
    epsilon: f64,
    nu: f64,
    u: &ScalarField,
    samples: &[Vec<f64>],
) -> Result<(f64, f64)> {
    let case = classify_parallel_case(epsilon, nu)?;
    if case == ParallelCase::Flat {
        return Err(GeomError::CaseMismatch(
            "gradient-norm identities need ĝ(V,V) ≠ ε".into(),
        ));
    }
    let (mut hess, mut norm) = (0.0f64, 0.0f64);
    for p in samples {
        let g = base.eval(p)?;
        let du = u.differential(p);
        if du.iter().all(|d| d.abs() < GRADIENT_FLOOR) {
            return Err(GeomError::GradientVanishes { coords: p.clone() });
        }
        let gamma = base.christoffel(p)?;
        let h = u.hessian(p);
        let uv = u.eval(p);
        let n = p.len();
        for k in 0..n {
            for l in 0..n {
                let cov = h[(k, l)] - (0..n).map(|m| gamma.get(m, k, l) * du[m]).sum::<f64>();
                hess = hess.max((cov + epsilon * uv * g[(k, l)]).abs());
            }
        }
        let ginv = g.clone().try_inverse().ok_or_else(|| GeomError::DegenerateMetric {
            coords: p.clone(),
            det: 0.0,
        })?;
        let grad = &ginv * nalgebra::DVector::from_column_slice(&du);
        let gg = bilinear(&g, grad.as_slice(), grad.as_slice());
        let expected = match case {
            ParallelCase::Exp => -epsilon * uv * uv,
            _ => -epsilon * (1.0 + uv * uv),
        };
        norm = norm.max((gg - expected).abs());
    }
    Ok((hess, norm))
}

/// All three potential identities for a parallel field on a cone.
pub fn potential_identities(spec: &ConeSpec, v: &VectorField, samples: &[Vec<f64>]) -> Result<PotentialResiduals> {
    let rep = parallel_field_report(spec, v, samples)?;
    if rep.case == ParallelCase::Flat {
        return Err(GeomError::CaseMismatch(
            "gradient-norm identities need ĝ(V,V) ≠ ε".into(),
        ));
    }
    let base_samples: Vec<Vec<f64>> = samples.iter().map(|p| p[1..].to_vec()).collect();
    let (hessian, gradient_norm) =
        potential_identities_on_base(&spec.base, spec.epsilon, rep.nu, &rep.potential, &base_samples)?;
    let grad = rep.potential.gradient_field(&spec.base);
    let mut reconstruction: f64 = 0.0;
    for p in samples {
        let vv = rep.field.eval(p);
        let x = &p[1..];
        let u = rep.potential.eval(x);
        let gu = grad.eval(x);
        reconstruction = reconstruction.max((vv[0] - spec.epsilon * u).abs());
        for (i, gi) in gu.iter().enumerate() {
            reconstruction = reconstruction.max((vv[i + 1] - gi / p[0]).abs());
        }
    }
    Ok(PotentialResiduals {
        reconstruction,
        hessian,
        gradient_norm,
    })
}

/// Largest curvature component over the samples for a field with `ĝ(V,V) = ε`.
pub fn flatness_certificate(spec: &ConeSpec, v: &VectorField, samples: &[Vec<f64>]) -> Result<f64> {
    let rep = parallel_field_report(spec, v, samples)?;
    if rep.case != ParallelCase::Flat {
        return Err(GeomError::CaseMismatch(format!(
            "flatness needs ĝ(V,V) = ε, found the {} case",
            rep.case.as_str()
        )));
    }
    let cone = build_cone(spec)?;
    let mut worst: f64 = 0.0;
    for p in samples {
        worst = worst.max(cone.riemann(p)?.max_abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitBranch {
    Cosh,
    /// Region `u > 0`.
    ExpPlus,
    /// Region `u < 0`.
    ExpMinus,
}

impl SplitBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitBranch::Cosh => "cosh",
            SplitBranch::ExpPlus => "exp-plus",
            SplitBranch::ExpMinus => "exp-minus",
        }
    }

    fn sign(&self) -> f64 {
        match self {
            SplitBranch::ExpMinus => -1.0,
            _ => 1.0,
        }
    }

    /// Warp `w(t)` of the level metric along the flow, and `w′/w`.
    fn warp(&self, t: f64) -> (f64, f64) {
        match self {
            SplitBranch::Cosh => (t.cosh(), t.tanh()),
            _ => (t.exp(), 1.0),
        }
    }
}

/// `s = −ε asinh(u)` (cosh) or `s = −ε ln(±u)` (exp).
pub fn split_function(u: &ScalarField, epsilon: f64, branch: SplitBranch) -> ScalarField {
    let u = u.clone();
    ScalarField::new(move |x| {
        let uj = u.eval_jets(x);
        match branch {
            SplitBranch::Cosh => uj.asinh() * (-epsilon),
            _ => (uj * branch.sign()).ln() * (-epsilon),
        }
    })
}

#[derive(Debug, Clone)]
pub struct SplitOptions {
    pub flow_times: Vec<f64>,
    pub level_points: usize,
    pub checks: usize,
    pub seed: u64,
}

impl Default for SplitOptions {
    fn default() -> Self {
        SplitOptions {
            flow_times: (0..10).map(|i| -1.5 + i as f64 / 3.0).collect(),
            level_points: 20,
            checks: 50,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct M0Report {
    pub point: Vec<f64>,
    /// Largest `|u|` along geodesics started tangent to `{u = 0}`.
    pub geodesy_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SplitReport {
    pub branch: SplitBranch,
    pub s_field: ScalarField,
    pub unit_field: VectorField,
    /// `|g(S,S) + ε|`.
    pub unit_residual: f64,
    /// `∇_X S` against the cosh or exp formula.
    pub connection_residual: f64,
    /// Coordinate solved for on the level set.
    pub root_coordinate: usize,
    pub level_points: Vec<Vec<f64>>,
    /// Metric deviation of the flow chart from `−ε dt² + w(t)² g_N`, relative to `max(1, |entry|)`.
    pub pullback_residual: f64,
    /// `|s(φ_t(p)) + εt|` on the grid.
    pub level_residual: f64,
    /// `(L_S g)(X,Y)` from the flow against `2 (w′/w) g(X,Y)` on level tangents.
    pub lie_residual: f64,
    pub grid: (usize, usize),
    pub m0: Option<M0Report>,
}

fn geodesic_opts() -> OdeOptions {
    OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeOptions::default()
    }
}

/// Solves `f(x) = target` along coordinate `k` from `start`: outward bracket search,
/// bisection to 1e-10, then Newton polishing.
fn solve_on_line(
    f: &ScalarField,
    chart: &crate::metric_core::CoordinateChart,
    start: &[f64],
    k: usize,
    target: f64,
) -> Option<Vec<f64>> {
    let eval = |x: f64| -> Option<f64> {
        let mut p = start.to_vec();
        p[k] = x;
        if !chart.contains(&p) {
            return None;
        }
        let v = f.eval(&p) - target;
        v.is_finite().then_some(v)
    };
    let x0 = start[k];
    let f0 = eval(x0)?;
    let (mut lo, mut hi) = (x0, x0);
    let mut found = f0 == 0.0;
    if !found {
        let mut step = 0.05;
        'search: for _ in 0..40 {
            for dir in [1.0, -1.0] {
                let x = x0 + dir * step;
                if let Some(fx) = eval(x) {
                    if fx.signum() != f0.signum() {
                        (lo, hi) = if dir > 0.0 { (x0, x) } else { (x, x0) };
                        found = true;
                        break 'search;
                    }
                }
            }
            step *= 1.5;
        }
    }
    if !found {
        return None;
    }
    let flo = eval(lo)?;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let fm = eval(mid)?;
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut p = start.to_vec();
    p[k] = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = f.differential(&p)[k];
        if d == 0.0 {
            break;
        }
        let step = (f.eval(&p) - target) / d;
        p[k] -= step;
    }
    chart.contains(&p).then_some(p)
}

/// Tangent basis of the level set of `f` through `p` parametrised by the other coordinates.
fn level_tangents(f: &ScalarField, p: &[f64], k: usize) -> Vec<Vec<f64>> {
    let df = f.differential(p);
    (0..p.len())
        .filter(|&j| j != k)
        .map(|j| {
            let mut t = vec![0.0; p.len()];
            t[j] = 1.0;
            t[k] = -df[j] / df[k];
            t
        })
        .collect()
}

/// Positions of the geodesic from `p` with velocity `±S(p)` at the requested
/// (signed) times; `None` entries never occur on success.
fn flow_positions(base: &MetricField, unit: &VectorField, p: &[f64], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let s = unit.eval(p);
    let mut out = vec![Vec::new(); times.len()];
    for sign in [1.0, -1.0] {
        let mut cps: Vec<f64> = times
            .iter()
            .filter(|&&t| t * sign > 0.0)
            .map(|&t| t.abs())
            .collect();
        if cps.is_empty() {
            continue;
        }
        cps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cps.dedup();
        let horizon = *cps.last().unwrap();
        let v: Vec<f64> = s.iter().map(|c| c * sign).collect();
        let geo = geodesic_integrate_with(base, p, &v, horizon, &cps, &geodesic_opts(), false)?;
        if geo.escaped() {
            return Err(GeomError::FlowLeftDomain {
                t: sign * geo.escape_time_estimate.unwrap_or(0.0),
            });
        }
        for (i, &t) in times.iter().enumerate() {
            if t * sign > 0.0 {
                let idx = geo.index_of_time(t.abs()).ok_or(GeomError::FlowLeftDomain { t })?;
                out[i] = geo.position(idx).to_vec();
            }
        }
    }
    for (i, &t) in times.iter().enumerate() {
        if t == 0.0 {
            out[i] = p.to_vec();
        }
    }
    Ok(out)
}

const FD_STEP: f64 = 1e-5;
const LIE_STEP: f64 = 1e-3;

/// Reconstructs the splitting `−ε dt² + w(t)² g_N` of the base from its potential.
pub fn split_reconstruct(
    base: &MetricField,
    u: &ScalarField,
    epsilon: f64,
    branch: SplitBranch,
    opts: &SplitOptions,
) -> Result<SplitReport> {
    if epsilon != 1.0 && epsilon != -1.0 {
        return Err(GeomError::InvalidInput(format!("epsilon must be ±1, got {epsilon}")));
    }
    let chart = base.chart().clone();
    let n = base.dim();
    if n < 2 {
        return Err(GeomError::InvalidInput("splitting needs dimension ≥ 2".into()));
    }
    let s_field = split_function(u, epsilon, branch);
    let unit = s_field.gradient_field(base);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // pointwise checks
    let in_region = |p: &[f64]| match branch {
        SplitBranch::Cosh => true,
        _ => branch.sign() * u.eval(p) > 0.0,
    };
    let mut checks = Vec::new();
    let mut tries = 0;
    while checks.len() < opts.checks && tries < 100 * opts.checks.max(1) {
        tries += 1;
        let p = chart.sample_point(&mut rng);
        if in_region(&p) {
            checks.push(p);
        }
    }
    if checks.is_empty() {
        return Err(GeomError::InvalidInput(format!(
            "no sample point with the sign of u required by the {} branch",
            branch.as_str()
        )));
    }
    let (mut unit_residual, mut connection_residual) = (0.0f64, 0.0f64);
    for p in &checks {
        if u.differential(p).iter().all(|d| d.abs() < GRADIENT_FLOOR) {
            return Err(GeomError::GradientVanishes { coords: p.clone() });
        }
        let g = base.eval(p)?;
        let sv = unit.eval(p);
        unit_residual = unit_residual.max((bilinear(&g, &sv, &sv) + epsilon).abs());
        let nabla = covariant_derivative(base, &unit, p)?;
        let factor = match branch {
            SplitBranch::Cosh => (-epsilon * s_field.eval(p)).tanh(),
            _ => 1.0,
        };
        let gs = &g * nalgebra::DVector::from_column_slice(&sv);
        for k in 0..n {
            for i in 0..n {
                let ek = if i == k { 1.0 } else { 0.0 };
                let expected = factor * (ek + epsilon * gs[k] * sv[i]);
                connection_residual = connection_residual.max((nabla[(i, k)] - expected).abs());
            }
        }
    }

    // level set {s = 0}
    let ds = s_field.differential(&checks[0]);
    let root = (0..n)
        .max_by(|&a, &b| ds[a].abs().partial_cmp(&ds[b].abs()).unwrap())
        .unwrap();
    let mut level_points = Vec::new();
    let mut attempts = 0;
    while level_points.len() < opts.level_points {
        attempts += 1;
        if attempts > 200 * opts.level_points.max(1) {
            return Err(GeomError::InvalidInput("level set {s = 0} not found in the chart".into()));
        }
        let start = chart.sample_point(&mut rng);
        if !in_region(&start) {
            continue;
        }
        if let Some(q) = solve_on_line(&s_field, &chart, &start, root, 0.0) {
            if s_field.differential(&q)[root].abs() > GRADIENT_FLOOR {
                level_points.push(q);
            }
        }
    }

    // flow chart Φ(t, y) and its pullback
    let mut times = Vec::new();
    for &t in &opts.flow_times {
        times.extend([t, t - LIE_STEP, t + LIE_STEP]);
    }
    let per_point: Vec<Result<(f64, f64, f64)>> = level_points
        .par_iter()
        .map(|q| {
            let tangents = level_tangents(&s_field, q, root);
            let g0 = base.eval(q)?;
            let gn = DMatrix::from_fn(n - 1, n - 1, |a, b| bilinear(&g0, &tangents[a], &tangents[b]));
            let centre = flow_positions(base, &unit, q, &times)?;
            // perturbed level points along each level coordinate
            let others: Vec<usize> = (0..n).filter(|&j| j != root).collect();
            let mut plus = Vec::new();
            let mut minus = Vec::new();
            for &j in &others {
                for (h, store) in [(FD_STEP, &mut plus), (-FD_STEP, &mut minus)] {
                    let mut start = q.clone();
                    start[j] += h;
                    let qp = solve_on_line(&s_field, &chart, &start, root, 0.0)
                        .ok_or(GeomError::FlowLeftDomain { t: 0.0 })?;
                    store.push(flow_positions(base, &unit, &qp, &times)?);
                }
            }
            let pullback_at = |ti: usize| -> Result<(DMatrix<f64>, Vec<f64>)> {
                let x = &centre[ti];
                let g = base.eval(x)?;
                let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
                // ∂t Φ is the unit field along the flow
                cols.push(unit.eval(x));
                for a in 0..n - 1 {
                    cols.push((0..n).map(|c| (plus[a][ti][c] - minus[a][ti][c]) / (2.0 * FD_STEP)).collect());
                }
                let pb = DMatrix::from_fn(n, n, |a, b| bilinear(&g, &cols[a], &cols[b]));
                Ok((pb, x.clone()))
            };
            let (mut pull, mut level, mut lie) = (0.0f64, 0.0f64, 0.0f64);
            for (m, &t) in opts.flow_times.iter().enumerate() {
                let (pb, x) = pullback_at(3 * m)?;
                let (w, dlog) = branch.warp(t);
                let mut expected = DMatrix::zeros(n, n);
                expected[(0, 0)] = -epsilon;
                expected.view_mut((1, 1), (n - 1, n - 1)).copy_from(&(&gn * (w * w)));
                for (a, b) in pb.iter().zip(expected.iter()) {
                    pull = pull.max((a - b).abs() / b.abs().max(1.0));
                }
                level = level.max((s_field.eval(&x) + epsilon * t).abs());
                let (pm, _) = pullback_at(3 * m + 1)?;
                let (pp, _) = pullback_at(3 * m + 2)?;
                for a in 1..n {
                    for b in 1..n {
                        let deriv = (pp[(a, b)] - pm[(a, b)]) / (2.0 * LIE_STEP);
                        let want = 2.0 * dlog * pb[(a, b)];
                        lie = lie.max((deriv - want).abs() / pb[(a, b)].abs().max(1.0));
                    }
                }
            }
            Ok((pull, level, lie))
        })
        .collect();
    let (mut pullback_residual, mut level_residual, mut lie_residual) = (0.0f64, 0.0f64, 0.0f64);
    for r in per_point {
        let (a, b, c) = r?;
        pullback_residual = pullback_residual.max(a);
        level_residual = level_residual.max(b);
        lie_residual = lie_residual.max(c);
    }

    let m0 = match branch {
        SplitBranch::Cosh => None,
        _ => detect_m0(base, u, &mut rng)?,
    };

    Ok(SplitReport {
        branch,
        s_field,
        unit_field: unit,
        unit_residual,
        connection_residual,
        root_coordinate: root,
        level_points,
        pullback_residual,
        level_residual,
        lie_residual,
        grid: (opts.flow_times.len(), opts.level_points),
        m0,
    })
}

/// Looks for a zero of `u` in the chart; if one is found, geodesics started
/// tangent to `{u = 0}` are integrated over `[0, 1]` and `max |u|` recorded.
pub fn detect_m0(base: &MetricField, u: &ScalarField, rng: &mut ChaCha8Rng) -> Result<Option<M0Report>> {
    let chart = base.chart();
    let n = base.dim();
    for _ in 0..200 {
        let start = chart.sample_point(rng);
        let du = u.differential(&start);
        let k = (0..n)
            .max_by(|&a, &b| du[a].abs().partial_cmp(&du[b].abs()).unwrap())
            .unwrap();
        if du[k].abs() < GRADIENT_FLOOR {
            continue;
        }
        let Some(p) = solve_on_line(u, chart, &start, k, 0.0) else {
            continue;
        };
        if u.differential(&p)[k].abs() < GRADIENT_FLOOR {
            continue;
        }
        let cps: Vec<f64> = (1..=10).map(|i| i as f64 * 0.1).collect();
        let mut worst = u.eval(&p).abs();
        for t in level_tangents(u, &p, k) {
            let norm = t.iter().map(|c| c * c).sum::<f64>().sqrt();
            let v: Vec<f64> = t.iter().map(|c| c / norm).collect();
            let geo = geodesic_integrate_with(base, &p, &v, 1.0, &cps, &geodesic_opts(), false)?;
            for i in 0..geo.times.len() {
                worst = worst.max(u.eval(geo.position(i)).abs());
            }
        }
        return Ok(Some(M0Report {
            point: p,
            geodesy_residual: worst,
        }));
    }
    Ok(None)
}

/// Compares `u∘γ` for the base geodesic `γ(0)=p, γ′(0)=x` with
/// `u(p) cosh t + g(∇u, x) sinh t` on `t ∈ [0, 5]`, relative to `max(1, |f|)`.
pub fn u_profile_along_geodesic(
    base: &MetricField,
    u: &ScalarField,
    epsilon: f64,
    p: &[f64],
    x: &[f64],
) -> Result<f64> {
    let g = base.eval(p)?;
    let norm = bilinear(&g, x, x);
    if (norm + epsilon).abs() > 1e-8 {
        return Err(GeomError::InvalidInput(format!(
            "initial velocity must satisfy g(X,X) = −ε, found {norm}"
        )));
    }
    let cps: Vec<f64> = (1..=50).map(|i| i as f64 * 0.1).collect();
    let geo = geodesic_integrate_with(base, p, x, 5.0, &cps, &geodesic_opts(), false)?;
    if geo.escaped() {
        return Err(GeomError::FlowLeftDomain {
            t: geo.escape_time_estimate.unwrap_or(0.0),
        });
    }
    let u0 = u.eval(p);
    let du = u.differential(p);
    let slope: f64 = du.iter().zip(x).map(|(a, b)| a * b).sum();
    let mut worst: f64 = 0.0;
    for i in 0..geo.times.len() {
        let t = geo.times[i];
        let want = u0 * t.cosh() + slope * t.sinh();
        let got = u.eval(geo.position(i));
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
    }
    Ok(worst)
}

/// `(r, s) ↦ (r eˢ, (ε/2) r e⁻ˢ)`.
pub fn light_cone_map(epsilon: f64, r: f64, s: f64) -> (f64, f64) {
    (r * s.exp(), 0.5 * epsilon * r * (-s).exp())
}

/// Cone over `−ε ds² + e^{2s} g_N` in the chart `(r, s, N…)`.
pub fn exp_branch_cone(epsilon: f64, base_n: MetricField) -> Result<MetricField> {
    let base = WarpedSpec::new(epsilon, Warp::Exp, base_n, Interval::unbounded())?;
    build_cone(&ConeSpec::new(epsilon, build_warped(&base)?)?)
}

/// Largest relative deviation between the pullback of `2 du dv + u² g_N` under
/// the map `(r, s, p) ↦ (r eˢ, (ε/2) r e⁻ˢ, p)` and the cone metric.
pub fn light_cone_isometry_check(epsilon: f64, base_n: &MetricField, samples: &[Vec<f64>]) -> Result<f64> {
    let cone = exp_branch_cone(epsilon, base_n.clone())?;
    let m = cone.dim();
    let k = m - 2;
    let mut worst: f64 = 0.0;
    for p in samples {
        let x = Jet::seed(p, 1);
        let (r, s) = (x[0], x[1]);
        let mut target = vec![r * s.exp(), r * (-s).exp() * (0.5 * epsilon)];
        target.extend_from_slice(&x[2..]);
        let jac = DMatrix::from_fn(m, m, |a, b| target[a].d(b));
        let uval = target[0].value();
        let gn = base_n.eval(&p[2..])?;
        let mut model = DMatrix::zeros(m, m);
        model[(0, 1)] = 1.0;
        model[(1, 0)] = 1.0;
        model.view_mut((2, 2), (k, k)).copy_from(&(gn * (uval * uval)));
        let pulled = jac.transpose() * model * jac;
        let ghat = cone.eval(p)?;
        for (a, b) in pulled.iter().zip(ghat.iter()) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    Ok(worst)
}

/// Covariant derivative of `F(t) = ρ(t)∂r − tγ′(t)` along a cone geodesic
/// starting at `t = 0`, at every recorded state.
pub fn radial_position_field_check(cone: &MetricField, geodesic: &GeodesicResult) -> Result<f64> {
    let n = geodesic.dim();
    let mut worst: f64 = 0.0;
    for i in 0..geodesic.times.len() {
        let t = geodesic.times[i];
        let x = geodesic.position(i);
        let v = geodesic.velocity(i);
        let gamma = cone.christoffel(x)?;
        let mut f = v.iter().map(|c| -t * c).collect::<Vec<_>>();
        f[0] += x[0];
        let acc_term = gamma.contract(v, v);
        let conn = gamma.contract(v, &f);
        for a in 0..n {
            // d/dt F = ρ′ e_r − γ′ − tγ″ with γ″ = −Γ(γ′,γ′)
            let radial = if a == 0 { v[0] } else { 0.0 };
            let d = radial - v[a] + t * acc_term[a] + conn[a];
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}

/// A cone with a known parallel field and its potential.
#[derive(Debug, Clone)]
pub struct ParallelExample {
    pub cone: ConeSpec,
    pub field: VectorField,
    /// Potential on the base chart `(s, N…)`.
    pub potential: ScalarField,
    pub branch: SplitBranch,
}

/// `ε = −1` cone over `ds² + e^{−2s} g_N` with the null field `e^{−s}(∂r + (1/r)∂s)`.
pub fn horosphere_example(base_n: MetricField) -> Result<ParallelExample> {
    let m = base_n.dim() + 2;
    let warped = WarpedSpec::new(-1.0, Warp::custom("exp(-s)", |s| (-s).exp()), base_n, Interval::unbounded())?;
    let cone = ConeSpec::new(-1.0, build_warped(&warped)?)?;
    let field = VectorField::new(move |x| {
        let e = (-x[1]).exp();
        let mut v = vec![Jet::constant(0.0); m];
        v[0] = e;
        v[1] = e / x[0];
        v
    });
    let potential = ScalarField::new(|x| -(-x[0]).exp());
    Ok(ParallelExample {
        cone,
        field,
        potential,
        branch: SplitBranch::ExpMinus,
    })
}

/// `ε = −1` cone over `ds² + cosh²(s) g_N` with the unit spacelike field
/// `−sinh(s)∂r + (cosh(s)/r)∂s`.
pub fn cosh_example(base_n: MetricField) -> Result<ParallelExample> {
    let m = base_n.dim() + 2;
    let warped = WarpedSpec::new(-1.0, Warp::Cosh, base_n, Interval::unbounded())?;
    let cone = ConeSpec::new(-1.0, build_warped(&warped)?)?;
    let field = VectorField::new(move |x| {
        let mut v = vec![Jet::constant(0.0); m];
        v[0] = -x[1].sinh();
        v[1] = x[1].cosh() / x[0];
        v
    });
    let potential = ScalarField::new(|x| x[0].sinh());
    Ok(ParallelExample {
        cone,
        field,
        potential,
        branch: SplitBranch::Cosh,
    })
}
