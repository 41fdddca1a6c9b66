//! Base metrics `ds² + e^{−2s} g₀(u) + 2 du η` whose cones carry a parallel
//! totally null 2-plane, and residual checks for the `(V, Z)` frame system.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::metric_core::{bilinear, covariant_derivative, CoordinateChart, Interval, Jet, MetricField, VectorField};

pub type UnaryFn = Arc<dyn Fn(Jet) -> Jet + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

/// Largest supported `dim M₀` (the chart `(x, s, u, t)` must fit the jet width).
pub const MAX_BASE_DIM: usize = 3;
const GL_NODES: usize = 8;

/// Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Free data of the construction.
#[derive(Clone)]
pub struct NullPlaneInputs {
    pub x_names: Vec<String>,
    pub x_domain: Vec<Interval>,
    pub u_range: Interval,
    /// `f₁(u)`, nowhere zero.
    pub f1: UnaryFn,
    /// `f₂(x, s, u)`.
    pub f2: ScalarFn,
    /// `(∂_i f₂)(x, s, u)`.
    pub df2: VectorFn,
    /// `g₀(x, u)` row-major, `dim M₀ × dim M₀`.
    pub g0: VectorFn,
    /// Integration constants `h_i(x, 0, u)`.
    pub constants: Vec<f64>,
}

impl std::fmt::Debug for NullPlaneInputs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NullPlaneInputs")
            .field("x_names", &self.x_names)
            .field("u_range", &self.u_range)
            .field("constants", &self.constants)
            .finish()
    }
}

impl NullPlaneInputs {
    /// Inputs over `x ∈ ℝ^{n0}`, `u ∈ ℝ` with zero integration constants.
    pub fn new<F1, F2, D2, G0>(n0: usize, f1: F1, f2: F2, df2: D2, g0: G0) -> Self
    where
        F1: Fn(Jet) -> Jet + Send + Sync + 'static,
        F2: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
        D2: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
        G0: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        NullPlaneInputs {
            x_names: (1..=n0).map(|i| format!("x{i}")).collect(),
            x_domain: vec![Interval::unbounded(); n0],
            u_range: Interval::unbounded(),
            f1: Arc::new(f1),
            f2: Arc::new(f2),
            df2: Arc::new(df2),
            g0: Arc::new(g0),
            constants: vec![0.0; n0],
        }
    }

    pub fn n0(&self) -> usize {
        self.x_names.len()
    }
}

#[derive(Debug, Clone)]
pub struct NullPlaneMetricSpec {
    pub inputs: NullPlaneInputs,
    pub chart: CoordinateChart,
}

impl NullPlaneMetricSpec {
    pub fn n0(&self) -> usize {
        self.inputs.n0()
    }

    /// `h_i = e^{−2s} (C_i + ∫₀ˢ e^{2σ} ∂_i f₂(x, σ, u) dσ)` by composite Gauss–Legendre.
    pub fn transverse_coefficients(&self, y: &[Jet]) -> Vec<Jet> {
        h_values(&self.inputs, y)
    }

    /// `η` in chart order `(x…, s, u, t)`; `η_u = 0`.
    pub fn eta(&self, y: &[Jet]) -> Vec<Jet> {
        eta_values(&self.inputs, y)
    }

    /// Largest `|∂_s h_i + 2h_i − ∂_i f₂|` over the points.
    pub fn ode_residual(&self, points: &[Vec<f64>]) -> f64 {
        let n0 = self.n0();
        let mut worst: f64 = 0.0;
        for p in points {
            let y = Jet::seed(p, 1);
            let h = self.transverse_coefficients(&y);
            let df2 = (self.inputs.df2)(&y[..n0 + 2]);
            for i in 0..n0 {
                let r = h[i].d(n0) + 2.0 * h[i].value() - df2[i].value();
                worst = worst.max(r.abs());
            }
        }
        worst
    }
}

fn h_values(inputs: &NullPlaneInputs, y: &[Jet]) -> Vec<Jet> {
    let n0 = inputs.n0();
    let s = y[n0];
    let panels = (s.value().abs() * 4.0).ceil().max(1.0) as usize;
    let nodes = gauss_legendre(GL_NODES);
    let mut acc = vec![Jet::constant(0.0); n0];
    let mut args: Vec<Jet> = y[..n0 + 2].to_vec();
    for k in 0..panels {
        for &(tau, w) in &nodes {
            let frac = (k as f64 + tau) / panels as f64;
            let sigma = s * frac;
            args[n0] = sigma;
            let d = (inputs.df2)(&args);
            let weight = (sigma * 2.0).exp() * (w / panels as f64);
            for i in 0..n0 {
                acc[i] += weight * d[i];
            }
        }
    }
    let decay = (s * -2.0).exp();
    (0..n0)
        .map(|i| decay * (acc[i] * s + inputs.constants[i]))
        .collect()
}

fn eta_values(inputs: &NullPlaneInputs, y: &[Jet]) -> Vec<Jet> {
    let n0 = inputs.n0();
    let (u, t) = (y[n0 + 1], y[n0 + 2]);
    let f1 = (inputs.f1)(u);
    let f2 = (inputs.f2)(&y[..n0 + 2]);
    let mut eta = h_values(inputs, y);
    eta.push(t * f1 * 2.0 + f2);
    eta.push(Jet::constant(0.0));
    eta.push(f1);
    eta
}

/// `ds² + e^{−2s} g₀(x,u) + 2 du η` on the chart `(x…, s, u, t)`.
pub fn assemble_metric(chart: CoordinateChart, n0: usize, g0: VectorFn, eta: VectorFn) -> MetricField {
    let m = n0 + 3;
    let (is, iu) = (n0, n0 + 1);
    MetricField::new(chart, move |y| {
        let mut xu: Vec<Jet> = y[..n0].to_vec();
        xu.push(y[iu]);
        let g = g0(&xu);
        let e = eta(y);
        let decay = (y[is] * -2.0).exp();
        let mut out = vec![Jet::constant(0.0); m * m];
        for i in 0..n0 {
            for j in 0..n0 {
                out[i * m + j] = decay * g[i * n0 + j];
            }
        }
        out[is * m + is] = Jet::constant(1.0);
        for a in 0..m {
            let add = if a == iu { e[a] * 2.0 } else { e[a] };
            out[iu * m + a] += add;
            if a != iu {
                out[a * m + iu] += e[a];
            }
        }
        out
    })
}

fn scan_f1(f1: &UnaryFn, range: Interval) -> Result<()> {
    let (lo, hi) = range.sampling_window();
    let samples = 2001;
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..samples {
        let u = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
        let v = f1(Jet::constant(u)).value();
        if v == 0.0 || !v.is_finite() {
            return Err(GeomError::F1HasZero { u });
        }
        if let Some((pu, pv)) = prev {
            if pv.signum() != v.signum() {
                return Err(GeomError::F1HasZero { u: 0.5 * (pu + u) });
            }
        }
        prev = Some((u, v));
    }
    Ok(())
}

/// Builds the metric from `f₁`, `f₂`, `g₀`; `η_t = f₁`, `η_s = 2t f₁ + f₂`, `η(∂_i) = h_i`.
pub fn generate_nullplane_metric(inputs: NullPlaneInputs) -> Result<(MetricField, NullPlaneMetricSpec)> {
    let n0 = inputs.n0();
    if n0 == 0 || n0 > MAX_BASE_DIM {
        return Err(GeomError::DimensionTooLarge {
            dim: n0 + 3,
            max: MAX_BASE_DIM + 3,
        });
    }
    if inputs.x_domain.len() != n0 || inputs.constants.len() != n0 {
        return Err(GeomError::DimensionMismatch {
            expected: n0,
            got: inputs.x_domain.len().min(inputs.constants.len()),
        });
    }
    scan_f1(&inputs.f1, inputs.u_range)?;
    let mut names = inputs.x_names.clone();
    names.extend(["s".to_string(), "u".to_string(), "t".to_string()]);
    let mut domain = inputs.x_domain.clone();
    domain.extend([Interval::unbounded(), inputs.u_range, Interval::unbounded()]);
    let chart = CoordinateChart::new(names, domain)?;
    let spec = NullPlaneMetricSpec {
        inputs: inputs.clone(),
        chart: chart.clone(),
    };
    let eta_inputs = inputs.clone();
    let eta: VectorFn = Arc::new(move |y: &[Jet]| eta_values(&eta_inputs, y));
    let field = assemble_metric(chart, n0, inputs.g0.clone(), eta);
    Ok((field, spec))
}

/// Grid over `(x₁, s, u)` with `per_axis` points each (other `x` at the window
/// centre) and `t ∈ {−1, 0.5, 2}`.
pub fn grid_points(spec: &NullPlaneMetricSpec, per_axis: usize) -> Vec<Vec<f64>> {
    let n0 = spec.n0();
    let dom = spec.chart.domain();
    let lin = |iv: &Interval, k: usize| {
        let (lo, hi) = iv.sampling_window();
        if per_axis == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (per_axis - 1) as f64
        }
    };
    let mut out = Vec::new();
    for a in 0..per_axis {
        for b in 0..per_axis {
            for c in 0..per_axis {
                for t in [-1.0, 0.5, 2.0] {
                    let mut p: Vec<f64> = (0..n0)
                        .map(|i| {
                            let (lo, hi) = dom[i].sampling_window();
                            0.5 * (lo + hi)
                        })
                        .collect();
                    p[0] = lin(&dom[0], a);
                    p.push(lin(&dom[n0], b));
                    p.push(lin(&dom[n0 + 1], c));
                    p.push(t);
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Residuals of the six first-order equations for `η`, by central differences:
/// `∂_t η_t`, `∂_s η_t`, `∂_i η_t`, `∂_t η_i`, `∂_t η_s − 2η_t`, `∂_s η_i − ∂_i η_s + 2η_i`.
pub fn eta_system_residuals_for(eta: &dyn Fn(&[Jet]) -> Vec<Jet>, n0: usize, points: &[Vec<f64>]) -> [f64; 6] {
    let (is, it) = (n0, n0 + 2);
    let h = 1e-5;
    let val = |p: &[f64]| -> Vec<f64> { eta(&Jet::constants(p)).iter().map(Jet::value).collect() };
    let diff = |p: &[f64], k: usize| -> Vec<f64> {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[k] += h;
        b[k] -= h;
        val(&a).iter().zip(val(&b)).map(|(x, y)| (x - y) / (2.0 * h)).collect()
    };
    let mut out = [0.0f64; 6];
    for p in points {
        let e = val(p);
        let dt = diff(p, it);
        let ds = diff(p, is);
        out[0] = out[0].max(dt[it].abs());
        out[1] = out[1].max(ds[it].abs());
        for i in 0..n0 {
            let di = diff(p, i);
            out[2] = out[2].max(di[it].abs());
            out[3] = out[3].max(dt[i].abs());
            out[5] = out[5].max((ds[i] - di[is] + 2.0 * e[i]).abs());
        }
        out[4] = out[4].max((dt[is] - 2.0 * e[it]).abs());
    }
    out
}

pub fn eta_system_residuals(spec: &NullPlaneMetricSpec, points: &[Vec<f64>]) -> [f64; 6] {
    eta_system_residuals_for(&|y| spec.eta(y), spec.n0(), points)
}

#[derive(Debug, Clone)]
pub struct VZReport {
    /// `|g(V,V)|, |g(Z,Z) − 1|, |g(V,Z)|` maxima.
    pub frame_residual: f64,
    /// `∇_X V − g(X,V) Z` modulo `V`.
    pub v_residual: f64,
    /// `∇_X Z + X − g(X,Z) Z` modulo `V`.
    pub z_residual: f64,
    /// Recovered `α(∂_k)` per sample.
    pub alpha: Vec<Vec<f64>>,
    /// Recovered `β(∂_k)` per sample.
    pub beta: Vec<Vec<f64>>,
}

impl VZReport {
    pub fn max(&self) -> f64 {
        self.v_residual.max(self.z_residual)
    }
}

/// Splits `w = c·v + rest` with `rest` Euclidean-orthogonal to `v`.
fn modulo(w: &DVector<f64>, v: &DVector<f64>) -> (f64, f64) {
    let c = w.dot(v) / v.dot(v);
    (c, (w - v * c).amax())
}

pub fn vz_residuals(field: &MetricField, v: &VectorField, z: &VectorField, samples: &[Vec<f64>]) -> Result<VZReport> {
    let n = field.dim();
    let mut rep = VZReport {
        frame_residual: 0.0,
        v_residual: 0.0,
        z_residual: 0.0,
        alpha: Vec::new(),
        beta: Vec::new(),
    };
    for p in samples {
        let g = field.eval(p)?;
        let (vv, zz) = (v.eval(p), z.eval(p));
        let frame = bilinear(&g, &vv, &vv)
            .abs()
            .max((bilinear(&g, &zz, &zz) - 1.0).abs())
            .max(bilinear(&g, &vv, &zz).abs());
        if frame > 1e-8 {
            return Err(GeomError::PairNotAdmissible { residual: frame });
        }
        rep.frame_residual = rep.frame_residual.max(frame);
        let nv = covariant_derivative(field, v, p)?;
        let nz = covariant_derivative(field, z, p)?;
        let vvec = DVector::from_column_slice(&vv);
        let zvec = DVector::from_column_slice(&zz);
        let gv = &g * &vvec;
        let gz = &g * &zvec;
        let (mut alpha, mut beta) = (Vec::with_capacity(n), Vec::with_capacity(n));
        for k in 0..n {
            let mut ek = DVector::zeros(n);
            ek[k] = 1.0;
            let w = nv.column(k).into_owned() - &zvec * gv[k];
            let (a, r) = modulo(&w, &vvec);
            alpha.push(a);
            rep.v_residual = rep.v_residual.max(r);
            let w = nz.column(k).into_owned() + ek - &zvec * gz[k];
            let (b, r) = modulo(&w, &vvec);
            beta.push(b);
            rep.z_residual = rep.z_residual.max(r);
        }
        rep.alpha.push(alpha);
        rep.beta.push(beta);
    }
    Ok(rep)
}

/// Largest `|dθ(X, Y)|` for `θ = g(V, ·)` and `X, Y` in an orthonormal basis of
/// `ker θ = V^⊥`; this is the `V`-dual part of `[X, Y]` for frame fields of `V^⊥`.
pub fn integrability_residual(field: &MetricField, v: &VectorField, samples: &[Vec<f64>]) -> Result<f64> {
    let n = field.dim();
    let mut worst: f64 = 0.0;
    for p in samples {
        let y = Jet::seed(p, 1);
        let g = field.eval_jets(&y);
        let vj = v.eval_jets(&y);
        let theta: Vec<Jet> = (0..n)
            .map(|a| (0..n).map(|b| g[a * n + b] * vj[b]).sum())
            .collect();
        let dtheta = DMatrix::from_fn(n, n, |a, b| theta[b].d(a) - theta[a].d(b));
        let col = DVector::from_fn(n, |a, _| theta[a].value());
        let eig = (&col * col.transpose()).symmetric_eigen();
        // all eigenvectors except the one along θ span ker θ
        let top = eig.eigenvalues.imax();
        let kernel: Vec<DVector<f64>> = (0..n)
            .filter(|&i| i != top)
            .map(|i| eig.eigenvectors.column(i).into_owned())
            .collect();
        for a in 0..kernel.len() {
            for b in 0..kernel.len() {
                let val = (kernel[a].transpose() * &dtheta * &kernel[b])[(0, 0)];
                worst = worst.max(val.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let q = gauss_legendre(8);
        let integral: f64 = q.iter().map(|(x, w)| w * x.powi(9)).sum();
        assert!((integral - 0.1).abs() < 1e-15);
        let total: f64 = q.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }
}
