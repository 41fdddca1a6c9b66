use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};
use crate::metric_core::chart::CoordinateChart;
use crate::metric_core::jet::Jet;

/// Row-major metric components as functions of the chart coordinates.
pub type MetricFn = Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const DEGENERACY_TOL: f64 = 1e-10;
/// Relative central-difference step for first derivatives.
pub const FD_STEP: f64 = 1e-5;
/// Relative step for second derivatives; a larger step keeps cancellation error near 1e-8.
pub const FD_STEP_SECOND: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    Exact,
    FiniteDifference,
}

#[derive(Clone)]
pub struct MetricField {
    chart: CoordinateChart,
    func: MetricFn,
    mode: DerivativeMode,
    signature_hint: Option<(usize, usize)>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("chart", &self.chart)
            .field("mode", &self.mode)
            .field("signature_hint", &self.signature_hint)
            .finish()
    }
}

/// Metric value and coordinate derivatives at a point.
#[derive(Debug, Clone)]
pub struct MetricDerivs {
    pub g: DMatrix<f64>,
    /// `dg[k] = ∂_k g`
    pub dg: Vec<DMatrix<f64>>,
    /// `ddg[k][l] = ∂_k ∂_l g`, present when second derivatives were requested.
    pub ddg: Option<Vec<Vec<DMatrix<f64>>>>,
}

impl MetricField {
    pub fn new<F>(chart: CoordinateChart, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        MetricField {
            chart,
            func: Arc::new(f),
            mode: DerivativeMode::Exact,
            signature_hint: None,
        }
    }

    pub fn from_arc(chart: CoordinateChart, func: MetricFn) -> Self {
        MetricField {
            chart,
            func,
            mode: DerivativeMode::Exact,
            signature_hint: None,
        }
    }

    /// Diagonal metric from per-entry component functions.
    pub fn diagonal<F>(chart: CoordinateChart, f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        MetricField::new(chart, move |x| {
            let d = f(x);
            let n = d.len();
            let mut m = vec![Jet::constant(0.0); n * n];
            for (i, v) in d.into_iter().enumerate() {
                m[i * n + i] = v;
            }
            m
        })
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_signature_hint(mut self, neg: usize, pos: usize) -> Self {
        self.signature_hint = Some((neg, pos));
        self
    }

    pub fn chart(&self) -> &CoordinateChart {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn signature_hint(&self) -> Option<(usize, usize)> {
        self.signature_hint
    }

    pub fn func(&self) -> &MetricFn {
        &self.func
    }

    /// Raw evaluation on jets; no domain or validity checks.
    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.func)(x)
    }

    fn raw_values(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let vals = (self.func)(&Jet::constants(p));
        DMatrix::from_fn(n, n, |i, j| vals[i * n + j].value())
    }

    /// Metric matrix at `p`, validated for symmetry and non-degeneracy.
    pub fn eval(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        self.chart.check(p)?;
        let g = self.raw_values(p);
        validate(&g, p)?;
        Ok(g)
    }

    pub fn inner(&self, p: &[f64], u: &[f64], w: &[f64]) -> Result<f64> {
        let g = self.eval(p)?;
        Ok(bilinear(&g, u, w))
    }

    /// `(negative count, positive count)` of eigenvalues at `p`.
    pub fn signature(&self, p: &[f64]) -> Result<(usize, usize)> {
        let g = self.eval(p)?;
        Ok(signature_of(&g))
    }

    pub fn derivs(&self, p: &[f64], order: u8) -> Result<MetricDerivs> {
        self.chart.check(p)?;
        match self.mode {
            DerivativeMode::Exact => self.derivs_exact(p, order),
            DerivativeMode::FiniteDifference => self.derivs_fd(p, order),
        }
    }

    fn derivs_exact(&self, p: &[f64], order: u8) -> Result<MetricDerivs> {
        let n = self.dim();
        let vals = (self.func)(&Jet::seed(p, order.max(1)));
        let g = DMatrix::from_fn(n, n, |i, j| vals[i * n + j].value());
        validate(&g, p)?;
        let dg = (0..n)
            .map(|k| DMatrix::from_fn(n, n, |i, j| vals[i * n + j].d(k)))
            .collect();
        let ddg = (order >= 2).then(|| {
            (0..n)
                .map(|k| {
                    (0..n)
                        .map(|l| DMatrix::from_fn(n, n, |i, j| vals[i * n + j].dd(k, l)))
                        .collect()
                })
                .collect()
        });
        Ok(MetricDerivs { g, dg, ddg })
    }

    fn shifted(&self, p: &[f64], moves: &[(usize, f64)]) -> Result<DMatrix<f64>> {
        let mut q = p.to_vec();
        for &(k, h) in moves {
            q[k] += h;
        }
        if !self.chart.contains(&q) {
            return Err(GeomError::DerivativeFailure { coords: p.to_vec() });
        }
        Ok(self.raw_values(&q))
    }

    fn derivs_fd(&self, p: &[f64], order: u8) -> Result<MetricDerivs> {
        let n = self.dim();
        let g = self.raw_values(p);
        validate(&g, p)?;
        let step = |k: usize, rel: f64| rel * p[k].abs().max(1.0);
        let mut dg = Vec::with_capacity(n);
        for k in 0..n {
            let h = step(k, FD_STEP);
            let plus = self.shifted(p, &[(k, h)])?;
            let minus = self.shifted(p, &[(k, -h)])?;
            dg.push((plus - minus) / (2.0 * h));
        }
        let ddg = if order >= 2 {
            let mut out = vec![vec![DMatrix::zeros(n, n); n]; n];
            for k in 0..n {
                let hk = step(k, FD_STEP_SECOND);
                let plus = self.shifted(p, &[(k, hk)])?;
                let minus = self.shifted(p, &[(k, -hk)])?;
                out[k][k] = (plus - 2.0 * &g + minus) / (hk * hk);
                for l in 0..k {
                    let hl = step(l, FD_STEP_SECOND);
                    let pp = self.shifted(p, &[(k, hk), (l, hl)])?;
                    let pm = self.shifted(p, &[(k, hk), (l, -hl)])?;
                    let mp = self.shifted(p, &[(k, -hk), (l, hl)])?;
                    let mm = self.shifted(p, &[(k, -hk), (l, -hl)])?;
                    let m = (pp - pm - mp + mm) / (4.0 * hk * hl);
                    out[l][k] = m.clone();
                    out[k][l] = m;
                }
            }
            Some(out)
        } else {
            None
        };
        Ok(MetricDerivs { g, dg, ddg })
    }

    pub fn christoffel(&self, p: &[f64]) -> Result<Christoffel> {
        let d = self.derivs(p, 1)?;
        Ok(Christoffel::from_derivs(&d, p)?.0)
    }

    pub fn riemann(&self, p: &[f64]) -> Result<Curvature> {
        let d = self.derivs(p, 2)?;
        Curvature::from_derivs(&d, p)
    }
}

pub const CONSTANT_CURVATURE_TOL: f64 = 1e-5;
pub const MIN_CURVATURE_SAMPLES: usize = 10;

/// Common sectional curvature of `field` at `samples`, or `None` when the
/// constant-curvature model misses by more than 1e-5 anywhere.
pub fn constant_curvature_estimate(field: &MetricField, samples: &[Vec<f64>]) -> Result<Option<f64>> {
    if samples.len() < MIN_CURVATURE_SAMPLES {
        return Err(GeomError::InvalidInput(format!(
            "need at least {MIN_CURVATURE_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let curvatures = samples.iter().map(|p| field.riemann(p)).collect::<Result<Vec<_>>>()?;
    // one-dimensional metrics are flat and carry no sectional curvature
    let kappas: Vec<f64> = curvatures.iter().map(|c| c.best_constant_curvature().unwrap_or(0.0)).collect();
    let kappa = kappas.iter().sum::<f64>() / kappas.len() as f64;
    let fits = curvatures
        .iter()
        .all(|c| c.constant_curvature_residual(kappa) < CONSTANT_CURVATURE_TOL);
    Ok(fits.then_some(kappa))
}

pub fn bilinear(g: &DMatrix<f64>, u: &[f64], w: &[f64]) -> f64 {
    let n = g.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += u[i] * g[(i, j)] * w[j];
        }
    }
    s
}

pub fn signature_of(g: &DMatrix<f64>) -> (usize, usize) {
    let eig = g.clone().symmetric_eigen();
    let neg = eig.eigenvalues.iter().filter(|&&v| v < 0.0).count();
    (neg, g.nrows() - neg)
}

fn validate(g: &DMatrix<f64>, p: &[f64]) -> Result<()> {
    let n = g.nrows();
    let mut asym: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            let scale = g[(i, j)].abs().max(g[(j, i)].abs()).max(1.0);
            asym = asym.max((g[(i, j)] - g[(j, i)]).abs() / scale);
        }
    }
    if asym > SYMMETRY_TOL || g.iter().any(|v| !v.is_finite()) {
        return Err(GeomError::AsymmetricMetric {
            coords: p.to_vec(),
            asymmetry: asym,
        });
    }
    let det = g.determinant();
    if !(det.abs() > DEGENERACY_TOL) {
        return Err(GeomError::DegenerateMetric {
            coords: p.to_vec(),
            det,
        });
    }
    Ok(())
}

/// Christoffel symbols `Γ^k_{ij}` stored as `data[k*n*n + i*n + j]`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    pub n: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    /// Returns the symbols together with the inverse metric.
    pub fn from_derivs(d: &MetricDerivs, p: &[f64]) -> Result<(Christoffel, DMatrix<f64>)> {
        let n = d.g.nrows();
        let ginv = d
            .g
            .clone()
            .try_inverse()
            .ok_or_else(|| GeomError::DegenerateMetric {
                coords: p.to_vec(),
                det: 0.0,
            })?;
        let mut lowered = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    lowered[l * n * n + i * n + j] =
                        0.5 * (d.dg[i][(j, l)] + d.dg[j][(i, l)] - d.dg[l][(i, j)]);
                }
            }
        }
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * lowered[l * n * n + i * n + j];
                    }
                    data[k * n * n + i * n + j] = s;
                }
            }
        }
        Ok((Christoffel { n, data }, ginv))
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[k * self.n * self.n + i * self.n + j]
    }

    /// Vector with components `Γ^k(u, w) = Γ^k_{ij} u^i w^j`.
    pub fn contract(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    if u[i] == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        s += self.get(k, i, j) * u[i] * w[j];
                    }
                }
                s
            })
            .collect()
    }

    /// Matrix of `w ↦ Γ(u, w)`.
    pub fn matrix(&self, u: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |k, j| (0..n).map(|i| self.get(k, i, j) * u[i]).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Riemann tensor at a point. `up[l,i,j,k]` is component `l` of `R(∂_i,∂_j)∂_k`.
#[derive(Debug, Clone)]
pub struct Curvature {
    pub n: usize,
    pub g: DMatrix<f64>,
    pub up: Vec<f64>,
    pub lowered: Vec<f64>,
}

impl Curvature {
    pub fn from_derivs(d: &MetricDerivs, p: &[f64]) -> Result<Curvature> {
        let n = d.g.nrows();
        let (gamma, ginv) = Christoffel::from_derivs(d, p)?;
        let ddg = d
            .ddg
            .as_ref()
            .ok_or_else(|| GeomError::InvalidInput("second derivatives required".into()))?;
        let n2 = n * n;
        // dginv[m] = -g^{-1} (∂_m g) g^{-1}
        let dginv: Vec<DMatrix<f64>> = (0..n).map(|m| -(&ginv * &d.dg[m] * &ginv)).collect();
        // dgamma[m][k,i,j] = ∂_m Γ^k_ij
        let mut dgamma = vec![0.0; n * n * n2];
        for m in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s_low = vec![0.0; n];
                    let mut ds_low = vec![0.0; n];
                    for l in 0..n {
                        s_low[l] = 0.5 * (d.dg[i][(j, l)] + d.dg[j][(i, l)] - d.dg[l][(i, j)]);
                        ds_low[l] = 0.5
                            * (ddg[m][i][(j, l)] + ddg[m][j][(i, l)] - ddg[m][l][(i, j)]);
                    }
                    for k in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += dginv[m][(k, l)] * s_low[l] + ginv[(k, l)] * ds_low[l];
                        }
                        dgamma[m * n * n2 + k * n2 + i * n + j] = s;
                    }
                }
            }
        }
        let dgam = |m: usize, k: usize, i: usize, j: usize| dgamma[m * n * n2 + k * n2 + i * n + j];
        let mut up = vec![0.0; n2 * n2];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut s = dgam(i, l, j, k) - dgam(j, l, i, k);
                        for m in 0..n {
                            s += gamma.get(l, i, m) * gamma.get(m, j, k)
                                - gamma.get(l, j, m) * gamma.get(m, i, k);
                        }
                        up[l * n * n2 + i * n2 + j * n + k] = s;
                    }
                }
            }
        }
        let mut lowered = vec![0.0; n2 * n2];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for q in 0..n {
                        let mut s = 0.0;
                        for l in 0..n {
                            s += up[l * n * n2 + i * n2 + j * n + k] * d.g[(l, q)];
                        }
                        lowered[i * n * n2 + j * n2 + k * n + q] = s;
                    }
                }
            }
        }
        Ok(Curvature {
            n,
            g: d.g.clone(),
            up,
            lowered,
        })
    }

    #[inline]
    pub fn up(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        let n = self.n;
        self.up[l * n * n * n + i * n * n + j * n + k]
    }

    /// `R(∂_i,∂_j,∂_k,∂_l) = g(R(∂_i,∂_j)∂_k, ∂_l)`.
    #[inline]
    pub fn low(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.n;
        self.lowered[i * n * n * n + j * n * n + k * n + l]
    }

    /// `R(X,Y)Z` as a vector.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let m = self.endomorphism(x, y);
        let n = self.n;
        (0..n).map(|l| (0..n).map(|k| m[(l, k)] * z[k]).sum()).collect()
    }

    /// Matrix of `Z ↦ R(X,Y)Z`.
    pub fn endomorphism(&self, x: &[f64], y: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let c = x[i] * y[j];
                if c == 0.0 {
                    continue;
                }
                for l in 0..n {
                    for k in 0..n {
                        m[(l, k)] += c * self.up(l, i, j, k);
                    }
                }
            }
        }
        m
    }

    /// `R(X,Y,Z,U) = g(R(X,Y)Z, U)`.
    pub fn eval4(&self, x: &[f64], y: &[f64], z: &[f64], u: &[f64]) -> f64 {
        let r = self.apply(x, y, z);
        bilinear(&self.g, &r, u)
    }

    /// Sectional curvature of the plane spanned by `x`, `y`; `None` for degenerate planes.
    pub fn sectional(&self, x: &[f64], y: &[f64]) -> Option<f64> {
        let gxx = bilinear(&self.g, x, x);
        let gyy = bilinear(&self.g, y, y);
        let gxy = bilinear(&self.g, x, y);
        let q = gxx * gyy - gxy * gxy;
        if q.abs() < 1e-14 {
            return None;
        }
        Some(self.eval4(x, y, y, x) / q)
    }

    pub fn max_abs(&self) -> f64 {
        self.up.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest violation of the pair symmetries and the first Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.low(i, j, k, l);
                        worst = worst
                            .max((r + self.low(j, i, k, l)).abs())
                            .max((r + self.low(i, j, l, k)).abs())
                            .max((r - self.low(k, l, i, j)).abs());
                        let bianchi = self.up(l, i, j, k) + self.up(l, j, k, i) + self.up(l, k, i, j);
                        worst = worst.max(bianchi.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest deviation from `κ (g(X,U)g(Y,Z) - g(X,Z)g(Y,U))` over coordinate vectors.
    pub fn constant_curvature_residual(&self, kappa: f64) -> f64 {
        let n = self.n;
        let g = &self.g;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let model = kappa * (g[(i, l)] * g[(j, k)] - g[(i, k)] * g[(j, l)]);
                        worst = worst.max((self.low(i, j, k, l) - model).abs());
                    }
                }
            }
        }
        worst
    }

    /// Least-squares `κ` for the constant-curvature model at this point.
    pub fn best_constant_curvature(&self) -> Option<f64> {
        let n = self.n;
        let g = &self.g;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let m = g[(i, l)] * g[(j, k)] - g[(i, k)] * g[(j, l)];
                        num += m * self.low(i, j, k, l);
                        den += m * m;
                    }
                }
            }
        }
        (den > 0.0).then(|| num / den)
    }
}
