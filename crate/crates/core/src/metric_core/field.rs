use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::Result;
use crate::metric_core::jet::Jet;
use crate::metric_core::metric::{Christoffel, MetricField};

/// Vector field given by its chart components.
#[derive(Clone)]
pub struct VectorField {
    func: Arc<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VectorField")
    }
}

impl VectorField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    {
        VectorField { func: Arc::new(f) }
    }

    /// Coordinate vector field `∂_index`.
    pub fn coordinate(index: usize, dim: usize) -> Self {
        VectorField::new(move |_| {
            let mut v = vec![Jet::constant(0.0); dim];
            v[index] = Jet::constant(1.0);
            v
        })
    }

    pub fn eval_jets(&self, x: &[Jet]) -> Vec<Jet> {
        (self.func)(x)
    }

    pub fn eval(&self, p: &[f64]) -> Vec<f64> {
        (self.func)(&Jet::constants(p)).iter().map(Jet::value).collect()
    }

    /// Jacobian `J[(i, k)] = ∂_k V^i`.
    pub fn jacobian(&self, p: &[f64]) -> DMatrix<f64> {
        let v = (self.func)(&Jet::seed(p, 1));
        let n = p.len();
        DMatrix::from_fn(v.len(), n, |i, k| v[i].d(k))
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        let f = self.func.clone();
        VectorField::new(move |x| f(x).into_iter().map(|v| v * c).collect())
    }

    pub fn plus(&self, other: &VectorField) -> VectorField {
        let (f, g) = (self.func.clone(), other.func.clone());
        VectorField::new(move |x| f(x).into_iter().zip(g(x)).map(|(a, b)| a + b).collect())
    }
}

/// Scalar function on a chart.
#[derive(Clone)]
pub struct ScalarField {
    func: Arc<dyn Fn(&[Jet]) -> Jet + Send + Sync>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ScalarField")
    }
}

impl ScalarField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&[Jet]) -> Jet + Send + Sync + 'static,
    {
        ScalarField { func: Arc::new(f) }
    }

    pub fn eval_jets(&self, x: &[Jet]) -> Jet {
        (self.func)(x)
    }

    pub fn eval(&self, p: &[f64]) -> f64 {
        (self.func)(&Jet::constants(p)).value()
    }

    /// Coordinate differential `(∂_k u)_k`.
    pub fn differential(&self, p: &[f64]) -> Vec<f64> {
        let u = (self.func)(&Jet::seed(p, 1));
        (0..p.len()).map(|k| u.d(k)).collect()
    }

    /// Coordinate Hessian `∂_k ∂_l u`.
    pub fn hessian(&self, p: &[f64]) -> DMatrix<f64> {
        let n = p.len();
        let u = (self.func)(&Jet::seed(p, 2));
        DMatrix::from_fn(n, n, |k, l| u.dd(k, l))
    }

    /// Metric gradient `g^{-1} du` as a vector field (exact in the jets).
    pub fn gradient_field(&self, metric: &MetricField) -> VectorField {
        let u = self.func.clone();
        let m = metric.func().clone();
        let n = metric.dim();
        VectorField::new(move |x| gradient_jets(&*m, &*u, x, n))
    }
}

/// `g^{-1} du` evaluated with jets. Derivative order of the output is one less
/// than that of the inputs.
pub fn gradient_jets(
    metric: &dyn Fn(&[Jet]) -> Vec<Jet>,
    u: &dyn Fn(&[Jet]) -> Jet,
    x: &[Jet],
    n: usize,
) -> Vec<Jet> {
    let order = x.first().map(|j| j.order()).unwrap_or(0);
    // lift the coordinates one order so that du keeps the requested order
    let values: Vec<f64> = x.iter().map(Jet::value).collect();
    let lifted = Jet::seed(&values, (order + 1).min(2));
    let uj = u(&lifted);
    let du: Vec<Jet> = (0..n).map(|k| compose(&uj.partial(k), x, order)).collect();
    let g = metric(x);
    crate::metric_core::jet::solve(&g, &du, n).unwrap_or_else(|| vec![Jet::constant(f64::NAN); n])
}

/// Re-expresses a first-order jet in the input jets `x` (chain rule), used when
/// the input coordinates are themselves jets of other variables.
fn compose(j: &Jet, x: &[Jet], order: u8) -> Jet {
    if order == 0 {
        return Jet::constant(j.value());
    }
    let mut out = Jet::constant(j.value());
    for (k, xk) in x.iter().enumerate() {
        let c = j.d(k);
        if c != 0.0 {
            out += (*xk - xk.value()) * c;
        }
    }
    out.truncate(1)
}

/// `∇V` at `p` as the matrix `M[(i, k)] = (∇_{∂_k} V)^i`.
pub fn covariant_derivative(metric: &MetricField, v: &VectorField, p: &[f64]) -> Result<DMatrix<f64>> {
    let gamma = metric.christoffel(p)?;
    Ok(covariant_derivative_with(&gamma, v, p))
}

pub fn covariant_derivative_with(gamma: &Christoffel, v: &VectorField, p: &[f64]) -> DMatrix<f64> {
    let n = p.len();
    let jac = v.jacobian(p);
    let val = v.eval(p);
    DMatrix::from_fn(n, n, |i, k| {
        jac[(i, k)] + (0..n).map(|j| gamma.get(i, k, j) * val[j]).sum::<f64>()
    })
}
