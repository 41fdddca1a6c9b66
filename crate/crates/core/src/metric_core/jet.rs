//! Truncated Taylor jets for exact forward-mode differentiation.
//!
//! A [`Jet`] carries a value together with its gradient and (optionally) its
//! Hessian with respect to up to [`MAX_VARS`] independent variables. Jets with
//! `nvars == 0` are plain real numbers, so one evaluation path serves value,
//! first-derivative and second-derivative requests.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Largest number of independent variables a jet can track.
pub const MAX_VARS: usize = 6;
const HESS_LEN: usize = MAX_VARS * (MAX_VARS + 1) / 2;

#[inline]
fn tri(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    b * (b + 1) / 2 + a
}

#[derive(Clone, Copy)]
pub struct Jet {
    value: f64,
    nvars: u8,
    order: u8,
    grad: [f64; MAX_VARS],
    hess: [f64; HESS_LEN],
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.nvars as usize;
        f.debug_struct("Jet")
            .field("value", &self.value)
            .field("grad", &&self.grad[..n])
            .field("order", &self.order)
            .finish()
    }
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Jet {
    pub const fn constant(value: f64) -> Self {
        Jet {
            value,
            nvars: 0,
            order: 0,
            grad: [0.0; MAX_VARS],
            hess: [0.0; HESS_LEN],
        }
    }

    /// The `index`-th independent variable out of `nvars`, tracked to `order` (1 or 2).
    pub fn variable(value: f64, index: usize, nvars: usize, order: u8) -> Self {
        assert!(nvars <= MAX_VARS && index < nvars);
        let mut j = Jet::constant(value);
        j.nvars = nvars as u8;
        j.order = order.clamp(1, 2);
        j.grad[index] = 1.0;
        j
    }

    /// Seeds every coordinate of `x` as an independent variable.
    pub fn seed(x: &[f64], order: u8) -> Vec<Jet> {
        let n = x.len();
        x.iter()
            .enumerate()
            .map(|(i, &v)| Jet::variable(v, i, n, order))
            .collect()
    }

    pub fn constants(x: &[f64]) -> Vec<Jet> {
        x.iter().map(|&v| Jet::constant(v)).collect()
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn nvars(&self) -> usize {
        self.nvars as usize
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// First partial derivative; zero for variables the jet does not track.
    #[inline]
    pub fn d(&self, i: usize) -> f64 {
        if i < MAX_VARS {
            self.grad[i]
        } else {
            0.0
        }
    }

    /// Second partial derivative (requires an order-2 jet for a meaningful value).
    #[inline]
    pub fn dd(&self, i: usize, j: usize) -> f64 {
        if i < MAX_VARS && j < MAX_VARS {
            self.hess[tri(i, j)]
        } else {
            0.0
        }
    }

    pub fn gradient(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.d(i)).collect()
    }

    /// The jet of `∂_i self`, one order lower.
    pub fn partial(&self, i: usize) -> Jet {
        let n = self.nvars as usize;
        let mut out = Jet::constant(self.d(i));
        if self.order >= 2 {
            out.nvars = self.nvars;
            out.order = 1;
            for k in 0..n {
                out.grad[k] = self.hess[tri(i, k)];
            }
        }
        out
    }

    #[inline]
    fn merge_shape(a: &Jet, b: &Jet) -> (u8, u8) {
        (a.nvars.max(b.nvars), a.order.max(b.order))
    }

    /// Chain rule for a scalar function with derivatives `d1`, `d2` at `self.value`.
    #[inline]
    fn chain(&self, value: f64, d1: f64, d2: f64) -> Jet {
        let n = self.nvars as usize;
        let mut out = Jet::constant(value);
        out.nvars = self.nvars;
        out.order = self.order;
        for i in 0..n {
            out.grad[i] = d1 * self.grad[i];
        }
        if self.order >= 2 {
            for j in 0..n {
                for i in 0..=j {
                    let k = tri(i, j);
                    out.hess[k] = d1 * self.hess[k] + d2 * self.grad[i] * self.grad[j];
                }
            }
        }
        out
    }

    pub fn sin(self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Jet {
        let t = self.value.tan();
        let d1 = 1.0 + t * t;
        self.chain(t, d1, 2.0 * t * d1)
    }

    pub fn sinh(self) -> Jet {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Jet {
        let (s, c) = (self.value.sinh(), self.value.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Jet {
        let t = self.value.tanh();
        let d1 = 1.0 - t * t;
        self.chain(t, d1, -2.0 * t * d1)
    }

    pub fn exp(self) -> Jet {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Jet {
        let x = self.value;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn sqrt(self) -> Jet {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * s * s))
    }

    pub fn atan(self) -> Jet {
        let x = self.value;
        let q = 1.0 / (1.0 + x * x);
        self.chain(x.atan(), q, -2.0 * x * q * q)
    }

    pub fn atanh(self) -> Jet {
        let x = self.value;
        let q = 1.0 / (1.0 - x * x);
        self.chain(x.atanh(), q, 2.0 * x * q * q)
    }

    pub fn asinh(self) -> Jet {
        let x = self.value;
        let q = 1.0 / (1.0 + x * x).sqrt();
        self.chain(x.asinh(), q, -x * q * q * q)
    }

    pub fn abs(self) -> Jet {
        if self.value < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn powi(self, k: i32) -> Jet {
        let x = self.value;
        match k {
            0 => Jet::constant(1.0),
            1 => self,
            _ => {
                let kf = k as f64;
                self.chain(x.powi(k), kf * x.powi(k - 1), kf * (kf - 1.0) * x.powi(k - 2))
            }
        }
    }

    pub fn powf(self, p: f64) -> Jet {
        let x = self.value;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    /// `self^e` for a jet exponent, via `exp(e ln self)`.
    pub fn pow(self, e: Jet) -> Jet {
        if e.nvars == 0 {
            let p = e.value;
            if p.fract() == 0.0 && p.abs() <= 64.0 {
                return self.powi(p as i32);
            }
            return self.powf(p);
        }
        (e * self.ln()).exp()
    }

    pub fn recip(self) -> Jet {
        let x = self.value;
        self.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    /// Drops derivative information above `order`.
    pub fn truncate(mut self, order: u8) -> Jet {
        if order == 0 {
            return Jet::constant(self.value);
        }
        if order < self.order {
            self.order = order;
            self.hess = [0.0; HESS_LEN];
        }
        self
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, b: Jet) -> Jet {
        let (nv, ord) = Jet::merge_shape(&self, &b);
        let n = nv as usize;
        let mut out = self;
        out.nvars = nv;
        out.order = ord;
        out.value += b.value;
        for i in 0..n {
            out.grad[i] += b.grad[i];
        }
        if ord >= 2 {
            for k in 0..n * (n + 1) / 2 {
                out.hess[k] += b.hess[k];
            }
        }
        out
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, b: Jet) -> Jet {
        self + (-b)
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        let n = self.nvars as usize;
        let mut out = self;
        out.value = -out.value;
        for i in 0..n {
            out.grad[i] = -out.grad[i];
        }
        if self.order >= 2 {
            for k in 0..n * (n + 1) / 2 {
                out.hess[k] = -out.hess[k];
            }
        }
        out
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, b: Jet) -> Jet {
        let (nv, ord) = Jet::merge_shape(&self, &b);
        let n = nv as usize;
        let a = self;
        let mut out = Jet::constant(a.value * b.value);
        out.nvars = nv;
        out.order = ord;
        for i in 0..n {
            out.grad[i] = a.value * b.grad[i] + b.value * a.grad[i];
        }
        if ord >= 2 {
            for j in 0..n {
                for i in 0..=j {
                    let k = tri(i, j);
                    out.hess[k] = a.value * b.hess[k]
                        + b.value * a.hess[k]
                        + a.grad[i] * b.grad[j]
                        + a.grad[j] * b.grad[i];
                }
            }
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, b: Jet) -> Jet {
        if b.nvars == 0 {
            return self * (1.0 / b.value);
        }
        self * b.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn add(mut self, b: f64) -> Jet {
        self.value += b;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn sub(mut self, b: f64) -> Jet {
        self.value -= b;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, b: f64) -> Jet {
        let n = self.nvars as usize;
        let mut out = self;
        out.value *= b;
        for i in 0..n {
            out.grad[i] *= b;
        }
        if self.order >= 2 {
            for k in 0..n * (n + 1) / 2 {
                out.hess[k] *= b;
            }
        }
        out
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, b: f64) -> Jet {
        self * (1.0 / b)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, b: Jet) -> Jet {
        b + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, b: Jet) -> Jet {
        (-b) + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, b: Jet) -> Jet {
        b * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, b: Jet) -> Jet {
        b.recip() * self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, b: Jet) {
        *self = *self + b;
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, b: Jet) {
        *self = *self - b;
    }
}

impl MulAssign for Jet {
    fn mul_assign(&mut self, b: Jet) {
        *self = *self * b;
    }
}

impl std::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::constant(0.0), |a, b| a + b)
    }
}

/// Solves `a x = b` for jet-valued square `a` (row-major) by Gaussian elimination
/// with partial pivoting on the values.
pub fn solve(a: &[Jet], b: &[Jet], n: usize) -> Option<Vec<Jet>> {
    let mut m: Vec<Jet> = a.to_vec();
    let mut rhs: Vec<Jet> = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            m[i * n + col]
                .value()
                .abs()
                .total_cmp(&m[j * n + col].value().abs())
        })?;
        if m[piv * n + col].value().abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            rhs.swap(piv, col);
        }
        let inv = m[col * n + col].recip();
        for row in col + 1..n {
            let factor = m[row * n + col] * inv;
            if factor.value() == 0.0 && factor.nvars() == 0 {
                continue;
            }
            for k in col..n {
                let t = m[col * n + k];
                m[row * n + k] -= factor * t;
            }
            let t = rhs[col];
            rhs[row] -= factor * t;
        }
    }
    let mut x = vec![Jet::constant(0.0); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc -= m[row * n + k] * x[k];
        }
        x[row] = acc / m[row * n + row];
    }
    Some(x)
}

/// Inverse of a jet-valued square matrix (row-major).
pub fn inverse(a: &[Jet], n: usize) -> Option<Vec<Jet>> {
    let mut out = vec![Jet::constant(0.0); n * n];
    for c in 0..n {
        let mut e = vec![Jet::constant(0.0); n];
        e[c] = Jet::constant(1.0);
        let col = solve(a, &e, n)?;
        for r in 0..n {
            out[r * n + c] = col[r];
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd2<F: Fn(f64, f64) -> f64>(f: F, x: f64, y: f64) -> (f64, f64, f64, f64, f64) {
        let h = 1e-4;
        let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
        let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
        let fxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
        let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
        let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
            / (4.0 * h * h);
        (fx, fy, fxx, fyy, fxy)
    }

    #[test]
    fn second_order_matches_finite_differences() {
        let f = |x: f64, y: f64| (x * y).sin() * (x - y).exp() / (1.0 + x * x) + y.cosh().ln();
        let jf = |x: Jet, y: Jet| (x * y).sin() * (x - y).exp() / (x * x + 1.0) + y.cosh().ln();
        let (x0, y0) = (0.7, -0.3);
        let v = Jet::seed(&[x0, y0], 2);
        let r = jf(v[0], v[1]);
        let (fx, fy, fxx, fyy, fxy) = fd2(f, x0, y0);
        assert_relative_eq!(r.value(), f(x0, y0), epsilon = 1e-14);
        assert_relative_eq!(r.d(0), fx, epsilon = 1e-7);
        assert_relative_eq!(r.d(1), fy, epsilon = 1e-7);
        assert_relative_eq!(r.dd(0, 0), fxx, epsilon = 1e-5);
        assert_relative_eq!(r.dd(1, 1), fyy, epsilon = 1e-5);
        assert_relative_eq!(r.dd(0, 1), fxy, epsilon = 1e-5);
    }

    #[test]
    fn inverse_functions_have_unit_slope_composition() {
        let x = Jet::variable(0.4, 0, 1, 2);
        let a = x.sinh().asinh();
        let b = x.tanh().atanh();
        let c = x.exp().ln();
        let d = x.tan().atan();
        for j in [a, b, c, d] {
            assert_relative_eq!(j.value(), 0.4, epsilon = 1e-14);
            assert_relative_eq!(j.d(0), 1.0, epsilon = 1e-13);
            assert!(j.dd(0, 0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_lowers_order() {
        let v = Jet::seed(&[2.0, 3.0], 2);
        let f = v[0] * v[0] * v[1];
        let fx = f.partial(0);
        assert_relative_eq!(fx.value(), 12.0);
        assert_relative_eq!(fx.d(0), 6.0);
        assert_relative_eq!(fx.d(1), 4.0);
        assert_eq!(fx.order(), 1);
    }

    #[test]
    fn jet_matrix_inverse() {
        let v = Jet::seed(&[0.5], 1);
        let s = v[0];
        let a = vec![s.exp(), s, s, Jet::constant(2.0)];
        let inv = inverse(&a, 2).unwrap();
        // (A^{-1})' = -A^{-1} A' A^{-1}, checked through A A^{-1} = I.
        for r in 0..2 {
            for c in 0..2 {
                let e: Jet = (0..2).map(|k| a[r * 2 + k] * inv[k * 2 + c]).sum();
                let expect = if r == c { 1.0 } else { 0.0 };
                assert_relative_eq!(e.value(), expect, epsilon = 1e-14);
                assert!(e.d(0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn integer_powers_of_negative_base() {
        let x = Jet::variable(-2.0, 0, 1, 2);
        let p = x.pow(Jet::constant(3.0));
        assert_relative_eq!(p.value(), -8.0);
        assert_relative_eq!(p.d(0), 12.0);
        assert_relative_eq!(p.dd(0, 0), -12.0);
    }
}
