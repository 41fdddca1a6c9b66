//! Pointwise Clifford algebra in signature `(r, s)` with `XY + YX = −2g(X,Y)`,
//! the Dirac current of a spinor and the warp ODE for Killing numbers.

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::metric_core::Jet;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type Spinor = DVector<C64>;

pub const MAX_CLIFFORD_DIM: usize = 10;

const I: C64 = Complex { re: 0.0, im: 1.0 };

fn c(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn pauli() -> [CMatrix; 4] {
    let id = CMatrix::identity(2, 2);
    let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let y = CMatrix::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)]);
    let z = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    [id, x, y, z]
}

/// Hermitian generators with `E_a E_b + E_b E_a = 2δ_ab`, `n` of them, of size `2^⌊n/2⌋`.
fn euclidean_generators(n: usize) -> Vec<CMatrix> {
    let m = n / 2;
    let [id, x, y, z] = pauli();
    let string = |pos: usize, last: &CMatrix| -> CMatrix {
        let mut out = CMatrix::identity(1, 1);
        for k in 0..m {
            let f = match k.cmp(&pos) {
                std::cmp::Ordering::Less => &z,
                std::cmp::Ordering::Equal => last,
                std::cmp::Ordering::Greater => &id,
            };
            out = kron(&out, f);
        }
        out
    };
    let mut gens = Vec::with_capacity(n);
    for j in 0..m {
        gens.push(string(j, &x));
        gens.push(string(j, &y));
    }
    if n % 2 == 1 {
        // chirality element anticommutes with all others
        let mut chi = CMatrix::identity(1, 1);
        for _ in 0..m {
            chi = kron(&chi, &z);
        }
        gens.push(chi);
    }
    gens
}

/// Clifford module for signature `(r, s)`: the first `r` directions are time-like.
#[derive(Debug, Clone)]
pub struct CliffordRep {
    pub r: usize,
    pub s: usize,
    pub gammas: Vec<CMatrix>,
    /// `⟨φ, ψ⟩ = ψᴴ H φ`.
    pub hermitian_form: CMatrix,
}

pub fn build_rep(r: usize, s: usize) -> Result<CliffordRep> {
    let n = r + s;
    if n > MAX_CLIFFORD_DIM {
        return Err(GeomError::DimensionTooLarge {
            dim: n,
            max: MAX_CLIFFORD_DIM,
        });
    }
    if n == 0 {
        return Err(GeomError::InvalidInput("signature (0,0) has no generators".into()));
    }
    let e = euclidean_generators(n);
    let gammas: Vec<CMatrix> = e
        .iter()
        .enumerate()
        .map(|(a, m)| if a < r { m.clone() } else { m * I })
        .collect();
    let size = gammas[0].nrows();
    let mut h = CMatrix::identity(size, size);
    for g in gammas.iter().take(r) {
        h *= g;
    }
    // i^{r(r−1)/2} makes the product of time-like generators hermitian
    let k = (r * r.saturating_sub(1) / 2) % 4;
    h *= I.powu(k as u32);
    Ok(CliffordRep {
        r,
        s,
        gammas,
        hermitian_form: h,
    })
}

impl CliffordRep {
    pub fn dim(&self) -> usize {
        self.r + self.s
    }

    pub fn spinor_dim(&self) -> usize {
        self.gammas[0].nrows()
    }

    /// `g_aa` in the orthonormal frame.
    pub fn metric_sign(&self, a: usize) -> f64 {
        if a < self.r {
            -1.0
        } else {
            1.0
        }
    }

    /// Largest entry of `γ_a γ_b + γ_b γ_a + 2 g_ab`.
    pub fn clifford_residual(&self) -> f64 {
        let n = self.dim();
        let id = CMatrix::identity(self.spinor_dim(), self.spinor_dim());
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let mut m = &self.gammas[a] * &self.gammas[b] + &self.gammas[b] * &self.gammas[a];
                if a == b {
                    m += &id * c(2.0 * self.metric_sign(a));
                }
                worst = worst.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// Largest entry of `H γ_a − (−1)^{r+1} γ_aᴴ H`, i.e. of `⟨X·φ,ψ⟩ − (−1)^{r+1}⟨φ,X·ψ⟩`.
    pub fn adjoint_residual(&self) -> f64 {
        let sign = if (self.r + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let h = &self.hermitian_form;
        self.gammas
            .iter()
            .map(|g| {
                let m = h * g - g.adjoint() * h * c(sign);
                m.iter().map(|z| z.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `(positive, negative)` eigenvalue counts of the hermitian form.
    pub fn form_signature(&self) -> (usize, usize) {
        let eig = self.hermitian_form.clone().symmetric_eigen();
        let pos = eig.eigenvalues.iter().filter(|&&v| v > 1e-12).count();
        let neg = eig.eigenvalues.iter().filter(|&&v| v < -1e-12).count();
        (pos, neg)
    }

    /// `⟨φ, ψ⟩ = ψᴴ H φ`.
    pub fn inner(&self, phi: &Spinor, psi: &Spinor) -> C64 {
        (psi.adjoint() * &self.hermitian_form * phi)[(0, 0)]
    }

    /// Clifford multiplication by `X = Σ x_a e_a`.
    pub fn clifford_mul(&self, x: &[f64], phi: &Spinor) -> Spinor {
        let mut out = Spinor::zeros(phi.len());
        for (a, &xa) in x.iter().enumerate() {
            if xa != 0.0 {
                out += &self.gammas[a] * phi * c(xa);
            }
        }
        out
    }

    pub fn random_spinor(&self, rng: &mut ChaCha8Rng) -> Spinor {
        let n = self.spinor_dim();
        let v = Spinor::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(re, im)
        });
        let norm = v.norm();
        v / c(norm)
    }
}

/// `V_φ` in the orthonormal frame, from `g(V_φ, e_a) = i^{r+1} ⟨φ, γ_a φ⟩`.
pub fn dirac_current(rep: &CliffordRep, phi: &Spinor) -> Result<Vec<f64>> {
    let pre = I.powu(((rep.r + 1) % 4) as u32);
    let scale = phi.norm_squared().max(1.0);
    let mut out = Vec::with_capacity(rep.dim());
    for a in 0..rep.dim() {
        let w = pre * rep.inner(phi, &(&rep.gammas[a] * phi));
        if w.im.abs() > 1e-10 * scale {
            return Err(GeomError::NonRealCurrent(w.im));
        }
        out.push(w.re * rep.metric_sign(a));
    }
    Ok(out)
}

pub fn minkowski_norm(rep: &CliffordRep, v: &[f64]) -> f64 {
    v.iter().enumerate().map(|(a, x)| rep.metric_sign(a) * x * x).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalityReport {
    /// Largest `g(V_φ, V_φ)` over the trials.
    pub max_norm: f64,
    /// Largest `|g(V,V) + 4(φ₊,φ₊)_T(φ₋,φ₋)_T|`.
    pub identity_residual: f64,
    /// Largest `|⟨T·φ₊, φ₋⟩|`.
    pub orthogonality_residual: f64,
    /// Smallest eigenvalue of `(·,·)_T`.
    pub form_min_eigenvalue: f64,
    pub trials: usize,
}

/// Splitting data for one spinor: `(g(V,V), (φ₊,φ₊)_T, (φ₋,φ₋)_T, ⟨T·φ₊, φ₋⟩)`.
pub fn eigen_split(rep: &CliffordRep, phi: &Spinor) -> Result<(f64, f64, f64, f64)> {
    let v = dirac_current(rep, phi)?;
    let norm = minkowski_norm(rep, &v);
    let n = rep.dim();
    // N: unit spatial direction of V (any spatial unit vector if V is along T)
    let spatial: f64 = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut nvec = vec![0.0; n];
    if spatial > 1e-14 {
        for a in 1..n {
            nvec[a] = v[a] / spatial;
        }
    } else {
        nvec[1] = 1.0;
    }
    let t_dot = |p: &Spinor| &rep.gammas[0] * p;
    let tn = |p: &Spinor| t_dot(&rep.clifford_mul(&nvec, p));
    let half = c(0.5);
    let plus = (phi + tn(phi)) * half;
    let minus = (phi - tn(phi)) * half;
    let form = |a: &Spinor, b: &Spinor| rep.inner(&t_dot(a), b);
    Ok((
        norm,
        form(&plus, &plus).re,
        form(&minus, &minus).re,
        rep.inner(&t_dot(&plus), &minus).norm(),
    ))
}

/// Random-spinor check of `g(V_φ,V_φ) ≤ 0` and `g(V_φ,V_φ) = −4(φ₊,φ₊)_T(φ₋,φ₋)_T`
/// in signature `(1, n−1)`; spinors are unit in the coefficient norm.
pub fn causality_check(rep: &CliffordRep, n_trials: usize, seed: u64) -> Result<CausalityReport> {
    if rep.r != 1 || rep.s == 0 {
        return Err(GeomError::InvalidInput(format!(
            "causality check needs signature (1, n−1), got ({}, {})",
            rep.r, rep.s
        )));
    }
    let form_t = &rep.hermitian_form * &rep.gammas[0];
    let min_eig = form_t.clone().symmetric_eigen().eigenvalues.min();
    if min_eig <= 0.0 {
        return Err(GeomError::FormNotPositive(min_eig));
    }
    let results: Vec<Result<(f64, f64, f64)>> = (0..n_trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let phi = rep.random_spinor(&mut rng);
            let (norm, pp, mm, orth) = eigen_split(rep, &phi)?;
            Ok((norm, (norm + 4.0 * pp * mm).abs(), orth))
        })
        .collect();
    let mut rep_out = CausalityReport {
        max_norm: f64::NEG_INFINITY,
        identity_residual: 0.0,
        orthogonality_residual: 0.0,
        form_min_eigenvalue: min_eig,
        trials: n_trials,
    };
    for r in results {
        let (norm, id, orth) = r?;
        rep_out.max_norm = rep_out.max_norm.max(norm);
        rep_out.identity_residual = rep_out.identity_residual.max(id);
        rep_out.orthogonality_residual = rep_out.orthogonality_residual.max(orth);
    }
    Ok(rep_out)
}

/// Spin lift `cos(θ/2) + sin(θ/2) γ_a γ_b` of the rotation in the space-like plane `(a, b)`.
pub fn spin_rotation(rep: &CliffordRep, a: usize, b: usize, theta: f64) -> CMatrix {
    let n = rep.spinor_dim();
    CMatrix::identity(n, n) * c((theta / 2.0).cos()) + &rep.gammas[a] * &rep.gammas[b] * c((theta / 2.0).sin())
}

/// Frame matrix `Λ` with `S γ_c S⁻¹ = Σ_d Λ_{dc} γ_d`, read off by trace pairing.
pub fn vector_action(rep: &CliffordRep, spin: &CMatrix) -> Result<DMatrix<f64>> {
    let n = rep.dim();
    let inv = spin
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::InvalidInput("singular spin element".into()))?;
    let size = rep.spinor_dim() as f64;
    Ok(DMatrix::from_fn(n, n, |d, cidx| {
        let conj = spin * &rep.gammas[cidx] * &inv;
        // tr(γ_d γ_c) = −g_dc N
        (-(&rep.gammas[d] * conj).trace() / c(size * rep.metric_sign(d))).re
    }))
}

/// `|V_{Sφ} − Λ V_φ|` for the spin lift of a rotation in the plane `(a, b)`.
pub fn spin_equivariance_residual(rep: &CliffordRep, a: usize, b: usize, theta: f64, phi: &Spinor) -> Result<f64> {
    let spin = spin_rotation(rep, a, b, theta);
    let lambda = vector_action(rep, &spin)?;
    let v = DVector::from_vec(dirac_current(rep, phi)?);
    let rotated = DVector::from_vec(dirac_current(rep, &(&spin * phi))?);
    Ok((rotated - lambda * v).amax())
}

#[derive(Debug, Clone)]
pub struct KillingWarpReport {
    /// Largest `|f″ + 4ελ̂²f|` on the grid.
    pub ode_residual: f64,
    /// `(s, λ²(s))` with `λ² = λ̂²f² + (ε/4)f′²`.
    pub profile: Vec<(f64, f64)>,
    pub spread: f64,
    /// `max − min` of the profile below 1e-8.
    pub constant: bool,
}

pub const KILLING_GRID: usize = 401;
pub const CONSTANCY_TOL: f64 = 1e-8;

/// Warp ODE and induced Killing number on `s ∈ [lo, hi]`. `lambda_hat_sq` is
/// `λ̂²`, negative for imaginary Killing numbers.
pub fn killing_warp_check<F>(f: F, epsilon: f64, lambda_hat_sq: f64, lo: f64, hi: f64) -> KillingWarpReport
where
    F: Fn(Jet) -> Jet,
{
    let mut ode_residual: f64 = 0.0;
    let mut profile = Vec::with_capacity(KILLING_GRID);
    for k in 0..KILLING_GRID {
        let s = lo + (hi - lo) * k as f64 / (KILLING_GRID - 1) as f64;
        let j = f(Jet::variable(s, 0, 1, 2));
        let (v, d1, d2) = (j.value(), j.d(0), j.dd(0, 0));
        ode_residual = ode_residual.max((d2 + 4.0 * epsilon * lambda_hat_sq * v).abs());
        profile.push((s, lambda_hat_sq * v * v + 0.25 * epsilon * d1 * d1));
    }
    let max = profile.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = profile.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let spread = max - min;
    KillingWarpReport {
        ode_residual,
        profile,
        spread,
        constant: spread < CONSTANCY_TOL,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(build_rep(0, 2).unwrap().spinor_dim(), 2);
        assert_eq!(build_rep(1, 3).unwrap().spinor_dim(), 4);
        assert_eq!(build_rep(2, 3).unwrap().spinor_dim(), 4);
        assert!(matches!(build_rep(5, 6), Err(GeomError::DimensionTooLarge { .. })));
    }

    #[test]
    fn riemannian_form_is_identity() {
        let rep = build_rep(0, 4).unwrap();
        assert_eq!(rep.form_signature(), (4, 0));
    }
}
