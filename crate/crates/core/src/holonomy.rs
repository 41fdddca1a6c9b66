//! Holonomy sampling by loop transport and Ambrose–Singer curvature probes,
//! common invariant subspaces of the sample, and the irreducible cone table.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{GeomError, Result};
use crate::metric_core::transport::{parallel_transport, transport_polyline, Segment};
use crate::metric_core::{MetricField, OdeOptions};

/// Relative singular-value threshold for kernels, ranks and Gram degeneracy.
pub const RANK_TOL: f64 = 1e-7;
/// Invariance tolerance for reported subspaces.
pub const INVARIANCE_TOL: f64 = 1e-5;
pub const HELD_OUT_COUNT: usize = 10;
const MAX_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone)]
pub struct HolonomySample {
    pub basepoint: Vec<f64>,
    /// Metric at the basepoint.
    pub metric: DMatrix<f64>,
    /// Loop transports (group sample).
    pub elements: Vec<DMatrix<f64>>,
    /// Conjugated curvature endomorphisms (algebra sample).
    pub algebra: Vec<DMatrix<f64>>,
    pub seed: u64,
    /// Loops or probes redrawn because they left the chart.
    pub resampled: usize,
}

fn transport_opts() -> OdeOptions {
    OdeOptions {
        rtol: 1e-10,
        atol: 1e-12,
        ..OdeOptions::default()
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Coordinate rectangle loop at `p` in the plane `(i, j)` with signed sides `a`, `b`.
fn rectangle(p: &[f64], i: usize, j: usize, a: f64, b: f64) -> Vec<Vec<f64>> {
    let mut v1 = p.to_vec();
    v1[i] += a;
    let mut v2 = v1.clone();
    v2[j] += b;
    let mut v3 = p.to_vec();
    v3[j] += b;
    vec![p.to_vec(), v1, v2, v3, p.to_vec()]
}

/// Parallel transports around `n_loops` random coordinate rectangles through
/// `basepoint`. Side lengths are log-uniform in `[1e-3, 1]` with random signs;
/// loops leaving the chart are redrawn and counted.
pub fn holonomy_sample(field: &MetricField, basepoint: &[f64], n_loops: usize, seed: u64) -> Result<HolonomySample> {
    if n_loops == 0 {
        return Err(GeomError::InvalidInput("at least one loop is required".into()));
    }
    let n = field.dim();
    if n < 2 {
        return Err(GeomError::InvalidInput("holonomy loops need dimension ≥ 2".into()));
    }
    let metric = field.eval(basepoint)?;
    let chart = field.chart();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut loops = Vec::with_capacity(n_loops);
    let mut resampled = 0;
    while loops.len() < n_loops {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let sign = |r: &mut ChaCha8Rng| if r.gen_bool(0.5) { 1.0 } else { -1.0 };
        let a = sign(&mut rng) * log_uniform(&mut rng, 1e-3, 1.0);
        let b = sign(&mut rng) * log_uniform(&mut rng, 1e-3, 1.0);
        let verts = rectangle(basepoint, i, j, a, b);
        if verts.iter().all(|v| chart.contains(v)) {
            loops.push(verts);
        } else {
            resampled += 1;
            if resampled > MAX_RESAMPLES {
                return Err(GeomError::OutOfDomain {
                    coords: basepoint.to_vec(),
                    coord: "holonomy loop".into(),
                });
            }
        }
    }
    let id = DMatrix::identity(n, n);
    let opts = transport_opts();
    let elements: Vec<DMatrix<f64>> = loops
        .par_iter()
        .map(|verts| transport_polyline(field, verts, &id, &opts))
        .collect::<Result<_>>()?;
    Ok(HolonomySample {
        basepoint: basepoint.to_vec(),
        metric,
        elements,
        algebra: Vec::new(),
        seed,
        resampled,
    })
}

/// `P⁻¹ R_q(X,Y) P` for random endpoints `q` (straight coordinate paths from the
/// basepoint, offsets log-uniform in `[1e-3, 1]`) and random `X`, `Y` at `q`.
/// The first probe uses `q = basepoint`.
pub fn ambrose_singer_sample(
    field: &MetricField,
    basepoint: &[f64],
    n_probes: usize,
    seed: u64,
) -> Result<(Vec<DMatrix<f64>>, usize)> {
    let n = field.dim();
    field.eval(basepoint)?;
    let chart = field.chart();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::with_capacity(n_probes);
    let mut resampled = 0;
    while probes.len() < n_probes {
        let q: Vec<f64> = if probes.is_empty() {
            basepoint.to_vec()
        } else {
            let scale = log_uniform(&mut rng, 1e-3, 1.0);
            basepoint
                .iter()
                .map(|&c| c + scale * rng.gen_range(-1.0..1.0))
                .collect()
        };
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if chart.contains(&q) {
            probes.push((q, x, y));
        } else {
            resampled += 1;
            if resampled > MAX_RESAMPLES {
                return Err(GeomError::OutOfDomain {
                    coords: basepoint.to_vec(),
                    coord: "curvature probe".into(),
                });
            }
        }
    }
    let id = DMatrix::identity(n, n);
    let opts = transport_opts();
    let algebra = probes
        .par_iter()
        .map(|(q, x, y)| {
            let p = if q.as_slice() == basepoint {
                id.clone()
            } else {
                let seg = Segment {
                    from: basepoint.to_vec(),
                    to: q.clone(),
                };
                parallel_transport(field, &seg, &id, &opts)?
            };
            let r = field.riemann(q)?.endomorphism(x, y);
            let pinv = p
                .clone()
                .try_inverse()
                .ok_or_else(|| GeomError::OdeSolveFailure("singular transport".into()))?;
            Ok(pinv * r * p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((algebra, resampled))
}

/// Group and algebra samples at once.
pub fn sample_holonomy(
    field: &MetricField,
    basepoint: &[f64],
    n_loops: usize,
    n_probes: usize,
    seed: u64,
) -> Result<HolonomySample> {
    let mut s = holonomy_sample(field, basepoint, n_loops.max(1), seed)?;
    if n_loops == 0 {
        s.elements.clear();
    }
    let (alg, extra) = ambrose_singer_sample(field, basepoint, n_probes, seed.wrapping_add(1))?;
    s.algebra = alg;
    s.resampled += extra;
    Ok(s)
}

impl HolonomySample {
    /// Largest entry of `GᵀgG − g` over the group sample.
    pub fn group_defect(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| (e.transpose() * &self.metric * e - &self.metric).amax())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `Aᵀg + gA` over the algebra sample.
    pub fn algebra_defect(&self) -> f64 {
        self.algebra
            .iter()
            .map(|a| (a.transpose() * &self.metric + &self.metric * a).amax())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of a group element from the identity.
    pub fn max_group_deviation(&self) -> f64 {
        let n = self.metric.nrows();
        self.elements
            .iter()
            .map(|e| (e - DMatrix::identity(n, n)).amax())
            .fold(0.0, f64::max)
    }

    pub fn max_algebra_norm(&self) -> f64 {
        self.algebra.iter().map(|a| a.amax()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct InvariantSubspace {
    /// Euclidean-orthonormal basis columns.
    pub basis: DMatrix<f64>,
    pub dim: usize,
    /// `dim − rank` of the restricted metric.
    pub degeneracy: usize,
}

impl InvariantSubspace {
    pub fn is_totally_null(&self) -> bool {
        self.degeneracy == self.dim
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.degeneracy == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Irreducible,
    Decomposable,
    IndecomposableWithNullSubspace,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Irreducible => "irreducible",
            Classification::Decomposable => "decomposable",
            Classification::IndecomposableWithNullSubspace => "indecomposable-with-null-subspace",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubspaceReport {
    pub subspaces: Vec<InvariantSubspace>,
    pub classification: Classification,
    /// Number of algebra elements the verdict rests on.
    pub sample_size: usize,
    /// Largest invariance defect of the reported subspaces on held-out elements.
    pub held_out_defect: f64,
}

/// Orthonormal basis of the column space (singular values above `RANK_TOL·σ_max`).
fn column_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let cols: Vec<_> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > RANK_TOL * smax)
        .map(|i| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Orthonormal basis of the null space of `m` (`ncols` columns).
fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let k = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(k, k);
    }
    // work with the square Gram matrix to get all right singular vectors
    let gram = m.transpose() * m;
    let eig = gram.symmetric_eigen();
    let max = eig.eigenvalues.amax();
    let cols: Vec<_> = (0..k)
        .filter(|&i| max == 0.0 || eig.eigenvalues[i].max(0.0).sqrt() <= RANK_TOL * max.sqrt())
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(k, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn rank(m: &DMatrix<f64>, scale: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    sv.iter().filter(|&&s| s > RANK_TOL * scale).count()
}

/// Largest `‖(I − UUᵀ) A U‖` over the operators (each normalised to unit max-entry).
pub fn invariance_defect(basis: &DMatrix<f64>, ops: &[DMatrix<f64>]) -> f64 {
    let n = basis.nrows();
    let proj = basis * basis.transpose();
    let comp = DMatrix::identity(n, n) - proj;
    ops.iter()
        .filter(|a| a.amax() > 0.0)
        .map(|a| (&comp * (a / a.amax()) * basis).amax())
        .fold(0.0, f64::max)
}

fn describe(basis: DMatrix<f64>, g: &DMatrix<f64>) -> InvariantSubspace {
    let dim = basis.ncols();
    let gram = basis.transpose() * g * &basis;
    let scale = g.amax().max(1.0);
    let degeneracy = dim - rank(&gram, scale);
    InvariantSubspace {
        basis,
        dim,
        degeneracy,
    }
}

/// `g`-orthogonal complement of the span of `basis`.
fn g_complement(basis: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    null_space(&(basis.transpose() * g))
}

fn intersection(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    // x = A s = B t  ⇔  [A  −B] (s, t) = 0
    let n = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    let mut stacked = DMatrix::zeros(n, a.ncols() + b.ncols());
    stacked.columns_mut(0, a.ncols()).copy_from(a);
    stacked.columns_mut(a.ncols(), b.ncols()).copy_from(&(-b));
    let ns = null_space(&stacked);
    if ns.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    column_space(&(a * ns.rows(0, a.ncols())))
}

/// Basis of the commutant `{C : C A_k = A_k C}` as flattened `n×n` matrices.
fn commutant(ops: &[DMatrix<f64>], n: usize) -> Vec<DMatrix<f64>> {
    let nn = n * n;
    // Σ_k L_kᵀ L_k, where L_k(X) = X A_k − A_k X, accumulated as an nn×nn Gram matrix
    let mut gram = DMatrix::zeros(nn, nn);
    for a in ops {
        let mut l = DMatrix::zeros(nn, nn);
        for col in 0..nn {
            let mut e = DMatrix::zeros(n, n);
            e[(col % n, col / n)] = 1.0;
            let img = &e * a - a * &e;
            l.column_mut(col).copy_from_slice(img.as_slice());
        }
        gram += l.transpose() * l;
    }
    let eig = gram.symmetric_eigen();
    let max = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    (0..nn)
        .filter(|&i| eig.eigenvalues[i].max(0.0).sqrt() <= 1e-6 * max.sqrt())
        .map(|i| DMatrix::from_column_slice(n, n, eig.eigenvectors.column(i).as_slice()))
        .collect()
}

/// Candidate invariant subspaces from generalized eigenspaces of a `g`-self-adjoint
/// commutant element `s`.
fn eigen_candidates(s: &DMatrix<f64>, out: &mut Vec<DMatrix<f64>>) {
    let n = s.nrows();
    // bounded Schur iteration; the default iterates without limit
    let Some(schur) = s.clone().try_schur(f64::EPSILON, 10_000) else {
        return;
    };
    let eigs: Vec<nalgebra::Complex<f64>> = schur.complex_eigenvalues().iter().copied().collect();
    let scale = s.amax().max(1.0);
    let mut seen: Vec<nalgebra::Complex<f64>> = Vec::new();
    for lam in eigs {
        if seen.iter().any(|m| (m - lam).norm() < 1e-6 * scale) {
            continue;
        }
        seen.push(lam);
        // real factor (S − λ) or (S − λ)(S − λ̄)
        let factor = if lam.im.abs() < 1e-9 * scale {
            s - DMatrix::identity(n, n) * lam.re
        } else if lam.im > 0.0 {
            let id = DMatrix::identity(n, n);
            (s - &id * lam.re) * (s - &id * lam.re) + id * (lam.im * lam.im)
        } else {
            continue;
        };
        let mut power = factor.clone();
        for _ in 0..n {
            let k = null_space(&power);
            if k.ncols() > 0 && k.ncols() < n {
                out.push(k);
            }
            let im = column_space(&power);
            if im.ncols() > 0 && im.ncols() < n {
                out.push(im);
            }
            power = &power * &factor;
        }
    }
}

fn same_subspace(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    a.ncols() == b.ncols() && (a * a.transpose() - b * b.transpose()).amax() < 1e-6
}

/// Searches common invariant subspaces of the algebra sample.
///
/// Candidates: the common kernel, the span of all images, generalized
/// eigenspaces of random `g`-self-adjoint elements of the commutant, their
/// `g`-orthogonal complements and null parts `U ∩ U^⊥`. Each candidate is
/// validated against the full sample and then against `held_out`.
pub fn invariant_subspace_analysis(sample: &HolonomySample, held_out: &[DMatrix<f64>]) -> Result<SubspaceReport> {
    let g = &sample.metric;
    let n = g.nrows();
    if sample.algebra.is_empty() {
        return Err(GeomError::InconclusiveSample("empty algebra sample".into()));
    }
    let top = sample.max_algebra_norm();
    let ops: Vec<DMatrix<f64>> = sample
        .algebra
        .iter()
        .filter(|a| a.amax() > 1e-12 * top.max(1e-300) && a.amax() > 1e-10)
        .map(|a| a / a.amax())
        .collect();
    let mut raw: Vec<DMatrix<f64>> = Vec::new();
    if ops.is_empty() {
        // trivial algebra: every subspace is invariant; report a g-orthogonal splitting
        let eig = g.clone().symmetric_eigen();
        for i in 0..n {
            raw.push(DMatrix::from_column_slice(n, 1, eig.eigenvectors.column(i).as_slice()));
        }
    } else {
        let mut stacked = DMatrix::zeros(n * ops.len(), n);
        let mut images = DMatrix::zeros(n, n * ops.len());
        for (k, a) in ops.iter().enumerate() {
            stacked.rows_mut(k * n, n).copy_from(a);
            images.columns_mut(k * n, n).copy_from(a);
        }
        raw.push(null_space(&stacked));
        raw.push(column_space(&images));
        let comm = commutant(&ops, n);
        if comm.len() > 1 {
            let ginv = g.clone().try_inverse().ok_or_else(|| {
                GeomError::DegenerateMetric {
                    coords: sample.basepoint.clone(),
                    det: 0.0,
                }
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(sample.seed ^ 0xc0de);
            for _ in 0..4 {
                let mut c = DMatrix::zeros(n, n);
                for b in &comm {
                    c += b * rng.gen_range(-1.0..1.0);
                }
                let s = (&c + &ginv * c.transpose() * g) * 0.5;
                eigen_candidates(&s, &mut raw);
            }
        }
    }
    let mut accepted: Vec<DMatrix<f64>> = Vec::new();
    let consider = |b: DMatrix<f64>, accepted: &mut Vec<DMatrix<f64>>| {
        if b.ncols() == 0 || b.ncols() >= n {
            return;
        }
        if accepted.iter().any(|a| same_subspace(a, &b)) {
            return;
        }
        if invariance_defect(&b, &ops) <= INVARIANCE_TOL {
            accepted.push(b);
        }
    };
    for b in raw {
        let b = column_space(&b);
        consider(b, &mut accepted);
    }
    // complements and null parts of what was found
    let mut k = 0;
    while k < accepted.len() && accepted.len() < 64 {
        let u = accepted[k].clone();
        let comp = column_space(&g_complement(&u, g));
        consider(comp.clone(), &mut accepted);
        let null = intersection(&u, &comp);
        if null.ncols() > 0 {
            consider(column_space(&null), &mut accepted);
        }
        k += 1;
    }
    let subspaces: Vec<InvariantSubspace> = accepted.into_iter().map(|b| describe(b, g)).collect();
    let held_out_defect = subspaces
        .iter()
        .map(|s| invariance_defect(&s.basis, held_out))
        .fold(0.0, f64::max);
    if held_out_defect > INVARIANCE_TOL {
        return Err(GeomError::InconclusiveSample(format!(
            "held-out elements break a reported subspace (defect {held_out_defect:e}); sample size {}",
            sample.algebra.len()
        )));
    }
    let classification = if subspaces.iter().any(InvariantSubspace::is_nondegenerate) {
        Classification::Decomposable
    } else if subspaces.is_empty() {
        Classification::Irreducible
    } else {
        Classification::IndecomposableWithNullSubspace
    };
    Ok(SubspaceReport {
        subspaces,
        classification,
        sample_size: sample.algebra.len(),
        held_out_defect,
    })
}

/// Draws an algebra sample of `n_probes` elements plus `HELD_OUT_COUNT` fresh
/// elements and runs [`invariant_subspace_analysis`].
pub fn analyse_holonomy(
    field: &MetricField,
    basepoint: &[f64],
    n_probes: usize,
    seed: u64,
) -> Result<(HolonomySample, SubspaceReport)> {
    let sample = sample_holonomy(field, basepoint, 0, n_probes, seed)?;
    let (held, _) = ambrose_singer_sample(field, basepoint, HELD_OUT_COUNT + 1, seed.wrapping_add(0x9e37_79b9))?;
    // drop the basepoint probe shared by every draw
    let report = invariant_subspace_analysis(&sample, &held[1..])?;
    Ok((sample, report))
}

/// Entry of the irreducible cone holonomy table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BergerEntry {
    pub algebra: String,
    pub ambient: String,
}

impl BergerEntry {
    pub fn row(&self) -> String {
        if self.algebra == self.ambient {
            self.algebra.clone()
        } else {
            format!("{} ⊂ {}", self.algebra, self.ambient)
        }
    }
}

fn so_name(t: usize, s: usize) -> String {
    if t == 0 {
        format!("so({s})")
    } else if s == 0 {
        format!("so({t})")
    } else {
        format!("so({t},{s})")
    }
}

/// Lie algebras that can occur as irreducible holonomy of a time-like cone in
/// signature `(t, s)`; `so(t,s)` is always listed first.
pub fn berger_candidates(t: usize, s: usize) -> Vec<BergerEntry> {
    let ambient = so_name(t, s);
    let mut out = vec![BergerEntry {
        algebra: ambient.clone(),
        ambient: ambient.clone(),
    }];
    let mut push = |name: String| {
        out.push(BergerEntry {
            algebra: name,
            ambient: ambient.clone(),
        })
    };
    let pq = |p: usize, q: usize| {
        if p == 0 {
            format!("({q})")
        } else if q == 0 {
            format!("({p})")
        } else {
            format!("({p},{q})")
        }
    };
    if t % 2 == 0 && s % 2 == 0 {
        let (p, q) = (t / 2, s / 2);
        if p + q >= 2 {
            push(format!("u{}", pq(p, q)));
            push(format!("su{}", pq(p, q)));
        }
    }
    if t % 4 == 0 && s % 4 == 0 {
        let (p, q) = (t / 4, s / 4);
        if p + q >= 2 {
            push(format!("sp{}", pq(p, q)));
        }
    }
    if t == s && t >= 3 {
        push(format!("so({t},C)"));
    }
    match (t, s) {
        (7, 7) => push("g₂^C".into()),
        (8, 8) => push("spin(7,C)".into()),
        (0, 7) => push("g₂".into()),
        (0, 8) => push("spin(7)".into()),
        (3, 4) => push("g₂(2)".into()),
        (4, 4) => push("spin(3,4)".into()),
        _ => {}
    }
    out
}

/// Solves for the rotation angle of a 2×2 block (diagnostics).
pub fn rotation_angle(m: &DMatrix<f64>) -> f64 {
    m[(1, 0)].atan2(m[(0, 0)])
}

/// Applies every group element to `v` and returns the largest change.
pub fn fixed_vector_defect(sample: &HolonomySample, v: &[f64]) -> f64 {
    let v = DVector::from_column_slice(v);
    sample
        .elements
        .iter()
        .map(|e| (e * &v - &v).amax())
        .fold(0.0, f64::max)
}

/// Largest `|A v|` over the algebra sample.
pub fn annihilation_defect(sample: &HolonomySample, v: &[f64]) -> f64 {
    let v = DVector::from_column_slice(v);
    sample.algebra.iter().map(|a| (a * &v).amax()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn berger_table_rows() {
        let names = |t, s| -> Vec<String> { berger_candidates(t, s).iter().map(|e| e.algebra.clone()).collect() };
        assert_eq!(names(0, 7), vec!["so(7)", "g₂"]);
        assert_eq!(names(3, 4), vec!["so(3,4)", "g₂(2)"]);
        assert_eq!(names(0, 5), vec!["so(5)"]);
        assert_eq!(names(4, 4), vec!["so(4,4)", "u(2,2)", "su(2,2)", "sp(1,1)", "so(4,C)", "spin(3,4)"]);
        assert_eq!(names(0, 8), vec!["so(8)", "u(4)", "su(4)", "sp(2)", "spin(7)"]);
        assert_eq!(berger_candidates(0, 7)[1].row(), "g₂ ⊂ so(7)");
    }

    #[test]
    fn block_diagonal_sample_is_decomposable() {
        let j = |a: f64| DMatrix::from_row_slice(2, 2, &[0.0, -a, a, 0.0]);
        let mut alg = Vec::new();
        for k in 1..6 {
            let mut m = DMatrix::zeros(4, 4);
            m.view_mut((0, 0), (2, 2)).copy_from(&j(k as f64 * 0.3));
            m.view_mut((2, 2), (2, 2)).copy_from(&j(1.0 / k as f64));
            alg.push(m);
        }
        let sample = HolonomySample {
            basepoint: vec![0.0; 4],
            metric: DMatrix::identity(4, 4),
            elements: vec![],
            algebra: alg.clone(),
            seed: 1,
            resampled: 0,
        };
        let rep = invariant_subspace_analysis(&sample, &alg).unwrap();
        assert_eq!(rep.classification, Classification::Decomposable);
        assert!(rep.subspaces.iter().any(|s| s.dim == 2 && s.is_nondegenerate()));
    }

    #[test]
    fn empty_sample_is_inconclusive() {
        let sample = HolonomySample {
            basepoint: vec![0.0; 2],
            metric: DMatrix::identity(2, 2),
            elements: vec![],
            algebra: vec![],
            seed: 1,
            resampled: 0,
        };
        assert!(matches!(
            invariant_subspace_analysis(&sample, &[]),
            Err(GeomError::InconclusiveSample(_))
        ));
    }
}
