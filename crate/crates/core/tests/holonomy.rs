use conelab::cone::{build_cone, ConeSpec};
use conelab::holonomy::*;
use conelab::metric_core::{Interval, MetricField};
use conelab::stock;
use conelab::warped::{build_doubly_warped, build_warped, DoublyWarpedBranch, Warp, WarpedSpec};
use nalgebra::{DMatrix, DVector};

fn horosphere_cone() -> MetricField {
    let base = WarpedSpec::new(-1.0, Warp::custom("exp(-s)", |s| (-s).exp()), stock::round_sphere(), Interval::unbounded())
        .unwrap();
    build_cone(&ConeSpec::new(-1.0, build_warped(&base).unwrap()).unwrap()).unwrap()
}

fn doubly_warped_cone() -> MetricField {
    let base = build_doubly_warped(
        DoublyWarpedBranch::Minus,
        &stock::flat_torus(),
        &stock::flat(1),
        Interval::positive(),
    )
    .unwrap();
    build_cone(&ConeSpec::new(1.0, base).unwrap()).unwrap()
}

/// Brute force over lines in ℝ² or ℝ³: the smallest non-invariance of any grid line.
fn projective_grid_min_defect(ops: &[DMatrix<f64>], dim: usize) -> f64 {
    let steps = 200;
    let mut best = f64::INFINITY;
    let mut check = |v: DVector<f64>| {
        let v = v.normalize();
        let worst = ops
            .iter()
            .map(|a| {
                let w = a * &v / a.amax();
                (&w - &v * v.dot(&w)).norm()
            })
            .fold(0.0, f64::max);
        best = best.min(worst);
    };
    let pi = std::f64::consts::PI;
    match dim {
        2 => {
            for i in 0..steps {
                let t = pi * i as f64 / steps as f64;
                check(DVector::from_vec(vec![t.cos(), t.sin()]));
            }
        }
        3 => {
            for i in 0..steps {
                for j in 0..steps {
                    let (t, p) = (pi * i as f64 / steps as f64, pi * j as f64 / steps as f64);
                    check(DVector::from_vec(vec![t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]));
                }
            }
        }
        _ => unimplemented!(),
    }
    best
}

#[test]
fn flat_plane_loops_are_trivial() {
    let s = holonomy_sample(&stock::flat(2), &[0.1, 0.2], 40, 3).unwrap();
    assert!(s.max_group_deviation() < 1e-8);
    let (alg, _) = ambrose_singer_sample(&stock::flat(2), &[0.1, 0.2], 20, 3).unwrap();
    assert!(alg.iter().all(|a| a.amax() < 1e-8));
}

#[test]
fn flat_cone_over_sphere_has_trivial_loops() {
    let cone = build_cone(&ConeSpec::new(1.0, stock::round_sphere()).unwrap()).unwrap();
    let s = holonomy_sample(&cone, &[1.5, 1.2, 0.3], 30, 5).unwrap();
    assert!(s.max_group_deviation() < 1e-6, "{}", s.max_group_deviation());
}

#[test]
fn round_sphere_loops_rotate_and_preserve_metric() {
    let s = sample_holonomy(&stock::round_sphere(), &[1.2, 0.3], 200, 40, 11).unwrap();
    assert!(s.max_group_deviation() > 0.1, "{}", s.max_group_deviation());
    assert!(s.group_defect() < 1e-6, "{}", s.group_defect());
    assert!(s.algebra_defect() < 1e-6, "{}", s.algebra_defect());
}

#[test]
fn round_sphere_is_irreducible() {
    let (sample, rep) = analyse_holonomy(&stock::round_sphere(), &[1.2, 0.3], 200, 42).unwrap();
    assert_eq!(rep.classification, Classification::Irreducible);
    assert_eq!(rep.sample_size, 200);
    assert!(projective_grid_min_defect(&sample.algebra, 2) > 1e-3);
}

#[test]
fn product_sample_is_block_diagonal_and_decomposable() {
    let prod = stock::product(&stock::round_sphere(), &stock::round_sphere()).unwrap();
    let p = [1.0, 0.3, 1.2, 0.5];
    let (sample, rep) = analyse_holonomy(&prod, &p, 60, 7).unwrap();
    for a in &sample.algebra {
        assert!(a.view((0, 2), (2, 2)).amax() < 1e-6);
        assert!(a.view((2, 0), (2, 2)).amax() < 1e-6);
    }
    assert_eq!(rep.classification, Classification::Decomposable);
    let blocks: Vec<_> = rep.subspaces.iter().filter(|s| s.dim == 2 && s.is_nondegenerate()).collect();
    assert!(blocks.len() >= 2);
}

#[test]
fn horosphere_cone_has_invariant_null_line() {
    let cone = horosphere_cone();
    let p = [1.5, 0.2, 1.1, 0.4];
    let (sample, rep) = analyse_holonomy(&cone, &p, 60, 9).unwrap();
    assert!(sample.algebra_defect() < 1e-6);
    let e = (-p[1]).exp();
    let v = [e, e / p[0], 0.0, 0.0];
    assert!(annihilation_defect(&sample, &v) < 1e-6);
    let line = rep
        .subspaces
        .iter()
        .find(|s| s.dim == 1 && s.is_totally_null())
        .expect("null line");
    let vn = DVector::from_column_slice(&v).normalize();
    let b = line.basis.column(0);
    assert!((b.dot(&vn).abs() - 1.0).abs() < 1e-6);
    assert_eq!(rep.classification, Classification::IndecomposableWithNullSubspace);

    let group = holonomy_sample(&cone, &p, 20, 9).unwrap();
    assert!(fixed_vector_defect(&group, &v) < 1e-5);
}

#[test]
fn doubly_warped_cone_is_decomposable() {
    let cone = doubly_warped_cone();
    let p = [1.2, 0.7, 0.3, 0.2, 0.1];
    let (sample, rep) = analyse_holonomy(&cone, &p, 60, 13).unwrap();
    assert!(sample.algebra_defect() < 1e-6);
    assert_eq!(rep.classification, Classification::Decomposable);
    let dims: Vec<usize> = rep
        .subspaces
        .iter()
        .filter(|s| s.is_nondegenerate())
        .map(|s| s.dim)
        .collect();
    assert!(dims.contains(&2) && dims.contains(&3), "{dims:?}");
}

#[test]
fn lorentzian_cone_over_sphere_grid_oracle() {
    // ε = −1 cone over a round 2-sphere: a 3-dim Lorentzian space form, so(1,2) acts irreducibly
    let cone = build_cone(&ConeSpec::new(-1.0, stock::round_sphere()).unwrap()).unwrap();
    let (sample, rep) = analyse_holonomy(&cone, &[1.3, 1.0, 0.2], 40, 21).unwrap();
    assert_eq!(rep.classification, Classification::Irreducible);
    assert!(projective_grid_min_defect(&sample.algebra, 3) > 1e-3);
}

#[test]
fn sampling_is_deterministic() {
    let a = holonomy_sample(&stock::round_sphere(), &[1.2, 0.3], 10, 99).unwrap();
    let b = holonomy_sample(&stock::round_sphere(), &[1.2, 0.3], 10, 99).unwrap();
    assert_eq!(a.elements, b.elements);
}
