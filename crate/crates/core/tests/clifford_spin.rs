use conelab::clifford_spin::*;
use conelab::GeomError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn signatures() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 1..=6 {
        for r in 0..=n {
            out.push((r, n - r));
        }
    }
    out
}

#[test]
fn clifford_relation_and_adjoint_sign() {
    for (r, s) in signatures() {
        let rep = build_rep(r, s).unwrap();
        assert_eq!(rep.spinor_dim(), 1 << ((r + s) / 2));
        assert!(rep.clifford_residual() < 1e-12, "({r},{s})");
        assert!(rep.adjoint_residual() < 1e-12, "({r},{s})");
        let h = &rep.hermitian_form;
        assert!((h - h.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }
}

#[test]
fn hermitian_form_signature() {
    for (r, s) in signatures() {
        let rep = build_rep(r, s).unwrap();
        let (pos, neg) = rep.form_signature();
        assert_eq!(pos + neg, rep.spinor_dim());
        if r == 0 {
            assert_eq!(neg, 0, "({r},{s})");
        } else if !(r == r + s && r % 2 == 1) {
            assert_eq!(pos, neg, "({r},{s})");
        }
    }
}

#[test]
fn current_is_real_in_every_signature() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (r, s) in signatures() {
        let rep = build_rep(r, s).unwrap();
        for _ in 0..20 {
            let phi = rep.random_spinor(&mut rng);
            assert!(dirac_current(&rep, &phi).is_ok(), "({r},{s})");
        }
    }
}

#[test]
fn riemannian_current_is_a_full_vector() {
    let rep = build_rep(0, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let phi = rep.random_spinor(&mut rng);
    let v = dirac_current(&rep, &phi).unwrap();
    assert_eq!(v.len(), 3);
}

#[test]
fn lorentzian_current_is_causal() {
    for n in 2..=6 {
        let rep = build_rep(1, n - 1).unwrap();
        let report = causality_check(&rep, 10_000, 42).unwrap();
        assert!(report.max_norm <= 1e-10, "n={n}: {}", report.max_norm);
        assert!(report.identity_residual < 1e-9, "n={n}: {}", report.identity_residual);
        assert!(report.orthogonality_residual < 1e-9, "n={n}");
        assert!(report.form_min_eigenvalue > 0.0);
    }
}

#[test]
fn lorentzian_current_is_timelike_somewhere() {
    let rep = build_rep(1, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let phi = rep.random_spinor(&mut rng);
    let v = dirac_current(&rep, &phi).unwrap();
    assert!(minkowski_norm(&rep, &v) < -1e-6);
    // independent oracle: V^0 = ⟨T φ, φ⟩ is the positive form evaluated on φ
    let t_phi = &rep.gammas[0] * &phi;
    let form = rep.inner(&t_phi, &phi).re;
    assert!((v[0].abs() - form).abs() < 1e-12);
}

#[test]
fn causality_check_needs_lorentzian_signature() {
    let rep = build_rep(2, 2).unwrap();
    assert!(matches!(causality_check(&rep, 10, 0), Err(GeomError::InvalidInput(_))));
}

#[test]
fn spin_rotations_act_equivariantly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (r, s) in [(1, 3), (0, 4), (1, 4), (2, 3)] {
        let rep = build_rep(r, s).unwrap();
        let n = r + s;
        for theta in [0.3, 1.1, 2.9] {
            let (a, b) = (n - 2, n - 1);
            let spin = spin_rotation(&rep, a, b, theta);
            let lambda = vector_action(&rep, &spin).unwrap();
            // Λ is the plane rotation by ±θ and fixes the other directions
            assert!((lambda[(a, a)] - theta.cos()).abs() < 1e-12);
            assert!((lambda[(a, b)].abs() - theta.sin().abs()).abs() < 1e-12);
            for k in 0..a {
                assert!((lambda[(k, k)] - 1.0).abs() < 1e-12);
            }
            let phi = rep.random_spinor(&mut rng);
            let res = spin_equivariance_residual(&rep, a, b, theta, &phi).unwrap();
            assert!(res < 1e-8, "({r},{s}) θ={theta}: {res}");
        }
    }
}

#[test]
fn dimension_cap() {
    assert!(build_rep(0, 10).is_ok());
    assert!(matches!(
        build_rep(1, 10),
        Err(GeomError::DimensionTooLarge { dim: 11, max: 10 })
    ));
}

#[test]
fn killing_warps() {
    // cosh with ε = −1 and λ̂ = ½
    let r = killing_warp_check(|s| s.cosh(), -1.0, 0.25, -2.0, 2.0);
    assert!(r.ode_residual < 1e-10);
    assert!(r.constant);
    assert!(r.profile.iter().all(|p| (p.1 - 0.25).abs() < 1e-10));

    // eˢ gives a parallel spinor
    let r = killing_warp_check(|s| s.exp(), -1.0, 0.25, -2.0, 2.0);
    assert!(r.ode_residual < 1e-10);
    assert!(r.constant && r.profile.iter().all(|p| p.1.abs() < 1e-10));

    // a product
    let r = killing_warp_check(|s| s * 0.0 + 1.0, -1.0, 0.0, -2.0, 2.0);
    assert!(r.ode_residual == 0.0 && r.constant);
    assert!(r.profile.iter().all(|p| p.1 == 0.0));

    // sinh solves the ODE with λ² ≡ −¼
    let r = killing_warp_check(|s| s.sinh(), -1.0, 0.25, -2.0, 2.0);
    assert!(r.constant && (r.profile[0].1 + 0.25).abs() < 1e-10);

    // cos with ε = +1, λ̂ = ½ on a Riemannian cylinder
    let r = killing_warp_check(|s| s.cos(), 1.0, 0.25, -2.0, 2.0);
    assert!(r.ode_residual < 1e-10 && r.constant);
}

#[test]
fn non_solution_is_flagged() {
    let r = killing_warp_check(|s| s.cosh(), 1.0, 0.25, -2.0, 2.0);
    assert!(r.ode_residual > 1.0);
    assert!(!r.constant);
    assert!(r.spread > 1e-3);
}
