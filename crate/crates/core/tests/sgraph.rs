mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use sgdom_core::linalg::{self, CMat};
use sgdom_core::lti::Frequency;
use sgdom_core::sgraph::{
    eig_containment, sg_cloud, sg_distance, sg_inverse_cloud, sg_point, sg_stats,
    unitary_invariance_check, CloudConfig,
};

fn cfg(samples: usize) -> CloudConfig {
    CloudConfig {
        samples,
        ..CloudConfig::default()
    }
}

#[test]
fn scaling_moves_points_radially() {
    let mut rng = rng(1);
    for _ in 0..10 {
        let m = rng.gen_range(2..=4);
        let a = complex_matrix(&mut rng, m);
        let tau = rng.gen_range(0.05..1.0);
        let c = CloudConfig {
            refine_iters: 0,
            ..cfg(300)
        };
        let base = sg_cloud(&a, &c);
        let scaled = sg_cloud(&(&a * Complex64::new(tau, 0.0)), &c);
        assert_eq!(base.len(), scaled.len());
        for (p, q) in base.points().iter().zip(scaled.points()) {
            assert!((p.z() * tau - q.z()).norm() <= 1e-12 * p.gain().max(1.0));
            assert!((p.phase() - q.phase()).abs() <= 1e-12);
        }
        let shortcut = base.scaled(tau);
        for (p, q) in shortcut.points().iter().zip(scaled.points()) {
            assert!((p.z() - q.z()).norm() <= 1e-12 * p.gain().max(1.0));
        }
    }
}

#[test]
fn inverse_points_are_reciprocal_conjugates() {
    let mut rng = rng(2);
    for _ in 0..10 {
        let m = rng.gen_range(2..=4);
        let a = complex_matrix(&mut rng, m);
        let c = cfg(300);
        let fwd = sg_cloud(&a, &c);
        let inv = sg_inverse_cloud(&a, &c);
        // sampled witnesses are shared
        for (p, q) in fwd.points().iter().zip(inv.points()).take(300) {
            assert_eq!(p.witness(), q.witness());
        }
        for q in inv.points() {
            let p = sg_point(&a, q.witness()).unwrap();
            let expected = Complex64::new(1.0, 0.0) / p.z().conj();
            assert!((q.z() - expected).norm() <= 1e-12 * expected.norm().max(1.0));
        }
    }
}

#[test]
fn gains_stay_within_singular_values() {
    let mut rng = rng(3);
    for _ in 0..20 {
        let m = rng.gen_range(2..=5);
        let a = complex_matrix(&mut rng, m);
        let s = linalg::singular_values(&a);
        let cl = sg_cloud(&a, &cfg(2000));
        for p in cl.points() {
            assert!(p.gain() <= s[0] * (1.0 + 1e-12) && p.gain() >= s[m - 1] * (1.0 - 1e-12));
        }
        assert!(cl.max_modulus() >= s[0] - 1e-4);
    }
}

#[test]
fn accretive_matrices_stay_in_the_right_half_plane() {
    let mut rng = rng(4);
    for _ in 0..20 {
        let m = rng.gen_range(2..=4);
        let b = complex_matrix(&mut rng, m);
        let skew = complex_matrix(&mut rng, m);
        // B* B is positive semidefinite; add a skew-Hermitian part
        let a = b.adjoint() * &b + (&skew - skew.adjoint()) * Complex64::new(0.5, 0.0);
        let cl = sg_cloud(&a, &cfg(500));
        assert!(cl.min_re() >= -1e-12 * linalg::spectral_norm(&a).max(1.0));
        assert!(sg_stats(&a).psi <= std::f64::consts::FRAC_PI_2 + 1e-9);
    }
    // a matrix with an indefinite Hermitian part reaches the left half-plane
    let d = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
    ]));
    assert!(sg_cloud(&d, &cfg(200)).min_re() < -0.5);
}

#[test]
fn conjugate_matrix_has_the_same_graph() {
    let mut rng = rng(5);
    for _ in 0..10 {
        let m = rng.gen_range(2..=4);
        let a = complex_matrix(&mut rng, m);
        let ac = a.map(|z| z.conj());
        for _ in 0..30 {
            let x = unit_vector(&mut rng, m);
            let p = sg_point(&a, &x).unwrap();
            let q = sg_point(&ac, &x.map(|z| z.conj())).unwrap();
            assert!((p.z() - q.z()).norm() <= 1e-12 * p.gain().max(1.0));
        }
    }
}

#[test]
fn eigenvalues_lie_in_the_cloud() {
    let mut rng = rng(6);
    for _ in 0..60 {
        let m = rng.gen_range(2..=6);
        let a = complex_matrix(&mut rng, m);
        assert!(eig_containment(&a, &cfg(200), 1e-8).unwrap());
    }
}

#[test]
fn separated_graphs_imply_invertible_return_difference() {
    let mut rng = rng(7);
    let mut accepted = 0;
    let mut min_det = f64::INFINITY;
    while accepted < 100 {
        let m = rng.gen_range(2..=4);
        let sa = 10f64.powf(rng.gen_range(-1.3..0.3));
        let sb = 10f64.powf(rng.gen_range(-1.3..0.3));
        let a = complex_matrix(&mut rng, m) * Complex64::new(sa, 0.0);
        let b = complex_matrix(&mut rng, m) * Complex64::new(sb, 0.0);
        let d = sg_distance(
            &sg_cloud(&a, &cfg(1000)),
            &sg_inverse_cloud(&b, &cfg(1000)),
            true,
        )
        .unwrap();
        if d.distance <= 0.05 {
            continue;
        }
        let det = linalg::det_abs(&(CMat::identity(m, m) - &a * &b));
        assert!(det > 0.0);
        min_det = min_det.min(det);
        accepted += 1;
    }
    assert!(min_det > 1e-6, "{min_det}");
}

#[test]
fn siso_cloud_is_the_nyquist_point() {
    let mut rng = rng(8);
    for _ in 0..20 {
        let num: Vec<f64> = (0..3).map(|_| normal(&mut rng)).collect();
        let den = vec![rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0), 1.0];
        let g = siso(&num, &den);
        for k in 0..50 {
            let w = Frequency::Finite(10f64.powf(-2.0 + 4.0 * k as f64 / 49.0));
            let v = g.eval(w).unwrap()[(0, 0)];
            let cl = sg_cloud(&g.eval(w).unwrap(), &CloudConfig::default());
            assert_eq!(cl.len(), 1);
            let p = &cl.points()[0];
            let (zp, zm) = (p.z_plus(), p.z_minus());
            let err = (zp - v).norm().min((zm - v).norm());
            assert!(err <= 1e-12);
            assert!(((zp - zm.conj()).norm()) == 0.0);
        }
    }
}

#[test]
fn unitary_similarity_preserves_the_graph() {
    let mut rng = rng(9);
    for _ in 0..15 {
        let m = rng.gen_range(2..=4);
        let a = complex_matrix(&mut rng, m);
        let u = unitary(&mut rng, m);
        assert!(unitary_invariance_check(&a, &u, &cfg(300)).unwrap());
        // Schur form has the same statistics
        let (q, t) = linalg::complex_schur(&a).unwrap();
        let (sa, st) = (sg_stats(&a), sg_stats(&t));
        assert!((sa.sigma_max - st.sigma_max).abs() < 1e-8);
        assert!((sa.sigma_min - st.sigma_min).abs() < 1e-8);
        assert!((sa.psi - st.psi).abs() < 1e-8);
        assert!((&q * &t * q.adjoint() - &a).norm() < 1e-8 * a.norm());
    }
}
