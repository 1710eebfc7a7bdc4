mod common;

use common::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use sgdom_core::linalg::{self, CMat};
use sgdom_core::lti::{
    cancellation_check, closed_loop_dominance_oracle, det_char, dominance_index, tm_poles,
    FeedbackLoop, Frequency, TransferMatrix,
};
use sgdom_core::ratpoly::{RationalFunction, DEFAULT_TOL};

/// Random biquad with roots away from the imaginary axis.
fn biquad(rng: &mut rand_chacha::ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let den = if rng.gen_bool(0.5) {
        let a = rng.gen_range(0.3..2.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b = rng.gen_range(0.3..2.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        vec![a * b, -(a + b), 1.0]
    } else {
        let re = rng.gen_range(0.3..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let im = rng.gen_range(0.3..2.0);
        vec![re * re + im * im, -2.0 * re, 1.0]
    };
    let num = vec![normal(rng), normal(rng), 0.5 * normal(rng)];
    (num, den)
}

#[test]
fn oracle_matches_hand_assembled_characteristic_polynomial() {
    let mut rng = rng(101);
    let mut checked = 0;
    while checked < 50 {
        let (np, dp) = biquad(&mut rng);
        let (nc, dc) = biquad(&mut rng);
        let l = FeedbackLoop::new(siso(&np, &dp), siso(&nc, &dc)).unwrap();
        if !cancellation_check(&l, DEFAULT_TOL).unwrap() {
            continue;
        }
        let chi = poly_sub(&poly_mul(&dp, &dc), &poly_mul(&np, &nc));
        let Some(expected) = rhp_roots(&chi, 1e-6) else {
            continue;
        };
        let Ok(o) = closed_loop_dominance_oracle(&l) else {
            continue;
        };
        assert_eq!(o.p, expected, "P = {np:?}/{dp:?}, C = {nc:?}/{dc:?}");
        checked += 1;
    }
}

fn sorted_poles(v: Vec<Complex64>) -> Vec<Complex64> {
    let mut v = v;
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

#[test]
fn pole_routes_agree() {
    let mut rng = rng(202);
    let mut checked = 0;
    while checked < 20 {
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=4);
        let unstable = rng.gen_range(0..=n.min(2));
        let ft = rng.gen_bool(0.3);
        let ss = random_state_space(&mut rng, m, n, unstable, ft);
        let Ok(with_ss) = TransferMatrix::from_state_space(ss.clone(), DEFAULT_TOL) else {
            continue;
        };
        let bare = TransferMatrix::new(m, with_ss.entries().to_vec()).unwrap();
        let a = tm_poles(&with_ss, DEFAULT_TOL).unwrap();
        let b = tm_poles(&bare, DEFAULT_TOL).unwrap();
        let (ea, eb) = (
            sorted_poles(a.roots.expanded()),
            sorted_poles(b.roots.expanded()),
        );
        assert_eq!(ea.len(), eb.len(), "{ea:?} vs {eb:?}");
        // greedy matching within 1e-6
        let mut used = vec![false; eb.len()];
        for z in &ea {
            let k = (0..eb.len())
                .filter(|&k| !used[k])
                .min_by(|&i, &j| (eb[i] - z).norm().total_cmp(&(eb[j] - z).norm()))
                .unwrap();
            assert!((eb[k] - z).norm() < 1e-6, "{ea:?} vs {eb:?}");
            used[k] = true;
        }
        assert_eq!(a.n_orhp, unstable);
        assert_eq!(b.n_orhp, unstable);
        checked += 1;
    }
}

#[test]
fn determinant_matches_sampled_determinant() {
    let mut rng = rng(303);
    let mut checked = 0;
    while checked < 15 {
        let m = rng.gen_range(1..=3);
        let Some(rl) = random_loop(&mut rng, m) else {
            continue;
        };
        let phi = det_char(&rl.lp).unwrap();
        for _ in 0..10 {
            let s = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let (Ok(p), Ok(c), Ok(v)) = (rl.lp.p().eval_s(s), rl.lp.c().eval_s(s), phi.eval(s))
            else {
                continue;
            };
            let direct = (CMat::identity(m, m) - p * c).determinant();
            assert!(
                (v - direct).norm() <= 1e-8 * direct.norm().max(1.0),
                "m = {m}: {v} vs {direct}"
            );
        }
        checked += 1;
    }
}

#[test]
fn oracle_matches_closed_loop_state_matrix() {
    let mut rng = rng(404);
    let mut checked = 0;
    while checked < 40 {
        let m = rng.gen_range(1..=3);
        let Some(rl) = random_loop(&mut rng, m) else {
            continue;
        };
        let Some(expected) = closed_loop_rhp(&rl.p_ss, &rl.c_ss, 1e-6) else {
            continue;
        };
        let Ok(o) = closed_loop_dominance_oracle(&rl.lp) else {
            continue;
        };
        assert_eq!(o.p, expected, "m = {m}");
        checked += 1;
    }
}

#[test]
fn three_by_three_rotated_diagonal_is_two_dominant() {
    let d = vec![
        RationalFunction::from_coeffs(&[6.0, 3.0], &[1.0, 1.0, 1.0], DEFAULT_TOL).unwrap(),
        RationalFunction::from_coeffs(&[2.0, 2.0], &[-1.0, 1.0], DEFAULT_TOL).unwrap(),
        RationalFunction::from_coeffs(&[10.0, 1.0], &[-2.0, -2.0, 1.0], DEFAULT_TOL).unwrap(),
    ];
    let g = TransferMatrix::diag(d.clone()).unwrap();
    let poles = tm_poles(&g, DEFAULT_TOL).unwrap();
    assert_eq!(poles.n_orhp, 2);
    assert_eq!(poles.degree(), 5);

    // a constant real rotation leaves the pole structure unchanged
    let (c, s) = (0.6f64, 0.8f64);
    let u = DMatrix::from_row_slice(3, 3, &[c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]);
    let ut = TransferMatrix::constant(&u.transpose()).unwrap();
    let um = TransferMatrix::constant(&u).unwrap();
    let rotated = ut
        .mul(&g, DEFAULT_TOL)
        .unwrap()
        .mul(&um, DEFAULT_TOL)
        .unwrap();
    assert_eq!(dominance_index(&rotated).unwrap(), 2);
    assert_eq!(tm_poles(&rotated, DEFAULT_TOL).unwrap().degree(), 5);
    let w = Frequency::Finite(0.7);
    let a = rotated.eval(w).unwrap();
    let b = linalg::to_complex(&u.transpose()) * g.eval(w).unwrap() * linalg::to_complex(&u);
    assert!((a - b).norm() < 1e-12);
}
