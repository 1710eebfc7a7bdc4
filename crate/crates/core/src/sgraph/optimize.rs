//! Derivative-free descent on products of complex unit spheres.

use num_complex::Complex64;

use crate::linalg::CVec;

/// Finite-difference step.
pub(crate) const FD_STEP: f64 = 1e-6;
const MIN_STEP: f64 = 1e-12;
const FIRST_STEP: f64 = 0.1;

pub(crate) fn normalize(x: &CVec) -> Option<CVec> {
    let n = x.norm();
    if n > 0.0 && n.is_finite() {
        Some(x / Complex64::new(n, 0.0))
    } else {
        None
    }
}

fn normalize_all(blocks: &[CVec]) -> Option<Vec<CVec>> {
    blocks.iter().map(normalize).collect()
}

/// Minimizes `f` over tuples of unit vectors, starting from `start`.
///
/// The gradient of `f` composed with block normalization is taken by central
/// differences; steps follow the normalized negative gradient, double after
/// an improvement and halve after a failure. Stops after `iters` gradient
/// evaluations or once the step falls below `1e-12`. Non-finite objective
/// values count as failures.
pub(crate) fn minimize_on_spheres(
    f: impl Fn(&[CVec]) -> f64,
    start: Vec<CVec>,
    iters: usize,
) -> (Vec<CVec>, f64) {
    let Some(mut x) = normalize_all(&start) else {
        return (start, f64::INFINITY);
    };
    let eval = |blocks: &[CVec]| -> f64 {
        match normalize_all(blocks) {
            Some(b) => {
                let v = f(&b);
                if v.is_finite() {
                    v
                } else {
                    f64::INFINITY
                }
            }
            None => f64::INFINITY,
        }
    };
    let mut fx = eval(&x);
    if !fx.is_finite() {
        return (x, fx);
    }
    let mut step = FIRST_STEP;
    let dims: Vec<usize> = x.iter().map(|b| b.len()).collect();
    for _ in 0..iters {
        let mut grad: Vec<CVec> = dims.iter().map(|&d| CVec::zeros(d)).collect();
        let mut probe = x.clone();
        for (bi, &d) in dims.iter().enumerate() {
            for k in 0..d {
                for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                    let orig = probe[bi][k];
                    probe[bi][k] = orig + unit * FD_STEP;
                    let fp = eval(&probe);
                    probe[bi][k] = orig - unit * FD_STEP;
                    let fm = eval(&probe);
                    probe[bi][k] = orig;
                    let g = if fp.is_finite() && fm.is_finite() {
                        (fp - fm) / (2.0 * FD_STEP)
                    } else {
                        0.0
                    };
                    grad[bi][k] += unit * g;
                }
            }
        }
        let gnorm = grad.iter().map(|g| g.norm_squared()).sum::<f64>().sqrt();
        if gnorm == 0.0 || !gnorm.is_finite() {
            break;
        }
        loop {
            let trial: Vec<CVec> = x
                .iter()
                .zip(&grad)
                .map(|(xb, gb)| xb - gb * Complex64::new(step / gnorm, 0.0))
                .collect();
            let Some(trial) = normalize_all(&trial) else {
                step *= 0.5;
                if step < MIN_STEP {
                    break;
                }
                continue;
            };
            let ft = eval(&trial);
            if ft < fx {
                x = trial;
                fx = ft;
                step = (step * 2.0).min(1.0);
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                break;
            }
        }
        if step < MIN_STEP {
            break;
        }
    }
    (x, fx)
}
