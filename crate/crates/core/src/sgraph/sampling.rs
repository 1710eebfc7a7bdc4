use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::CVec;
use num_complex::Complex64;

/// Deterministic source of unit vectors keyed by `(seed, stream)`.
///
/// Every vector consumes the same number of words from the ChaCha stream, so
/// the first `k` vectors do not depend on how many are drawn in total.
pub(crate) struct UnitSampler {
    rng: ChaCha8Rng,
    m: usize,
}

impl UnitSampler {
    pub(crate) fn new(seed: u64, stream: u64, m: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng, m }
    }

    /// Complex normal vector (Box-Muller), normalized to unit length.
    pub(crate) fn next_unit(&mut self) -> CVec {
        let mut v = CVec::zeros(self.m);
        for k in 0..self.m {
            let u1: f64 = 1.0 - self.rng.gen::<f64>();
            let u2: f64 = self.rng.gen::<f64>();
            let r = (-2.0 * u1.ln()).sqrt();
            let t = std::f64::consts::TAU * u2;
            v[k] = Complex64::new(r * t.cos(), r * t.sin());
        }
        let n = v.norm();
        if n > 0.0 {
            v / Complex64::new(n, 0.0)
        } else {
            let mut e = CVec::zeros(self.m);
            e[0] = Complex64::new(1.0, 0.0);
            e
        }
    }
}
