use num_complex::Complex64;

use super::optimize::minimize_on_spheres;
use super::{SGCloud, SgError};
use crate::linalg::CVec;

/// Descent steps used when refining a distance.
pub(crate) const DISTANCE_REFINE_ITERS: usize = 200;

/// Static 2-d tree over complex points for nearest-neighbour queries.
#[derive(Debug, Clone)]
pub struct PointIndex {
    nodes: Vec<(Complex64, usize)>,
}

impl PointIndex {
    pub fn new(points: impl IntoIterator<Item = Complex64>) -> Self {
        let mut nodes: Vec<(Complex64, usize)> = points
            .into_iter()
            .enumerate()
            .map(|(i, z)| (z, i))
            .collect();
        build(&mut nodes, 0);
        Self { nodes }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Original index and distance of the point closest to `q`.
    pub fn nearest(&self, q: Complex64) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, self.nodes.len(), 0, q, &mut best);
        Some((best.0, best.1.sqrt()))
    }

    fn search(&self, lo: usize, hi: usize, depth: usize, q: Complex64, best: &mut (usize, f64)) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let (z, idx) = self.nodes[mid];
        let d2 = (z - q).norm_sqr();
        if d2 < best.1 || (d2 == best.1 && idx < best.0) {
            *best = (idx, d2);
        }
        let diff = if depth.is_multiple_of(2) {
            q.re - z.re
        } else {
            q.im - z.im
        };
        let (near, far) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, depth + 1, q, best);
        if diff * diff <= best.1 {
            self.search(far.0, far.1, depth + 1, q, best);
        }
    }
}

fn build(nodes: &mut [(Complex64, usize)], depth: usize) {
    if nodes.len() <= 1 {
        return;
    }
    let mid = nodes.len() / 2;
    let key = |p: &(Complex64, usize)| {
        if depth.is_multiple_of(2) {
            p.0.re
        } else {
            p.0.im
        }
    };
    nodes.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)).then(a.1.cmp(&b.1)));
    let (left, right) = nodes.split_at_mut(mid);
    build(left, depth + 1);
    build(&mut right[1..], depth + 1);
}

/// Closest pair between two clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceResult {
    pub distance: f64,
    pub z1: Complex64,
    pub z2: Complex64,
    pub w1: CVec,
    pub w2: CVec,
    pub refined: bool,
}

/// Minimum of `|z1 - z2|` over both clouds and both conjugate branches.
///
/// Both clouds are symmetric about the real axis, so the minimum is attained
/// between upper-branch points. With `refine`, a joint descent over the two
/// witness spheres starts from the closest sampled pair.
pub fn sg_distance(c1: &SGCloud, c2: &SGCloud, refine: bool) -> Result<DistanceResult, SgError> {
    if c1.is_empty() || c2.is_empty() {
        return Err(SgError::EmptyCloud);
    }
    let index = PointIndex::new(c2.points().iter().map(|p| p.z()));
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, p) in c1.points().iter().enumerate() {
        let (j, d) = index.nearest(p.z()).expect("nonempty");
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((i, j, d));
        }
    }
    let (i, j, d) = best.expect("nonempty");
    let (p1, p2) = (&c1.points()[i], &c2.points()[j]);
    let mut out = DistanceResult {
        distance: d,
        z1: p1.z(),
        z2: p2.z(),
        w1: p1.witness().clone(),
        w2: p2.witness().clone(),
        refined: false,
    };
    if refine {
        let (w1, w2, d) = refine_pair(c1, c2, &out.w1, &out.w2, DISTANCE_REFINE_ITERS);
        if d < out.distance {
            out.z1 = c1.point_at(&w1).expect("finite objective");
            out.z2 = c2.point_at(&w2).expect("finite objective");
            out.distance = d;
            out.w1 = w1;
            out.w2 = w2;
        }
        out.refined = true;
    }
    Ok(out)
}

/// Joint descent of `|c1(x1) - c2(x2)|` from the given witnesses.
pub(crate) fn refine_pair(
    c1: &SGCloud,
    c2: &SGCloud,
    w1: &CVec,
    w2: &CVec,
    iters: usize,
) -> (CVec, CVec, f64) {
    let f = |b: &[CVec]| match (c1.point_at(&b[0]), c2.point_at(&b[1])) {
        (Some(a), Some(b)) => (a - b).norm(),
        _ => f64::NAN,
    };
    let (x, v) = minimize_on_spheres(f, vec![w1.clone(), w2.clone()], iters);
    let mut it = x.into_iter();
    (
        it.next().expect("two blocks"),
        it.next().expect("two blocks"),
        v,
    )
}
