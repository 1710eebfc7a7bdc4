use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Polynomial, RatError};
use crate::linalg;

/// Safety factor on the expected splinter radius of a multiple root.
const SPLINTER_SAFETY: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Distinct roots with multiplicities, sorted by real then imaginary part.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RootMultiset {
    roots: Vec<Root>,
}

impl RootMultiset {
    pub fn new(mut roots: Vec<Root>) -> Self {
        roots.retain(|r| r.multiplicity > 0);
        roots.sort_by(|a, b| {
            a.value
                .re
                .total_cmp(&b.value.re)
                .then(a.value.im.total_cmp(&b.value.im))
        });
        Self { roots }
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Number of roots counted with multiplicity.
    pub fn total(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
            .collect()
    }

    pub fn count_where(&self, pred: impl Fn(Complex64) -> bool) -> usize {
        self.roots
            .iter()
            .filter(|r| pred(r.value))
            .map(|r| r.multiplicity)
            .sum()
    }
}

/// All complex roots of `p` as balanced companion-matrix eigenvalues,
/// clustered into multiple roots.
///
/// Roots closer than `tol` (relative to `max(1, |r|)`) are always merged.
/// Larger clusters are merged when their spread is consistent with the
/// rounding-induced splitting of a multiple root, judged from the Taylor
/// expansion of `p` at the cluster centroid.
pub fn poly_roots(p: &Polynomial, tol: f64) -> Result<RootMultiset, RatError> {
    let deg = p.degree().ok_or(RatError::UndefinedRoots)?;
    if deg == 0 {
        return Ok(RootMultiset::default());
    }
    let zeros = p.coeffs().iter().take_while(|&&c| c == 0.0).count();
    let rest = Polynomial::new(p.coeffs()[zeros..].to_vec());
    let raw = companion_eigenvalues(&rest)?;

    let bound = |c: Complex64, k: usize| splinter_radius(&rest, c, k);
    let mut roots = cluster_points(&raw, tol, bound);
    if zeros > 0 {
        let near_zero = roots.iter().position(|r| r.value.norm() <= tol);
        match near_zero {
            Some(i) => {
                roots[i].value = Complex64::new(0.0, 0.0);
                roots[i].multiplicity += zeros;
            }
            None => roots.push(Root {
                value: Complex64::new(0.0, 0.0),
                multiplicity: zeros,
            }),
        }
    }
    pair_conjugates(&mut roots);
    Ok(RootMultiset::new(roots))
}

fn companion_eigenvalues(p: &Polynomial) -> Result<Vec<Complex64>, RatError> {
    let n = p.degree().unwrap_or(0);
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = p.leading();
    let c = p.coeffs();
    if n == 1 {
        return Ok(vec![Complex64::new(-c[0] / lead, 0.0)]);
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = -c[n - 1 - j] / lead;
    }
    for i in 1..n {
        a[(i, i - 1)] = 1.0;
    }
    Ok(linalg::real_eigenvalues(&a)?)
}

fn splinter_radius(p: &Polynomial, c: Complex64, k: usize) -> f64 {
    let taylor = p.taylor_at(c);
    let tk = taylor.get(k).map(|z| z.norm()).unwrap_or(0.0);
    if tk == 0.0 {
        return f64::INFINITY;
    }
    let noise = SPLINTER_SAFETY * f64::EPSILON * p.eval_abs(c.norm());
    (noise / tk).powf(1.0 / k as f64)
}

fn centroid(points: &[Complex64]) -> Complex64 {
    let sum: Complex64 = points.iter().sum();
    sum / points.len() as f64
}

fn spread(points: &[Complex64], c: Complex64) -> f64 {
    points.iter().map(|p| (p - c).norm()).fold(0.0, f64::max)
}

/// Groups numerically computed roots (or eigenvalues) into multiple roots.
///
/// `spread_bound(centroid, k)` gives the largest spread a genuine k-fold root
/// may show after rounding.
pub(crate) fn cluster_points(
    points: &[Complex64],
    tol: f64,
    spread_bound: impl Fn(Complex64, usize) -> f64,
) -> Vec<super::Root> {
    let n = points.len();
    // mandatory merges: single linkage at the user tolerance
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let mut j = i;
        while parent[j] != r {
            let next = parent[j];
            parent[j] = r;
            j = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = 1.0f64.max(points[i].norm()).max(points[j].norm());
            if (points[i] - points[j]).norm() <= tol * scale {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Complex64>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(points[i]);
    }
    let mut clusters: Vec<(usize, Vec<Complex64>)> = groups.into_values().enumerate().collect();
    let mut next_id = clusters.len();
    let mut rejected: std::collections::HashSet<(usize, usize)> = Default::default();

    // agglomerative merging of multiple-root splinters
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            let ca = centroid(&clusters[a].1);
            for b in (a + 1)..clusters.len() {
                let key = (
                    clusters[a].0.min(clusters[b].0),
                    clusters[a].0.max(clusters[b].0),
                );
                if rejected.contains(&key) {
                    continue;
                }
                let d = (ca - centroid(&clusters[b].1)).norm();
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, a, b));
                }
            }
        }
        let Some((_, a, b)) = best else { break };
        let mut merged = clusters[a].1.clone();
        merged.extend_from_slice(&clusters[b].1);
        let c = centroid(&merged);
        let allowed = (tol * 1.0f64.max(c.norm())).max(spread_bound(c, merged.len()));
        if spread(&merged, c) <= allowed {
            let id = next_id;
            next_id += 1;
            clusters.remove(b);
            clusters.remove(a);
            clusters.push((id, merged));
        } else {
            let key = (
                clusters[a].0.min(clusters[b].0),
                clusters[a].0.max(clusters[b].0),
            );
            rejected.insert(key);
        }
    }

    clusters
        .into_iter()
        .map(|(_, pts)| super::Root {
            value: centroid(&pts),
            multiplicity: pts.len(),
        })
        .collect()
}

/// Makes a root list of a real polynomial (or real matrix) exactly
/// conjugate-symmetric: near-real roots are snapped onto the axis and complex
/// roots are paired with their mirror image.
pub(crate) fn pair_conjugates(roots: &mut [super::Root]) {
    let snap = |z: Complex64| 1e-12 * 1.0f64.max(z.norm());
    for r in roots.iter_mut() {
        if r.value.im.abs() <= snap(r.value) {
            r.value.im = 0.0;
        }
    }
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] || roots[i].value.im <= 0.0 {
            continue;
        }
        let target = roots[i].value.conj();
        let partner = (0..roots.len())
            .filter(|&j| {
                !used[j]
                    && j != i
                    && roots[j].value.im < 0.0
                    && roots[j].multiplicity == roots[i].multiplicity
            })
            .min_by(|&a, &b| {
                (roots[a].value - target)
                    .norm()
                    .total_cmp(&(roots[b].value - target).norm())
            });
        if let Some(j) = partner {
            let avg = (roots[i].value + roots[j].value.conj()) / 2.0;
            roots[i].value = avg;
            roots[j].value = avg.conj();
            used[i] = true;
            used[j] = true;
        }
    }
}
