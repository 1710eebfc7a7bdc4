use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, SweepConfig};
use crate::linalg::{self, CMat, CVec};
use crate::lti::{FeedbackLoop, Frequency};
use crate::sgraph::{
    refine_pair, sg_cloud, sg_inverse_cloud, upper_point, CloudKind, PointIndex, SGCloud,
    DISTANCE_REFINE_ITERS, EXCLUSION_TOL,
};

/// Smallest loop scaling an eigen-witness probe may use.
const TAU_FLOOR: f64 = 1e-6;
const GOLDEN_ITERS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HonestyLabel {
    /// Distances measured between sampled clouds.
    SampledSound,
    /// Separation holds with a margin within `10 eps` of the threshold.
    Marginal,
}

impl fmt::Display for HonestyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HonestyLabel::SampledSound => "sampled-sound",
            HonestyLabel::Marginal => "marginal",
        })
    }
}

/// How the closest pair was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairSource {
    Cloud,
    /// Witness pair built from an eigenvector of `P(jw) C(jw)`.
    EigenWitness,
    /// Joint descent started from a cloud or eigen-witness pair.
    Refined,
}

/// Closest pair between `SG(tau P(jw))` and `SG^dagger(C(jw))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub omega: Frequency,
    pub tau: f64,
    pub distance: f64,
    /// Point of `SG(tau P(jw))`.
    pub z1: Complex64,
    /// Point of `SG^dagger(C(jw))`.
    pub z2: Complex64,
    /// Unit input of `P(jw)` producing `z1`.
    pub w1: Vec<Complex64>,
    /// Unit output of the inverse graph of `C(jw)` producing `z2`.
    pub w2: Vec<Complex64>,
    pub source: PairSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub holds: bool,
    /// Smallest distance found; infinite when `C` vanishes on the grid.
    #[serde(with = "crate::serde_float")]
    pub margin: f64,
    pub worst: Option<WorstCase>,
    pub label: HonestyLabel,
    /// `(w, tau)` cloud pairs measured.
    pub pairs_evaluated: usize,
    /// `(w, tau)` cloud pairs skipped by the radial bound.
    pub pairs_pruned: usize,
    /// Frequencies added around local minima of the eigen-witness distance.
    pub extra_omegas: Vec<Frequency>,
}

#[derive(Debug, Clone)]
struct Hit {
    key: usize,
    omega: Frequency,
    tau: f64,
    d: f64,
    z1: Complex64,
    z2: Complex64,
    w1: CVec,
    w2: CVec,
    source: PairSource,
}

impl Hit {
    fn order(&self, other: &Hit) -> std::cmp::Ordering {
        self.d
            .total_cmp(&other.d)
            .then(self.key.cmp(&other.key))
            .then(self.tau.total_cmp(&other.tau))
    }

    fn into_worst(self) -> WorstCase {
        WorstCase {
            omega: self.omega,
            tau: self.tau,
            distance: self.d,
            z1: self.z1,
            z2: self.z2,
            w1: self.w1.iter().copied().collect(),
            w2: self.w2.iter().copied().collect(),
            source: self.source,
        }
    }
}

#[derive(Debug, Default)]
struct FreqEval {
    hits: Vec<Hit>,
    evaluated: usize,
    pruned: usize,
}

fn eval_pair(l: &FeedbackLoop, w: Frequency) -> Result<(CMat, CMat), AnalysisError> {
    Ok((l.p().eval(w)?, l.c().eval(w)?))
}

/// Pairs from eigenvectors of `P C`.
///
/// If `(I - tau P C) v = 0` and `u = C v`, then `SG(tau P)` at `u` and
/// `SG^dagger(C)` at `v` coincide. For every eigenvector the scaling is
/// chosen to minimize the distance between the two witness points, so the
/// distance vanishes exactly when `P C` has a real eigenvalue `>= 1`.
fn eigen_hits(pm: &CMat, cm: &CMat, omega: Frequency, key: usize) -> Vec<Hit> {
    let Ok(pairs) = linalg::complex_eig(&(pm * cm)) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for (_, v) in pairs {
        let u = cm * &v;
        let nu = u.norm();
        if !(nu > EXCLUSION_TOL) {
            continue;
        }
        let u = u / Complex64::new(nu, 0.0);
        let (Some(z1), Some(zc)) = (upper_point(pm, &u), upper_point(cm, &v)) else {
            continue;
        };
        let z2 = zc / zc.norm_sqr();
        let tau = ((z2 * z1.conj()).re / z1.norm_sqr()).clamp(TAU_FLOOR, 1.0);
        out.push(Hit {
            key,
            omega,
            tau,
            d: (z1 * tau - z2).norm(),
            z1: z1 * tau,
            z2,
            w1: u,
            w2: v,
            source: PairSource::EigenWitness,
        });
    }
    out
}

/// Indices of the points that remain after merging points closer than
/// `1e-14` relative to the cloud size. Keeps the nearest-neighbour search
/// fast on clouds that collapse to a few points.
fn distinct_points(cloud: &SGCloud) -> Vec<usize> {
    let h = 1e-14 * cloud.max_modulus().max(1.0);
    let mut keys: Vec<((i64, i64), usize)> = cloud
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            (
                ((p.z().re / h).round() as i64, (p.z().im / h).round() as i64),
                i,
            )
        })
        .collect();
    keys.sort_unstable();
    keys.dedup_by_key(|k| k.0);
    let mut idx: Vec<usize> = keys.into_iter().map(|k| k.1).collect();
    idx.sort_unstable();
    idx
}

fn eval_frequency(
    l: &FeedbackLoop,
    cfg: &SweepConfig,
    omega: Frequency,
    key: usize,
) -> Result<FreqEval, AnalysisError> {
    let (pm, cm) = eval_pair(l, omega)?;
    let mut out = FreqEval {
        hits: eigen_hits(&pm, &cm, omega, key),
        ..FreqEval::default()
    };
    let mut ccfg = cfg.cloud.clone();
    ccfg.stream = 4 * key as u64;
    let cp = sg_cloud(&pm, &ccfg);
    ccfg.stream = 4 * key as u64 + 1;
    let cc = sg_inverse_cloud(&cm, &ccfg);
    if cc.is_empty() {
        // C(jw) = 0: the inverse graph has no finite points
        return Ok(out);
    }
    let c_idx = distinct_points(&cc);
    let index = PointIndex::new(c_idx.iter().map(|&j| cc.points()[j].z()));
    let m = pm.nrows();

    if cp.is_empty() {
        // P(jw) = 0 is treated as the single point 0
        let (j, d) = index.nearest(Complex64::new(0.0, 0.0)).expect("nonempty");
        let pc = &cc.points()[c_idx[j]];
        let mut e1 = CVec::zeros(m);
        e1[0] = Complex64::new(1.0, 0.0);
        out.hits.push(Hit {
            key,
            omega,
            tau: 1.0,
            d,
            z1: Complex64::new(0.0, 0.0),
            z2: pc.z(),
            w1: e1,
            w2: pc.witness().clone(),
            source: PairSource::Cloud,
        });
        out.evaluated = cfg.taus.len();
        return Ok(out);
    }

    let p_idx = distinct_points(&cp);
    let (pmin, pmax) = (cp.min_modulus(), cp.max_modulus());
    let (cmin, cmax) = (cc.min_modulus(), cc.max_modulus());
    let bound = |tau: f64| (cmin - tau * pmax).max(tau * pmin - cmax).max(0.0);
    let mut order: Vec<f64> = cfg.taus.clone();
    order.sort_by(|a, b| bound(*a).total_cmp(&bound(*b)).then(a.total_cmp(b)));

    let mut best = out.hits.iter().map(|h| h.d).fold(f64::INFINITY, f64::min);
    for tau in order {
        if bound(tau) >= best {
            out.pruned += 1;
            continue;
        }
        out.evaluated += 1;
        let mut local: Option<(usize, usize, f64)> = None;
        for &i in &p_idx {
            let (j, d) = index.nearest(cp.points()[i].z() * tau).expect("nonempty");
            if local.is_none_or(|(_, _, ld)| d < ld) {
                local = Some((i, j, d));
            }
        }
        let (i, j, d) = local.expect("nonempty");
        let (a, b) = (&cp.points()[i], &cc.points()[c_idx[j]]);
        out.hits.push(Hit {
            key,
            omega,
            tau,
            d,
            z1: a.z() * tau,
            z2: b.z(),
            w1: a.witness().clone(),
            w2: b.witness().clone(),
            source: PairSource::Cloud,
        });
        best = best.min(d);
    }
    Ok(out)
}

fn eigen_distance(l: &FeedbackLoop, w: f64) -> f64 {
    match eval_pair(l, Frequency::Finite(w)) {
        Ok((pm, cm)) => eigen_hits(&pm, &cm, Frequency::Finite(w), 0)
            .iter()
            .map(|h| h.d)
            .fold(f64::INFINITY, f64::min),
        Err(_) => f64::INFINITY,
    }
}

/// Golden-section search for the minimum of the eigen-witness distance on
/// `[lo, hi]`, in log frequency when `lo > 0`.
fn golden_minimum(l: &FeedbackLoop, lo: f64, hi: f64) -> f64 {
    let log = lo > 0.0;
    let (mut a, mut b) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
    let to_w = |x: f64| if log { x.exp() } else { x };
    let f = |x: f64| eigen_distance(l, to_w(x));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    to_w(if fc <= fd { c } else { d })
}

/// Brackets around the smallest local minima of the eigen-witness distance
/// over the finite grid frequencies.
fn refinement_brackets(omegas: &[Frequency], evals: &[FreqEval], count: usize) -> Vec<(f64, f64)> {
    let finite: Vec<(usize, f64)> = omegas
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_infinite())
        .map(|(k, w)| (k, w.value()))
        .collect();
    if count == 0 || finite.len() < 2 {
        return Vec::new();
    }
    let e: Vec<f64> = finite
        .iter()
        .map(|&(k, _)| {
            evals[k]
                .hits
                .iter()
                .filter(|h| h.source == PairSource::EigenWitness)
                .map(|h| h.d)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let n = finite.len();
    let mut minima: Vec<(f64, usize)> = (0..n)
        .filter(|&i| e[i].is_finite())
        .filter(|&i| (i == 0 || e[i] <= e[i - 1]) && (i + 1 == n || e[i] <= e[i + 1]))
        .map(|i| (e[i], i))
        .collect();
    minima.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    minima
        .into_iter()
        .take(count)
        .map(|(_, i)| (finite[i.saturating_sub(1)].1, finite[(i + 1).min(n - 1)].1))
        .collect()
}

fn refine_hit(l: &FeedbackLoop, hit: &Hit) -> Result<Option<Hit>, AnalysisError> {
    if hit.z1 == Complex64::new(0.0, 0.0) {
        return Ok(None);
    }
    let (pm, cm) = eval_pair(l, hit.omega)?;
    let c1 = SGCloud::empty(&pm, CloudKind::Forward).scaled(hit.tau);
    let c2 = SGCloud::empty(&cm, CloudKind::Inverse);
    let (w1, w2, d) = refine_pair(&c1, &c2, &hit.w1, &hit.w2, DISTANCE_REFINE_ITERS);
    if !(d < hit.d) {
        return Ok(None);
    }
    let (Some(z1), Some(z2)) = (c1.point_at(&w1), c2.point_at(&w2)) else {
        return Ok(None);
    };
    Ok(Some(Hit {
        d,
        z1,
        z2,
        w1,
        w2,
        source: PairSource::Refined,
        ..hit.clone()
    }))
}

/// Checks that `SG(tau P(jw))` and `SG^dagger(C(jw))` are separated by more
/// than `eps` on the whole grid.
///
/// Per frequency both clouds are built once (random streams keyed by the
/// frequency index); each `tau` rescales the `P` cloud. Scalings whose radial
/// lower bound cannot beat the best distance so far are skipped. The closest
/// pairs are then refined by joint witness descent, and the frequency grid is
/// refined around the smallest local minima of the eigen-witness distance.
/// Every reported distance is attained by an actual pair of scaled-graph
/// points.
pub fn sweep_separation(l: &FeedbackLoop, cfg: &SweepConfig) -> Result<SweepResult, AnalysisError> {
    cfg.validate()?;
    let n = cfg.omegas.len();
    let evals: Vec<FreqEval> = (0..n)
        .into_par_iter()
        .map(|k| eval_frequency(l, cfg, cfg.omegas[k], k))
        .collect::<Result<_, _>>()?;

    let brackets = refinement_brackets(&cfg.omegas, &evals, cfg.omega_refine);
    let extra_omegas: Vec<Frequency> = brackets
        .par_iter()
        .map(|&(lo, hi)| Frequency::Finite(golden_minimum(l, lo, hi)))
        .collect();
    let extra: Vec<FreqEval> = extra_omegas
        .par_iter()
        .enumerate()
        .map(|(r, &w)| eval_frequency(l, cfg, w, n + r))
        .collect::<Result<_, _>>()?;

    let mut pairs_evaluated = 0;
    let mut pairs_pruned = 0;
    let mut hits: Vec<Hit> = Vec::new();
    for e in evals.into_iter().chain(extra) {
        pairs_evaluated += e.evaluated;
        pairs_pruned += e.pruned;
        hits.extend(e.hits);
    }
    hits.sort_by(|a, b| a.order(b));

    let mut seen: Vec<(usize, u64)> = Vec::new();
    let mut top: Vec<Hit> = Vec::new();
    for h in &hits {
        if top.len() >= cfg.refine_top_k {
            break;
        }
        let id = (h.key, h.tau.to_bits());
        if !seen.contains(&id) {
            seen.push(id);
            top.push(h.clone());
        }
    }
    let refined: Vec<Option<Hit>> = top
        .par_iter()
        .map(|h| refine_hit(l, h))
        .collect::<Result<_, _>>()?;
    let best = hits
        .into_iter()
        .take(1)
        .chain(refined.into_iter().flatten())
        .min_by(|a, b| a.order(b));

    let margin = best.as_ref().map_or(f64::INFINITY, |h| h.d);
    let holds = margin > cfg.eps;
    let label = if holds && margin <= 10.0 * cfg.eps {
        HonestyLabel::Marginal
    } else {
        HonestyLabel::SampledSound
    };
    Ok(SweepResult {
        holds,
        margin,
        worst: best.map(Hit::into_worst),
        label,
        pairs_evaluated,
        pairs_pruned,
        extra_omegas,
    })
}
