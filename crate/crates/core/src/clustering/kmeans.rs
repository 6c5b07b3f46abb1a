//! k-means via Lloyd's algorithm with seeded restarts.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Centroid initialization strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// D²-weighted seeding.
    #[default]
    KMeansPlusPlus,
    /// `k` distinct points drawn uniformly.
    RandomPoints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    pub n_restarts: usize,
    pub seed: u64,
    pub init: Init,
}

impl KMeansConfig {
    pub fn new(k: usize) -> Self {
        KMeansConfig {
            k,
            max_iter: 300,
            tol: 1e-6,
            n_restarts: 10,
            seed: 0,
            init: Init::KMeansPlusPlus,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, n_restarts: usize) -> Self {
        self.n_restarts = n_restarts;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }
}

/// A fitted clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    /// `k` rows of dimension `d`.
    pub centroids: Vec<Vec<f64>>,
    /// Cluster of each training point, numbered from 1.
    pub labels: Vec<usize>,
    /// Sum of squared distances from each point to its centroid.
    pub inertia: f64,
    pub config: KMeansConfig,
    /// Whether clusters are numbered by ascending first centroid coordinate.
    pub ordered: bool,
    /// Lloyd iterations run by the winning restart.
    pub n_iter: usize,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }

    /// Training-point indices of each cluster, in cluster order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k()];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l - 1].push(i);
        }
        groups
    }
}

/// SplitMix64 finalizer, used to derive restart seeds as `mix(seed ^ r)`.
pub fn mix_seed(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid and the squared distance to it. Ties go to
/// the lowest index.
pub(crate) fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, sq_dist(point, &centroids[0]));
    for (j, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

pub(crate) fn validate_points(points: &[Vec<f64>]) -> Result<usize> {
    let d = points.first().map_or(0, Vec::len);
    if d == 0 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: 0,
        });
    }
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
    }
    Ok(d)
}

/// Outcome of one Lloyd run.
#[derive(Debug, Clone)]
pub(crate) struct LloydRun {
    pub centroids: Vec<Vec<f64>>,
    /// Zero-based.
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub n_iter: usize,
    pub trace: Vec<f64>,
}

struct Assignment {
    labels: Vec<usize>,
    dists: Vec<f64>,
    repaired: bool,
}

fn assign_and_repair(points: &[Vec<f64>], centroids: &mut [Vec<f64>]) -> Assignment {
    let k = centroids.len();
    let (mut labels, mut dists): (Vec<usize>, Vec<f64>) =
        points.iter().map(|p| nearest(p, centroids)).unzip();
    let mut counts = vec![0usize; k];
    for &l in &labels {
        counts[l] += 1;
    }
    let mut repaired = false;
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        // Reseed the empty cluster at the point farthest from its centroid,
        // taken from a cluster that can spare it.
        let mut donor: Option<usize> = None;
        for i in 0..points.len() {
            if counts[labels[i]] > 1 && donor.is_none_or(|b| dists[i] > dists[b]) {
                donor = Some(i);
            }
        }
        let Some(p) = donor else { break };
        counts[labels[p]] -= 1;
        counts[empty] += 1;
        labels[p] = empty;
        dists[p] = 0.0;
        centroids[empty] = points[p].clone();
        repaired = true;
    }
    Assignment {
        labels,
        dists,
        repaired,
    }
}

fn cluster_means(points: &[Vec<f64>], labels: &[usize], previous: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = points[0].len();
    let mut sums = vec![vec![0.0; d]; previous.len()];
    let mut counts = vec![0usize; previous.len()];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    sums.into_iter()
        .zip(counts)
        .zip(previous)
        .map(|((s, c), prev)| {
            if c == 0 {
                prev.clone()
            } else {
                s.into_iter().map(|v| v / c as f64).collect()
            }
        })
        .collect()
}

/// Lloyd iterations from the given centroids.
pub(crate) fn lloyd(
    points: &[Vec<f64>],
    mut centroids: Vec<Vec<f64>>,
    max_iter: usize,
    tol: f64,
) -> LloydRun {
    let mut trace = Vec::new();
    let mut n_iter = 0;
    while n_iter < max_iter {
        n_iter += 1;
        let a = assign_and_repair(points, &mut centroids);
        trace.push(a.dists.iter().sum());
        let updated = cluster_means(points, &a.labels, &centroids);
        let shift = updated
            .iter()
            .zip(&centroids)
            .map(|(u, c)| sq_dist(u, c).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        if shift <= tol && !a.repaired {
            break;
        }
    }
    let a = assign_and_repair(points, &mut centroids);
    let inertia = a.dists.iter().sum();
    trace.push(inertia);
    LloydRun {
        centroids,
        labels: a.labels,
        inertia,
        n_iter,
        trace,
    }
}

fn init_centroids(
    points: &[Vec<f64>],
    k: usize,
    init: Init,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    let n = points.len();
    match init {
        Init::RandomPoints => index::sample(rng, n, k)
            .into_iter()
            .map(|i| points[i].clone())
            .collect(),
        Init::KMeansPlusPlus => {
            let mut centroids = vec![points[rng.random_range(0..n)].clone()];
            let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
            while centroids.len() < k {
                let total: f64 = d2.iter().sum();
                let next = if total > 0.0 {
                    let mut target = rng.random::<f64>() * total;
                    let mut pick = n - 1;
                    for (i, &w) in d2.iter().enumerate() {
                        if w > 0.0 && target < w {
                            pick = i;
                            break;
                        }
                        target -= w;
                    }
                    // Rounding can leave `pick` on a zero-weight point.
                    if d2[pick] == 0.0 {
                        pick = d2.iter().rposition(|&w| w > 0.0).unwrap();
                    }
                    pick
                } else {
                    rng.random_range(0..n)
                };
                let c = points[next].clone();
                for (w, p) in d2.iter_mut().zip(points) {
                    *w = w.min(sq_dist(p, &c));
                }
                centroids.push(c);
            }
            centroids
        }
    }
}

fn validate_config(cfg: &KMeansConfig, n: usize) -> Result<()> {
    if cfg.k < 1 || cfg.k > n {
        return Err(Error::InvalidK { k: cfg.k, n });
    }
    if cfg.max_iter == 0 || cfg.n_restarts == 0 {
        return Err(Error::Domain("max_iter and n_restarts must be positive"));
    }
    if !(cfg.tol >= 0.0 && cfg.tol.is_finite()) {
        return Err(Error::Domain("tol must be a finite non-negative number"));
    }
    Ok(())
}

/// Fit k-means to row-major `points`, keeping the restart with the lowest
/// inertia (ties to the lowest restart index).
///
/// Restart `r` draws its initial centroids from a ChaCha8 stream seeded with
/// [`mix_seed`]`(seed ^ r)`. Restarts run in parallel; the result does not
/// depend on scheduling.
pub fn kmeans_fit(points: &[Vec<f64>], cfg: &KMeansConfig) -> Result<KMeansModel> {
    validate_config(cfg, points.len())?;
    validate_points(points)?;
    let runs: Vec<LloydRun> = (0..cfg.n_restarts as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed ^ r));
            let init = init_centroids(points, cfg.k, cfg.init, &mut rng);
            lloyd(points, init, cfg.max_iter, cfg.tol)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| {
            if run.inertia < best.inertia {
                run
            } else {
                best
            }
        })
        .expect("at least one restart");
    Ok(model_from_run(best, cfg))
}

pub(crate) fn model_from_run(run: LloydRun, cfg: &KMeansConfig) -> KMeansModel {
    KMeansModel {
        centroids: run.centroids,
        labels: run.labels.into_iter().map(|l| l + 1).collect(),
        inertia: run.inertia,
        config: cfg.clone(),
        ordered: false,
        n_iter: run.n_iter,
        inertia_trace: run.trace,
    }
}

const ORDER_TIE_TOL: f64 = 1e-12;

/// Renumber clusters 1..k by ascending first centroid coordinate.
///
/// First coordinates within 1e-12 of each other fall back to the second
/// coordinate, then to the original cluster index. The partition and the
/// inertia are untouched.
pub fn order_clusters(model: &KMeansModel) -> KMeansModel {
    let k = model.k();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&model.centroids[a], &model.centroids[b]);
        for level in 0..ca.len().min(2) {
            if (ca[level] - cb[level]).abs() > ORDER_TIE_TOL {
                return ca[level].total_cmp(&cb[level]);
            }
        }
        a.cmp(&b)
    });
    // rank[old] = new zero-based position
    let mut rank = vec![0; k];
    for (new, &old) in order.iter().enumerate() {
        rank[old] = new;
    }
    KMeansModel {
        centroids: order
            .iter()
            .map(|&old| model.centroids[old].clone())
            .collect(),
        labels: model.labels.iter().map(|&l| rank[l - 1] + 1).collect(),
        inertia: model.inertia,
        config: model.config.clone(),
        ordered: true,
        n_iter: model.n_iter,
        inertia_trace: model.inertia_trace.clone(),
    }
}

/// Nearest-centroid labels (from 1) for points in the model's space.
pub fn assign(model: &KMeansModel, points: &[Vec<f64>]) -> Result<Vec<usize>> {
    let d = model.dim();
    points
        .iter()
        .map(|p| {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            Ok(nearest(p, &model.centroids).0 + 1)
        })
        .collect()
}
