//! Gaussian-mixture segmentation of a projected structure and selection of
//! the cluster count by the neighbor ratio
//!
//! ```text
//! r = n_m / (n_m + n_s) + n_m / n_c
//! ```
//!
//! where `n_m` and `n_s` are the largest and second largest per-cluster
//! neighbor counts. High `r` favors few clusters with one dominant junction.
//!
//! The covariance floor is applied as a penalty on each component density,
//! `f_k(x) = N(x | mu_k, S_k) * exp(-eps/2 * tr(S_k^-1))`. Its M-step is the
//! weighted sample covariance plus `eps * I`, so the floor is always active and
//! EM stays exactly monotone in the reported (penalized) log-likelihood.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::boundary::{are_neighbors, cluster_border, ncbe, Border, Boundary, BoundaryError};
use crate::geom::Point2;

#[derive(Debug, Error)]
pub enum SegmentationError {
    #[error("need at least {k} points for {k} components, got {points}")]
    TooFewPoints { points: usize, k: usize },
    #[error("covariance of component {0} is not positive definite")]
    SingularCovariance(usize),
    #[error("invalid cluster range [{min}, {max}]")]
    InvalidRange { min: usize, max: usize },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
}

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cov2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Cov2 {
    pub fn isotropic(v: f64) -> Self {
        Cov2 {
            xx: v,
            xy: 0.0,
            yy: v,
        }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    pub fn inverse(&self) -> Option<Cov2> {
        let d = self.det();
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        Some(Cov2 {
            xx: self.yy / d,
            xy: -self.xy / d,
            yy: self.xx / d,
        })
    }

    /// Eigenvalues, smaller first.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * self.trace();
        let r = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (m - r, m + r)
    }

    pub fn quad(&self, d: Point2) -> f64 {
        self.xx * d.x * d.x + 2.0 * self.xy * d.x * d.y + self.yy * d.y * d.y
    }

    fn add_diag(self, e: f64) -> Cov2 {
        Cov2 {
            xx: self.xx + e,
            yy: self.yy + e,
            ..self
        }
    }
}

/// Sample covariance (divisor `n`) and mean.
pub fn sample_covariance(points: &[Point2]) -> Option<(Point2, Cov2)> {
    let mean = crate::geom::mean(points)?;
    let n = points.len() as f64;
    let mut c = Cov2::isotropic(0.0);
    for p in points {
        let d = *p - mean;
        c.xx += d.x * d.x;
        c.xy += d.x * d.y;
        c.yy += d.y * d.y;
    }
    Some((
        mean,
        Cov2 {
            xx: c.xx / n,
            xy: c.xy / n,
            yy: c.yy / n,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GmmParams {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub restarts: usize,
}

impl Default for GmmParams {
    fn default() -> Self {
        GmmParams {
            max_iter: 500,
            rel_tol: 1e-6,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GmmModel {
    pub k: usize,
    pub weights: Vec<f64>,
    pub means: Vec<Point2>,
    pub covariances: Vec<Cov2>,
    pub log_likelihood: f64,
    /// Value added to every covariance diagonal.
    pub floor: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every E-step of the kept restart.
    pub history: Vec<f64>,
    /// Largest single-iteration log-likelihood drop over all restarts
    /// (0 when it never dropped).
    pub max_decrease: f64,
}

impl GmmModel {
    /// Per-component `log(w_k) + log f_k(p)`.
    pub fn component_log_densities(&self, p: Point2) -> Vec<f64> {
        let terms = match component_terms(self) {
            Ok(t) => t,
            Err(_) => return vec![f64::NEG_INFINITY; self.k],
        };
        terms.iter().map(|t| t.eval(p)).collect()
    }
}

const LOG_2PI: f64 = 1.837_877_066_409_345_5;

/// `log(w) + log f(p)` split into a per-component constant and a quadratic.
struct LogTerm {
    constant: f64,
    mean: Point2,
    inv: Cov2,
}

impl LogTerm {
    fn eval(&self, p: Point2) -> f64 {
        self.constant - 0.5 * self.inv.quad(p - self.mean)
    }
}

fn component_terms(m: &GmmModel) -> Result<Vec<LogTerm>, SegmentationError> {
    (0..m.k)
        .map(|j| {
            let c = m.covariances[j];
            let inv = c
                .inverse()
                .ok_or(SegmentationError::SingularCovariance(j))?;
            Ok(LogTerm {
                constant: m.weights[j].ln()
                    - LOG_2PI
                    - 0.5 * c.det().ln()
                    - 0.5 * m.floor * inv.trace(),
                mean: m.means[j],
                inv,
            })
        })
        .collect()
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Fit a `k`-component full-covariance mixture, keeping the best of
/// `GmmParams::default().restarts` k-means++ initializations.
pub fn em_gmm_fit(
    points: &[Point2],
    k: usize,
    seed: u64,
    max_iter: usize,
    rel_tol: f64,
) -> Result<GmmModel, SegmentationError> {
    em_gmm_fit_with(
        points,
        k,
        seed,
        &GmmParams {
            max_iter,
            rel_tol,
            ..GmmParams::default()
        },
    )
}

pub fn em_gmm_fit_with(
    points: &[Point2],
    k: usize,
    seed: u64,
    params: &GmmParams,
) -> Result<GmmModel, SegmentationError> {
    if k == 0 || points.len() < k {
        return Err(SegmentationError::TooFewPoints {
            points: points.len(),
            k,
        });
    }
    if params.restarts == 0 || !(params.rel_tol >= 0.0) {
        return Err(SegmentationError::InvalidParams(
            "restarts must be >= 1 and rel_tol >= 0".into(),
        ));
    }
    let (_, cov) = sample_covariance(points).expect("non-empty");
    let floor = (1e-6 * cov.trace() / 2.0).max(1e-12);
    let init_var = cov.trace() / 2.0 + floor;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<GmmModel> = None;
    let mut max_decrease: f64 = 0.0;
    for _ in 0..params.restarts {
        let means = kmeans_pp(points, k, &mut rng);
        let model = run_em(points, means, init_var, floor, params)?;
        max_decrease = max_decrease.max(model.max_decrease);
        if best
            .as_ref()
            .is_none_or(|b| model.log_likelihood > b.log_likelihood)
        {
            best = Some(model);
        }
    }
    let mut best = best.expect("at least one restart");
    best.max_decrease = max_decrease;
    Ok(best)
}

fn kmeans_pp(points: &[Point2], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point2> {
    let mut means = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| p.dist2(means[0])).collect();
    while means.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut t = rng.random::<f64>() * total;
            let mut pick = points.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if t < *d {
                    pick = i;
                    break;
                }
                t -= d;
            }
            pick
        } else {
            rng.random_range(0..points.len())
        };
        let m = points[idx];
        means.push(m);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(p.dist2(m));
        }
    }
    means
}

fn run_em(
    points: &[Point2],
    init_means: Vec<Point2>,
    init_var: f64,
    floor: f64,
    params: &GmmParams,
) -> Result<GmmModel, SegmentationError> {
    let k = init_means.len();
    let n = points.len();
    let mut model = GmmModel {
        k,
        weights: vec![1.0 / k as f64; k],
        means: init_means,
        covariances: vec![Cov2::isotropic(init_var); k],
        log_likelihood: f64::NEG_INFINITY,
        floor,
        iterations: 0,
        converged: false,
        history: Vec::new(),
        max_decrease: 0.0,
    };
    let mut resp = vec![0.0; n * k];
    let mut lt = vec![0.0; k];
    loop {
        // E-step
        let terms = component_terms(&model)?;
        let mut ll = 0.0;
        for (i, p) in points.iter().enumerate() {
            for j in 0..k {
                lt[j] = terms[j].eval(*p);
            }
            let z = log_sum_exp(&lt);
            ll += z;
            for j in 0..k {
                resp[i * k + j] = (lt[j] - z).exp();
            }
        }
        let prev = model.log_likelihood;
        model.log_likelihood = ll;
        model.history.push(ll);
        if prev.is_finite() {
            model.max_decrease = model.max_decrease.max(prev - ll);
        }
        if prev.is_finite() && ll - prev < params.rel_tol * prev.abs() {
            model.converged = true;
            break;
        }
        if model.iterations >= params.max_iter {
            break;
        }
        model.iterations += 1;

        // M-step
        for j in 0..k {
            let nk: f64 = (0..n).map(|i| resp[i * k + j]).sum();
            model.weights[j] = nk / n as f64;
            if nk <= 0.0 {
                continue;
            }
            let mut mu = Point2::default();
            for (i, p) in points.iter().enumerate() {
                mu = mu + *p * resp[i * k + j];
            }
            mu = mu / nk;
            let mut c = Cov2::isotropic(0.0);
            for (i, p) in points.iter().enumerate() {
                let r = resp[i * k + j];
                let d = *p - mu;
                c.xx += r * d.x * d.x;
                c.xy += r * d.x * d.y;
                c.yy += r * d.y * d.y;
            }
            model.means[j] = mu;
            model.covariances[j] = Cov2 {
                xx: c.xx / nk,
                xy: c.xy / nk,
                yy: c.yy / nk,
            }
            .add_diag(floor);
        }
    }
    if !model.log_likelihood.is_finite() {
        return Err(SegmentationError::SingularCovariance(0));
    }
    Ok(model)
}

/// Maximum-posterior component per point; ties go to the lower index.
pub fn assign_clusters(model: &GmmModel, points: &[Point2]) -> Vec<usize> {
    points
        .iter()
        .map(|p| {
            let lt = model.component_log_densities(*p);
            let mut best = 0;
            for j in 1..lt.len() {
                if lt[j] > lt[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub id: usize,
    /// Indices into the input point list.
    pub indices: Vec<usize>,
    #[serde(skip)]
    pub points: Vec<Point2>,
    pub mean: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRecord {
    pub n_c: usize,
    pub n_m: usize,
    pub n_s: usize,
    pub r: f64,
    pub log_likelihood: f64,
    /// Diagnostic only; never used for selection.
    pub bic: f64,
    /// Largest per-iteration log-likelihood drop seen while fitting.
    pub em_max_decrease: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NeighborStats {
    pub n_m: usize,
    pub n_s: usize,
    pub counts: Vec<usize>,
    pub matrix: Vec<Vec<bool>>,
    /// Borders of neighboring pairs, in (a, b) order with a < b.
    pub borders: Vec<Border>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSet {
    /// Number of mixture components requested.
    pub n_c: usize,
    /// Cluster id per input point.
    pub labels: Vec<usize>,
    /// Non-empty clusters, ids `0..clusters.len()`.
    pub clusters: Vec<Cluster>,
    pub boundaries: Vec<Boundary<Point2>>,
    pub neighbors: NeighborStats,
    pub ratio_table: Vec<RatioRecord>,
    pub seed: u64,
}

/// Group labeled points into clusters (empty components dropped, ids made
/// contiguous), estimate boundaries and neighbor relations.
pub fn build_cluster_set(
    points: &[Point2],
    labels: &[usize],
    n_c: usize,
    alpha_s: f64,
    l_b: f64,
    eps_border: f64,
) -> Result<ClusterSet, SegmentationError> {
    let max_label = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); max_label];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    let mut remap = vec![usize::MAX; max_label];
    let mut clusters = Vec::new();
    for (old, idx) in groups.into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        remap[old] = clusters.len();
        let pts: Vec<Point2> = idx.iter().map(|&i| points[i]).collect();
        clusters.push(Cluster {
            id: clusters.len(),
            mean: crate::geom::mean(&pts).expect("non-empty"),
            indices: idx,
            points: pts,
        });
    }
    let boundaries = clusters
        .iter()
        .map(|c| Ok(ncbe(&c.points, alpha_s)?.with_cluster_id(c.id)))
        .collect::<Result<Vec<_>, BoundaryError>>()?;
    let neighbors = neighbor_stats(&boundaries, l_b, eps_border);
    Ok(ClusterSet {
        n_c,
        labels: labels.iter().map(|&l| remap[l]).collect(),
        clusters,
        boundaries,
        neighbors,
        ratio_table: Vec::new(),
        seed: 0,
    })
}

/// Pairwise borders and neighbor counts. `n_s` is the second-ranked count,
/// which may equal `n_m`.
pub fn neighbor_stats(boundaries: &[Boundary<Point2>], l_b: f64, eps_border: f64) -> NeighborStats {
    let n = boundaries.len();
    let mut matrix = vec![vec![false; n]; n];
    let mut counts = vec![0; n];
    let mut borders = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let border = cluster_border(&boundaries[a], &boundaries[b], eps_border);
            if are_neighbors(&border, l_b) {
                matrix[a][b] = true;
                matrix[b][a] = true;
                counts[a] += 1;
                counts[b] += 1;
                borders.push(border);
            }
        }
    }
    let mut ranked = counts.clone();
    ranked.sort_unstable_by(|a, b| b.cmp(a));
    NeighborStats {
        n_m: ranked.first().copied().unwrap_or(0),
        n_s: ranked.get(1).copied().unwrap_or(0),
        counts,
        matrix,
        borders,
    }
}

/// Neighbor ratio; 0 when no cluster has neighbors.
pub fn cluster_ratio(n_m: usize, n_s: usize, n_c: usize) -> f64 {
    if n_m == 0 || n_c == 0 {
        return 0.0;
    }
    n_m as f64 / (n_m + n_s) as f64 + n_m as f64 / n_c as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentationParams {
    pub n_cmin: usize,
    pub n_cmax: usize,
    /// Minimum border length for two clusters to count as neighbors.
    pub l_b: f64,
    /// Distance within which boundary points of two clusters form a border.
    pub eps_border: f64,
    pub alpha_s: f64,
    pub seed: u64,
    pub gmm: GmmParams,
}

/// Sweep the cluster count, score each segmentation by the neighbor ratio
/// and return the best one (ties to the smaller count) with the full table.
pub fn segment_structure(
    points: &[Point2],
    params: &SegmentationParams,
) -> Result<ClusterSet, SegmentationError> {
    let (lo, hi) = (params.n_cmin, params.n_cmax);
    if lo < 2 || hi < lo {
        return Err(SegmentationError::InvalidRange { min: lo, max: hi });
    }
    if points.len() < hi {
        return Err(SegmentationError::TooFewPoints {
            points: points.len(),
            k: hi,
        });
    }
    if !(params.alpha_s > 0.0) || !(params.l_b >= 0.0) || !(params.eps_border >= 0.0) {
        return Err(SegmentationError::InvalidParams(
            "alpha_s must be positive, l_b and eps_border non-negative".into(),
        ));
    }
    let evaluated: Vec<(RatioRecord, ClusterSet)> = (lo..=hi)
        .into_par_iter()
        .map(|n_c| {
            let model = em_gmm_fit_with(points, n_c, params.seed, &params.gmm)?;
            let labels = assign_clusters(&model, points);
            let cs = build_cluster_set(
                points,
                &labels,
                n_c,
                params.alpha_s,
                params.l_b,
                params.eps_border,
            )?;
            let free = (6 * n_c - 1) as f64;
            let rec = RatioRecord {
                n_c,
                n_m: cs.neighbors.n_m,
                n_s: cs.neighbors.n_s,
                r: cluster_ratio(cs.neighbors.n_m, cs.neighbors.n_s, n_c),
                log_likelihood: model.log_likelihood,
                bic: free * (points.len() as f64).ln() - 2.0 * model.log_likelihood,
                em_max_decrease: model.max_decrease,
            };
            Ok((rec, cs))
        })
        .collect::<Result<_, SegmentationError>>()?;

    let table: Vec<RatioRecord> = evaluated.iter().map(|(r, _)| *r).collect();
    let mut best = 0;
    for (i, rec) in table.iter().enumerate() {
        if rec.r > table[best].r {
            best = i;
        }
    }
    // Fits are deterministic in (points, n_c, seed), so the sweep's fit at the
    // selected count is the refit.
    let mut cs = evaluated.into_iter().nth(best).expect("non-empty sweep").1;
    cs.ratio_table = table;
    cs.seed = params.seed;
    Ok(cs)
}

/// Adjusted Rand index between two labelings of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must have equal length");
    let n = a.len() as f64;
    let c2 = |x: f64| x * (x - 1.0) / 2.0;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut ra: HashMap<usize, f64> = HashMap::new();
    let mut rb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *ra.entry(x).or_default() += 1.0;
        *rb.entry(y).or_default() += 1.0;
    }
    let index: f64 = joint.values().map(|&v| c2(v)).sum();
    let sa: f64 = ra.values().map(|&v| c2(v)).sum();
    let sb: f64 = rb.values().map(|&v| c2(v)).sum();
    let expected = sa * sb / c2(n);
    let max = 0.5 * (sa + sb);
    if (max - expected).abs() < 1e-12 {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
