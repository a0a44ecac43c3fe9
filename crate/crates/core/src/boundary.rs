//! Slicing-based boundary estimation for non-convex point sets, the
//! center-closest-points inside test, and borders between clusters.
//!
//! The estimator partitions the extent of the set along every coordinate
//! axis into windows of width `alpha_s` and keeps, per window, the two
//! points at maximum mutual distance. The union of those extreme pairs is
//! the boundary. It never synthesizes coordinates: every boundary point is
//! an input point.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{k_nearest, mean, Coords, Point2};

#[derive(Debug, Error, PartialEq)]
pub enum BoundaryError {
    #[error("cannot estimate the boundary of an empty point set")]
    EmptyInput,
    #[error("slicing factor must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("boundary has no points")]
    EmptyBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary<P> {
    pub cluster_id: usize,
    /// Mean of the source point set.
    pub center: P,
    pub alpha_s: f64,
    pub points: Vec<P>,
}

impl<P: Coords> Boundary<P> {
    pub fn with_cluster_id(mut self, id: usize) -> Self {
        self.cluster_id = id;
        self
    }
}

/// How the per-neighbor comparisons of the inside test are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsideRule {
    /// Inside only if closer to the center than every one of the m nearest
    /// boundary points.
    #[default]
    All,
    /// Inside if closer to the center than any one of them.
    Any,
}

/// Estimate the boundary of `points` with slicing factor `alpha_s`.
pub fn ncbe<P: Coords>(points: &[P], alpha_s: f64) -> Result<Boundary<P>, BoundaryError> {
    if !(alpha_s > 0.0) || !alpha_s.is_finite() {
        return Err(BoundaryError::InvalidAlpha(alpha_s));
    }
    let center = mean(points).ok_or(BoundaryError::EmptyInput)?;

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |p: P, out: &mut Vec<P>| {
        let key: Vec<u64> = (0..P::DIM).map(|a| p.coord(a).to_bits()).collect();
        if seen.insert(key) {
            out.push(p);
        }
    };

    for axis in 0..P::DIM {
        let (lo, hi) = points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                let c = p.coord(axis);
                (lo.min(c), hi.max(c))
            });
        // window i spans min + i*alpha ± alpha/2
        let n_windows = ((hi - lo) / alpha_s + 0.5).floor() as usize + 1;
        let mut windows: Vec<Vec<P>> = vec![Vec::new(); n_windows];
        for p in points {
            let i = ((p.coord(axis) - lo) / alpha_s + 0.5).floor() as usize;
            windows[i.min(n_windows - 1)].push(*p);
        }
        for w in &windows {
            if let Some((a, b)) = farthest_pair(w) {
                push(a, &mut out);
                push(b, &mut out);
            }
        }
    }

    Ok(Boundary {
        cluster_id: 0,
        center,
        alpha_s,
        points: out,
    })
}

/// The pair at maximum distance; a single point pairs with itself. Ties
/// keep the first pair in index order.
fn farthest_pair<P: Coords>(pts: &[P]) -> Option<(P, P)> {
    match pts.len() {
        0 => None,
        1 => Some((pts[0], pts[0])),
        _ => {
            let cand = if P::DIM == 2 && pts.len() > 32 {
                hull_2d(pts)
            } else {
                pts.to_vec()
            };
            let mut best = (f64::NEG_INFINITY, cand[0], cand[0]);
            for i in 0..cand.len() {
                for j in i + 1..cand.len() {
                    let d = cand[i].sq_dist(&cand[j]);
                    if d > best.0 {
                        best = (d, cand[i], cand[j]);
                    }
                }
            }
            Some((best.1, best.2))
        }
    }
}

/// Convex hull vertices (monotone chain) of a 2D set, in input-sorted order.
/// The farthest pair of a set is always a pair of hull vertices.
fn hull_2d<P: Coords>(pts: &[P]) -> Vec<P> {
    let mut v: Vec<P> = pts.to_vec();
    v.sort_by(|a, b| {
        a.coord(0)
            .total_cmp(&b.coord(0))
            .then(a.coord(1).total_cmp(&b.coord(1)))
    });
    v.dedup();
    if v.len() < 3 {
        return v;
    }
    let cross = |o: &P, a: &P, b: &P| {
        (a.coord(0) - o.coord(0)) * (b.coord(1) - o.coord(1))
            - (a.coord(1) - o.coord(1)) * (b.coord(0) - o.coord(0))
    };
    let mut hull: Vec<P> = Vec::with_capacity(2 * v.len());
    for p in &v {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower = hull.len() + 1;
    for p in v.iter().rev().skip(1) {
        while hull.len() >= lower && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

/// Twice the median nearest-neighbor spacing of the set, estimated from at
/// most 512 evenly strided query points.
pub fn default_alpha<P: Coords>(points: &[P]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let stride = (points.len() / 512).max(1);
    let mut nn: Vec<f64> = points
        .iter()
        .enumerate()
        .step_by(stride)
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| p.sq_dist(q))
                .filter(|d| *d > 0.0)
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|d| d.is_finite())
        .collect();
    if nn.is_empty() {
        return None;
    }
    nn.sort_by(f64::total_cmp);
    Some(2.0 * nn[nn.len() / 2].sqrt())
}

/// Center-closest-points inside test with the conservative rule: `p` is
/// inside when it is strictly closer to the center than each of its `m`
/// nearest boundary points.
pub fn point_in_boundary<P: Coords>(
    b: &Boundary<P>,
    p: &P,
    m: usize,
) -> Result<bool, BoundaryError> {
    point_in_boundary_with(b, p, m, InsideRule::All)
}

pub fn point_in_boundary_with<P: Coords>(
    b: &Boundary<P>,
    p: &P,
    m: usize,
    rule: InsideRule,
) -> Result<bool, BoundaryError> {
    if b.points.is_empty() {
        return Err(BoundaryError::EmptyBoundary);
    }
    let d_s = p.sq_dist(&b.center);
    let mut closer = k_nearest(&b.points, p, m.max(1))
        .into_iter()
        .map(|i| d_s < b.points[i].sq_dist(&b.center));
    Ok(match rule {
        InsideRule::All => closer.all(|c| c),
        InsideRule::Any => closer.any(|c| c),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Border {
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub points: Vec<Point2>,
    /// Diameter of the border point set.
    pub length: f64,
    pub midpoint: Point2,
}

/// Points of either boundary lying within `eps_border` of the other one.
pub fn cluster_border(a: &Boundary<Point2>, b: &Boundary<Point2>, eps_border: f64) -> Border {
    let e2 = eps_border * eps_border;
    let near = |from: &[Point2], to: &[Point2]| -> Vec<Point2> {
        from.iter()
            .filter(|p| to.iter().any(|q| p.dist2(*q) <= e2))
            .copied()
            .collect()
    };
    let mut points = near(&a.points, &b.points);
    points.extend(near(&b.points, &a.points));

    let mut length2 = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            length2 = length2.max(points[i].dist2(points[j]));
        }
    }
    let midpoint = mean(&points).unwrap_or_default();
    Border {
        cluster_a: a.cluster_id,
        cluster_b: b.cluster_id,
        points,
        length: length2.sqrt(),
        midpoint,
    }
}

pub fn are_neighbors(border: &Border, l_b: f64) -> bool {
    border.length >= l_b && border.length > 0.0
}
