//! Footprint-checked motion planning along route edges.
//!
//! A configuration is valid when every sampled footprint point lies inside
//! at least one of the clusters whose centers are nearest to that point,
//! using the center-closest-points test. Paths between graph vertices come
//! from a plain RRT in `(x, y, theta)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::{point_in_boundary_with, Boundary, InsideRule};
use crate::geom::{wrap_angle, Point2};
use crate::graph::StructureGraph;
use crate::route::RoutePlan;

#[derive(Debug, Error, PartialEq)]
pub enum PlannerError {
    #[error("no boundaries to check against")]
    EmptyBoundaries,
    #[error("start configuration is not inside the structure")]
    StartInvalid,
    #[error("goal configuration is not inside the structure")]
    GoalInvalid,
    #[error("no path found after {iterations} iterations")]
    NoPathFound { iterations: usize },
    #[error("invalid planner parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Footprint {
    pub width: f64,
    /// Extent along the heading.
    pub length: f64,
    /// Local offsets checked for containment, heading along +x.
    pub template: Vec<Point2>,
}

impl Footprint {
    /// Corners, edge midpoints and center of a `width x length` rectangle.
    pub fn new(width: f64, length: f64) -> Self {
        let (hl, hw) = (0.5 * length, 0.5 * width);
        let template = vec![
            Point2::new(hl, hw),
            Point2::new(-hl, hw),
            Point2::new(-hl, -hw),
            Point2::new(hl, -hw),
            Point2::new(0.0, hw),
            Point2::new(-hl, 0.0),
            Point2::new(0.0, -hw),
            Point2::new(hl, 0.0),
            Point2::new(0.0, 0.0),
        ];
        Footprint {
            width,
            length,
            template,
        }
    }

    fn validate(&self) -> Result<(), PlannerError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.width) || !ok(self.length) || self.template.is_empty() {
            return Err(PlannerError::InvalidParams(
                "footprint needs positive size and a template".into(),
            ));
        }
        Ok(())
    }
}

/// Planar robot configuration, serialized as `[x, y, theta]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Config {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl From<[f64; 3]> for Config {
    fn from(a: [f64; 3]) -> Self {
        Config::new(a[0], a[1], a[2])
    }
}

impl From<Config> for [f64; 3] {
    fn from(c: Config) -> Self {
        [c.x, c.y, c.theta]
    }
}

impl Config {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Config {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn at(p: Point2, theta: f64) -> Self {
        Config::new(p.x, p.y, theta)
    }

    pub fn pos(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// Template offsets rotated by the heading and moved to the position.
pub fn footprint_points(c: &Config, fp: &Footprint) -> Vec<Point2> {
    fp.template
        .iter()
        .map(|o| o.rotate(c.theta) + c.pos())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PibcParams {
    /// Clusters tried per footprint point, nearest centers first.
    pub n_candidates: usize,
    /// Boundary neighbors compared in the inside test.
    pub m: usize,
    pub rule: InsideRule,
}

impl Default for PibcParams {
    fn default() -> Self {
        PibcParams {
            n_candidates: 3,
            m: 5,
            rule: InsideRule::All,
        }
    }
}

/// Whether every footprint point of `c` is inside one of its candidate
/// clusters.
pub fn pibc_check(
    boundaries: &[Boundary<Point2>],
    c: &Config,
    fp: &Footprint,
    params: &PibcParams,
) -> Result<bool, PlannerError> {
    if boundaries.is_empty() || boundaries.iter().any(|b| b.points.is_empty()) {
        return Err(PlannerError::EmptyBoundaries);
    }
    let n = params.n_candidates.max(1).min(boundaries.len());
    for p in footprint_points(c, fp) {
        let mut order: Vec<(f64, usize)> = boundaries
            .iter()
            .enumerate()
            .map(|(i, b)| (b.center.dist2(p), i))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let inside = order[..n].iter().any(|&(_, i)| {
            point_in_boundary_with(&boundaries[i], &p, params.m, params.rule).unwrap_or(false)
        });
        if !inside {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrtParams {
    /// Maximum position change per extension.
    pub step: f64,
    /// Maximum heading change per extension.
    pub theta_step: f64,
    pub goal_tol: f64,
    pub goal_bias: f64,
    pub max_iters: usize,
    /// Meters per radian in the nearest-neighbor metric.
    pub theta_weight: f64,
}

impl RrtParams {
    pub fn for_footprint(fp: &Footprint) -> Self {
        RrtParams {
            step: fp.width / 2.0,
            theta_step: 0.3,
            goal_tol: fp.width / 4.0,
            goal_bias: 0.1,
            max_iters: 5000,
            theta_weight: 0.3,
        }
    }

    fn validate(&self) -> Result<(), PlannerError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.step) || !ok(self.theta_step) || !ok(self.goal_tol) {
            return Err(PlannerError::InvalidParams(
                "step, theta_step and goal_tol must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) || !(self.theta_weight >= 0.0) {
            return Err(PlannerError::InvalidParams(
                "goal_bias must be in [0, 1] and theta_weight >= 0".into(),
            ));
        }
        Ok(())
    }

    fn metric(&self, a: &Config, b: &Config) -> f64 {
        let dt = wrap_angle(b.theta - a.theta);
        ((b.x - a.x).powi(2) + (b.y - a.y).powi(2) + (self.theta_weight * dt).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionPath {
    /// Graph edge served, as (from, to) vertex ids.
    pub edge: Option<(usize, usize)>,
    pub configs: Vec<Config>,
    pub iterations: usize,
}

impl MotionPath {
    pub fn length(&self) -> f64 {
        self.configs
            .windows(2)
            .map(|w| w[0].pos().dist(w[1].pos()))
            .sum()
    }
}

/// Move from `a` toward `b` by at most one step in position and heading.
fn steer(a: &Config, b: &Config, p: &RrtParams) -> Config {
    let d = b.pos() - a.pos();
    let dist = d.norm();
    let pos = if dist > p.step {
        a.pos() + d * (p.step / dist)
    } else {
        b.pos()
    };
    let dt = wrap_angle(b.theta - a.theta).clamp(-p.theta_step, p.theta_step);
    Config::at(pos, a.theta + dt)
}

struct Checker<'a> {
    boundaries: &'a [Boundary<Point2>],
    fp: &'a Footprint,
    pibc: &'a PibcParams,
    spacing: f64,
}

impl Checker<'_> {
    fn valid(&self, c: &Config) -> bool {
        pibc_check(self.boundaries, c, self.fp, self.pibc).unwrap_or(false)
    }

    /// `b` and the interpolated configurations strictly between `a` and `b`.
    fn motion_valid(&self, a: &Config, b: &Config) -> bool {
        let dist = a.pos().dist(b.pos());
        let dt = wrap_angle(b.theta - a.theta);
        let n = ((dist / self.spacing).ceil() as usize).max(1);
        (1..=n).all(|i| {
            let t = i as f64 / n as f64;
            let c = Config::at(a.pos() + (b.pos() - a.pos()) * t, a.theta + dt * t);
            self.valid(&c)
        })
    }
}

/// RRT from `start` to `goal`. Success once a node lands within
/// `goal_tol` of the goal position; the exact goal is then appended when it
/// can be reached in valid steps.
pub fn rrt_plan(
    start: &Config,
    goal: &Config,
    boundaries: &[Boundary<Point2>],
    fp: &Footprint,
    params: &RrtParams,
    pibc: &PibcParams,
    seed: u64,
) -> Result<MotionPath, PlannerError> {
    fp.validate()?;
    params.validate()?;
    if boundaries.is_empty() {
        return Err(PlannerError::EmptyBoundaries);
    }
    let check = Checker {
        boundaries,
        fp,
        pibc,
        spacing: params.step / 2.0,
    };
    if !pibc_check(boundaries, start, fp, pibc)? {
        return Err(PlannerError::StartInvalid);
    }
    if !check.valid(goal) {
        return Err(PlannerError::GoalInvalid);
    }
    if start == goal {
        return Ok(MotionPath {
            edge: None,
            configs: vec![*start],
            iterations: 0,
        });
    }

    let (lo, hi) = boundaries.iter().flat_map(|b| &b.points).fold(
        (
            Point2::new(f64::INFINITY, f64::INFINITY),
            Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        ),
        |(lo, hi), p| {
            (
                Point2::new(lo.x.min(p.x), lo.y.min(p.y)),
                Point2::new(hi.x.max(p.x), hi.y.max(p.y)),
            )
        },
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<Config> = vec![*start];
    let mut parent: Vec<usize> = vec![usize::MAX];

    let trace = |nodes: &[Config], parent: &[usize], mut i: usize| {
        let mut out = vec![nodes[i]];
        while parent[i] != usize::MAX {
            i = parent[i];
            out.push(nodes[i]);
        }
        out.reverse();
        out
    };

    let near_goal = |c: &Config| c.pos().dist(goal.pos()) <= params.goal_tol;
    if near_goal(start) {
        if let Some(tail) = connect(start, goal, &check, params) {
            let mut configs = vec![*start];
            configs.extend(tail);
            return Ok(MotionPath {
                edge: None,
                configs,
                iterations: 0,
            });
        }
    }

    for iter in 1..=params.max_iters {
        let sample = if rng.random::<f64>() < params.goal_bias {
            *goal
        } else {
            Config::new(
                rng.random_range(lo.x..=hi.x),
                rng.random_range(lo.y..=hi.y),
                rng.random_range(-PI..PI),
            )
        };
        let mut nearest = 0;
        let mut best = f64::INFINITY;
        for (i, n) in nodes.iter().enumerate() {
            let d = params.metric(n, &sample);
            if d < best {
                best = d;
                nearest = i;
            }
        }
        let new = steer(&nodes[nearest], &sample, params);
        if new == nodes[nearest] || !check.motion_valid(&nodes[nearest], &new) {
            continue;
        }
        nodes.push(new);
        parent.push(nearest);
        if near_goal(&new) {
            let mut configs = trace(&nodes, &parent, nodes.len() - 1);
            if let Some(tail) = connect(&new, goal, &check, params) {
                configs.extend(tail);
            }
            return Ok(MotionPath {
                edge: None,
                configs,
                iterations: iter,
            });
        }
    }
    Err(PlannerError::NoPathFound {
        iterations: params.max_iters,
    })
}

/// Step-limited valid chain from `a` to exactly `b`, excluding `a`.
fn connect(a: &Config, b: &Config, check: &Checker, p: &RrtParams) -> Option<Vec<Config>> {
    let mut out = Vec::new();
    let mut cur = *a;
    while cur != *b {
        let next = steer(&cur, b, p);
        // snap the last step so floating-point residue cannot loop forever
        let next =
            if next.pos().dist(b.pos()) < 1e-12 && wrap_angle(b.theta - next.theta).abs() < 1e-12 {
                *b
            } else {
                next
            };
        if !check.motion_valid(&cur, &next) {
            return None;
        }
        out.push(next);
        cur = next;
        if out.len() > 10_000 {
            return None;
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeFailure {
    /// Index of the step in the route walk.
    pub step: usize,
    pub edge: (usize, usize),
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteMotion {
    /// Planned steps, in walk order.
    pub paths: Vec<MotionPath>,
    pub failures: Vec<EdgeFailure>,
    /// Configuration used at each walk vertex.
    pub vias: Vec<Config>,
}

/// Heading of the segment from `a` to `b`.
fn heading(a: Point2, b: Point2) -> f64 {
    let d = b - a;
    d.y.atan2(d.x)
}

/// Valid configuration near vertex position `at`, facing about `theta`.
/// Invalid vertex positions (e.g. bar ends on the boundary) are replaced by
/// the closest valid candidate up to half way along the segment toward
/// `toward`, up to half a footprint width sideways and up to `theta_step`
/// off the segment heading. Falls back to the unmoved configuration.
fn via_config(at: Point2, toward: Point2, theta: f64, check: &Checker, p: &RrtParams) -> Config {
    let c = Config::at(at, theta);
    if check.valid(&c) {
        return c;
    }
    const ALONG: usize = 50;
    const SIDE: i32 = 4;
    let dir = toward - at;
    let normal = if dir.norm() > 0.0 {
        Point2::new(-dir.y, dir.x) / dir.norm()
    } else {
        Point2::new(0.0, 1.0)
    };
    let side_step = 0.5 * check.fp.width / SIDE as f64;
    let mut cands: Vec<(f64, Config)> = Vec::new();
    for i in 0..=ALONG {
        let base = at + dir * (0.5 * i as f64 / ALONG as f64);
        for j in -SIDE..=SIDE {
            let pos = base + normal * (j as f64 * side_step);
            for k in -2i32..=2 {
                let dt = 0.5 * k as f64 * p.theta_step;
                let cost = pos.dist(at) + p.theta_weight * dt.abs();
                cands.push((cost, Config::at(pos, theta + dt)));
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    cands
        .into_iter()
        .map(|(_, cand)| cand)
        .find(|cand| check.valid(cand))
        .unwrap_or(c)
}

/// Plan every step of the route walk. Each step's path ends at the next
/// step's start configuration; failures are collected per step.
pub fn plan_route(
    route: &RoutePlan,
    g: &StructureGraph,
    boundaries: &[Boundary<Point2>],
    fp: &Footprint,
    params: &RrtParams,
    pibc: &PibcParams,
    seed: u64,
) -> Result<RouteMotion, PlannerError> {
    fp.validate()?;
    params.validate()?;
    if boundaries.is_empty() {
        return Err(PlannerError::EmptyBoundaries);
    }
    let check = Checker {
        boundaries,
        fp,
        pibc,
        spacing: params.step / 2.0,
    };
    let pos = |v: usize| g.vertices[v].pos;
    let walk = &route.walk;
    let steps = walk.len().saturating_sub(1);

    // heading at every walk vertex: direction of the outgoing segment, or the
    // incoming one at the final vertex
    let mut vias = Vec::with_capacity(walk.len());
    for i in 0..walk.len() {
        let (theta, toward) = if i < steps {
            (heading(pos(walk[i]), pos(walk[i + 1])), pos(walk[i + 1]))
        } else if i > 0 {
            (heading(pos(walk[i - 1]), pos(walk[i])), pos(walk[i - 1]))
        } else {
            (0.0, pos(walk[i]))
        };
        vias.push(via_config(pos(walk[i]), toward, theta, &check, params));
    }

    let mut paths = Vec::new();
    let mut failures = Vec::new();
    for i in 0..steps {
        let edge = (walk[i], walk[i + 1]);
        let start = vias[i];
        // arrive already facing the next segment so paths chain exactly
        let goal = vias[i + 1];
        match rrt_plan(
            &start,
            &goal,
            boundaries,
            fp,
            params,
            pibc,
            seed.wrapping_add(i as u64),
        ) {
            Ok(mut p) => {
                p.edge = Some(edge);
                paths.push(p);
            }
            Err(e) => failures.push(EdgeFailure {
                step: i,
                edge,
                error: e.to_string(),
            }),
        }
    }
    Ok(RouteMotion {
        paths,
        failures,
        vias,
    })
}
