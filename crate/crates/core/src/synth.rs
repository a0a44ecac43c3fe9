//! Seeded synthetic structures (Cross, K, L, T, I) with ground truth, plus a
//! few small generators used by tests and demos.
//!
//! Every shape is a union of oriented rectangles: square junctions where bars
//! meet and bars of `bar_length x bar_width` leaving them. Points are sampled
//! uniformly per rectangle (`round(density * area)` draws); draws that land in
//! an earlier rectangle are discarded so overlaps are not over-sampled.

use std::f64::consts::FRAC_PI_4;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::{Frame, PointCloud};
use crate::geom::{Point2, Point3};
use crate::route::WeightedGraph;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid structure spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Cross,
    K,
    L,
    T,
    I,
}

impl Shape {
    pub const ALL: [Shape; 5] = [Shape::Cross, Shape::K, Shape::L, Shape::T, Shape::I];
}

impl std::str::FromStr for Shape {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cross" | "x" => Ok(Shape::Cross),
            "k" => Ok(Shape::K),
            "l" => Ok(Shape::L),
            "t" => Ok(Shape::T),
            "i" => Ok(Shape::I),
            other => Err(SynthError::InvalidSpec(format!("unknown shape {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureSpec {
    pub shape: Shape,
    pub bar_length: f64,
    pub bar_width: f64,
    /// Points per square meter.
    pub density: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl StructureSpec {
    pub fn new(shape: Shape) -> Self {
        StructureSpec {
            shape,
            bar_length: 1.0,
            bar_width: 0.1,
            density: 5000.0,
            noise_sigma: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.bar_length) || !ok(self.bar_width) || !ok(self.density) {
            return Err(SynthError::InvalidSpec(
                "bar_length, bar_width and density must be positive".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(SynthError::InvalidSpec("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Junction,
    Bar,
}

/// Rectangle of `2 * half_len` along `angle` and `2 * half_width` across.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedRect {
    pub label: usize,
    pub kind: RegionKind,
    pub center: Point2,
    pub angle: f64,
    pub half_len: f64,
    pub half_width: f64,
}

impl OrientedRect {
    /// Bar from distance `from` to `to` along direction `angle`, measured
    /// from `origin`.
    fn bar(label: usize, origin: Point2, angle: f64, from: f64, to: f64, width: f64) -> Self {
        let dir = Point2::new(angle.cos(), angle.sin());
        OrientedRect {
            label,
            kind: RegionKind::Bar,
            center: origin + dir * (0.5 * (from + to)),
            angle,
            half_len: 0.5 * (to - from),
            half_width: 0.5 * width,
        }
    }

    fn junction(label: usize, center: Point2, width: f64) -> Self {
        OrientedRect {
            label,
            kind: RegionKind::Junction,
            center,
            angle: 0.0,
            half_len: 0.5 * width,
            half_width: 0.5 * width,
        }
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_len * self.half_width
    }

    pub fn to_local(&self, p: Point2) -> Point2 {
        (p - self.center).rotate(-self.angle)
    }

    pub fn to_world(&self, q: Point2) -> Point2 {
        q.rotate(self.angle) + self.center
    }

    pub fn contains(&self, p: Point2) -> bool {
        let q = self.to_local(p);
        q.x.abs() <= self.half_len && q.y.abs() <= self.half_width
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance(&self, p: Point2) -> f64 {
        let q = self.to_local(p);
        let dx = (q.x.abs() - self.half_len).max(0.0);
        let dy = (q.y.abs() - self.half_width).max(0.0);
        dx.hypot(dy)
    }

    pub fn corners(&self) -> [Point2; 4] {
        let (l, w) = (self.half_len, self.half_width);
        [
            self.to_world(Point2::new(-l, -w)),
            self.to_world(Point2::new(l, -w)),
            self.to_world(Point2::new(l, w)),
            self.to_world(Point2::new(-l, w)),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthGraph {
    pub vertices: Vec<Point2>,
    pub edges: Vec<(usize, usize)>,
}

impl TruthGraph {
    pub fn to_weighted(&self) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.vertices.len());
        for &(u, v) in &self.edges {
            g.add_edge(u, v, self.vertices[u].dist(self.vertices[v]));
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: StructureSpec,
    /// Region label per generated point.
    pub labels: Vec<usize>,
    pub regions: Vec<OrientedRect>,
    pub graph: TruthGraph,
}

impl GroundTruth {
    pub fn contains(&self, p: Point2) -> bool {
        self.regions.iter().any(|r| r.contains(p))
    }

    /// Distance from `p` to the union of regions (0 inside).
    pub fn distance_outside(&self, p: Point2) -> f64 {
        self.regions
            .iter()
            .map(|r| r.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn region_of(&self, p: Point2) -> Option<usize> {
        self.regions.iter().position(|r| r.contains(p))
    }
}

/// Regions and skeleton graph of a shape, junction(s) at the origin.
pub fn layout(shape: Shape, bar_length: f64, bar_width: f64) -> (Vec<OrientedRect>, TruthGraph) {
    let (len, w) = (bar_length, bar_width);
    let h = 0.5 * w;
    let o = Point2::default();
    let arms = |angles: &[f64], first_label: usize, origin: Point2, reach: f64| {
        angles
            .iter()
            .enumerate()
            .map(|(i, &a)| OrientedRect::bar(first_label + i, origin, a, h, h + reach, w))
            .collect::<Vec<_>>()
    };
    let tip =
        |origin: Point2, a: f64, reach: f64| origin + Point2::new(a.cos(), a.sin()) * (h + reach);
    let star = |angles: &[f64]| {
        let mut regions = vec![OrientedRect::junction(0, o, w)];
        regions.extend(arms(angles, 1, o, len));
        let mut vertices = vec![o];
        let mut edges = Vec::new();
        for &a in angles {
            vertices.push(tip(o, a, len));
            edges.push((0, vertices.len() - 1));
        }
        (regions, TruthGraph { vertices, edges })
    };
    use std::f64::consts::{FRAC_PI_2, PI};
    match shape {
        Shape::Cross => star(&[0.0, FRAC_PI_2, PI, -FRAC_PI_2]),
        Shape::T => star(&[0.0, PI, -FRAC_PI_2]),
        Shape::L => star(&[0.0, FRAC_PI_2]),
        Shape::K => star(&[FRAC_PI_2, -FRAC_PI_2, FRAC_PI_4, -FRAC_PI_4]),
        Shape::I => {
            // vertical web between two junctions, flanges of half length
            let top = Point2::new(0.0, len + w);
            let mut regions = vec![
                OrientedRect::junction(0, o, w),
                OrientedRect::junction(1, top, w),
                OrientedRect::bar(2, o, FRAC_PI_2, h, h + len, w),
            ];
            let stub = 0.5 * len;
            regions.extend(arms(&[0.0, PI], 3, o, stub));
            regions.extend(arms(&[0.0, PI], 5, top, stub));
            let vertices = vec![
                o,
                top,
                tip(o, 0.0, stub),
                tip(o, PI, stub),
                tip(top, 0.0, stub),
                tip(top, PI, stub),
            ];
            let edges = vec![(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)];
            (regions, TruthGraph { vertices, edges })
        }
    }
}

/// Sample a structure; labels are the region labels assigned before noise.
pub fn generate(spec: &StructureSpec) -> Result<(PointCloud, GroundTruth), SynthError> {
    spec.validate()?;
    let (regions, graph) = layout(spec.shape, spec.bar_length, spec.bar_width);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).expect("validated sigma");
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (i, r) in regions.iter().enumerate() {
        let count = (spec.density * r.area()).round() as usize;
        for _ in 0..count {
            let q = Point2::new(
                rng.random_range(-r.half_len..=r.half_len),
                rng.random_range(-r.half_width..=r.half_width),
            );
            let p = r.to_world(q);
            if regions[..i].iter().any(|e| e.contains(p)) {
                continue;
            }
            let jitter = if spec.noise_sigma > 0.0 {
                Point2::new(noise.sample(&mut rng), noise.sample(&mut rng))
            } else {
                Point2::default()
            };
            points.push((p + jitter).to_3d(0.0));
            labels.push(r.label);
        }
    }
    Ok((
        PointCloud::new(points, Frame::Projected2D),
        GroundTruth {
            spec: *spec,
            labels,
            regions,
            graph,
        },
    ))
}

/// Drop points with probability `min(1, dropout + range_falloff * (x - x_min))`,
/// modelling sensor quality that degrades away from the camera along x.
pub fn degrade(cloud: &PointCloud, dropout: f64, range_falloff: f64, seed: u64) -> PointCloud {
    let x_min = cloud
        .points
        .iter()
        .map(|p| p.x)
        .fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = cloud
        .points
        .iter()
        .filter(|p| {
            let prob = (dropout + range_falloff * (p.x - x_min)).clamp(0.0, 1.0);
            rng.random::<f64>() >= prob
        })
        .copied()
        .collect();
    PointCloud::new(points, cloud.frame)
}

/// Uniform samples of a horizontal `size_x x size_y` patch centered at
/// `center`.
pub fn plane_patch(
    center: Point3,
    size_x: f64,
    size_y: f64,
    count: usize,
    seed: u64,
) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..count)
        .map(|_| {
            Point3::new(
                center.x + size_x * (rng.random::<f64>() - 0.5),
                center.y + size_y * (rng.random::<f64>() - 0.5),
                center.z,
            )
        })
        .collect();
    PointCloud::new(points, Frame::RobotBase)
}

/// Random connected graph with integer weights in `1..=10`: a random
/// spanning tree on `n` vertices plus extra edges up to `edges` total.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, edges: usize) -> WeightedGraph {
    assert!(n >= 2 && edges >= n - 1, "need n >= 2 and edges >= n - 1");
    let mut g = WeightedGraph::new(n);
    for v in 1..n {
        let u = rng.random_range(0..v);
        g.add_edge(u, v, rng.random_range(1..=10) as f64);
    }
    while g.edges.len() < edges {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            g.add_edge(u, v, rng.random_range(1..=10) as f64);
        }
    }
    g
}
