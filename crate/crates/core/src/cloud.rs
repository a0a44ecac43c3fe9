//! Point-cloud ingestion and geometric pre-processing.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::geom::{Point2, Point3};

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: non-finite coordinate")]
    NonFinite { line: usize },
    #[error("invalid range: lo {lo} > hi {hi}")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("voxel leaf must be positive, got {0}")]
    InvalidLeaf(f64),
    #[error("cloud is degenerate (fewer than 3 points or all collinear)")]
    DegenerateCloud,
    #[error("best plane explains only {fraction:.3} of the points (minimum {min:.3})")]
    NoPlane { fraction: f64, min: f64 },
    #[error("expected a cloud in frame {expected:?}, got {actual:?}")]
    WrongFrame { expected: Frame, actual: Frame },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Camera,
    RobotBase,
    Projected2D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CloudFormat {
    Csv,
    PcdAscii,
    PlyAscii,
}

impl CloudFormat {
    /// Guess the format from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> CloudFormat {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("pcd") => CloudFormat::PcdAscii,
            Some("ply") => CloudFormat::PlyAscii,
            _ => CloudFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn get(self, p: &Point3) -> f64 {
        match self {
            Axis::X => p.x,
            Axis::Y => p.y,
            Axis::Z => p.z,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub frame: Frame,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, frame: Frame) -> Self {
        PointCloud { points, frame }
    }

    pub fn empty(frame: Frame) -> Self {
        PointCloud::new(Vec::new(), frame)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Option<Point3> {
        crate::geom::mean(&self.points)
    }

    pub fn xy(&self) -> Vec<Point2> {
        self.points.iter().map(|p| p.xy()).collect()
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (
                Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
                Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
            )
        }))
    }

    /// Serialize in the CSV fixture format (`x,y,z` per line).
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.points.len() * 32);
        for p in &self.points {
            let _ = writeln!(s, "{},{},{}", p.x, p.y, p.z);
        }
        s
    }
}

/// Plane `normal · p = offset` with its supporting inliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanePatch {
    pub inliers: PointCloud,
    pub normal: Point3,
    pub offset: f64,
    pub centroid: Point3,
}

impl PlanePatch {
    pub fn distance(&self, p: Point3) -> f64 {
        (self.normal.dot(p) - self.offset).abs()
    }
}

/// Rotation (row-major) plus translation: `p' = R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: [[f64; 3]; 3],
    pub translation: Point3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        RigidTransform::identity()
    }
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: Point3::default(),
        }
    }

    pub fn translation(t: Point3) -> Self {
        RigidTransform {
            translation: t,
            ..RigidTransform::identity()
        }
    }

    /// Rotation by `angle` radians about the unit `axis` (Rodrigues), then
    /// translation by `t`.
    pub fn from_axis_angle(axis: Point3, angle: f64, t: Point3) -> Self {
        let k = axis.normalized().unwrap_or(Point3::new(0.0, 0.0, 1.0));
        let (s, c) = angle.sin_cos();
        let v = 1.0 - c;
        let rotation = [
            [
                c + k.x * k.x * v,
                k.x * k.y * v - k.z * s,
                k.x * k.z * v + k.y * s,
            ],
            [
                k.y * k.x * v + k.z * s,
                c + k.y * k.y * v,
                k.y * k.z * v - k.x * s,
            ],
            [
                k.z * k.x * v - k.y * s,
                k.z * k.y * v + k.x * s,
                c + k.z * k.z * v,
            ],
        ];
        RigidTransform {
            rotation,
            translation: t,
        }
    }

    pub fn rotate(&self, v: Point3) -> Point3 {
        let r = &self.rotation;
        Point3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }

    pub fn determinant(&self) -> f64 {
        let r = &self.rotation;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Whether `RᵀR = I` and `det R = 1` within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let r = &self.rotation;
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| r[k][i] * r[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).abs() > tol {
                    return false;
                }
            }
        }
        (self.determinant() - 1.0).abs() <= tol && self.translation.is_finite()
    }
}

pub fn transform_point(p: Point3, t: &RigidTransform) -> Point3 {
    t.rotate(p) + t.translation
}

pub fn transform_cloud(cloud: &PointCloud, t: &RigidTransform, frame: Frame) -> PointCloud {
    PointCloud::new(
        cloud
            .points
            .iter()
            .map(|&p| transform_point(p, t))
            .collect(),
        frame,
    )
}

/// Read a cloud file. Returned clouds are tagged with the camera frame.
pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud, CloudError> {
    let text = fs::read_to_string(path).map_err(|source| CloudError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_cloud(&text, format)
}

pub fn parse_cloud(text: &str, format: CloudFormat) -> Result<PointCloud, CloudError> {
    let points = match format {
        CloudFormat::Csv => parse_csv(text)?,
        CloudFormat::PcdAscii => parse_pcd(text)?,
        CloudFormat::PlyAscii => parse_ply(text)?,
    };
    Ok(PointCloud::new(points, Frame::Camera))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, CloudError> {
    let v: f64 = tok.trim().parse().map_err(|_| CloudError::Parse {
        line,
        msg: format!("invalid number {:?}", tok.trim()),
    })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CloudError::NonFinite { line })
    }
}

fn parse_csv(text: &str) -> Result<Vec<Point3>, CloudError> {
    let mut pts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = l.split(',').collect();
        if toks.len() != 3 {
            return Err(CloudError::Parse {
                line,
                msg: format!("expected 3 fields, found {}", toks.len()),
            });
        }
        pts.push(Point3::new(
            parse_f64(toks[0], line)?,
            parse_f64(toks[1], line)?,
            parse_f64(toks[2], line)?,
        ));
    }
    Ok(pts)
}

fn xyz_from_fields(toks: &[&str], idx: [usize; 3], line: usize) -> Result<Point3, CloudError> {
    let get = |k: usize| -> Result<f64, CloudError> {
        let t = toks.get(k).ok_or_else(|| CloudError::Parse {
            line,
            msg: format!("missing field {k}"),
        })?;
        parse_f64(t, line)
    };
    Ok(Point3::new(get(idx[0])?, get(idx[1])?, get(idx[2])?))
}

fn parse_pcd(text: &str) -> Result<Vec<Point3>, CloudError> {
    let mut fields: Option<Vec<String>> = None;
    let mut lines = text.lines().enumerate();
    let mut data_seen = false;
    for (i, raw) in lines.by_ref() {
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut toks = l.split_whitespace();
        let key = toks.next().unwrap_or_default().to_ascii_uppercase();
        match key.as_str() {
            "FIELDS" => fields = Some(toks.map(|t| t.to_ascii_lowercase()).collect()),
            "DATA" => {
                let kind = toks.next().unwrap_or_default();
                if kind != "ascii" {
                    return Err(CloudError::Parse {
                        line: i + 1,
                        msg: format!("unsupported PCD DATA kind {kind:?}"),
                    });
                }
                data_seen = true;
                break;
            }
            _ => {}
        }
    }
    if !data_seen {
        return Err(CloudError::Parse {
            line: text.lines().count(),
            msg: "PCD header has no DATA line".into(),
        });
    }
    let fields = fields.ok_or_else(|| CloudError::Parse {
        line: 1,
        msg: "PCD header has no FIELDS line".into(),
    })?;
    let idx = xyz_indices(&fields).ok_or_else(|| CloudError::Parse {
        line: 1,
        msg: "PCD FIELDS must contain x y z".into(),
    })?;
    let mut pts = Vec::new();
    for (i, raw) in lines {
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        pts.push(xyz_from_fields(&toks, idx, i + 1)?);
    }
    Ok(pts)
}

fn xyz_indices(fields: &[String]) -> Option<[usize; 3]> {
    let find = |n: &str| fields.iter().position(|f| f == n);
    Some([find("x")?, find("y")?, find("z")?])
}

fn parse_ply(text: &str) -> Result<Vec<Point3>, CloudError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => {
            return Err(CloudError::Parse {
                line: 1,
                msg: "missing 'ply' magic".into(),
            })
        }
    }
    let mut vertex_count: Option<usize> = None;
    let mut in_vertex = false;
    let mut props: Vec<String> = Vec::new();
    let mut header_done = false;
    for (i, raw) in lines.by_ref() {
        let line = i + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            ["format", kind, ..] if *kind != "ascii" => {
                return Err(CloudError::Parse {
                    line,
                    msg: format!("unsupported PLY format {kind:?}"),
                })
            }
            ["element", "vertex", n] => {
                vertex_count = Some(n.parse().map_err(|_| CloudError::Parse {
                    line,
                    msg: format!("bad vertex count {n:?}"),
                })?);
                in_vertex = true;
            }
            ["element", ..] => in_vertex = false,
            ["property", "list", ..] if in_vertex => {
                return Err(CloudError::Parse {
                    line,
                    msg: "list properties on vertices are not supported".into(),
                })
            }
            ["property", _ty, name] if in_vertex => props.push(name.to_string()),
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => {}
        }
    }
    if !header_done {
        return Err(CloudError::Parse {
            line: text.lines().count(),
            msg: "PLY header not terminated".into(),
        });
    }
    let n = vertex_count.ok_or_else(|| CloudError::Parse {
        line: 1,
        msg: "PLY has no vertex element".into(),
    })?;
    let idx = xyz_indices(&props).ok_or_else(|| CloudError::Parse {
        line: 1,
        msg: "PLY vertex element must have x y z properties".into(),
    })?;
    let mut pts = Vec::with_capacity(n);
    for (i, raw) in lines {
        if pts.len() == n {
            break;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        pts.push(xyz_from_fields(&toks, idx, i + 1)?);
    }
    if pts.len() != n {
        return Err(CloudError::Parse {
            line: text.lines().count(),
            msg: format!("expected {n} vertices, found {}", pts.len()),
        });
    }
    Ok(pts)
}

/// Keep points whose coordinate along `axis` lies in `[lo, hi]`.
pub fn passthrough_filter(
    cloud: &PointCloud,
    axis: Axis,
    lo: f64,
    hi: f64,
) -> Result<PointCloud, CloudError> {
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(CloudError::InvalidRange { lo, hi });
    }
    let points = cloud
        .points
        .iter()
        .filter(|p| {
            let c = axis.get(p);
            c >= lo && c <= hi
        })
        .copied()
        .collect();
    Ok(PointCloud::new(points, cloud.frame))
}

/// Replace the members of each occupied voxel by their centroid. Output
/// order follows the first member of each voxel.
pub fn voxel_downsample(cloud: &PointCloud, leaf: f64) -> Result<PointCloud, CloudError> {
    if !(leaf > 0.0) || !leaf.is_finite() {
        return Err(CloudError::InvalidLeaf(leaf));
    }
    let mut slot: HashMap<(i64, i64, i64), usize> = HashMap::new();
    // (sum, count, min corner, max corner) per voxel
    let mut acc: Vec<(Point3, usize, Point3, Point3)> = Vec::new();
    for &p in &cloud.points {
        let key = (
            (p.x / leaf).floor() as i64,
            (p.y / leaf).floor() as i64,
            (p.z / leaf).floor() as i64,
        );
        let i = *slot.entry(key).or_insert_with(|| {
            acc.push((Point3::default(), 0, p, p));
            acc.len() - 1
        });
        let v = &mut acc[i];
        v.0 = v.0 + p;
        v.1 += 1;
        v.2 = Point3::new(v.2.x.min(p.x), v.2.y.min(p.y), v.2.z.min(p.z));
        v.3 = Point3::new(v.3.x.max(p.x), v.3.y.max(p.y), v.3.z.max(p.z));
    }
    let points = acc
        .into_iter()
        .map(|(sum, n, lo, hi)| {
            let c = sum / n as f64;
            // rounding in the sum can push the mean a ulp outside the members
            Point3::new(
                c.x.clamp(lo.x, hi.x),
                c.y.clamp(lo.y, hi.y),
                c.z.clamp(lo.z, hi.z),
            )
        })
        .collect();
    Ok(PointCloud::new(points, cloud.frame))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RansacParams {
    pub dist_thresh: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Minimum inlier fraction for the best plane to count as found.
    pub min_inlier_fraction: f64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            dist_thresh: 0.01,
            max_iters: 500,
            seed: 0,
            min_inlier_fraction: 0.2,
        }
    }
}

fn has_non_collinear_triple(pts: &[Point3]) -> bool {
    if pts.len() < 3 {
        return false;
    }
    let a = pts[0];
    let Some(b) = pts
        .iter()
        .copied()
        .max_by(|p, q| p.dist2(a).total_cmp(&q.dist2(a)))
    else {
        return false;
    };
    let ab = b - a;
    let scale = ab.norm();
    if scale == 0.0 {
        return false;
    }
    pts.iter()
        .any(|&p| ab.cross(p - a).norm() > 1e-9 * scale * scale.max(1.0))
}

/// Fit the dominant plane by random sampling of point triples.
///
/// The normal is oriented with a non-negative z component (x, then y, on
/// ties) so that results are comparable across seeds.
pub fn extract_plane_ransac(
    cloud: &PointCloud,
    params: &RansacParams,
) -> Result<PlanePatch, CloudError> {
    let pts = &cloud.points;
    if !has_non_collinear_triple(pts) {
        return Err(CloudError::DegenerateCloud);
    }
    let n = pts.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(usize, Point3, f64)> = None;
    for _ in 0..params.max_iters.max(1) {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let mut k = rng.random_range(0..n - 2);
        for taken in [i.min(j), i.max(j)] {
            if k >= taken {
                k += 1;
            }
        }
        let Some(normal) = (pts[j] - pts[i]).cross(pts[k] - pts[i]).normalized() else {
            continue;
        };
        let normal = orient(normal);
        let offset = normal.dot(pts[i]);
        let count = pts
            .iter()
            .filter(|p| (normal.dot(**p) - offset).abs() <= params.dist_thresh)
            .count();
        if best.is_none_or(|(c, _, _)| count > c) {
            best = Some((count, normal, offset));
        }
    }
    let Some((count, normal, offset)) = best else {
        return Err(CloudError::DegenerateCloud);
    };
    let fraction = count as f64 / n as f64;
    if fraction < params.min_inlier_fraction {
        return Err(CloudError::NoPlane {
            fraction,
            min: params.min_inlier_fraction,
        });
    }
    let inliers: Vec<Point3> = pts
        .iter()
        .filter(|p| (normal.dot(**p) - offset).abs() <= params.dist_thresh)
        .copied()
        .collect();
    let centroid = crate::geom::mean(&inliers).expect("at least the sample triple");
    Ok(PlanePatch {
        inliers: PointCloud::new(inliers, cloud.frame),
        normal,
        offset,
        centroid,
    })
}

fn orient(n: Point3) -> Point3 {
    let key = if n.z != 0.0 {
        n.z
    } else if n.x != 0.0 {
        n.x
    } else {
        n.y
    };
    if key < 0.0 {
        -n
    } else {
        n
    }
}

/// Flatten a robot-base cloud onto its xy plane.
pub fn project_to_2d(cloud: &PointCloud) -> Result<PointCloud, CloudError> {
    match cloud.frame {
        Frame::RobotBase | Frame::Projected2D => {}
        actual => {
            return Err(CloudError::WrongFrame {
                expected: Frame::RobotBase,
                actual,
            })
        }
    }
    Ok(PointCloud::new(
        cloud
            .points
            .iter()
            .map(|p| Point3::new(p.x, p.y, 0.0))
            .collect(),
        Frame::Projected2D,
    ))
}
