//! Small fixed-size geometry types shared by every stage.
//!
//! Points serialize as plain JSON arrays (`[x, y]` / `[x, y, z]`) so the
//! artifact schemas stay compact.

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Point2::new(a[0], a[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z component of the 3D cross product.
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point2) -> f64 {
        (self - o).norm()
    }

    pub fn dist2(self, o: Point2) -> f64 {
        let d = self - o;
        d.dot(d)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotate counter-clockwise by `theta` radians.
    pub fn rotate(self, theta: f64) -> Point2 {
        let (s, c) = theta.sin_cos();
        Point2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn to_3d(self, z: f64) -> Point3 {
        Point3::new(self.x, self.y, z)
    }
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    pub fn dot(self, o: Point3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Point3) -> Point3 {
        Point3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Point3) -> f64 {
        (self - o).norm()
    }

    pub fn dist2(self, o: Point3) -> f64 {
        let d = self - o;
        d.dot(d)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Point3> {
        let n = self.norm();
        if n > 1e-12 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn xy(self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

macro_rules! impl_vec_ops {
    ($t:ident { $($f:ident),+ }) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, o: $t) -> $t { $t { $($f: self.$f + o.$f),+ } }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, o: $t) -> $t { $t { $($f: self.$f - o.$f),+ } }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, s: f64) -> $t { $t { $($f: self.$f * s),+ } }
        }
        impl Div<f64> for $t {
            type Output = $t;
            fn div(self, s: f64) -> $t { $t { $($f: self.$f / s),+ } }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t { $t { $($f: -self.$f),+ } }
        }
    };
}

impl_vec_ops!(Point2 { x, y });
impl_vec_ops!(Point3 { x, y, z });

/// Coordinate access used by the dimension-generic algorithms (boundary
/// slicing, nearest-point queries).
pub trait Coords: Copy + PartialEq + std::fmt::Debug + Send + Sync {
    const DIM: usize;
    fn coord(&self, axis: usize) -> f64;
    fn sq_dist(&self, other: &Self) -> f64;
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
}

impl Coords for Point2 {
    const DIM: usize = 2;
    fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => panic!("axis {axis} out of range for Point2"),
        }
    }
    fn sq_dist(&self, other: &Self) -> f64 {
        Point2::dist2(*self, *other)
    }
    fn zero() -> Self {
        Point2::default()
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn scale(&self, s: f64) -> Self {
        *self * s
    }
}

impl Coords for Point3 {
    const DIM: usize = 3;
    fn coord(&self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            2 => self.z,
            _ => panic!("axis {axis} out of range for Point3"),
        }
    }
    fn sq_dist(&self, other: &Self) -> f64 {
        Point3::dist2(*self, *other)
    }
    fn zero() -> Self {
        Point3::default()
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn scale(&self, s: f64) -> Self {
        *self * s
    }
}

/// Arithmetic mean; `None` for an empty slice.
pub fn mean<P: Coords>(points: &[P]) -> Option<P> {
    if points.is_empty() {
        return None;
    }
    let sum = points.iter().fold(P::zero(), |acc, p| acc.add(p));
    Some(sum.scale(1.0 / points.len() as f64))
}

/// Indices of the `k` points nearest to `query`, closest first. Ties keep
/// the lower index first.
pub fn k_nearest<P: Coords>(points: &[P], query: &P, k: usize) -> Vec<usize> {
    let mut idx: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.sq_dist(query), i))
        .collect();
    let k = k.min(idx.len());
    if k == 0 {
        return Vec::new();
    }
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, cmp);
        idx.truncate(k);
    }
    idx.sort_by(cmp);
    idx.into_iter().map(|(_, i)| i).collect()
}

/// Normalize an angle into (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}
