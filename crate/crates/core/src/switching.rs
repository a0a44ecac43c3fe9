//! Switching control between mobile and inch-worm modes.
//!
//! Three predicates feed the decision: a plane was found in front of the
//! robot, the plane has room for a foot of the configured size, and the
//! plane sits at the height of the robot base.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::boundary::{ncbe, Boundary, BoundaryError};
use crate::cloud::{
    extract_plane_ransac, transform_point, CloudError, PlanePatch, PointCloud, RansacParams,
    RigidTransform,
};
use crate::geom::{k_nearest, Point3};

#[derive(Debug, Error)]
pub enum SwitchingError {
    #[error("foot anchor coincides with the plane centroid")]
    DegenerateFrame,
    #[error("pose presence ({pose}) contradicts area availability ({s_am})")]
    InconsistentInput { s_am: bool, pose: bool },
    #[error("invalid foot parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

/// Foot rectangle and the area-check tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootParams {
    pub width: f64,
    pub length: f64,
    /// Relative distance tolerance for test points near the boundary.
    pub tolerance: f64,
    /// Number of boundary points nearest the centroid tried as anchors.
    pub n: usize,
    /// Number of nearest boundary points each test point is compared with.
    pub m: usize,
}

impl Default for FootParams {
    fn default() -> Self {
        FootParams {
            width: 0.2,
            length: 0.3,
            tolerance: 0.02,
            n: 5,
            m: 3,
        }
    }
}

impl FootParams {
    pub fn validate(&self) -> Result<(), SwitchingError> {
        if !(self.width > 0.0 && self.length > 0.0) {
            return Err(SwitchingError::InvalidParams(
                "width and length must be positive".into(),
            ));
        }
        if !(self.tolerance >= 0.0) {
            return Err(SwitchingError::InvalidParams(
                "tolerance must be non-negative".into(),
            ));
        }
        if self.n == 0 || self.m == 0 {
            return Err(SwitchingError::InvalidParams(
                "n and m must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePose {
    pub e_x: Point3,
    pub e_y: Point3,
    pub e_z: Point3,
    pub position: Point3,
}

impl SurfacePose {
    /// Largest deviation from a right-handed orthonormal triad.
    pub fn orthonormality_residual(&self) -> f64 {
        let axes = [self.e_x, self.e_y, self.e_z];
        let mut r: f64 = 0.0;
        for (i, a) in axes.iter().enumerate() {
            r = r.max((a.norm() - 1.0).abs());
            for b in &axes[i + 1..] {
                r = r.max(a.dot(*b).abs());
            }
        }
        r.max(self.e_x.cross(self.e_y).dist(self.e_z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Mobile,
    Inchworm,
    Stop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchDecision {
    pub s_pa: bool,
    pub s_am: bool,
    pub s_hc: bool,
    pub mode: Mode,
    pub pose: Option<SurfacePose>,
}

/// One candidate foot rectangle and the outcome of its eight test points
/// (four corners, then the four edge midpoints).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRect {
    pub anchor: Point3,
    pub test_points: Vec<Point3>,
    pub passed: Vec<bool>,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub candidates: Vec<CandidateRect>,
    /// Index into `candidates` of the first accepted rectangle.
    pub accepted: Option<usize>,
    pub pose: Option<SurfacePose>,
}

pub fn plane_available(planar: &PointCloud) -> bool {
    !planar.is_empty()
}

/// Local frame at an anchor: x from the centroid towards the anchor
/// (projected into the plane), z along the plane normal, y = z × x.
pub fn anchor_frame(
    anchor: Point3,
    centroid: Point3,
    normal: Point3,
) -> Result<(Point3, Point3, Point3), SwitchingError> {
    let e_z = normal.normalized().ok_or(SwitchingError::DegenerateFrame)?;
    let d = anchor - centroid;
    let e_x = (d - e_z * d.dot(e_z))
        .normalized()
        .ok_or(SwitchingError::DegenerateFrame)?;
    let e_y = e_z.cross(e_x);
    Ok((e_x, e_y, e_z))
}

/// Whether a single test point counts as inside: for each of its `m`
/// nearest boundary points q, either r is strictly closer to the centroid
/// than q or the relative excess is below `tolerance`.
pub fn test_point_passes(
    boundary: &[Point3],
    centroid: Point3,
    r: Point3,
    m: usize,
    tolerance: f64,
) -> bool {
    let d_r = r.dist(centroid);
    k_nearest(boundary, &r, m).into_iter().all(|i| {
        let d_q = boundary[i].dist(centroid);
        d_r < d_q || (d_r > 0.0 && (d_r - d_q) / d_r < tolerance)
    })
}

/// Foot rectangle test points for an anchor and frame: corners
/// `anchor ± (w/2)·e_y` and their copies shifted by `l` towards the
/// centroid, followed by the four edge midpoints.
pub fn rectangle_points(anchor: Point3, e_x: Point3, e_y: Point3, fp: &FootParams) -> Vec<Point3> {
    let half_w = e_y * (fp.width / 2.0);
    let back = e_x * fp.length;
    let corners = [
        anchor + half_w,
        anchor - half_w,
        anchor - half_w - back,
        anchor + half_w - back,
    ];
    let mut pts = corners.to_vec();
    for i in 0..4 {
        pts.push((corners[i] + corners[(i + 1) % 4]) / 2.0);
    }
    pts
}

pub fn area_check_and_pose(
    b: &Boundary<Point3>,
    centroid: Point3,
    normal: Point3,
    fp: &FootParams,
) -> Result<Option<SurfacePose>, SwitchingError> {
    Ok(area_check_report(b, centroid, normal, fp)?.pose)
}

/// Area check that also returns every candidate rectangle for rendering.
/// Anchors are tried nearest-first; the first fully passing one wins.
pub fn area_check_report(
    b: &Boundary<Point3>,
    centroid: Point3,
    normal: Point3,
    fp: &FootParams,
) -> Result<AreaReport, SwitchingError> {
    fp.validate()?;
    if b.points.is_empty() {
        return Err(BoundaryError::EmptyBoundary.into());
    }
    let mut report = AreaReport {
        candidates: Vec::new(),
        accepted: None,
        pose: None,
    };
    for idx in k_nearest(&b.points, &centroid, fp.n) {
        let anchor = b.points[idx];
        let (e_x, e_y, e_z) = anchor_frame(anchor, centroid, normal)?;
        let test_points = rectangle_points(anchor, e_x, e_y, fp);
        let passed: Vec<bool> = test_points
            .iter()
            .map(|r| test_point_passes(&b.points, centroid, *r, fp.m, fp.tolerance))
            .collect();
        let accepted = passed.iter().all(|p| *p);
        if accepted && report.accepted.is_none() {
            let r_c = test_points.iter().fold(Point3::default(), |a, p| a + *p) / 8.0;
            report.accepted = Some(report.candidates.len());
            report.pose = Some(SurfacePose {
                e_x,
                e_y,
                e_z,
                // the -l/4 offset along the foot's local y axis
                position: r_c - e_y * (fp.length / 4.0),
            });
        }
        report.candidates.push(CandidateRect {
            anchor,
            test_points,
            passed,
            accepted,
        });
    }
    Ok(report)
}

/// Transform the surface centroid into the robot base frame and compare
/// its height with the base height (closed tolerance band).
pub fn height_available(
    surface_centroid_cam: Point3,
    cam_to_base: &RigidTransform,
    base_height: f64,
    tol: f64,
) -> bool {
    let z = transform_point(surface_centroid_cam, cam_to_base).z;
    (z - base_height).abs() <= tol
}

pub fn switch_decision(
    s_pa: bool,
    s_am: bool,
    s_hc: bool,
    pose: Option<SurfacePose>,
) -> Result<SwitchDecision, SwitchingError> {
    if s_am != pose.is_some() {
        return Err(SwitchingError::InconsistentInput {
            s_am,
            pose: pose.is_some(),
        });
    }
    let mode = match (s_pa, s_am, s_hc) {
        (true, true, true) => Mode::Mobile,
        (true, true, false) => Mode::Inchworm,
        _ => Mode::Stop,
    };
    Ok(SwitchDecision {
        s_pa,
        s_am,
        s_hc,
        mode,
        pose,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingParams {
    pub ransac: RansacParams,
    /// Boundary slicing factor; `None` picks it from the point spacing.
    pub alpha_s: Option<f64>,
    pub foot: FootParams,
    pub cam_to_base: RigidTransform,
    pub base_height: f64,
    pub height_tol: f64,
}

impl Default for SwitchingParams {
    fn default() -> Self {
        SwitchingParams {
            ransac: RansacParams::default(),
            alpha_s: None,
            foot: FootParams::default(),
            cam_to_base: RigidTransform::identity(),
            base_height: 0.0,
            height_tol: 0.005,
        }
    }
}

/// Everything computed on the way to a decision, for reporting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchingReport {
    pub decision: SwitchDecision,
    pub plane: Option<PlanePatch>,
    pub boundary: Option<Boundary<Point3>>,
    pub area: Option<AreaReport>,
    /// Plane centroid in the robot base frame.
    pub centroid_base: Option<Point3>,
}

/// Run the plane → area → height chain on a camera-frame cloud.
pub fn assess_surface(
    cloud: &PointCloud,
    params: &SwitchingParams,
) -> Result<SwitchingReport, SwitchingError> {
    params.foot.validate()?;
    let plane = match extract_plane_ransac(cloud, &params.ransac) {
        Ok(p) => Some(p),
        Err(CloudError::DegenerateCloud | CloudError::NoPlane { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let empty = PointCloud::empty(cloud.frame);
    let planar = plane.as_ref().map_or(&empty, |p| &p.inliers);
    let s_pa = plane_available(planar);
    let Some(plane) = plane.filter(|_| s_pa) else {
        return Ok(SwitchingReport {
            decision: switch_decision(false, false, false, None)?,
            plane: None,
            boundary: None,
            area: None,
            centroid_base: None,
        });
    };

    let alpha = params
        .alpha_s
        .or_else(|| crate::boundary::default_alpha(&plane.inliers.points))
        .unwrap_or(params.ransac.dist_thresh.max(1e-3));
    let boundary = ncbe(&plane.inliers.points, alpha)?;
    let area = area_check_report(&boundary, plane.centroid, plane.normal, &params.foot)?;
    let s_am = area.pose.is_some();
    let centroid_base = transform_point(plane.centroid, &params.cam_to_base);
    let s_hc = s_am
        && height_available(
            plane.centroid,
            &params.cam_to_base,
            params.base_height,
            params.height_tol,
        );
    let decision = switch_decision(true, s_am, s_hc, area.pose)?;
    Ok(SwitchingReport {
        decision,
        plane: Some(plane),
        boundary: Some(boundary),
        area: Some(area),
        centroid_base: Some(centroid_base),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::Frame;

    fn grid_plane(side: f64, pitch: f64, z: f64) -> Vec<Point3> {
        let n = (side / pitch).round() as usize;
        let mut pts = Vec::new();
        for i in 0..=n {
            for j in 0..=n {
                pts.push(Point3::new(i as f64 * pitch, j as f64 * pitch, z));
            }
        }
        pts
    }

    /// Jittered grid so that nearest-point rankings have no exact ties.
    fn square_scene(side: f64, pitch: f64) -> (Boundary<Point3>, Point3, Point3) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(side.to_bits());
        let pts: Vec<Point3> = grid_plane(side, pitch, 0.0)
            .into_iter()
            .map(|p| {
                let j = pitch * 0.1;
                Point3::new(
                    p.x + rng.random_range(-j..j),
                    p.y + rng.random_range(-j..j),
                    0.0,
                )
            })
            .collect();
        let b = ncbe(&pts, 2.0 * pitch).unwrap();
        let c = b.center;
        (b, c, Point3::new(0.0, 0.0, 1.0))
    }

    #[test]
    fn one_metre_square_fits_the_foot() {
        let (b, c, n) = square_scene(1.0, 0.02);
        let fp = FootParams {
            width: 0.2,
            length: 0.3,
            tolerance: 0.02,
            n: 5,
            m: 3,
        };
        let pose = area_check_and_pose(&b, c, n, &fp)
            .unwrap()
            .expect("foot fits");
        assert!(pose.orthonormality_residual() <= 1e-6);
        assert!(pose.e_z.dist(n) < 1e-12);
    }

    #[test]
    fn tiny_square_does_not_fit() {
        let (b, c, n) = square_scene(0.05, 0.005);
        let pose = area_check_and_pose(&b, c, n, &FootParams::default()).unwrap();
        assert!(pose.is_none());
    }

    #[test]
    fn axis_aligned_anchor_frame() {
        let (e_x, e_y, e_z) = anchor_frame(
            Point3::new(1.0, 0.0, 0.0),
            Point3::default(),
            Point3::new(0.0, 0.0, 1.0),
        )
        .unwrap();
        assert!(e_x.dist(Point3::new(1., 0., 0.)) < 1e-12);
        assert!(e_y.dist(Point3::new(0., 1., 0.)) < 1e-12);
        assert!(e_z.dist(Point3::new(0., 0., 1.)) < 1e-12);
        assert!(matches!(
            anchor_frame(Point3::default(), Point3::default(), e_z),
            Err(SwitchingError::DegenerateFrame)
        ));
    }

    #[test]
    fn circle_boundary_anchor_frame_via_area_check() {
        let pts: Vec<Point3> = (0..360)
            .map(|k| {
                let t = (k as f64).to_radians();
                // the anchor at angle 0 sits marginally closer to the centre
                let r = if k == 0 { 0.999 } else { 1.0 };
                Point3::new(r * t.cos(), r * t.sin(), 0.0)
            })
            .collect();
        let b = Boundary {
            cluster_id: 0,
            center: Point3::default(),
            alpha_s: 0.05,
            points: pts,
        };
        let fp = FootParams {
            n: 1,
            ..FootParams::default()
        };
        let report =
            area_check_report(&b, Point3::default(), Point3::new(0., 0., 1.), &fp).unwrap();
        assert_eq!(report.candidates.len(), 1);
        assert_eq!(report.candidates[0].anchor, Point3::new(0.999, 0.0, 0.0));
        let tp = &report.candidates[0].test_points;
        assert!(tp[0].dist(Point3::new(0.999, 0.1, 0.0)) < 1e-12);
        assert!(tp[2].dist(Point3::new(0.699, -0.1, 0.0)) < 1e-12);
    }

    #[test]
    fn height_check() {
        let id = RigidTransform::identity();
        assert!(height_available(Point3::new(0., 0., 0.3), &id, 0.3, 0.0));
        let low = Point3::new(0.2, 0.0, -0.07);
        assert!(!height_available(low, &id, 0.0, 0.01));
        // exactly at the tolerance (representable values)
        assert!(height_available(Point3::new(0., 0., 0.25), &id, 0.0, 0.25));
        let up = RigidTransform::translation(Point3::new(0.0, 0.0, 0.07));
        assert!(height_available(low, &up, 0.0, 0.01));
    }

    #[test]
    fn decision_truth_table() {
        let pose = SurfacePose {
            e_x: Point3::new(1., 0., 0.),
            e_y: Point3::new(0., 1., 0.),
            e_z: Point3::new(0., 0., 1.),
            position: Point3::default(),
        };
        for bits in 0..8u8 {
            let (pa, am, hc) = (bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
            let d = switch_decision(pa, am, hc, am.then_some(pose)).unwrap();
            let expect = if pa && am && hc {
                Mode::Mobile
            } else if pa && am {
                Mode::Inchworm
            } else {
                Mode::Stop
            };
            assert_eq!(d.mode, expect, "{pa} {am} {hc}");
            assert_eq!(d.pose.is_some(), am);
            assert!(switch_decision(pa, am, hc, (!am).then_some(pose)).is_err());
        }
    }

    #[test]
    fn decision_json_shape() {
        let d = switch_decision(true, false, false, None).unwrap();
        let v = serde_json::to_value(&d).unwrap();
        assert_eq!(v["mode"], "stop");
        assert!(v["pose"].is_null());
    }

    #[test]
    fn plane_availability() {
        assert!(!plane_available(&PointCloud::empty(Frame::Camera)));
        assert!(plane_available(&PointCloud::new(
            vec![Point3::default()],
            Frame::Camera
        )));
    }

    #[test]
    fn surface_chain_modes() {
        let params = SwitchingParams::default();
        let flat = PointCloud::new(grid_plane(1.0, 0.02, 0.0), Frame::Camera);
        let r = assess_surface(&flat, &params).unwrap();
        assert_eq!(r.decision.mode, Mode::Mobile);

        let low = PointCloud::new(grid_plane(1.0, 0.02, -0.07), Frame::Camera);
        let p = SwitchingParams {
            height_tol: 0.01,
            ..params
        };
        assert_eq!(
            assess_surface(&low, &p).unwrap().decision.mode,
            Mode::Inchworm
        );

        let empty = PointCloud::empty(Frame::Camera);
        let r = assess_surface(&empty, &params).unwrap();
        assert_eq!(r.decision.mode, Mode::Stop);
        assert!(!r.decision.s_pa);

        let small = PointCloud::new(grid_plane(0.05, 0.005, 0.0), Frame::Camera);
        assert_eq!(
            assess_surface(&small, &params).unwrap().decision.mode,
            Mode::Stop
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn rotate_scene(
            b: &Boundary<Point3>,
            c: Point3,
            n: Point3,
            t: &RigidTransform,
        ) -> (Boundary<Point3>, Point3, Point3) {
            let pts = b.points.iter().map(|p| transform_point(*p, t)).collect();
            (
                Boundary {
                    points: pts,
                    center: transform_point(b.center, t),
                    ..b.clone()
                },
                transform_point(c, t),
                t.rotate(n),
            )
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn area_check_is_rigid_invariant(
                side in 0.2..1.2f64,
                ax in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
                angle in -3.1..3.1f64,
                shift in (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64),
            ) {
                let (b, c, n) = square_scene(side, 0.025);
                let fp = FootParams::default();
                let before = area_check_report(&b, c, n, &fp).unwrap();
                let t = RigidTransform::from_axis_angle(
                    Point3::new(ax.0, ax.1, ax.2 + 1e-3), angle, Point3::new(shift.0, shift.1, shift.2));
                let (b2, c2, n2) = rotate_scene(&b, c, n, &t);
                let after = area_check_report(&b2, c2, n2, &fp).unwrap();
                prop_assert_eq!(before.accepted, after.accepted);
                if let (Some(p), Some(q)) = (before.pose, after.pose) {
                    prop_assert!(transform_point(p.position, &t).dist(q.position) < 1e-6);
                    prop_assert!(t.rotate(p.e_x).dist(q.e_x) < 1e-6);
                    prop_assert!(t.rotate(p.e_y).dist(q.e_y) < 1e-6);
                    prop_assert!(q.orthonormality_residual() < 1e-6);
                }
            }

            #[test]
            fn zero_tolerance_matches_inside_test(
                raw in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 3..60),
                q in (-1.5..1.5f64, -1.5..1.5f64),
                m in 1usize..6,
            ) {
                let pts: Vec<Point3> = raw.iter().map(|&(x, y)| Point3::new(x, y, 0.0)).collect();
                let b = Boundary { cluster_id: 0, center: Point3::default(), alpha_s: 0.1, points: pts };
                let r = Point3::new(q.0, q.1, 0.0);
                let area_rule = test_point_passes(&b.points, b.center, r, m, 0.0);
                let inside = crate::boundary::point_in_boundary(&b, &r, m).unwrap();
                prop_assert_eq!(area_rule, inside);
            }
        }
    }
}
