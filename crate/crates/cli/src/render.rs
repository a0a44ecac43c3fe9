//! SVG views of the stage artifacts. Each renderer reads only the artifact
//! it is given.

use steelnav_core::planner::Config;
use steelnav_core::{Point2, Point3};

use crate::pipeline::{
    GraphArtifact, InputArtifact, MotionArtifact, RouteArtifact, SegmentationArtifact,
    SwitchingArtifact,
};
use crate::svg::{color, Svg};

const WIDTH: f64 = 800.0;

pub fn input_svg(a: &InputArtifact) -> String {
    let mut svg = Svg::fit(&a.points, WIDTH);
    for p in &a.points {
        svg.dot(*p, 1.0, "#555555");
    }
    svg.finish(&format!("input cloud: {} points", a.point_count))
}

pub fn segmentation_svg(a: &SegmentationArtifact) -> String {
    let mut svg = Svg::fit(&a.points, WIDTH);
    for (p, &l) in a.points.iter().zip(&a.labels) {
        svg.dot(*p, 1.0, color(l));
    }
    for c in &a.clusters {
        svg.dot(c.mean, 4.0, "black");
        svg.text(c.mean, 14.0, &format!("{} ({} nb)", c.id, c.neighbor_count));
    }
    svg.finish(&format!("segmentation: {} clusters", a.clusters.len()))
}

pub fn graph_svg(a: &GraphArtifact) -> String {
    let all: Vec<Point2> = a
        .boundaries
        .iter()
        .flat_map(|b| b.points.iter().copied())
        .chain(a.graph.vertices.iter().map(|v| v.pos))
        .collect();
    let mut svg = Svg::fit(&all, WIDTH);
    for b in &a.boundaries {
        for p in &b.points {
            svg.dot(*p, 1.5, color(b.cluster_id));
        }
    }
    for e in &a.graph.edges {
        svg.line(
            a.graph.vertices[e.u].pos,
            a.graph.vertices[e.v].pos,
            "black",
            2.0,
        );
    }
    for v in &a.graph.vertices {
        svg.dot(v.pos, 5.0, "black");
        svg.text(v.pos + Point2::new(0.01, 0.01), 14.0, &v.id.to_string());
    }
    svg.finish(&format!(
        "boundaries and graph: {} vertices, {} edges",
        a.graph.vertices.len(),
        a.graph.edges.len()
    ))
}

pub fn route_svg(a: &RouteArtifact) -> String {
    let mut svg = Svg::fit(&a.vertices, WIDTH);
    for &(u, v, _) in &a.edges {
        svg.line(a.vertices[u], a.vertices[v], "#cccccc", 6.0);
    }
    let n = a.walk.len().saturating_sub(1);
    for (i, w) in a.walk.windows(2).enumerate() {
        let (p, q) = (a.vertices[w[0]], a.vertices[w[1]]);
        // repeated traversals are offset sideways so every arrow stays visible
        let d = q - p;
        let len = d.norm().max(1e-12);
        let normal = Point2::new(-d.y, d.x) / len;
        let shift = normal * (0.004 * (i % 3) as f64);
        let hue = if n > 0 { i as f64 / n as f64 } else { 0.0 };
        let stroke = format!("hsl({:.0},70%,45%)", 240.0 * (1.0 - hue));
        svg.arrow(p + shift, q + shift, &stroke, 2.5);
        let mid = (p + q) / 2.0 + shift;
        svg.text(mid, 12.0, &(i + 1).to_string());
    }
    for (i, v) in a.vertices.iter().enumerate() {
        let fill = if i == a.v_s {
            "green"
        } else if i == a.v_t {
            "red"
        } else {
            "black"
        };
        svg.dot(*v, 5.0, fill);
    }
    svg.finish(&format!(
        "route {} -> {}: length {:.3} over graph weight {:.3}",
        a.v_s, a.v_t, a.total_length, a.graph_weight
    ))
}

fn footprint_outline(c: &Config, (width, length): (f64, f64)) -> Vec<Point2> {
    let (hl, hw) = (length / 2.0, width / 2.0);
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
        .iter()
        .map(|&(x, y)| Point2::new(x, y).rotate(c.theta) + c.pos())
        .collect()
}

pub fn motion_svg(a: &MotionArtifact) -> String {
    let all: Vec<Point2> = a.boundaries.iter().flatten().copied().collect();
    let mut svg = Svg::fit(&all, WIDTH);
    for (i, b) in a.boundaries.iter().enumerate() {
        for p in b {
            svg.dot(*p, 1.5, color(i));
        }
    }
    for step in &a.paths {
        let pts: Vec<Point2> = step.configs.iter().map(Config::pos).collect();
        svg.polyline(&pts, color(step.step), 2.0);
        for c in &step.configs {
            svg.polygon(
                &footprint_outline(c, a.footprint),
                color(step.step),
                "none",
                0.5,
            );
        }
    }
    for c in &a.vias {
        svg.dot(c.pos(), 4.0, "black");
    }
    svg.finish(&format!(
        "motion: {} planned steps, {} failed",
        a.paths.len(),
        a.failures.len()
    ))
}

/// Orthonormal in-plane basis for a plane normal.
fn plane_basis(n: Point3) -> (Point3, Point3) {
    let a = if n.x.abs() < 0.9 {
        Point3::new(1.0, 0.0, 0.0)
    } else {
        Point3::new(0.0, 1.0, 0.0)
    };
    let u = n
        .cross(a)
        .normalized()
        .unwrap_or(Point3::new(1.0, 0.0, 0.0));
    let v = n.cross(u);
    (u, v)
}

pub fn switching_svg(a: &SwitchingArtifact) -> String {
    let r = &a.report;
    let title = format!("switching: mode {:?}", r.decision.mode);
    let Some(plane) = &r.plane else {
        let mut svg = Svg::fit(&[], WIDTH);
        svg.text(Point2::new(0.1, 0.5), 16.0, "no plane available");
        return svg.finish(&title);
    };
    let (u, v) = plane_basis(plane.normal);
    let to2 = |p: Point3| Point2::new(p.dot(u), p.dot(v));
    let bpts: Vec<Point2> = r
        .boundary
        .as_ref()
        .map(|b| b.points.iter().map(|p| to2(*p)).collect())
        .unwrap_or_default();
    let mut svg = Svg::fit(&bpts, WIDTH);
    for p in &bpts {
        svg.dot(*p, 1.5, "#555555");
    }
    if let Some(area) = &r.area {
        for (i, c) in area.candidates.iter().enumerate() {
            let corners: Vec<Point2> = c.test_points[..4].iter().map(|p| to2(*p)).collect();
            let accepted = area.accepted == Some(i);
            let (stroke, fill, w) = if accepted {
                ("green", "rgba(0,128,0,0.2)", 2.5)
            } else {
                ("#d62728", "none", 1.0)
            };
            svg.polygon(&corners, stroke, fill, w);
            for (p, ok) in c.test_points.iter().zip(&c.passed) {
                svg.dot(to2(*p), 2.5, if *ok { "green" } else { "red" });
            }
            svg.dot(to2(c.anchor), 3.0, "black");
        }
    }
    if let Some(pose) = &r.decision.pose {
        let o = to2(pose.position);
        let scale = 0.1;
        svg.arrow(o, to2(pose.position + pose.e_x * scale), "#d62728", 2.0);
        svg.arrow(o, to2(pose.position + pose.e_y * scale), "#2ca02c", 2.0);
    }
    svg.finish(&title)
}
