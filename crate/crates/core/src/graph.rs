//! Structure graph from a segmentation: one vertex per cluster center, one
//! per shared border, and bar-end vertices where a cluster's principal axis
//! leaves its boundary far enough from everything already placed.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::boundary::Boundary;
use crate::geom::Point2;
use crate::route::{Edge, WeightedGraph};
use crate::segmentation::{sample_covariance, ClusterSet};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("cluster has fewer than two distinct points")]
    DegenerateCluster,
    #[error("boundary of cluster {0} is empty")]
    EmptyBoundary(usize),
    #[error("d_min must be finite and non-negative, got {0}")]
    InvalidDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Center,
    BorderMid,
    BarEnd,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vertex {
    pub id: usize,
    pub kind: VertexKind,
    pub pos: Point2,
    /// Owning cluster, or both clusters for a border midpoint.
    pub clusters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub component_count: usize,
    pub warnings: Vec<String>,
}

impl StructureGraph {
    pub fn to_weighted(&self) -> WeightedGraph {
        WeightedGraph {
            n: self.vertices.len(),
            edges: self.edges.clone(),
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// One `u v w` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {}", e.u, e.v, e.w);
        }
        s
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|e| (e.u == v) as usize + (e.v == v) as usize)
            .sum()
    }

    fn add_vertex(&mut self, kind: VertexKind, pos: Point2, clusters: Vec<usize>) -> usize {
        let id = self.vertices.len();
        self.vertices.push(Vertex {
            id,
            kind,
            pos,
            clusters,
        });
        id
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        let w = self.vertices[u].pos.dist(self.vertices[v].pos);
        self.edges.push(Edge { u, v, w });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrincipalLine {
    pub point: Point2,
    /// Unit direction, x >= 0 (y > 0 when x == 0).
    pub direction: Point2,
    /// Covariance eigenvalues, larger first.
    pub eigenvalues: (f64, f64),
}

impl PrincipalLine {
    pub fn eigen_gap(&self) -> f64 {
        self.eigenvalues.0 - self.eigenvalues.1
    }
}

/// Leading principal axis of a point set through its mean.
pub fn fit_principal_line(points: &[Point2]) -> Result<PrincipalLine, GraphError> {
    let (mean, c) = sample_covariance(points).ok_or(GraphError::DegenerateCluster)?;
    let (lo, hi) = c.eigenvalues();
    if !(hi > 0.0) {
        return Err(GraphError::DegenerateCluster);
    }
    let dir = if c.xy.abs() <= 1e-15 * hi {
        if c.xx >= c.yy {
            Point2::new(1.0, 0.0)
        } else {
            Point2::new(0.0, 1.0)
        }
    } else if c.xx >= c.yy {
        Point2::new(hi - c.yy, c.xy)
    } else {
        Point2::new(c.xy, hi - c.xx)
    };
    let mut dir = dir / dir.norm();
    if dir.x < 0.0 || (dir.x == 0.0 && dir.y < 0.0) {
        dir = -dir;
    }
    Ok(PrincipalLine {
        point: mean,
        direction: dir,
        eigenvalues: (hi, lo),
    })
}

/// Boundary points with the smallest and largest projection on the line.
pub fn line_boundary_intersections(
    line: &PrincipalLine,
    b: &Boundary<Point2>,
) -> Result<(Point2, Point2), GraphError> {
    let proj = |p: &Point2| (*p - line.point).dot(line.direction);
    let mut it = b.points.iter();
    let first = it.next().ok_or(GraphError::EmptyBoundary(b.cluster_id))?;
    let (mut lo, mut hi) = (first, first);
    for p in it {
        if proj(p) < proj(lo) {
            lo = p;
        }
        if proj(p) > proj(hi) {
            hi = p;
        }
    }
    Ok((*lo, *hi))
}

/// Build the structure graph. Vertex ids: centers in cluster order, border
/// midpoints in cluster-pair order, then bar ends in cluster order.
pub fn build_graph(cs: &ClusterSet, d_min: f64) -> Result<StructureGraph, GraphError> {
    if !(d_min >= 0.0) || !d_min.is_finite() {
        return Err(GraphError::InvalidDistance(d_min));
    }
    let mut g = StructureGraph {
        vertices: Vec::new(),
        edges: Vec::new(),
        component_count: 0,
        warnings: Vec::new(),
    };
    for c in &cs.clusters {
        g.add_vertex(VertexKind::Center, c.mean, vec![c.id]);
    }
    for border in &cs.neighbors.borders {
        let (a, b) = (border.cluster_a, border.cluster_b);
        let mid = g.add_vertex(VertexKind::BorderMid, border.midpoint, vec![a, b]);
        g.add_edge(a, mid);
        g.add_edge(mid, b);
    }
    for (c, b) in cs.clusters.iter().zip(&cs.boundaries) {
        let Ok(line) = fit_principal_line(&c.points) else {
            g.warnings
                .push(format!("cluster {} is degenerate; no bar ends", c.id));
            continue;
        };
        let (lo, hi) = line_boundary_intersections(&line, b)?;
        for end in [lo, hi] {
            if g.vertices.iter().all(|v| v.pos.dist(end) > d_min) {
                let v = g.add_vertex(VertexKind::BarEnd, end, vec![c.id]);
                g.add_edge(v, c.id);
            }
        }
    }
    let comp = g.to_weighted().components();
    g.component_count = comp.iter().copied().max().map_or(0, |m| m + 1);
    if g.component_count > 1 {
        g.warnings.push(format!(
            "graph is disconnected ({} components)",
            g.component_count
        ));
    }
    Ok(g)
}
