//! Pipeline stages and their artifacts. Every stage result is computed in
//! memory first; files are written only once the whole run has succeeded
//! or partially succeeded.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use steelnav_core::boundary::{default_alpha, Border, Boundary};
use steelnav_core::cloud::{
    load_cloud, passthrough_filter, voxel_downsample, CloudFormat, PointCloud, RansacParams,
};
use steelnav_core::graph::{build_graph, StructureGraph};
use steelnav_core::planner::{
    plan_route, Config, EdgeFailure, Footprint, MotionPath, PibcParams, RrtParams,
};
use steelnav_core::route::{
    brute_force_detailed, dijkstra, parse_edge_list, vocpp_detailed, Provenance, WeightedGraph,
    BRUTE_FORCE_EDGE_LIMIT,
};
use steelnav_core::segmentation::{
    segment_structure, ClusterSet, GmmParams, RatioRecord, SegmentationParams,
};
use steelnav_core::switching::{assess_surface, FootParams, SwitchingParams, SwitchingReport};
use steelnav_core::synth::{generate, GroundTruth, Shape, StructureSpec};
use steelnav_core::Point2;

use crate::config::{PipelineConfig, SCHEMA_VERSION};
use crate::render;

/// Process exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Partial,
}

impl Outcome {
    pub fn code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial => 2,
        }
    }
}

/// One output file, held in memory until the run is committed.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub fn json_artifact<T: Serialize>(name: &str, value: &T) -> Artifact {
    let mut contents = serde_json::to_string_pretty(value).expect("artifact serializes");
    contents.push('\n');
    Artifact {
        name: name.to_string(),
        contents,
    }
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.contents)
                .with_context(|| format!("writing {}", path.display()))?;
            Ok(path)
        })
        .collect()
}

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.with_context(|| format!("stage {name} failed"))
}

// ---------------------------------------------------------------- switching

#[derive(Debug, Serialize)]
pub struct SwitchingArtifact {
    pub schema_version: u32,
    pub input: String,
    pub point_count: usize,
    pub report: SwitchingReport,
}

pub fn switching_params(cfg: &PipelineConfig) -> SwitchingParams {
    let w = &cfg.switching;
    SwitchingParams {
        ransac: RansacParams {
            dist_thresh: w.ransac_dist_thresh,
            max_iters: w.ransac_max_iters,
            seed: cfg.seed,
            min_inlier_fraction: w.min_inlier_fraction,
        },
        alpha_s: w.alpha_s,
        foot: FootParams {
            width: w.foot_width,
            length: w.foot_length,
            tolerance: w.tolerance,
            n: w.n,
            m: w.m,
        },
        cam_to_base: w.cam_to_base,
        base_height: w.base_height,
        height_tol: w.height_tol,
    }
}

fn ingest(cfg: &PipelineConfig, path: &Path) -> Result<PointCloud> {
    let mut cloud = load_cloud(path, CloudFormat::from_path(path))?;
    for p in &cfg.ingest.passthrough {
        cloud = passthrough_filter(&cloud, p.axis, p.min, p.max)?;
    }
    if let Some(leaf) = cfg.ingest.voxel_leaf {
        cloud = voxel_downsample(&cloud, leaf)?;
    }
    Ok(cloud)
}

/// Plane, area and height checks on a camera-frame cloud.
pub fn run_switching(cfg: &PipelineConfig) -> Result<(SwitchingArtifact, Vec<Artifact>)> {
    let path = cfg
        .input
        .as_deref()
        .ok_or_else(|| anyhow!("switching needs an input cloud"))?;
    let cloud = stage("ingest", ingest(cfg, path))?;
    let report = stage(
        "switching",
        assess_surface(&cloud, &switching_params(cfg)).map_err(Into::into),
    )?;
    let art = SwitchingArtifact {
        schema_version: SCHEMA_VERSION,
        input: path.display().to_string(),
        point_count: cloud.len(),
        report,
    };
    let files = vec![
        json_artifact("switching.json", &art),
        Artifact {
            name: "switching.svg".into(),
            contents: render::switching_svg(&art),
        },
    ];
    Ok((art, files))
}

// --------------------------------------------------------------- navigation

#[derive(Debug, Serialize)]
pub struct InputArtifact {
    pub schema_version: u32,
    /// File path, or `synth:<shape>` for a generated structure.
    pub source: String,
    pub point_count: usize,
    pub points: Vec<Point2>,
}

#[derive(Debug, Serialize)]
pub struct ClusterSummary {
    pub id: usize,
    pub size: usize,
    pub mean: Point2,
    pub neighbor_count: usize,
}

#[derive(Debug, Serialize)]
pub struct BorderSummary {
    pub clusters: (usize, usize),
    pub length: f64,
    pub midpoint: Point2,
}

#[derive(Debug, Serialize)]
pub struct SegmentationArtifact {
    pub schema_version: u32,
    pub seed: u64,
    pub alpha_s: f64,
    pub l_b: f64,
    pub eps_border: f64,
    /// Selected component count.
    pub n_o: usize,
    pub ratio_table: Vec<RatioRecord>,
    pub clusters: Vec<ClusterSummary>,
    pub borders: Vec<BorderSummary>,
    pub points: Vec<Point2>,
    pub labels: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct GraphArtifact {
    pub schema_version: u32,
    pub d_min: f64,
    pub boundaries: Vec<Boundary<Point2>>,
    pub graph: StructureGraph,
}

#[derive(Debug, Serialize)]
pub struct RouteArtifact {
    pub schema_version: u32,
    pub v_s: usize,
    pub v_t: usize,
    pub vertices: Vec<Point2>,
    /// Graph edges as (u, v, w), indexed like `edge_visits`.
    pub edges: Vec<(usize, usize, f64)>,
    pub walk: Vec<usize>,
    /// Graph edge index per step.
    pub edge_sequence: Vec<usize>,
    pub edge_visits: Vec<usize>,
    pub duplicated: Vec<usize>,
    pub provenance: Option<Provenance>,
    pub total_length: f64,
    pub graph_weight: f64,
    pub covered_edges: usize,
    /// Edges outside the start vertex's component, never visited.
    pub uncovered_edges: Vec<usize>,
}

#[derive(Debug, Serialize)]
pub struct PlannedStep {
    pub step: usize,
    pub edge: (usize, usize),
    pub iterations: usize,
    pub configs: Vec<Config>,
}

#[derive(Debug, Serialize)]
pub struct MotionArtifact {
    pub schema_version: u32,
    pub footprint: (f64, f64),
    pub rrt: RrtParams,
    pub pibc: PibcParams,
    pub boundaries: Vec<Vec<Point2>>,
    pub vias: Vec<Config>,
    pub paths: Vec<PlannedStep>,
    pub failures: Vec<EdgeFailure>,
}

#[derive(Debug, Serialize)]
pub struct FailureManifest {
    pub schema_version: u32,
    pub uncovered_edges: Vec<usize>,
    pub failed_steps: Vec<EdgeFailure>,
}

pub struct Navigation {
    pub input: InputArtifact,
    pub segmentation: SegmentationArtifact,
    pub graph: GraphArtifact,
    pub route: RouteArtifact,
    pub motion: MotionArtifact,
    pub ground_truth: Option<GroundTruth>,
    pub outcome: Outcome,
}

impl Navigation {
    pub fn artifacts(&self) -> Vec<Artifact> {
        let mut out = vec![
            json_artifact("input.json", &self.input),
            json_artifact("segmentation.json", &self.segmentation),
            json_artifact("graph.json", &self.graph),
            json_artifact("route.json", &self.route),
            json_artifact("motion.json", &self.motion),
            svg("input.svg", render::input_svg(&self.input)),
            svg(
                "segmentation.svg",
                render::segmentation_svg(&self.segmentation),
            ),
            svg("graph.svg", render::graph_svg(&self.graph)),
            svg("route.svg", render::route_svg(&self.route)),
            svg("motion.svg", render::motion_svg(&self.motion)),
        ];
        if self.outcome == Outcome::Partial {
            out.push(json_artifact(
                "failures.json",
                &FailureManifest {
                    schema_version: SCHEMA_VERSION,
                    uncovered_edges: self.route.uncovered_edges.clone(),
                    failed_steps: self.motion.failures.clone(),
                },
            ));
        }
        out
    }
}

fn svg(name: &str, contents: String) -> Artifact {
    Artifact {
        name: name.into(),
        contents,
    }
}

pub fn structure_spec(cfg: &PipelineConfig, shape: Shape) -> StructureSpec {
    StructureSpec {
        shape,
        bar_length: cfg.synth.bar_length,
        bar_width: cfg.synth.bar_width,
        density: cfg.synth.density,
        noise_sigma: cfg.synth.noise_sigma,
        seed: cfg.seed,
    }
}

pub fn footprint(cfg: &PipelineConfig) -> Footprint {
    Footprint::new(cfg.footprint.width, cfg.footprint.length)
}

pub fn rrt_params(cfg: &PipelineConfig) -> RrtParams {
    let fp = footprint(cfg);
    let d = RrtParams::for_footprint(&fp);
    let p = &cfg.planner;
    RrtParams {
        step: p.step.unwrap_or(d.step),
        theta_step: p.theta_step,
        goal_tol: p.goal_tol.unwrap_or(d.goal_tol),
        goal_bias: p.goal_bias,
        max_iters: p.max_iters,
        theta_weight: p.theta_weight,
    }
}

pub fn pibc_params(cfg: &PipelineConfig) -> PibcParams {
    PibcParams {
        n_candidates: cfg.planner.n_candidates,
        m: cfg.planner.m,
        rule: cfg.planner.rule,
    }
}

/// Segmentation parameters with the defaults resolved against the data.
pub fn segmentation_params(cfg: &PipelineConfig, points: &[Point2]) -> Result<SegmentationParams> {
    let s = &cfg.segmentation;
    let alpha_s = match s.alpha_s {
        Some(a) => a,
        None => {
            default_alpha(points).ok_or_else(|| anyhow!("cannot derive alpha_s from the input"))?
        }
    };
    Ok(SegmentationParams {
        n_cmin: s.n_cmin,
        n_cmax: s.n_cmax,
        l_b: s.l_b.unwrap_or(cfg.footprint.width / 2.0),
        eps_border: s.eps_border.unwrap_or(2.0 * alpha_s),
        alpha_s,
        seed: cfg.seed,
        gmm: GmmParams {
            max_iter: s.max_iter,
            rel_tol: s.rel_tol,
            restarts: s.restarts,
        },
    })
}

/// First degree-1 vertex (else 0), and the vertex farthest from it along
/// the graph (ties to the smaller id).
pub fn default_endpoints(g: &WeightedGraph) -> Result<(usize, usize)> {
    if g.n == 0 {
        bail!("graph has no vertices");
    }
    let deg = g.degrees();
    let v_s = (0..g.n).find(|&v| deg[v] == 1).unwrap_or(0);
    Ok((v_s, farthest_from(g, v_s)?))
}

fn summarize_segmentation(
    cs: &ClusterSet,
    params: &SegmentationParams,
    points: &[Point2],
) -> SegmentationArtifact {
    let border = |b: &Border| BorderSummary {
        clusters: (b.cluster_a, b.cluster_b),
        length: b.length,
        midpoint: b.midpoint,
    };
    SegmentationArtifact {
        schema_version: SCHEMA_VERSION,
        seed: cs.seed,
        alpha_s: params.alpha_s,
        l_b: params.l_b,
        eps_border: params.eps_border,
        n_o: cs.n_c,
        ratio_table: cs.ratio_table.clone(),
        clusters: cs
            .clusters
            .iter()
            .map(|c| ClusterSummary {
                id: c.id,
                size: c.indices.len(),
                mean: c.mean,
                neighbor_count: cs.neighbors.counts[c.id],
            })
            .collect(),
        borders: cs.neighbors.borders.iter().map(border).collect(),
        points: points.to_vec(),
        labels: cs.labels.clone(),
    }
}

/// Route over the component containing `v_s`; edges elsewhere are reported
/// as uncovered.
fn plan_coverage(
    g: &StructureGraph,
    v_s: Option<usize>,
    v_t: Option<usize>,
) -> Result<(RouteArtifact, Option<steelnav_core::route::RoutePlan>)> {
    let full = g.to_weighted();
    let v_s = match v_s {
        Some(v) => v,
        None => default_endpoints(&full)?.0,
    };
    if v_s >= full.n {
        bail!("v_s = {v_s} is not a graph vertex (graph has {})", full.n);
    }
    let comp = full.components();
    let in_comp = |e: usize| comp[full.edges[e].u] == comp[v_s];
    let mut sub = WeightedGraph::new(full.n);
    let mut index = Vec::new();
    for (i, e) in full.edges.iter().enumerate() {
        if in_comp(i) {
            sub.add_edge(e.u, e.v, e.w);
            index.push(i);
        }
    }
    let uncovered: Vec<usize> = (0..full.edges.len()).filter(|&i| !in_comp(i)).collect();
    let v_t = match v_t {
        Some(t) => t,
        None => farthest_from(&sub, v_s)?,
    };
    if v_t >= full.n {
        bail!("v_t = {v_t} is not a graph vertex (graph has {})", full.n);
    }

    let mut art = RouteArtifact {
        schema_version: SCHEMA_VERSION,
        v_s,
        v_t,
        vertices: g.vertices.iter().map(|v| v.pos).collect(),
        edges: full.edges.iter().map(|e| (e.u, e.v, e.w)).collect(),
        walk: vec![v_s],
        edge_sequence: Vec::new(),
        edge_visits: vec![0; full.edges.len()],
        duplicated: Vec::new(),
        provenance: None,
        total_length: 0.0,
        graph_weight: full.total_weight(),
        covered_edges: 0,
        uncovered_edges: uncovered,
    };
    if sub.edges.is_empty() {
        return Ok((art, None));
    }
    let (ag, mut plan) = vocpp_detailed(&sub, v_s, v_t)?;
    plan.edge_sequence = plan.edge_sequence.iter().map(|&e| index[e]).collect();
    let mut visits = vec![0; full.edges.len()];
    for (i, &v) in plan.edge_visits.iter().enumerate() {
        visits[index[i]] = v;
    }
    plan.edge_visits = visits;
    art.walk = plan.walk.clone();
    art.edge_sequence = plan.edge_sequence.clone();
    art.edge_visits = plan.edge_visits.clone();
    art.duplicated = ag.duplicated.iter().map(|&e| index[e]).collect();
    art.provenance = Some(ag.provenance);
    art.total_length = plan.total_length;
    art.covered_edges = plan.edge_visits.iter().filter(|&&v| v > 0).count();
    Ok((art, Some(plan)))
}

/// Vertex with the largest finite shortest-path distance from `v_s`.
fn farthest_from(g: &WeightedGraph, v_s: usize) -> Result<usize> {
    let sp = dijkstra(g, v_s)?;
    let mut v_t = v_s;
    for v in 0..g.n {
        if sp.dist[v].is_finite() && sp.dist[v] > sp.dist[v_t] {
            v_t = v;
        }
    }
    Ok(v_t)
}

/// Full navigation pipeline on a file input or a synthesized shape.
pub fn run_navigation(cfg: &PipelineConfig, shape: Option<Shape>) -> Result<Navigation> {
    let (cloud, source, ground_truth) = match shape {
        Some(shape) => {
            let (cloud, gt) = stage(
                "synth",
                generate(&structure_spec(cfg, shape)).map_err(Into::into),
            )?;
            (cloud, format!("synth:{}", shape_name(shape)), Some(gt))
        }
        None => {
            let path = cfg
                .input
                .as_deref()
                .ok_or_else(|| anyhow!("navigate needs an input cloud or --shape"))?;
            (
                stage("ingest", ingest(cfg, path))?,
                path.display().to_string(),
                None,
            )
        }
    };
    let points = cloud.xy();
    let input = InputArtifact {
        schema_version: SCHEMA_VERSION,
        source,
        point_count: points.len(),
        points: points.clone(),
    };

    let seg_params = stage("segmentation", segmentation_params(cfg, &points))?;
    let cs = stage(
        "segmentation",
        segment_structure(&points, &seg_params).map_err(Into::into),
    )?;
    let segmentation = summarize_segmentation(&cs, &seg_params, &points);

    let d_min = cfg.graph.d_min.unwrap_or(cfg.footprint.length);
    let g = stage("graph", build_graph(&cs, d_min).map_err(Into::into))?;

    let (route, plan) = stage("route", plan_coverage(&g, cfg.route.v_s, cfg.route.v_t))?;

    let fp = footprint(cfg);
    let rrt = rrt_params(cfg);
    let pibc = pibc_params(cfg);
    let (vias, paths, failures) = match &plan {
        Some(plan) => {
            let rm = stage(
                "motion",
                plan_route(plan, &g, &cs.boundaries, &fp, &rrt, &pibc, cfg.seed)
                    .map_err(Into::into),
            )?;
            let mut steps = Vec::new();
            let failed: Vec<usize> = rm.failures.iter().map(|f| f.step).collect();
            let mut it = rm.paths.into_iter();
            for step in 0..plan.walk.len() - 1 {
                if failed.contains(&step) {
                    continue;
                }
                let p: MotionPath = it.next().expect("one path per successful step");
                steps.push(PlannedStep {
                    step,
                    edge: p.edge.expect("route paths carry their edge"),
                    iterations: p.iterations,
                    configs: p.configs,
                });
            }
            (rm.vias, steps, rm.failures)
        }
        None => (Vec::new(), Vec::new(), Vec::new()),
    };
    let motion = MotionArtifact {
        schema_version: SCHEMA_VERSION,
        footprint: (fp.width, fp.length),
        rrt,
        pibc,
        boundaries: cs.boundaries.iter().map(|b| b.points.clone()).collect(),
        vias,
        paths,
        failures,
    };
    let outcome = if route.uncovered_edges.is_empty() && motion.failures.is_empty() {
        Outcome::Success
    } else {
        Outcome::Partial
    };
    Ok(Navigation {
        input,
        segmentation,
        graph: GraphArtifact {
            schema_version: SCHEMA_VERSION,
            d_min,
            boundaries: cs.boundaries.clone(),
            graph: g,
        },
        route,
        motion,
        ground_truth,
        outcome,
    })
}

pub fn shape_name(shape: Shape) -> &'static str {
    match shape {
        Shape::Cross => "cross",
        Shape::K => "k",
        Shape::L => "l",
        Shape::T => "t",
        Shape::I => "i",
    }
}

// -------------------------------------------------------------------- solve

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub length: f64,
    pub gap: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveArtifact {
    pub schema_version: u32,
    pub labels: Vec<String>,
    pub v_s: String,
    pub v_t: String,
    pub walk: Vec<String>,
    pub edge_sequence: Vec<usize>,
    pub provenance: Provenance,
    pub total_length: f64,
    pub graph_weight: f64,
    pub oracle: Option<OracleReport>,
}

/// Solve an edge-list file between two labelled vertices.
pub fn solve_graph(path: &Path, v_s: &str, v_t: &str, oracle: bool) -> Result<SolveArtifact> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let (g, labels) = parse_edge_list(&text)?;
    let find = |name: &str| {
        labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| anyhow!("vertex {name:?} does not appear in the edge list"))
    };
    let (s, t) = (find(v_s)?, find(v_t)?);
    let (ag, plan) = vocpp_detailed(&g, s, t)?;
    let oracle = if oracle {
        if g.edges.len() > BRUTE_FORCE_EDGE_LIMIT {
            bail!(
                "--oracle supports at most {BRUTE_FORCE_EDGE_LIMIT} edges, the graph has {}",
                g.edges.len()
            );
        }
        let (_, best) = brute_force_detailed(&g, s, t)?;
        let gap = plan.total_length - best.total_length;
        Some(OracleReport {
            length: best.total_length,
            gap,
            relative_gap: if best.total_length > 0.0 {
                gap / best.total_length
            } else {
                0.0
            },
        })
    } else {
        None
    };
    Ok(SolveArtifact {
        schema_version: SCHEMA_VERSION,
        v_s: v_s.to_string(),
        v_t: v_t.to_string(),
        walk: plan.walk.iter().map(|&v| labels[v].clone()).collect(),
        edge_sequence: plan.edge_sequence.clone(),
        provenance: ag.provenance,
        total_length: plan.total_length,
        graph_weight: g.total_weight(),
        labels,
        oracle,
    })
}

// -------------------------------------------------------------------- synth

#[derive(Debug, Serialize)]
pub struct GroundTruthArtifact<'a> {
    pub schema_version: u32,
    pub ground_truth: &'a GroundTruth,
}

/// Generated cloud as CSV plus its ground-truth sidecar.
pub fn run_synth(cfg: &PipelineConfig, shape: Shape) -> Result<Vec<Artifact>> {
    let (cloud, gt) = generate(&structure_spec(cfg, shape))?;
    let name = shape_name(shape);
    Ok(vec![
        Artifact {
            name: format!("{name}.csv"),
            contents: cloud.to_csv(),
        },
        json_artifact(
            &format!("{name}_truth.json"),
            &GroundTruthArtifact {
                schema_version: SCHEMA_VERSION,
                ground_truth: &gt,
            },
        ),
    ])
}
