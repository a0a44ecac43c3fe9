//! Property tests over the synth -> segmentation -> graph -> planner chain.

use std::sync::OnceLock;

use proptest::prelude::*;
use steelnav_core::boundary::default_alpha;
use steelnav_core::cloud::{load_cloud, CloudFormat};
use steelnav_core::geom::wrap_angle;
use steelnav_core::graph::{build_graph, StructureGraph, VertexKind};
use steelnav_core::planner::{
    footprint_points, pibc_check, plan_route, Config, Footprint, PibcParams, RrtParams,
};
use steelnav_core::route::vocpp;
use steelnav_core::segmentation::{segment_structure, ClusterSet, GmmParams, SegmentationParams};
use steelnav_core::synth::{generate, Shape, StructureSpec};

fn spec(shape: Shape, seed: u64, density: f64) -> StructureSpec {
    StructureSpec {
        shape,
        bar_length: 0.6,
        bar_width: 0.3,
        density,
        noise_sigma: 0.001,
        seed,
    }
}

fn seg_params(seed: u64, alpha_s: f64) -> SegmentationParams {
    SegmentationParams {
        n_cmin: 2,
        n_cmax: 5,
        l_b: 0.1,
        eps_border: 2.0 * alpha_s,
        alpha_s,
        seed,
        gmm: GmmParams::default(),
    }
}

fn shape() -> impl Strategy<Value = Shape> {
    prop_oneof![
        Just(Shape::L),
        Just(Shape::T),
        Just(Shape::Cross),
        Just(Shape::K),
        Just(Shape::I)
    ]
}

fn check_graph(cs: &ClusterSet, g: &StructureGraph) -> Result<(), TestCaseError> {
    for (i, v) in g.vertices.iter().enumerate() {
        prop_assert_eq!(v.id, i);
        match v.kind {
            VertexKind::BorderMid => prop_assert_eq!(g.degree(i), 2),
            VertexKind::BarEnd => prop_assert_eq!(g.degree(i), 1),
            VertexKind::Center => {}
        }
    }
    // Centers, then border midpoints, then bar ends
    let rank = |k: VertexKind| match k {
        VertexKind::Center => 0,
        VertexKind::BorderMid => 1,
        VertexKind::BarEnd => 2,
    };
    prop_assert!(g
        .vertices
        .windows(2)
        .all(|w| rank(w[0].kind) <= rank(w[1].kind)));
    let centers = g
        .vertices
        .iter()
        .filter(|v| v.kind == VertexKind::Center)
        .count();
    prop_assert_eq!(centers, cs.clusters.len());
    for e in &g.edges {
        prop_assert!(e.u != e.v);
        let d = g.vertices[e.u].pos.dist(g.vertices[e.v].pos);
        prop_assert!((e.w - d).abs() <= 1e-9);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn segmentation_and_graph_invariants(shape in shape(), seed in 0u64..1000) {
        let (cloud, _) = generate(&spec(shape, seed, 3000.0)).unwrap();
        prop_assert!(cloud.points.iter().all(|p| p.x.is_finite() && p.y.is_finite() && p.z.is_finite()));
        let pts = cloud.xy();
        let params = seg_params(seed, default_alpha(&pts).unwrap());
        let cs = segment_structure(&pts, &params).unwrap();

        prop_assert!((params.n_cmin..=params.n_cmax).contains(&cs.n_c));
        prop_assert_eq!(cs.labels.len(), pts.len());
        let mut seen = vec![0usize; pts.len()];
        for c in &cs.clusters {
            for &i in &c.indices {
                seen[i] += 1;
                prop_assert_eq!(cs.labels[i], c.id);
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        let m = &cs.neighbors.matrix;
        for (i, row) in m.iter().enumerate() {
            prop_assert!(!row[i]);
            for (j, &x) in row.iter().enumerate() {
                prop_assert_eq!(x, m[j][i]);
            }
        }
        for rec in &cs.ratio_table {
            prop_assert!(rec.em_max_decrease <= 1e-9);
            prop_assert!(rec.n_m >= rec.n_s);
        }

        let again = segment_structure(&pts, &params).unwrap();
        prop_assert_eq!(&again.labels, &cs.labels);

        let g = build_graph(&cs, 0.12).unwrap();
        check_graph(&cs, &g)?;
        prop_assert_eq!(build_graph(&cs, 0.12).unwrap(), g);
    }

    #[test]
    fn csv_round_trip_through_a_file(shape in shape(), seed in 0u64..1000) {
        let (cloud, _) = generate(&spec(shape, seed, 500.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cloud.csv");
        std::fs::write(&path, cloud.to_csv()).unwrap();
        let back = load_cloud(&path, CloudFormat::Csv).unwrap();
        prop_assert_eq!(back.points, cloud.points);
    }

    #[test]
    fn footprint_placement_is_an_isometry(
        x in -5.0..5.0f64, y in -5.0..5.0f64, theta in -10.0..10.0f64,
        w in 0.01..1.0f64, l in 0.01..1.0f64,
    ) {
        let fp = Footprint::new(w, l);
        let placed = footprint_points(&Config::new(x, y, theta), &fp);
        for i in 0..fp.template.len() {
            for j in 0..fp.template.len() {
                let before = fp.template[i].dist(fp.template[j]);
                prop_assert!((placed[i].dist(placed[j]) - before).abs() <= 1e-9);
            }
        }
    }
}

struct LScene {
    cs: ClusterSet,
    g: StructureGraph,
}

fn l_scene() -> &'static LScene {
    static SCENE: OnceLock<LScene> = OnceLock::new();
    SCENE.get_or_init(|| {
        let (cloud, _) = generate(&spec(Shape::L, 0, 10_000.0)).unwrap();
        let pts = cloud.xy();
        let cs = segment_structure(&pts, &seg_params(0, 0.03)).unwrap();
        let g = build_graph(&cs, 0.2).unwrap();
        LScene { cs, g }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn planned_motions_are_valid_and_reproducible(seed in 0u64..1000) {
        let scene = l_scene();
        let fp = Footprint::new(0.1, 0.12);
        let pibc = PibcParams { m: 1, ..PibcParams::default() };
        let rrt = RrtParams { max_iters: 3000, ..RrtParams::for_footprint(&fp) };
        let ends: Vec<usize> = (0..scene.g.vertices.len()).filter(|&v| scene.g.degree(v) == 1).collect();
        let v_s = ends.first().copied().unwrap_or(0);
        let route = vocpp(&scene.g.to_weighted(), v_s, v_s).unwrap();
        let motion = plan_route(&route, &scene.g, &scene.cs.boundaries, &fp, &rrt, &pibc, seed).unwrap();

        // every step is either planned or reported, never dropped
        prop_assert_eq!(motion.paths.len() + motion.failures.len(), route.walk.len() - 1);
        for path in &motion.paths {
            for c in &path.configs {
                prop_assert!(pibc_check(&scene.cs.boundaries, c, &fp, &pibc).unwrap());
            }
            for w in path.configs.windows(2) {
                prop_assert!(w[0].pos().dist(w[1].pos()) <= rrt.step + 1e-9);
                prop_assert!(wrap_angle(w[1].theta - w[0].theta).abs() <= rrt.theta_step + 1e-9);
            }
        }
        let again = plan_route(&route, &scene.g, &scene.cs.boundaries, &fp, &rrt, &pibc, seed).unwrap();
        prop_assert_eq!(again, motion);
    }
}
