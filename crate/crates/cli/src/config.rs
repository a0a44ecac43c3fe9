//! Pipeline configuration: every module parameter with its default, loaded
//! from JSON with unknown keys rejected and ranges validated.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use steelnav_core::boundary::InsideRule;
use steelnav_core::cloud::{Axis, RigidTransform};
use steelnav_core::synth::Shape;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    /// Input cloud (CSV, PCD or PLY ASCII); unused when a shape is synthesized.
    pub input: Option<PathBuf>,
    pub out_dir: PathBuf,
    /// Base seed; every stage derives its RNG from it.
    pub seed: u64,
    pub ingest: IngestConfig,
    pub synth: SynthConfig,
    pub segmentation: SegmentationConfig,
    pub graph: GraphConfig,
    pub route: RouteConfig,
    pub footprint: FootprintConfig,
    pub planner: PlannerConfig,
    pub switching: SwitchingConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            schema_version: SCHEMA_VERSION,
            input: None,
            out_dir: PathBuf::from("out"),
            seed: 0,
            ingest: IngestConfig::default(),
            synth: SynthConfig::default(),
            segmentation: SegmentationConfig::default(),
            graph: GraphConfig::default(),
            route: RouteConfig::default(),
            footprint: FootprintConfig::default(),
            planner: PlannerConfig::default(),
            switching: SwitchingConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassThrough {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    /// Applied in order before anything else.
    pub passthrough: Vec<PassThrough>,
    /// Voxel leaf size in meters; `null` keeps every point.
    pub voxel_leaf: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub shape: Shape,
    pub bar_length: f64,
    pub bar_width: f64,
    /// Points per square meter.
    pub density: f64,
    pub noise_sigma: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            shape: Shape::L,
            bar_length: 0.6,
            bar_width: 0.3,
            density: 10_000.0,
            noise_sigma: 0.001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub n_cmin: usize,
    pub n_cmax: usize,
    /// Minimum neighbor border length; `null` means half the footprint width.
    pub l_b: Option<f64>,
    /// Border distance; `null` means twice `alpha_s`.
    pub eps_border: Option<f64>,
    /// Slicing factor; `null` means twice the median point spacing.
    pub alpha_s: Option<f64>,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub restarts: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            n_cmin: 2,
            n_cmax: 6,
            l_b: None,
            eps_border: None,
            alpha_s: None,
            max_iter: 500,
            rel_tol: 1e-6,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    /// Bar-end suppression distance; `null` means the footprint length.
    pub d_min: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RouteConfig {
    /// Start vertex; `null` picks the first degree-1 vertex (else vertex 0).
    pub v_s: Option<usize>,
    /// End vertex; `null` picks the vertex farthest from `v_s` along the graph.
    pub v_t: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FootprintConfig {
    pub width: f64,
    /// Extent along the heading.
    pub length: f64,
}

impl Default for FootprintConfig {
    fn default() -> Self {
        FootprintConfig {
            width: 0.1,
            length: 0.12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// `null` means half the footprint width.
    pub step: Option<f64>,
    pub theta_step: f64,
    /// `null` means a quarter of the footprint width.
    pub goal_tol: Option<f64>,
    pub goal_bias: f64,
    pub max_iters: usize,
    pub theta_weight: f64,
    pub n_candidates: usize,
    pub m: usize,
    pub rule: InsideRule,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            step: None,
            theta_step: 0.3,
            goal_tol: None,
            goal_bias: 0.1,
            max_iters: 5000,
            theta_weight: 0.3,
            n_candidates: 3,
            m: 5,
            rule: InsideRule::All,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwitchingConfig {
    pub ransac_dist_thresh: f64,
    pub ransac_max_iters: usize,
    pub min_inlier_fraction: f64,
    /// `null` means twice the median point spacing of the plane.
    pub alpha_s: Option<f64>,
    pub foot_width: f64,
    pub foot_length: f64,
    pub tolerance: f64,
    pub n: usize,
    pub m: usize,
    pub cam_to_base: RigidTransform,
    pub base_height: f64,
    pub height_tol: f64,
}

impl Default for SwitchingConfig {
    fn default() -> Self {
        SwitchingConfig {
            ransac_dist_thresh: 0.01,
            ransac_max_iters: 500,
            min_inlier_fraction: 0.2,
            alpha_s: None,
            foot_width: 0.2,
            foot_length: 0.3,
            tolerance: 0.02,
            n: 5,
            m: 3,
            cam_to_base: RigidTransform::identity(),
            base_height: 0.0,
            height_tol: 0.005,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        bail!("{name} must be positive and finite, got {v}");
    }
    Ok(())
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        bail!("{name} must be non-negative and finite, got {v}");
    }
    Ok(())
}

fn positive_opt(name: &str, v: Option<f64>) -> Result<()> {
    v.map_or(Ok(()), |v| positive(name, v))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: PipelineConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            );
        }
        for p in &self.ingest.passthrough {
            if !(p.min <= p.max) {
                bail!("passthrough range [{}, {}] is empty", p.min, p.max);
            }
        }
        positive_opt("ingest.voxel_leaf", self.ingest.voxel_leaf)?;

        let s = &self.synth;
        positive("synth.bar_length", s.bar_length)?;
        positive("synth.bar_width", s.bar_width)?;
        positive("synth.density", s.density)?;
        non_negative("synth.noise_sigma", s.noise_sigma)?;

        let g = &self.segmentation;
        if g.n_cmin < 2 || g.n_cmax < g.n_cmin {
            bail!(
                "segmentation needs 2 <= n_cmin <= n_cmax, got {}..{}",
                g.n_cmin,
                g.n_cmax
            );
        }
        positive_opt("segmentation.l_b", g.l_b)?;
        positive_opt("segmentation.eps_border", g.eps_border)?;
        positive_opt("segmentation.alpha_s", g.alpha_s)?;
        positive("segmentation.rel_tol", g.rel_tol)?;
        if g.max_iter == 0 || g.restarts == 0 {
            bail!("segmentation.max_iter and segmentation.restarts must be at least 1");
        }

        if let Some(d) = self.graph.d_min {
            non_negative("graph.d_min", d)?;
        }
        positive("footprint.width", self.footprint.width)?;
        positive("footprint.length", self.footprint.length)?;

        let p = &self.planner;
        positive_opt("planner.step", p.step)?;
        positive("planner.theta_step", p.theta_step)?;
        positive_opt("planner.goal_tol", p.goal_tol)?;
        if !(0.0..=1.0).contains(&p.goal_bias) {
            bail!("planner.goal_bias must be in [0, 1], got {}", p.goal_bias);
        }
        non_negative("planner.theta_weight", p.theta_weight)?;
        if p.max_iters == 0 || p.n_candidates == 0 || p.m == 0 {
            bail!("planner.max_iters, n_candidates and m must be at least 1");
        }

        let w = &self.switching;
        positive("switching.ransac_dist_thresh", w.ransac_dist_thresh)?;
        if w.ransac_max_iters == 0 {
            bail!("switching.ransac_max_iters must be at least 1");
        }
        if !(0.0..=1.0).contains(&w.min_inlier_fraction) {
            bail!("switching.min_inlier_fraction must be in [0, 1]");
        }
        positive_opt("switching.alpha_s", w.alpha_s)?;
        positive("switching.foot_width", w.foot_width)?;
        positive("switching.foot_length", w.foot_length)?;
        non_negative("switching.tolerance", w.tolerance)?;
        if w.n == 0 || w.m == 0 {
            bail!("switching.n and switching.m must be at least 1");
        }
        if !w.cam_to_base.is_valid(1e-6) {
            bail!("switching.cam_to_base is not a rigid transform");
        }
        non_negative("switching.height_tol", w.height_tol)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_round_trips() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        let back: PipelineConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    #[allow(clippy::field_reassign_with_default)]
    fn unknown_keys_and_bad_ranges_are_rejected() {
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"sed": 3}"#).is_err());
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"planner": {"mm": 3}}"#).is_err());
        let partial: PipelineConfig = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.planner, PlannerConfig::default());

        let mut bad = PipelineConfig::default();
        bad.segmentation.n_cmin = 5;
        bad.segmentation.n_cmax = 4;
        assert!(bad.validate().is_err());
        let mut bad = PipelineConfig::default();
        bad.footprint.width = -1.0;
        assert!(bad.validate().is_err());
        let mut bad = PipelineConfig::default();
        bad.schema_version = 9;
        assert!(bad.validate().is_err());
    }
}
