//! Command-line surface. Exit codes: 0 success, 1 error, 2 partial result.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use steelnav_core::synth::Shape;

use crate::config::PipelineConfig;
use crate::pipeline::{self, write_artifacts, Outcome};

#[derive(Debug, Parser)]
#[command(
    name = "steelnav",
    version,
    about = "Steel-structure switching, routing and motion planning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the full default configuration.
    Init {
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide between mobile, inch-worm and stop for a camera-frame cloud.
    Switching {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Input cloud, overriding the config.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Artifact directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Segment, build the graph, route and plan motions for a structure.
    Navigate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Synthesize this shape instead of reading an input cloud.
        #[arg(long, value_parser = parse_shape)]
        shape: Option<Shape>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the open route problem on a `u v w` edge-list file.
    Solve {
        edges: PathBuf,
        v_s: String,
        v_t: String,
        /// Also run the exhaustive solver (small graphs) and report the gap.
        #[arg(long)]
        oracle: bool,
        /// Output JSON file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic structure cloud and its ground truth.
    Synth {
        #[arg(long, value_parser = parse_shape)]
        shape: Shape,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    s.parse()
        .map_err(|e: steelnav_core::synth::SynthError| e.to_string())
}

fn load_config(
    path: Option<&Path>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<PipelineConfig> {
    let mut cfg = match path {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    Ok(cfg)
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Run a parsed command; returns the process exit code on success.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Init { out } => {
            write_text(out.as_deref(), &PipelineConfig::default().to_json())?;
            Ok(0)
        }
        Command::Switching {
            config,
            input,
            seed,
            out,
        } => {
            let mut cfg = load_config(config.as_deref(), seed, out)?;
            if input.is_some() {
                cfg.input = input;
            }
            let (art, files) = pipeline::run_switching(&cfg)?;
            write_artifacts(&cfg.out_dir, &files)?;
            println!("mode: {:?}", art.report.decision.mode);
            Ok(0)
        }
        Command::Navigate {
            config,
            input,
            shape,
            seed,
            out,
        } => {
            let mut cfg = load_config(config.as_deref(), seed, out)?;
            if input.is_some() {
                cfg.input = input;
            }
            let nav = pipeline::run_navigation(&cfg, shape)?;
            write_artifacts(&cfg.out_dir, &nav.artifacts())?;
            println!(
                "route covers {}/{} edges, {} of {} steps planned",
                nav.route.covered_edges,
                nav.route.edges.len(),
                nav.motion.paths.len(),
                nav.route.walk.len().saturating_sub(1)
            );
            if nav.outcome == Outcome::Partial {
                eprintln!(
                    "partial result: {} uncovered edges, {} failed steps (see failures.json)",
                    nav.route.uncovered_edges.len(),
                    nav.motion.failures.len()
                );
            }
            Ok(nav.outcome.code())
        }
        Command::Solve {
            edges,
            v_s,
            v_t,
            oracle,
            out,
        } => {
            let art = pipeline::solve_graph(&edges, &v_s, &v_t, oracle)?;
            let mut text = serde_json::to_string_pretty(&art)?;
            text.push('\n');
            write_text(out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Synth {
            shape,
            config,
            seed,
            out,
        } => {
            let cfg = load_config(config.as_deref(), seed, out)?;
            let files = pipeline::run_synth(&cfg, shape)?;
            for p in write_artifacts(&cfg.out_dir, &files)? {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}
