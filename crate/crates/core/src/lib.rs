//! Perception, routing and motion planning for robots that travel along
//! lattice steel structures.
//!
//! The pipeline turns a point cloud of a steel structure into:
//!
//! - a switching decision (mobile, inch-worm or stop) from plane, area and
//!   height checks on the surface in front of the robot ([`switching`]);
//! - a segmentation of the structure into bars and cross areas
//!   ([`segmentation`]), a graph of the structure ([`graph`]), a shortest
//!   route covering every bar between chosen start and end vertices
//!   ([`route`]) and footprint-checked motion paths along it ([`planner`]).
//!
//! [`synth`] generates the Cross/K/L/T/I test structures with ground truth.

// range checks are written `!(x >= lo)` on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cloud;
pub mod geom;
pub mod graph;
pub mod planner;
pub mod route;
pub mod segmentation;
pub mod switching;
pub mod synth;

pub use geom::{Point2, Point3};
