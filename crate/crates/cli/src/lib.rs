//! Pipeline orchestration behind the `steelnav` binary: configuration,
//! stage runners, JSON artifacts and SVG views.

// range checks are written `!(x >= lo)` on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod pipeline;
pub mod render;
pub mod svg;
