//! trackkit: tooling for building and evaluating referring-expression tracking datasets.
//!
//! The crate covers the non-model machinery around a video tracking system:
//!
//! * [`geometry`] — box arithmetic and the quantized coordinate text codec,
//! * [`kalman`] — constant-velocity Kalman filtering and drift detection,
//! * [`tselector`] — a numeric reference for gated token selection with
//!   verified analytic gradients,
//! * [`metrics`] — single-object-tracking curves and caption metrics,
//! * [`pipeline`] — the dataset construction filter chain,
//! * [`harness`] — clip scheduling, frame sampling, and the line-delimited
//!   tracking protocol used to drive an external predictor.
//!
//! The `trackkit` binary (see [`cli`]) exposes the same functionality as
//! subcommands operating on JSONL files.

pub mod cli;
pub mod geometry;
pub mod harness;
pub mod jsonl;
pub mod kalman;
pub mod metrics;
pub mod pipeline;
pub mod tselector;

pub use geometry::{BoundingBox, QuantBox};
