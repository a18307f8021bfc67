//! Regular and smooth norms, their regularity constants, large-deviation
//! bounds for sums of vector-valued martingale differences, and a Monte
//! Carlo harness that checks those bounds.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common instantiations.

pub mod cli;
pub mod deviation;
pub mod error;
pub mod norm_core;
pub mod numfmt;
pub mod scalar;
pub mod sim;
pub mod smoothness;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Point64 = norm_core::Point<f64>;
pub type Point32 = norm_core::Point<f32>;
pub type HuberParams64 = norm_core::HuberParams<f64>;
pub type HuberParams32 = norm_core::HuberParams<f32>;
pub type TraceFunction64 = smoothness::TraceFunction<f64>;
pub type TraceFunction32 = smoothness::TraceFunction<f32>;
pub type SigmaProfile64 = deviation::SigmaProfile<f64>;
pub type SigmaProfile32 = deviation::SigmaProfile<f32>;
pub type TailQuery64 = deviation::TailQuery<f64>;
pub type TailQuery32 = deviation::TailQuery<f32>;
pub type TailResult64 = deviation::TailResult<f64>;
pub type TailResult32 = deviation::TailResult<f32>;
