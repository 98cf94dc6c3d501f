//! Simulation library for RIS-aided intra-cell pilot reuse in massive MIMO.
//!
//! Numeric modules are generic over the real scalar type ([`Real`], `f32` or
//! `f64`); the `*64` aliases below fix the common double-precision choice.
//! The experiment harness in [`sim`] runs in `f64`.

pub mod beamforming;
pub mod channel;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod linalg;
pub mod phase_opt;
pub mod placement;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::{CMat, CVec, RMat, Real};

pub type ArrayGeometry64 = geometry::ArrayGeometry<f64>;
pub type FadingParams64 = geometry::FadingParams<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type CorrelationSet64 = channel::CorrelationSet<f64>;
pub type RisConfiguration64 = channel::RisConfiguration<f64>;
pub type QuadraticForm64 = phase_opt::QuadraticForm<f64>;
pub type AscentReport64 = phase_opt::AscentReport<f64>;
pub type AngularGrid64 = placement::AngularGrid<f64>;
pub type EstimationOutput64 = estimation::EstimationOutput<f64>;
pub type CombinerSet64 = beamforming::CombinerSet<f64>;

pub type ArrayGeometry32 = geometry::ArrayGeometry<f32>;
pub type QuadraticForm32 = phase_opt::QuadraticForm<f32>;
