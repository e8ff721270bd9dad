//! Unified-distribution preprocessing for pansharpening.
//!
//! Each spectral band (and the PAN band) is mapped through its own fitted
//! empirical quantile transform onto one shared target distribution
//! (standard uniform or standard normal), so data from different sensors
//! lands in the same domain before fusion. Alongside the transform the crate
//! provides the pieces needed to run and judge it end to end:
//!
//! * [`transform`]: quantile fitting, bidirectional eCDF interpolation,
//!   transform sets and their text format
//! * [`transport`]: 1D Wasserstein distances and transport-map costs
//! * [`raster`]: the `UPRF` container, seeded pixel sampling, bicubic upsampling
//! * [`metrics`]: UIQI, `D_λ`, `D_S`, QNR and `D_ρ`
//! * [`pipeline`]: training-split fitting, fusion with pluggable fusers, evaluation
//! * [`diag`]: KDE and Q-Q series for plotting
//!
//! Bulk loops run on rayon when the default `parallel` feature is enabled;
//! see [`Execution`].

pub mod diag;
pub mod error;
pub mod exec;
pub mod filter;
pub mod fmt;
pub mod metrics;
pub mod normal;
pub mod pipeline;
pub mod raster;
pub mod synthetic;
pub mod transform;
pub mod transport;

pub use error::{Error, Result};
pub use exec::Execution;
pub use metrics::MetricsReport;
pub use pipeline::{Fuser, FusionInputs};
pub use raster::{Dtype, Raster};
pub use transform::{
    QuantileTransform, SampleVector, TargetDistribution, TargetKind, TransformSet,
};
pub use transport::TransportCost;
