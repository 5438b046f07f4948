//! The cubic lower record-based transmuted exponential (CLRBTE) distribution:
//! densities, moments, samplers, nine estimators, goodness-of-fit and a
//! Monte-Carlo harness.

pub mod competitors;
pub mod data;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod format;
pub mod gof;
pub mod model;
pub mod optimizer;
pub mod properties;
pub mod quadrature;
pub mod roots;
pub mod sample;
pub mod sampling;
pub mod sim;
pub mod transmute;

pub use competitors::CompetitorParams;
pub use dist::Params;
pub use error::{Error, Result};
pub use estimators::{fit, EstimatorId, FitOptions, FitReport};
pub use model::{Model, ModelParams};
pub use sample::Sample;
pub use sampling::RngStream;
