//! Group-structured automated data augmentation for self-supervised
//! pipelines, with typed search spaces carrying expert priors, a
//! prior-weighted Bayesian-optimization loop, an objective protocol for
//! external trainers, and post-hoc importance/density analysis.
//!
//! Every random draw in the crate goes through [`rng::RngState`], so all
//! outputs are a pure function of inputs and seed. Data-parallel loops go
//! through [`exec::Execution`]; results never depend on the execution mode.

pub mod analysis;
pub mod bo;
pub mod error;
pub mod exec;
pub mod forest;
pub mod harness;
pub mod image;
pub mod kernels;
pub mod policy;
pub mod rng;
pub mod run;
pub mod space;

pub use error::{Error, Result};
pub use exec::Execution;
pub use image::Image;
pub use rng::RngState;
