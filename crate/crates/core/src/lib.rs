//! Classification of administrative territories by renewable-energy
//! potential and socioeconomic structure.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`model`]: dataset schema and structural validation
//! - [`harmonize`]: proxy downscaling, normalization, degree days, centroids
//! - [`preprocess`]: missing-value policy, correlation pruning, z-scores
//! - [`tendency`]: Hopkins statistic, validity indices, k vote, 2-D projection
//! - [`kmeans`]: multi-start Lloyd k-means
//! - [`profile`]: qualitative centroid profiles, dendrogram, region reports
//! - [`pipeline`]: end-to-end driver writing every artifact to disk
//!
//! [`fixture`] generates synthetic datasets with planted cluster structure.

pub mod agreement;
pub mod config;
pub mod error;
pub mod fixture;
pub mod harmonize;
pub mod io;
pub mod kmeans;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod profile;
pub mod rng;
pub mod tendency;

pub use error::{Error, Result};
