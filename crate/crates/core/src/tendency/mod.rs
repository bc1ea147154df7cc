//! Cluster tendency and choice of k: the Hopkins statistic, internal validity
//! indices, majority voting over a k range, and a 2-D linear projection for
//! visual inspection.

mod hopkins;
mod indices;
mod projection;
mod vote;

pub use hopkins::{default_sample_size, hopkins, HopkinsConfig};
pub use indices::{hartigan, validity_index, DistanceMatrix, IndexKind, Preference};
pub use projection::project_2d;
pub use vote::{vote_k, KVoteConfig, VoteOutcome};
