//! Partition-and-vote meta-learners and their certificates.

pub mod certificate;
pub mod partition;
pub mod spv;

pub use certificate::{
    certificate_exact, certificate_paper, min_flips, optimal_certificate_oracle, Certificate, OracleValue,
};
pub use partition::{spv_partition, Partition};
pub use spv::{pspv_learn, spv_learn, BlockVoting, Blocks, ProperFit, Pspv, Spv, VotingHypothesis};
