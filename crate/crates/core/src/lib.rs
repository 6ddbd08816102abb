pub mod config;
pub mod ec;
pub mod fp;
pub mod mle;
pub mod msm;
pub mod permwire;
pub mod prover;
pub mod sumcheck;
pub mod transcript;
