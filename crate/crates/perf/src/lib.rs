//! Performance, area and power model of the zkSpeed accelerator.

pub mod batch;
pub mod census;
pub mod costs;
pub mod design;
pub mod dse;
pub mod model;
pub mod msm_sim;
pub mod rollup;
pub mod sched;
pub mod sumcheck_model;
pub mod sweeps;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PerfError {
    #[error("knob {knob} = {value} is outside its domain")]
    KnobOutOfDomain { knob: &'static str, value: u32 },
    #[error("knob {0} has an empty domain")]
    EmptyDomain(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("cost tables: {0}")]
    Costs(String),
    #[error("no PHY tier supports {0} GB/s")]
    NoPhyTier(u32),
}
