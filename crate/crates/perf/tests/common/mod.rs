#![allow(dead_code)]

use std::sync::OnceLock;

use zkspeed_perf::costs::CostTables;
use zkspeed_perf::design::KnobDomains;
use zkspeed_perf::dse::{evaluate_all, DseRow};
use zkspeed_perf::model::{Model, Workload};

pub fn model() -> &'static Model {
    static M: OnceLock<Model> = OnceLock::new();
    M.get_or_init(|| Model::new(CostTables::default()))
}

/// The full cross product at 2^20 gates, evaluated once per test binary.
pub fn full_dse() -> &'static [DseRow] {
    static R: OnceLock<Vec<DseRow>> = OnceLock::new();
    R.get_or_init(|| evaluate_all(model(), &KnobDomains::full_space(), &Workload::typical(20)).unwrap())
}
