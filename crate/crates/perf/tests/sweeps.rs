mod common;

use zkspeed_perf::costs::CostTables;
use zkspeed_perf::design::DesignPoint;
use zkspeed_perf::model::Workload;
use zkspeed_perf::sweeps::{bandwidth_sweep, speedup, write_batch_csv, write_sweep_csv, SweepUnit, SWEEP_BANDWIDTHS};

use common::model;

#[test]
fn msm_scales_with_pes_and_ignores_bandwidth() {
    let rows = bandwidth_sweep(model(), &DesignPoint::REFERENCE, &Workload::typical(20)).unwrap();
    for bw in SWEEP_BANDWIDTHS {
        let s16 = speedup(&rows, SweepUnit::Msm, 16, bw).unwrap();
        assert!(s16 >= 0.8 * 16.0, "{bw}: {s16}");
        assert_eq!(s16, speedup(&rows, SweepUnit::Msm, 16, 512).unwrap());
    }
}

#[test]
fn sumcheck_saturates_at_fixed_bandwidth() {
    let rows = bandwidth_sweep(model(), &DesignPoint::REFERENCE, &Workload::typical(20)).unwrap();
    let s1 = speedup(&rows, SweepUnit::SumCheck, 1, 512).unwrap();
    let s16 = speedup(&rows, SweepUnit::SumCheck, 16, 512).unwrap();
    assert_eq!(s1, 1.0);
    assert!(s16 < 2.0, "{s16}");
    // more bandwidth lifts the ceiling
    let mut prev = 0.0;
    for bw in SWEEP_BANDWIDTHS {
        let s = speedup(&rows, SweepUnit::SumCheck, 16, bw).unwrap();
        assert!(s > prev);
        prev = s;
    }
}

#[test]
fn sweep_csv_is_versioned() {
    let rows = bandwidth_sweep(model(), &DesignPoint::REFERENCE, &Workload::typical(12)).unwrap();
    let mut out = Vec::new();
    write_sweep_csv(&mut out, &rows).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("schema,unit,pes,bandwidth_gbps,cycles,speedup\n"));
    assert_eq!(text.lines().count(), rows.len() + 1);
}

#[test]
fn batch_csv_marks_64() {
    let mut out = Vec::new();
    let best = write_batch_csv(&mut out, &CostTables::default(), 12).unwrap();
    assert_eq!(best, 64);
    let text = String::from_utf8(out).unwrap();
    let marked: Vec<&str> = text.lines().filter(|l| l.ends_with(",1")).collect();
    assert_eq!(marked.len(), 1);
    assert!(marked[0].split(',').nth(1) == Some("64"));
}
