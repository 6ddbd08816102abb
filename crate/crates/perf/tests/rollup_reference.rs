use zkspeed_perf::costs::CostTables;
use zkspeed_perf::design::{DesignPoint, KnobDomains};
use zkspeed_perf::rollup::area_power_rollup;

const ROWS: [(&str, f64, f64); 10] = [
    ("MSM", 105.64, 76.19),
    ("SumCheck", 24.96, 5.38),
    ("Construct N&D", 1.35, 0.19),
    ("FracMLE", 1.92, 0.25),
    ("MLE Combine", 9.56, 0.34),
    ("MLE Update", 5.84, 1.13),
    ("Multifunction Tree", 12.28, 4.16),
    ("Other", 1.98, 0.04),
    ("SRAM", 143.73, 19.60),
    ("PHY", 59.20, 63.60),
];

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

#[test]
fn reference_design_reproduces_every_row() {
    let r = area_power_rollup(&DesignPoint::REFERENCE, &CostTables::default()).unwrap();
    for (name, area, power) in ROWS {
        let row = r.row(name).unwrap_or_else(|| panic!("missing row {name}"));
        assert!(close(row.area_mm2, area), "{name} area {}", row.area_mm2);
        assert!(close(row.power_w, power), "{name} power {}", row.power_w);
    }
    assert_eq!(r.phy_count, 2);
    assert!(close(r.compute_area(), 163.53));
    assert!(close(r.compute_power(), 87.68));
    assert!(close(r.memory_area(), 202.93));
    assert!(close(r.memory_power(), 83.20));
    assert!(close(r.area(), 366.46));
    assert!(close(r.power(), 170.88));
}

#[test]
fn msm_is_the_largest_compute_unit() {
    let r = area_power_rollup(&DesignPoint::REFERENCE, &CostTables::default()).unwrap();
    let top = r
        .compute
        .iter()
        .max_by(|a, b| a.area_mm2.total_cmp(&b.area_mm2))
        .unwrap();
    assert_eq!(top.name, "MSM");
}

#[test]
fn out_of_domain_knob_is_rejected() {
    let d = DesignPoint {
        msm_window: 11,
        ..DesignPoint::REFERENCE
    };
    assert!(area_power_rollup(&d, &CostTables::default()).is_err());
}

#[test]
fn cross_product_size() {
    assert_eq!(KnobDomains::full_space().cardinality(), 577_500);
}
