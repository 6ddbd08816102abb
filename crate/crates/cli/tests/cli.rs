use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn zkspeed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zkspeed"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let o = zkspeed(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn prove_then_self_verify() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    ok(&["prove", "--mu", "4", "--seed", "1", "--out", out]);
    let line = ok(&["self-verify", "--out", out]);
    assert!(line.contains("all 9 checks passed"), "{line}");
}

#[test]
fn tampered_bundle_fails_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    ok(&["prove", "--mu", "3", "--seed", "5", "--out", out]);
    let p = dir.path().join("proof.bin");
    let mut b = fs::read(&p).unwrap();
    let last = b.len() - 40;
    b[last] ^= 1;
    fs::write(&p, b).unwrap();
    let o = zkspeed(&["self-verify", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(o.stderr.trim_ascii_end()).unwrap();
    assert!(err["error"].is_string());
}

#[test]
fn proofs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(&["prove", "--mu", "5", "--seed", "9", "--out", path(d.path())]);
    }
    for f in ["proof.bin", "workload.json", "curve.toml"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn workload_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    ok(&[
        "gen-workload",
        "--mu",
        "3",
        "--seed",
        "4",
        "--sparsity",
        "0.3,0.3,0.4",
        "--out",
        out,
    ]);
    let wf = dir.path().join("workload.json");
    let proof_dir = dir.path().join("p");
    ok(&["prove", "--workload-file", path(&wf), "--out", path(&proof_dir)]);
    assert_eq!(
        fs::read(&wf).unwrap(),
        fs::read(proof_dir.join("workload.json")).unwrap()
    );
    ok(&["self-verify", "--out", path(&proof_dir)]);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    for args in [
        vec!["prove", "--mu", "25", "--out", out],
        vec!["prove", "--mu", "4", "--sparsity", "0.5,0.5", "--out", out],
        vec!["prove", "--out", out],
        vec!["dse", "--design", "16,9,2048", "--out", out],
        vec!["dse", "--design", "16,11,2048,1,2,11,4,2048", "--out", out],
        vec!["sweep-batch", "--max-log2", "0"],
        vec!["no-such-command"],
        vec!["census", "--mu", "4", "--bogus"],
    ] {
        let o = zkspeed(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn sweep_batch_marks_64() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sweep-batch", "--out", path(dir.path())]);
    let text = fs::read_to_string(dir.path().join("sweep_batch.csv")).unwrap();
    assert!(text.starts_with("schema,batch,"));
    let best: Vec<&str> = text.lines().filter(|l| l.ends_with(",1")).collect();
    assert_eq!(best.len(), 1);
    assert_eq!(best[0].split(',').nth(1), Some("64"));
}

#[test]
fn dse_csv_is_deterministic_and_flags_frontier() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("small.toml");
    fs::write(
        &cfg,
        "msm_pes = [4, 16]\nmsm_window = [8, 9]\nmsm_points_per_pe = [1024]\nfracmle_pes = [1]\n\
         sumcheck_pes = [1, 4]\nmle_update_pes = [2, 11]\nmodmuls_per_update_pe = [4]\nbandwidth_gbps = [512, 2048]\n",
    )
    .unwrap();
    ok(&["dse", "--mu", "16", "--config", path(&cfg), "--out", path(a.path())]);
    ok(&[
        "dse",
        "--mu",
        "16",
        "--config",
        path(&cfg),
        "--threads",
        "1",
        "--out",
        path(b.path()),
    ]);
    let x = fs::read(a.path().join("dse.csv")).unwrap();
    assert_eq!(x, fs::read(b.path().join("dse.csv")).unwrap());
    let text = String::from_utf8(x).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header[0], "schema");
    let flag = header.iter().position(|h| *h == "pareto_flag").unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 32);
    assert!(rows.iter().any(|r| r[flag] == "1"));
    assert!(rows.iter().all(|r| r[0] == "zkspeed.dse.v1"));
}

#[test]
fn dse_single_design_reports_reference_area() {
    let dir = tempfile::tempdir().unwrap();
    let line = ok(&["dse", "--design", "16,9,2048,1,2,11,4,2048", "--out", path(dir.path())]);
    assert!(line.contains("area 366.46 mm2"), "{line}");
    let r: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r["mu"], 20);
}

#[test]
fn census_compares_against_instrumented_run() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "census",
        "--mu",
        "6",
        "--functional",
        "--seed",
        "3",
        "--out",
        path(dir.path()),
    ]);
    let text = fs::read_to_string(dir.path().join("census.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 13);
    let eq = rows.iter().find(|r| r[2] == "build_eq").unwrap();
    assert_eq!(eq[3], eq[7]);
}

#[test]
fn dump_costs_writes_parseable_tables() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["dump-costs", "--out", path(dir.path())]);
    let costs = fs::read_to_string(dir.path().join("costs.toml")).unwrap();
    assert!(costs.contains("[totals]"));
    let line = ok(&[
        "dse",
        "--mu",
        "12",
        "--bandwidth",
        "512",
        "--config",
        path(&dir.path().join("knobs.toml")),
        "--costs",
        path(&dir.path().join("costs.toml")),
        "--out",
        path(dir.path()),
    ]);
    assert!(line.contains("82500 designs"), "{line}");
}

#[test]
fn sweep_bandwidth_writes_both_units() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["sweep-bandwidth", "--mu", "16", "--out", path(dir.path())]);
    let text = fs::read_to_string(dir.path().join("sweep_bandwidth.csv")).unwrap();
    assert!(text.lines().any(|l| l.contains(",msm,")));
    assert!(text.lines().any(|l| l.contains(",sumcheck,")));
}
