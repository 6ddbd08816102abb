use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use zkspeed_core::config::{curve_from_toml, BLS12_381_TOML};
use zkspeed_core::ec::Curve;
use zkspeed_core::mle::SparsityProfile;
use zkspeed_core::prover::{
    gen_mock_circuit, prove_all, Census, Kernel, MockCircuit, ProofBundle, ProverKnobs, Srs, Workload,
};
use zkspeed_perf::census::{
    analytical_census, published_comparison, published_params, AnalyticalCensus, CensusInputs, CensusParams,
};
use zkspeed_perf::costs::{parse_cost_tables, CostTables, COSTS_TOML};
use zkspeed_perf::design::{parse_design, DesignPoint, KnobDomains, KNOBS_TOML};
use zkspeed_perf::dse::{evaluate_all, fastest, write_csv, Frontiers};
use zkspeed_perf::model::{self, Model};
use zkspeed_perf::sweeps::{bandwidth_sweep, write_batch_csv, write_sweep_csv};

use crate::{CliError, WorkloadArgs, MAX_FUNCTIONAL_MU};

pub const WORKLOAD_FILE: &str = "workload.json";
pub const PROOF_FILE: &str = "proof.bin";
pub const CURVE_FILE: &str = "curve.toml";
pub const CENSUS_SCHEMA: &str = "zkspeed.census.v1";

const DEFAULT_PERF_MU: u32 = 20;

fn parse_sparsity(s: &str) -> Result<SparsityProfile, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--sparsity expects z,o,d, got {s:?}")))?;
    let [z, o, d] = parts[..] else {
        return Err(CliError::Usage(format!(
            "--sparsity expects three fractions, got {s:?}"
        )));
    };
    SparsityProfile::new(z, o, d).map_err(|e| CliError::Usage(format!("--sparsity: {e}")))
}

fn functional_workload(a: &WorkloadArgs) -> Result<Workload, CliError> {
    let mu = a.mu.ok_or_else(|| CliError::Usage("--mu is required".into()))?;
    if !(2..=MAX_FUNCTIONAL_MU).contains(&mu) {
        return Err(CliError::Usage(format!(
            "--mu must be in 2..={MAX_FUNCTIONAL_MU} for functional runs"
        )));
    }
    let w = Workload {
        mu,
        sparsity: parse_sparsity(&a.sparsity)?,
        seed: a.seed,
        wiring_fraction: 0.5,
    };
    w.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(w)
}

fn perf_workload(a: &WorkloadArgs) -> Result<model::Workload, CliError> {
    let mu = a.mu.unwrap_or(DEFAULT_PERF_MU);
    if !(1..=40).contains(&mu) {
        return Err(CliError::Usage(format!("--mu {mu} outside 1..=40")));
    }
    Ok(model::Workload::new(mu, parse_sparsity(&a.sparsity)?))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::fail("io", format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::fail("io", format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::fail("io", format!("{}: {e}", path.display())))
}

fn load_costs(path: Option<&Path>) -> Result<CostTables, CliError> {
    match path {
        None => Ok(CostTables::default()),
        Some(p) => parse_cost_tables(&read(p)?).map_err(|e| CliError::Usage(format!("--costs: {e}"))),
    }
}

fn curve_text(config: Option<&Path>) -> Result<String, CliError> {
    config.map_or(Ok(BLS12_381_TOML.to_string()), read)
}

fn load_curve(text: &str) -> Result<Curve, CliError> {
    curve_from_toml(text).map_err(|e| CliError::Usage(format!("curve config: {e}")))
}

fn circuit_for(curve: &Curve, w: &Workload) -> Result<(Srs, MockCircuit), CliError> {
    let mu = w.mu as usize;
    let srs = Srs::generate(curve, mu, w.seed).map_err(|e| CliError::fail("setup", e))?;
    let c = gen_mock_circuit(curve.scalar_field(), mu, &w.sparsity, w.seed, w.wiring_fraction)
        .map_err(|e| CliError::fail("workload", e))?;
    Ok((srs, c))
}

pub fn gen_workload(a: &WorkloadArgs, out: &Path) -> Result<String, CliError> {
    let w = functional_workload(a)?;
    let path = out.join(WORKLOAD_FILE);
    write(&path, w.to_json().as_bytes())?;
    Ok(format!(
        "gen-workload: mu={} seed={} -> {}",
        w.mu,
        w.seed,
        path.display()
    ))
}

pub fn prove(a: &WorkloadArgs, file: Option<&Path>, config: Option<&Path>, out: &Path) -> Result<String, CliError> {
    let w = match file {
        Some(p) => Workload::from_json(&read(p)?).map_err(|e| CliError::Usage(format!("workload file: {e}")))?,
        None => functional_workload(a)?,
    };
    if w.mu > MAX_FUNCTIONAL_MU {
        return Err(CliError::Usage(format!("mu {} exceeds {MAX_FUNCTIONAL_MU}", w.mu)));
    }
    let text = curve_text(config)?;
    let curve = load_curve(&text)?;
    let (srs, circuit) = circuit_for(&curve, &w)?;
    let proof = prove_all(&curve, &srs, &circuit, &ProverKnobs::default()).map_err(|e| CliError::fail("prove", e))?;
    write(&out.join(WORKLOAD_FILE), w.to_json().as_bytes())?;
    write(&out.join(CURVE_FILE), text.as_bytes())?;
    let bytes = proof.bundle.encode(&curve);
    write(&out.join(PROOF_FILE), &bytes)?;
    Ok(format!(
        "prove: mu={} seed={} bundle {} bytes digest {} -> {}",
        w.mu,
        w.seed,
        bytes.len(),
        hex(&proof.bundle.transcript_digest),
        out.display()
    ))
}

fn hex(b: &[u8]) -> String {
    b.iter().map(|x| format!("{x:02x}")).collect()
}

pub fn self_verify(out: &Path, config: Option<&Path>) -> Result<String, CliError> {
    let w = Workload::from_json(&read(&out.join(WORKLOAD_FILE))?).map_err(|e| CliError::fail("workload", e))?;
    let text = match config {
        Some(p) => read(p)?,
        None => read(&out.join(CURVE_FILE)).or_else(|_| Ok::<_, CliError>(BLS12_381_TOML.to_string()))?,
    };
    let curve = load_curve(&text)?;
    let bytes = fs::read(out.join(PROOF_FILE)).map_err(|e| CliError::fail("io", e))?;
    let bundle = ProofBundle::decode(&curve, &bytes).map_err(|e| CliError::fail("decode", e))?;
    let (srs, circuit) = circuit_for(&curve, &w)?;
    let report = zkspeed_core::prover::self_verify(&curve, &srs, &circuit, &bundle, &ProverKnobs::default())
        .map_err(|e| CliError::fail("verify", e))?;
    if !report.passed() {
        let failed: Vec<&str> = report.failed().iter().map(|c| c.name()).collect();
        return Err(CliError::fail("verify", format!("failed checks: {}", failed.join(","))));
    }
    Ok(format!(
        "self-verify: mu={} all {} checks passed",
        w.mu,
        report.results.len()
    ))
}

fn census_csv(
    a: &AnalyticalCensus,
    functional: Option<&Census>,
    published: Option<&AnalyticalCensus>,
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::fail("csv", e);
    w.write_record([
        "schema",
        "mu",
        "kernel",
        "modmuls",
        "padds",
        "input_bytes",
        "output_bytes",
        "instrumented_modmuls",
        "rel_error",
        "reference_millions",
        "reference_ratio",
    ])
    .map_err(err)?;
    let t1 = published.map(published_comparison).unwrap_or_default();
    for k in Kernel::ALL {
        let c = a.get(k);
        let (inst, rel) = match functional {
            Some(f) => {
                let y = f.modmuls(k);
                let rel = if y == 0 {
                    0.0
                } else {
                    (c.modmuls - y as f64).abs() / y as f64
                };
                (y.to_string(), format!("{rel:.6}"))
            }
            None => (String::new(), String::new()),
        };
        let (refm, ratio) = t1
            .iter()
            .find(|r| r.kernel == k.name())
            .map_or((String::new(), String::new()), |r| {
                (format!("{}", r.reference_millions), format!("{:.4}", r.ratio))
            });
        w.write_record([
            CENSUS_SCHEMA.to_string(),
            a.mu.to_string(),
            k.name().to_string(),
            format!("{:.0}", c.modmuls),
            format!("{:.0}", c.padds),
            format!("{:.0}", c.input_bytes),
            format!("{:.0}", c.output_bytes),
            inst,
            rel,
            refm,
            ratio,
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::fail("csv", e))
}

pub fn census(a: &WorkloadArgs, functional: bool, window: Option<u32>, out: Option<&Path>) -> Result<String, CliError> {
    let curve = Curve::bls12_381_g1();
    let f = curve.scalar_field();
    let params = CensusParams {
        window,
        ..CensusParams::default()
    };
    let (mu, inputs, run) = if functional {
        let w = functional_workload(a)?;
        let (srs, c) = circuit_for(&curve, &w)?;
        let proof = prove_all(&curve, &srs, &c, &ProverKnobs::default()).map_err(|e| CliError::fail("prove", e))?;
        (w.mu, CensusInputs::observed(&proof.census), Some(proof.census))
    } else {
        let w = perf_workload(a)?;
        (w.mu, CensusInputs::expected(w.mu, &w.sparsity), None)
    };
    let analytical = analytical_census(f, mu, &inputs, &params);
    let published = (mu == 20).then(|| analytical_census(f, mu, &inputs, &published_params()));
    let bytes = census_csv(&analytical, run.as_ref(), published.as_ref())?;
    let total: f64 = Kernel::ALL.iter().map(|&k| analytical.modmuls(k)).sum();
    let dest = out.map(|o| o.join("census.csv"));
    match &dest {
        Some(p) => write(p, &bytes)?,
        None => to_stdout(&bytes)?,
    }
    let mut line = format!("census: mu={mu} total {:.3e} modmuls", total);
    if let Some(c) = &run {
        let y: u64 = Kernel::ALL.iter().map(|&k| c.modmuls(k)).sum();
        line += &format!(
            ", instrumented {y} (rel err {:.2e})",
            (total - y as f64).abs() / y as f64
        );
    }
    if let Some(p) = dest {
        line += &format!(" -> {}", p.display());
    }
    Ok(line)
}

fn parse_bandwidths(s: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("--bandwidth: bad value {p:?}")))
        })
        .collect()
}

fn design_arg(s: Option<&str>) -> Result<DesignPoint, CliError> {
    s.map_or(Ok(DesignPoint::REFERENCE), |s| {
        parse_design(s).map_err(|e| CliError::Usage(format!("--design: {e}")))
    })
}

/// Writes `bytes` to stdout, newline-terminated. A closed pipe is not an error.
pub fn to_stdout(bytes: &[u8]) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    let r = out.write_all(bytes).and_then(|_| {
        if bytes.last().is_some_and(|&b| b != b'\n') {
            out.write_all(b"\n")?;
        }
        out.flush()
    });
    match r {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::fail("io", e)),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, name: &str, bytes: &[u8]) -> Result<Option<PathBuf>, CliError> {
    match out {
        Some(o) => {
            let p = o.join(name);
            write(&p, bytes)?;
            Ok(Some(p))
        }
        None => {
            to_stdout(bytes)?;
            Ok(None)
        }
    }
}

fn arrow(p: Option<PathBuf>) -> String {
    p.map(|p| format!(" -> {}", p.display())).unwrap_or_default()
}

pub fn dse(
    a: &WorkloadArgs,
    config: Option<&Path>,
    costs: Option<&Path>,
    bandwidth: Option<&str>,
    design: Option<&str>,
    out: Option<&Path>,
) -> Result<String, CliError> {
    let w = perf_workload(a)?;
    let model = Model::new(load_costs(costs)?);
    if let Some(s) = design {
        let mut d = design_arg(Some(s))?;
        if let Some(b) = bandwidth {
            let bws = parse_bandwidths(b)?;
            let [bw] = bws[..] else {
                return Err(CliError::Usage("--design takes a single --bandwidth".into()));
            };
            d = d.with_bandwidth(bw);
        }
        let r = model
            .evaluate_checked(&d, &w)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut v = serde_json::to_value(&r).map_err(|e| CliError::fail("json", e))?;
        let util: serde_json::Map<_, _> = r
            .utilization()
            .into_iter()
            .map(|(k, u)| (k.to_string(), u.into()))
            .collect();
        v["utilization"] = util.into();
        let json = serde_json::to_vec_pretty(&v).map_err(|e| CliError::fail("json", e))?;
        let dest = emit(out, "report.json", &json)?;
        return Ok(format!(
            "dse: design {d} runtime {:.3} ms area {:.2} mm2 power {:.2} W{}",
            r.runtime_ms,
            r.area_mm2,
            r.power_w,
            arrow(dest)
        ));
    }
    let mut doms = match config {
        Some(p) => KnobDomains::from_toml(&read(p)?).map_err(|e| CliError::Usage(format!("--config: {e}")))?,
        None => KnobDomains::full_space(),
    };
    if let Some(b) = bandwidth {
        doms.bandwidth_gbps = parse_bandwidths(b)?;
    }
    let rows = evaluate_all(&model, &doms, &w).map_err(|e| CliError::Usage(e.to_string()))?;
    let fronts = Frontiers::of(&rows);
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows, &fronts).map_err(|e| CliError::fail("csv", e))?;
    let dest = emit(out, "dse.csv", &buf)?;
    let best = fastest(&rows, &fronts.global, 0.0).ok_or_else(|| CliError::fail("dse", "empty frontier"))?;
    Ok(format!(
        "dse: mu={} {} designs, {} on the global frontier, fastest {:.3} ms ({}) at {:.2} mm2{}",
        w.mu,
        rows.len(),
        fronts.global.len(),
        best.runtime_ms,
        best.design,
        best.area_mm2,
        arrow(dest)
    ))
}

pub fn sweep_bandwidth(
    a: &WorkloadArgs,
    design: Option<&str>,
    costs: Option<&Path>,
    out: Option<&Path>,
) -> Result<String, CliError> {
    let w = perf_workload(a)?;
    let model = Model::new(load_costs(costs)?);
    let base = design_arg(design)?;
    let rows = bandwidth_sweep(&model, &base, &w).map_err(|e| CliError::fail("sweep", e))?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).map_err(|e| CliError::fail("csv", e))?;
    let dest = emit(out, "sweep_bandwidth.csv", &buf)?;
    Ok(format!(
        "sweep-bandwidth: mu={} {} rows{}",
        w.mu,
        rows.len(),
        arrow(dest)
    ))
}

pub fn sweep_batch(max_log2: u32, costs: Option<&Path>, out: Option<&Path>) -> Result<String, CliError> {
    if !(1..=20).contains(&max_log2) {
        return Err(CliError::Usage("--max-log2 must be in 1..=20".into()));
    }
    let c = load_costs(costs)?;
    let mut buf = Vec::new();
    let best = write_batch_csv(&mut buf, &c, max_log2).map_err(|e| CliError::fail("csv", e))?;
    let dest = emit(out, "sweep_batch.csv", &buf)?;
    Ok(format!("sweep-batch: optimal batch {best}{}", arrow(dest)))
}

pub fn dump_costs(out: Option<&Path>) -> Result<String, CliError> {
    match out {
        Some(o) => {
            write(&o.join("costs.toml"), COSTS_TOML.as_bytes())?;
            write(&o.join("knobs.toml"), KNOBS_TOML.as_bytes())?;
            Ok(format!("dump-costs: -> {}", o.display()))
        }
        None => {
            to_stdout(COSTS_TOML.as_bytes())?;
            Ok(String::new())
        }
    }
}
