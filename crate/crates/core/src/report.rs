//! Machine-readable result emission: JSON-lines summaries, CSV time series,
//! and a TOML manifest per run that reproduces the exact scenario.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::batch::RunRecord;
use crate::error::SimError;
use crate::trace::RunTrace;

#[derive(Serialize)]
struct ManifestInfo<'a> {
    run_id: usize,
    point: &'a str,
    rep: u32,
    seed: u64,
    version: &'a str,
}

#[derive(Serialize)]
struct ManifestFile<'a> {
    manifest: ManifestInfo<'a>,
    scenario: &'a crate::scenario::Scenario,
}

fn create_dir(outdir: &Path) -> Result<(), SimError> {
    fs::create_dir_all(outdir).map_err(|e| SimError::io(outdir.display().to_string(), e))
}

/// Appends one JSON object per run to `summary.jsonl`.
pub fn write_summaries(records: &[RunRecord], outdir: &Path) -> Result<(), SimError> {
    create_dir(outdir)?;
    let path = outdir.join("summary.jsonl");
    let mut out = Vec::new();
    for rec in records {
        let line = serde_json::to_string(rec).expect("summary serializes");
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    fs::write(&path, out).map_err(|e| SimError::io(path.display().to_string(), e))
}

/// Writes `run_NNNN_manifest.toml`: the resolved scenario (under
/// `[scenario]`, with the per-run seed baked in) plus run bookkeeping.
/// Loading the manifest back yields the identical scenario.
pub fn write_manifest(record: &RunRecord, outdir: &Path) -> Result<(), SimError> {
    create_dir(outdir)?;
    let mut scenario = record.scenario.clone();
    scenario.seed = record.seed;
    let file = ManifestFile {
        manifest: ManifestInfo {
            run_id: record.run_id,
            point: &record.point,
            rep: record.rep,
            seed: record.seed,
            version: env!("CARGO_PKG_VERSION"),
        },
        scenario: &scenario,
    };
    let text = toml::to_string(&file).expect("manifest serializes");
    let path = outdir.join(format!("run_{:04}_manifest.toml", record.run_id));
    fs::write(&path, text).map_err(|e| SimError::io(path.display().to_string(), e))
}

/// Writes `run_NNNN_series.csv`: time, per-flow cwnd in packets, queue
/// occupancy in packets, one row per sampling instant.
pub fn write_series(trace: &RunTrace, run_id: usize, outdir: &Path) -> Result<(), SimError> {
    create_dir(outdir)?;
    let path = outdir.join(format!("run_{run_id:04}_series.csv"));
    let io_err = |e| SimError::io(path.display().to_string(), e);
    let mut w = Vec::with_capacity(trace.samples * 32);
    write!(w, "time_s").map_err(io_err)?;
    for (fi, f) in trace.flows.iter().enumerate() {
        write!(w, ",flow{fi}_{}_cwnd_pkts", sanitize(&f.label)).map_err(io_err)?;
    }
    writeln!(w, ",queue_pkts").map_err(io_err)?;
    for i in 0..trace.samples {
        write!(w, "{:.3}", trace.time_at(i)).map_err(io_err)?;
        for f in &trace.flows {
            write!(w, ",{:.4}", f.series.cwnd[i]).map_err(io_err)?;
        }
        writeln!(w, ",{}", trace.queue.occupancy[i]).map_err(io_err)?;
    }
    fs::write(&path, w).map_err(|e| SimError::io(path.display().to_string(), e))
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { '_' })
        .collect()
}

/// Writes summaries plus one manifest per run; traces, when given, add the
/// per-run series files.
pub fn emit_results(
    records: &[RunRecord],
    traces: &[(usize, &RunTrace)],
    outdir: &Path,
) -> Result<(), SimError> {
    write_summaries(records, outdir)?;
    for rec in records {
        write_manifest(rec, outdir)?;
    }
    for (run_id, trace) in traces {
        write_series(trace, *run_id, outdir)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::run_batch;
    use crate::scenario::{load_scenario, FlowSpec, Scenario};

    fn tiny() -> Scenario {
        let mut sc = Scenario::single_flow(2.0, 0.5, FlowSpec::siad_num_rtt(10));
        sc.horizon_s = 6.0;
        sc.warmup_s = 1.0;
        sc
    }

    #[test]
    fn manifest_round_trips_to_identical_scenario() {
        let sc = tiny();
        let records = run_batch(&sc, 1).unwrap();
        let dir = std::env::temp_dir().join(format!("siadsim_manifest_{}", std::process::id()));
        write_manifest(&records[0], &dir).unwrap();
        let path = dir.join("run_0000_manifest.toml");
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(loaded, records[0].scenario);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn series_row_count_matches_sampling() {
        let sc = tiny();
        let trace = crate::sim::run(&sc).unwrap();
        let dir = std::env::temp_dir().join(format!("siadsim_series_{}", std::process::id()));
        write_series(&trace, 0, &dir).unwrap();
        let text = fs::read_to_string(dir.join("run_0000_series.csv")).unwrap();
        let rows = text.lines().count();
        // horizon / interval rows plus one header
        assert_eq!(rows, (6.0_f64 / 0.01).round() as usize + 1);
        assert!(text.starts_with("time_s,"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn summaries_are_one_json_object_per_line() {
        let sc = tiny();
        let records = run_batch(&sc, 2).unwrap();
        let dir = std::env::temp_dir().join(format!("siadsim_sum_{}", std::process::id()));
        write_summaries(&records, &dir).unwrap();
        let text = fs::read_to_string(dir.join("summary.jsonl")).unwrap();
        assert_eq!(text.lines().count(), 2);
        for line in text.lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert!(v.get("utilization").is_some());
            assert!(v.get("run_id").is_some());
        }
        fs::remove_dir_all(&dir).ok();
    }
}
