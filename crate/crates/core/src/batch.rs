//! Sweep and repetition execution.
//!
//! A batch expands a scenario's sweep axis into points, replicates each
//! point `reps` times (seed = base seed + repetition, plus optional start
//! staggering), runs every job, and aggregates per-point statistics. Jobs
//! are independent simulations; with the `parallel` feature (default) they
//! run on the rayon pool, otherwise sequentially. Results are ordered by
//! (point, repetition) either way, and each job is bit-deterministic, so
//! the execution mode never changes the output.

use serde::Serialize;

use crate::error::SimError;
use crate::metrics;
use crate::scenario::Scenario;
use crate::sim;
use crate::trace::RunSummary;

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub run_id: usize,
    /// Sweep-axis label, e.g. `buffer_bdp=0.5`; `-` for unswept scenarios.
    pub point: String,
    pub axis_value: Option<f64>,
    pub rep: u32,
    pub seed: u64,
    #[serde(flatten)]
    pub summary: RunSummary,
    #[serde(skip)]
    pub scenario: Scenario,
}

/// Expands the sweep axis into per-point scenarios (one entry when there is
/// no sweep).
pub fn expand_sweep(scenario: &Scenario) -> Vec<(String, Option<f64>, Scenario)> {
    match &scenario.sweep {
        None => vec![("-".to_string(), None, scenario.clone())],
        Some(sweep) => sweep
            .values
            .iter()
            .map(|&v| {
                let label = match sweep.axis {
                    crate::scenario::SweepAxis::BufferBdp => format!("buffer_bdp={v}"),
                    crate::scenario::SweepAxis::BandwidthMbps => {
                        format!("bandwidth_mbps={v}")
                    }
                    crate::scenario::SweepAxis::PRand => format!("p_rand={v}"),
                };
                (label, Some(v), scenario.with_axis_value(sweep.axis, v))
            })
            .collect(),
    }
}

fn prepare_jobs(
    scenario: &Scenario,
    reps: u32,
) -> Result<Vec<(String, Option<f64>, u32, Scenario)>, SimError> {
    if reps < 1 {
        return Err(SimError::validation("reps", "must be at least 1"));
    }
    scenario.validate()?;
    let mut jobs = Vec::new();
    for (label, axis, point_sc) in expand_sweep(scenario) {
        for rep in 0..reps {
            let mut sc = point_sc.clone();
            sc.seed = scenario.seed.wrapping_add(rep as u64);
            if let Some(batch) = &sc.batch {
                let start = batch.stagger_start_s + rep as f64 * batch.stagger_step_s;
                let flow = batch.stagger_flow;
                if start >= sc.horizon_s {
                    return Err(SimError::validation(
                        "batch.stagger_step_s",
                        format!("repetition {rep} staggers flow {flow} past the horizon"),
                    ));
                }
                sc.flows[flow].start_s = start;
            }
            sc.validate()?;
            jobs.push((label.clone(), axis, rep, sc));
        }
    }
    Ok(jobs)
}

fn execute_job(
    run_id: usize,
    label: &str,
    axis: Option<f64>,
    rep: u32,
    sc: &Scenario,
) -> Result<RunRecord, SimError> {
    let trace = sim::run(sc)?;
    Ok(RunRecord {
        run_id,
        point: label.to_string(),
        axis_value: axis,
        rep,
        seed: sc.seed,
        summary: metrics::summarize(&trace),
        scenario: sc.clone(),
    })
}

/// Runs every (point, repetition) job sequentially.
pub fn run_batch_sequential(scenario: &Scenario, reps: u32) -> Result<Vec<RunRecord>, SimError> {
    let jobs = prepare_jobs(scenario, reps)?;
    jobs.iter()
        .enumerate()
        .map(|(id, (label, axis, rep, sc))| execute_job(id, label, *axis, *rep, sc))
        .collect()
}

/// Runs every (point, repetition) job, in parallel when the `parallel`
/// feature is enabled.
#[cfg(feature = "parallel")]
pub fn run_batch(scenario: &Scenario, reps: u32) -> Result<Vec<RunRecord>, SimError> {
    use rayon::prelude::*;
    let jobs = prepare_jobs(scenario, reps)?;
    jobs.par_iter()
        .enumerate()
        .map(|(id, (label, axis, rep, sc))| execute_job(id, label, *axis, *rep, sc))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_batch(scenario: &Scenario, reps: u32) -> Result<Vec<RunRecord>, SimError> {
    run_batch_sequential(scenario, reps)
}

/// Per-point aggregate over repetitions.
#[derive(Debug, Clone, Serialize)]
pub struct PointAggregate {
    pub point: String,
    pub axis_value: Option<f64>,
    pub runs: usize,
    pub mean_utilization: f64,
    pub mean_queue_fill: f64,
    pub convergence_mean_s: Option<f64>,
    pub convergence_min_s: Option<f64>,
    pub convergence_max_s: Option<f64>,
    /// Repetitions that never converged within the horizon.
    pub convergence_absent: usize,
}

pub fn aggregate(records: &[RunRecord]) -> Vec<PointAggregate> {
    let mut points: Vec<PointAggregate> = Vec::new();
    for rec in records {
        if points.last().is_none_or(|p| p.point != rec.point) {
            points.push(PointAggregate {
                point: rec.point.clone(),
                axis_value: rec.axis_value,
                runs: 0,
                mean_utilization: 0.0,
                mean_queue_fill: 0.0,
                convergence_mean_s: None,
                convergence_min_s: None,
                convergence_max_s: None,
                convergence_absent: 0,
            });
        }
        let p = points.last_mut().unwrap();
        p.runs += 1;
        p.mean_utilization += rec.summary.utilization;
        p.mean_queue_fill += rec.summary.queue_fill;
        match rec.summary.convergence_time_s {
            Some(t) => {
                p.convergence_mean_s = Some(p.convergence_mean_s.unwrap_or(0.0) + t);
                p.convergence_min_s =
                    Some(p.convergence_min_s.map_or(t, |m: f64| m.min(t)));
                p.convergence_max_s =
                    Some(p.convergence_max_s.map_or(t, |m: f64| m.max(t)));
            }
            None => p.convergence_absent += 1,
        }
    }
    for p in &mut points {
        let n = p.runs as f64;
        p.mean_utilization /= n;
        p.mean_queue_fill /= n;
        let converged = p.runs - p.convergence_absent;
        if converged > 0 {
            p.convergence_mean_s = p.convergence_mean_s.map(|s| s / converged as f64);
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{FlowSpec, SweepAxis, SweepSpec};

    fn tiny_scenario() -> Scenario {
        let mut sc = Scenario::single_flow(2.0, 0.5, FlowSpec::siad_num_rtt(10));
        sc.horizon_s = 8.0;
        sc.warmup_s = 2.0;
        sc
    }

    #[test]
    fn single_repetition_equals_single_run() {
        let sc = tiny_scenario();
        let batch = run_batch(&sc, 1).unwrap();
        assert_eq!(batch.len(), 1);
        let trace = crate::sim::run(&sc).unwrap();
        let solo = crate::metrics::summarize(&trace);
        assert_eq!(batch[0].summary.utilization, solo.utilization);
        let agg = aggregate(&batch);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].mean_utilization, solo.utilization);
    }

    #[test]
    fn two_seeds_two_distinct_deterministic_runs() {
        let mut sc = tiny_scenario();
        sc.loss = Some(crate::scenario::LossSpec {
            p_rand: 0.01,
            drop_seqs: Vec::new(),
        });
        let a = run_batch(&sc, 2).unwrap();
        let b = run_batch(&sc, 2).unwrap();
        assert_eq!(a[0].seed, sc.seed);
        assert_eq!(a[1].seed, sc.seed + 1);
        // Same job, same result; different seeds, different drop pattern.
        assert_eq!(a[0].summary.utilization, b[0].summary.utilization);
        assert_eq!(a[1].summary.utilization, b[1].summary.utilization);
        assert_ne!(
            a[0].summary.flows[0].loss_rate,
            a[1].summary.flows[0].loss_rate
        );
    }

    #[test]
    fn sweep_expands_in_order() {
        let mut sc = tiny_scenario();
        sc.sweep = Some(SweepSpec {
            axis: SweepAxis::BufferBdp,
            values: vec![0.3, 1.0],
        });
        let jobs = expand_sweep(&sc);
        assert_eq!(jobs.len(), 2);
        assert_eq!(jobs[0].2.buffer_bdp, 0.3);
        assert_eq!(jobs[1].2.buffer_bdp, 1.0);
        assert!(jobs[1].2.sweep.is_none());
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let mut sc = tiny_scenario();
        sc.sweep = Some(SweepSpec {
            axis: SweepAxis::BandwidthMbps,
            values: vec![1.0, 2.0],
        });
        let par = run_batch(&sc, 2).unwrap();
        let seq = run_batch_sequential(&sc, 2).unwrap();
        assert_eq!(par.len(), seq.len());
        for (a, b) in par.iter().zip(&seq) {
            assert_eq!(a.point, b.point);
            assert_eq!(a.summary.utilization, b.summary.utilization);
            assert_eq!(a.summary.queue_fill, b.summary.queue_fill);
        }
    }
}
