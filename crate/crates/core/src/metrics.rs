//! Trace post-processing: everything the experiment harness reports is
//! computed here from the recorded ground truth.

use crate::error::SimError;
use crate::trace::{FlowSummary, RunSummary, RunTrace};

/// Convergence definition: both flows' rates, averaged over a sliding
/// [`CONVERGENCE_WINDOW_S`] window, must stay within
/// [`CONVERGENCE_TOLERANCE`] of the fair share for
/// [`CONVERGENCE_HOLD_S`] consecutive seconds.
pub const CONVERGENCE_TOLERANCE: f64 = 0.25;
pub const CONVERGENCE_WINDOW_S: f64 = 5.0;
pub const CONVERGENCE_HOLD_S: f64 = 10.0;

fn check_interval(trace: &RunTrace, from: f64, to: f64) -> Result<(usize, usize), SimError> {
    if !(to > from) {
        return Err(SimError::validation(
            "interval",
            format!("empty interval [{from}, {to}]"),
        ));
    }
    if from < 0.0 || to > trace.scenario.horizon_s + 1e-9 {
        return Err(SimError::validation(
            "interval",
            "outside the simulated horizon",
        ));
    }
    Ok((trace.index_at(from), trace.index_at(to)))
}

/// Fraction of the bottleneck capacity carried in `[from, to]`: delivered
/// wire bits across all flows (cross traffic included) divided by
/// `bandwidth * (to - from)`.
pub fn utilization(trace: &RunTrace, from: f64, to: f64) -> Result<f64, SimError> {
    let (i0, i1) = check_interval(trace, from, to)?;
    let mut packets = 0u64;
    for f in &trace.flows {
        packets += f.series.delivered[i1] - f.series.delivered[i0];
    }
    if !trace.cross_delivered.is_empty() {
        packets += trace.cross_delivered[i1] - trace.cross_delivered[i0];
    }
    let bits = packets as f64 * trace.scenario.packet_bits();
    let span = trace.time_at(i1) - trace.time_at(i0);
    Ok(bits / (trace.scenario.bandwidth_bps() * span))
}

/// Time-weighted mean queue occupancy over `[from, to]` as a fraction of
/// capacity.
pub fn queue_fill(trace: &RunTrace, from: f64, to: f64) -> Result<f64, SimError> {
    let (i0, i1) = check_interval(trace, from, to)?;
    let packet_seconds =
        trace.queue.occupancy_integral[i1] - trace.queue.occupancy_integral[i0];
    let span = trace.time_at(i1) - trace.time_at(i0);
    Ok(packet_seconds / (span * trace.queue_capacity as f64))
}

/// Payload bit rate of one flow over `[from, to]`.
pub fn per_flow_rate(trace: &RunTrace, flow: usize, from: f64, to: f64) -> Result<f64, SimError> {
    let f = trace
        .flows
        .get(flow)
        .ok_or_else(|| SimError::validation("flow", format!("unknown flow id {flow}")))?;
    let (i0, i1) = check_interval(trace, from, to)?;
    let packets = f.series.delivered[i1] - f.series.delivered[i0];
    let span = trace.time_at(i1) - trace.time_at(i0);
    Ok(packets as f64 * trace.scenario.payload_bits() / span)
}

/// Groups one flow's drops into congestion events (all drops within one
/// smoothed RTT of the first belong to the event) and returns the gaps:
/// time from the last loss of one event to the first loss of the next.
/// Fewer than two events yield an empty list.
pub fn loss_event_distance(trace: &RunTrace, flow: usize) -> Result<Vec<f64>, SimError> {
    let f = trace
        .flows
        .get(flow)
        .ok_or_else(|| SimError::validation("flow", format!("unknown flow id {flow}")))?;
    Ok(distances_from_drops(
        &f.drops.iter().map(|d| (d.time, d.srtt)).collect::<Vec<_>>(),
    ))
}

fn distances_from_drops(drops: &[(f64, f64)]) -> Vec<f64> {
    let mut distances = Vec::new();
    let mut iter = drops.iter();
    let Some(&(first, srtt)) = iter.next() else {
        return distances;
    };
    let mut event_first = first;
    let mut event_window = srtt;
    let mut event_last = first;
    for &(t, srtt) in iter {
        if t <= event_first + event_window {
            event_last = t;
        } else {
            distances.push(t - event_last);
            event_first = t;
            event_window = srtt;
            event_last = t;
        }
    }
    distances
}

/// Time from the joiner's start until every flow's sliding-window rate has
/// stayed within [`CONVERGENCE_TOLERANCE`] of `fair_share_bps` for
/// [`CONVERGENCE_HOLD_S`] consecutive seconds. `None` when that never
/// happens within the horizon.
pub fn convergence_time(
    trace: &RunTrace,
    joiner: usize,
    fair_share_bps: f64,
) -> Result<Option<f64>, SimError> {
    let joiner_start = trace
        .flows
        .get(joiner)
        .ok_or_else(|| SimError::validation("flow", format!("unknown flow id {joiner}")))?
        .start_s;
    let dt = trace.sample_interval_s;
    let win = (CONVERGENCE_WINDOW_S / dt).round() as usize;
    let hold = (CONVERGENCE_HOLD_S / dt).round() as usize;
    if trace.samples <= win + hold {
        return Ok(None);
    }
    let lo = (1.0 - CONVERGENCE_TOLERANCE) * fair_share_bps;
    let hi = (1.0 + CONVERGENCE_TOLERANCE) * fair_share_bps;
    let payload = trace.scenario.payload_bits();
    let start_idx = trace.index_at(joiner_start).max(win);

    let ok_at = |i: usize| -> bool {
        trace.flows.iter().all(|f| {
            let pkts = f.series.delivered[i] - f.series.delivered[i - win];
            let rate = pkts as f64 * payload / (win as f64 * dt);
            rate >= lo && rate <= hi
        })
    };

    let mut run_len = 0usize;
    for i in start_idx..trace.samples {
        if ok_at(i) {
            run_len += 1;
            if run_len >= hold {
                let t0 = trace.time_at(i - (hold - 1));
                return Ok(Some((t0 - joiner_start).max(0.0)));
            }
        } else {
            run_len = 0;
        }
    }
    Ok(None)
}

/// Condenses a trace into the per-run summary record.
pub fn summarize(trace: &RunTrace) -> RunSummary {
    let warmup = trace.scenario.warmup_s;
    let horizon = trace.scenario.horizon_s;
    let utilization = utilization(trace, warmup, horizon).unwrap_or(0.0);
    let queue_fill = queue_fill(trace, warmup, horizon).unwrap_or(0.0);

    let mut flows = Vec::with_capacity(trace.flows.len());
    for (fi, f) in trace.flows.iter().enumerate() {
        let rate = per_flow_rate(trace, fi, warmup, horizon).unwrap_or(0.0);
        let loss_rate = if f.totals.sent > 0 {
            f.totals.dropped() as f64 / f.totals.sent as f64
        } else {
            0.0
        };
        let distances = loss_event_distance(trace, fi).unwrap_or_default();
        let mean_distance = (!distances.is_empty())
            .then(|| distances.iter().sum::<f64>() / distances.len() as f64);
        let post_warmup_events: Vec<_> = f
            .cc_events
            .iter()
            .filter(|e| e.time >= warmup && !e.timeout)
            .collect();
        let betas: Vec<f64> = post_warmup_events.iter().filter_map(|e| e.beta).collect();
        let mean_beta =
            (!betas.is_empty()).then(|| betas.iter().sum::<f64>() / betas.len() as f64);
        let i0 = trace.index_at(warmup);
        let srtt_tail = &f.series.srtt[i0..];
        let mean_rtt = if srtt_tail.is_empty() {
            0.0
        } else {
            srtt_tail.iter().sum::<f64>() / srtt_tail.len() as f64
        };
        flows.push(FlowSummary {
            flow: fi,
            algorithm: f.label.clone(),
            rate_bps: rate,
            loss_rate,
            delivered_packets: f.totals.delivered,
            congestion_events: post_warmup_events.len(),
            mean_loss_event_distance_s: mean_distance,
            mean_beta,
            mean_rtt_s: mean_rtt,
        });
    }

    let convergence_time_s = convergence_target(trace).and_then(|(joiner, fair)| {
        convergence_time(trace, joiner, fair).ok().flatten()
    });

    let (max_min, min_min) = epoch_queue_minima(trace);
    RunSummary {
        seed: trace.seed,
        utilization,
        queue_fill,
        flows,
        convergence_time_s,
        max_epoch_queue_min: max_min,
        min_epoch_queue_min: min_min,
    }
}

/// Joiner flow and fair share for the two-flow convergence measurement, if
/// the scenario has that shape.
fn convergence_target(trace: &RunTrace) -> Option<(usize, f64)> {
    if trace.flows.len() != 2 {
        return None;
    }
    let (a, b) = (trace.flows[0].start_s, trace.flows[1].start_s);
    if a == b {
        return None;
    }
    let joiner = if b > a { 1 } else { 0 };
    Some((joiner, trace.scenario.bandwidth_bps() / 2.0))
}

/// Largest and smallest per-epoch minimum queue occupancy across the first
/// flow's post-warmup congestion epochs (packets). A largest value of zero
/// means the queue fully drained in every epoch; a positive smallest value
/// means a standing queue survived every epoch.
fn epoch_queue_minima(trace: &RunTrace) -> (Option<f64>, Option<f64>) {
    let Some(f) = trace.flows.first() else {
        return (None, None);
    };
    let events: Vec<f64> = f
        .cc_events
        .iter()
        .filter(|e| e.time >= trace.scenario.warmup_s)
        .map(|e| e.time)
        .collect();
    if events.len() < 2 {
        return (None, None);
    }
    let mut worst: f64 = 0.0;
    let mut best = f64::INFINITY;
    let mut any = false;
    for pair in events.windows(2) {
        let (i0, i1) = (trace.index_at(pair[0]), trace.index_at(pair[1]));
        if i1 <= i0 + 1 {
            continue;
        }
        let epoch_min = trace.queue.min_occupancy[i0 + 1..=i1]
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        worst = worst.max(epoch_min);
        best = best.min(epoch_min);
        any = true;
    }
    if any {
        (Some(worst), Some(best))
    } else {
        (None, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{FlowSpec, Scenario};
    use crate::trace::{FlowSeries, FlowTotals, FlowTrace, QueueSeries};

    /// Hand-built trace: `rates` are per-flow delivered packets per sample.
    fn synthetic_trace(rates: &[f64], samples: usize, dt: f64) -> RunTrace {
        let mut sc = Scenario::single_flow(
            10.0,
            0.5,
            FlowSpec::greedy(crate::scenario::AlgorithmName::Reno),
        );
        sc.horizon_s = samples as f64 * dt;
        sc.warmup_s = 0.0;
        sc.sample_interval_ms = dt * 1000.0;
        sc.flows = rates
            .iter()
            .map(|_| FlowSpec::greedy(crate::scenario::AlgorithmName::Reno))
            .collect();
        let flows = rates
            .iter()
            .map(|&r| {
                let mut series = FlowSeries::default();
                let mut total = 0.0;
                for _ in 0..samples {
                    total += r;
                    series.cwnd.push(10.0);
                    series.delivered.push(total as u64);
                    series.sent.push(total as u64);
                    series.dropped.push(0);
                    series.srtt.push(0.1);
                    series.rtt_min.push(0.1);
                }
                FlowTrace {
                    label: "reno".into(),
                    start_s: 0.0,
                    series,
                    cc_events: Vec::new(),
                    drops: Vec::new(),
                    totals: FlowTotals::default(),
                }
            })
            .collect();
        let mut queue = QueueSeries::default();
        for i in 0..samples {
            queue.occupancy.push(0.0);
            queue.min_occupancy.push(0.0);
            queue.busy_time.push(0.0);
            queue.occupancy_integral.push(i as f64 * 0.0);
        }
        RunTrace {
            scenario: sc,
            seed: 1,
            sample_interval_s: dt,
            samples,
            flows,
            queue,
            cross_delivered: Vec::new(),
            queue_capacity: 42,
            bdp_packets: 83.3,
        }
    }

    #[test]
    fn idle_link_utilization_zero() {
        let trace = synthetic_trace(&[0.0], 1000, 0.01);
        assert_eq!(utilization(&trace, 0.0, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn saturated_link_utilization_one() {
        // 10 Mbit/s, 1500 B packets: 833.3 pkt/s = 8.333 per 10 ms sample.
        let trace = synthetic_trace(&[8.333], 1000, 0.01);
        let u = utilization(&trace, 0.0, 10.0).unwrap();
        assert!((u - 1.0).abs() < 0.01, "u = {u}");
    }

    #[test]
    fn empty_interval_is_error() {
        let trace = synthetic_trace(&[1.0], 100, 0.01);
        assert!(utilization(&trace, 0.5, 0.5).is_err());
        assert!(queue_fill(&trace, 0.7, 0.2).is_err());
    }

    #[test]
    fn unknown_flow_is_error() {
        let trace = synthetic_trace(&[1.0], 100, 0.01);
        assert!(per_flow_rate(&trace, 3, 0.0, 1.0).is_err());
    }

    #[test]
    fn never_used_queue_fill_zero() {
        let trace = synthetic_trace(&[1.0], 100, 0.01);
        assert_eq!(queue_fill(&trace, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn stopped_flow_rate_zero() {
        let trace = synthetic_trace(&[0.0], 100, 0.01);
        assert_eq!(per_flow_rate(&trace, 0, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn loss_event_distance_definition() {
        // Two events at 5.0 and 7.1 with coincident first/last losses.
        let drops = [(5.0, 0.1), (7.1, 0.1)];
        let d = distances_from_drops(&drops);
        assert_eq!(d.len(), 1);
        assert!((d[0] - 2.1).abs() < 1e-12);
    }

    #[test]
    fn loss_event_distance_groups_within_rtt() {
        // Losses at 5.0 and 5.05 share an event (srtt 0.1); next event at
        // 7.1: distance measured from the last loss of the first event.
        let drops = [(5.0, 0.1), (5.05, 0.1), (7.1, 0.1)];
        let d = distances_from_drops(&drops);
        assert_eq!(d.len(), 1);
        assert!((d[0] - (7.1 - 5.05)).abs() < 1e-12);
    }

    #[test]
    fn single_event_has_no_distance() {
        assert!(distances_from_drops(&[(5.0, 0.1)]).is_empty());
        assert!(distances_from_drops(&[]).is_empty());
    }

    #[test]
    fn instant_equal_split_converges_at_window_latency() {
        // Both flows at exactly the fair share from t = 0; joiner "starts"
        // at 0, so convergence is only the sliding-window latency.
        let mut trace = synthetic_trace(&[4.16, 4.16], 6000, 0.01);
        trace.flows[1].start_s = 1.0;
        let fair = trace.scenario.bandwidth_bps() / 2.0;
        let t = convergence_time(&trace, 1, fair).unwrap().unwrap();
        // Rates are in range as soon as the window is defined, so the hold
        // completes one window after the start.
        assert!(t < CONVERGENCE_WINDOW_S + 1.0, "t = {t}");
    }

    #[test]
    fn unfair_split_never_converges() {
        let trace = synthetic_trace(&[7.0, 1.3], 6000, 0.01);
        let fair = trace.scenario.bandwidth_bps() / 2.0;
        assert!(convergence_time(&trace, 1, fair).unwrap().is_none());
    }
}
