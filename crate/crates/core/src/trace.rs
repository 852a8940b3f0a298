//! Ground-truth traces recorded by the simulator and the per-run summary.

use serde::Serialize;

use crate::scenario::Scenario;

/// Transmission/delivery counters per flow. `sent` counts transmissions
/// (including retransmissions); at any sampling instant
/// `sent = delivered + delivered_dup + dropped + in-network`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FlowTotals {
    pub sent: u64,
    pub delivered: u64,
    pub delivered_dup: u64,
    pub dropped_congestion: u64,
    pub dropped_injected: u64,
    pub retransmits: u64,
    pub acks_received: u64,
    pub timeouts: u64,
}

impl FlowTotals {
    pub fn dropped(&self) -> u64 {
        self.dropped_congestion + self.dropped_injected
    }
}

/// One coalesced congestion notification (or timeout) as seen by the
/// controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcEventRecord {
    pub time: f64,
    pub cwnd_before: f64,
    pub cwnd_after: f64,
    pub beta: Option<f64>,
    pub timeout: bool,
}

/// A packet of this flow dropped at the bottleneck (tail drop or injected),
/// with the flow's smoothed RTT at that moment for event grouping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DropRecord {
    pub time: f64,
    pub srtt: f64,
}

/// Sampled per-flow series; one entry per sampling instant.
#[derive(Debug, Clone, Default)]
pub struct FlowSeries {
    pub cwnd: Vec<f64>,
    pub delivered: Vec<u64>,
    pub sent: Vec<u64>,
    pub dropped: Vec<u64>,
    pub srtt: Vec<f64>,
    /// Controller-internal base-RTT estimate (NaN where the algorithm has
    /// none).
    pub rtt_min: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub label: String,
    pub start_s: f64,
    pub series: FlowSeries,
    pub cc_events: Vec<CcEventRecord>,
    pub drops: Vec<DropRecord>,
    pub totals: FlowTotals,
}

/// Sampled bottleneck series. `occupancy_integral` and `busy_time` are
/// running totals, so differences over an interval are exact.
#[derive(Debug, Clone, Default)]
pub struct QueueSeries {
    pub occupancy: Vec<f64>,
    /// Minimum occupancy within the sampling window ending at this instant.
    pub min_occupancy: Vec<f64>,
    pub busy_time: Vec<f64>,
    pub occupancy_integral: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub scenario: Scenario,
    pub seed: u64,
    pub sample_interval_s: f64,
    pub samples: usize,
    pub flows: Vec<FlowTrace>,
    pub queue: QueueSeries,
    /// Cross-traffic deliveries (all short flows pooled), sampled.
    pub cross_delivered: Vec<u64>,
    pub queue_capacity: usize,
    pub bdp_packets: f64,
}

impl RunTrace {
    /// Time of sample `i`; samples run at `(i + 1) * dt`.
    pub fn time_at(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.sample_interval_s
    }

    /// Sample index nearest to time `t`, clamped to the recorded range.
    pub fn index_at(&self, t: f64) -> usize {
        let raw = (t / self.sample_interval_s).round() as i64 - 1;
        raw.clamp(0, self.samples as i64 - 1) as usize
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub flow: usize,
    pub algorithm: String,
    /// Payload rate over the post-warmup window, bit/s.
    pub rate_bps: f64,
    pub loss_rate: f64,
    pub delivered_packets: u64,
    pub congestion_events: usize,
    pub mean_loss_event_distance_s: Option<f64>,
    pub mean_beta: Option<f64>,
    pub mean_rtt_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub utilization: f64,
    pub queue_fill: f64,
    pub flows: Vec<FlowSummary>,
    pub convergence_time_s: Option<f64>,
    /// Largest per-epoch minimum queue occupancy (packets) across the first
    /// flow's post-warmup congestion epochs; 0 means the queue drained in
    /// every epoch.
    pub max_epoch_queue_min: Option<f64>,
    /// Smallest per-epoch minimum queue occupancy; positive means a standing
    /// queue persisted through every epoch.
    pub min_epoch_queue_min: Option<f64>,
}
