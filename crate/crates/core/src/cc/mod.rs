//! Pluggable congestion controllers.
//!
//! All controllers are pure state machines clocked by the simulator: they
//! receive ACK counts, per-packet RTT samples, coalesced congestion events
//! and timeouts, and expose the current window. One instance belongs to one
//! flow; instances share nothing.

pub mod cubic;
pub mod highspeed;
pub mod htcp;
pub mod reno;
pub mod scalable;
pub mod siad;

use crate::scenario::FlowAlgorithm;

/// Minimum window for the loss-based baselines, in packets.
pub const BASELINE_MIN_CWND: f64 = 1.0;

pub trait CongestionController: Send {
    /// `acked` newly acknowledged packets. The driver delivers the matching
    /// RTT sample via [`on_rtt_sample`](Self::on_rtt_sample) before this
    /// call.
    fn on_ack(&mut self, acked: u64, now: f64);
    fn on_rtt_sample(&mut self, rtt: f64, now: f64);
    /// One coalesced congestion event (all losses within one RTT).
    fn on_congestion_event(&mut self, now: f64);
    /// Retransmission timeout.
    fn on_timeout(&mut self, now: f64);
    /// Current congestion window in fractional packets; the sender keeps at
    /// most `floor(cwnd)` packets in flight.
    fn cwnd(&self) -> f64;
    /// Decrease factor applied by the most recent congestion event, where
    /// the algorithm computes one.
    fn last_decrease_beta(&self) -> Option<f64> {
        None
    }
    /// Algorithm-internal base-RTT estimate, for tracing.
    fn rtt_min_estimate(&self) -> Option<f64> {
        None
    }
}

pub fn build_controller(algo: &FlowAlgorithm) -> Box<dyn CongestionController> {
    match algo {
        FlowAlgorithm::Siad(cfg) => Box::new(siad::SiadState::initialize(*cfg)),
        FlowAlgorithm::Reno => Box::new(reno::NewReno::new()),
        FlowAlgorithm::Cubic => Box::new(cubic::Cubic::new()),
        FlowAlgorithm::Scalable => Box::new(scalable::Scalable::new()),
        FlowAlgorithm::Highspeed => Box::new(highspeed::HighSpeed::new()),
        FlowAlgorithm::Htcp => Box::new(htcp::Htcp::new()),
    }
}

/// Initial window shared by all controllers, in packets.
pub const INITIAL_WINDOW: f64 = 10.0;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::FlowAlgorithm;

    fn baselines() -> Vec<(&'static str, Box<dyn CongestionController>)> {
        vec![
            ("reno", build_controller(&FlowAlgorithm::Reno)),
            ("cubic", build_controller(&FlowAlgorithm::Cubic)),
            ("scalable", build_controller(&FlowAlgorithm::Scalable)),
            ("highspeed", build_controller(&FlowAlgorithm::Highspeed)),
            ("htcp", build_controller(&FlowAlgorithm::Htcp)),
        ]
    }

    #[test]
    fn baselines_keep_floor_and_always_reduce() {
        for (name, mut ctl) in baselines() {
            let mut now = 0.0;
            for round in 0..200 {
                for _ in 0..20 {
                    ctl.on_rtt_sample(0.1, now);
                    ctl.on_ack(1, now);
                    now += 0.005;
                    assert!(ctl.cwnd() >= BASELINE_MIN_CWND, "{name} under floor");
                }
                if round % 7 == 6 {
                    let before = ctl.cwnd();
                    ctl.on_congestion_event(now);
                    assert!(ctl.cwnd() < before, "{name} did not reduce");
                    assert!(ctl.cwnd() >= BASELINE_MIN_CWND);
                }
                if round == 100 {
                    ctl.on_timeout(now);
                    assert!(ctl.cwnd() >= BASELINE_MIN_CWND);
                }
            }
        }
    }
}
