//! H-TCP: increase step grows with the time since the last congestion event,
//! decrease factor follows the RTT ratio clamped to [0.5, 0.8].

use super::{CongestionController, BASELINE_MIN_CWND, INITIAL_WINDOW};

/// `alpha(delta)`: 1 below one second, then the canonical polynomial.
pub fn htcp_alpha(delta: f64) -> f64 {
    if delta <= 1.0 {
        1.0
    } else {
        let d = delta - 1.0;
        1.0 + 10.0 * d + 0.25 * d * d
    }
}

/// `beta = rtt_min / rtt_curr`, restricted to [0.5, 0.8].
pub fn htcp_beta(rtt_min: f64, rtt_curr: f64) -> f64 {
    (rtt_min / rtt_curr).clamp(0.5, 0.8)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Htcp {
    pub cwnd: f64,
    pub ssthresh: f64,
    rtt_min: f64,
    rtt_curr: f64,
    last_congestion: Option<f64>,
}

impl Htcp {
    pub fn new() -> Self {
        Htcp {
            cwnd: INITIAL_WINDOW,
            ssthresh: f64::INFINITY,
            rtt_min: f64::INFINITY,
            rtt_curr: f64::INFINITY,
            last_congestion: None,
        }
    }

    fn beta(&self) -> f64 {
        if self.rtt_min.is_finite() && self.rtt_curr.is_finite() {
            htcp_beta(self.rtt_min, self.rtt_curr)
        } else {
            0.5
        }
    }
}

impl Default for Htcp {
    fn default() -> Self {
        Self::new()
    }
}

impl CongestionController for Htcp {
    fn on_ack(&mut self, _acked: u64, now: f64) {
        if self.cwnd < self.ssthresh {
            self.cwnd += 1.0;
            return;
        }
        let delta = self.last_congestion.map_or(0.0, |t| now - t);
        let alpha = htcp_alpha(delta);
        let beta = self.beta();
        self.cwnd += 2.0 * (1.0 - beta) * alpha / self.cwnd;
    }

    fn on_rtt_sample(&mut self, rtt: f64, _now: f64) {
        self.rtt_curr = rtt;
        if rtt < self.rtt_min {
            self.rtt_min = rtt;
        }
    }

    fn on_congestion_event(&mut self, now: f64) {
        let beta = self.beta();
        self.ssthresh = (beta * self.cwnd).max(2.0);
        self.cwnd = self.ssthresh;
        self.last_congestion = Some(now);
    }

    fn on_timeout(&mut self, now: f64) {
        self.ssthresh = (self.beta() * self.cwnd).max(2.0);
        self.cwnd = BASELINE_MIN_CWND;
        self.last_congestion = Some(now);
    }

    fn cwnd(&self) -> f64 {
        self.cwnd
    }

    fn last_decrease_beta(&self) -> Option<f64> {
        self.last_congestion.map(|_| self.beta())
    }
}
