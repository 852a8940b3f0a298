//! HighSpeed TCP: NewReno below 38 packets, increasingly aggressive a(w)
//! with shrinking decrease fraction b(w) above, per the canonical response
//! function with High_Window = 83000, High_P = 1e-7, High_Decrease = 0.1.

use super::{CongestionController, BASELINE_MIN_CWND, INITIAL_WINDOW};

pub const LOW_WINDOW: f64 = 38.0;
pub const HIGH_WINDOW: f64 = 83000.0;
pub const HIGH_DECREASE: f64 = 0.1;

/// `(a(w), b(w))` of the response function. Below the 38-packet threshold
/// the scheme is exactly NewReno: `(1, 0.5)`.
pub fn highspeed_params(cwnd: f64) -> (f64, f64) {
    if cwnd <= LOW_WINDOW {
        return (1.0, 0.5);
    }
    let b = (HIGH_DECREASE - 0.5) * (cwnd.ln() - LOW_WINDOW.ln())
        / (HIGH_WINDOW.ln() - LOW_WINDOW.ln())
        + 0.5;
    // p(w) = 0.078 / w^1.2 interpolates Low_P = 1e-3 at 38 packets and
    // High_P = 1e-7 at 83000 packets.
    let p = 0.078 / cwnd.powf(1.2);
    let a = cwnd * cwnd * p * 2.0 * b / (2.0 - b);
    (a.max(1.0), b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HighSpeed {
    pub cwnd: f64,
    pub ssthresh: f64,
}

impl HighSpeed {
    pub fn new() -> Self {
        HighSpeed {
            cwnd: INITIAL_WINDOW,
            ssthresh: f64::INFINITY,
        }
    }

    pub fn on_ack(&mut self, _acked: u64) {
        if self.cwnd < self.ssthresh {
            self.cwnd += 1.0;
        } else {
            let (a, _) = highspeed_params(self.cwnd);
            self.cwnd += a / self.cwnd;
        }
    }

    pub fn on_congestion(&mut self) {
        let (_, b) = highspeed_params(self.cwnd);
        self.ssthresh = ((1.0 - b) * self.cwnd).max(2.0);
        self.cwnd = self.ssthresh;
    }
}

impl Default for HighSpeed {
    fn default() -> Self {
        Self::new()
    }
}

impl CongestionController for HighSpeed {
    fn on_ack(&mut self, acked: u64, _now: f64) {
        HighSpeed::on_ack(self, acked);
    }

    fn on_rtt_sample(&mut self, _rtt: f64, _now: f64) {}

    fn on_congestion_event(&mut self, _now: f64) {
        self.on_congestion();
    }

    fn on_timeout(&mut self, _now: f64) {
        let (_, b) = highspeed_params(self.cwnd);
        self.ssthresh = ((1.0 - b) * self.cwnd).max(2.0);
        self.cwnd = BASELINE_MIN_CWND;
    }

    fn cwnd(&self) -> f64 {
        self.cwnd
    }
}
