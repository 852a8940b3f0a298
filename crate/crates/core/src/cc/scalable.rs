//! Scalable TCP: multiplicative increase of 0.01 per ACK, decrease by 0.125
//! on congestion.

use super::{CongestionController, BASELINE_MIN_CWND, INITIAL_WINDOW};

const ALPHA_SCALABLE: f64 = 0.01;
const BETA_SCALABLE: f64 = 0.125;

#[derive(Debug, Clone, PartialEq)]
pub struct Scalable {
    pub cwnd: f64,
    pub ssthresh: f64,
}

impl Scalable {
    pub fn new() -> Self {
        Scalable {
            cwnd: INITIAL_WINDOW,
            ssthresh: f64::INFINITY,
        }
    }

    pub fn on_ack(&mut self, _acked: u64) {
        if self.cwnd < self.ssthresh {
            self.cwnd += 1.0;
        } else {
            self.cwnd += ALPHA_SCALABLE;
        }
    }

    pub fn on_congestion(&mut self) {
        self.ssthresh = ((1.0 - BETA_SCALABLE) * self.cwnd).max(2.0);
        self.cwnd = self.ssthresh;
    }
}

impl Default for Scalable {
    fn default() -> Self {
        Self::new()
    }
}

impl CongestionController for Scalable {
    fn on_ack(&mut self, acked: u64, _now: f64) {
        Scalable::on_ack(self, acked);
    }

    fn on_rtt_sample(&mut self, _rtt: f64, _now: f64) {}

    fn on_congestion_event(&mut self, _now: f64) {
        self.on_congestion();
    }

    fn on_timeout(&mut self, _now: f64) {
        self.ssthresh = ((1.0 - BETA_SCALABLE) * self.cwnd).max(2.0);
        self.cwnd = BASELINE_MIN_CWND;
    }

    fn cwnd(&self) -> f64 {
        self.cwnd
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_percent_growth_per_rtt() {
        let mut s = Scalable::new();
        s.cwnd = 100.0;
        s.ssthresh = 50.0;
        for _ in 0..100 {
            s.on_ack(1);
        }
        assert!((s.cwnd - 101.0).abs() < 1e-9);
    }

    #[test]
    fn congestion_reduces_by_eighth() {
        let mut s = Scalable::new();
        s.cwnd = 800.0;
        s.on_congestion();
        assert_eq!(s.cwnd, 700.0);
    }
}
