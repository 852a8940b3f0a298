//! TCP NewReno: one packet per RTT in congestion avoidance, halving on
//! congestion.
//!
//! Growth is per ACK arrival, not per acknowledged packet (no byte
//! counting), so delayed ACKs halve the increase rate as they do in Linux.

use super::{CongestionController, BASELINE_MIN_CWND, INITIAL_WINDOW};

#[derive(Debug, Clone, PartialEq)]
pub struct NewReno {
    pub cwnd: f64,
    pub ssthresh: f64,
}

impl NewReno {
    pub fn new() -> Self {
        NewReno {
            cwnd: INITIAL_WINDOW,
            ssthresh: f64::INFINITY,
        }
    }

    pub fn on_ack(&mut self, _acked: u64) {
        if self.cwnd < self.ssthresh {
            self.cwnd += 1.0;
        } else {
            self.cwnd += 1.0 / self.cwnd;
        }
    }

    pub fn on_congestion(&mut self) {
        self.ssthresh = (self.cwnd / 2.0).max(2.0);
        self.cwnd = self.ssthresh;
    }
}

impl Default for NewReno {
    fn default() -> Self {
        Self::new()
    }
}

impl CongestionController for NewReno {
    fn on_ack(&mut self, acked: u64, _now: f64) {
        NewReno::on_ack(self, acked);
    }

    fn on_rtt_sample(&mut self, _rtt: f64, _now: f64) {}

    fn on_congestion_event(&mut self, _now: f64) {
        self.on_congestion();
    }

    fn on_timeout(&mut self, _now: f64) {
        self.ssthresh = (self.cwnd / 2.0).max(2.0);
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
    fn congestion_avoidance_one_packet_per_rtt() {
        let mut r = NewReno::new();
        r.cwnd = 100.0;
        r.ssthresh = 50.0;
        for _ in 0..100 {
            r.on_ack(1);
        }
        assert!((r.cwnd - 101.0).abs() < 0.01);
    }

    #[test]
    fn congestion_halves() {
        let mut r = NewReno::new();
        r.cwnd = 100.0;
        r.on_congestion();
        assert_eq!(r.cwnd, 50.0);
        assert_eq!(r.ssthresh, 50.0);
    }

    #[test]
    fn slow_start_doubles() {
        let mut r = NewReno::new();
        for _ in 0..10 {
            r.on_ack(1);
        }
        assert_eq!(r.cwnd, 20.0);
    }
}
