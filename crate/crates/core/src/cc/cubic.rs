//! TCP Cubic: window grows along a cubic curve anchored at the previous
//! maximum, with the standard TCP-friendly (Reno) region included.

use super::{CongestionController, BASELINE_MIN_CWND, INITIAL_WINDOW};

const C: f64 = 0.4;
/// Decrease fraction; the window is reduced to `0.7 * cwnd` on congestion.
pub const BETA_CUBIC: f64 = 0.3;

/// Time for the cubic curve to return to `w_max` after a reduction.
pub fn cubic_k(w_max: f64) -> f64 {
    (w_max * BETA_CUBIC / C).cbrt()
}

/// `W(t) = C * (t - K)^3 + w_max`, floored by the Reno-friendly window
/// `w_max * (1 - beta) + 3 * beta / (2 - beta) * t / rtt`.
pub fn cubic_window(t: f64, w_max: f64, rtt: f64) -> f64 {
    let k = cubic_k(w_max);
    let w_cubic = C * (t - k).powi(3) + w_max;
    let w_friendly =
        w_max * (1.0 - BETA_CUBIC) + 3.0 * BETA_CUBIC / (2.0 - BETA_CUBIC) * (t / rtt);
    w_cubic.max(w_friendly)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cubic {
    pub cwnd: f64,
    pub ssthresh: f64,
    pub w_max: f64,
    epoch_start: Option<f64>,
    srtt: f64,
}

impl Cubic {
    pub fn new() -> Self {
        Cubic {
            cwnd: INITIAL_WINDOW,
            ssthresh: f64::INFINITY,
            w_max: 0.0,
            epoch_start: None,
            srtt: 0.1,
        }
    }

    pub fn on_congestion(&mut self, now: f64) {
        self.w_max = self.cwnd;
        self.ssthresh = (0.7 * self.cwnd).max(2.0);
        self.cwnd = self.ssthresh;
        self.epoch_start = Some(now);
    }
}

impl Default for Cubic {
    fn default() -> Self {
        Self::new()
    }
}

impl CongestionController for Cubic {
    fn on_ack(&mut self, _acked: u64, now: f64) {
        if self.cwnd < self.ssthresh {
            self.cwnd += 1.0;
            return;
        }
        let start = *self.epoch_start.get_or_insert_with(|| {
            // Entered congestion avoidance without a prior event.
            self.w_max = self.cwnd;
            now
        });
        let t = now - start;
        let target = cubic_window(t + self.srtt, self.w_max, self.srtt)
            .clamp(self.cwnd, 1.5 * self.cwnd);
        self.cwnd += (target - self.cwnd) / self.cwnd;
    }

    fn on_rtt_sample(&mut self, rtt: f64, _now: f64) {
        self.srtt += (rtt - self.srtt) / 8.0;
    }

    fn on_congestion_event(&mut self, now: f64) {
        self.on_congestion(now);
    }

    fn on_timeout(&mut self, _now: f64) {
        self.ssthresh = (0.7 * self.cwnd).max(2.0);
        self.cwnd = BASELINE_MIN_CWND;
        self.w_max = self.cwnd;
        self.epoch_start = None;
    }

    fn cwnd(&self) -> f64 {
        self.cwnd
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_identity_at_k() {
        // At t = K the cubic term vanishes and W = w_max.
        let w_max = 100.0;
        let k = cubic_k(w_max);
        let w = C * (k - k).powi(3) + w_max;
        assert_eq!(w, w_max);
        assert!(cubic_window(k, w_max, 0.1) >= w_max);
        assert!((cubic_window(k, w_max, 0.1) - w_max) < 1.0);
    }

    #[test]
    fn k_is_cube_root_of_scaled_w_max() {
        // Independent cube-root evaluation of K for w_max = 100.
        let expected = (100.0_f64 * 0.3 / 0.4).powf(1.0 / 3.0);
        assert!((expected - 4.217).abs() < 1e-3);
        assert!((cubic_k(100.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn congestion_reduces_to_seventy_percent() {
        let mut c = Cubic::new();
        c.cwnd = 100.0;
        c.on_congestion(1.0);
        assert_eq!(c.cwnd, 70.0);
        assert_eq!(c.w_max, 100.0);
    }

    #[test]
    fn window_recovers_to_w_max_after_k_seconds() {
        let w_max = 100.0;
        let k = cubic_k(w_max);
        assert!(cubic_window(k - 0.5, w_max, 0.1) < w_max);
        assert!(cubic_window(k + 0.5, w_max, 0.1) > w_max);
    }
}
