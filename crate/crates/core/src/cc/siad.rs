//! SIAD (scalable increase, adaptive decrease) congestion controller.
//!
//! SIAD recomputes both its additive increase step `alpha` and its
//! multiplicative decrease factor `beta` once per congestion epoch instead of
//! fixing them:
//!
//! * **Scalable increase** sizes `alpha` so that the window climbs from the
//!   post-decrease value (`ssthresh`) to a target (`incthresh`) in a
//!   configured number of RTTs (`num_rtt`), which pins the feedback rate
//!   independent of the link bandwidth.
//! * **Adaptive decrease** reduces the window by the estimated queue backlog,
//!   `beta = rtt_min / rtt_curr`, so the bottleneck queue just drains without
//!   leaving the link idle.
//! * **Additional decrease** performs further in-epoch reductions when the
//!   post-decrease RTT probe shows the queue did not drain (competing
//!   traffic, stale estimates), up to `num_rtt - 1` times per epoch.
//! * **Fast increase** switches to exponential growth once the window passes
//!   `incthresh`, to grab newly available capacity quickly. Slow start is the
//!   same machinery with `alpha` capped at `cwnd` instead of `cwnd / 2`.
//! * **Trend** biases the next target by the difference between the last two
//!   window maxima, which restores convergence to equal sharing between flows
//!   with the same configuration.
//!
//! The controller is a pure state machine: time is an input, there are no
//! timers. The post-decrease RTT probe fires on the first ACK after the
//! window reaches `ssthresh + alpha + 1`, and the additional-decrease
//! decision runs after the following increase step.

use serde::{Deserialize, Serialize};

use super::CongestionController;

/// Hard lower bound on the congestion window, in packets.
pub const MIN_CWND: f64 = 2.0;

/// Relative tolerance when comparing a probe RTT sample against `rtt_min` to
/// decide whether the queue drained. Exact equality would be brittle against
/// serialization-delay granularity.
pub const RTT_DRAIN_TOLERANCE: f64 = 0.02;

/// Relative tolerance for the "same sample value in subsequent RTTs" test
/// that refreshes `rtt_min` after route changes. Much tighter than
/// [`RTT_DRAIN_TOLERANCE`]: an empty queue reproduces the sample exactly,
/// while a queue growing by even one packet per RTT shifts it by a full
/// serialization delay.
const SAMPLE_REPEAT_TOLERANCE: f64 = 1e-6;

const EWMA_WEIGHT: f64 = 1.0 / 8.0;

/// Congestion-epoch length knob: either a count of RTTs or an absolute
/// duration in milliseconds that is converted to RTTs per epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Aggressiveness {
    NumRtt(u32),
    NumMs(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiadConfig {
    pub aggressiveness: Aggressiveness,
    /// Initial congestion window in packets.
    pub initial_window: f64,
}

impl Default for SiadConfig {
    fn default() -> Self {
        SiadConfig {
            aggressiveness: Aggressiveness::NumRtt(20),
            initial_window: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    SlowStart,
    LinearIncrement,
    FastIncrease,
}

/// What a controller operation did: the window after the call, the phase
/// after the call, and whether a probe was armed or an additional decrease
/// performed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CcAction {
    pub new_cwnd: f64,
    pub phase_after: Phase,
    pub schedule_rtt_probe: bool,
    pub performed_additional_decrease: bool,
}

/// `alpha = (incthresh - ssthresh) / num_rtt`, clamped to `[1, ssthresh)`.
///
/// The lower clamp keeps a minimum increase of one packet per RTT; the upper
/// clamp is realized as `ssthresh - 1` (one packet of headroom) whenever
/// `ssthresh >= 2`.
pub fn compute_alpha(incthresh: f64, ssthresh: f64, num_rtt: f64) -> f64 {
    let raw = (incthresh - ssthresh) / num_rtt;
    let upper = if ssthresh.is_finite() && ssthresh >= 2.0 {
        ssthresh - 1.0
    } else {
        f64::INFINITY
    };
    raw.min(upper).max(1.0)
}

/// Resolves the epoch length in RTTs. `NumRtt` passes through; `NumMs` is
/// divided by the expected average RTT for the next epoch and rounded,
/// floored at 2 (one additional-decrease slot plus one final increase RTT).
pub fn resolve_num_rtt(config: &SiadConfig, avg_rtt: f64) -> u32 {
    match config.aggressiveness {
        Aggressiveness::NumRtt(n) => n.max(2),
        Aggressiveness::NumMs(ms) => {
            if avg_rtt > 0.0 {
                ((ms / (avg_rtt * 1000.0)).round() as i64).max(2) as u32
            } else {
                2
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiadState {
    pub config: SiadConfig,
    pub phase: Phase,
    /// Congestion window in fractional packets; the sender transmits
    /// `floor(cwnd)` packets.
    pub cwnd: f64,
    /// Window value right after the last reduction (`+inf` until the first).
    pub ssthresh: f64,
    /// Target window for the end of the current congestion epoch.
    pub incthresh: f64,
    /// Additive increase step in packets per RTT.
    pub alpha: f64,
    /// Estimated window at the moment the last congestion happened.
    pub cwnd_max: f64,
    pub prev_cwnd_max: f64,
    pub trend: f64,
    /// Epoch length in RTTs, resolved from the config at each epoch start.
    pub num_rtt_effective: u32,
    /// Additional decreases performed in the current epoch.
    pub cnt_dec: u32,
    pub rtt_min: f64,
    /// The two most recent RTT samples, most recent last.
    pub rtt_last_two: [f64; 2],
    pub epoch_start_time: f64,
    /// Decrease factor applied by the most recent adaptive decrease.
    pub last_beta: Option<f64>,

    // Post-decrease RTT probe: armed at a cwnd level, the minimum RTT
    // observed since the decrease is captured on the first ACK at or above
    // that level and evaluated after the next increase step. Using the
    // window minimum (not a single sample) lets transient queue dips from
    // competing flows' decreases count as "drained".
    probe_level: Option<f64>,
    probe_window_min: f64,
    probe_sample: Option<f64>,
    // Set once an additional decrease pinned alpha to cwnd; no further
    // additional decreases are allowed within the epoch.
    ad_blocked: bool,
    // The alpha growth clamp (cwnd/2 in fast increase, cwnd in slow start)
    // is binding; distinguishes the maximum-increase-rate window-maximum
    // cases exactly, where a numeric comparison drifts by one increment.
    alpha_capped: bool,
    // Last probe sample of the current / previous epoch, for the
    // drained-queue refresh of rtt_min across epochs.
    cur_epoch_probe: Option<f64>,
    prev_epoch_probe: Option<f64>,

    // ACK-clock round bookkeeping (a round ends once a window's worth of
    // packets has been acknowledged).
    round: u64,
    round_start_cwnd: f64,
    acked_in_round: f64,
    cwnd_grew_this_round: bool,
    last_sample: Option<f64>,
    prev_round_end_sample: Option<f64>,
    // Round in which the window crossed incthresh into fast increase, for
    // the "threshold just passed" window-maximum case.
    fi_entry_round: Option<u64>,
    increased_since_decrease: bool,
    avg_rtt_ewma: Option<f64>,
}

impl SiadState {
    /// Fresh connection state: `cwnd = alpha = incthresh = cwnd_max =
    /// initial_window`, slow-start phase, `ssthresh` at the +inf sentinel.
    /// With `alpha` pinned to `cwnd` this doubles the window every RTT.
    pub fn initialize(config: SiadConfig) -> SiadState {
        let iw = config.initial_window;
        let num_rtt = match config.aggressiveness {
            Aggressiveness::NumRtt(n) => n.max(2),
            Aggressiveness::NumMs(_) => 2, // re-resolved before first use
        };
        SiadState {
            config,
            phase: Phase::SlowStart,
            cwnd: iw,
            ssthresh: f64::INFINITY,
            incthresh: iw,
            alpha: iw,
            cwnd_max: iw,
            prev_cwnd_max: iw,
            trend: 0.0,
            num_rtt_effective: num_rtt,
            cnt_dec: 0,
            rtt_min: f64::INFINITY,
            rtt_last_two: [f64::INFINITY, f64::INFINITY],
            epoch_start_time: 0.0,
            last_beta: None,
            probe_level: None,
            probe_window_min: f64::INFINITY,
            probe_sample: None,
            ad_blocked: false,
            alpha_capped: true, // alpha = cwnd: slow start doubles per RTT
            cur_epoch_probe: None,
            prev_epoch_probe: None,
            round: 0,
            round_start_cwnd: iw,
            acked_in_round: 0.0,
            cwnd_grew_this_round: false,
            last_sample: None,
            prev_round_end_sample: None,
            fi_entry_round: None,
            increased_since_decrease: false,
            avg_rtt_ewma: None,
        }
    }

    fn action(&self, probe: bool, ad: bool) -> CcAction {
        CcAction {
            new_cwnd: self.cwnd,
            phase_after: self.phase,
            schedule_rtt_probe: probe,
            performed_additional_decrease: ad,
        }
    }

    /// Minimum of the last two RTT samples; filters single outliers.
    pub fn rtt_curr(&self) -> Option<f64> {
        let m = self.rtt_last_two[0].min(self.rtt_last_two[1]);
        m.is_finite().then_some(m)
    }

    /// Feeds one RTT measurement. Maintains the last-two window, the running
    /// minimum and the EWMA used to resolve `num_ms` configurations.
    pub fn on_rtt_sample(&mut self, rtt: f64, _now: f64) {
        self.rtt_last_two = [self.rtt_last_two[1], rtt];
        if rtt < self.rtt_min {
            self.rtt_min = rtt;
        }
        self.probe_window_min = self.probe_window_min.min(rtt);
        self.last_sample = Some(rtt);
    }

    /// Replace `rtt_min` (upward moves allowed) once the queue is known to be
    /// empty, keeping it no larger than the recent samples.
    fn refresh_rtt_min(&mut self, value: f64) {
        self.rtt_min = value
            .min(self.rtt_last_two[0])
            .min(self.rtt_last_two[1]);
    }

    /// Processes `acked` newly acknowledged packets. Grows the window by
    /// `acked * alpha / cwnd`; in fast increase `alpha` itself grows the same
    /// way (capped at `cwnd / 2`), in slow start it is capped at `cwnd`.
    /// Crossing `incthresh` from linear increment resets `alpha` to 1 and
    /// enters fast increase.
    pub fn on_ack(&mut self, acked: u64, now: f64) -> CcAction {
        let acked_f = acked as f64;
        let inc = acked_f * self.alpha / self.cwnd;

        match self.phase {
            Phase::LinearIncrement => {
                self.cwnd += inc;
                if self.ad_blocked {
                    // An additional decrease pinned alpha to its maximum
                    // (alpha = cwnd): let it track the window so the ramp
                    // back from a deep cut is exponential, slow-start-like.
                    self.alpha = self.cwnd;
                }
                if self.cwnd >= self.incthresh {
                    self.phase = Phase::FastIncrease;
                    self.alpha = 1.0;
                    self.alpha_capped = self.alpha >= self.cwnd / 2.0;
                    self.fi_entry_round = Some(self.round);
                }
            }
            Phase::FastIncrease => {
                let cap = self.cwnd / 2.0;
                self.cwnd += inc;
                if self.alpha + inc >= cap {
                    self.alpha = cap;
                    self.alpha_capped = true;
                } else {
                    self.alpha += inc;
                }
            }
            Phase::SlowStart => {
                self.cwnd += inc;
                if self.alpha + inc >= self.cwnd {
                    self.alpha = self.cwnd;
                    self.alpha_capped = true;
                } else {
                    self.alpha += inc;
                }
                if self.cwnd >= self.ssthresh {
                    // Leaving slow start without a congestion event: enter
                    // linear increment if a valid target exists, otherwise
                    // fast increase directly.
                    if self.incthresh > self.ssthresh {
                        self.phase = Phase::LinearIncrement;
                        self.alpha = compute_alpha(
                            self.incthresh,
                            self.ssthresh,
                            self.num_rtt_effective as f64,
                        );
                        self.alpha_capped = false;
                    } else {
                        self.phase = Phase::FastIncrease;
                        self.alpha = 1.0;
                        self.alpha_capped = self.alpha >= self.cwnd / 2.0;
                        self.fi_entry_round = Some(self.round);
                    }
                }
            }
        }
        self.increased_since_decrease = true;
        self.cwnd_grew_this_round = true;

        // Pending probe decision runs after this increase step.
        let mut did_ad = false;
        if let Some(sample) = self.probe_sample.take() {
            let act = self.on_rtt_probe_result(sample);
            did_ad = act.performed_additional_decrease;
        }

        // Capture the probe measurement on the first ACK at or above the
        // armed level; it is evaluated on the next ACK.
        if let Some(level) = self.probe_level {
            if self.cwnd >= level && self.probe_window_min.is_finite() {
                self.probe_sample = Some(self.probe_window_min);
                self.probe_level = None;
            }
        }

        self.acked_in_round += acked_f;
        if self.acked_in_round >= self.round_start_cwnd.floor().max(1.0) {
            self.end_round(now);
        }

        self.action(false, did_ad)
    }

    fn end_round(&mut self, _now: f64) {
        // One EWMA step per ACK-clock round, so the smoother operates on the
        // epoch timescale that num_ms resolution expects.
        if let Some(sample) = self.last_sample {
            self.avg_rtt_ewma = Some(match self.avg_rtt_ewma {
                Some(avg) => avg + EWMA_WEIGHT * (sample - avg),
                None => sample,
            });
        }
        // An unchanged RTT sample across a full round in which the window
        // grew means the queue is empty: the base RTT can be refreshed, also
        // upward after a route change.
        if let (Some(prev), Some(cur), true) = (
            self.prev_round_end_sample,
            self.last_sample,
            self.cwnd_grew_this_round,
        ) {
            if (cur - prev).abs() <= SAMPLE_REPEAT_TOLERANCE * prev.max(cur) {
                self.refresh_rtt_min(cur);
            }
        }
        self.prev_round_end_sample = self.last_sample;
        self.round += 1;
        self.acked_in_round = 0.0;
        self.round_start_cwnd = self.cwnd;
        self.cwnd_grew_this_round = false;
    }

    /// Window value at the moment congestion happened, one RTT before the
    /// notification: the current window minus the growth of the last RTT.
    pub fn estimate_cwnd_max(&self) -> f64 {
        if !self.increased_since_decrease {
            // No increase since the last reduction: nothing to undo.
            return self.cwnd;
        }
        let num_rtt = self.num_rtt_effective as f64;
        match self.phase {
            // With alpha pinned to the window after an additional decrease
            // the last RTT doubled the window, as in slow start at its cap.
            Phase::LinearIncrement if self.ad_blocked => self.cwnd - self.cwnd / 2.0,
            Phase::LinearIncrement => self.cwnd - self.alpha,
            Phase::FastIncrease => {
                let crossed_recently = self
                    .fi_entry_round
                    .is_some_and(|r| self.round <= r + 1);
                if crossed_recently && self.ssthresh.is_finite() {
                    // The increases of the last RTT still used the linear
                    // step, even though alpha was already reset to 1.
                    self.cwnd - (self.incthresh - self.ssthresh) / num_rtt
                } else if self.alpha_capped || self.alpha >= self.cwnd / 2.0 * (1.0 - 1e-9) {
                    self.cwnd - self.cwnd / 3.0
                } else {
                    self.cwnd - self.alpha / 2.0
                }
            }
            Phase::SlowStart => {
                if self.alpha_capped || self.alpha >= self.cwnd * (1.0 - 1e-9) {
                    self.cwnd - self.cwnd / 2.0
                } else {
                    self.cwnd - self.alpha / 2.0
                }
            }
        }
    }

    /// Adaptive decrease on a (coalesced) congestion notification.
    ///
    /// `cwnd = beta * cwnd_max - 1` with `beta = rtt_min / rtt_curr`, which
    /// subtracts the estimated queue backlog plus one packet so the queue
    /// drains completely. Recomputes the trend, target and increase step for
    /// the new epoch and arms the post-decrease RTT probe.
    pub fn on_congestion_event(&mut self, now: f64) -> CcAction {
        let avg = self
            .avg_rtt_ewma
            .or_else(|| self.rtt_curr())
            .unwrap_or(0.1);
        self.num_rtt_effective = resolve_num_rtt(&self.config, avg);

        let beta = match self.rtt_curr() {
            Some(rtt_curr) if self.rtt_min.is_finite() => {
                (self.rtt_min / rtt_curr).min(1.0)
            }
            _ => 1.0,
        };
        let cm = self.estimate_cwnd_max();

        self.cwnd = (beta * cm - 1.0).max(MIN_CWND);
        self.ssthresh = self.cwnd;
        self.trend = cm - self.prev_cwnd_max;
        self.incthresh = (cm + self.trend).max(self.ssthresh);
        self.prev_cwnd_max = cm;
        self.cwnd_max = cm;
        self.alpha = compute_alpha(
            self.incthresh,
            self.ssthresh,
            self.num_rtt_effective as f64,
        );
        self.cnt_dec = 0;
        self.ad_blocked = false;
        self.alpha_capped = false;
        self.phase = Phase::LinearIncrement;
        self.fi_entry_round = None;
        self.epoch_start_time = now;
        self.increased_since_decrease = false;
        self.last_beta = Some(beta);

        self.probe_level = Some(self.ssthresh + self.alpha + 1.0);
        self.probe_window_min = f64::INFINITY;
        self.probe_sample = None;
        self.prev_epoch_probe = self.cur_epoch_probe.take();

        self.round_start_cwnd = self.cwnd;
        self.acked_in_round = 0.0;
        self.cwnd_grew_this_round = false;

        self.action(true, false)
    }

    /// Evaluates the post-decrease RTT probe. A sample at (or within
    /// [`RTT_DRAIN_TOLERANCE`] of) `rtt_min` means the queue drained; a
    /// sample repeating the previous epoch's probe value means the queue is
    /// empty at a new, larger base RTT. Anything else triggers an additional
    /// decrease, unless the per-epoch budget is spent or the window is
    /// already at its minimum.
    pub fn on_rtt_probe_result(&mut self, measured: f64) -> CcAction {
        let repeat_of_prev_epoch = self.prev_epoch_probe.is_some_and(|prev| {
            (measured - prev).abs() <= RTT_DRAIN_TOLERANCE * prev
        });
        self.cur_epoch_probe = Some(measured);

        if measured <= self.rtt_min * (1.0 + RTT_DRAIN_TOLERANCE) {
            self.rtt_min = self.rtt_min.min(measured);
            return self.action(false, false);
        }
        if repeat_of_prev_epoch {
            self.refresh_rtt_min(measured);
            return self.action(false, false);
        }
        if self.ad_blocked
            || self.cnt_dec >= self.num_rtt_effective.saturating_sub(1)
            || self.cwnd <= MIN_CWND
            || !self.ssthresh.is_finite()
        {
            return self.action(false, false);
        }
        self.additional_decrease()
    }

    /// One additional decrease. Callers must ensure `cnt_dec < num_rtt - 1`
    /// and `cwnd > MIN_CWND`.
    ///
    /// Step 1 repeats the adaptive decrease against `ssthresh` (the window
    /// of one RTT ago). Step 2 subtracts `max(red, alpha_new)` where
    /// `red = cwnd / (num_rtt - cnt_dec)` would walk the window down to the
    /// minimum over the epoch's remaining RTTs, and
    /// `alpha_new = (incthresh - cwnd) / (num_rtt - cnt_dec - 1)` is the
    /// increase step needed afterwards — the next RTT must keep the queue
    /// empty for the minimum-RTT measurement.
    pub fn additional_decrease(&mut self) -> CcAction {
        debug_assert!(self.cnt_dec < self.num_rtt_effective.saturating_sub(1));
        debug_assert!(self.cwnd > MIN_CWND);
        debug_assert!(self.ssthresh.is_finite());

        self.cnt_dec += 1;
        let remaining = (self.num_rtt_effective - self.cnt_dec) as f64;

        let ratio = match self.rtt_curr() {
            Some(rtt_curr) if self.rtt_min.is_finite() => {
                (self.rtt_min / rtt_curr).min(1.0)
            }
            _ => 1.0,
        };
        self.cwnd = (ratio * self.ssthresh - 1.0).max(MIN_CWND);

        let red = self.cwnd / remaining;
        let alpha_new = if remaining > 1.0 {
            (self.incthresh - self.cwnd) / (remaining - 1.0)
        } else {
            f64::INFINITY
        };
        self.cwnd = (self.cwnd - red.max(alpha_new)).max(MIN_CWND);

        self.alpha = if red > alpha_new {
            (self.incthresh - self.cwnd) / remaining
        } else {
            alpha_new
        };
        if self.alpha > self.cwnd {
            self.alpha = self.cwnd;
            self.ad_blocked = true;
        }
        self.alpha = self.alpha.max(1.0);

        self.ssthresh = self.cwnd - 1.0;
        // A reduction puts the controller back below the target: linear
        // increment until incthresh is crossed again.
        self.phase = Phase::LinearIncrement;
        self.fi_entry_round = None;
        self.alpha_capped = false;
        self.increased_since_decrease = false;
        self.probe_level = Some(self.ssthresh + self.alpha + 1.0);
        self.probe_window_min = f64::INFINITY;
        self.probe_sample = None;

        self.action(true, true)
    }

    /// Retransmission timeout: collapse to the minimum window and re-enter
    /// slow start with the target invalidated.
    pub fn on_timeout(&mut self, now: f64) -> CcAction {
        self.ssthresh = (self.cwnd / 2.0).max(MIN_CWND);
        self.cwnd = MIN_CWND;
        self.incthresh = self.ssthresh;
        self.phase = Phase::SlowStart;
        self.alpha = self.cwnd;
        self.cnt_dec = 0;
        self.ad_blocked = false;
        self.alpha_capped = true;
        self.fi_entry_round = None;
        self.probe_level = None;
        self.probe_window_min = f64::INFINITY;
        self.probe_sample = None;
        self.increased_since_decrease = false;
        self.epoch_start_time = now;
        self.round_start_cwnd = self.cwnd;
        self.acked_in_round = 0.0;
        self.cwnd_grew_this_round = false;
        self.action(false, false)
    }
}

impl CongestionController for SiadState {
    fn on_ack(&mut self, acked: u64, now: f64) {
        SiadState::on_ack(self, acked, now);
    }

    fn on_rtt_sample(&mut self, rtt: f64, now: f64) {
        SiadState::on_rtt_sample(self, rtt, now);
    }

    fn on_congestion_event(&mut self, now: f64) {
        SiadState::on_congestion_event(self, now);
    }

    fn on_timeout(&mut self, now: f64) {
        SiadState::on_timeout(self, now);
    }

    fn cwnd(&self) -> f64 {
        self.cwnd
    }

    fn last_decrease_beta(&self) -> Option<f64> {
        self.last_beta
    }

    fn rtt_min_estimate(&self) -> Option<f64> {
        self.rtt_min.is_finite().then_some(self.rtt_min)
    }
}
