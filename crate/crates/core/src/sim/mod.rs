//! Event-driven simulator of a dumbbell topology: senders behind one
//! bottleneck link with a tail-drop queue, receivers with a symmetric,
//! uncongested ACK path.
//!
//! Every data packet experiences serialization (`packet_bits / bandwidth`)
//! plus queueing plus one-way propagation; ACKs take one propagation delay
//! back and are never lost. Loss detection is SACK-like: a hole is declared
//! lost once three packets above it have been delivered, retransmission is
//! immediate, and all detections within one smoothed RTT of the first are
//! coalesced into a single congestion event. A retransmission timeout fires
//! at `max(200 ms, 2 * sRTT)`.
//!
//! Event ties are broken by insertion order, so a run is a pure function of
//! the scenario (including its seed).

mod queue;
mod range_set;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cc::{build_controller, CongestionController};
use crate::error::SimError;
use crate::scenario::Scenario;
use crate::trace::{
    CcEventRecord, DropRecord, FlowSeries, FlowTotals, FlowTrace, QueueSeries, RunTrace,
};
use queue::BottleneckQueue;
use range_set::RangeSet;

const ACK_FLUSH_DELAY: f64 = 0.040;
const MIN_RTO: f64 = 0.200;
const SRTT_WEIGHT: f64 = 1.0 / 8.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Packet {
    flow: u32,
    seq: u64,
    sent: f64,
    owd: f64,
    retx: bool,
}

#[derive(Debug, Clone)]
struct AckInfo {
    /// Cumulative acknowledgment: everything below is delivered.
    cum: u64,
    /// Highest sequence delivered, if any.
    highest: Option<u64>,
    /// Holes in `[cum, highest]`, ascending.
    missing: Vec<u64>,
    /// Send time of the packet that triggered this ACK (exact RTT source).
    trigger_sent: f64,
}

#[derive(Debug)]
enum Ev {
    FlowStart(usize),
    FlowStop(usize),
    /// Handoff from sender to the bottleneck, after the phase jitter.
    Enqueue(Packet),
    Departure,
    DataArrive(Packet),
    AckArrive(usize, AckInfo),
    Rto(usize, u64),
    AckFlush(usize, u64),
    RttChange(f64),
    CrossSpawn,
    Sample,
}

struct Entry {
    t: f64,
    seq: u64,
    ev: Ev,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.t == other.t && self.seq == other.seq
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.t
            .total_cmp(&other.t)
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

struct SentMeta {
    time: f64,
}

struct FlowRt {
    label: String,
    is_cross: bool,
    start: f64,
    stop: f64,
    owd_override: Option<f64>,
    delayed_ack: bool,
    /// Total data packets for bounded (cross-traffic) flows.
    limit: Option<u64>,
    ctl: Box<dyn CongestionController>,

    started: bool,
    stopped: bool,
    next_seq: u64,
    /// Transmitted, not yet known delivered, not marked lost.
    outstanding: BTreeMap<u64, SentMeta>,
    /// Marked lost, waiting for retransmission.
    resend: BTreeSet<u64>,
    cum_acked: u64,
    srtt: Option<f64>,
    rto_gen: u64,
    coalesce_until: f64,
    /// Losses of packets sent before this sequence number belong to the
    /// previous congestion event (recovery-point semantics).
    recovery_end_seq: u64,
    in_network: u64,
    last_enqueue_t: f64,

    // Receiver side.
    rcv_nxt: u64,
    rcv_ranges: RangeSet,
    pending_ack: u64,
    pending_trigger: Option<Packet>,
    ack_flush_gen: u64,

    totals: FlowTotals,
    drops: Vec<DropRecord>,
    cc_events: Vec<CcEventRecord>,
}

impl FlowRt {
    fn in_flight(&self) -> u64 {
        self.outstanding.len() as u64
    }

    fn can_send_new(&self) -> bool {
        !self.stopped && self.limit.is_none_or(|l| self.next_seq < l)
    }
}

struct Engine<'a> {
    sc: &'a Scenario,
    now: f64,
    heap: std::collections::BinaryHeap<Reverse<Entry>>,
    event_seq: u64,
    queue: BottleneckQueue,
    link_busy: bool,
    serialization: f64,
    owd_current: f64,
    base_rtt: f64,
    p_rand: f64,
    forced_drops: HashSet<(u32, u64)>,
    injector_rng: ChaCha8Rng,
    cross_rng: ChaCha8Rng,
    /// Sender-side processing jitter, up to half a serialization slot. It
    /// decorrelates the flows' arrival phases at the bottleneck, which would
    /// otherwise lock onto one victim flow for every overflow; packets are
    /// timestamped after the jitter, so RTT samples stay exact.
    jitter_rng: ChaCha8Rng,
    flows: Vec<FlowRt>,
    n_scenario_flows: usize,
    // Sampled series.
    n_samples: usize,
    sample_idx: usize,
    flow_series: Vec<FlowSeries>,
    queue_series: QueueSeries,
    cross_delivered: Vec<u64>,
}

/// Simulates one scenario to its horizon and returns the recorded traces.
pub fn run(scenario: &Scenario) -> Result<RunTrace, SimError> {
    scenario.validate()?;
    let mut eng = Engine::new(scenario);
    eng.prime();
    eng.run_loop();
    Ok(eng.finish())
}

impl<'a> Engine<'a> {
    fn new(sc: &'a Scenario) -> Engine<'a> {
        let seed = sc.seed;
        let flows = sc
            .flows
            .iter()
            .map(|spec| {
                let algo = spec.resolve_algorithm().expect("validated scenario");
                FlowRt {
                    label: spec.label(),
                    is_cross: false,
                    start: spec.start_s,
                    stop: spec.stop_s.unwrap_or(sc.horizon_s),
                    owd_override: spec.owd_ms.map(|ms| ms / 1000.0),
                    delayed_ack: spec.delayed_ack,
                    limit: None,
                    ctl: build_controller(&algo),
                    started: false,
                    stopped: false,
                    next_seq: 0,
                    outstanding: BTreeMap::new(),
                    resend: BTreeSet::new(),
                    cum_acked: 0,
                    srtt: None,
                    rto_gen: 0,
                    coalesce_until: 0.0,
                    recovery_end_seq: 0,
                    last_enqueue_t: 0.0,
                    in_network: 0,
                    rcv_nxt: 0,
                    rcv_ranges: RangeSet::default(),
                    pending_ack: 0,
                    pending_trigger: None,
                    ack_flush_gen: 0,
                    totals: FlowTotals::default(),
                    drops: Vec::new(),
                    cc_events: Vec::new(),
                }
            })
            .collect::<Vec<_>>();
        let n_scenario_flows = flows.len();
        let n_samples = (sc.horizon_s / sc.sample_interval_s()).round() as usize;
        let forced_drops = sc
            .loss
            .iter()
            .flat_map(|l| l.drop_seqs.iter())
            .map(|d| (d.flow as u32, d.seq))
            .collect();
        Engine {
            sc,
            now: 0.0,
            heap: std::collections::BinaryHeap::new(),
            event_seq: 0,
            queue: BottleneckQueue::new(sc.queue_capacity_packets()),
            link_busy: false,
            serialization: sc.serialization_s(),
            owd_current: sc.owd_s(),
            base_rtt: sc.base_rtt_s(),
            p_rand: sc.loss.as_ref().map_or(0.0, |l| l.p_rand),
            forced_drops,
            injector_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15),
            cross_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x2545_f491_4f6c_dd1d),
            jitter_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x6a09_e667_f3bc_c908),
            flows,
            n_scenario_flows,
            n_samples,
            sample_idx: 0,
            flow_series: vec![FlowSeries::default(); n_scenario_flows],
            queue_series: QueueSeries::default(),
            cross_delivered: Vec::new(),
        }
    }

    fn schedule(&mut self, t: f64, ev: Ev) {
        self.event_seq += 1;
        self.heap.push(Reverse(Entry {
            t,
            seq: self.event_seq,
            ev,
        }));
    }

    fn prime(&mut self) {
        for fi in 0..self.n_scenario_flows {
            self.schedule(self.flows[fi].start, Ev::FlowStart(fi));
            if self.flows[fi].stop < self.sc.horizon_s {
                self.schedule(self.flows[fi].stop, Ev::FlowStop(fi));
            }
        }
        let changes: Vec<(f64, f64)> = self
            .sc
            .rtt_changes
            .iter()
            .map(|c| (c.at_s, c.owd_ms / 1000.0))
            .collect();
        for (at, owd) in changes {
            self.schedule(at, Ev::RttChange(owd));
        }
        if self.sc.cross_traffic.is_some() {
            let first = self.next_cross_gap();
            self.schedule(first, Ev::CrossSpawn);
        }
        if self.n_samples > 0 {
            self.schedule(self.sc.sample_interval_s(), Ev::Sample);
        }
    }

    fn next_cross_gap(&mut self) -> f64 {
        let [lo, hi] = self.sc.cross_traffic.as_ref().unwrap().iat_s;
        self.now + self.cross_rng.random_range(lo..=hi)
    }

    fn run_loop(&mut self) {
        let horizon = self.sc.horizon_s + 1e-9;
        while let Some(Reverse(entry)) = self.heap.pop() {
            if entry.t > horizon {
                break;
            }
            debug_assert!(entry.t >= self.now);
            self.now = entry.t;
            match entry.ev {
                Ev::FlowStart(fi) => {
                    self.flows[fi].started = true;
                    self.try_send(fi);
                    self.arm_rto(fi);
                }
                Ev::FlowStop(fi) => self.flows[fi].stopped = true,
                Ev::Enqueue(pkt) => self.enqueue_bottleneck(pkt),
                Ev::Departure => self.depart(),
                Ev::DataArrive(pkt) => self.data_arrive(pkt),
                Ev::AckArrive(fi, ack) => self.ack_arrive(fi, ack),
                Ev::Rto(fi, gen) => self.rto_fire(fi, gen),
                Ev::AckFlush(fi, gen) => self.ack_flush(fi, gen),
                Ev::RttChange(owd) => self.owd_current = owd,
                Ev::CrossSpawn => self.cross_spawn(),
                Ev::Sample => self.take_sample(),
            }
        }
    }

    fn flow_owd(&self, fi: usize) -> f64 {
        self.flows[fi].owd_override.unwrap_or(self.owd_current)
    }

    fn srtt_or_base(&self, fi: usize) -> f64 {
        self.flows[fi]
            .srtt
            .unwrap_or(self.base_rtt + self.serialization)
    }

    // ---- sender path ----------------------------------------------------

    /// Transmits while the window has room.
    ///
    /// While a recovery episode is open (losses from the last congestion
    /// event not yet repaired) transmissions are paced to one per ACK: loss
    /// marks free a burst of window slots at once, but the network still
    /// holds the pre-reduction flight, and refilling those slots in one
    /// burst would blast the still-loaded queue.
    fn try_send(&mut self, fi: usize) {
        let budget = {
            let f = &self.flows[fi];
            if f.cum_acked < f.recovery_end_seq {
                1
            } else {
                u64::MAX
            }
        };
        for _ in 0..budget {
            let f = &self.flows[fi];
            if !f.started || f.in_flight() >= f.ctl.cwnd().floor().max(1.0) as u64 {
                return;
            }
            let (seq, retx) = if let Some(&s) = self.flows[fi].resend.iter().next() {
                self.flows[fi].resend.remove(&s);
                (s, true)
            } else if self.flows[fi].can_send_new() {
                let s = self.flows[fi].next_seq;
                self.flows[fi].next_seq += 1;
                (s, false)
            } else {
                return;
            };
            self.transmit(fi, seq, retx);
        }
    }

    fn transmit(&mut self, fi: usize, seq: u64, retx: bool) {
        let owd = self.flow_owd(fi);
        let jitter = self.jitter_rng.random::<f64>() * self.serialization * 2.0;
        let now = self.now;
        let f = &mut self.flows[fi];
        // Monotone per flow: jitter must not reorder a flow's own packets.
        let enqueue_t = (now + jitter).max(f.last_enqueue_t);
        f.last_enqueue_t = enqueue_t;
        f.outstanding.insert(seq, SentMeta { time: enqueue_t });
        f.totals.sent += 1;
        f.in_network += 1;
        if retx {
            f.totals.retransmits += 1;
        }
        let pkt = Packet {
            flow: fi as u32,
            seq,
            sent: enqueue_t,
            owd,
            retx,
        };
        self.schedule(enqueue_t, Ev::Enqueue(pkt));
    }

    fn enqueue_bottleneck(&mut self, pkt: Packet) {
        let forced = !pkt.retx && self.forced_drops.remove(&(pkt.flow, pkt.seq));
        let injected =
            forced || (self.p_rand > 0.0 && self.injector_rng.random::<f64>() < self.p_rand);
        if injected {
            self.flows[pkt.flow as usize].in_network -= 1;
            self.record_drop(pkt.flow as usize, true);
            return;
        }
        match self.queue.push(pkt, self.now) {
            Ok(()) => {
                if !self.link_busy {
                    self.link_busy = true;
                    self.schedule(self.now + self.serialization, Ev::Departure);
                }
            }
            Err(dropped) => {
                self.flows[dropped.flow as usize].in_network -= 1;
                self.record_drop(dropped.flow as usize, false);
            }
        }
    }

    fn record_drop(&mut self, fi: usize, injected: bool) {
        let srtt = self.srtt_or_base(fi);
        let now = self.now;
        let f = &mut self.flows[fi];
        if injected {
            f.totals.dropped_injected += 1;
        } else {
            f.totals.dropped_congestion += 1;
        }
        f.drops.push(DropRecord { time: now, srtt });
    }

    fn depart(&mut self) {
        let pkt = self.queue.pop(self.now).expect("departure from empty queue");
        self.queue.busy_time += self.serialization;
        self.schedule(self.now + pkt.owd, Ev::DataArrive(pkt));
        if self.queue.is_empty() {
            self.link_busy = false;
        } else {
            self.schedule(self.now + self.serialization, Ev::Departure);
        }
    }

    // ---- receiver path --------------------------------------------------

    fn data_arrive(&mut self, pkt: Packet) {
        let fi = pkt.flow as usize;
        self.flows[fi].in_network -= 1;
        let f = &mut self.flows[fi];
        if f.rcv_ranges.contains(pkt.seq) {
            f.totals.delivered_dup += 1;
            self.send_ack(fi, pkt);
            return;
        }
        f.rcv_ranges.insert(pkt.seq);
        f.totals.delivered += 1;
        let in_order = pkt.seq == f.rcv_nxt;
        f.rcv_nxt = f.rcv_ranges.first_missing_from(f.rcv_nxt);
        let no_holes = f.rcv_ranges.max().is_none_or(|m| m < f.rcv_nxt);

        if f.delayed_ack && in_order && no_holes {
            f.pending_ack += 1;
            f.pending_trigger = Some(pkt);
            if f.pending_ack >= 2 {
                self.send_ack(fi, pkt);
            } else {
                let gen = {
                    let f = &mut self.flows[fi];
                    f.ack_flush_gen += 1;
                    f.ack_flush_gen
                };
                self.schedule(self.now + ACK_FLUSH_DELAY, Ev::AckFlush(fi, gen));
            }
        } else {
            self.send_ack(fi, pkt);
        }
    }

    fn ack_flush(&mut self, fi: usize, gen: u64) {
        if self.flows[fi].ack_flush_gen != gen || self.flows[fi].pending_ack == 0 {
            return;
        }
        if let Some(trigger) = self.flows[fi].pending_trigger {
            self.send_ack(fi, trigger);
        }
    }

    fn send_ack(&mut self, fi: usize, trigger: Packet) {
        let owd = self.flow_owd(fi);
        let f = &mut self.flows[fi];
        f.pending_ack = 0;
        f.pending_trigger = None;
        f.ack_flush_gen += 1;
        let ack = AckInfo {
            cum: f.rcv_nxt,
            highest: f.rcv_ranges.max(),
            missing: f.rcv_ranges.holes_from(f.rcv_nxt),
            trigger_sent: trigger.sent,
        };
        self.schedule(self.now + owd, Ev::AckArrive(fi, ack));
    }

    // ---- ACK processing and loss detection -------------------------------

    fn ack_arrive(&mut self, fi: usize, ack: AckInfo) {
        let now = self.now;
        let rtt = now - ack.trigger_sent;
        debug_assert!(rtt >= self.serialization - 1e-12, "causality violation");

        {
            let f = &mut self.flows[fi];
            f.totals.acks_received += 1;
            f.srtt = Some(match f.srtt {
                Some(s) => s + SRTT_WEIGHT * (rtt - s),
                None => rtt,
            });
            f.ctl.on_rtt_sample(rtt, now);
        }

        // Everything at or below `upper` except the listed holes is
        // delivered.
        let upper = ack.highest.unwrap_or(ack.cum.wrapping_sub(1));
        let in_flight_before = self.flows[fi].in_flight();
        let mut newly = 0u64;
        if ack.cum > 0 || ack.highest.is_some() {
            let delivered: Vec<u64> = self.flows[fi]
                .outstanding
                .range(..=upper)
                .map(|(&s, _)| s)
                .filter(|&s| s < ack.cum || ack.missing.binary_search(&s).is_err())
                .collect();
            for s in delivered {
                self.flows[fi].outstanding.remove(&s);
                newly += 1;
            }
            // Packets we had declared lost but that did arrive.
            let spurious: Vec<u64> = self.flows[fi]
                .resend
                .range(..=upper)
                .copied()
                .filter(|&s| s < ack.cum || ack.missing.binary_search(&s).is_err())
                .collect();
            for s in spurious {
                self.flows[fi].resend.remove(&s);
                newly += 1;
            }
        }
        self.flows[fi].cum_acked = self.flows[fi].cum_acked.max(ack.cum);

        // Window validation: the controller only grows while the window is
        // the limiting factor. While the pipe drains after a reduction
        // (in-flight above cwnd) growth would be meaningless and would fire
        // the post-decrease probe early.
        let window_limited = {
            let f = &self.flows[fi];
            let cw = f.ctl.cwnd().floor().max(1.0) as u64;
            in_flight_before + 2 >= cw && f.in_flight() < cw
        };
        if newly > 0 && window_limited {
            self.flows[fi].ctl.on_ack(newly, now);
        }

        // SACK-style loss marking: a hole with three or more deliveries
        // above it is lost. The link is FIFO, so a hole whose last
        // transmission predates the ACK's trigger packet cannot still be in
        // flight; requiring that keeps ACKs of older packets from re-marking
        // a freshly retransmitted hole.
        let mut max_marked: Option<u64> = None;
        for (idx, &hole) in ack.missing.iter().enumerate() {
            let above_missing = (ack.missing.len() - idx - 1) as u64;
            let delivered_above = match ack.highest {
                Some(h) if h > hole => h - hole - above_missing,
                _ => 0,
            };
            if delivered_above < 3 {
                continue;
            }
            let f = &mut self.flows[fi];
            let lost = f
                .outstanding
                .get(&hole)
                .is_some_and(|meta| ack.trigger_sent > meta.time);
            if lost {
                f.outstanding.remove(&hole);
                f.resend.insert(hole);
                max_marked = Some(max_marked.map_or(hole, |m| m.max(hole)));
            }
        }

        // A loss only opens a new congestion event if it hit a packet sent
        // after the previous event began and the coalescing window passed.
        if let Some(mx) = max_marked {
            let f = &self.flows[fi];
            if now >= f.coalesce_until && mx >= f.recovery_end_seq {
                self.congestion_event(fi, false);
            }
        }

        self.try_send(fi);
        self.arm_rto(fi);
        self.check_cross_complete(fi);
    }

    fn congestion_event(&mut self, fi: usize, timeout: bool) {
        let now = self.now;
        let srtt = self.srtt_or_base(fi);
        let f = &mut self.flows[fi];
        let before = f.ctl.cwnd();
        if timeout {
            f.ctl.on_timeout(now);
            f.totals.timeouts += 1;
        } else {
            f.ctl.on_congestion_event(now);
        }
        f.coalesce_until = now + srtt;
        f.recovery_end_seq = f.next_seq;
        f.cc_events.push(CcEventRecord {
            time: now,
            cwnd_before: before,
            cwnd_after: f.ctl.cwnd(),
            beta: if timeout { None } else { f.ctl.last_decrease_beta() },
            timeout,
        });
    }

    fn arm_rto(&mut self, fi: usize) {
        let f = &mut self.flows[fi];
        f.rto_gen += 1;
        if f.outstanding.is_empty() && f.resend.is_empty() {
            return;
        }
        let rto = (2.0 * self.srtt_or_base(fi)).max(MIN_RTO);
        let gen = self.flows[fi].rto_gen;
        self.schedule(self.now + rto, Ev::Rto(fi, gen));
    }

    fn rto_fire(&mut self, fi: usize, gen: u64) {
        {
            let f = &self.flows[fi];
            if f.rto_gen != gen || (f.outstanding.is_empty() && f.resend.is_empty()) {
                return;
            }
        }
        let lost: Vec<u64> = self.flows[fi].outstanding.keys().copied().collect();
        for s in lost {
            self.flows[fi].outstanding.remove(&s);
            self.flows[fi].resend.insert(s);
        }
        self.congestion_event(fi, true);
        self.try_send(fi);
        self.arm_rto(fi);
    }

    // ---- cross traffic ----------------------------------------------------

    fn cross_spawn(&mut self) {
        let spec = self.sc.cross_traffic.as_ref().unwrap();
        let payload_bytes = (self.sc.packet_size - crate::scenario::HEADER_BYTES) as u64;
        let pkts = spec.burst_bytes.div_ceil(payload_bytes);
        let algo = crate::scenario::FlowSpec::greedy(spec.algorithm)
            .resolve_algorithm()
            .unwrap_or(crate::scenario::FlowAlgorithm::Reno);
        let fi = self.flows.len();
        self.flows.push(FlowRt {
            label: format!("cross{}", fi - self.n_scenario_flows),
            is_cross: true,
            start: self.now,
            stop: self.sc.horizon_s,
            owd_override: None,
            delayed_ack: false,
            limit: Some(pkts),
            ctl: build_controller(&algo),
            started: true,
            stopped: false,
            next_seq: 0,
            outstanding: BTreeMap::new(),
            resend: BTreeSet::new(),
            cum_acked: 0,
            srtt: None,
            rto_gen: 0,
            coalesce_until: 0.0,
            recovery_end_seq: 0,
            last_enqueue_t: 0.0,
            in_network: 0,
            rcv_nxt: 0,
            rcv_ranges: RangeSet::default(),
            pending_ack: 0,
            pending_trigger: None,
            ack_flush_gen: 0,
            totals: FlowTotals::default(),
            drops: Vec::new(),
            cc_events: Vec::new(),
        });
        self.try_send(fi);
        self.arm_rto(fi);
        let next = self.next_cross_gap();
        if next < self.sc.horizon_s {
            self.schedule(next, Ev::CrossSpawn);
        }
    }

    fn check_cross_complete(&mut self, fi: usize) {
        let f = &mut self.flows[fi];
        if f.is_cross && f.limit.is_some_and(|l| f.cum_acked >= l) {
            f.stopped = true;
        }
    }

    // ---- sampling ---------------------------------------------------------

    fn take_sample(&mut self) {
        for fi in 0..self.n_scenario_flows {
            let f = &self.flows[fi];
            debug_assert_eq!(
                f.totals.sent,
                f.totals.delivered
                    + f.totals.delivered_dup
                    + f.totals.dropped()
                    + f.in_network,
                "conservation violated for flow {fi}"
            );
            let srtt = self.srtt_or_base(fi);
            let s = &mut self.flow_series[fi];
            s.cwnd.push(f.ctl.cwnd());
            s.delivered.push(f.totals.delivered);
            s.sent.push(f.totals.sent);
            s.dropped.push(f.totals.dropped());
            s.srtt.push(srtt);
            s.rtt_min.push(f.ctl.rtt_min_estimate().unwrap_or(f64::NAN));
        }
        debug_assert_eq!(self.link_busy, !self.queue.is_empty());
        let integral = self.queue.integral_at(self.now);
        self.queue_series.occupancy.push(self.queue.len() as f64);
        self.queue_series
            .min_occupancy
            .push(self.queue.take_min() as f64);
        self.queue_series.busy_time.push(self.queue.busy_time);
        self.queue_series.occupancy_integral.push(integral);
        let cross: u64 = self.flows[self.n_scenario_flows..]
            .iter()
            .map(|f| f.totals.delivered)
            .sum();
        self.cross_delivered.push(cross);

        self.sample_idx += 1;
        if self.sample_idx < self.n_samples {
            let t = (self.sample_idx as f64 + 1.0) * self.sc.sample_interval_s();
            self.schedule(t, Ev::Sample);
        }
    }

    fn finish(mut self) -> RunTrace {
        let mut flows = Vec::with_capacity(self.n_scenario_flows);
        for fi in 0..self.n_scenario_flows {
            let f = &mut self.flows[fi];
            flows.push(FlowTrace {
                label: f.label.clone(),
                start_s: f.start,
                series: std::mem::take(&mut self.flow_series[fi]),
                cc_events: std::mem::take(&mut f.cc_events),
                drops: std::mem::take(&mut f.drops),
                totals: f.totals,
            });
        }
        RunTrace {
            scenario: self.sc.clone(),
            seed: self.sc.seed,
            sample_interval_s: self.sc.sample_interval_s(),
            samples: self.sample_idx,
            flows,
            queue: self.queue_series,
            cross_delivered: self.cross_delivered,
            queue_capacity: self.queue.capacity(),
            bdp_packets: self.sc.bdp_packets(),
        }
    }
}
