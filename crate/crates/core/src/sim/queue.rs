//! Tail-drop bottleneck queue with exact time-weighted occupancy accounting.

use std::collections::VecDeque;

use super::Packet;

/// FIFO queue of at most `capacity` packets; the head packet is the one in
/// service, so the link is busy exactly while the queue is non-empty.
#[derive(Debug)]
pub struct BottleneckQueue {
    capacity: usize,
    q: VecDeque<Packet>,
    last_change: f64,
    occupancy_integral: f64,
    min_since_sample: usize,
    pub busy_time: f64,
    pub drops: u64,
}

impl BottleneckQueue {
    pub fn new(capacity: usize) -> Self {
        BottleneckQueue {
            capacity,
            q: VecDeque::new(),
            last_change: 0.0,
            occupancy_integral: 0.0,
            min_since_sample: 0,
            busy_time: 0.0,
            drops: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.q.len() >= self.capacity
    }

    fn advance(&mut self, now: f64) {
        self.occupancy_integral += self.q.len() as f64 * (now - self.last_change);
        self.last_change = now;
    }

    /// Enqueues unless full; a full queue drops the arrival.
    pub fn push(&mut self, pkt: Packet, now: f64) -> Result<(), Packet> {
        if self.is_full() {
            self.drops += 1;
            return Err(pkt);
        }
        self.advance(now);
        self.q.push_back(pkt);
        Ok(())
    }

    pub fn pop(&mut self, now: f64) -> Option<Packet> {
        self.advance(now);
        let pkt = self.q.pop_front();
        self.min_since_sample = self.min_since_sample.min(self.q.len());
        pkt
    }

    /// Running time-weighted occupancy integral up to `now`, packet-seconds.
    pub fn integral_at(&mut self, now: f64) -> f64 {
        self.advance(now);
        self.occupancy_integral
    }

    /// Minimum occupancy since the previous call; resets the window.
    pub fn take_min(&mut self) -> usize {
        let m = self.min_since_sample;
        self.min_since_sample = self.q.len();
        m
    }
}
