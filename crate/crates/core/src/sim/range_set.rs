//! Coalesced set of received sequence numbers for the receiver side.

/// Sorted, disjoint, half-open `[start, end)` ranges. In-order arrivals
/// extend the first range in O(1); holes keep the set small (one entry per
/// contiguous block).
#[derive(Debug, Clone, Default)]
pub struct RangeSet {
    ranges: Vec<(u64, u64)>,
}

impl RangeSet {
    pub fn contains(&self, seq: u64) -> bool {
        match self.ranges.binary_search_by(|&(s, _)| s.cmp(&seq)) {
            Ok(_) => true,
            Err(0) => false,
            Err(i) => seq < self.ranges[i - 1].1,
        }
    }

    pub fn insert(&mut self, seq: u64) {
        let i = match self.ranges.binary_search_by(|&(s, _)| s.cmp(&seq)) {
            Ok(_) => return, // range starting exactly here
            Err(i) => i,
        };
        if i > 0 && seq < self.ranges[i - 1].1 {
            return; // already covered
        }
        let extends_prev = i > 0 && self.ranges[i - 1].1 == seq;
        let extends_next = i < self.ranges.len() && self.ranges[i].0 == seq + 1;
        match (extends_prev, extends_next) {
            (true, true) => {
                self.ranges[i - 1].1 = self.ranges[i].1;
                self.ranges.remove(i);
            }
            (true, false) => self.ranges[i - 1].1 += 1,
            (false, true) => self.ranges[i].0 = seq,
            (false, false) => self.ranges.insert(i, (seq, seq + 1)),
        }
    }

    /// Highest received sequence number.
    pub fn max(&self) -> Option<u64> {
        self.ranges.last().map(|&(_, e)| e - 1)
    }

    /// First sequence number at or after `from` that is not in the set.
    pub fn first_missing_from(&self, from: u64) -> u64 {
        let mut cur = from;
        for &(s, e) in &self.ranges {
            if cur < s {
                return cur;
            }
            if cur < e {
                cur = e;
            }
        }
        cur
    }

    /// All missing sequence numbers in `[from, max]`, ascending.
    pub fn holes_from(&self, from: u64) -> Vec<u64> {
        let mut holes = Vec::new();
        let Some(max) = self.max() else {
            return holes;
        };
        let mut cur = from;
        for &(s, e) in &self.ranges {
            if e <= cur {
                continue;
            }
            while cur < s && cur <= max {
                holes.push(cur);
                cur += 1;
            }
            cur = cur.max(e);
            if cur > max {
                break;
            }
        }
        holes
    }
}
