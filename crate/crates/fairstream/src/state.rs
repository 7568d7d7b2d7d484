//! Allocation state with per-agent views of every bundle.

use crate::model::{is_high, value, AgentProfile, GoodEvent};

/// One agent's view of one bundle: total value, the two largest values, size.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BundleView {
    pub total: f64,
    pub top: [f64; 2],
    pub len: usize,
}

impl BundleView {
    fn add(&mut self, v: f64) {
        self.total += v;
        self.len += 1;
        if v > self.top[0] {
            self.top[1] = self.top[0];
            self.top[0] = v;
        } else if v > self.top[1] {
            self.top[1] = v;
        }
    }

    /// Value after removing the `k` most valuable goods (k <= 2).
    pub fn without_top(&self, k: usize) -> f64 {
        if self.len <= k {
            return 0.0;
        }
        match k {
            0 => self.total,
            1 => self.total - self.top[0],
            _ => self.total - self.top[0] - self.top[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationState {
    n: usize,
    /// Goods allocated so far.
    pub t: usize,
    /// 1-based good indices per agent.
    pub bundles: Vec<Vec<usize>>,
    pub goods_received: Vec<usize>,
    /// Received goods the recipient values at alpha.
    pub high_received: Vec<usize>,
    /// Arrived goods each agent values at alpha.
    pub high_seen: Vec<usize>,
    views: Vec<Vec<BundleView>>,
}

impl AllocationState {
    pub fn new(n: usize) -> Self {
        AllocationState {
            n,
            t: 0,
            bundles: vec![Vec::new(); n],
            goods_received: vec![0; n],
            high_received: vec![0; n],
            high_seen: vec![0; n],
            views: vec![vec![BundleView::default(); n]; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Gives `good` to `recipient` and advances time by one.
    pub fn allocate(&mut self, agents: &[AgentProfile], good: &GoodEvent, recipient: usize) {
        assert!(recipient < self.n, "recipient {recipient} out of range");
        assert_eq!(good.index, self.t + 1, "goods must arrive in order");
        self.t += 1;
        self.bundles[recipient].push(good.index);
        self.goods_received[recipient] += 1;
        for (i, p) in agents.iter().enumerate() {
            let high = is_high(p, good, i);
            if high {
                self.high_seen[i] += 1;
                if i == recipient {
                    self.high_received[i] += 1;
                }
            }
            self.views[i][recipient].add(value(p, good, i));
        }
    }

    /// Agent `i`'s view of bundle `j`.
    pub fn view(&self, i: usize, j: usize) -> &BundleView {
        &self.views[i][j]
    }

    /// v_i(A_j).
    pub fn value_of(&self, i: usize, j: usize) -> f64 {
        self.views[i][j].total
    }

    /// v_i of everything allocated so far.
    pub fn value_of_all(&self, i: usize) -> f64 {
        self.views[i].iter().map(|v| v.total).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn views_track_top_two() {
        let agents = vec![AgentProfile::new(5.0, 1.0).unwrap(); 2];
        let mut s = AllocationState::new(2);
        let goods = [
            GoodEvent::mask(1, vec![false, true]),
            GoodEvent::mask(2, vec![true, true]),
            GoodEvent::mask(3, vec![false, false]),
            GoodEvent::mask(4, vec![true, false]),
        ];
        for g in &goods {
            s.allocate(&agents, g, 1);
        }
        let v = s.view(0, 1);
        assert_eq!(v.total, 12.0);
        assert_eq!(v.without_top(1), 7.0);
        assert_eq!(v.without_top(2), 2.0);
        assert_eq!(s.high_seen, vec![2, 2]);
        assert_eq!(s.high_received, vec![0, 2]);
        assert_eq!(s.value_of_all(1), 12.0);
        assert_eq!(s.view(0, 0).without_top(1), 0.0);
    }
}
