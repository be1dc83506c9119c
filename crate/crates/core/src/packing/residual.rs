//! Remaining capacity of one bin over time.
//!
//! Backed by one lazy min segment tree per dimension so a fit test and a
//! subtraction over a span both cost O(d log T).

use crate::model::ResourceVector;

#[derive(Debug, Clone)]
struct MinTree {
    size: usize,
    min: Vec<i64>,
    lazy: Vec<i64>,
}

impl MinTree {
    fn new(len: usize, value: i64) -> Self {
        let size = len.max(1).next_power_of_two();
        let mut min = vec![i64::MAX; 2 * size];
        for slot in &mut min[size..size + len] {
            *slot = value;
        }
        for node in (1..size).rev() {
            min[node] = min[2 * node].min(min[2 * node + 1]);
        }
        Self {
            size,
            min,
            lazy: vec![0; 2 * size],
        }
    }

    fn query(&self, node: usize, lo: usize, hi: usize, l: usize, r: usize) -> i64 {
        if r <= lo || hi <= l {
            return i64::MAX;
        }
        if l <= lo && hi <= r {
            return self.min[node];
        }
        let mid = (lo + hi) / 2;
        let child =
            self.query(2 * node, lo, mid, l, r)
                .min(self.query(2 * node + 1, mid, hi, l, r));
        child.saturating_add(self.lazy[node])
    }

    fn add(&mut self, node: usize, lo: usize, hi: usize, l: usize, r: usize, delta: i64) {
        if r <= lo || hi <= l {
            return;
        }
        if l <= lo && hi <= r {
            self.min[node] = self.min[node].saturating_add(delta);
            self.lazy[node] += delta;
            return;
        }
        let mid = (lo + hi) / 2;
        self.add(2 * node, lo, mid, l, r, delta);
        self.add(2 * node + 1, mid, hi, l, r, delta);
        self.min[node] = self.min[2 * node]
            .min(self.min[2 * node + 1])
            .saturating_add(self.lazy[node]);
    }
}

/// Residual capacity `S[t]` for slots `0..len`; every slot starts at `b`.
#[derive(Debug, Clone)]
pub struct ResidualTimeline {
    trees: Vec<MinTree>,
    len: usize,
}

impl ResidualTimeline {
    pub fn new(capacity: &ResourceVector, len: usize) -> Self {
        Self {
            trees: capacity
                .components()
                .iter()
                .map(|&b| MinTree::new(len, b as i64))
                .collect(),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Smallest residual of dimension `dim` over slots `[from, to)`.
    pub fn min_residual(&self, dim: usize, from: usize, to: usize) -> i64 {
        let tree = &self.trees[dim];
        tree.query(1, 0, tree.size, from, to)
    }

    /// `demand <= S[t]` for every slot in `[from, to)`.
    pub fn fits(&self, demand: &ResourceVector, from: usize, to: usize) -> bool {
        demand
            .components()
            .iter()
            .enumerate()
            .all(|(j, &a)| a == 0 || self.min_residual(j, from, to) >= a as i64)
    }

    pub fn consume(&mut self, demand: &ResourceVector, from: usize, to: usize) {
        for (tree, &a) in self.trees.iter_mut().zip(demand.components()) {
            if a > 0 {
                let size = tree.size;
                tree.add(1, 0, size, from, to, -(a as i64));
            }
        }
    }
}
