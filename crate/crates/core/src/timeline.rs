//! Time compression.
//!
//! Event coordinates are remapped onto `{1, ..., T'}` with `T'` as small as
//! possible while every pair of request intervals keeps its intersection
//! status. Feasibility of a packing only depends on which requests overlap,
//! so compressed and original instances have the same solutions.

use thiserror::Error;

use crate::model::{sorted_events, EventKind, Instance, Request};

/// Monotone map from original event coordinates to compressed ones.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimeMap {
    /// `(original, compressed)` pairs sorted by original coordinate.
    pairs: Vec<(u64, u64)>,
    horizon: u64,
}

impl TimeMap {
    pub fn pairs(&self) -> &[(u64, u64)] {
        &self.pairs
    }

    /// Compressed horizon `T'` (0 when there are no events).
    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn map(&self, original: u64) -> Option<u64> {
        self.pairs
            .binary_search_by_key(&original, |&(o, _)| o)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    /// Earliest original coordinate mapped onto `compressed`.
    pub fn earliest_original(&self, compressed: u64) -> Option<u64> {
        self.pairs
            .iter()
            .find(|&&(_, c)| c == compressed)
            .map(|&(o, _)| o)
    }
}

/// Remaps all start and end times onto `{1, ..., T'}` with minimum `T'`
/// preserving pairwise intersections. Runs in O(n log n).
///
/// Events are swept in (coordinate, end-before-start) order with a clock
/// starting at 1. A start takes the current clock value. An end must be
/// strictly later than every start seen so far, so if a start has been
/// placed on the current value the clock advances first. Every advance is
/// forced by a pair of intersecting requests, which makes `T'` minimal.
pub fn compress_time(instance: &Instance) -> (Instance, TimeMap) {
    let requests = instance.requests();
    if requests.is_empty() {
        return (instance.clone(), TimeMap::default());
    }
    let events = sorted_events(requests);

    let mut starts = vec![0u64; requests.len()];
    let mut ends = vec![0u64; requests.len()];
    let mut pairs: Vec<(u64, u64)> = Vec::new();
    let mut clock = 1u64;
    let mut start_at_clock = false;
    for ev in &events {
        match ev.kind {
            EventKind::Start => {
                start_at_clock = true;
                starts[ev.index] = clock;
            }
            EventKind::End => {
                if start_at_clock {
                    clock += 1;
                    start_at_clock = false;
                }
                ends[ev.index] = clock;
            }
        }
        match pairs.last() {
            Some(&(orig, _)) if orig == ev.time => {}
            _ => pairs.push((ev.time, clock)),
        }
    }

    let compressed = requests
        .iter()
        .enumerate()
        .map(|(i, r)| Request {
            id: r.id,
            demand: r.demand.clone(),
            start: starts[i],
            end: ends[i],
        })
        .collect();
    (
        instance.with_requests(compressed),
        TimeMap {
            pairs,
            horizon: clock,
        },
    )
}

pub const DEFAULT_MATRIX_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("intersection matrix refused: {n} requests exceed the cap of {cap}")]
pub struct MatrixTooLarge {
    pub n: usize,
    pub cap: usize,
}

/// Symmetric n x n intersection relation, rows in request order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionMatrix {
    n: usize,
    cells: Vec<bool>,
}

impl IntersectionMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }
}

/// Quadratic test oracle: `m[i][j]` iff requests `i` and `j` share an instant.
pub fn intersection_matrix(
    instance: &Instance,
    cap: usize,
) -> Result<IntersectionMatrix, MatrixTooLarge> {
    let n = instance.len();
    if n > cap {
        return Err(MatrixTooLarge { n, cap });
    }
    let reqs = instance.requests();
    let mut cells = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            cells[i * n + j] = reqs[i].intersects(&reqs[j]);
        }
    }
    Ok(IntersectionMatrix { n, cells })
}
