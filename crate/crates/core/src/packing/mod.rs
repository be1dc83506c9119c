//! Packings, feasibility checks and greedy packing.

mod greedy;
pub mod priority;
mod residual;

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{sorted_events, EventKind, Instance, RequestId};

pub use greedy::{greedy_pack_bin, heuristic_solve, priority_order, GreedyPacker};
pub use priority::{default_priority_rule, priority_rule, priority_rules, Priority, PriorityRule};
pub use residual::ResidualTimeline;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackingError {
    #[error("request {0} is assigned more than once")]
    DuplicateAssignment(RequestId),
    #[error("request {0} is assigned to bin 0; bins are numbered from 1")]
    ZeroBin(RequestId),
    #[error("bin indices must be contiguous from 1, but bin {0} is empty")]
    GapInBins(u32),
    #[error("packing refers to request {0}, which is not in the instance")]
    UnknownId(RequestId),
}

/// Assignment of request ids to bins `1..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Packing {
    assignment: BTreeMap<RequestId, u32>,
    bins: u32,
}

impl Packing {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Numbers the non-empty groups `1, 2, ...` in the given order.
    pub fn from_bins<I, B>(bins: I) -> Result<Self, PackingError>
    where
        I: IntoIterator<Item = B>,
        B: IntoIterator<Item = RequestId>,
    {
        let mut assignment = BTreeMap::new();
        let mut count = 0;
        for bin in bins {
            let mut members = bin.into_iter().peekable();
            if members.peek().is_none() {
                continue;
            }
            count += 1;
            for id in members {
                if assignment.insert(id, count).is_some() {
                    return Err(PackingError::DuplicateAssignment(id));
                }
            }
        }
        Ok(Self {
            assignment,
            bins: count,
        })
    }

    /// Takes explicit `(id, bin)` pairs; bins must be exactly `1..=k`.
    pub fn from_assignment(
        pairs: impl IntoIterator<Item = (RequestId, u32)>,
    ) -> Result<Self, PackingError> {
        let mut assignment = BTreeMap::new();
        for (id, bin) in pairs {
            if bin == 0 {
                return Err(PackingError::ZeroBin(id));
            }
            if assignment.insert(id, bin).is_some() {
                return Err(PackingError::DuplicateAssignment(id));
            }
        }
        let mut used: Vec<u32> = assignment.values().copied().collect();
        used.sort_unstable();
        used.dedup();
        if let Some(gap) = used.iter().enumerate().find(|&(i, &b)| b != i as u32 + 1) {
            return Err(PackingError::GapInBins(gap.0 as u32 + 1));
        }
        Ok(Self {
            bins: used.len() as u32,
            assignment,
        })
    }

    pub fn bin_count(&self) -> u32 {
        self.bins
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn bin_of(&self, id: RequestId) -> Option<u32> {
        self.assignment.get(&id).copied()
    }

    /// `(id, bin)` pairs in ascending id order.
    pub fn assignments(&self) -> impl Iterator<Item = (RequestId, u32)> + '_ {
        self.assignment.iter().map(|(&id, &bin)| (id, bin))
    }

    /// Members of each bin; index 0 holds bin 1.
    pub fn bins(&self) -> Vec<Vec<RequestId>> {
        let mut bins = vec![Vec::new(); self.bins as usize];
        for (&id, &bin) in &self.assignment {
            bins[bin as usize - 1].push(id);
        }
        bins
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub bin: u32,
    /// Instant at which the overloaded load step begins.
    pub time: u64,
    /// 1-based dimension.
    pub dimension: usize,
    pub load: u64,
    pub capacity: u64,
}

impl Violation {
    pub fn overload(&self) -> u64 {
        self.load - self.capacity
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    /// Requests of the instance that the packing leaves out.
    pub unassigned: Vec<RequestId>,
}

impl FeasibilityReport {
    /// No capacity violations (the packing may still be partial).
    pub fn respects_capacity(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.unassigned.is_empty()
    }

    pub fn is_feasible(&self) -> bool {
        self.respects_capacity() && self.is_complete()
    }
}

/// Sweeps each bin's requests over time and records every stretch where a
/// dimension's load exceeds capacity.
pub fn verify_packing(
    instance: &Instance,
    packing: &Packing,
) -> Result<FeasibilityReport, PackingError> {
    let index = instance.id_index();
    let requests = instance.requests();
    let mut per_bin: Vec<Vec<crate::model::Request>> =
        vec![Vec::new(); packing.bin_count() as usize];
    for (id, bin) in packing.assignments() {
        let &pos = index.get(&id).ok_or(PackingError::UnknownId(id))?;
        per_bin[bin as usize - 1].push(requests[pos].clone());
    }
    let unassigned = requests
        .iter()
        .filter(|r| packing.bin_of(r.id).is_none())
        .map(|r| r.id)
        .collect();

    let capacity = instance.capacity().components();
    let mut violations = Vec::new();
    for (b, members) in per_bin.iter().enumerate() {
        let events = sorted_events(members);
        let mut load = vec![0u64; capacity.len()];
        let mut i = 0;
        while i < events.len() {
            let time = events[i].time;
            while i < events.len() && events[i].time == time {
                let demand = members[events[i].index].demand.components();
                for (l, &a) in load.iter_mut().zip(demand) {
                    match events[i].kind {
                        EventKind::Start => *l += a,
                        EventKind::End => *l -= a,
                    }
                }
                i += 1;
            }
            for (j, (&l, &cap)) in load.iter().zip(capacity).enumerate() {
                if l > cap {
                    violations.push(Violation {
                        bin: b as u32 + 1,
                        time,
                        dimension: j + 1,
                        load: l,
                        capacity: cap,
                    });
                }
            }
        }
    }
    Ok(FeasibilityReport {
        violations,
        unassigned,
    })
}

/// Load of each bin at instant `t`, used by tests and diagnostics.
pub fn bin_loads_at(instance: &Instance, packing: &Packing, t: u64) -> HashMap<u32, Vec<u64>> {
    let mut loads: HashMap<u32, Vec<u64>> = HashMap::new();
    for r in instance.requests().iter().filter(|r| r.is_active_at(t)) {
        if let Some(bin) = packing.bin_of(r.id) {
            let entry = loads
                .entry(bin)
                .or_insert_with(|| vec![0; instance.dimension()]);
            for (l, &a) in entry.iter_mut().zip(r.demand.components()) {
                *l += a;
            }
        }
    }
    loads
}
