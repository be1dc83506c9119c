//! Dynamic program over the sequence of active sets.
//!
//! After compression, `S_t` is the set of requests active at instant `t`.
//! A state at `t` is a labelling of `S_t` with bins `0..k` that respects
//! capacity at `t`. State `X` at `t` is good iff some good state `X'` at
//! `t + 1` puts every request of `S_t ∩ S_{t+1}` into the same bin. The
//! instance fits into `k` bins iff the empty state at `t = 0` is good.
//! Labellings are kept as plain k-tuples, no symmetry reduction.

use std::collections::HashMap;

use super::ExactError;
use crate::model::Instance;
use crate::packing::{verify_packing, Packing};
use crate::timeline::compress_time;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpLimits {
    pub max_height: usize,
    pub max_bins: u32,
}

impl Default for DpLimits {
    fn default() -> Self {
        Self {
            max_height: 10,
            max_bins: 4,
        }
    }
}

/// Positions of the requests active at each instant `0..=T'+1`.
fn active_sets(instance: &Instance) -> Vec<Vec<usize>> {
    let horizon = instance.horizon() as usize;
    let mut sets = vec![Vec::new(); horizon + 2];
    for (pos, r) in instance.requests().iter().enumerate() {
        for set in &mut sets[r.start as usize..r.end as usize] {
            set.push(pos);
        }
    }
    sets
}

/// Every capacity-respecting labelling of `active` with `k` bins.
fn feasible_labellings(instance: &Instance, active: &[usize], k: usize) -> Vec<Vec<u8>> {
    fn extend(
        instance: &Instance,
        active: &[usize],
        k: usize,
        loads: &mut [Vec<u64>],
        labels: &mut Vec<u8>,
        out: &mut Vec<Vec<u8>>,
    ) {
        if labels.len() == active.len() {
            out.push(labels.clone());
            return;
        }
        let demand = instance.requests()[active[labels.len()]]
            .demand
            .components();
        let cap = instance.capacity().components();
        for bin in 0..k {
            if loads[bin]
                .iter()
                .zip(demand)
                .zip(cap)
                .any(|((l, a), b)| l + a > *b)
            {
                continue;
            }
            loads[bin].iter_mut().zip(demand).for_each(|(l, a)| *l += a);
            labels.push(bin as u8);
            extend(instance, active, k, loads, labels, out);
            labels.pop();
            loads[bin].iter_mut().zip(demand).for_each(|(l, a)| *l -= a);
        }
    }

    let mut loads = vec![vec![0u64; instance.dimension()]; k];
    let mut out = Vec::new();
    extend(
        instance,
        active,
        k,
        &mut loads,
        &mut Vec::with_capacity(active.len()),
        &mut out,
    );
    out
}

/// Labels of `shared` (positions) read off a labelling of `set`.
fn restrict(set: &[usize], labels: &[u8], shared: &[usize]) -> Vec<u8> {
    shared
        .iter()
        .map(|p| labels[set.binary_search(p).expect("shared member present")])
        .collect()
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter()
        .filter(|p| b.binary_search(p).is_ok())
        .copied()
        .collect()
}

/// Decides whether the instance fits into `k` bins, returning a witness
/// packing when it does. Refuses when the height or `k` exceed `limits`.
pub fn dp_feasible(
    instance: &Instance,
    k: u32,
    limits: DpLimits,
) -> Result<Option<Packing>, ExactError> {
    let (compressed, _) = compress_time(instance);
    let height = crate::model::compute_stats(&compressed).height;
    if height > limits.max_height || k > limits.max_bins {
        return Err(ExactError::GuardRail {
            height,
            bins: k,
            limits,
            estimated_cost: (k as f64).powi(2 * height as i32),
        });
    }
    if compressed.is_empty() {
        return Ok(Some(Packing::empty()));
    }
    if k == 0 {
        return Ok(None);
    }
    let k = k as usize;

    let sets = active_sets(&compressed);
    let last = sets.len() - 1;
    // links[t]: restriction to S_t ∩ S_{t+1} -> a good labelling of S_{t+1}
    let mut links: Vec<HashMap<Vec<u8>, Vec<u8>>> = vec![HashMap::new(); last];
    let mut good_next: Vec<Vec<u8>> = vec![Vec::new()]; // S_{last} is empty
    for t in (0..last).rev() {
        let shared = intersect(&sets[t], &sets[t + 1]);
        let link = &mut links[t];
        for next in good_next {
            link.entry(restrict(&sets[t + 1], &next, &shared))
                .or_insert(next);
        }
        good_next = feasible_labellings(&compressed, &sets[t], k)
            .into_iter()
            .filter(|labels| link.contains_key(&restrict(&sets[t], labels, &shared)))
            .collect();
        if good_next.is_empty() {
            return Ok(None);
        }
    }

    // S_0 is empty, so the only state at t = 0 is the empty labelling
    let mut bins: Vec<Vec<crate::model::RequestId>> = vec![Vec::new(); k];
    let mut labels: Vec<u8> = Vec::new();
    let requests = compressed.requests();
    for t in 0..last {
        let shared = intersect(&sets[t], &sets[t + 1]);
        let next = links[t][&restrict(&sets[t], &labels, &shared)].clone();
        for (i, &pos) in sets[t + 1].iter().enumerate() {
            if requests[pos].start as usize == t + 1 {
                bins[next[i] as usize].push(requests[pos].id);
            }
        }
        labels = next;
    }
    let packing = Packing::from_bins(bins).expect("each request starts once");
    assert!(
        verify_packing(instance, &packing).is_ok_and(|r| r.is_feasible()),
        "dynamic program produced an infeasible packing"
    );
    Ok(Some(packing))
}
