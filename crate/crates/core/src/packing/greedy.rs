//! Greedy packing of a single bin, and the multi-bin baseline built on it.

use std::cmp::Reverse;
use std::collections::HashSet;

use super::priority::PriorityRule;
use super::residual::ResidualTimeline;
use super::{Packing, PackingError};
use crate::model::{Instance, RequestId};

/// Precomputed slot ranges for packing requests of one instance into bins.
///
/// The residual timeline has one slot per distinct event coordinate, which
/// for a time-compressed instance is exactly `{1, ..., T}`.
#[derive(Debug)]
pub struct GreedyPacker<'a> {
    instance: &'a Instance,
    slots: Vec<(usize, usize)>,
    len: usize,
}

impl<'a> GreedyPacker<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let requests = instance.requests();
        let mut coords: Vec<u64> = requests.iter().flat_map(|r| [r.start, r.end]).collect();
        coords.sort_unstable();
        coords.dedup();
        let slot = |t: u64| coords.binary_search(&t).expect("coordinate present");
        let slots = requests
            .iter()
            .map(|r| (slot(r.start), slot(r.end)))
            .collect();
        Self {
            instance,
            slots,
            len: coords.len(),
        }
    }

    /// Walks `order` (positions into the instance) and packs each request
    /// that still fits everywhere on its span. Returns packed positions in
    /// packing order.
    pub fn pack(&self, order: &[usize]) -> Vec<usize> {
        let mut residual = ResidualTimeline::new(self.instance.capacity(), self.len);
        let requests = self.instance.requests();
        let mut packed = Vec::new();
        for &pos in order {
            let (from, to) = self.slots[pos];
            let demand = &requests[pos].demand;
            if residual.fits(demand, from, to) {
                residual.consume(demand, from, to);
                packed.push(pos);
            }
        }
        packed
    }
}

/// Positions sorted by non-increasing priority, ties by ascending id.
pub fn priority_order(
    instance: &Instance,
    positions: &[usize],
    rule: &dyn PriorityRule,
) -> Vec<usize> {
    let requests = instance.requests();
    let horizon = instance.horizon();
    let capacity = instance.capacity();
    let mut keyed: Vec<_> = positions
        .iter()
        .map(|&pos| {
            let r = &requests[pos];
            (Reverse(rule.priority(r, capacity, horizon)), r.id, pos)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, _, pos)| pos).collect()
}

/// Packs as many of `candidates` as the greedy order allows into one empty
/// bin. The result is sorted by id and maximal: every skipped candidate is
/// blocked somewhere on its span.
pub fn greedy_pack_bin(
    instance: &Instance,
    candidates: &[RequestId],
    rule: &dyn PriorityRule,
) -> Result<Vec<RequestId>, PackingError> {
    let index = instance.id_index();
    let mut seen = HashSet::with_capacity(candidates.len());
    let mut positions = Vec::with_capacity(candidates.len());
    for id in candidates {
        let &pos = index.get(id).ok_or(PackingError::UnknownId(*id))?;
        if seen.insert(pos) {
            positions.push(pos);
        }
    }
    let order = priority_order(instance, &positions, rule);
    let requests = instance.requests();
    let mut packed: Vec<RequestId> = GreedyPacker::new(instance)
        .pack(&order)
        .into_iter()
        .map(|pos| requests[pos].id)
        .collect();
    packed.sort_unstable();
    Ok(packed)
}

/// Opens one bin per round and greedily fills it from the remaining
/// requests until none are left. Always terminates because every request
/// fits an empty bin.
pub fn heuristic_solve(instance: &Instance, rule: &dyn PriorityRule) -> Packing {
    let all: Vec<usize> = (0..instance.len()).collect();
    let mut order = priority_order(instance, &all, rule);
    let packer = GreedyPacker::new(instance);
    let requests = instance.requests();
    let mut bins = Vec::new();
    let mut taken = vec![false; instance.len()];
    while !order.is_empty() {
        let packed = packer.pack(&order);
        debug_assert!(!packed.is_empty());
        for &pos in &packed {
            taken[pos] = true;
        }
        bins.push(
            packed
                .iter()
                .map(|&pos| requests[pos].id)
                .collect::<Vec<_>>(),
        );
        order.retain(|&pos| !taken[pos]);
    }
    Packing::from_bins(bins).expect("each request is packed once")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Request;
    use crate::packing::priority::priority_rule;
    use crate::packing::verify_packing;

    fn three_requests() -> Instance {
        Instance::new(
            vec![10],
            vec![
                Request::new(1, vec![2], 1, 3),
                Request::new(2, vec![9], 2, 4),
                Request::new(3, vec![5], 1, 2),
            ],
        )
        .unwrap()
    }

    fn ids(v: &[u32]) -> Vec<RequestId> {
        v.iter().map(|&i| RequestId(i)).collect()
    }

    #[test]
    fn f2_order_and_packed_set() {
        let inst = three_requests();
        let f2 = priority_rule("f2").unwrap();
        assert_eq!(priority_order(&inst, &[0, 1, 2], f2), vec![0, 2, 1]);
        assert_eq!(
            greedy_pack_bin(&inst, &ids(&[1, 2, 3]), f2).unwrap(),
            ids(&[1, 3])
        );
    }

    #[test]
    fn single_request_always_fits() {
        let inst = three_requests();
        let f2 = priority_rule("f2").unwrap();
        assert_eq!(greedy_pack_bin(&inst, &ids(&[2]), f2).unwrap(), ids(&[2]));
    }

    #[test]
    fn empty_candidates() {
        let inst = three_requests();
        let alpha = priority_rule("alpha").unwrap();
        assert!(greedy_pack_bin(&inst, &[], alpha).unwrap().is_empty());
    }

    #[test]
    fn unknown_candidate_is_rejected() {
        let inst = three_requests();
        let alpha = priority_rule("alpha").unwrap();
        assert!(greedy_pack_bin(&inst, &ids(&[9]), alpha).is_err());
    }

    #[test]
    fn ties_break_by_ascending_id() {
        let inst = Instance::new(
            vec![1],
            vec![
                Request::new(7, vec![1], 1, 2),
                Request::new(3, vec![1], 1, 2),
                Request::new(5, vec![1], 1, 2),
            ],
        )
        .unwrap();
        let alpha = priority_rule("alpha").unwrap();
        assert_eq!(
            greedy_pack_bin(&inst, &ids(&[7, 3, 5]), alpha).unwrap(),
            ids(&[3])
        );
    }

    #[test]
    fn f1_prefers_shorter_spans() {
        let inst = Instance::new(
            vec![4],
            vec![
                Request::new(1, vec![2], 1, 9),
                Request::new(2, vec![2], 1, 3),
                Request::new(3, vec![2], 2, 4),
            ],
        )
        .unwrap();
        let f1 = priority_rule("f1").unwrap();
        assert_eq!(priority_order(&inst, &[0, 1, 2], f1), vec![1, 2, 0]);
        // 2 and 3 overlap at t=2 and fill the bin there, so 1 is blocked
        assert_eq!(
            greedy_pack_bin(&inst, &ids(&[1, 2, 3]), f1).unwrap(),
            ids(&[2, 3])
        );
    }

    #[test]
    fn heuristic_on_three_requests() {
        let inst = three_requests();
        let p = heuristic_solve(&inst, priority_rule("f2").unwrap());
        assert_eq!(p.bin_count(), 2);
        assert_eq!(p.bins(), vec![ids(&[1, 3]), ids(&[2])]);
        assert!(verify_packing(&inst, &p).unwrap().is_feasible());
    }

    #[test]
    fn heuristic_on_empty_instance() {
        let inst = Instance::new(vec![1], vec![]).unwrap();
        assert_eq!(
            heuristic_solve(&inst, priority_rule("f2").unwrap()).bin_count(),
            0
        );
    }

    #[test]
    fn heuristic_on_overlapping_unit_requests() {
        let inst = Instance::new(
            vec![1],
            (1..=6)
                .map(|i| Request::new(i, vec![1], i as u64, 10))
                .collect(),
        )
        .unwrap();
        let p = heuristic_solve(&inst, priority_rule("alpha").unwrap());
        assert_eq!(p.bin_count(), 6);
    }

    #[test]
    fn zero_demand_requests_always_pack() {
        let inst = Instance::new(
            vec![1],
            vec![
                Request::new(1, vec![1], 1, 5),
                Request::new(2, vec![0], 1, 5),
            ],
        )
        .unwrap();
        let p = heuristic_solve(&inst, priority_rule("f2").unwrap());
        assert_eq!(p.bin_count(), 1);
    }
}
