use super::ExactError;
use crate::bounds::lower_bound;
use crate::model::Instance;
use crate::packing::{heuristic_solve, priority_rule, verify_packing, Packing};
use crate::rational::ceil;

pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 12;

struct Search<'a> {
    /// positions into `requests`, in branching order
    order: Vec<usize>,
    requests: &'a [crate::model::Request],
    capacity: &'a [u64],
    horizon: usize,
    /// loads[bin][t * d + m]
    loads: Vec<Vec<u64>>,
    assignment: Vec<usize>,
    best: usize,
    best_assignment: Option<Vec<usize>>,
    floor: usize,
}

impl Search<'_> {
    fn fits(&self, bin: usize, pos: usize) -> bool {
        let r = &self.requests[pos];
        let d = self.capacity.len();
        (r.start as usize..r.end as usize).all(|t| {
            r.demand
                .components()
                .iter()
                .enumerate()
                .all(|(m, &a)| self.loads[bin][t * d + m] + a <= self.capacity[m])
        })
    }

    fn apply(&mut self, bin: usize, pos: usize, add: bool) {
        let r = &self.requests[pos];
        let d = self.capacity.len();
        for t in r.start as usize..r.end as usize {
            for (m, &a) in r.demand.components().iter().enumerate() {
                let cell = &mut self.loads[bin][t * d + m];
                if add {
                    *cell += a;
                } else {
                    *cell -= a;
                }
            }
        }
    }

    fn run(&mut self, depth: usize, used: usize) {
        if self.best <= self.floor {
            return;
        }
        if depth == self.order.len() {
            if used < self.best {
                self.best = used;
                self.best_assignment = Some(self.assignment.clone());
            }
            return;
        }
        let pos = self.order[depth];
        // request may join any open bin or open exactly one new bin
        for bin in 0..=used.min(self.loads.len() - 1) {
            let opens = bin == used;
            if opens && used + 1 >= self.best {
                break;
            }
            if !self.fits(bin, pos) {
                continue;
            }
            self.apply(bin, pos, true);
            self.assignment[pos] = bin;
            self.run(depth + 1, if opens { used + 1 } else { used });
            self.apply(bin, pos, false);
        }
    }
}

/// Minimum bin count by exhaustive search over assignments, with bin
/// symmetry removed (a request may only open the next unused bin).
/// Refuses instances with more than `limit` requests.
pub fn brute_force_opt(instance: &Instance, limit: usize) -> Result<(u32, Packing), ExactError> {
    let n = instance.len();
    if n > limit {
        return Err(ExactError::TooLarge { n, limit });
    }
    if n == 0 {
        return Ok((0, Packing::empty()));
    }
    // rank coordinates so load arrays stay small
    let mut coords: Vec<u64> = instance
        .requests()
        .iter()
        .flat_map(|r| [r.start, r.end])
        .collect();
    coords.sort_unstable();
    coords.dedup();
    let rank = |t: u64| coords.binary_search(&t).expect("coordinate present") as u64;
    let compressed = instance.with_requests(
        instance
            .requests()
            .iter()
            .map(|r| crate::model::Request {
                start: rank(r.start),
                end: rank(r.end),
                ..r.clone()
            })
            .collect(),
    );
    let requests = compressed.requests();

    let seed = heuristic_solve(&compressed, priority_rule("f2").expect("registered"));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (requests[i].start, std::cmp::Reverse(requests[i].end), i));

    let mut search = Search {
        order,
        requests,
        capacity: compressed.capacity().components(),
        horizon: compressed.horizon() as usize + 1,
        loads: Vec::new(),
        assignment: vec![0; n],
        best: seed.bin_count() as usize,
        best_assignment: None,
        floor: ceil(&lower_bound(&compressed)).max(1) as usize,
    };
    search.loads = vec![vec![0; search.horizon * search.capacity.len()]; search.best];
    search.run(0, 0);

    let packing = match search.best_assignment {
        Some(assignment) => {
            let mut bins = vec![Vec::new(); search.best];
            for (pos, &bin) in assignment.iter().enumerate() {
                bins[bin].push(requests[pos].id);
            }
            Packing::from_bins(bins).expect("each request assigned once")
        }
        None => seed,
    };
    assert!(
        verify_packing(instance, &packing).is_ok_and(|r| r.is_feasible()),
        "exhaustive search produced an infeasible packing"
    );
    Ok((packing.bin_count(), packing))
}
