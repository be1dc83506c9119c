#![allow(dead_code)]

use std::collections::BTreeSet;

use dvbp::{Instance, Request};
use rand::Rng;

pub struct Shape {
    pub n_max: usize,
    pub d_max: usize,
    pub b_max: u64,
    pub t_max: u64,
}

pub fn random_instance(rng: &mut impl Rng, shape: &Shape) -> Instance {
    let n = rng.gen_range(0..=shape.n_max);
    let d = rng.gen_range(1..=shape.d_max);
    let capacity: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=shape.b_max)).collect();
    let requests = (0..n)
        .map(|i| {
            let demand = capacity.iter().map(|&b| rng.gen_range(0..=b)).collect();
            let start = rng.gen_range(0..shape.t_max);
            let end = rng.gen_range(start + 1..=shape.t_max);
            Request::new(i as u32 + 1, demand, start, end)
        })
        .collect();
    Instance::new(capacity, requests).expect("generated instance is valid")
}

/// Instances in which every request is active at one common instant.
pub fn random_common_instant(
    rng: &mut impl Rng,
    n_max: usize,
    d_max: usize,
    b_max: u64,
) -> Instance {
    let n = rng.gen_range(1..=n_max);
    let d = rng.gen_range(1..=d_max);
    let capacity: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=b_max)).collect();
    let requests = (0..n)
        .map(|i| {
            let demand = capacity.iter().map(|&b| rng.gen_range(0..=b)).collect();
            let start = rng.gen_range(0..5);
            let end = rng.gen_range(5..10);
            Request::new(i as u32 + 1, demand, start, end)
        })
        .collect();
    Instance::new(capacity, requests).expect("generated instance is valid")
}

/// Direct pairwise intersection test on the raw intervals.
pub fn intersects(a: &Request, b: &Request) -> bool {
    a.start.max(b.start) < a.end.min(b.end)
}

pub fn same_intersections(a: &Instance, b: &Instance) -> bool {
    let (ra, rb) = (a.requests(), b.requests());
    ra.len() == rb.len()
        && (0..ra.len()).all(|i| {
            (0..ra.len()).all(|j| intersects(&ra[i], &ra[j]) == intersects(&rb[i], &rb[j]))
        })
}

/// Smallest horizon among order-preserving remaps of the endpoints that
/// use consecutive gaps of 0 or 1 and keep every interval non-empty and
/// every pairwise intersection unchanged.
pub fn min_horizon_monotone(instance: &Instance) -> u64 {
    let reqs = instance.requests();
    if reqs.is_empty() {
        return 0;
    }
    let coords: Vec<u64> = reqs
        .iter()
        .flat_map(|r| [r.start, r.end])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let m = coords.len();
    let mut best = u64::MAX;
    for mask in 0u32..(1 << (m - 1)) {
        let mut values = vec![1u64; m];
        for i in 1..m {
            values[i] = values[i - 1] + u64::from(mask >> (i - 1) & 1);
        }
        let at = |t: u64| values[coords.binary_search(&t).unwrap()];
        let mapped: Vec<(u64, u64)> = reqs.iter().map(|r| (at(r.start), at(r.end))).collect();
        if mapped.iter().any(|(s, e)| s >= e) {
            continue;
        }
        let ok = (0..reqs.len()).all(|i| {
            (0..reqs.len()).all(|j| {
                let m_int = mapped[i].0.max(mapped[j].0) < mapped[i].1.min(mapped[j].1);
                m_int == intersects(&reqs[i], &reqs[j])
            })
        });
        if ok {
            best = best.min(*values.last().unwrap());
        }
    }
    best
}

/// Smallest horizon over every placement of the intervals in `1..=T` that
/// reproduces the intersection pattern, with no ordering assumption.
/// Exponential; meant for n <= 4.
pub fn min_horizon_unrestricted(instance: &Instance, t_limit: u64) -> Option<u64> {
    let reqs = instance.requests();
    if reqs.is_empty() {
        return Some(0);
    }
    let want: Vec<Vec<bool>> = reqs
        .iter()
        .map(|a| reqs.iter().map(|b| intersects(a, b)).collect())
        .collect();
    for t in 2..=t_limit {
        let slots: Vec<(u64, u64)> = (1..t)
            .flat_map(|s| (s + 1..=t).map(move |e| (s, e)))
            .collect();
        let mut chosen = Vec::with_capacity(reqs.len());
        if place(&slots, &want, &mut chosen) {
            return Some(t);
        }
    }
    None
}

fn place(slots: &[(u64, u64)], want: &[Vec<bool>], chosen: &mut Vec<(u64, u64)>) -> bool {
    let i = chosen.len();
    if i == want.len() {
        return true;
    }
    for &slot in slots {
        let consistent = chosen
            .iter()
            .enumerate()
            .all(|(j, &(s, e))| (slot.0.max(s) < slot.1.min(e)) == want[i][j]);
        if consistent {
            chosen.push(slot);
            if place(slots, want, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Peak of `load / capacity` by evaluating every instant directly.
pub fn lower_bound_by_instants(instance: &Instance) -> dvbp::Rational {
    let mut best = dvbp::Rational::from_integer(0);
    let horizon = instance.requests().iter().map(|r| r.end).max().unwrap_or(0);
    for t in 0..horizon {
        for (j, &b) in instance.capacity().components().iter().enumerate() {
            let load: u64 = instance
                .requests()
                .iter()
                .filter(|r| r.start <= t && t < r.end)
                .map(|r| r.demand.components()[j])
                .sum();
            best = best.max(dvbp::Rational::new(load as i128, b as i128));
        }
    }
    best
}

/// Whether the given requests fit together into one bin, checked per instant.
pub fn fits_one_bin(instance: &Instance, members: &[usize]) -> bool {
    let reqs = instance.requests();
    let horizon = reqs.iter().map(|r| r.end).max().unwrap_or(0);
    (0..horizon).all(|t| {
        instance
            .capacity()
            .components()
            .iter()
            .enumerate()
            .all(|(j, &b)| {
                members
                    .iter()
                    .filter(|&&p| reqs[p].start <= t && t < reqs[p].end)
                    .map(|&p| reqs[p].demand.components()[j])
                    .sum::<u64>()
                    <= b
            })
    })
}

/// Largest number of requests that fit into a single bin, by subset enumeration.
pub fn max_one_bin(instance: &Instance) -> usize {
    let n = instance.len();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        if fits_one_bin(instance, &members) {
            best = size;
        }
    }
    best
}
