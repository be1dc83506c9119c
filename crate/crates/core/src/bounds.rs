//! Lower bound on the optimum, an upper bound on how many requests a fixed
//! number of bins can absorb, and the utilization ratios built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{group_types, sorted_events, EventKind, Instance};
use crate::rational::Rational;

/// Peak over instants and dimensions of total active demand divided by
/// capacity. Exact; 0 for an empty instance. Invariant under time
/// compression since the family of active sets is unchanged.
pub fn lower_bound(instance: &Instance) -> Rational {
    let capacity = instance.capacity().components();
    let d = capacity.len();
    let requests = instance.requests();
    let events = sorted_events(requests);

    let mut load = vec![0u128; d];
    // best = best_num / best_den, kept unreduced until the end
    let (mut best_num, mut best_den) = (0u128, 1u128);
    let mut i = 0;
    while i < events.len() {
        let time = events[i].time;
        while i < events.len() && events[i].time == time {
            let demand = requests[events[i].index].demand.components();
            match events[i].kind {
                EventKind::Start => load
                    .iter_mut()
                    .zip(demand)
                    .for_each(|(l, &a)| *l += a as u128),
                EventKind::End => load
                    .iter_mut()
                    .zip(demand)
                    .for_each(|(l, &a)| *l -= a as u128),
            }
            i += 1;
        }
        for (l, &b) in load.iter().zip(capacity) {
            if *l * best_den > best_num * b as u128 {
                best_num = *l;
                best_den = b as u128;
            }
        }
    }
    Rational::new(best_num as i128, best_den as i128)
}

/// Prefix budget used when counting how many of the smallest components fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemovalBudget {
    /// Budget `b_j` regardless of `k`.
    #[default]
    AsWritten,
    /// Budget `k * b_j`.
    Scaled,
}

impl RemovalBudget {
    pub fn name(self) -> &'static str {
        match self {
            RemovalBudget::AsWritten => "as-written",
            RemovalBudget::Scaled => "scaled",
        }
    }
}

impl fmt::Display for RemovalBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RemovalBudget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as-written" => Ok(RemovalBudget::AsWritten),
            "scaled" => Ok(RemovalBudget::Scaled),
            other => Err(format!(
                "unknown budget variant `{other}` (expected as-written or scaled)"
            )),
        }
    }
}

/// Upper bound `U` on the number of requests that `k` bins can take.
///
/// For each type of multiplicity `m`, at most
/// `p = min(m, k * floor(b_j / a_j))` copies fit (dimensions with `a_j = 0`
/// impose nothing). Per dimension, the `p` copies' components are sorted
/// ascending and `U_j` is the longest prefix whose sum stays within the
/// budget. The result is `min_j U_j`, capped at `n`.
pub fn upper_bound_removable(instance: &Instance, k: u64, budget: RemovalBudget) -> u64 {
    let n = instance.len() as u64;
    if k == 0 || n == 0 {
        return 0;
    }
    let capacity = instance.capacity().components();
    let table = group_types(instance);

    // per dimension: (component value, number of copies)
    let mut lists: Vec<Vec<(u64, u64)>> = vec![Vec::with_capacity(table.len()); capacity.len()];
    for entry in &table.entries {
        let demand = entry.key.demand.components();
        let p = demand
            .iter()
            .zip(capacity)
            .filter(|(&a, _)| a > 0)
            .map(|(&a, &b)| k.saturating_mul(b / a))
            .fold(entry.multiplicity() as u64, u64::min);
        if p == 0 {
            continue;
        }
        for (list, &a) in lists.iter_mut().zip(demand) {
            list.push((a, p));
        }
    }

    let mut bound = n;
    for (list, &b) in lists.iter_mut().zip(capacity) {
        list.sort_unstable();
        let limit = match budget {
            RemovalBudget::AsWritten => b as u128,
            RemovalBudget::Scaled => k as u128 * b as u128,
        };
        let mut used = 0u128;
        let mut count = 0u64;
        for &(value, copies) in list.iter() {
            let take = if value == 0 {
                copies
            } else {
                copies.min(((limit - used) / value as u128).min(u64::MAX as u128) as u64)
            };
            count += take;
            used += take as u128 * value as u128;
            if take < copies {
                break;
            }
        }
        bound = bound.min(count);
    }
    bound
}

/// `R = (n - n') / U` (undefined for `U = 0`) and `K = n' / (n - U)`
/// (undefined for `U >= n`).
pub fn utilization(n: u64, n_prime: u64, removable: u64) -> (Option<Rational>, Option<Rational>) {
    debug_assert!(n_prime <= n);
    let r = (removable > 0).then(|| Rational::new((n - n_prime) as i128, removable as i128));
    let k = (removable < n).then(|| Rational::new(n_prime as i128, (n - removable) as i128));
    (r, k)
}

/// Diagnostics of one reduction run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metrics {
    pub lower_bound: Rational,
    /// Bins available for deletion, `floor(eps * L)`.
    pub k_del: u64,
    pub removable: u64,
    pub n: u64,
    pub n_prime: u64,
    pub removed_utilization: Option<Rational>,
    pub remaining_ratio: Option<Rational>,
}

impl Metrics {
    pub fn new(lower_bound: Rational, k_del: u64, removable: u64, n: u64, n_prime: u64) -> Self {
        let (r, k) = utilization(n, n_prime, removable);
        Self {
            lower_bound,
            k_del,
            removable,
            n,
            n_prime,
            removed_utilization: r,
            remaining_ratio: k,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Request;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn lower_bound_of_empty_instance_is_zero() {
        let inst = Instance::new(vec![3], vec![]).unwrap();
        assert_eq!(lower_bound(&inst), r(0, 1));
    }

    #[test]
    fn lower_bound_single_request_takes_max_ratio() {
        let inst = Instance::new(vec![4, 6], vec![Request::new(1, vec![2, 3], 1, 2)]).unwrap();
        assert_eq!(lower_bound(&inst), r(1, 2));
    }

    #[test]
    fn lower_bound_three_requests_peaks_at_t2() {
        let inst = Instance::new(
            vec![10],
            vec![
                Request::new(1, vec![2], 1, 3),
                Request::new(2, vec![9], 2, 4),
                Request::new(3, vec![5], 1, 2),
            ],
        )
        .unwrap();
        assert_eq!(lower_bound(&inst), r(11, 10));
    }

    #[test]
    fn lower_bound_respects_half_open_ends() {
        let inst = Instance::new(
            vec![10],
            vec![
                Request::new(1, vec![6], 1, 3),
                Request::new(2, vec![7], 3, 4),
            ],
        )
        .unwrap();
        assert_eq!(lower_bound(&inst), r(7, 10));
    }

    fn five_small_one_large() -> Instance {
        let mut requests: Vec<Request> = (1..=5).map(|i| Request::new(i, vec![3], 1, 2)).collect();
        requests.push(Request::new(6, vec![4], 1, 2));
        Instance::new(vec![10], requests).unwrap()
    }

    #[test]
    fn removable_bound_as_written() {
        assert_eq!(
            upper_bound_removable(&five_small_one_large(), 1, RemovalBudget::AsWritten),
            3
        );
    }

    #[test]
    fn removable_bound_scaled() {
        assert_eq!(
            upper_bound_removable(&five_small_one_large(), 2, RemovalBudget::Scaled),
            6
        );
    }

    #[test]
    fn removable_bound_zero_bins() {
        let inst = five_small_one_large();
        assert_eq!(upper_bound_removable(&inst, 0, RemovalBudget::AsWritten), 0);
        assert_eq!(upper_bound_removable(&inst, 0, RemovalBudget::Scaled), 0);
    }

    #[test]
    fn removable_bound_counts_zero_components_freely() {
        let inst = Instance::new(
            vec![10, 10],
            vec![
                Request::new(1, vec![0, 0], 1, 2),
                Request::new(2, vec![0, 0], 1, 2),
                Request::new(3, vec![10, 0], 1, 2),
            ],
        )
        .unwrap();
        assert_eq!(upper_bound_removable(&inst, 1, RemovalBudget::AsWritten), 3);
    }

    #[test]
    fn utilization_formulas() {
        assert_eq!(utilization(10, 4, 8), (Some(r(3, 4)), Some(r(2, 1))));
        assert_eq!(utilization(10, 10, 0), (None, Some(r(1, 1))));
        assert_eq!(utilization(10, 0, 10), (Some(r(1, 1)), None));
    }

    #[test]
    fn budget_names_round_trip() {
        for b in [RemovalBudget::AsWritten, RemovalBudget::Scaled] {
            assert_eq!(b.name().parse::<RemovalBudget>().unwrap(), b);
        }
        assert!("other".parse::<RemovalBudget>().is_err());
    }
}
