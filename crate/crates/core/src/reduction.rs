//! (1+eps)-approximate data reduction and lifting of reduced solutions.
//!
//! With `L` the load lower bound, any set of requests that fits into
//! `floor(eps * L)` bins can be deleted: a packing of the remaining
//! requests into `k` bins extends to the full instance with
//! `k + floor(eps * L)` bins by re-adding the deleted bins verbatim.

use std::collections::HashSet;

use thiserror::Error;

use crate::bounds::{lower_bound, upper_bound_removable, Metrics, RemovalBudget};
use crate::model::{Instance, RequestId};
use crate::packing::{
    priority_order, verify_packing, GreedyPacker, Packing, PackingError, PriorityRule, Violation,
};
use crate::rational::{floor, Rational};
use crate::timeline::compress_time;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionOptions {
    /// Recompress time after every deleted bin.
    pub recompress: bool,
    pub budget: RemovalBudget,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self {
            recompress: true,
            budget: RemovalBudget::AsWritten,
        }
    }
}

/// Everything needed to turn a solution of the reduced instance back into
/// one of the original.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionCertificate {
    pub epsilon: Rational,
    pub lower_bound: Rational,
    pub k_del: u64,
    /// Original ids of each deleted bin; only non-empty bins are recorded.
    pub deletion_bins: Vec<Vec<RequestId>>,
    pub original_n: u64,
    /// Fingerprint of the reduced instance in canonical text form.
    pub reduced_fingerprint: String,
    pub priority_rule: String,
    pub removal_budget: RemovalBudget,
    pub metrics: Metrics,
}

impl ReductionCertificate {
    pub fn deleted_ids(&self) -> impl Iterator<Item = RequestId> + '_ {
        self.deletion_bins.iter().flatten().copied()
    }

    pub fn deleted_count(&self) -> usize {
        self.deletion_bins.iter().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone)]
pub struct Reduction {
    /// Surviving requests, time-compressed, original ids.
    pub instance: Instance,
    pub certificate: ReductionCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(Rational),
}

/// Applies the reduction rule with greedy bin filling.
///
/// The instance is compressed once, `L` and `k_del = floor(eps * L)` are
/// fixed from that state, then up to `k_del` bins are greedily filled from
/// the surviving requests and deleted. Priorities are recomputed against
/// the current horizon before each bin.
pub fn reduce(
    instance: &Instance,
    epsilon: Rational,
    rule: &dyn PriorityRule,
    options: ReductionOptions,
) -> Result<Reduction, ReductionError> {
    if epsilon < Rational::from_integer(0) {
        return Err(ReductionError::NegativeEpsilon(epsilon));
    }
    let (compressed, _) = compress_time(instance);
    let lb = lower_bound(&compressed);
    let k_del = floor(&(epsilon * lb)).max(0) as u64;
    let removable = upper_bound_removable(&compressed, k_del, options.budget);

    let mut current = compressed;
    let mut deletion_bins = Vec::new();
    let mut stale_time = false;
    for _ in 0..k_del {
        if current.is_empty() {
            break;
        }
        let positions: Vec<usize> = (0..current.len()).collect();
        let order = priority_order(&current, &positions, rule);
        let packed = GreedyPacker::new(&current).pack(&order);
        let mut taken = vec![false; current.len()];
        let mut bin: Vec<RequestId> = packed
            .iter()
            .map(|&pos| {
                taken[pos] = true;
                current.requests()[pos].id
            })
            .collect();
        bin.sort_unstable();
        deletion_bins.push(bin);

        let mut pos = 0;
        current = current.retain(|_| {
            let keep = !taken[pos];
            pos += 1;
            keep
        });
        if options.recompress {
            current = compress_time(&current).0;
        } else {
            stale_time = true;
        }
    }
    if stale_time {
        current = compress_time(&current).0;
    }

    let n = instance.len() as u64;
    let n_prime = current.len() as u64;
    let certificate = ReductionCertificate {
        epsilon,
        lower_bound: lb,
        k_del,
        deletion_bins,
        original_n: n,
        reduced_fingerprint: crate::format::fingerprint(&current),
        priority_rule: rule.name().to_string(),
        removal_budget: options.budget,
        metrics: Metrics::new(lb, k_del, removable, n, n_prime),
    };
    Ok(Reduction {
        instance: current,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error("certificate deletes request {0}, which is not in the original instance")]
    UnknownDeleted(RequestId),
    #[error("certificate deletes request {0} more than once")]
    DeletedTwice(RequestId),
    #[error("certificate lists {listed} deletion bins but allows only {allowed}")]
    TooManyBins { listed: usize, allowed: u64 },
    #[error("certificate was issued for {expected} requests, original has {found}")]
    OriginalSizeMismatch { expected: u64, found: usize },
    #[error("reduced packing assigns request {0}, which the certificate deleted")]
    AssignsDeleted(RequestId),
    #[error("reduced packing leaves {0} surviving requests unassigned")]
    ReducedIncomplete(usize),
    #[error("reduced packing violates capacity ({} violations, first in bin {})", .0.len(), .0[0].bin)]
    ReducedInfeasible(Vec<Violation>),
    #[error("lifted packing violates capacity ({} violations); the certificate is not valid for this instance", .0.len())]
    LiftedInfeasible(Vec<Violation>),
}

/// Extends a complete, feasible packing of the reduced instance with one
/// fresh bin per recorded deletion bin. The result uses
/// `bins(reduced) + |deletion_bins|` bins and is verified before returning.
pub fn lift_solution(
    certificate: &ReductionCertificate,
    reduced_packing: &Packing,
    original: &Instance,
) -> Result<Packing, LiftError> {
    if certificate.original_n != original.len() as u64 {
        return Err(LiftError::OriginalSizeMismatch {
            expected: certificate.original_n,
            found: original.len(),
        });
    }
    if certificate.deletion_bins.len() as u64 > certificate.k_del {
        return Err(LiftError::TooManyBins {
            listed: certificate.deletion_bins.len(),
            allowed: certificate.k_del,
        });
    }
    let known: HashSet<RequestId> = original.ids().collect();
    let mut deleted = HashSet::new();
    for id in certificate.deleted_ids() {
        if !known.contains(&id) {
            return Err(LiftError::UnknownDeleted(id));
        }
        if !deleted.insert(id) {
            return Err(LiftError::DeletedTwice(id));
        }
    }
    if let Some((id, _)) = reduced_packing
        .assignments()
        .find(|(id, _)| deleted.contains(id))
    {
        return Err(LiftError::AssignsDeleted(id));
    }

    let surviving = original.retain(|r| !deleted.contains(&r.id));
    let report = verify_packing(&surviving, reduced_packing)?;
    if !report.respects_capacity() {
        return Err(LiftError::ReducedInfeasible(report.violations));
    }
    if !report.is_complete() {
        return Err(LiftError::ReducedIncomplete(report.unassigned.len()));
    }

    let bins = reduced_packing
        .bins()
        .into_iter()
        .chain(certificate.deletion_bins.iter().cloned());
    let lifted = Packing::from_bins(bins)?;
    let report = verify_packing(original, &lifted)?;
    if !report.is_feasible() {
        return Err(LiftError::LiftedInfeasible(report.violations));
    }
    Ok(lifted)
}
