//! Exact solvers for small instances and ILP export.

mod brute;
mod dp;
mod ilp;

use thiserror::Error;

pub use brute::{brute_force_opt, DEFAULT_BRUTE_FORCE_LIMIT};
pub use dp::{dp_feasible, DpLimits};
pub use ilp::{export_ilp, IlpCounts, IlpModel, IlpOptions, VariableInfo};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("instance has {n} requests; exhaustive search is limited to {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error(
        "refusing dynamic program: height {height} with {bins} bins exceeds limits \
         (height <= {}, bins <= {}); estimated cost k^(2h) = {estimated_cost:.3e}",
        limits.max_height,
        limits.max_bins
    )]
    GuardRail {
        height: usize,
        bins: u32,
        limits: DpLimits,
        estimated_cost: f64,
    },
    #[error("bin budget must be at least 1")]
    NoBins,
    #[error("no packing with at most {0} bins exists")]
    Infeasible(u32),
}
