//! Whole-instance solvers behind one trait, selectable by name.

use std::fmt;

use crate::bounds::lower_bound;
use crate::exact::{brute_force_opt, dp_feasible, DpLimits, ExactError, DEFAULT_BRUTE_FORCE_LIMIT};
use crate::model::Instance;
use crate::packing::{default_priority_rule, heuristic_solve, Packing, PriorityRule};
use crate::rational::ceil;

#[derive(Clone, Copy)]
pub struct SolverConfig {
    pub priority_rule: &'static dyn PriorityRule,
    pub brute_force_limit: usize,
    pub dp_limits: DpLimits,
    /// Bin budget for the dynamic program. When absent it searches upward
    /// from `ceil(L)`.
    pub bins: Option<u32>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            priority_rule: default_priority_rule(),
            brute_force_limit: DEFAULT_BRUTE_FORCE_LIMIT,
            dp_limits: DpLimits::default(),
            bins: None,
        }
    }
}

impl fmt::Debug for SolverConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SolverConfig")
            .field("priority_rule", &self.priority_rule.name())
            .field("brute_force_limit", &self.brute_force_limit)
            .field("dp_limits", &self.dp_limits)
            .field("bins", &self.bins)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub packing: Packing,
    /// The bin count is known to be minimum.
    pub optimal: bool,
}

pub trait Solver: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<Solution, ExactError>;
}

pub struct Heuristic;
pub struct BruteForce;
pub struct DynamicProgram;

impl Solver for Heuristic {
    fn name(&self) -> &'static str {
        "heuristic"
    }

    fn description(&self) -> &'static str {
        "repeated greedy bin filling in priority order"
    }

    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<Solution, ExactError> {
        let packing = heuristic_solve(instance, config.priority_rule);
        let floor = ceil(&lower_bound(instance)).max(0) as u32;
        Ok(Solution {
            optimal: packing.bin_count() == floor,
            packing,
        })
    }
}

impl Solver for BruteForce {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn description(&self) -> &'static str {
        "exhaustive search with bin symmetry pruning"
    }

    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<Solution, ExactError> {
        let (_, packing) = brute_force_opt(instance, config.brute_force_limit)?;
        Ok(Solution {
            packing,
            optimal: true,
        })
    }
}

impl Solver for DynamicProgram {
    fn name(&self) -> &'static str {
        "dp"
    }

    fn description(&self) -> &'static str {
        "dynamic program over active-set labellings"
    }

    fn solve(&self, instance: &Instance, config: &SolverConfig) -> Result<Solution, ExactError> {
        if let Some(k) = config.bins {
            return match dp_feasible(instance, k, config.dp_limits)? {
                Some(packing) => Ok(Solution {
                    packing,
                    optimal: false,
                }),
                None => Err(ExactError::Infeasible(k)),
            };
        }
        if instance.is_empty() {
            return Ok(Solution {
                packing: Packing::empty(),
                optimal: true,
            });
        }
        let first = ceil(&lower_bound(instance)).max(1) as u32;
        let mut k = first;
        loop {
            // the guard rail error for k = max_bins + 1 ends the search
            if let Some(packing) = dp_feasible(instance, k, config.dp_limits)? {
                return Ok(Solution {
                    packing,
                    optimal: true,
                });
            }
            k += 1;
        }
    }
}

static SOLVERS: [&dyn Solver; 3] = [&Heuristic, &BruteForce, &DynamicProgram];

pub fn solvers() -> &'static [&'static dyn Solver] {
    &SOLVERS
}

pub fn solver(name: &str) -> Option<&'static dyn Solver> {
    SOLVERS.iter().copied().find(|s| s.name() == name)
}
