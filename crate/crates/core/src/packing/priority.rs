//! Request priorities for greedy single-bin packing.
//!
//! Rules are trait objects registered by name so callers (and the CLI) can
//! pick one at runtime. All values are exact rationals; requests with an
//! all-zero demand get [`Priority::Unbounded`] and are packed first.

use std::fmt;

use crate::model::{Request, ResourceVector};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Priority {
    Finite(Rational),
    /// Above every finite value.
    Unbounded,
}

impl fmt::Display for Priority {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Priority::Finite(v) => write!(f, "{v}"),
            Priority::Unbounded => f.write_str("inf"),
        }
    }
}

pub trait PriorityRule: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// `horizon` is the latest end time of the instance being packed.
    fn priority(&self, request: &Request, capacity: &ResourceVector, horizon: u64) -> Priority;
}

impl fmt::Debug for dyn PriorityRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PriorityRule({})", self.name())
    }
}

/// `min_j floor(b_j / a_j)` over dimensions with `a_j > 0`; `None` when the
/// demand is all zero.
pub fn copies_per_bin(demand: &ResourceVector, capacity: &ResourceVector) -> Option<u64> {
    demand
        .components()
        .iter()
        .zip(capacity.components())
        .filter(|(&a, _)| a > 0)
        .map(|(&a, &b)| b / a)
        .min()
}

/// How many copies of the request fit into an empty bin.
#[derive(Debug, Clone, Copy, Default)]
pub struct Alpha;

/// Alpha with shorter spans breaking ties.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlphaSpanTieBreak;

/// Alpha scaled by how many times the span fits into the horizon.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlphaHorizonScaled;

impl PriorityRule for Alpha {
    fn name(&self) -> &'static str {
        "alpha"
    }

    fn description(&self) -> &'static str {
        "copies of the request that fit into one bin"
    }

    fn priority(&self, request: &Request, capacity: &ResourceVector, _horizon: u64) -> Priority {
        match copies_per_bin(&request.demand, capacity) {
            Some(a) => Priority::Finite(Rational::from_integer(a as i128)),
            None => Priority::Unbounded,
        }
    }
}

impl PriorityRule for AlphaSpanTieBreak {
    fn name(&self) -> &'static str {
        "f1"
    }

    fn description(&self) -> &'static str {
        "alpha + 1 / (2 * span)"
    }

    fn priority(&self, request: &Request, capacity: &ResourceVector, _horizon: u64) -> Priority {
        match copies_per_bin(&request.demand, capacity) {
            Some(a) => Priority::Finite(
                Rational::from_integer(a as i128) + Rational::new(1, 2 * request.span() as i128),
            ),
            None => Priority::Unbounded,
        }
    }
}

impl PriorityRule for AlphaHorizonScaled {
    fn name(&self) -> &'static str {
        "f2"
    }

    fn description(&self) -> &'static str {
        "alpha * horizon / span"
    }

    fn priority(&self, request: &Request, capacity: &ResourceVector, horizon: u64) -> Priority {
        match copies_per_bin(&request.demand, capacity) {
            Some(a) => Priority::Finite(Rational::new(
                a as i128 * horizon as i128,
                request.span() as i128,
            )),
            None => Priority::Unbounded,
        }
    }
}

static RULES: [&dyn PriorityRule; 3] = [&Alpha, &AlphaSpanTieBreak, &AlphaHorizonScaled];

/// Every registered rule, in a stable order.
pub fn priority_rules() -> &'static [&'static dyn PriorityRule] {
    &RULES
}

pub fn priority_rule(name: &str) -> Option<&'static dyn PriorityRule> {
    RULES.iter().copied().find(|r| r.name() == name)
}

/// The rule used when none is requested.
pub fn default_priority_rule() -> &'static dyn PriorityRule {
    &AlphaHorizonScaled
}
