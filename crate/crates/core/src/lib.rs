//! Dynamic vector bin packing: instances, time compression, load bounds,
//! greedy packing, (1+eps) data reduction with lifting, exact solvers for
//! small instances, ILP export and trace ingestion.
//!
//! All resource arithmetic is on exact integers and all ratios are exact
//! rationals, so every result is reproducible bit for bit.

pub mod bounds;
pub mod exact;
pub mod format;
pub mod ingest;
pub mod model;
pub mod packing;
pub mod rational;
pub mod reduction;
pub mod report;
pub mod solver;
pub mod timeline;

pub use bounds::{lower_bound, upper_bound_removable, utilization, Metrics, RemovalBudget};
pub use exact::{
    brute_force_opt, dp_feasible, export_ilp, DpLimits, ExactError, IlpModel, IlpOptions,
};
pub use model::{
    compute_stats, group_types, validate_instance, Instance, InstanceStats, RawInstance,
    RawRequest, Request, RequestId, ResourceVector, TypeKey, TypeTable, ValidateOptions,
    ValidationError, ValidationErrors,
};
pub use packing::{
    greedy_pack_bin, heuristic_solve, priority_rule, priority_rules, verify_packing,
    FeasibilityReport, Packing, PriorityRule,
};
pub use rational::{parse_rational, Rational};
pub use reduction::{
    lift_solution, reduce, LiftError, Reduction, ReductionCertificate, ReductionOptions,
};
pub use solver::{solver, solvers, Solution, Solver, SolverConfig};
pub use timeline::{compress_time, intersection_matrix, TimeMap};
