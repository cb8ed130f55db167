//! Bi-objective bit-allocation solvers: shared objective/constraint
//! evaluation, an elitist genetic front solver, and a Q-learning solver
//! backed by a small self-contained neural network.

pub mod dqn;
pub mod evaluate;
pub mod net;
pub mod nsga2;

pub use dqn::{dqn_run, trace_csv, DqnConfig, DqnOutcome, TraceRow};
pub use evaluate::{
    reference_allocation, Constraints, Evaluation, Evaluator, Individual, Objectives,
    ParetoFront, Violation, R_MIN_DEFAULT,
};
pub use net::{Mlp, TrainSample};
pub use nsga2::{crowding_distance, fast_non_dominated_sort, nsga2_run, Nsga2Config};
