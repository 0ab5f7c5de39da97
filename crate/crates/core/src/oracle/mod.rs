//! Independent checks of the analytic solutions: a discretized optimum
//! solved as an integer min-cost flow, a point-queue simulation of the equilibrium,
//! and a residual evaluator for the equilibrium conditions.

mod cost_scaling;
pub mod gap;
pub mod lp;
pub mod min_cost_flow;
mod network_simplex;
pub mod queue_sim;

pub use gap::{equilibrium_gap, gap_components, GapReport, IntegratedState};
pub use min_cost_flow::{FlowSolution, MinCostFlow, Status};
pub use lp::{lp_st_so, AnalyticComparison, DiscreteInstance, OracleVerdict};
pub use queue_sim::{queue_sim, QueueReport};
