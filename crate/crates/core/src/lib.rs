//! Commuting equilibrium on a corridor of nested bottlenecks with
//! telecommuting and staggered work hours.
//!
//! Locations are indexed from 0 (next to the business district) in the API;
//! error messages and reports count from 1.

pub mod corridor;
pub mod error;
pub mod instances;
pub mod long_term;
pub mod oracle;
pub mod plf;
#[cfg(test)]
mod proptests;
pub mod root;
pub mod scenarios;
pub mod schedule;
pub mod short_term;

pub use corridor::{CorridorSpec, WageSpec};
pub use error::{Error, Result};
pub use plf::{PiecewiseLinearFn, StepFn};
pub use schedule::{CostMode, IntervalSet, ScheduleSpec};
