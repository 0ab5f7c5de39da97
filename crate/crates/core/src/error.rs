use thiserror::Error;

/// Errors raised by model validation and the analytic solvers.
///
/// Location and preferred-time indices in messages are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("corridor must have at least one location")]
    EmptyCorridor,
    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("capacity ordering violated at i={0}")]
    CapacityOrdering(usize),
    #[error("nonpositive capacity at i={0}")]
    NonPositiveCapacity(usize),
    #[error("nonpositive area at i={0}")]
    NonPositiveArea(usize),
    #[error("negative free-flow time at i={0}")]
    NegativeFreeFlow(usize),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("location index {0} out of range")]
    LocationOutOfRange(usize),
    #[error("preferred-time index {0} out of range")]
    PreferenceOutOfRange(usize),
    #[error("invalid wages: {0}")]
    InvalidWages(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("time {0} outside horizon")]
    OutsideHorizon(f64),
    #[error("negative cost level {0}")]
    NegativeLevel(f64),
    #[error("negative demand at i={0}")]
    NegativeDemand(usize),
    #[error("invalid demand mass {0}")]
    InvalidMass(f64),
    #[error("invalid capacity {0}")]
    InvalidCapacity(f64),
    #[error("demand mass {mass} exceeds what the horizon can hold at capacity {capacity}")]
    HorizonOverflow { mass: f64, capacity: f64 },
    #[error("merged formula needs K in {{1,2}} with uniform spacing (K={0})")]
    MergedFormulaUnsupported(usize),
    #[error("merged formula yields negative cost {cost} for mass {mass}")]
    NegativeMergedCost { mass: f64, cost: f64 },
    #[error("demand gap: location i={0} is empty while a farther location is occupied")]
    DemandGap(usize),
    #[error("cost ordering violated: lambda at i={0} is not below lambda at i={1}")]
    CostOrdering(usize, usize),
    #[error("queue replacement condition fails at bottleneck i={0}")]
    QrpViolated(usize),
    #[error("negative flow rate {rate} at location i={location}, k={k}, t={t}")]
    NegativeRate {
        location: usize,
        k: usize,
        rate: f64,
        t: f64,
    },
    #[error("negative rent {value} at i={location}")]
    NegativeRent { location: usize, value: f64 },
    #[error("disjoint domains")]
    DisjointDomains,
    #[error("invalid piecewise-linear function: {0}")]
    InvalidPlf(&'static str),
    #[error("mismatched configurations: {0}")]
    MismatchedConfig(String),
    #[error("infeasible discretization: {0}")]
    InfeasibleDiscretization(String),
    #[error("simulated queue at bottleneck i={bottleneck} still holds {excess} at the end of the run")]
    CapacityViolation { bottleneck: usize, excess: f64 },
    #[error("root bracket does not contain a sign change")]
    NoBracket,
}

pub type Result<T> = std::result::Result<T, Error>;
