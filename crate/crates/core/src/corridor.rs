//! Corridor geometry, land supply and wages.

use serde::Serialize;

use crate::error::{Error, Result};

/// Physical corridor. Location 0 is next to the business district; every
/// location `i` feeds a bottleneck of capacity `capacities[i]` followed by a
/// free-flow link of duration `free_flow[i]` towards location `i - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorridorSpec {
    capacities: Vec<f64>,
    free_flow: Vec<f64>,
    areas: Vec<f64>,
}

impl CorridorSpec {
    pub fn new(capacities: Vec<f64>, free_flow: Vec<f64>, areas: Vec<f64>) -> Result<Self> {
        Self {
            capacities,
            free_flow,
            areas,
        }
        .validate()
    }

    /// Checks every invariant and returns the corridor unchanged.
    pub fn validate(self) -> Result<Self> {
        let n = self.capacities.len();
        if n == 0 {
            return Err(Error::EmptyCorridor);
        }
        for (what, v) in [("free_flow", &self.free_flow), ("areas", &self.areas)] {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    what,
                    got: v.len(),
                    expected: n,
                });
            }
        }
        for (what, v) in [
            ("capacities", &self.capacities),
            ("free_flow", &self.free_flow),
            ("areas", &self.areas),
        ] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(what));
            }
        }
        for i in 0..n {
            if self.capacities[i] <= 0.0 {
                return Err(Error::NonPositiveCapacity(i + 1));
            }
            if i + 1 < n && self.capacities[i] <= self.capacities[i + 1] {
                return Err(Error::CapacityOrdering(i + 1));
            }
            if self.areas[i] <= 0.0 {
                return Err(Error::NonPositiveArea(i + 1));
            }
            if self.free_flow[i] < 0.0 {
                return Err(Error::NegativeFreeFlow(i + 1));
            }
        }
        Ok(self)
    }

    pub fn location_count(&self) -> usize {
        self.capacities.len()
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn free_flow(&self) -> &[f64] {
        &self.free_flow
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Capacity of bottleneck `i`, with zero beyond the corridor end.
    pub fn capacity(&self, i: usize) -> f64 {
        self.capacities.get(i).copied().unwrap_or(0.0)
    }

    /// `μ_i − μ_{i+1}` with `μ_{I+1} = 0`.
    pub fn residual_capacities(&self) -> Vec<f64> {
        (0..self.location_count())
            .map(|i| self.capacity(i) - self.capacity(i + 1))
            .collect()
    }

    /// Free-flow time from location `i` (0-based) to the district.
    pub fn cumulative_free_flow(&self, i: usize) -> Result<f64> {
        if i >= self.location_count() {
            return Err(Error::LocationOutOfRange(i + 1));
        }
        Ok(self.free_flow[..=i].iter().sum())
    }

    /// Total workers, fixed at full occupancy.
    pub fn population(&self) -> f64 {
        self.areas.iter().sum()
    }
}

/// Daily wages for office and remote work.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WageSpec {
    office: f64,
    remote: f64,
    days_per_term: u32,
}

impl WageSpec {
    pub fn new(office: f64, remote: f64, days_per_term: u32) -> Result<Self> {
        if !office.is_finite() || !remote.is_finite() {
            return Err(Error::NonFinite("wages"));
        }
        if remote <= 0.0 {
            return Err(Error::InvalidWages(format!(
                "remote wage must be positive, got {remote}"
            )));
        }
        if office <= remote {
            return Err(Error::InvalidWages(format!(
                "office wage {office} must exceed remote wage {remote}"
            )));
        }
        if days_per_term == 0 {
            return Err(Error::InvalidWages("days per term must be at least 1".into()));
        }
        Ok(Self {
            office,
            remote,
            days_per_term,
        })
    }

    pub fn office(&self) -> f64 {
        self.office
    }

    pub fn remote(&self) -> f64 {
        self.remote
    }

    pub fn days_per_term(&self) -> u32 {
        self.days_per_term
    }

    /// Same office wage and term length with a different remote wage.
    pub fn with_remote(&self, remote: f64) -> Result<Self> {
        Self::new(self.office, remote, self.days_per_term)
    }
}
