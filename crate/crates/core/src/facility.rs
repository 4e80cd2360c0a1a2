use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::Dataset;
use crate::metric::{CostMatrix, DistanceMode};

/// Clients, candidate locations with opening costs, and an optional uniform
/// capacity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacilityInstance {
    clients: Dataset,
    locations: Vec<Vec<f64>>,
    opening_costs: Vec<f64>,
    capacity: Option<usize>,
}

impl FacilityInstance {
    pub fn new(
        clients: Dataset,
        locations: Vec<Vec<f64>>,
        opening_costs: Vec<f64>,
        capacity: Option<usize>,
    ) -> Result<Self> {
        if locations.is_empty() {
            return Err(invalid("facility instance needs at least one location"));
        }
        if locations.len() != opening_costs.len() {
            return Err(invalid(format!(
                "{} locations but {} opening costs",
                locations.len(),
                opening_costs.len()
            )));
        }
        for (i, loc) in locations.iter().enumerate() {
            if loc.len() != clients.dim() {
                return Err(invalid(format!(
                    "location {i} has dimension {}, clients have {}",
                    loc.len(),
                    clients.dim()
                )));
            }
            if loc.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("location {i} has a non-finite coordinate")));
            }
        }
        if let Some(i) = opening_costs.iter().position(|&f| !(f >= 0.0 && f.is_finite())) {
            return Err(invalid(format!("opening cost of location {i} must be finite and >= 0")));
        }
        if let Some(u) = capacity {
            if u == 0 {
                return Err(invalid("capacity must be positive"));
            }
            if u * locations.len() < clients.len() {
                return Err(invalid(format!(
                    "capacity {u} x {} locations cannot serve {} clients",
                    locations.len(),
                    clients.len()
                )));
            }
        }
        Ok(FacilityInstance {
            clients,
            locations,
            opening_costs,
            capacity,
        })
    }

    pub fn clients(&self) -> &Dataset {
        &self.clients
    }

    pub fn locations(&self) -> &[Vec<f64>] {
        &self.locations
    }

    pub fn num_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn opening_costs(&self) -> &[f64] {
        &self.opening_costs
    }

    pub fn capacity(&self) -> Option<usize> {
        self.capacity
    }

    pub fn with_opening_costs(&self, opening_costs: Vec<f64>) -> Result<Self> {
        Self::new(self.clients.clone(), self.locations.clone(), opening_costs, self.capacity)
    }

    pub fn with_capacity(&self, capacity: Option<usize>) -> Result<Self> {
        Self::new(self.clients.clone(), self.locations.clone(), self.opening_costs.clone(), capacity)
    }

    pub fn costs(&self, mode: DistanceMode) -> CostMatrix {
        CostMatrix::between(mode, self.clients.points(), &self.locations)
    }

    pub fn opening_cost_of(&self, open: &[usize]) -> f64 {
        open.iter().map(|&v| self.opening_costs[v]).sum()
    }
}
