use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::metric::SiteDistance;

/// Opened sites and the site serving each client.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralSolution {
    /// Opened site ids, ascending.
    pub centers: Vec<usize>,
    /// Serving site of every client.
    pub assignment: Vec<usize>,
    /// Distance from every client to its serving site.
    pub connection: Vec<f64>,
}

impl IntegralSolution {
    /// Opens `centers` and sends every client to its nearest one (lowest id
    /// on ties).
    pub fn nearest(mut centers: Vec<usize>, d: &impl SiteDistance) -> Result<Self> {
        centers.sort_unstable();
        centers.dedup();
        if centers.is_empty() {
            return Err(invalid("a solution needs at least one open site"));
        }
        if let Some(&bad) = centers.iter().find(|&&c| c >= d.num_sites()) {
            return Err(invalid(format!("site {bad} out of range")));
        }
        let n = d.num_clients();
        let mut assignment = Vec::with_capacity(n);
        let mut connection = Vec::with_capacity(n);
        for u in 0..n {
            let mut best = centers[0];
            let mut best_d = d.dist(u, best);
            for &c in &centers[1..] {
                let dc = d.dist(u, c);
                if dc < best_d {
                    best = c;
                    best_d = dc;
                }
            }
            assignment.push(best);
            connection.push(best_d);
        }
        Ok(IntegralSolution {
            centers,
            assignment,
            connection,
        })
    }

    /// Uses a given assignment; every assigned site must be open.
    pub fn with_assignment(mut centers: Vec<usize>, assignment: Vec<usize>, d: &impl SiteDistance) -> Result<Self> {
        centers.sort_unstable();
        centers.dedup();
        if assignment.len() != d.num_clients() {
            return Err(invalid(format!(
                "assignment covers {} of {} clients",
                assignment.len(),
                d.num_clients()
            )));
        }
        if let Some(u) = assignment.iter().position(|a| centers.binary_search(a).is_err()) {
            return Err(invalid(format!("client {u} assigned to closed site {}", assignment[u])));
        }
        let connection = assignment.iter().enumerate().map(|(u, &a)| d.dist(u, a)).collect();
        Ok(IntegralSolution {
            centers,
            assignment,
            connection,
        })
    }

    pub fn total_connection(&self) -> f64 {
        self.connection.iter().sum()
    }

    /// Number of clients served by each open site.
    pub fn loads(&self) -> BTreeMap<usize, usize> {
        let mut loads: BTreeMap<usize, usize> = self.centers.iter().map(|&c| (c, 0)).collect();
        for a in &self.assignment {
            *loads.entry(*a).or_default() += 1;
        }
        loads
    }

    pub fn max_load(&self) -> usize {
        self.loads().values().copied().max().unwrap_or(0)
    }
}
