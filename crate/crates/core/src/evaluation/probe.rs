//! Monte-Carlo estimate of per-point and per-group expected connection cost
//! of a randomized rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::Dataset;
use crate::seed::derive_indexed;
use crate::solution::IntegralSolution;

pub const MIN_DRAWS: usize = 100;
const CHUNK: usize = 64;

/// Sample mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub draws: usize,
    pub points: Vec<Estimate>,
    /// Group average connection cost.
    pub groups: Vec<Estimate>,
    pub centers: Estimate,
}

/// Running means and squared deviations (Welford), merged pairwise (Chan).
#[derive(Clone)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Moments {
            count: 0.0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.count += 1.0;
        for (i, &x) in values.iter().enumerate() {
            let delta = x - self.mean[i];
            self.mean[i] += delta / self.count;
            self.m2[i] += delta * (x - self.mean[i]);
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        if other.count == 0.0 {
            return self;
        }
        if self.count == 0.0 {
            return other.clone();
        }
        let total = self.count + other.count;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.count / total;
            self.m2[i] += other.m2[i] + delta * delta * self.count * other.count / total;
        }
        self.count = total;
        self
    }

    fn estimate(&self, i: usize) -> Estimate {
        let n = self.count;
        Estimate {
            mean: self.mean[i],
            se: (self.m2[i] / (n - 1.0) / n).max(0.0).sqrt(),
        }
    }
}

/// Runs `rounder` under `draws` seeds derived from `seed` and summarizes the
/// outcomes. Draws run in parallel chunks merged in a fixed order, so the
/// report depends only on the inputs.
pub fn faithfulness_probe<F>(dataset: &Dataset, draws: usize, seed: u64, rounder: F) -> Result<ProbeReport>
where
    F: Fn(u64) -> Result<IntegralSolution> + Sync,
{
    if draws < MIN_DRAWS {
        return Err(invalid(format!("probe needs at least {MIN_DRAWS} draws, got {draws}")));
    }
    let n = dataset.len();
    let m = dataset.num_groups();
    // Slots: points, then groups, then the center count.
    let slots = n + m + 1;
    let chunks: Vec<Moments> = (0..draws.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<Moments> {
            let mut acc = Moments::new(slots);
            let mut values = vec![0.0; slots];
            for draw in c * CHUNK..((c + 1) * CHUNK).min(draws) {
                let sol = rounder(derive_indexed(seed, draw as u64))?;
                if sol.connection.len() != n {
                    return Err(invalid("rounder returned a solution of the wrong size"));
                }
                values[..n].copy_from_slice(&sol.connection);
                for (g, members) in dataset.groups().iter().enumerate() {
                    values[n + g] = members.iter().map(|&u| sol.connection[u]).sum::<f64>() / members.len() as f64;
                }
                values[n + m] = sol.centers.len() as f64;
                acc.push(&values);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total = chunks.iter().fold(Moments::new(slots), |a, b| a.merge(b));
    Ok(ProbeReport {
        draws,
        points: (0..n).map(|u| total.estimate(u)).collect(),
        groups: (0..m).map(|g| total.estimate(n + g)).collect(),
        centers: total.estimate(n + m),
    })
}
