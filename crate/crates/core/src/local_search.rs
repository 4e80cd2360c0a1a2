//! Single-swap local search on the largest group cost.

use log::warn;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evaluation::costs::CostKind;
use crate::instance::Dataset;
use crate::metric::MetricCache;
use crate::models::RelErrorCertificate;
use crate::seed::rng;
use crate::solution::IntegralSolution;

pub const IMPROVEMENT_TOL: f64 = 1e-9;
pub const MAX_SWAPS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchResult {
    pub solution: IntegralSolution,
    pub objective: f64,
    pub swaps: usize,
    /// True when the swap cap stopped the search early.
    pub capped: bool,
}

/// Distances to the nearest and second-nearest open center of each point.
struct Cache {
    nearest: Vec<usize>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl Cache {
    fn build(metric: &MetricCache, centers: &[usize]) -> Self {
        let n = metric.len();
        let mut c = Cache {
            nearest: vec![0; n],
            d1: vec![f64::INFINITY; n],
            d2: vec![f64::INFINITY; n],
        };
        for u in 0..n {
            for &s in centers {
                let d = metric.d(u, s);
                if d < c.d1[u] {
                    c.d2[u] = c.d1[u];
                    c.d1[u] = d;
                    c.nearest[u] = s;
                } else if d < c.d2[u] {
                    c.d2[u] = d;
                }
            }
        }
        c
    }
}

struct Objective<'a> {
    group_of: &'a [usize],
    scales: Vec<f64>,
}

impl Objective<'_> {
    fn eval(&self, dist: impl Fn(usize) -> f64, sums: &mut [f64]) -> f64 {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (u, &g) in self.group_of.iter().enumerate() {
            sums[g] += dist(u);
        }
        sums.iter()
            .zip(&self.scales)
            .map(|(s, w)| s * w)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Runs local search from `start`, or from a seeded random `k`-subset of the
/// allowed centers. Swaps are tried centers ascending, then replacements
/// ascending, and the first one improving the objective by more than
/// [`IMPROVEMENT_TOL`] is taken.
#[allow(clippy::too_many_arguments)]
pub fn ls_fair(
    dataset: &Dataset,
    metric: &MetricCache,
    k: usize,
    kind: CostKind,
    certificate: Option<&RelErrorCertificate>,
    seed: u64,
    start: Option<&[usize]>,
    candidates: Option<&[usize]>,
) -> Result<LocalSearchResult> {
    let n = dataset.len();
    if metric.len() != n {
        return Err(invalid("metric and dataset sizes differ"));
    }
    let pool: Vec<usize> = match candidates {
        Some(c) => {
            let mut c = c.to_vec();
            c.sort_unstable();
            c.dedup();
            if let Some(&bad) = c.iter().find(|&&v| v >= n) {
                return Err(invalid(format!("candidate {bad} out of range")));
            }
            c
        }
        None => (0..n).collect(),
    };
    if k == 0 || k > pool.len() {
        return Err(invalid(format!("k = {k} must lie in 1..={}", pool.len())));
    }
    let mut centers: Vec<usize> = match start {
        Some(s) => {
            let mut s = s.to_vec();
            s.sort_unstable();
            s.dedup();
            if s.len() != k {
                return Err(invalid(format!("start has {} distinct centers, expected {k}", s.len())));
            }
            if let Some(&bad) = s.iter().find(|v| pool.binary_search(v).is_err()) {
                return Err(invalid(format!("start center {bad} is not an allowed center")));
            }
            s
        }
        None => {
            let mut s: Vec<usize> = sample(&mut rng(seed), pool.len(), k).into_iter().map(|i| pool[i]).collect();
            s.sort_unstable();
            s
        }
    };
    let obj = Objective {
        group_of: dataset.group_ids(),
        scales: kind.scales(dataset, certificate)?,
    };
    let mut sums = vec![0.0; dataset.num_groups()];
    let mut cache = Cache::build(metric, &centers);
    let mut current = obj.eval(|u| cache.d1[u], &mut sums);
    let mut swaps = 0;
    let mut capped = false;
    'search: loop {
        for i in 0..centers.len() {
            let out = centers[i];
            for &p in &pool {
                if centers.binary_search(&p).is_ok() {
                    continue;
                }
                let value = obj.eval(
                    |u| {
                        let kept = if cache.nearest[u] == out { cache.d2[u] } else { cache.d1[u] };
                        kept.min(metric.d(u, p))
                    },
                    &mut sums,
                );
                if value < current - IMPROVEMENT_TOL {
                    if swaps == MAX_SWAPS {
                        warn!("local search stopped after {MAX_SWAPS} swaps");
                        capped = true;
                        break 'search;
                    }
                    centers[i] = p;
                    centers.sort_unstable();
                    cache = Cache::build(metric, &centers);
                    current = obj.eval(|u| cache.d1[u], &mut sums);
                    swaps += 1;
                    continue 'search;
                }
            }
        }
        break;
    }
    let solution = IntegralSolution::nearest(centers, metric)?;
    Ok(LocalSearchResult {
        solution,
        objective: current,
        swaps,
        capped,
    })
}

/// Best single swap improvement available from `centers`, if any exceeds
/// [`IMPROVEMENT_TOL`]. Used to certify local optimality.
pub fn best_swap_gain(
    dataset: &Dataset,
    metric: &MetricCache,
    centers: &[usize],
    kind: CostKind,
    certificate: Option<&RelErrorCertificate>,
) -> Result<Option<(usize, usize, f64)>> {
    let obj = Objective {
        group_of: dataset.group_ids(),
        scales: kind.scales(dataset, certificate)?,
    };
    let mut sums = vec![0.0; dataset.num_groups()];
    let base = obj.eval(|u| centers.iter().map(|&c| metric.d(u, c)).fold(f64::INFINITY, f64::min), &mut sums);
    let mut best: Option<(usize, usize, f64)> = None;
    for &out in centers {
        for p in (0..dataset.len()).filter(|p| !centers.contains(p)) {
            let swapped: Vec<usize> = centers.iter().map(|&c| if c == out { p } else { c }).collect();
            let v = obj.eval(
                |u| swapped.iter().map(|&c| metric.d(u, c)).fold(f64::INFINITY, f64::min),
                &mut sums,
            );
            let gain = base - v;
            if gain > IMPROVEMENT_TOL && best.is_none_or(|b| gain > b.2) {
                best = Some((out, p, gain));
            }
        }
    }
    Ok(best)
}
