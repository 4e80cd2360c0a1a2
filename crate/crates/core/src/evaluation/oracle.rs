//! Exhaustive optima for small instances.

use crate::error::{invalid, CoreError, Result};
use crate::evaluation::costs::CostKind;
use crate::facility::FacilityInstance;
use crate::instance::Dataset;
use crate::metric::{CostMatrix, MetricCache};
use crate::models::{Fairness, RelErrorCertificate};
use crate::rounding::transport::transportation_assign;

pub const MAX_SUBSETS: f64 = 1e6;
pub const MAX_OPEN_SETS: usize = 100_000;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Advances `idx` to the next `k`-subset of `0..n` in lexicographic order.
fn next_subset(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
        return false;
    };
    idx[i] += 1;
    for j in i + 1..k {
        idx[j] = idx[j - 1] + 1;
    }
    true
}

/// Minimum over all `k`-subsets of `candidates` (all points by default) of
/// the largest group cost. Returns the value and the lexicographically first
/// optimal center set.
pub fn brute_force_fair_opt(
    dataset: &Dataset,
    metric: &MetricCache,
    k: usize,
    kind: CostKind,
    certificate: Option<&RelErrorCertificate>,
    candidates: Option<&[usize]>,
) -> Result<(f64, Vec<usize>)> {
    let pool: Vec<usize> = candidates.map_or_else(|| (0..dataset.len()).collect(), <[usize]>::to_vec);
    if k == 0 || k > pool.len() {
        return Err(invalid(format!("k = {k} must lie in 1..={}", pool.len())));
    }
    let count = binomial(pool.len(), k);
    if count > MAX_SUBSETS {
        return Err(CoreError::TooLarge(format!(
            "{count} center sets exceed the enumeration limit {MAX_SUBSETS}"
        )));
    }
    let scales = kind.scales(dataset, certificate)?;
    let mut sums = vec![0.0; dataset.num_groups()];
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = (f64::INFINITY, Vec::new());
    loop {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for u in 0..dataset.len() {
            let d = idx.iter().map(|&i| metric.d(u, pool[i])).fold(f64::INFINITY, f64::min);
            sums[dataset.group_of(u)] += d;
        }
        let value = sums.iter().zip(&scales).map(|(s, w)| s * w).fold(f64::NEG_INFINITY, f64::max);
        if value < best.0 {
            best = (value, idx.iter().map(|&i| pool[i]).collect());
        }
        if !next_subset(&mut idx, pool.len()) {
            break;
        }
    }
    Ok(best)
}

/// Objective of an open set: shared opening cost plus the largest group
/// average (or the overall average under [`Fairness::Aggregate`]).
pub fn facility_objective(
    instance: &FacilityInstance,
    fairness: Fairness,
    open: &[usize],
    connection: &[f64],
) -> f64 {
    let clients = instance.clients();
    let opening = instance.opening_cost_of(open) / clients.len() as f64;
    let service = match fairness {
        Fairness::Aggregate => connection.iter().sum::<f64>() / clients.len() as f64,
        Fairness::PerGroup => clients
            .groups()
            .iter()
            .map(|g| g.iter().map(|&u| connection[u]).sum::<f64>() / g.len() as f64)
            .fold(f64::NEG_INFINITY, f64::max),
    };
    opening + service
}

/// Minimum objective over all non-empty open sets. Uncapacitated clients go
/// to their nearest open location; with a capacity the assignment is the
/// minimum-total-distance transportation solution at cap `U`. Returns the
/// value and the first optimal set in bitmask order.
pub fn brute_force_facility_opt(
    instance: &FacilityInstance,
    costs: &CostMatrix,
    fairness: Fairness,
) -> Result<(f64, Vec<usize>)> {
    let l = instance.num_locations();
    if l >= usize::BITS as usize || (1usize << l) > MAX_OPEN_SETS {
        return Err(CoreError::TooLarge(format!(
            "2^{l} open sets exceed the enumeration limit {MAX_OPEN_SETS}"
        )));
    }
    let n = costs.rows();
    let mut best: (f64, Vec<usize>) = (f64::INFINITY, Vec::new());
    for mask in 1usize..(1 << l) {
        let open: Vec<usize> = (0..l).filter(|&v| mask >> v & 1 == 1).collect();
        let connection: Vec<f64> = match instance.capacity() {
            None => (0..n)
                .map(|u| open.iter().map(|&v| costs.get(u, v)).fold(f64::INFINITY, f64::min))
                .collect(),
            Some(cap) => {
                if open.len() * cap < n {
                    continue;
                }
                let (assignment, _) = transportation_assign(&open, cap, costs)?;
                assignment.iter().enumerate().map(|(u, &v)| costs.get(u, v)).collect()
            }
        };
        let value = facility_objective(instance, fairness, &open, &connection);
        if value < best.0 {
            best = (value, open);
        }
    }
    if best.1.is_empty() {
        return Err(CoreError::Infeasible("no open set can serve every client".into()));
    }
    Ok(best)
}
