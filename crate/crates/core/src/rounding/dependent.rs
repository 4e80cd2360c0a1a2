//! Dependent rounding in four phases: filtering, bundling, matching and
//! sampling.

use log::warn;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::metric::MetricCache;
use crate::models::FractionalClustering;
use crate::rounding::filter::{filter_points, FilteredSet};
use crate::seed::rng;
use crate::solution::IntegralSolution;

const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependentOptions {
    /// Top up or trim the sampled centers to exactly `k`.
    pub exact_k: bool,
    /// Never open mass left outside the bundles.
    pub discard_residual: bool,
}

/// Fractional centers attributed to one filtered point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub anchor: usize,
    /// LP columns in the bundle, nearest to the anchor first.
    pub facilities: Vec<usize>,
    /// Share of each column's `y` held by the bundle.
    pub weights: Vec<f64>,
    /// Total `y` of the captured columns.
    pub mass: f64,
    /// `min(1, mass)`: the probability that the bundle opens a center.
    pub volume: f64,
}

/// The deterministic part of the rounding, shared by all draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependentPlan {
    pub filtered: FilteredSet,
    /// One bundle per filtered point, in selection order.
    pub bundles: Vec<Bundle>,
    /// Matched bundle pairs in matching order.
    pub pairs: Vec<(usize, usize)>,
    pub leftover: Option<usize>,
    /// `y` mass outside every bundle, per column: columns in no bundle and the
    /// part of a bundle beyond volume 1.
    pub residual: Vec<(usize, f64)>,
}

/// Outcome of one draw.
#[derive(Clone, Debug, PartialEq)]
pub struct DependentDraw {
    pub bundle_open: Vec<bool>,
    /// Opened LP columns, ascending.
    pub columns: Vec<usize>,
}

/// `(both, first only, second only)` for a matched pair with volumes
/// `(g1, g2)`: the unique law with marginals `g1`, `g2` that never leaves both
/// bundles closed.
pub fn pair_probabilities(g1: f64, g2: f64) -> Result<[f64; 3]> {
    let p = [g1 + g2 - 1.0, 1.0 - g2, 1.0 - g1];
    if p.iter().any(|&x| !(-PROB_TOL..=1.0 + PROB_TOL).contains(&x)) {
        return Err(CoreError::Invariant(format!(
            "pair volumes ({g1}, {g2}) give probabilities {p:?} outside [0, 1]"
        )));
    }
    Ok(p.map(|x| x.clamp(0.0, 1.0)))
}

pub fn plan_dependent(frac: &FractionalClustering, metric: &MetricCache) -> Result<DependentPlan> {
    let filtered = filter_points(frac, metric, 4.0);
    let members = &filtered.members;
    let site = |v: usize| frac.site_ids[v];

    // Half the distance from each anchor to its nearest other anchor.
    let half: Vec<f64> = members
        .iter()
        .map(|&u| {
            members
                .iter()
                .filter(|&&w| w != u)
                .map(|&w| metric.d(u, w))
                .fold(f64::INFINITY, f64::min)
                / 2.0
        })
        .collect();

    let mut bundles: Vec<Bundle> = members
        .iter()
        .map(|&u| Bundle {
            anchor: u,
            facilities: Vec::new(),
            weights: Vec::new(),
            mass: 0.0,
            volume: 0.0,
        })
        .collect();
    let mut residual = Vec::new();
    for v in 0..frac.t {
        if frac.y[v] <= 0.0 {
            continue;
        }
        // Nearest anchor, lowest selection position on ties.
        let mut best = 0;
        for (i, &u) in members.iter().enumerate().skip(1) {
            if metric.d(u, site(v)) < metric.d(members[best], site(v)) {
                best = i;
            }
        }
        if metric.d(members[best], site(v)) < half[best] {
            bundles[best].facilities.push(v);
            bundles[best].mass += frac.y[v];
        } else {
            residual.push((v, frac.y[v]));
        }
    }
    for b in &mut bundles {
        let u = b.anchor;
        b.facilities
            .sort_by(|&p, &q| metric.d(u, site(p)).total_cmp(&metric.d(u, site(q))).then(p.cmp(&q)));
        // The bundle keeps the nearest unit of mass.
        let mut acc = 0.0;
        for &v in &b.facilities {
            let w = frac.y[v].min(1.0 - acc).max(0.0);
            acc += w;
            b.weights.push(w);
            if frac.y[v] - w > PROB_TOL {
                residual.push((v, frac.y[v] - w));
            }
        }
        b.volume = acc;
        if b.volume < 0.5 - PROB_TOL {
            let msg = format!("bundle of point {} has volume {} below 1/2", b.anchor, b.volume);
            if metric.mode().is_metric() {
                return Err(CoreError::Invariant(msg));
            }
            warn!("{msg} (squared distances)");
        }
    }
    residual.sort_by_key(|r| r.0);

    // Greedy matching of the closest unmatched anchors.
    let s = members.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(s * s.saturating_sub(1) / 2);
    for i in 0..s {
        for j in i + 1..s {
            edges.push((metric.d(members[i], members[j]), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut matched = vec![false; s];
    let mut pairs = Vec::with_capacity(s / 2);
    for (_, i, j) in edges {
        if !matched[i] && !matched[j] {
            matched[i] = true;
            matched[j] = true;
            pairs.push((i, j));
        }
    }
    let leftover = (0..s).find(|&i| !matched[i]);
    Ok(DependentPlan {
        filtered,
        bundles,
        pairs,
        leftover,
        residual,
    })
}

impl DependentPlan {
    /// Expected number of center picks, counting a column opened twice twice.
    pub fn expected_centers(&self, discard_residual: bool) -> f64 {
        let bundled: f64 = self.bundles.iter().map(|b| b.volume).sum();
        if discard_residual {
            bundled
        } else {
            bundled + self.residual.iter().map(|r| r.1).sum::<f64>()
        }
    }

    /// One draw. Residual mass opens independently per column unless
    /// `discard_residual` is set.
    pub fn sample(&self, rng: &mut impl Rng, discard_residual: bool) -> Result<DependentDraw> {
        let mut open = vec![false; self.bundles.len()];
        for &(a, b) in &self.pairs {
            let [both, first, _] = pair_probabilities(self.bundles[a].volume, self.bundles[b].volume)?;
            let x: f64 = rng.random();
            if x < both {
                open[a] = true;
                open[b] = true;
            } else if x < both + first {
                open[a] = true;
            } else {
                open[b] = true;
            }
        }
        if let Some(l) = self.leftover {
            open[l] = rng.random::<f64>() < self.bundles[l].volume;
        }
        let mut columns = Vec::new();
        for (i, b) in self.bundles.iter().enumerate() {
            if open[i] && !b.facilities.is_empty() {
                // Pick a center with probability weight / volume.
                let x = rng.random::<f64>() * b.volume;
                let mut acc = 0.0;
                let mut pick = *b.facilities.last().unwrap();
                for (&v, &w) in b.facilities.iter().zip(&b.weights) {
                    acc += w;
                    if x < acc {
                        pick = v;
                        break;
                    }
                }
                columns.push(pick);
            }
        }
        if !discard_residual {
            for &(v, p) in &self.residual {
                if rng.random::<f64>() < p {
                    columns.push(v);
                }
            }
        }
        columns.sort_unstable();
        columns.dedup();
        Ok(DependentDraw {
            bundle_open: open,
            columns,
        })
    }
}

fn total_cost(frac: &FractionalClustering, metric: &MetricCache, columns: &[usize]) -> f64 {
    (0..frac.n)
        .map(|u| {
            columns
                .iter()
                .map(|&c| metric.d(u, frac.site_ids[c]))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Brings the opened column set to exactly `k`: opens the highest-`y`
/// unopened columns (then the greedy best by total connection cost once no
/// positive `y` is left), and closes the column whose removal raises the
/// total connection cost least.
pub fn repair_to_k(frac: &FractionalClustering, metric: &MetricCache, columns: &mut Vec<usize>, k: usize) {
    let k = k.min(frac.t);
    while columns.len() < k {
        let mut best: Option<usize> = None;
        for v in 0..frac.t {
            if frac.y[v] > 0.0 && !columns.contains(&v) && best.is_none_or(|b| frac.y[v] > frac.y[b]) {
                best = Some(v);
            }
        }
        let pick = best.unwrap_or_else(|| {
            let mut best = (f64::INFINITY, usize::MAX);
            for v in 0..frac.t {
                if columns.contains(&v) {
                    continue;
                }
                columns.push(v);
                let c = total_cost(frac, metric, columns);
                columns.pop();
                if c < best.0 {
                    best = (c, v);
                }
            }
            best.1
        });
        columns.push(pick);
        columns.sort_unstable();
    }
    while columns.len() > k {
        let mut best = (f64::INFINITY, 0);
        for i in 0..columns.len() {
            let rest: Vec<usize> = columns.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &c)| c).collect();
            let c = total_cost(frac, metric, &rest);
            if c < best.0 {
                best = (c, i);
            }
        }
        columns.remove(best.1);
    }
}

/// One dependent-rounding draw. Opens `k` centers in expectation, or exactly
/// `k` with `options.exact_k`. Points are served by their nearest center.
pub fn round_dependent(
    frac: &FractionalClustering,
    metric: &MetricCache,
    k: usize,
    seed: u64,
    options: DependentOptions,
) -> Result<IntegralSolution> {
    let plan = plan_dependent(frac, metric)?;
    round_with_plan(&plan, frac, metric, k, seed, options)
}

pub fn round_with_plan(
    plan: &DependentPlan,
    frac: &FractionalClustering,
    metric: &MetricCache,
    k: usize,
    seed: u64,
    options: DependentOptions,
) -> Result<IntegralSolution> {
    let mut draw = plan.sample(&mut rng(seed), options.discard_residual)?;
    if options.exact_k {
        repair_to_k(frac, metric, &mut draw.columns, k);
    }
    if draw.columns.is_empty() {
        return Err(CoreError::Invariant("dependent rounding opened no center".into()));
    }
    IntegralSolution::nearest(draw.columns.iter().map(|&c| frac.site_ids[c]).collect(), metric)
}
