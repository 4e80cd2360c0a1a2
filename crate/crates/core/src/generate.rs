//! Instance generators: the two-group synthetic data, candidate location
//! proposals, and the structured instances used by the test-suite.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::facility::FacilityInstance;
use crate::instance::{build_dataset, Dataset};
use crate::metric::DistanceMode;
use crate::seed::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub majority_size: usize,
    pub minority_size: usize,
    pub majority_mean: f64,
    pub minority_mean: f64,
    pub stddev: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            majority_size: 250,
            minority_size: 50,
            majority_mean: 0.0,
            minority_mean: 3.0,
            stddev: 0.5,
        }
    }
}

pub const MAJORITY: &str = "majority";
pub const MINORITY: &str = "minority";

/// Two features per point, drawn from an isotropic normal around the group
/// mean. Majority points come first.
pub fn gen_synthetic(seed: u64, spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.majority_size == 0 || spec.minority_size == 0 {
        return Err(invalid("group sizes must be at least 1"));
    }
    if !(spec.stddev > 0.0 && spec.stddev.is_finite()) {
        return Err(invalid(format!("stddev must be positive, got {}", spec.stddev)));
    }
    let mut rng = rng(seed);
    let mut points = Vec::with_capacity(spec.majority_size + spec.minority_size);
    let mut labels = Vec::with_capacity(points.capacity());
    for (size, mean, label) in [
        (spec.majority_size, spec.majority_mean, MAJORITY),
        (spec.minority_size, spec.minority_mean, MINORITY),
    ] {
        let normal = Normal::new(mean, spec.stddev).map_err(|e| invalid(e.to_string()))?;
        for _ in 0..size {
            points.push(vec![normal.sample(&mut rng), normal.sample(&mut rng)]);
            labels.push(label.to_string());
        }
    }
    build_dataset(points, labels)
}

/// Greedy farthest-first traversal from `start`. Ties go to the lowest index.
pub fn farthest_first(points: &[Vec<f64>], t: usize, start: usize, mode: DistanceMode) -> Vec<usize> {
    let n = points.len();
    let t = t.min(n);
    if t == 0 {
        return Vec::new();
    }
    let mut chosen = vec![start];
    let mut taken = vec![false; n];
    taken[start] = true;
    let mut gap: Vec<f64> = points.iter().map(|p| mode.between(p, &points[start])).collect();
    while chosen.len() < t {
        let mut best = usize::MAX;
        for i in 0..n {
            if !taken[i] && (best == usize::MAX || gap[i] > gap[best]) {
                best = i;
            }
        }
        taken[best] = true;
        chosen.push(best);
        for i in 0..n {
            gap[i] = gap[i].min(mode.between(&points[i], &points[best]));
        }
    }
    chosen
}

/// `t` candidate facility locations: a farthest-first traversal of the
/// client positions from a seeded start point.
pub fn propose_locations(dataset: &Dataset, t: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if t == 0 || t > dataset.len() {
        return Err(invalid(format!("t = {t} must lie in 1..={}", dataset.len())));
    }
    let start = rng(seed).random_range(0..dataset.len());
    Ok(farthest_first(dataset.points(), t, start, DistanceMode::Euclidean)
        .into_iter()
        .map(|i| dataset.point(i).to_vec())
        .collect())
}

/// `m` singleton groups at pairwise distance `d`: the points `d/sqrt(2) e_i`.
pub fn gap_instance(m: usize, d: f64) -> Result<Dataset> {
    if m == 0 {
        return Err(invalid("gap instance needs m >= 1"));
    }
    let s = d / std::f64::consts::SQRT_2;
    let points = (0..m)
        .map(|i| {
            let mut p = vec![0.0; m];
            p[i] = s;
            p
        })
        .collect();
    build_dataset(points, (0..m).map(|i| format!("g{i}")).collect())
}

/// Index layout of [`ls_bad_instance`].
#[derive(Clone, Debug, PartialEq)]
pub struct LsBadLayout {
    pub a1: usize,
    pub a2: Vec<usize>,
    pub b1: usize,
    pub b2: Vec<usize>,
}

/// Two far-apart clusters `A = {a1} + A2` and `B = {b1} + B2`, with `|A2| =
/// |B2| = t`, points of `A2` pairwise `eps` apart and each at distance `d`
/// from `a1` (likewise for `B`). Groups are `{a1} + B2` and `{b1} + A2`.
///
/// Realized in `R^(t+2)`: `A2` is a scaled simplex, `a1` sits above its
/// centroid, and `B` is a copy shifted by `far`.
pub fn ls_bad_instance(t: usize, d: f64, eps: f64, far: f64) -> Result<(Dataset, LsBadLayout)> {
    if t < 2 {
        return Err(invalid("bad instance needs t >= 2"));
    }
    let spread = eps * eps / 2.0 * (1.0 - 1.0 / t as f64);
    if d * d < spread {
        return Err(invalid(format!("d = {d} too small for eps = {eps} and t = {t}")));
    }
    let dim = t + 2;
    let s = eps / std::f64::consts::SQRT_2;
    let height = (d * d - spread).sqrt();
    let cluster = |shift: f64| -> (Vec<f64>, Vec<Vec<f64>>) {
        let mut apex = vec![s / t as f64; dim];
        apex[t] = height;
        apex[t + 1] = shift;
        let base = (0..t)
            .map(|i| {
                let mut p = vec![0.0; dim];
                p[i] = s;
                p[t + 1] = shift;
                p
            })
            .collect();
        (apex, base)
    };
    let (a1, a2) = cluster(0.0);
    let (b1, b2) = cluster(far);
    let mut points = vec![a1];
    points.extend(a2);
    points.push(b1);
    points.extend(b2);
    let mut labels = vec!["x1".to_string()];
    labels.extend(std::iter::repeat_n("x2".to_string(), t));
    labels.push("x2".to_string());
    labels.extend(std::iter::repeat_n("x1".to_string(), t));
    let layout = LsBadLayout {
        a1: 0,
        a2: (1..=t).collect(),
        b1: t + 1,
        b2: (t + 2..2 * t + 2).collect(),
    };
    Ok((build_dataset(points, labels)?, layout))
}

/// `n` uniform points in `[0,1]^dim`; point `u` belongs to group `u mod m`.
pub fn random_instance(n: usize, m: usize, dim: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || m == 0 || m > n || dim == 0 {
        return Err(invalid(format!("need 1 <= m <= n and dim >= 1 (n={n}, m={m}, dim={dim})")));
    }
    let mut rng = rng(seed);
    let points = (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect();
    build_dataset(points, (0..n).map(|u| format!("g{}", u % m)).collect())
}

/// Random facility instance in the unit square with opening costs drawn
/// uniformly from `[0, max_cost]`.
pub fn random_facility_instance(
    clients: usize,
    locations: usize,
    m: usize,
    max_cost: f64,
    capacity: Option<usize>,
    seed: u64,
) -> Result<FacilityInstance> {
    let dataset = random_instance(clients, m, 2, seed)?;
    let mut rng = rng(crate::seed::derive_seed(seed, "locations"));
    let locs = (0..locations).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
    let costs = (0..locations).map(|_| rng.random::<f64>() * max_cost).collect();
    FacilityInstance::new(dataset, locs, costs, capacity)
}

pub const URBAN: &str = "urban";
pub const RURAL: &str = "rural";

/// Two-group planar instance: a dense "urban" group around the origin and a
/// sparse "rural" group spread over a wide square.
pub fn geo_two_group(urban: usize, rural: usize, seed: u64) -> Result<Dataset> {
    if urban == 0 || rural == 0 {
        return Err(invalid("group sizes must be at least 1"));
    }
    let mut rng = rng(seed);
    let normal = Normal::new(0.0, 0.3).map_err(|e| invalid(e.to_string()))?;
    let mut points = Vec::with_capacity(urban + rural);
    let mut labels = Vec::with_capacity(urban + rural);
    for _ in 0..urban {
        points.push(vec![normal.sample(&mut rng), normal.sample(&mut rng)]);
        labels.push(URBAN.to_string());
    }
    for _ in 0..rural {
        points.push(vec![rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)]);
        labels.push(RURAL.to_string());
    }
    build_dataset(points, labels)
}
