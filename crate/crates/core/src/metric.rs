use serde::{Deserialize, Serialize};

use crate::instance::Dataset;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// k-median.
    #[default]
    Euclidean,
    /// k-means; the triangle inequality no longer holds.
    SquaredEuclidean,
}

impl DistanceMode {
    pub fn between(self, a: &[f64], b: &[f64]) -> f64 {
        let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        match self {
            DistanceMode::Euclidean => sq.sqrt(),
            DistanceMode::SquaredEuclidean => sq,
        }
    }

    pub fn is_metric(self) -> bool {
        self == DistanceMode::Euclidean
    }
}

/// Distance from a client to a candidate site. Implemented by the point
/// metric (sites are dataset points) and by client-location matrices.
pub trait SiteDistance {
    fn num_clients(&self) -> usize;
    fn num_sites(&self) -> usize;
    fn dist(&self, client: usize, site: usize) -> f64;
}

/// Dense symmetric pairwise distances between the points of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricCache {
    mode: DistanceMode,
    n: usize,
    data: Vec<f64>,
}

pub fn build_metric(dataset: &Dataset, mode: DistanceMode) -> MetricCache {
    let n = dataset.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = mode.between(dataset.point(i), dataset.point(j));
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    MetricCache { mode, n, data }
}

impl MetricCache {
    /// Wraps a precomputed row-major matrix. Used for abstract metrics in
    /// tests; no symmetry check is made.
    pub fn from_matrix(mode: DistanceMode, n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "matrix must be n x n");
        MetricCache { mode, n, data }
    }

    pub fn mode(&self) -> DistanceMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Client-by-candidate matrix for the listed candidate points.
    pub fn restrict(&self, candidates: &[usize]) -> CostMatrix {
        let mut data = Vec::with_capacity(self.n * candidates.len());
        for u in 0..self.n {
            data.extend(candidates.iter().map(|&c| self.d(u, c)));
        }
        CostMatrix {
            rows: self.n,
            cols: candidates.len(),
            data,
        }
    }
}

impl SiteDistance for MetricCache {
    fn num_clients(&self) -> usize {
        self.n
    }

    fn num_sites(&self) -> usize {
        self.n
    }

    fn dist(&self, client: usize, site: usize) -> f64 {
        self.d(client, site)
    }
}

/// Dense client-by-site distances.
#[derive(Clone, Debug, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix must be rows x cols");
        CostMatrix { rows, cols, data }
    }

    pub fn between(mode: DistanceMode, clients: &[Vec<f64>], sites: &[Vec<f64>]) -> Self {
        let mut data = Vec::with_capacity(clients.len() * sites.len());
        for c in clients {
            data.extend(sites.iter().map(|s| mode.between(c, s)));
        }
        CostMatrix {
            rows: clients.len(),
            cols: sites.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.data[u * self.cols + v]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.data[u * self.cols..(u + 1) * self.cols]
    }
}

impl SiteDistance for CostMatrix {
    fn num_clients(&self) -> usize {
        self.rows
    }

    fn num_sites(&self) -> usize {
        self.cols
    }

    fn dist(&self, client: usize, site: usize) -> f64 {
        self.get(client, site)
    }
}
