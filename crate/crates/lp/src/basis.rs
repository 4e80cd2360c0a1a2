//! Product-form representation of the basis inverse.
//!
//! The basis is kept as `B = D * E_1 * ... * E_k`, where `D` is a diagonal
//! of unit-column signs and every `E_j` is an identity matrix whose column
//! `r_j` was replaced by the transformed entering column. Solves with `B`
//! and `B^T` walk the eta file forward or backward; refactorization rebuilds
//! the file from the current basic columns.

const DROP_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
struct Eta {
    row: usize,
    pivot: f64,
    /// Off-pivot entries of the transformed column.
    entries: Vec<(usize, f64)>,
}

/// Dense values plus the list of positions that were ever touched, so that
/// clearing and scanning cost O(nnz) instead of O(m).
#[derive(Clone, Debug)]
pub(crate) struct SparseVec {
    pub(crate) val: Vec<f64>,
    pub(crate) nz: Vec<usize>,
    mark: Vec<bool>,
}

impl SparseVec {
    pub(crate) fn new(m: usize) -> Self {
        Self {
            val: vec![0.0; m],
            nz: Vec::new(),
            mark: vec![false; m],
        }
    }

    pub(crate) fn clear(&mut self) {
        for &i in &self.nz {
            self.val[i] = 0.0;
            self.mark[i] = false;
        }
        self.nz.clear();
    }

    pub(crate) fn add(&mut self, i: usize, v: f64) {
        if !self.mark[i] {
            self.mark[i] = true;
            self.nz.push(i);
        }
        self.val[i] += v;
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BasisInverse {
    diag: Vec<f64>,
    etas: Vec<Eta>,
}

impl BasisInverse {
    pub(crate) fn from_diagonal(diag: Vec<f64>) -> Self {
        Self {
            diag,
            etas: Vec::new(),
        }
    }

    pub(crate) fn nnz(&self) -> usize {
        self.etas.iter().map(|e| e.entries.len() + 1).sum()
    }

    /// `x <- B^{-1} x`.
    pub(crate) fn ftran(&self, x: &mut [f64]) {
        for (xi, d) in x.iter_mut().zip(&self.diag) {
            *xi /= d;
        }
        for eta in &self.etas {
            let xr = x[eta.row];
            if xr == 0.0 {
                continue;
            }
            let xr = xr / eta.pivot;
            x[eta.row] = xr;
            for &(i, v) in &eta.entries {
                x[i] -= v * xr;
            }
        }
    }

    /// Sparse variant of [`Self::ftran`].
    pub(crate) fn ftran_sparse(&self, x: &mut SparseVec) {
        for &i in &x.nz {
            x.val[i] /= self.diag[i];
        }
        for eta in &self.etas {
            let xr = x.val[eta.row];
            if xr == 0.0 {
                continue;
            }
            let xr = xr / eta.pivot;
            x.val[eta.row] = xr;
            for &(i, v) in &eta.entries {
                x.add(i, -v * xr);
            }
        }
    }

    /// `y <- B^{-T} y`, i.e. `y^T <- y^T B^{-1}`.
    pub(crate) fn btran(&self, y: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut acc = y[eta.row];
            for &(i, v) in &eta.entries {
                acc -= v * y[i];
            }
            y[eta.row] = acc / eta.pivot;
        }
        for (yi, d) in y.iter_mut().zip(&self.diag) {
            *yi /= d;
        }
    }
}

impl BasisInverse {
    /// Records a pivot on `row` with a sparse transformed column.
    pub(crate) fn push_sparse(&mut self, row: usize, alpha: &SparseVec) {
        let entries = alpha
            .nz
            .iter()
            .filter(|&&i| i != row && alpha.val[i].abs() > DROP_TOL)
            .map(|&i| (i, alpha.val[i]))
            .collect();
        self.etas.push(Eta {
            row,
            pivot: alpha.val[row],
            entries,
        });
    }
}
