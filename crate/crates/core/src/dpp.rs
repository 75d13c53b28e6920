//! Dual-form L-ensemble kernels, elementary symmetric polynomials, and
//! k-DPP subset probabilities.
//!
//! A kernel is stored through its feature matrix `B` (feature dimension by
//! number of patterns). The primal kernel is `L = BᵀB`; all inference goes
//! through the much smaller dual `C = BBᵀ`, which has the same nonzero
//! eigenvalues.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Absolute floor below which an eigenvalue does not count toward the rank.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Relative floor (times the largest eigenvalue), for kernels whose scale
/// makes round-off larger than the absolute floor.
pub const RELATIVE_RANK_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct DualKernel {
    features: DMatrix<f64>,
    /// Pattern id to column of `features`, when patterns share columns.
    columns: Option<Vec<usize>>,
    dual: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    rank: usize,
    tolerance: f64,
}

impl DualKernel {
    /// Builds `C = BBᵀ` and its eigendecomposition (eigenvalues descending).
    pub fn from_features(features: DMatrix<f64>) -> Self {
        let dual = &features * features.transpose();
        Self::from_parts(features, None, dual)
    }

    /// Builds a kernel whose pattern `j` has feature column `distinct[:, columns[j]]`.
    ///
    /// Equivalent to [`from_features`](Self::from_features) on the expanded
    /// matrix, without materializing it.
    pub fn from_shared_columns(distinct: DMatrix<f64>, columns: Vec<usize>) -> Self {
        let mut mult = vec![0.0; distinct.ncols()];
        for &c in &columns {
            mult[c] += 1.0;
        }
        let mut weighted = distinct.clone();
        for (c, m) in mult.iter().enumerate() {
            weighted.column_mut(c).scale_mut(*m);
        }
        let dual = weighted * distinct.transpose();
        Self::from_parts(distinct, Some(columns), dual)
    }

    fn from_parts(features: DMatrix<f64>, columns: Option<Vec<usize>>, dual: DMatrix<f64>) -> Self {
        let dim = features.nrows();
        if dim == 0 {
            return DualKernel {
                features,
                columns,
                dual,
                eigenvalues: Vec::new(),
                eigenvectors: DMatrix::zeros(0, 0),
                rank: 0,
                tolerance: RANK_TOLERANCE,
            };
        }
        // symmetrize away round-off before the eigensolver
        let sym = (&dual + dual.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        let tolerance = RANK_TOLERANCE.max(RELATIVE_RANK_TOLERANCE * eigenvalues[0]);
        let rank = eigenvalues.iter().take_while(|&&l| l > tolerance).count();
        DualKernel {
            features,
            columns,
            dual,
            eigenvalues,
            eigenvectors,
            rank,
            tolerance,
        }
    }

    /// Builds `B` from per-pattern `(quality, unit diversity vector)` pairs.
    pub fn from_quality_diversity(dim: usize, columns: &[(f64, Vec<f64>)]) -> Self {
        let features = DMatrix::from_fn(dim, columns.len(), |r, c| columns[c].0 * columns[c].1[r]);
        Self::from_features(features)
    }

    /// Stored feature columns; see [`column_index`](Self::column_index).
    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    /// Column of [`features`](Self::features) holding pattern `j`.
    pub fn column_index(&self, j: usize) -> usize {
        match &self.columns {
            Some(map) => map[j],
            None => j,
        }
    }

    /// Feature vector of pattern `j`.
    pub fn column(&self, j: usize) -> DVector<f64> {
        self.features.column(self.column_index(j)).into_owned()
    }

    pub fn dual(&self) -> &DMatrix<f64> {
        &self.dual
    }

    /// All eigenvalues of `C`, descending, clamped at zero.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unit eigenvectors of `C` as columns, aligned with [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Eigenvalues above the rank tolerance.
    pub fn positive_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.rank]
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Feature dimension (rows of `B`).
    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    /// Number of patterns (columns of `B`).
    pub fn n_items(&self) -> usize {
        match &self.columns {
            Some(map) => map.len(),
            None => self.features.ncols(),
        }
    }

    /// Column norms of `B`, i.e. the pattern qualities when diversity vectors are unit.
    pub fn column_norms(&self) -> Vec<f64> {
        let norms: Vec<f64> = self.features.column_iter().map(|c| c.norm()).collect();
        (0..self.n_items()).map(|j| norms[self.column_index(j)]).collect()
    }

    /// The full primal kernel `L = BᵀB`. Only sensible for small collections.
    pub fn primal(&self) -> DMatrix<f64> {
        let all: Vec<usize> = (0..self.n_items()).collect();
        self.submatrix(&all)
    }

    /// `L_Y` for the given pattern ids.
    pub fn submatrix(&self, ids: &[usize]) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = ids.iter().map(|&i| self.column(i)).collect();
        DMatrix::from_fn(ids.len(), ids.len(), |r, c| cols[r].dot(&cols[c]))
    }

    pub fn subset_det(&self, ids: &[usize]) -> f64 {
        if ids.is_empty() {
            return 1.0;
        }
        self.submatrix(ids).determinant().max(0.0)
    }
}

/// Table of elementary symmetric polynomials: `get(k, n)` is `e_k` of the
/// first `n` eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EspTable {
    table: Vec<Vec<f64>>,
}

impl EspTable {
    pub fn get(&self, k: usize, n: usize) -> f64 {
        self.table[k][n]
    }

    pub fn max_k(&self) -> usize {
        self.table.len() - 1
    }

    pub fn max_n(&self) -> usize {
        self.table[0].len() - 1
    }

    /// `e_k` over all eigenvalues.
    pub fn total(&self, k: usize) -> f64 {
        self.table[k][self.max_n()]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.table
    }
}

/// `e[k][n] = e[k][n-1] + λ_n e[k-1][n-1]`, with `e[0][n] = 1`.
pub fn esp(eigenvalues: &[f64], k: usize) -> EspTable {
    let n = eigenvalues.len();
    let mut table = vec![vec![0.0; n + 1]; k + 1];
    table[0].fill(1.0);
    for l in 1..=k {
        for m in 1..=n {
            table[l][m] = table[l][m - 1] + eigenvalues[m - 1] * table[l - 1][m - 1];
        }
    }
    EspTable { table }
}

/// Natural logs of the same table, for spectra whose products overflow.
/// Zero entries are `-inf`.
pub(crate) fn log_esp(eigenvalues: &[f64], k: usize) -> Vec<Vec<f64>> {
    let n = eigenvalues.len();
    let mut table = vec![vec![f64::NEG_INFINITY; n + 1]; k + 1];
    table[0].fill(0.0);
    let log_add = |a: f64, b: f64| {
        if a == f64::NEG_INFINITY {
            return b;
        }
        if b == f64::NEG_INFINITY {
            return a;
        }
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        hi + (lo - hi).exp().ln_1p()
    };
    for l in 1..=k {
        for m in 1..=n {
            let take = eigenvalues[m - 1].ln() + table[l - 1][m - 1];
            table[l][m] = log_add(table[l][m - 1], take);
        }
    }
    table
}

/// k-DPP probability `det(L_Y) / e_k(λ)` of the pattern subset `ids`.
pub fn subset_probability(ids: &[usize], kernel: &DualKernel, k: usize) -> Result<f64> {
    if ids.len() != k {
        return Err(Error::Contract(format!(
            "subset has {} patterns, expected k={k}",
            ids.len()
        )));
    }
    if k > kernel.rank() {
        return Err(Error::InfeasibleK {
            k,
            available: kernel.rank(),
        });
    }
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) || sorted.last().is_some_and(|&i| i >= kernel.n_items()) {
        return Err(Error::Contract("subset ids must be distinct pattern ids".into()));
    }
    let norm = esp(kernel.positive_eigenvalues(), k).total(k);
    Ok(kernel.subset_det(ids) / norm)
}
