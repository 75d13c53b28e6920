//! Mixed two-phase k-DPP sampling over explicit and implicit kernels.
//!
//! Phase one picks `k` eigen-indices with the weight-mixed elementary
//! marginals; phase two picks patterns one at a time from the mixed
//! projection probabilities, shrinking each component's basis after every
//! pick. Basis vectors are carried in primal coordinates (`W = V̂ᵀB`), which
//! is all the per-step probabilities need.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dpp::{log_esp, DualKernel};
use crate::error::{Error, Result};
use crate::implicit::ImplicitModel;
use crate::miner::PatternCollection;
use crate::rng::{seeded, sub_seed, NspRng};

/// Selection mass below which a component cannot reduce its basis along a pick.
pub const DEGENERATE_MASS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixWeights {
    pub w_e: f64,
    pub w_i: f64,
}

impl MixWeights {
    pub fn new(w_e: f64, w_i: f64) -> Result<Self> {
        if !(w_e >= 0.0 && w_i >= 0.0 && ((w_e + w_i) - 1.0).abs() < 1e-9) {
            return Err(Error::Config(format!(
                "weights must be nonnegative and sum to 1, got ({w_e}, {w_i})"
            )));
        }
        Ok(MixWeights { w_e, w_i })
    }

    pub fn explicit_only() -> Self {
        MixWeights { w_e: 1.0, w_i: 0.0 }
    }

    /// `(f̄/(f̄+r̄), r̄/(f̄+r̄))`, or an even split when both are zero.
    pub fn from_means(f_bar: f64, r_bar: f64) -> Self {
        let total = f_bar + r_bar;
        if total <= 0.0 {
            return MixWeights { w_e: 0.5, w_i: 0.5 };
        }
        MixWeights {
            w_e: f_bar / total,
            w_i: r_bar / total,
        }
    }
}

/// Weights from mean support and mean implicit quality over the whole collection.
pub fn mix_weights(coll: &PatternCollection, model: &ImplicitModel) -> Result<MixWeights> {
    if coll.is_empty() {
        return Err(Error::Contract("empty pattern collection".into()));
    }
    let n = coll.len() as f64;
    let f_bar = coll.supports().iter().sum::<f64>() / n;
    let r_bar = (0..coll.len()).map(|id| model.quality(id)).sum::<f64>() / n;
    Ok(MixWeights::from_means(f_bar, r_bar))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionMode {
    /// Per-step mixing of both components.
    Algorithm1,
    /// Pick one component by weight, then sample it exactly.
    ExactMixture,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub pattern: usize,
    /// Normalized probability of the pick.
    pub probability: f64,
    /// Selection mass over unchosen patterns before normalization.
    pub raw_mass: f64,
    /// Components that could not reduce their basis along the pick.
    pub degenerate: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Rank of each component kernel.
    pub ranks: Vec<usize>,
    /// Eigen-indices chosen in the first phase, per component.
    pub indices: Vec<usize>,
    /// Component drawn in exact-mixture mode.
    pub component: Option<usize>,
    pub steps: Vec<StepDiagnostics>,
    /// Set when no component had mass left and a uniform pick was used.
    pub uniform_fallbacks: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selector: String,
    /// Pattern ids in pick order.
    pub chosen: Vec<usize>,
    pub seed: Option<u64>,
    pub weights: Option<MixWeights>,
    pub mode: Option<SelectionMode>,
    pub diagnostics: Diagnostics,
}

impl SelectionResult {
    pub fn deterministic(selector: &str, chosen: Vec<usize>) -> Self {
        SelectionResult {
            selector: selector.to_string(),
            chosen,
            seed: None,
            weights: None,
            mode: None,
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn sorted_ids(&self) -> Vec<usize> {
        let mut ids = self.chosen.clone();
        ids.sort_unstable();
        ids
    }
}

struct Prepared<'a> {
    weight: f64,
    kernel: &'a DualKernel,
    /// Positive eigenvalues padded with zeros to the common length.
    log_lambda: Vec<f64>,
    log_e: Vec<Vec<f64>>,
    /// How many patterns use each stored feature column.
    multiplicity: Vec<f64>,
}

/// A reusable k-DPP sampler over weighted kernel components.
pub struct MixtureSampler<'a> {
    components: Vec<Prepared<'a>>,
    weights: Vec<f64>,
    k: usize,
    n_patterns: usize,
    n_v: usize,
}

impl<'a> MixtureSampler<'a> {
    /// Components with zero weight are ignored. Fails when `k` exceeds the
    /// smallest rank among the remaining components or the collection size.
    pub fn new(components: &[(f64, &'a DualKernel)], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Contract("k must be at least 1".into()));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| !(c.0 >= 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config("component weights must be nonnegative and sum to 1".into()));
        }
        let active: Vec<(f64, &DualKernel)> = components.iter().copied().filter(|c| c.0 > 0.0).collect();
        let n_patterns = active[0].1.n_items();
        if active.iter().any(|c| c.1.n_items() != n_patterns) {
            return Err(Error::Contract("component kernels cover different collections".into()));
        }
        let available = active.iter().map(|c| c.1.rank()).min().unwrap().min(n_patterns);
        if k > available {
            return Err(Error::InfeasibleK { k, available });
        }
        let n_v = active.iter().map(|c| c.1.rank()).max().unwrap();
        let prepared = active
            .iter()
            .map(|&(weight, kernel)| {
                let mut lambda = kernel.positive_eigenvalues().to_vec();
                lambda.resize(n_v, 0.0);
                let log_e = log_esp(&lambda, k);
                let mut multiplicity = vec![0.0; kernel.features().ncols()];
                for j in 0..n_patterns {
                    multiplicity[kernel.column_index(j)] += 1.0;
                }
                Prepared {
                    weight,
                    kernel,
                    log_lambda: lambda.iter().map(|l| l.ln()).collect(),
                    log_e,
                    multiplicity,
                }
            })
            .collect::<Vec<_>>();
        let weights = prepared.iter().map(|c| c.weight).collect();
        Ok(MixtureSampler {
            components: prepared,
            weights,
            k,
            n_patterns,
            n_v,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Draws eigen-indices (0-based, descending) with the mixed marginals.
    pub fn sample_indices<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        sample_indices_with(&self.components, self.k, self.n_v, rng)
    }

    /// Analytic probability that eigen-index `n` (0-based) is accepted when
    /// `remaining` indices are still to be drawn among the first `n + 1`.
    pub fn index_marginal(&self, remaining: usize, n: usize) -> f64 {
        mixed_marginal(&self.components, remaining, n + 1)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, mode: SelectionMode) -> SelectionResult {
        let mut diagnostics = Diagnostics {
            ranks: self.components.iter().map(|c| c.kernel.rank()).collect(),
            ..Default::default()
        };
        let chosen = match mode {
            SelectionMode::Algorithm1 => {
                let j = self.sample_indices(rng);
                diagnostics.indices = j.clone();
                self.select_patterns(&self.components, &j, rng, &mut diagnostics)
            }
            SelectionMode::ExactMixture => {
                let d = WeightedIndex::new(&self.weights).expect("validated weights").sample(rng);
                diagnostics.component = Some(d);
                let single = [Prepared {
                    weight: 1.0,
                    kernel: self.components[d].kernel,
                    log_lambda: self.components[d].log_lambda.clone(),
                    log_e: self.components[d].log_e.clone(),
                    multiplicity: self.components[d].multiplicity.clone(),
                }];
                let j = sample_indices_with(&single, self.k, self.n_v, rng);
                diagnostics.indices = j.clone();
                self.select_patterns(&single, &j, rng, &mut diagnostics)
            }
        };
        SelectionResult {
            selector: String::new(),
            chosen,
            seed: None,
            weights: None,
            mode: Some(mode),
            diagnostics,
        }
    }

    fn select_patterns<R: Rng>(
        &self,
        components: &[Prepared],
        indices: &[usize],
        rng: &mut R,
        diagnostics: &mut Diagnostics,
    ) -> Vec<usize> {
        let mut bases: Vec<Basis> = components.iter().map(|c| Basis::new(c, indices)).collect();
        let mut chosen = Vec::with_capacity(self.k);
        let mut taken = vec![false; self.n_patterns];
        for _ in 0..self.k {
            let mut mass = vec![0.0; self.n_patterns];
            for (c, basis) in components.iter().zip(&bases) {
                if basis.rows.is_empty() {
                    continue;
                }
                let col_mass = basis.column_mass();
                let scale = c.weight / basis.rows.len() as f64;
                for (j, m) in mass.iter_mut().enumerate() {
                    *m += scale * col_mass[c.kernel.column_index(j)];
                }
            }
            for (j, m) in mass.iter_mut().enumerate() {
                if taken[j] || !m.is_finite() || *m < 0.0 {
                    *m = 0.0;
                }
            }
            let raw: f64 = mass.iter().sum();
            let pick = if raw > 0.0 {
                WeightedIndex::new(&mass).expect("positive mass").sample(rng)
            } else {
                diagnostics.uniform_fallbacks += 1;
                let free: Vec<usize> = (0..self.n_patterns).filter(|&j| !taken[j]).collect();
                free[rng.random_range(0..free.len())]
            };
            let probability = if raw > 0.0 { mass[pick] / raw } else { 0.0 };
            let mut degenerate = Vec::new();
            for (d, (c, basis)) in components.iter().zip(bases.iter_mut()).enumerate() {
                if !basis.reduce(c.kernel.column_index(pick)) {
                    degenerate.push(d);
                }
            }
            taken[pick] = true;
            chosen.push(pick);
            diagnostics.steps.push(StepDiagnostics {
                pattern: pick,
                probability,
                raw_mass: raw,
                degenerate,
            });
        }
        chosen
    }
}

fn mixed_marginal(components: &[Prepared], remaining: usize, n: usize) -> f64 {
    components
        .iter()
        .map(|c| {
            let log = c.log_lambda[n - 1] + c.log_e[remaining - 1][n - 1] - c.log_e[remaining][n];
            if log.is_nan() {
                0.0
            } else {
                c.weight * log.exp()
            }
        })
        .sum()
}

fn sample_indices_with<R: Rng>(components: &[Prepared], k: usize, n_v: usize, rng: &mut R) -> Vec<usize> {
    let mut remaining = k;
    let mut out = Vec::with_capacity(k);
    for n in (1..=n_v).rev() {
        if remaining == 0 {
            break;
        }
        let accept = remaining == n || rng.random::<f64>() < mixed_marginal(components, remaining, n);
        if accept {
            out.push(n - 1);
            remaining -= 1;
        }
    }
    out
}

/// Orthonormal (under the primal inner product) basis rows in primal coordinates.
struct Basis {
    rows: Vec<Vec<f64>>,
    multiplicity: Vec<f64>,
}

impl Basis {
    fn new(c: &Prepared, indices: &[usize]) -> Self {
        let kernel = c.kernel;
        let b = kernel.features();
        let rows = indices
            .iter()
            .filter(|&&n| n < kernel.rank())
            .map(|&n| {
                let v = kernel.eigenvectors().column(n);
                // v̂ = v / sqrt(vᵀCv), so that Bᵀv̂ has unit norm
                let scale = kernel.eigenvalues()[n].sqrt();
                (b.transpose() * v).iter().map(|x| x / scale).collect()
            })
            .collect();
        let mut basis = Basis {
            rows,
            multiplicity: c.multiplicity.clone(),
        };
        basis.orthonormalize();
        basis
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.multiplicity).map(|((x, y), m)| m * x * y).sum()
    }

    /// `Σ_rows W[r, c]²` per stored column.
    fn column_mass(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.multiplicity.len()];
        for row in &self.rows {
            for (o, x) in out.iter_mut().zip(row) {
                *o += x * x;
            }
        }
        out
    }

    /// Removes one basis vector, eliminating the direction of column `col`
    /// when it carries enough mass. Returns false in the degenerate case.
    fn reduce(&mut self, col: usize) -> bool {
        if self.rows.is_empty() {
            return false;
        }
        let (pivot, pivot_val) = self
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| (r, row[col]))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .unwrap();
        let col_mass: f64 = self.rows.iter().map(|row| row[col] * row[col]).sum();
        let pivot_row = self.rows.remove(pivot);
        let mean_mass = col_mass / (self.rows.len() + 1) as f64;
        if mean_mass < DEGENERATE_MASS {
            // largest |W[r, col]| is the smallest norm once that column is projected out
            return false;
        }
        for row in &mut self.rows {
            let f = row[col] / pivot_val;
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x -= f * p;
            }
        }
        self.orthonormalize();
        true
    }

    /// Modified Gram-Schmidt, two passes.
    fn orthonormalize(&mut self) {
        for _ in 0..2 {
            for i in 0..self.rows.len() {
                for j in 0..i {
                    let proj = self.dot(&self.rows[i], &self.rows[j]);
                    let (head, tail) = self.rows.split_at_mut(i);
                    for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                        *x -= proj * y;
                    }
                }
                let norm = self.dot(&self.rows[i], &self.rows[i]).sqrt();
                if norm > 0.0 {
                    self.rows[i].iter_mut().for_each(|x| *x /= norm);
                }
            }
        }
    }
}

/// Draws eigen-indices for a mixture of spectra; see [`MixtureSampler::sample_indices`].
pub fn sample_index_subset<R: Rng>(
    k: usize,
    eig_e: &[f64],
    eig_i: &[f64],
    w: MixWeights,
    tolerance: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let spectra: Vec<(f64, Vec<f64>)> = [(w.w_e, eig_e), (w.w_i, eig_i)]
        .into_iter()
        .filter(|c| c.0 > 0.0)
        .map(|(wd, e)| (wd, e.iter().copied().filter(|&l| l > tolerance).collect()))
        .collect();
    if k == 0 {
        return Err(Error::Contract("k must be at least 1".into()));
    }
    let available = spectra.iter().map(|s| s.1.len()).min().unwrap_or(0);
    if k > available {
        return Err(Error::InfeasibleK { k, available });
    }
    let n_v = spectra.iter().map(|s| s.1.len()).max().unwrap();
    let prepared: Vec<Prepared> = spectra
        .iter()
        .map(|(wd, lambda)| {
            let mut lambda = lambda.clone();
            lambda.resize(n_v, 0.0);
            Prepared {
                weight: *wd,
                kernel: empty_kernel(),
                log_lambda: lambda.iter().map(|l| l.ln()).collect(),
                log_e: log_esp(&lambda, k),
                multiplicity: Vec::new(),
            }
        })
        .collect();
    Ok(sample_indices_with(&prepared, k, n_v, rng))
}

fn empty_kernel() -> &'static DualKernel {
    static EMPTY: std::sync::OnceLock<DualKernel> = std::sync::OnceLock::new();
    EMPTY.get_or_init(|| DualKernel::from_features(nalgebra::DMatrix::zeros(0, 0)))
}

/// Selects `k` patterns from the `(w_e, w_i)` mixture of the two kernels.
pub fn select_subset(
    kernel_e: &DualKernel,
    kernel_i: &DualKernel,
    w: MixWeights,
    k: usize,
    seed: u64,
    mode: SelectionMode,
) -> Result<SelectionResult> {
    let sampler = MixtureSampler::new(&[(w.w_e, kernel_e), (w.w_i, kernel_i)], k)?;
    let mut rng = seeded(seed);
    let mut result = sampler.sample(&mut rng, mode);
    result.selector = match mode {
        SelectionMode::Algorithm1 => "einsp",
        SelectionMode::ExactMixture => "exact",
    }
    .to_string();
    result.seed = Some(seed);
    result.weights = Some(w);
    Ok(result)
}

/// `draws` independent samples, each seeded with `sub_seed(seed, draw)`.
pub fn sample_many(
    components: &[(f64, &DualKernel)],
    k: usize,
    mode: SelectionMode,
    seed: u64,
    draws: usize,
) -> Result<Vec<Vec<usize>>> {
    let sampler = MixtureSampler::new(components, k)?;
    Ok((0..draws)
        .into_par_iter()
        .map(|i| {
            let mut rng: NspRng = seeded(sub_seed(seed, i as u64));
            let mut ids = sampler.sample(&mut rng, mode).chosen;
            ids.sort_unstable();
            ids
        })
        .collect())
}
