//! Comparison selectors: Top-k, SAPNSP contribution ranking, k-means over
//! explicit diversity, and the explicit-only k-SDPP.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::dpp::DualKernel;
use crate::error::{Error, Result};
use crate::miner::PatternCollection;
use crate::rng::seeded;
use crate::sampler::{select_subset, MixWeights, SelectionMode, SelectionResult};
use crate::seq::{support, Element, Pattern, Polarity, SequenceDatabase};

pub const KMEANS_MAX_ITER: usize = 100;
pub const KMEANS_TOLERANCE: f64 = 1e-6;

fn check_k(coll: &PatternCollection, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Contract("k must be at least 1".into()));
    }
    if k > coll.len() {
        return Err(Error::InfeasibleK {
            k,
            available: coll.len(),
        });
    }
    Ok(())
}

/// Ids ordered by descending score, ties by descending support then id.
fn rank_by(coll: &PatternCollection, score: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..coll.len()).collect();
    ids.sort_by(|&a, &b| {
        score[b]
            .total_cmp(&score[a])
            .then(coll.support(b).total_cmp(&coll.support(a)))
            .then(a.cmp(&b))
    });
    ids
}

/// The `k` most frequent patterns; ties in canonical order.
pub fn top_k(coll: &PatternCollection, k: usize) -> Result<SelectionResult> {
    check_k(coll, k)?;
    let mut ids = rank_by(coll, coll.supports());
    ids.truncate(k);
    Ok(SelectionResult::deterministic("topk", ids))
}

/// Support of a prefix or last-element fragment. A lone negative element
/// occurs wherever its positive form does not.
fn fragment_support(elements: &[Element], coll: &PatternCollection, db: &SequenceDatabase) -> f64 {
    if let [e] = elements {
        if e.is_negative() {
            let pos = Pattern::new(vec![e.with_polarity(Polarity::Positive)]).expect("one positive element");
            return 1.0 - fragment_lookup(&pos, coll, db);
        }
    }
    match Pattern::new(elements.to_vec()) {
        Ok(p) => fragment_lookup(&p, coll, db),
        Err(_) => 0.0,
    }
}

fn fragment_lookup(p: &Pattern, coll: &PatternCollection, db: &SequenceDatabase) -> f64 {
    match coll.id_of(p) {
        Some(id) => coll.support(id),
        None => support(p, db),
    }
}

/// `sup(P) · sup(P) / (sup(prefix) · sup(last))`; `sup(P)` for single elements.
pub fn contribution(p: &Pattern, sup: f64, coll: &PatternCollection, db: &SequenceDatabase) -> f64 {
    let elements = p.elements();
    if elements.len() < 2 {
        return sup;
    }
    let (prefix, last) = elements.split_at(elements.len() - 1);
    let denom = fragment_support(prefix, coll, db) * fragment_support(last, coll, db);
    if denom <= 0.0 {
        return 0.0;
    }
    sup * sup / denom
}

/// Top `k` by contribution; ties by support then canonical order.
pub fn sapnsp_select(coll: &PatternCollection, db: &SequenceDatabase, k: usize) -> Result<SelectionResult> {
    check_k(coll, k)?;
    let score: Vec<f64> = coll.iter().map(|(_, p, s)| contribution(p, s, coll, db)).collect();
    let mut ids = rank_by(coll, &score);
    ids.truncate(k);
    Ok(SelectionResult::deterministic("sapnsp", ids))
}

/// k-means++ clustering of the columns of `vectors`, one pick per cluster.
///
/// Each cluster contributes its most frequent pattern; empty clusters are
/// filled with the most frequent patterns not yet chosen.
pub fn kmeans_select(coll: &PatternCollection, vectors: &DMatrix<f64>, k: usize, seed: u64) -> Result<SelectionResult> {
    check_k(coll, k)?;
    if vectors.ncols() != coll.len() {
        return Err(Error::Contract("one diversity vector per pattern required".into()));
    }
    let mut rng = seeded(seed);
    let assignment = kmeans(vectors, k, &mut rng);
    let mut best: Vec<Option<usize>> = vec![None; k];
    for (id, &c) in assignment.iter().enumerate() {
        let better = match best[c] {
            None => true,
            Some(b) => coll.support(id) > coll.support(b),
        };
        if better {
            best[c] = Some(id);
        }
    }
    let mut chosen: Vec<usize> = best.iter().flatten().copied().collect();
    let by_support = rank_by(coll, coll.supports());
    let mut fill = by_support.into_iter().filter(|id| !chosen.contains(id)).collect::<Vec<_>>().into_iter();
    while chosen.len() < k {
        chosen.push(fill.next().expect("k <= |collection|"));
    }
    let mut result = SelectionResult::deterministic("kmeans", chosen);
    result.seed = Some(seed);
    Ok(result)
}

/// Cluster index per column. Ties go to the lowest cluster index.
pub fn kmeans<R: Rng>(x: &DMatrix<f64>, k: usize, rng: &mut R) -> Vec<usize> {
    let m = x.ncols();
    let sq_norms: Vec<f64> = x.column_iter().map(|c| c.norm_squared()).collect();
    let mut centers = DMatrix::zeros(x.nrows(), k);

    // k-means++ seeding
    let first = rng.random_range(0..m);
    centers.set_column(0, &x.column(first));
    let mut d2: Vec<f64> = (0..m).map(|j| (x.column(j) - x.column(first)).norm_squared()).collect();
    for c in 1..k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            Err(_) => rng.random_range(0..m),
        };
        centers.set_column(c, &x.column(next));
        for (j, d) in d2.iter_mut().enumerate() {
            *d = d.min((x.column(j) - x.column(next)).norm_squared());
        }
    }

    let mut assignment = vec![0; m];
    for _ in 0..KMEANS_MAX_ITER {
        // ‖x - c‖² = ‖x‖² + ‖c‖² - 2 cᵀx
        let dots = centers.transpose() * x;
        let c_norms: Vec<f64> = centers.column_iter().map(|c| c.norm_squared()).collect();
        for j in 0..m {
            let mut best = (f64::INFINITY, 0);
            for (c, cn) in c_norms.iter().enumerate() {
                let d = sq_norms[j] + cn - 2.0 * dots[(c, j)];
                if d < best.0 - 1e-12 {
                    best = (d, c);
                }
            }
            assignment[j] = best.1;
        }
        let mut sums = DMatrix::zeros(x.nrows(), k);
        let mut counts = vec![0usize; k];
        for (j, &c) in assignment.iter().enumerate() {
            let mut col = sums.column_mut(c);
            col += x.column(j);
            counts[c] += 1;
        }
        let mut shift: f64 = 0.0;
        for c in 0..k {
            if counts[c] == 0 {
                continue;
            }
            let new = sums.column(c) / counts[c] as f64;
            shift = shift.max((&new - centers.column(c)).norm());
            centers.set_column(c, &new);
        }
        if shift < KMEANS_TOLERANCE {
            break;
        }
    }
    assignment
}

/// Explicit-only k-SDPP: the mixture sampler with weights `(1, 0)`.
pub fn ksdpp_select(kernel_e: &DualKernel, k: usize, seed: u64) -> Result<SelectionResult> {
    let mut result = select_subset(
        kernel_e,
        kernel_e,
        MixWeights::explicit_only(),
        k,
        seed,
        SelectionMode::Algorithm1,
    )?;
    result.selector = "ksdpp".into();
    Ok(result)
}
