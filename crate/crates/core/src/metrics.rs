//! Subset evaluation metrics.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::implicit::{implicit_quality, ImplicitModel};
use crate::seq::{contains_negative, Item, Pattern, SequenceDatabase};

/// Fraction of sequences containing at least one pattern of `s`.
pub fn sequence_coverage(s: &[&Pattern], db: &SequenceDatabase) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    let covered = db
        .sequences()
        .par_iter()
        .filter(|seq| s.iter().any(|p| contains_negative(seq, p)))
        .count();
    covered as f64 / db.len() as f64
}

/// Fraction of database items mentioned by some pattern of `s`, negated or not.
pub fn item_coverage(s: &[&Pattern], db: &SequenceDatabase) -> f64 {
    let db_items: BTreeSet<Item> = db.item_set().into_iter().collect();
    if db_items.is_empty() {
        return 0.0;
    }
    let mentioned: BTreeSet<Item> = s.iter().flat_map(|p| p.flat_items()).collect();
    mentioned.intersection(&db_items).count() as f64 / db_items.len() as f64
}

/// Mean over mentioned items of the fraction of patterns mentioning them.
pub fn avg_item_frequency(s: &[&Pattern]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::UndefinedMetric("average item frequency of an empty subset"));
    }
    let mut counts: BTreeMap<Item, usize> = BTreeMap::new();
    for p in s {
        for i in p.flat_items() {
            *counts.entry(i).or_default() += 1;
        }
    }
    let n = s.len() as f64;
    Ok(counts.values().map(|&c| c as f64 / n).sum::<f64>() / counts.len() as f64)
}

/// Mean element count.
pub fn avg_pattern_size(s: &[&Pattern]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::UndefinedMetric("average pattern size of an empty subset"));
    }
    Ok(s.iter().map(|p| p.len() as f64).sum::<f64>() / s.len() as f64)
}

/// Mean implicit quality `q_i^m`.
pub fn avg_irs(s: &[&Pattern], model: &ImplicitModel) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::UndefinedMetric("average IRS of an empty subset"));
    }
    Ok(s.iter().map(|p| implicit_quality(p, model)).sum::<f64>() / s.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetMetrics {
    pub sc: f64,
    pub ic: f64,
    pub af: f64,
    pub avg_size: f64,
    pub avg_irs: f64,
}

pub fn evaluate(s: &[&Pattern], db: &SequenceDatabase, model: &ImplicitModel) -> Result<SubsetMetrics> {
    Ok(SubsetMetrics {
        sc: sequence_coverage(s, db),
        ic: item_coverage(s, db),
        af: avg_item_frequency(s)?,
        avg_size: avg_pattern_size(s)?,
        avg_irs: avg_irs(s, model)?,
    })
}
