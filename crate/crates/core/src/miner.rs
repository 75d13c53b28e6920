//! Level-wise (GSP style) positive mining and Negative-GSP style negative
//! candidate expansion.
//!
//! Positive patterns grow one item per level, either by appending a new
//! single-item element (sequence extension) or by adding a larger item to
//! the last element (itemset extension). Every candidate has exactly one
//! parent, and is kept only if all its one-item-shorter sub-patterns were
//! frequent at the previous level.
//!
//! Negative candidates are produced from each frequent positive pattern by
//! negating non-adjacent subsets of its elements, so a negative pattern is
//! reported only when its positive partner is frequent.

use std::collections::{HashMap, HashSet};

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::seq::{contains_positive, Element, Item, Pattern, Polarity, SequenceDatabase};

pub const DEFAULT_MAX_LEN: usize = 8;
pub const DEFAULT_MIN_SUP: f64 = 0.30;

/// Slack used when comparing `count / |D|` against a decimal threshold.
const SUPPORT_EPS: f64 = 1e-12;

pub(crate) fn meets_min_sup(support: f64, min_sup: f64) -> bool {
    support >= min_sup - SUPPORT_EPS
}

/// Mined NSP collection. Pattern ids are indices into [`patterns`](Self::patterns).
#[derive(Clone, Debug, PartialEq)]
pub struct PatternCollection {
    patterns: Vec<Pattern>,
    supports: Vec<f64>,
    source_min_sup: f64,
}

impl PatternCollection {
    /// Sorts entries canonically and validates the collection invariants.
    pub fn new(mut entries: Vec<(Pattern, f64)>, source_min_sup: f64) -> Result<Self> {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Contract("duplicate pattern in collection".into()));
        }
        if let Some((p, s)) = entries
            .iter()
            .find(|(_, s)| !meets_min_sup(*s, source_min_sup) || *s > 1.0)
        {
            return Err(Error::Contract(format!(
                "support {s} of {p} outside [{source_min_sup}, 1]"
            )));
        }
        let (patterns, supports) = entries.into_iter().unzip();
        Ok(PatternCollection {
            patterns,
            supports,
            source_min_sup,
        })
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    pub fn pattern(&self, id: usize) -> &Pattern {
        &self.patterns[id]
    }

    pub fn support(&self, id: usize) -> f64 {
        self.supports[id]
    }

    pub fn source_min_sup(&self) -> f64 {
        self.source_min_sup
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Pattern, f64)> {
        self.patterns
            .iter()
            .zip(&self.supports)
            .enumerate()
            .map(|(i, (p, &s))| (i, p, s))
    }

    pub fn id_of(&self, p: &Pattern) -> Option<usize> {
        self.patterns.binary_search(p).ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinerConfig {
    pub min_sup: f64,
    /// Maximum number of elements per pattern.
    pub max_len: usize,
}

impl MinerConfig {
    pub fn new(min_sup: f64) -> Self {
        MinerConfig {
            min_sup,
            max_len: DEFAULT_MAX_LEN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_sup > 0.0 && self.min_sup <= 1.0) {
            return Err(Error::Config(format!(
                "min_sup must lie in (0, 1], got {}",
                self.min_sup
            )));
        }
        if self.max_len == 0 {
            return Err(Error::Config("max_len must be at least 1".into()));
        }
        Ok(())
    }
}

impl Default for MinerConfig {
    fn default() -> Self {
        Self::new(DEFAULT_MIN_SUP)
    }
}

type RawPattern = Vec<Vec<Item>>;

/// Frequent positive patterns with their cover sets.
struct PositiveLattice {
    frequent: HashMap<RawPattern, FixedBitSet>,
}

fn mine_positive_lattice(db: &SequenceDatabase, cfg: &MinerConfig) -> PositiveLattice {
    let n = db.len();
    let frequent_count = |bits: &FixedBitSet| meets_min_sup(bits.count_ones(..) as f64 / n as f64, cfg.min_sup);

    let mut item_covers: Vec<(Item, FixedBitSet)> = Vec::new();
    for item in 1..=db.universe_size() {
        let bits = db.cover(|s| s.has_element_superset(&[item]));
        if frequent_count(&bits) {
            item_covers.push((item, bits));
        }
    }

    let mut frequent: HashMap<RawPattern, FixedBitSet> = HashMap::new();
    let mut level: Vec<(RawPattern, FixedBitSet)> = item_covers
        .iter()
        .map(|(i, b)| (vec![vec![*i]], b.clone()))
        .collect();

    while !level.is_empty() {
        let level_keys: HashSet<&RawPattern> = level.iter().map(|(p, _)| p).collect();
        let mut candidates: Vec<(RawPattern, FixedBitSet)> = Vec::new();
        for (parent, parent_cover) in &level {
            for (item, item_cover) in &item_covers {
                // itemset extension keeps items strictly increasing
                if parent.last().unwrap().last().unwrap() < item {
                    let mut cand = parent.clone();
                    cand.last_mut().unwrap().push(*item);
                    if all_subpatterns_frequent(&cand, &level_keys) {
                        let mut cover = parent_cover.clone();
                        cover.intersect_with(item_cover);
                        candidates.push((cand, cover));
                    }
                }
                if parent.len() < cfg.max_len {
                    let mut cand = parent.clone();
                    cand.push(vec![*item]);
                    if all_subpatterns_frequent(&cand, &level_keys) {
                        let mut cover = parent_cover.clone();
                        cover.intersect_with(item_cover);
                        candidates.push((cand, cover));
                    }
                }
            }
        }
        drop(level_keys);

        let next: Vec<(RawPattern, FixedBitSet)> = candidates
            .into_par_iter()
            .filter_map(|(cand, upper)| {
                if !frequent_count(&upper) {
                    return None;
                }
                let mut bits = FixedBitSet::with_capacity(n);
                for sid in upper.ones() {
                    if contains_positive(&db.sequences()[sid], cand.iter().map(Vec::as_slice)) {
                        bits.insert(sid);
                    }
                }
                frequent_count(&bits).then_some((cand, bits))
            })
            .collect();

        frequent.extend(level);
        level = next;
    }

    PositiveLattice { frequent }
}

/// Apriori check: every pattern obtained by deleting one item must be frequent.
fn all_subpatterns_frequent(cand: &RawPattern, previous: &HashSet<&RawPattern>) -> bool {
    for (ei, elem) in cand.iter().enumerate() {
        for ii in 0..elem.len() {
            let mut sub = cand.clone();
            if elem.len() == 1 {
                sub.remove(ei);
            } else {
                sub[ei].remove(ii);
            }
            if !sub.is_empty() && !previous.contains(&sub) {
                return false;
            }
        }
    }
    true
}

fn to_pattern(raw: &RawPattern, negated: u32) -> Pattern {
    let elements = raw
        .iter()
        .enumerate()
        .map(|(i, items)| {
            let polarity = if negated & (1 << i) != 0 {
                Polarity::Negative
            } else {
                Polarity::Positive
            };
            Element::new(items.iter().copied(), polarity).expect("mined itemsets are valid")
        })
        .collect();
    Pattern::new(elements).expect("mined patterns satisfy format constraints")
}

/// All frequent positive sequential patterns.
pub fn mine_psp(db: &SequenceDatabase, min_sup: f64) -> Result<PatternCollection> {
    mine_psp_with(db, &MinerConfig::new(min_sup))
}

pub fn mine_psp_with(db: &SequenceDatabase, cfg: &MinerConfig) -> Result<PatternCollection> {
    cfg.validate()?;
    let lattice = mine_positive_lattice(db, cfg);
    let n = db.len() as f64;
    let entries = lattice
        .frequent
        .iter()
        .map(|(raw, bits)| (to_pattern(raw, 0), bits.count_ones(..) as f64 / n))
        .collect();
    PatternCollection::new(entries, cfg.min_sup)
}

/// All frequent patterns, positive and negative.
pub fn mine_nsp(db: &SequenceDatabase, min_sup: f64) -> Result<PatternCollection> {
    mine_nsp_with(db, &MinerConfig::new(min_sup))
}

pub fn mine_nsp_with(db: &SequenceDatabase, cfg: &MinerConfig) -> Result<PatternCollection> {
    cfg.validate()?;
    let lattice = mine_positive_lattice(db, cfg);
    let n = db.len() as f64;

    let mut entries: Vec<(Pattern, f64)> = lattice
        .frequent
        .iter()
        .map(|(raw, bits)| (to_pattern(raw, 0), bits.count_ones(..) as f64 / n))
        .collect();

    let partners: Vec<&RawPattern> = lattice.frequent.keys().filter(|p| p.len() >= 2).collect();
    let negatives: Vec<(Pattern, f64)> = partners
        .par_iter()
        .flat_map_iter(|raw| {
            negation_masks(raw.len())
                .filter_map(|mask| {
                    let count = negative_cover(raw, mask, &lattice.frequent).count_ones(..);
                    let sup = count as f64 / n;
                    meets_min_sup(sup, cfg.min_sup).then(|| (to_pattern(raw, mask), sup))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    entries.extend(negatives);
    PatternCollection::new(entries, cfg.min_sup)
}

/// Non-empty position masks with no two adjacent bits and at least one
/// position left positive.
fn negation_masks(len: usize) -> impl Iterator<Item = u32> {
    let full = (1u32 << len) - 1;
    (1..full).filter(|m| m & (m >> 1) == 0)
}

/// Sequences containing the MPS but none of the single-negative exclusion
/// patterns. Each of those is a positive sub-pattern of a frequent pattern,
/// so its cover is already in the lattice.
fn negative_cover(
    raw: &RawPattern,
    mask: u32,
    frequent: &HashMap<RawPattern, FixedBitSet>,
) -> FixedBitSet {
    let mps: RawPattern = raw
        .iter()
        .enumerate()
        .filter(|(i, _)| mask & (1 << i) == 0)
        .map(|(_, e)| e.clone())
        .collect();
    let mut cover = frequent[&mps].clone();
    for j in (0..raw.len()).filter(|j| mask & (1 << j) != 0) {
        let excl: RawPattern = raw
            .iter()
            .enumerate()
            .filter(|(i, _)| *i == j || mask & (1 << i) == 0)
            .map(|(_, e)| e.clone())
            .collect();
        cover.difference_with(&frequent[&excl]);
    }
    cover
}
