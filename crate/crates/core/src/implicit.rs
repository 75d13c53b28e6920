//! Implicit (non-co-occurrence) relations.
//!
//! Items are related through third-party "link" itemsets: an item depends on
//! a link itemset when their iNEMI exceeds `epsilon`. Itemsets sharing
//! dependent link itemsets get a conditional relation strength (CIRS) per
//! link and an aggregate strength (IRS). Patterns are scored through their
//! flat itemsets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dpp::DualKernel;
use crate::error::{Error, Result};
use crate::explicit::normalize;
use crate::miner::PatternCollection;
use crate::nemi::nemi;
use crate::seq::{Item, Pattern, SequenceDatabase};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImplicitConfig {
    /// Dependence threshold on iNEMI (strict `>`).
    pub epsilon: f64,
    /// Link itemset support floor; `None` means half the collection's `min_sup`.
    pub min_link_sup: Option<f64>,
    pub max_link_size: usize,
    /// Largest subset size considered when scoring a pattern's flat itemset.
    pub max_iri_size: usize,
}

impl Default for ImplicitConfig {
    fn default() -> Self {
        ImplicitConfig {
            epsilon: 0.0,
            min_link_sup: None,
            max_link_size: 2,
            max_iri_size: 3,
        }
    }
}

impl ImplicitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=0.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon must lie in [-1, 0], got {}", self.epsilon)));
        }
        if let Some(s) = self.min_link_sup {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::Config(format!("min_link_sup must lie in (0, 1], got {s}")));
            }
        }
        if self.max_link_size < 1 {
            return Err(Error::Config("max_link_size must be at least 1".into()));
        }
        if self.max_iri_size < 2 {
            return Err(Error::Config("max_iri_size must be at least 2".into()));
        }
        Ok(())
    }

    pub fn resolved_min_link_sup(&self, coll: &PatternCollection) -> f64 {
        self.min_link_sup.unwrap_or(coll.source_min_sup() / 2.0)
    }
}

/// Union of the items of all elements, polarity stripped.
pub fn flat_itemset(p: &Pattern) -> Vec<Item> {
    p.flat_items()
}

fn itemset_cover(items: &[Item], db: &SequenceDatabase) -> FixedBitSet {
    let sets: Vec<Vec<Item>> = db.sequences().iter().map(|s| s.item_set()).collect();
    let mut cover = FixedBitSet::with_capacity(db.len());
    for (sid, set) in sets.iter().enumerate() {
        if items.iter().all(|i| set.binary_search(i).is_ok()) {
            cover.insert(sid);
        }
    }
    cover
}

fn fraction(bits: &FixedBitSet, n: usize) -> f64 {
    bits.count_ones(..) as f64 / n as f64
}

fn intersection(a: &FixedBitSet, b: &FixedBitSet) -> FixedBitSet {
    let mut out = a.clone();
    out.intersect_with(b);
    out
}

/// iNEMI between item `i` and itemset `z` over per-sequence occurrence.
pub fn inemi(i: Item, z: &[Item], db: &SequenceDatabase) -> Result<f64> {
    if z.contains(&i) {
        return Err(Error::Contract(format!("item {i} belongs to the link itemset")));
    }
    let ci = itemset_cover(&[i], db);
    let cz = itemset_cover(z, db);
    let n = db.len();
    Ok(nemi(fraction(&ci, n), fraction(&cz, n), fraction(&intersection(&ci, &cz), n)))
}

/// Ids of the universe itemsets `item` implicitly depends on.
pub fn dependent_itemsets(item: Item, universe: &[Vec<Item>], db: &SequenceDatabase, epsilon: f64) -> Vec<usize> {
    universe
        .iter()
        .enumerate()
        .filter(|(_, z)| !z.contains(&item))
        .filter(|(_, z)| inemi(item, z, db).is_ok_and(|v| v > epsilon))
        .map(|(id, _)| id)
        .collect()
}

/// Conditional relation strength of `items` given link itemset `h`.
pub fn cirs(items: &[Item], h: &[Item], db: &SequenceDatabase) -> Result<f64> {
    let mut min = f64::INFINITY;
    for &i in items {
        min = min.min(inemi(i, h, db)?);
    }
    Ok(min)
}

/// Frequent itemsets of at most `max_size` items, ordered by size then lexicographically.
pub fn mine_link_universe(db: &SequenceDatabase, min_link_sup: f64, max_size: usize) -> Result<Vec<Vec<Item>>> {
    Ok(LinkUniverse::mine(db, min_link_sup, max_size)?.itemsets)
}

struct LinkUniverse {
    itemsets: Vec<Vec<Item>>,
    covers: Vec<FixedBitSet>,
}

impl LinkUniverse {
    fn mine(db: &SequenceDatabase, min_link_sup: f64, max_size: usize) -> Result<Self> {
        if !(min_link_sup > 0.0 && min_link_sup <= 1.0) {
            return Err(Error::Config(format!("min_link_sup must lie in (0, 1], got {min_link_sup}")));
        }
        let n = db.len();
        let frequent = |c: &FixedBitSet| fraction(c, n) >= min_link_sup - 1e-12;
        let singles = item_covers(db);
        let mut itemsets = Vec::new();
        let mut covers = Vec::new();
        let mut level: Vec<(Vec<Item>, FixedBitSet)> = singles
            .iter()
            .enumerate()
            .filter(|(i, c)| *i > 0 && frequent(c))
            .map(|(i, c)| (vec![i as Item], c.clone()))
            .collect();
        let frequent_items: Vec<Item> = level.iter().map(|(s, _)| s[0]).collect();
        for size in 1..=max_size {
            if level.is_empty() {
                break;
            }
            let mut next = Vec::new();
            if size < max_size {
                let known: std::collections::HashSet<&[Item]> = level.iter().map(|(s, _)| s.as_slice()).collect();
                for (set, cover) in &level {
                    let last = *set.last().unwrap();
                    for &i in frequent_items.iter().filter(|&&i| i > last) {
                        let mut cand = set.clone();
                        cand.push(i);
                        // every immediate subset must be frequent
                        let closed = (0..cand.len()).all(|skip| {
                            let sub: Vec<Item> = cand
                                .iter()
                                .enumerate()
                                .filter(|&(j, _)| j != skip)
                                .map(|(_, &x)| x)
                                .collect();
                            known.contains(sub.as_slice())
                        });
                        if !closed {
                            continue;
                        }
                        let c = intersection(cover, &singles[i as usize]);
                        if frequent(&c) {
                            next.push((cand, c));
                        }
                    }
                }
            }
            for (s, c) in level {
                itemsets.push(s);
                covers.push(c);
            }
            level = next;
        }
        Ok(LinkUniverse { itemsets, covers })
    }
}

/// Per-item occurrence covers, indexed by item id (index 0 unused).
fn item_covers(db: &SequenceDatabase) -> Vec<FixedBitSet> {
    let n = db.len();
    let mut covers = vec![FixedBitSet::with_capacity(n); db.universe_size() as usize + 1];
    for (sid, s) in db.sequences().iter().enumerate() {
        for i in s.item_set() {
            covers[i as usize].insert(sid);
        }
    }
    covers
}

/// Link universe, dependency groups, and per-pattern implicit scores.
#[derive(Clone, Debug)]
pub struct ImplicitModel {
    config: ImplicitConfig,
    link_universe: Vec<Vec<Item>>,
    n_sequences: usize,
    item_p: Vec<f64>,
    link_p: Vec<f64>,
    /// `inemi_table[i][h]`; rows for items outside the database are zero.
    inemi_table: Vec<Vec<f64>>,
    /// `A_i` as a bitset over the link universe, indexed by item.
    dependents: Vec<FixedBitSet>,
    flats: Vec<Vec<Item>>,
    flat_of: Vec<usize>,
    flat_quality: Vec<f64>,
    flat_diversity: Vec<Vec<f64>>,
}

impl ImplicitModel {
    pub fn build(coll: &PatternCollection, db: &SequenceDatabase, config: &ImplicitConfig) -> Result<Self> {
        config.validate()?;
        let universe = LinkUniverse::mine(db, config.resolved_min_link_sup(coll), config.max_link_size)?;
        let n = db.len();
        let singles = item_covers(db);
        let item_p: Vec<f64> = singles.iter().map(|c| fraction(c, n)).collect();
        let link_p: Vec<f64> = universe.covers.iter().map(|c| fraction(c, n)).collect();
        let inemi_table: Vec<Vec<f64>> = singles
            .par_iter()
            .enumerate()
            .map(|(i, ci)| {
                universe
                    .itemsets
                    .iter()
                    .zip(&universe.covers)
                    .zip(&link_p)
                    .map(|((h, ch), &ph)| {
                        if i == 0 || h.contains(&(i as Item)) {
                            return 0.0;
                        }
                        let joint = ci.intersection_count(ch) as f64 / n as f64;
                        nemi(item_p[i], ph, joint)
                    })
                    .collect()
            })
            .collect();
        let dependents: Vec<FixedBitSet> = inemi_table
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut bits = FixedBitSet::with_capacity(universe.itemsets.len());
                if i > 0 {
                    for (h, &v) in row.iter().enumerate() {
                        if v > config.epsilon && !universe.itemsets[h].contains(&(i as Item)) {
                            bits.insert(h);
                        }
                    }
                }
                bits
            })
            .collect();

        let mut flat_ids: BTreeMap<Vec<Item>, usize> = BTreeMap::new();
        let mut flats = Vec::new();
        let flat_of: Vec<usize> = coll
            .patterns()
            .iter()
            .map(|p| {
                let f = flat_itemset(p);
                *flat_ids.entry(f.clone()).or_insert_with(|| {
                    flats.push(f);
                    flats.len() - 1
                })
            })
            .collect();

        let mut model = ImplicitModel {
            config: config.clone(),
            link_universe: universe.itemsets,
            n_sequences: n,
            item_p,
            link_p,
            inemi_table,
            dependents,
            flats,
            flat_of,
            flat_quality: Vec::new(),
            flat_diversity: Vec::new(),
        };
        let scores: Vec<(f64, Vec<f64>)> = model
            .flats
            .par_iter()
            .map(|f| (model.quality_of_itemset(f), model.diversity_of_itemset(f)))
            .collect();
        (model.flat_quality, model.flat_diversity) = scores.into_iter().unzip();
        Ok(model)
    }

    pub fn config(&self) -> &ImplicitConfig {
        &self.config
    }

    /// The link universe `H_S`.
    pub fn link_universe(&self) -> &[Vec<Item>] {
        &self.link_universe
    }

    pub fn epsilon(&self) -> f64 {
        self.config.epsilon
    }

    pub fn n_sequences(&self) -> usize {
        self.n_sequences
    }

    /// Occurrence probability of a link itemset.
    pub fn link_probability(&self, h: usize) -> f64 {
        self.link_p[h]
    }

    pub fn item_probability(&self, i: Item) -> f64 {
        self.item_p.get(i as usize).copied().unwrap_or(0.0)
    }

    /// Cached iNEMI of item `i` and link itemset `h`; 0 for items outside the database.
    pub fn inemi(&self, i: Item, h: usize) -> f64 {
        self.inemi_table.get(i as usize).map_or(0.0, |row| row[h])
    }

    /// `A_i` as link itemset ids.
    pub fn dependents(&self, i: Item) -> Vec<usize> {
        self.dependents.get(i as usize).map_or(Vec::new(), |b| b.ones().collect())
    }

    /// `G_I = ∩ A_i` over the items of `items`.
    pub fn link_group(&self, items: &[Item]) -> FixedBitSet {
        let empty = FixedBitSet::with_capacity(self.link_universe.len());
        let mut iter = items.iter();
        let Some(&first) = iter.next() else {
            return empty;
        };
        let mut group = self.dependents.get(first as usize).cloned().unwrap_or_else(|| empty.clone());
        for &i in iter {
            match self.dependents.get(i as usize) {
                Some(a) => group.intersect_with(a),
                None => return empty,
            }
        }
        group
    }

    pub fn cirs(&self, items: &[Item], h: usize) -> f64 {
        items.iter().map(|&i| self.inemi(i, h)).fold(f64::INFINITY, f64::min)
    }

    /// Mean CIRS over the link group; 0 when the group is empty.
    pub fn irs(&self, items: &[Item]) -> f64 {
        let group = self.link_group(items);
        let size = group.count_ones(..);
        if size == 0 {
            return 0.0;
        }
        group.ones().map(|h| self.cirs(items, h)).sum::<f64>() / size as f64
    }

    /// Max IRS among the largest qualifying subsets of `flat`.
    pub fn quality_of_itemset(&self, flat: &[Item]) -> f64 {
        let top = self.config.max_iri_size.min(flat.len());
        for size in (2..=top).rev() {
            let mut best: f64 = 0.0;
            for_each_subset(flat, size, &mut |sub| {
                let v = self.irs(sub);
                if v > best {
                    best = v;
                }
            });
            if best > 0.0 {
                return best;
            }
        }
        0.0
    }

    /// Normalized CIRS profile of `flat` over the link universe.
    pub fn diversity_of_itemset(&self, flat: &[Item]) -> Vec<f64> {
        let mut v = vec![0.0; self.link_universe.len()];
        for h in self.link_group(flat).ones() {
            v[h] = self.cirs(flat, h);
        }
        normalize(&mut v);
        v
    }

    /// Number of patterns scored.
    pub fn n_patterns(&self) -> usize {
        self.flat_of.len()
    }

    pub fn pattern_flat(&self, id: usize) -> &[Item] {
        &self.flats[self.flat_of[id]]
    }

    /// `q_i^m` of pattern `id`.
    pub fn quality(&self, id: usize) -> f64 {
        self.flat_quality[self.flat_of[id]]
    }

    pub fn qualities(&self) -> Vec<f64> {
        self.flat_of.iter().map(|&f| self.flat_quality[f]).collect()
    }

    pub fn diversity(&self, id: usize) -> &[f64] {
        &self.flat_diversity[self.flat_of[id]]
    }

    /// Implicit dual kernel; patterns sharing a flat itemset share a column.
    pub fn kernel(&self) -> DualKernel {
        let dim = self.link_universe.len();
        let distinct = DMatrix::from_fn(dim, self.flats.len(), |r, c| {
            self.flat_quality[c] * self.flat_diversity[c][r]
        });
        DualKernel::from_shared_columns(distinct, self.flat_of.clone())
    }

    /// CSV of `(q_i^m, |G|, top-3 link itemsets by CIRS)` per pattern.
    pub fn dump_csv(&self) -> String {
        let mut out = String::from("id,q_impl,group_size,top_links\n");
        for id in 0..self.n_patterns() {
            let flat = self.pattern_flat(id);
            let group = self.link_group(flat);
            let mut links: Vec<(f64, usize)> = group.ones().map(|h| (self.cirs(flat, h), h)).collect();
            links.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            let top: Vec<String> = links
                .iter()
                .take(3)
                .map(|&(_, h)| {
                    let items: Vec<String> = self.link_universe[h].iter().map(|i| i.to_string()).collect();
                    format!("({})", items.join(" "))
                })
                .collect();
            writeln!(out, "{id},{},{},{}", self.quality(id), group.count_ones(..), top.join(" ")).unwrap();
        }
        out
    }
}

fn for_each_subset(items: &[Item], size: usize, f: &mut dyn FnMut(&[Item])) {
    fn rec(items: &[Item], size: usize, start: usize, cur: &mut Vec<Item>, f: &mut dyn FnMut(&[Item])) {
        if cur.len() == size {
            f(cur);
            return;
        }
        let need = size - cur.len();
        for j in start..=items.len() - need {
            cur.push(items[j]);
            rec(items, size, j + 1, cur, f);
            cur.pop();
        }
    }
    if size <= items.len() {
        rec(items, size, 0, &mut Vec::with_capacity(size), f);
    }
}

/// `q_i^m` of a pattern under `model`.
pub fn implicit_quality(p: &Pattern, model: &ImplicitModel) -> f64 {
    model.quality_of_itemset(&flat_itemset(p))
}

/// Normalized implicit diversity vector of a pattern (length `|H_S|`).
pub fn implicit_diversity(p: &Pattern, model: &ImplicitModel) -> Vec<f64> {
    model.diversity_of_itemset(&flat_itemset(p))
}

/// Implicit dual kernel of the collection `model` was built from.
pub fn build_implicit_kernel(model: &ImplicitModel) -> DualKernel {
    model.kernel()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::DataSequence;

    fn db(seqs: &[&[&[u32]]]) -> SequenceDatabase {
        SequenceDatabase::from_sequences(seqs.iter().map(|s| DataSequence::from_slices(s)).collect())
            .unwrap()
    }

    fn coll(patterns: Vec<Pattern>, min_sup: f64) -> PatternCollection {
        PatternCollection::new(patterns.into_iter().map(|p| (p, 0.5)).collect(), min_sup).unwrap()
    }

    #[test]
    fn inemi_orientations() {
        // item 1 and item 2 always together
        let d = db(&[&[&[1], &[2]], &[&[1, 2]], &[&[3]], &[&[4]]]);
        assert_eq!(inemi(1, &[2], &d).unwrap(), 1.0);
        // independent
        let d = db(&[&[&[1], &[2]], &[&[1]], &[&[2]], &[&[3]]]);
        assert!(inemi(1, &[2], &d).unwrap().abs() < 1e-12);
        // disjoint
        let d = db(&[&[&[1]], &[&[1]], &[&[2]], &[&[2]]]);
        assert_eq!(inemi(1, &[2], &d).unwrap(), -1.0);
        assert!(matches!(inemi(1, &[1, 2], &d), Err(Error::Contract(_))));
    }

    #[test]
    fn dependents_follow_threshold() {
        let d = db(&[&[&[1], &[2]], &[&[1, 2]], &[&[3]], &[&[4]]]);
        let universe = vec![vec![2], vec![3]];
        assert_eq!(dependent_itemsets(1, &universe, &d, 0.0), vec![0]);
        assert!(dependent_itemsets(1, &[], &d, 0.0).is_empty());
        // (1) vs (3) is -1: excluded even at epsilon = -1
        assert_eq!(dependent_itemsets(1, &universe, &d, -1.0), vec![0]);
    }

    #[test]
    fn cirs_is_min_of_inemi() {
        let d = db(&[
            &[&[1, 2, 3]],
            &[&[1, 3]],
            &[&[2]],
            &[&[1]],
            &[&[4]],
            &[&[2, 3]],
        ]);
        let a = inemi(1, &[3], &d).unwrap();
        let b = inemi(2, &[3], &d).unwrap();
        assert_eq!(cirs(&[1, 2], &[3], &d).unwrap(), a.min(b));
        assert_eq!(cirs(&[1], &[3], &d).unwrap(), a);
    }

    #[test]
    fn link_universe_counts() {
        // {1,2} in 60% of sequences
        let d = db(&[
            &[&[1], &[2]],
            &[&[1, 2]],
            &[&[2], &[1]],
            &[&[1]],
            &[&[2]],
        ]);
        let u = mine_link_universe(&d, 0.5, 2).unwrap();
        assert_eq!(u, vec![vec![1], vec![2], vec![1, 2]]);
        assert_eq!(mine_link_universe(&d, 0.5, 1).unwrap(), vec![vec![1], vec![2]]);
        assert!(mine_link_universe(&d, 1.0, 2).unwrap().is_empty());
        assert!(mine_link_universe(&d, 0.0, 2).is_err());
    }

    #[test]
    fn link_universe_matches_brute_force() {
        let d = db(&[
            &[&[1, 2], &[3]],
            &[&[1], &[4]],
            &[&[2, 3, 4]],
            &[&[1, 3]],
            &[&[2], &[4], &[1]],
        ]);
        let sets: Vec<Vec<u32>> = d.sequences().iter().map(|s| s.item_set()).collect();
        let mut expected = Vec::new();
        for size in 1..=3 {
            for mask in 1u32..16 {
                if mask.count_ones() as usize != size {
                    continue;
                }
                let items: Vec<u32> = (1..=4).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                let c = sets.iter().filter(|s| items.iter().all(|i| s.contains(i))).count();
                if c as f64 / 5.0 >= 0.4 {
                    expected.push(items);
                }
            }
        }
        expected.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        assert_eq!(mine_link_universe(&d, 0.4, 3).unwrap(), expected);
    }

    fn fixture() -> (SequenceDatabase, PatternCollection, ImplicitModel) {
        // 1 and 2 both track 3; 4 is unrelated
        let d = db(&[
            &[&[1], &[3]],
            &[&[2, 3]],
            &[&[1, 2], &[3]],
            &[&[4]],
            &[&[4], &[1]],
            &[&[5]],
        ]);
        let c = coll(
            vec![
                Pattern::positive(&[&[1], &[2]]),
                Pattern::positive(&[&[2], &[1]]),
                Pattern::positive(&[&[4]]),
                Pattern::positive(&[&[1]]),
            ],
            0.2,
        );
        let cfg = ImplicitConfig {
            max_link_size: 1,
            ..Default::default()
        };
        let m = ImplicitModel::build(&c, &d, &cfg).unwrap();
        (d, c, m)
    }

    #[test]
    fn model_matches_free_functions() {
        let (d, _, m) = fixture();
        for (h, set) in m.link_universe().iter().enumerate() {
            for i in 1..=5u32 {
                if !set.contains(&i) {
                    assert!((m.inemi(i, h) - inemi(i, set, &d).unwrap()).abs() < 1e-12);
                }
            }
        }
        for i in 1..=5u32 {
            assert_eq!(m.dependents(i), dependent_itemsets(i, m.link_universe(), &d, 0.0));
        }
    }

    #[test]
    fn irs_averages_group_cirs() {
        let (d, _, m) = fixture();
        let group: Vec<usize> = m.link_group(&[1, 2]).ones().collect();
        assert!(!group.is_empty());
        let expected = group
            .iter()
            .map(|&h| cirs(&[1, 2], &m.link_universe()[h], &d).unwrap())
            .sum::<f64>()
            / group.len() as f64;
        assert!((m.irs(&[1, 2]) - expected).abs() < 1e-12);
        assert_eq!(m.irs(&[2, 1]), m.irs(&[1, 2]));
        // 4 and 5 share nothing
        assert_eq!(m.irs(&[4, 5]), 0.0);
    }

    #[test]
    fn pattern_scores() {
        let (_, c, m) = fixture();
        let p12 = c.id_of(&Pattern::positive(&[&[1], &[2]])).unwrap();
        let p21 = c.id_of(&Pattern::positive(&[&[2], &[1]])).unwrap();
        let p4 = c.id_of(&Pattern::positive(&[&[4]])).unwrap();
        assert!(m.quality(p12) > 0.0);
        assert_eq!(m.quality(p12), m.irs(&[1, 2]));
        assert_eq!(m.diversity(p12), m.diversity(p21));
        // single-item flats have no qualifying subset
        assert_eq!(m.quality(p4), 0.0);
        let n: f64 = m.diversity(p12).iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < 1e-12);
        assert_eq!(implicit_quality(&Pattern::positive(&[&[2], &[1]]), &m), m.quality(p12));
        let k = build_implicit_kernel(&m);
        assert_eq!(k.n_items(), c.len());
        assert!(m.dump_csv().lines().count() == c.len() + 1);
    }

    #[test]
    fn one_hot_diversity() {
        let (_, _, m) = fixture();
        let group: Vec<usize> = m.link_group(&[1, 2]).ones().collect();
        if group.len() == 1 {
            let v = m.diversity_of_itemset(&[1, 2]);
            assert_eq!(v[group[0]], 1.0);
        }
    }

    #[test]
    fn zero_quality_gives_zero_kernel() {
        let d = db(&[&[&[1]], &[&[2]], &[&[1]], &[&[2]]]);
        let c = coll(vec![Pattern::positive(&[&[1]]), Pattern::positive(&[&[2]])], 0.5);
        let m = ImplicitModel::build(&c, &d, &ImplicitConfig::default()).unwrap();
        assert_eq!(build_implicit_kernel(&m).rank(), 0);
    }

    #[test]
    fn subsets_enumerated_once() {
        let mut seen = Vec::new();
        for_each_subset(&[1, 2, 3, 4], 2, &mut |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        let mut none = 0;
        for_each_subset(&[1], 2, &mut |_| none += 1);
        assert_eq!(none, 0);
    }

    #[test]
    fn config_validation() {
        let bad = ImplicitConfig {
            epsilon: 0.5,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = ImplicitConfig {
            max_iri_size: 1,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
