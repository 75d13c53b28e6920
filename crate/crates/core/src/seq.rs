//! Items, elements, data sequences, patterns, and containment semantics.
//!
//! A [`Pattern`] mixes positive elements (itemsets that must occur) with
//! negative elements (itemsets that must not occur between their
//! neighbours). Containment of a negative pattern follows the e-NSP
//! convention:
//!
//! * the maximum positive subsequence (all negative elements deleted) is
//!   contained in the data sequence, and
//! * for every negative element `¬e`, the positive pattern obtained by
//!   putting `e` back at its position (and dropping the other negative
//!   elements) is *not* contained.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense item identifier, `1..=N`.
pub type Item = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// A polarity-tagged itemset. Items are strictly increasing and nonempty.
///
/// The derived ordering (itemset first, then polarity) is the canonical node
/// order used throughout the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    items: Vec<Item>,
    polarity: Polarity,
}

impl Element {
    pub fn new(items: impl IntoIterator<Item = Item>, polarity: Polarity) -> Result<Self> {
        let mut items: Vec<Item> = items.into_iter().collect();
        items.sort_unstable();
        items.dedup();
        if items.is_empty() {
            return Err(Error::Contract("element must contain at least one item".into()));
        }
        if items[0] == 0 {
            return Err(Error::Contract("item ids start at 1".into()));
        }
        Ok(Element { items, polarity })
    }

    /// Positive element; panics on an empty or zero-containing itemset.
    pub fn pos(items: &[Item]) -> Self {
        Self::new(items.iter().copied(), Polarity::Positive).expect("valid itemset")
    }

    /// Negative element; panics on an empty or zero-containing itemset.
    pub fn neg(items: &[Item]) -> Self {
        Self::new(items.iter().copied(), Polarity::Negative).expect("valid itemset")
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn is_negative(&self) -> bool {
        self.polarity == Polarity::Negative
    }

    pub fn with_polarity(&self, polarity: Polarity) -> Self {
        Element {
            items: self.items.clone(),
            polarity,
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_negative() {
            f.write_str("¬")?;
        }
        f.write_str("(")?;
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str(")")
    }
}

/// An ordered list of elements: a (possibly negative) sequential pattern.
///
/// Invariants: at least one element, at least one positive element, and no
/// two consecutive negative elements.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    elements: Vec<Element>,
}

impl Pattern {
    pub fn new(elements: Vec<Element>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Contract("pattern must have at least one element".into()));
        }
        if elements.iter().all(Element::is_negative) {
            return Err(Error::Contract("pattern needs a positive element".into()));
        }
        if elements
            .windows(2)
            .any(|w| w[0].is_negative() && w[1].is_negative())
        {
            return Err(Error::Contract("consecutive negative elements".into()));
        }
        Ok(Pattern { elements })
    }

    /// Purely positive pattern from itemsets; panics on invalid input.
    pub fn positive(itemsets: &[&[Item]]) -> Self {
        Pattern::new(itemsets.iter().map(|s| Element::pos(s)).collect()).expect("valid pattern")
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        !self.elements.iter().any(Element::is_negative)
    }

    pub fn negative_count(&self) -> usize {
        self.elements.iter().filter(|e| e.is_negative()).count()
    }

    /// Maximum positive subsequence, as itemset slices.
    pub fn mps(&self) -> Vec<&[Item]> {
        self.elements
            .iter()
            .filter(|e| !e.is_negative())
            .map(Element::items)
            .collect()
    }

    /// The pattern with every negative element flipped to positive.
    pub fn positive_partner(&self) -> Pattern {
        Pattern {
            elements: self
                .elements
                .iter()
                .map(|e| e.with_polarity(Polarity::Positive))
                .collect(),
        }
    }

    /// Positive patterns that must be absent for a negative match: for each
    /// negative element, the MPS with that element restored in place.
    pub fn exclusion_patterns(&self) -> Vec<Vec<&[Item]>> {
        self.elements
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_negative())
            .map(|(j, _)| {
                self.elements
                    .iter()
                    .enumerate()
                    .filter(|(i, e)| *i == j || !e.is_negative())
                    .map(|(_, e)| e.items())
                    .collect()
            })
            .collect()
    }

    /// Union of base item ids over all elements, polarity stripped.
    pub fn flat_items(&self) -> Vec<Item> {
        let mut items: Vec<Item> = self
            .elements
            .iter()
            .flat_map(|e| e.items().iter().copied())
            .collect();
        items.sort_unstable();
        items.dedup();
        items
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(">")
    }
}

/// An ordered list of positive itemsets.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DataSequence {
    elements: Vec<Vec<Item>>,
}

impl DataSequence {
    pub fn new(elements: Vec<Vec<Item>>) -> Result<Self> {
        let mut out = Vec::with_capacity(elements.len());
        for mut items in elements {
            items.sort_unstable();
            items.dedup();
            if items.is_empty() {
                return Err(Error::Contract("empty itemset in data sequence".into()));
            }
            if items[0] == 0 {
                return Err(Error::Contract("item ids start at 1".into()));
            }
            out.push(items);
        }
        Ok(DataSequence { elements: out })
    }

    /// Convenience constructor for fixtures; panics on invalid input.
    pub fn from_slices(elements: &[&[Item]]) -> Self {
        Self::new(elements.iter().map(|e| e.to_vec()).collect()).expect("valid sequence")
    }

    pub fn elements(&self) -> &[Vec<Item>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn max_item(&self) -> Item {
        self.elements
            .iter()
            .filter_map(|e| e.last().copied())
            .max()
            .unwrap_or(0)
    }

    /// Distinct items of the whole sequence.
    pub fn item_set(&self) -> Vec<Item> {
        let mut items: Vec<Item> = self.elements.iter().flatten().copied().collect();
        items.sort_unstable();
        items.dedup();
        items
    }

    /// True iff some single data element is a superset of `items`.
    pub fn has_element_superset(&self, items: &[Item]) -> bool {
        self.elements.iter().any(|e| is_subset(items, e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceDatabase {
    sequences: Vec<DataSequence>,
    universe_size: u32,
}

impl SequenceDatabase {
    pub fn new(sequences: Vec<DataSequence>, universe_size: u32) -> Result<Self> {
        if sequences.is_empty() {
            return Err(Error::Contract("sequence database must not be empty".into()));
        }
        if let Some(max) = sequences.iter().map(DataSequence::max_item).max() {
            if max > universe_size {
                return Err(Error::Contract(format!(
                    "item {max} outside universe 1..={universe_size}"
                )));
            }
        }
        Ok(SequenceDatabase {
            sequences,
            universe_size,
        })
    }

    /// Builds a database whose universe is the largest item present.
    pub fn from_sequences(sequences: Vec<DataSequence>) -> Result<Self> {
        let n = sequences.iter().map(DataSequence::max_item).max().unwrap_or(0);
        Self::new(sequences, n)
    }

    pub fn sequences(&self) -> &[DataSequence] {
        &self.sequences
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn universe_size(&self) -> u32 {
        self.universe_size
    }

    /// Distinct items occurring anywhere in the database (`I_D`).
    pub fn item_set(&self) -> Vec<Item> {
        let mut seen = FixedBitSet::with_capacity(self.universe_size as usize + 1);
        for s in &self.sequences {
            for &i in s.elements.iter().flatten() {
                seen.insert(i as usize);
            }
        }
        seen.ones().map(|i| i as Item).collect()
    }

    /// Indices of sequences satisfying `pred`, as a bitset.
    pub fn cover<F>(&self, pred: F) -> FixedBitSet
    where
        F: Fn(&DataSequence) -> bool,
    {
        let mut bits = FixedBitSet::with_capacity(self.sequences.len());
        for (i, s) in self.sequences.iter().enumerate() {
            if pred(s) {
                bits.insert(i);
            }
        }
        bits
    }

    pub fn fraction(&self, bits: &FixedBitSet) -> f64 {
        bits.count_ones(..) as f64 / self.sequences.len() as f64
    }
}

/// `small ⊆ big` for strictly increasing slices.
pub fn is_subset(small: &[Item], big: &[Item]) -> bool {
    if small.len() > big.len() {
        return false;
    }
    let mut it = big.iter();
    'outer: for &x in small {
        for &y in it.by_ref() {
            if y == x {
                continue 'outer;
            }
            if y > x {
                return false;
            }
        }
        return false;
    }
    true
}

/// Subsequence containment of a positive itemset list.
///
/// Greedy leftmost matching is exact here: matching an element at the
/// earliest possible position never removes options for later elements.
pub fn contains_positive<'a, I>(s: &DataSequence, pattern: I) -> bool
where
    I: IntoIterator<Item = &'a [Item]>,
{
    let mut pos = 0;
    let elems = &s.elements;
    for want in pattern {
        match elems[pos..].iter().position(|e| is_subset(want, e)) {
            Some(off) => pos += off + 1,
            None => return false,
        }
    }
    true
}

/// Negative containment (MPS present, every single-negative exclusion absent).
pub fn contains_negative(s: &DataSequence, p: &Pattern) -> bool {
    let elems = &p.elements;
    let mps = elems.iter().filter(|e| !e.is_negative()).map(Element::items);
    if !contains_positive(s, mps) {
        return false;
    }
    elems.iter().enumerate().filter(|(_, e)| e.is_negative()).all(|(j, _)| {
        let excl = elems
            .iter()
            .enumerate()
            .filter(|(i, e)| *i == j || !e.is_negative())
            .map(|(_, e)| e.items());
        !contains_positive(s, excl)
    })
}

/// Fraction of sequences in `db` that contain `p`.
pub fn support(p: &Pattern, db: &SequenceDatabase) -> f64 {
    let hits = db
        .sequences
        .iter()
        .filter(|s| contains_negative(s, p))
        .count();
    hits as f64 / db.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(e: &[&[Item]]) -> DataSequence {
        DataSequence::from_slices(e)
    }

    #[test]
    fn positive_containment_examples() {
        assert!(contains_positive(&seq(&[&[1], &[2]]), [&[1u32][..]]));
        assert!(contains_positive(
            &seq(&[&[1, 2], &[3]]),
            [&[1u32][..], &[3][..]]
        ));
        assert!(!contains_positive(
            &seq(&[&[3], &[1]]),
            [&[1u32][..], &[3][..]]
        ));
    }

    #[test]
    fn negative_containment_examples() {
        let p = Pattern::new(vec![Element::pos(&[1]), Element::neg(&[2]), Element::pos(&[3])])
            .unwrap();
        assert!(contains_negative(&seq(&[&[1], &[3]]), &p));
        assert!(!contains_negative(&seq(&[&[1], &[2], &[3]]), &p));
        assert!(contains_negative(&seq(&[&[1]]), &Pattern::positive(&[&[1]])));
    }

    #[test]
    fn negative_before_and_after() {
        // ¬(3) followed by (1): no 3 before the matched 1
        let p = Pattern::new(vec![Element::neg(&[3]), Element::pos(&[1])]).unwrap();
        assert!(contains_negative(&seq(&[&[1], &[3]]), &p));
        assert!(!contains_negative(&seq(&[&[3], &[1]]), &p));
        let p = Pattern::new(vec![Element::pos(&[1]), Element::neg(&[3])]).unwrap();
        assert!(!contains_negative(&seq(&[&[1], &[3]]), &p));
        assert!(contains_negative(&seq(&[&[3], &[1]]), &p));
    }

    #[test]
    fn compound_negative_element_needs_whole_itemset() {
        let p = Pattern::new(vec![Element::pos(&[1]), Element::neg(&[2, 3])]).unwrap();
        assert!(contains_negative(&seq(&[&[1], &[2], &[3]]), &p));
        assert!(!contains_negative(&seq(&[&[1], &[2, 3, 4]]), &p));
    }

    #[test]
    fn support_examples() {
        let db = SequenceDatabase::from_sequences(vec![seq(&[&[1]]), seq(&[&[2]])]).unwrap();
        assert_eq!(support(&Pattern::positive(&[&[1]]), &db), 0.5);
        let p = Pattern::new(vec![Element::neg(&[3]), Element::pos(&[1])]).unwrap();
        assert_eq!(support(&p, &db), 0.5);
        let db = SequenceDatabase::from_sequences(vec![seq(&[&[1]]), seq(&[&[1]])]).unwrap();
        assert_eq!(support(&Pattern::positive(&[&[1]]), &db), 1.0);
    }

    #[test]
    fn pattern_format_constraints() {
        assert!(Pattern::new(vec![]).is_err());
        assert!(Pattern::new(vec![Element::neg(&[1])]).is_err());
        assert!(Pattern::new(vec![
            Element::pos(&[1]),
            Element::neg(&[2]),
            Element::neg(&[3])
        ])
        .is_err());
        assert!(Element::new(Vec::new(), Polarity::Positive).is_err());
        assert!(Element::new([0], Polarity::Positive).is_err());
    }

    #[test]
    fn element_canonicalizes_items() {
        let e = Element::new([3, 1, 3, 2], Polarity::Positive).unwrap();
        assert_eq!(e.items(), &[1, 2, 3]);
        assert!(Element::pos(&[1]) < Element::neg(&[1]));
        assert!(Element::neg(&[1]) < Element::pos(&[1, 2]));
    }

    #[test]
    fn database_rejects_out_of_universe_items() {
        assert!(SequenceDatabase::new(vec![seq(&[&[5]])], 4).is_err());
        assert!(SequenceDatabase::new(vec![], 4).is_err());
    }

    #[test]
    fn subset_merge() {
        assert!(is_subset(&[], &[1]));
        assert!(is_subset(&[2, 4], &[1, 2, 3, 4]));
        assert!(!is_subset(&[2, 5], &[1, 2, 3, 4]));
        assert!(!is_subset(&[0], &[1]));
    }
}
