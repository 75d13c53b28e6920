//! The NSP graph: distinct elements as nodes, adjacency inside patterns as
//! directed edges, patterns as paths. Element statistics are measured on
//! the source database, per sequence.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::miner::PatternCollection;
use crate::nemi::nemi_counts;
use crate::seq::{support, Element, Pattern, Polarity, SequenceDatabase};

#[derive(Clone, Debug, PartialEq)]
pub struct NspGraph {
    nodes: Vec<Element>,
    index: HashMap<Element, usize>,
    /// (from, to) -> number of patterns using the edge
    edges: BTreeMap<(usize, usize), usize>,
    paths: Vec<Vec<usize>>,
}

impl NspGraph {
    pub fn nodes(&self) -> &[Element] {
        &self.nodes
    }

    pub fn node_id(&self, e: &Element) -> Option<usize> {
        self.index.get(e).copied()
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), usize> {
        &self.edges
    }

    /// Node-id path of pattern `id`.
    pub fn path(&self, id: usize) -> &[usize] {
        &self.paths[id]
    }

    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Node ids of an arbitrary pattern, if all its elements are nodes.
    pub fn path_of(&self, p: &Pattern) -> Option<Vec<usize>> {
        p.elements().iter().map(|e| self.node_id(e)).collect()
    }
}

/// Builds the graph with canonically ordered nodes.
pub fn build_graph(coll: &PatternCollection) -> Result<NspGraph> {
    if coll.is_empty() {
        return Err(Error::Contract("cannot build a graph from an empty collection".into()));
    }
    let mut nodes: Vec<Element> = coll
        .patterns()
        .iter()
        .flat_map(|p| p.elements().iter().cloned())
        .collect();
    nodes.sort();
    nodes.dedup();
    let index: HashMap<Element, usize> =
        nodes.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();

    let mut edges = BTreeMap::new();
    let paths: Vec<Vec<usize>> = coll
        .patterns()
        .iter()
        .map(|p| p.elements().iter().map(|e| index[e]).collect())
        .collect();
    for path in &paths {
        for w in path.windows(2) {
            *edges.entry((w[0], w[1])).or_insert(0) += 1;
        }
    }
    Ok(NspGraph {
        nodes,
        index,
        edges,
        paths,
    })
}

/// Sequences satisfying the element condition: some data element contains
/// the itemset (positive) or none does (negative).
pub fn element_cover(e: &Element, db: &SequenceDatabase) -> FixedBitSet {
    let mut bits = db.cover(|s| s.has_element_superset(e.items()));
    if e.is_negative() {
        bits.toggle_range(..);
    }
    bits
}

/// Occurrence probability of an element condition over the database.
pub fn element_probability(e: &Element, db: &SequenceDatabase) -> f64 {
    db.fraction(&element_cover(e, db))
}

/// eNEMI between two element conditions.
pub fn enemi(x: &Element, y: &Element, db: &SequenceDatabase) -> f64 {
    let cx = element_cover(x, db);
    let cy = element_cover(y, db);
    let joint = cx.intersection_count(&cy);
    nemi_counts(cx.count_ones(..), cy.count_ones(..), joint, db.len())
}

/// Per-node and per-edge statistics of a graph over a database.
#[derive(Clone, Debug)]
pub struct ElementStats {
    /// Element quality: support of the single-element condition.
    pub q_elem: Vec<f64>,
    /// Edge quality: support of the two-element pattern.
    pub q_pair: BTreeMap<(usize, usize), f64>,
    /// Occurrence probability of each node's element condition.
    pub p_elem: Vec<f64>,
    covers: Vec<FixedBitSet>,
    n_sequences: usize,
}

impl ElementStats {
    pub fn compute(graph: &NspGraph, db: &SequenceDatabase) -> Self {
        let covers: Vec<FixedBitSet> = graph
            .nodes()
            .par_iter()
            .map(|e| element_cover(e, db))
            .collect();
        let p_elem: Vec<f64> = covers.iter().map(|c| db.fraction(c)).collect();
        let q_pair = graph
            .edges()
            .keys()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&&(u, v)| {
                let pair = Pattern::new(vec![graph.nodes()[u].clone(), graph.nodes()[v].clone()])
                    .expect("edges come from valid patterns");
                ((u, v), support(&pair, db))
            })
            .collect();
        ElementStats {
            q_elem: p_elem.clone(),
            q_pair,
            p_elem,
            covers,
            n_sequences: db.len(),
        }
    }

    pub fn p_joint(&self, u: usize, v: usize) -> f64 {
        self.covers[u].intersection_count(&self.covers[v]) as f64 / self.n_sequences as f64
    }

    pub fn enemi(&self, u: usize, v: usize) -> f64 {
        nemi_counts(
            self.covers[u].count_ones(..),
            self.covers[v].count_ones(..),
            self.covers[u].intersection_count(&self.covers[v]),
            self.n_sequences,
        )
    }

    /// Row `u` of the eNEMI table: the unnormalized diversity vector of node `u`.
    pub fn diversity_row(&self, u: usize) -> Vec<f64> {
        (0..self.covers.len()).map(|v| self.enemi(u, v)).collect()
    }

    /// Full symmetric eNEMI table, row-major `|E| x |E|`.
    pub fn diversity_table(&self) -> Vec<Vec<f64>> {
        (0..self.covers.len())
            .into_par_iter()
            .map(|u| self.diversity_row(u))
            .collect()
    }
}

/// Unnormalized diversity vector of element `e` against every graph node.
pub fn element_diversity_vector(
    e: &Element,
    graph: &NspGraph,
    db: &SequenceDatabase,
) -> Result<Vec<f64>> {
    if graph.node_id(e).is_none() {
        return Err(Error::Contract(format!("{e} is not a node of the graph")));
    }
    let ce = element_cover(e, db);
    let count_e = ce.count_ones(..);
    Ok(graph
        .nodes()
        .iter()
        .map(|other| {
            let co = element_cover(other, db);
            nemi_counts(count_e, co.count_ones(..), ce.intersection_count(&co), db.len())
        })
        .collect())
}

/// CSV dump of nodes (with q_elem) and edges (with q_pair).
pub fn graph_csv(graph: &NspGraph, stats: &ElementStats) -> String {
    let mut out = String::from("kind,id,src,dst,element,polarity,count,q\n");
    for (i, e) in graph.nodes().iter().enumerate() {
        let items: Vec<String> = e.items().iter().map(u32::to_string).collect();
        let pol = match e.polarity() {
            Polarity::Positive => "+",
            Polarity::Negative => "-",
        };
        writeln!(out, "node,{i},,,{},{pol},,{}", items.join(" "), stats.q_elem[i]).unwrap();
    }
    for (&(u, v), &count) in graph.edges() {
        writeln!(out, "edge,,{u},{v},,,{count},{}", stats.q_pair[&(u, v)]).unwrap();
    }
    out
}
