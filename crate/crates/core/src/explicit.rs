//! Explicit (co-occurrence) relation kernel.
//!
//! Pattern quality is log-linear in element and adjacent-pair supports;
//! pattern diversity is the normalized sum of the eNEMI rows of its elements.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::dpp::DualKernel;
use crate::error::{Error, Result};
use crate::miner::PatternCollection;
use crate::relgraph::{build_graph, ElementStats, NspGraph};
use crate::seq::{Pattern, SequenceDatabase};

/// `exp(Σ q(element) + Σ q(adjacent pair))`.
pub fn pattern_quality_explicit(p: &Pattern, graph: &NspGraph, stats: &ElementStats) -> Result<f64> {
    let path = graph
        .path_of(p)
        .ok_or_else(|| Error::Config(format!("no element statistics for {p}")))?;
    quality_of_path(&path, stats).ok_or_else(|| Error::Config(format!("no pair statistics for {p}")))
}

fn quality_of_path(path: &[usize], stats: &ElementStats) -> Option<f64> {
    let mut log_q: f64 = path.iter().map(|&n| stats.q_elem[n]).sum();
    for w in path.windows(2) {
        log_q += stats.q_pair.get(&(w[0], w[1]))?;
    }
    Some(log_q.exp())
}

/// L2-normalizes in place; zero vectors stay zero.
pub fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn diversity_of_path(path: &[usize], table: &[Vec<f64>]) -> Vec<f64> {
    let mut sum = vec![0.0; table.len()];
    for &n in path {
        for (s, d) in sum.iter_mut().zip(&table[n]) {
            *s += d;
        }
    }
    normalize(&mut sum);
    sum
}

/// Normalized explicit diversity vector of `p` (length `|E|`).
pub fn pattern_diversity_explicit(p: &Pattern, graph: &NspGraph, stats: &ElementStats) -> Result<Vec<f64>> {
    let path = graph
        .path_of(p)
        .ok_or_else(|| Error::Contract(format!("{p} uses elements outside the graph")))?;
    let rows: Vec<Vec<f64>> = (0..graph.node_count()).map(|u| stats.diversity_row(u)).collect();
    Ok(diversity_of_path(&path, &rows))
}

/// Per-pattern explicit quality and diversity, plus the resulting kernel.
#[derive(Clone, Debug)]
pub struct ExplicitModel {
    pub graph: NspGraph,
    pub stats: ElementStats,
    pub quality: Vec<f64>,
    pub kernel: DualKernel,
}

impl ExplicitModel {
    pub fn build(coll: &PatternCollection, db: &SequenceDatabase) -> Result<Self> {
        let graph = build_graph(coll)?;
        let stats = ElementStats::compute(&graph, db);
        Self::from_parts(graph, stats)
    }

    pub fn from_parts(graph: NspGraph, stats: ElementStats) -> Result<Self> {
        let table = stats.diversity_table();
        let quality: Vec<f64> = graph
            .paths()
            .par_iter()
            .map(|path| quality_of_path(path, &stats))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| Error::Config("missing pair statistics".into()))?;
        let diversity: Vec<Vec<f64>> = graph
            .paths()
            .par_iter()
            .map(|path| diversity_of_path(path, &table))
            .collect();
        let dim = graph.node_count();
        let features = DMatrix::from_fn(dim, quality.len(), |r, c| quality[c] * diversity[c][r]);
        drop(diversity);
        let kernel = DualKernel::from_features(features);
        Ok(ExplicitModel {
            graph,
            stats,
            quality,
            kernel,
        })
    }

    /// `φ_e` of pattern `id`, recovered from its kernel column.
    pub fn diversity(&self, id: usize) -> Vec<f64> {
        self.kernel.column(id).iter().map(|x| x / self.quality[id]).collect()
    }

    /// All `φ_e` as columns.
    pub fn diversity_matrix(&self) -> DMatrix<f64> {
        let mut m = self.kernel.features().clone();
        for (mut col, q) in m.column_iter_mut().zip(&self.quality) {
            col.unscale_mut(*q);
        }
        m
    }

    /// CSV with the eigen-spectrum and per-pattern `(q_e, ‖φ_e‖)`.
    pub fn kernel_csv(&self) -> String {
        let mut out = String::from("kind,index,value,norm\n");
        for (i, l) in self.kernel.eigenvalues().iter().enumerate() {
            writeln!(out, "eigenvalue,{i},{l},").unwrap();
        }
        let phi = self.diversity_matrix();
        for (i, (q, col)) in self.quality.iter().zip(phi.column_iter()).enumerate() {
            writeln!(out, "pattern,{i},{q},{}", col.norm()).unwrap();
        }
        out
    }
}

/// Explicit dual kernel of a collection over a database.
pub fn build_explicit_kernel(coll: &PatternCollection, db: &SequenceDatabase) -> Result<DualKernel> {
    Ok(ExplicitModel::build(coll, db)?.kernel)
}
