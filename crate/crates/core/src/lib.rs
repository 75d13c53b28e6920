//! Negative sequential pattern (NSP) mining and actionable subset selection.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`miner`] discovers the complete NSP collection from a [`SequenceDatabase`].
//! 2. [`relgraph`] turns the collection into an element graph and gathers
//!    element-level statistics (support, pair support, eNEMI).
//! 3. [`explicit`] and [`implicit`] build two dual DPP kernels, one for
//!    co-occurrence relations and one for item-to-link-itemset relations.
//! 4. [`sampler`] draws a fixed-size subset from the weighted mixture of the
//!    two k-DPPs; [`baselines`] and [`metrics`] provide comparison selectors
//!    and evaluation.

pub mod baselines;
pub mod datagen;
pub mod dpp;
pub mod error;
pub mod explicit;
pub mod format;
pub mod implicit;
pub mod metrics;
pub mod miner;
pub mod nemi;
pub mod pipeline;
pub mod relgraph;
pub mod rng;
pub mod sampler;
pub mod seq;

pub use dpp::{esp, DualKernel, EspTable};
pub use error::{Error, Result};
pub use miner::PatternCollection;
pub use sampler::{MixWeights, SelectionMode, SelectionResult};
pub use seq::{DataSequence, Element, Item, Pattern, Polarity, SequenceDatabase};
