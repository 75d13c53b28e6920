//! Criterion benchmarks for the mining and selection stages; see `benches/`.
