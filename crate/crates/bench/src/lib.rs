//! Criterion benchmarks for the `unimodal` crate live in `benches/`.
