//! Criterion benchmarks for the closure toolkit; see `benches/`.
