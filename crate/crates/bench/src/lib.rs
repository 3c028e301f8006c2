//! Criterion benchmarks for kreg-core; see `benches/`.
