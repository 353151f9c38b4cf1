//! Criterion benchmarks for tsplab; see `benches/`.
