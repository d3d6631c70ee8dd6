//! Criterion benchmarks for cflab-core live in `benches/`.
