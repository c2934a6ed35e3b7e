//! Criterion benchmarks for `ccwlan-core`. See `benches/`.
