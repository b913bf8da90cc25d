//! Criterion benchmarks for the pension engine; see `benches/kernels.rs`.
