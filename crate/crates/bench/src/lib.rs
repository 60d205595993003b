//! Criterion benchmarks for `qmono-core`; see `benches/kernels.rs`.
