//! Criterion benchmarks for `dcf-delay`; see `benches/`.
