//! Criterion benchmarks for the frame pipeline live in `benches/`.
