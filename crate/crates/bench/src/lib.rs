//! Criterion benchmarks for `wgscatter` live under `benches/`.
