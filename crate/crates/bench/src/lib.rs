//! Criterion benchmarks for `zll-core`; see `benches/`.
