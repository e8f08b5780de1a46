//! Criterion benchmarks for `anglewalk`; see `benches/walks.rs`.
