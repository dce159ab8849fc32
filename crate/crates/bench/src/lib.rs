//! Benchmarks for `xilab-core` live in `benches/`; run them with
//! `cargo bench -p xilab-bench`.
