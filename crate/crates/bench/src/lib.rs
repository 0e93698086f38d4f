//! Benchmark-only crate; see `benches/solve.rs`.
