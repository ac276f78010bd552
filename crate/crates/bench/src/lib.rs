//! Benchmark harness for the fermilab kernels; see `benches/kernels.rs`.
