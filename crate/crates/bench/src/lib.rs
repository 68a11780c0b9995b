//! Home for the criterion benchmarks under `benches/`; the crate
//! itself exports nothing.
