//! Benchmarks for the subgeo kernels live in `benches/`.
