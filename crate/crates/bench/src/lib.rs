//! Benchmarks for the simulator step loop; see `benches/`.
