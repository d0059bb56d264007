//! Benchmarks for the simulation and beamforming pipeline; see `benches/pipeline.rs`.
