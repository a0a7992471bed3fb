//! Benchmarks for the simulator and optimizers.
