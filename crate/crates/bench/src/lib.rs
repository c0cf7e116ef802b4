//! Shared fixtures for the criterion benchmarks.

pub mod measures;
