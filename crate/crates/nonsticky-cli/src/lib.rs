//! Library surface of the CLI crate: config parsing, artifact writers
//! and command implementations. The binary in `main.rs` is a thin
//! argument-parsing wrapper over [`runner`], which keeps the whole
//! pipeline (including artifact bytes) testable in-process.

pub mod config;
pub mod manifest;
pub mod output;
pub mod runner;
