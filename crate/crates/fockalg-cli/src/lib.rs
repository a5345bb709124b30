//! Library surface of the command line tool: configuration parsing, report
//! rendering, and the verification suites. The binary in `main.rs` is a thin
//! dispatcher over these modules, and integration tests drive them directly.

pub mod config;
pub mod report;
pub mod verify;
