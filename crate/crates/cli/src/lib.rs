//! Manifest language and verification reports for `conelab`.

pub mod commands;
pub mod dsl;
pub mod error;
pub mod manifest;
pub mod report;

pub use error::DslError;
