//! Batch front-end: TOML configuration, command execution and artifact emission.

pub mod config;
pub mod expr;
mod run;

pub use config::{Command, RunConfig};
pub use expr::Expr;
pub use run::{run, Outcome, Status};
