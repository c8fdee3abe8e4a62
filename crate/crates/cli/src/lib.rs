//! Command-line front end for `debound-core`: run configurations, the
//! `GRIDFN v1` grid-function format, CSV reports and the five subcommands
//! `admissible`, `minimize`, `certify`, `verify` and `sweep`.
//!
//! Exit codes: 0 ok, 1 usage or configuration error, 2 inadmissible
//! exponents, 3 solver did not converge, 4 a verification or certification
//! check failed.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod gridfn;
pub mod output;
pub mod perturb;

pub use cli::{run, Cli, Command};
pub use config::RunConfig;
pub use error::{CliError, Status};
