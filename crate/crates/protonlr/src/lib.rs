//! Host front end of the proton dose engine: TOML configs, physics tables, phantoms,
//! output files and the `protonlr` command line. All numerics live in `protonlr-core`.

// `!(x > 0.0)` style checks are deliberate: they reject NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compare;
pub mod config;
pub mod driver;
pub mod error;
pub mod output;
pub mod phantom;
pub mod tables;

pub use config::ProblemConfig;
pub use driver::{prepare, simulate, simulate_with, Prepared, RunResults, SolverKind};
pub use error::{AppError, AppResult};
