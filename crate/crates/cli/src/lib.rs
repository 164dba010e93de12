//! Configuration, orchestration, and file emission around the solver
//! core: the user surface of the repository.

pub mod analyze;
pub mod config;
pub mod output;
pub mod runner;
