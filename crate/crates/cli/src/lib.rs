//! Library side of the `sharpineq` command: parameter grids, output
//! formats, verification suites and the subcommand runners.

pub mod grid;
pub mod output;
pub mod suites;
pub mod commands;
