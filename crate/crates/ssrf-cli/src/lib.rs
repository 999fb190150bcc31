//! Library backing the `ssrf` command-line tool: configuration merging,
//! table evaluation, output formatting, and the verification check suite.

pub mod checks;
pub mod config;
pub mod output;
pub mod run;
