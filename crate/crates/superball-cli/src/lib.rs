//! Library surface of the `superball` command-line tool, exposed so
//! integration tests can drive the commands directly.

pub mod commands;
pub mod formats;
