//! Command-line companion to `tcam-core`: file formats, DOT rendering,
//! rayon-backed parallelism, and the `tcam` subcommands.
//!
//! The split keeps the core engine free of IO: everything that touches
//! files, argument parsing, or a thread pool lives here.

pub mod commands;
pub mod dot;
pub mod error;
pub mod formats;
pub mod par;
