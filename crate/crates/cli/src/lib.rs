//! Command-line front end for the in-situ pulse learning harness.
//!
//! Spec files are parsed strictly by [`spec::parse_spec`], dispatched to
//! the harness by [`commands`], and written as CSV/JSON artifacts by
//! [`artifact`]. [`plot`] renders artifact CSVs as SVG line charts.

pub mod artifact;
pub mod commands;
pub mod plot;
pub mod spec;

pub use commands::{CliError, Command, Invocation, Report};
pub use spec::{parse_spec, SpecError};
