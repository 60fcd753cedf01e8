//! Command-line front end: configuration, the five commands and their writers.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;
