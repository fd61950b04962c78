//! File formats, caching, parallel drivers and the command line around
//! `riesz-one-core`.

pub mod cache;
pub mod cli;
pub mod config;
pub mod csv_out;
pub mod error;
pub mod io;
pub mod parallel;

pub use error::AppError;
