//! REST facade and command-line front end for the PKG engine.

pub mod cli;
pub mod config;
pub mod http;
pub mod registry;
pub mod service;

pub use config::Config;
pub use service::{ApiError, Pkg};
