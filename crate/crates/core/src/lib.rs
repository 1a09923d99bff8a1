//! Dynamics of large volatility events in price series: event selection,
//! conditioned volatility profiles, aftershock counts and power-law fits.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod events;
pub mod fitting;
pub mod intraday;
pub mod numeric;
pub mod pipeline;
pub mod profiles;
pub mod report;
pub mod synth;

pub use error::{Error, ErrorClass, Result};
