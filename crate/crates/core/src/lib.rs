//! Linear transceivers for MIMO amplify-and-forward relaying: relay and
//! equalizer design, diversity tradeoff calculators and a reproducible outage
//! simulator.

pub mod asymptotics;
pub mod error;
pub mod matcore;
pub mod montecarlo;
pub mod transceiver;

pub use error::{RelayError, Result};
