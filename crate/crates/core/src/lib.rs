//! Spectrum leasing between primary and secondary pairs of a cognitive
//! radio relay network.
//!
//! Primary pairs (PUs) lease part of their frame to secondary pairs (SUs)
//! in exchange for cooperative amplify-and-forward relaying and a payment.
//! The crate simulates the channel model, runs the distributed
//! price/time-slot negotiation ([`dda`]), the centralized and random
//! baselines ([`baselines`]), checks stability, optimality and overhead
//! claims ([`verify`]) and drives Monte Carlo experiments ([`bench`]).

pub mod baselines;
pub mod bench;
pub mod dda;
pub mod error;
pub mod grid;
pub mod market;
pub mod outcome;
pub mod params;
pub mod prefs;
pub mod radio;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use grid::OfferGrid;
pub use market::{Market, Requirements};
pub use outcome::{MatchedPair, MatchingOutcome};
pub use params::{AfFormula, ConcessionScope, PuReqMode, ScenarioParams, SnrKnowledge};
pub use topology::ChannelRealization;
