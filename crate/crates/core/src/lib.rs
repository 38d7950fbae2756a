//! Equilibrium computation for exchange markets.
//!
//! The crate has two solver pipelines sharing one ascending-price round
//! engine:
//!
//! * an approximate solver for markets with continuous weak-gross-substitutes
//!   demand (CES, Cobb-Douglas), driven by a finite-precision demand oracle
//!   and a binary search for price multipliers over a bounded rational grid;
//! * an exact solver for spending-constraint (and linear) markets, driven by
//!   an exact balanced-flow demand oracle, ratio-graph price rounding, and a
//!   final rational linear-system extraction step.
//!
//! All money-space quantities are exact arbitrary-precision rationals.

pub mod config;
pub mod demand;
pub mod error;
pub mod exact;
pub mod flow;
pub mod gen;
pub mod linalg;
pub mod market;
pub mod rat;
pub mod spending;
pub mod verify;
pub mod wgs;

pub use config::SolverConfig;
pub use error::Error;
pub use market::{load_market, save_market, Agent, Market, Segment, UtilitySpec};
pub use rat::Rat;
pub use wgs::{RoundState, Trace};

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
