//! Sensitivity of a binary decision's expected loss to estimation error in
//! the state probability and in the action costs.

pub mod cli;
pub mod config;
pub mod decision;
pub mod estimators;
pub mod experiments;
pub mod montecarlo;
pub mod output;
pub mod plot;
pub mod rng;
pub mod special;
