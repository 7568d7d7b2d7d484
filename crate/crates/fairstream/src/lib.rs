//! Online fair allocation of indivisible goods.
//!
//! Goods arrive one at a time and must be given away on arrival, possibly
//! after seeing a few goods ahead. Agents have personalized two-value
//! valuations (each good is worth `alpha_i` or `beta_i` to agent `i`) or
//! interval valuations in `[1, alpha_i]`, which reduce to two values by
//! rounding at `sqrt(alpha_i)`.

pub mod acceptance;
pub mod adversaries;
pub mod algorithm;
pub mod audit;
pub mod baselines;
pub mod deferred_priority;
pub mod foresight;
pub mod generate;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod model;
pub mod reduction;
pub mod state;
