//! Desk-scale computations around singular horizontal curves of rank-2
//! polynomial distributions on R³.
//!
//! * [`poly`]: exact polynomial algebra, parsing, vector-field calculus.
//! * [`distribution`]: Martinet surface, characteristic field, point strata.
//! * [`reduction`]: planar blow-ups, saddle/divergence criteria, degenerate metrics.
//! * [`trajectory`]: integration, return maps, lengths, lifts, reachable sets.

pub mod distribution;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod poly;
pub mod reduction;
pub mod trajectory;

pub use error::{Error, Result};
