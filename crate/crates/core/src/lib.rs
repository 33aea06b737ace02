//! Chain-recurrence structure of interval maps.
//!
//! Builds finite chain graphs of exact rational maps, extracts their chain
//! components and the order between them, and certifies complete Lyapunov
//! functions for the result.

pub mod chaingraph;
pub mod cli;
pub mod lyapunov;
pub mod ordinal;
pub mod poset;
pub mod rational;
pub mod systems;
