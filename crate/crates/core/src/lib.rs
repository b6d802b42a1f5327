//! Synthesis of Markov chains from families with parameter holes.
//!
//! A [`family::Family`] describes a finite set of Markov chains sharing a
//! state space: each state distributes its probability mass over parameters,
//! and fixing every parameter to a state (a [`family::Realization`]) yields
//! one member chain. Given reachability properties, the [`synthesis`] drivers
//! find a satisfying (or optimal) member or prove that none exists:
//!
//! - one-by-one enumeration,
//! - counterexample-guided inductive synthesis (CEGIS) with conflicts from
//!   rerouted counterexamples ([`counterexample`]),
//! - abstraction refinement over quotient MDPs ([`abstraction`]),
//! - a hybrid loop alternating the two with adaptive budgets.

pub mod abstraction;
pub mod counterexample;
pub mod error;
pub mod family;
pub mod fixtures;
pub mod io;
pub mod numerics;
pub mod synthesis;

pub use error::{Error, Result};
