//! Exact extended formulations for integer hulls of translated cones
//! `{x : Ax <= b}` whose constraint matrix is strictly Δ-modular with a
//! cographic row matroid.
//!
//! The pipeline reformulates the hull in slack space, where it becomes the
//! hull of nonnegative integer circulations under a congruency constraint,
//! and writes that hull as a disjunction over layered flow patterns. Every
//! number in the system is an exact integer or rational.

pub mod circulation;
pub mod cli;
pub mod error;
pub mod formulation;
pub mod generators;
pub mod hnf;
pub mod instance;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod modularity;
pub mod pipeline;
pub mod realize;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{GraphHint, ProblemInstance};

/// Enumeration limits. Every exponential routine in the crate checks one of
/// these before it starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// `n x n` row minors enumerated for the subdeterminant profile.
    pub enum_cap: u128,
    /// Square minors enumerated by the total unimodularity test.
    pub tu_cap: u128,
    /// Largest `|det H|` accepted for coset enumeration.
    pub delta_cap: u64,
    /// Disjuncts (pattern, node sequence pairs) in one formulation.
    pub assignment_cap: u128,
    /// Box points scanned by lattice enumeration.
    pub lattice_cap: u128,
    /// Search nodes visited by the graph realization backtracker.
    pub realization_budget: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            enum_cap: 2_000_000,
            tu_cap: 1_000_000,
            delta_cap: 6,
            assignment_cap: 100_000,
            lattice_cap: 10_000_000,
            realization_budget: 5_000_000,
        }
    }
}
