use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::linalg::{rank_int, IntMatrix};
use crate::modularity::ModularityProfile;

/// A graph offered for the dual realization step: `arcs[i]` realizes row
/// `column_map[i]` of `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphHint {
    pub nodes: usize,
    pub arcs: Vec<(usize, usize)>,
    pub column_map: Vec<usize>,
}

/// `P(A, b) = {x : Ax <= b}` with `A` of full column rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    pub a: IntMatrix,
    pub b: Vec<BigInt>,
    pub graph_hint: Option<GraphHint>,
    pub trusted_profile: Option<ModularityProfile>,
    pub label: String,
}

impl ProblemInstance {
    pub fn new(a: IntMatrix, b: Vec<BigInt>, label: impl Into<String>) -> Result<Self> {
        if b.len() != a.rows() {
            return Err(Error::DimensionMismatch(format!("b has {} entries, A has {} rows", b.len(), a.rows())));
        }
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::Precondition("A must have at least one row and one column".into()));
        }
        let rank = rank_int(&a);
        if rank != a.cols() {
            return Err(Error::RankDeficient { rank, cols: a.cols() });
        }
        Ok(Self { a, b, graph_hint: None, trusted_profile: None, label: label.into() })
    }

    pub fn with_hint(mut self, hint: GraphHint) -> Self {
        self.graph_hint = Some(hint);
        self
    }

    pub fn m(&self) -> usize {
        self.a.rows()
    }

    pub fn n(&self) -> usize {
        self.a.cols()
    }

    /// Does `A x <= b` hold?
    pub fn contains(&self, x: &[BigInt]) -> bool {
        match self.a.mul_vec(x) {
            Ok(ax) => ax.iter().zip(&self.b).all(|(l, r)| l <= r),
            Err(_) => false,
        }
    }
}
