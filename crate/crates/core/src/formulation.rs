//! Explicit linear systems over original and auxiliary variables, with a
//! declared projection.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::linalg::RatVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    /// The original variables `x`.
    Original,
    /// Slack variables `y = b - Ax`, one per row of `A`.
    Slack,
    /// Layered flow `X` over the arcs of the layered graph.
    Layered,
    /// Per-disjunct flow copy.
    DisjunctFlow(usize),
    /// Per-disjunct, per-segment flow.
    Segment(usize, usize),
    /// Per-disjunct convex multiplier.
    Multiplier(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowTag {
    /// A row of the original system `Ax <= b`.
    Original,
    /// `y + Ax = b`.
    Linking,
    /// `y_a = sum of the layer copies of arc a`.
    Projection,
    /// `sum_t x_t = X`.
    FlowSum,
    /// Every row that belongs to one disjunct.
    Disjunct(usize),
    /// `sum_t lambda_t = 1`.
    Convexity,
    /// Nonnegativity or circulation rows of a cone formulation.
    Cone,
    /// `0 <= x <= 1`.
    Box,
    /// `0 <= -1`, the empty set.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub block: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    /// Sorted by variable index, no zero coefficients.
    pub terms: Vec<(usize, BigRational)>,
    pub sense: Sense,
    pub rhs: BigRational,
    pub tag: RowTag,
}

impl Row {
    pub fn new(mut terms: Vec<(usize, BigRational)>, sense: Sense, rhs: BigRational, tag: RowTag) -> Self {
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(usize, BigRational)> = Vec::with_capacity(terms.len());
        for (j, c) in terms {
            match merged.last_mut() {
                Some((k, acc)) if *k == j => *acc += c,
                _ => merged.push((j, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        Self { terms: merged, sense, rhs, tag }
    }

    pub fn is_inequality(&self) -> bool {
        self.sense != Sense::Eq
    }

    pub fn activity(&self, x: &[BigRational]) -> BigRational {
        self.terms.iter().fold(BigRational::zero(), |acc, (j, c)| acc + c * &x[*j])
    }

    /// Exact satisfaction, with `rhs` replaced by zero when `homogeneous`.
    pub fn satisfied(&self, x: &[BigRational], homogeneous: bool) -> bool {
        let lhs = self.activity(x);
        let rhs = if homogeneous { BigRational::zero() } else { self.rhs.clone() };
        match self.sense {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

/// Size bookkeeping for an emitted formulation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SizeInfo {
    pub inequalities: usize,
    pub equations: usize,
    /// `f̄(Δ) |V|^{Δ-1} (1 + Δ |A'|)`, or the facet bound on the apex branch.
    pub declared_bound: u128,
    pub linking_rows: usize,
    pub delta: u64,
    pub base_nodes: usize,
    pub base_arcs: usize,
    pub layered_arcs: usize,
    pub disjuncts: usize,
    /// `C` with `inequalities <= C n^Δ`.
    pub poly_constant: u128,
    pub poly_bound: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formulation {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Variables whose joint values form the projected point, in order.
    pub projection: Vec<usize>,
    pub size: SizeInfo,
}

impl Formulation {
    pub fn new() -> Self {
        Self { vars: Vec::new(), rows: Vec::new(), projection: Vec::new(), size: SizeInfo::default() }
    }

    pub fn add_var(&mut self, name: impl Into<String>, block: Block) -> usize {
        self.vars.push(Variable { name: name.into(), block });
        self.vars.len() - 1
    }

    pub fn add_vars(&mut self, prefix: &str, count: usize, block: Block) -> Vec<usize> {
        (0..count).map(|i| self.add_var(format!("{prefix}_{i}"), block)).collect()
    }

    pub fn add_row(&mut self, terms: Vec<(usize, BigRational)>, sense: Sense, rhs: BigRational, tag: RowTag) {
        self.rows.push(Row::new(terms, sense, rhs, tag));
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn inequality_count(&self) -> usize {
        self.rows.iter().filter(|r| r.is_inequality()).count()
    }

    pub fn equation_count(&self) -> usize {
        self.rows.len() - self.inequality_count()
    }

    pub fn count_tag(&self, pred: impl Fn(RowTag) -> bool) -> usize {
        self.rows.iter().filter(|r| pred(r.tag)).count()
    }

    /// Refreshes the row counters in `size`.
    pub fn recount(&mut self) {
        self.size.inequalities = self.inequality_count();
        self.size.equations = self.equation_count();
        self.size.linking_rows = self.count_tag(|t| t == RowTag::Linking);
    }

    pub fn project(&self, full: &[BigRational]) -> RatVector {
        self.projection.iter().map(|&j| full[j].clone()).collect()
    }

    /// Indices of rows violated by `full`.
    pub fn violated(&self, full: &[BigRational], homogeneous: bool) -> Vec<usize> {
        (0..self.rows.len()).filter(|&i| !self.rows[i].satisfied(full, homogeneous)).collect()
    }

    /// Exact check of a full variable assignment, through a scaled `i128`
    /// path when every number fits and rationals otherwise.
    pub fn satisfies(&self, full: &[BigRational], homogeneous: bool) -> bool {
        if full.len() != self.vars.len() {
            return false;
        }
        match scaled_i128(full) {
            Some((scale, xs)) => self.rows.iter().all(|r| row_ok_i128(r, scale, &xs, homogeneous).unwrap_or_else(|| r.satisfied(full, homogeneous))),
            None => self.rows.iter().all(|r| r.satisfied(full, homogeneous)),
        }
    }

    /// Removes every row tagged with disjunct `t` and strips the variables of
    /// that disjunct from the shared rows.
    pub fn drop_disjunct(&mut self, t: usize) {
        let owned = |b: Block| matches!(b, Block::DisjunctFlow(s) | Block::Segment(s, _) | Block::Multiplier(s) if s == t);
        let vars = self.vars.clone();
        self.rows.retain(|r| r.tag != RowTag::Disjunct(t));
        for r in &mut self.rows {
            r.terms.retain(|(j, _)| !owned(vars[*j].block));
        }
        self.recount();
    }

    /// Removes the `index`-th row carrying `tag`; returns whether one existed.
    pub fn drop_tagged_row(&mut self, tag: RowTag, index: usize) -> bool {
        let Some(pos) = self.rows.iter().enumerate().filter(|(_, r)| r.tag == tag).nth(index).map(|(i, _)| i) else {
            return false;
        };
        self.rows.remove(pos);
        self.recount();
        true
    }
}

impl Default for Formulation {
    fn default() -> Self {
        Self::new()
    }
}

fn scaled_i128(x: &[BigRational]) -> Option<(i128, Vec<i128>)> {
    let mut l: i128 = 1;
    for v in x {
        let d = v.denom().to_i128()?;
        l = lcm_i128(l, d)?;
    }
    let lb = BigInt::from(l);
    let xs = x.iter().map(|v| (v.numer() * &lb / v.denom()).to_i128()).collect::<Option<Vec<_>>>()?;
    Some((l, xs))
}

fn lcm_i128(a: i128, b: i128) -> Option<i128> {
    let (mut p, mut q) = (a, b);
    while q != 0 {
        (p, q) = (q, p % q);
    }
    (a / p).checked_mul(b)
}

/// `None` when an intermediate overflows or a coefficient is not integral.
fn row_ok_i128(r: &Row, scale: i128, xs: &[i128], homogeneous: bool) -> Option<bool> {
    let mut lhs: i128 = 0;
    for (j, c) in &r.terms {
        if !c.is_integer() {
            return None;
        }
        let c = c.numer().to_i128()?;
        lhs = lhs.checked_add(c.checked_mul(xs[*j])?)?;
    }
    let rhs = if homogeneous {
        0
    } else {
        if !r.rhs.is_integer() {
            return None;
        }
        r.rhs.numer().to_i128()?.checked_mul(scale)?
    };
    Some(match r.sense {
        Sense::Le => lhs <= rhs,
        Sense::Ge => lhs >= rhs,
        Sense::Eq => lhs == rhs,
    })
}

/// Largest absolute numerator or denominator, for diagnostics.
pub fn max_entry_bits(f: &Formulation) -> u64 {
    f.rows
        .iter()
        .flat_map(|r| r.terms.iter().map(|(_, c)| c).chain(std::iter::once(&r.rhs)))
        .map(|c| c.numer().abs().bits().max(c.denom().bits()))
        .max()
        .unwrap_or(0)
}
