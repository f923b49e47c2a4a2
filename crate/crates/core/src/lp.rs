//! Exact two-phase simplex over rationals.
//!
//! Presolve turns single-variable `x >= 0` rows into sign constraints, adds
//! slacks, and substitutes every free variable out through an equation. The
//! remaining standard-form problem runs on a sparse-row tableau with
//! Dantzig pricing, falling back to Bland's rule after a run of degenerate
//! pivots.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::formulation::{Formulation, Row, Sense};
use crate::linalg::RatVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpResult {
    pub status: LpStatus,
    /// Objective value, optimal only.
    pub value: Option<BigRational>,
    /// Full variable vector, optimal only.
    pub point: Option<RatVector>,
    /// Full improving direction of the homogenized system, unbounded only.
    pub ray: Option<RatVector>,
}

impl LpResult {
    fn infeasible() -> Self {
        Self { status: LpStatus::Infeasible, value: None, point: None, ray: None }
    }
}

/// Optimizes `objective` (over the projected variables) on `form`.
pub fn lp_exact(form: &Formulation, objective: &[BigRational], goal: Goal) -> LpResult {
    assert_eq!(objective.len(), form.projection.len(), "objective must match the projection");
    let mut cost = vec![BigRational::zero(); form.num_vars()];
    for (c, &j) in objective.iter().zip(&form.projection) {
        cost[j] += c.clone();
    }
    let mut res = solve_rows(form.num_vars(), &form.rows, &cost, goal, false);
    if let (Some(p), LpStatus::Optimal) = (&res.point, res.status) {
        res.value = Some(form.projection.iter().zip(objective).fold(BigRational::zero(), |acc, (&j, c)| acc + c * &p[j]));
    }
    res
}

/// A point of `form` whose projected coordinates equal `target`, if any.
/// With `homogeneous`, every right-hand side is replaced by zero.
pub fn lift_point(form: &Formulation, target: &[BigRational], homogeneous: bool) -> Option<RatVector> {
    let mut rows: Vec<Row> = form.rows.clone();
    for (&j, v) in form.projection.iter().zip(target) {
        rows.push(Row::new(vec![(j, BigRational::one())], Sense::Eq, v.clone(), crate::formulation::RowTag::Box));
    }
    let cost = vec![BigRational::zero(); form.num_vars()];
    let res = solve_rows(form.num_vars(), &rows, &cost, Goal::Min, homogeneous);
    res.point
}

/// Solves `goal cost·x` over `rows` (all variables free unless a row says otherwise).
pub fn solve_rows(nvars: usize, rows: &[Row], cost: &[BigRational], goal: Goal, homogeneous: bool) -> LpResult {
    let mut cost: Vec<BigRational> = cost.to_vec();
    if goal == Goal::Max {
        for c in cost.iter_mut() {
            *c = -c.clone();
        }
    }
    let mut res = Presolved::new(nvars, rows, homogeneous).map_or_else(LpResult::infeasible, |p| p.solve(cost.clone()));
    if let (Some(p), LpStatus::Optimal) = (&res.point, res.status) {
        let v = p.iter().zip(&cost).fold(BigRational::zero(), |acc, (x, c)| acc + x * c);
        res.value = Some(if goal == Goal::Max { -v } else { v });
    }
    res
}

type Sparse = Vec<(usize, BigRational)>;

fn get(row: &Sparse, j: usize) -> Option<&BigRational> {
    row.binary_search_by_key(&j, |t| t.0).ok().map(|k| &row[k].1)
}

/// `a + f b`, both sorted.
fn axpy(a: &Sparse, f: &BigRational, b: &Sparse) -> Sparse {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, f * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + f * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// `x_var = constant + Σ coef x_k`, recorded when `x_var` is substituted out.
struct Expr {
    var: usize,
    constant: BigRational,
    terms: Sparse,
}

struct Presolved {
    nvars: usize,
    ncols: usize,
    nonneg: Vec<bool>,
    /// Equations `terms = rhs`.
    rows: Vec<(Sparse, BigRational)>,
    exprs: Vec<Expr>,
}

impl Presolved {
    /// `None` when a row with no terms is violated.
    fn new(nvars: usize, input: &[Row], homogeneous: bool) -> Option<Self> {
        let mut nonneg = vec![false; nvars];
        let mut kept: Vec<(Sparse, Sense, BigRational)> = Vec::new();
        for r in input {
            let rhs = if homogeneous { BigRational::zero() } else { r.rhs.clone() };
            if r.terms.is_empty() {
                let ok = match r.sense {
                    Sense::Le => BigRational::zero() <= rhs,
                    Sense::Ge => BigRational::zero() >= rhs,
                    Sense::Eq => rhs.is_zero(),
                };
                if !ok {
                    return None;
                }
                continue;
            }
            if r.terms.len() == 1 && rhs.is_zero() {
                let (j, c) = &r.terms[0];
                if (c.is_positive() && r.sense == Sense::Ge) || (c.is_negative() && r.sense == Sense::Le) {
                    nonneg[*j] = true;
                    continue;
                }
            }
            kept.push((r.terms.clone(), r.sense, rhs));
        }
        let mut ncols = nvars;
        let mut rows = Vec::with_capacity(kept.len());
        for (mut terms, sense, rhs) in kept {
            match sense {
                Sense::Le => terms.push((ncols, BigRational::one())),
                Sense::Ge => terms.push((ncols, -BigRational::one())),
                Sense::Eq => {
                    rows.push((terms, rhs));
                    continue;
                }
            }
            nonneg.push(true);
            ncols += 1;
            rows.push((terms, rhs));
        }
        Some(Self { nvars, ncols, nonneg, rows, exprs: Vec::new() })
    }

    /// Substitutes free variables out, pivoting on the shortest row each time.
    fn eliminate_free(&mut self, cost: &mut Vec<BigRational>) -> Option<()> {
        let mut occurs: Vec<Vec<usize>> = vec![Vec::new(); self.ncols];
        for (i, (terms, _)) in self.rows.iter().enumerate() {
            for (j, _) in terms {
                occurs[*j].push(i);
            }
        }
        let mut alive = vec![true; self.rows.len()];
        loop {
            let mut best: Option<(usize, usize, usize)> = None;
            for (i, (terms, _)) in self.rows.iter().enumerate() {
                if !alive[i] || best.is_some_and(|b| b.0 <= terms.len()) {
                    continue;
                }
                if let Some((j, _)) = terms.iter().find(|(j, _)| !self.nonneg[*j]) {
                    best = Some((terms.len(), i, *j));
                }
            }
            let Some((_, r, j)) = best else { break };
            alive[r] = false;
            let (pivot_terms, pivot_rhs) = self.rows[r].clone();
            let a = get(&pivot_terms, j).expect("chosen from row").clone();
            let others: Sparse = pivot_terms.iter().filter(|t| t.0 != j).map(|(k, c)| (*k, -c / &a)).collect();
            self.exprs.push(Expr { var: j, constant: &pivot_rhs / &a, terms: others });
            let users: Vec<usize> = occurs[j].iter().copied().filter(|&i| alive[i]).collect();
            for i in users {
                let (terms, rhs) = &self.rows[i];
                let Some(c) = get(terms, j).cloned() else { continue };
                let f = -(&c / &a);
                let new_terms = axpy(terms, &f, &pivot_terms);
                let new_rhs = rhs + &f * &pivot_rhs;
                for (k, _) in &new_terms {
                    if !occurs[*k].contains(&i) {
                        occurs[*k].push(i);
                    }
                }
                if new_terms.is_empty() && !new_rhs.is_zero() {
                    return None;
                }
                self.rows[i] = (new_terms, new_rhs);
            }
            if !cost[j].is_zero() {
                let f = -(&cost[j] / &a);
                for (k, c) in &pivot_terms {
                    cost[*k] += &f * c;
                }
            }
        }
        let rows: Vec<(Sparse, BigRational)> =
            self.rows.drain(..).zip(alive).filter(|(_, a)| *a).map(|(r, _)| r).filter(|(t, _)| !t.is_empty()).collect();
        self.rows = rows;
        Some(())
    }

    fn solve(mut self, mut cost: Vec<BigRational>) -> LpResult {
        cost.resize(self.ncols, BigRational::zero());
        if self.eliminate_free(&mut cost).is_none() {
            return LpResult::infeasible();
        }
        let eliminated: Vec<bool> = {
            let mut e = vec![false; self.ncols];
            for x in &self.exprs {
                e[x.var] = true;
            }
            e
        };
        // A free variable left in no row but in the objective: unbounded when feasible.
        let loose = (0..self.ncols).find(|&j| !self.nonneg[j] && !eliminated[j] && !cost[j].is_zero());

        let mut tab = Tableau::new(self.ncols, &self.rows);
        if !tab.phase_one() {
            return LpResult::infeasible();
        }
        if let Some(j) = loose {
            let mut dir = vec![BigRational::zero(); self.ncols];
            dir[j] = if cost[j].is_positive() { -BigRational::one() } else { BigRational::one() };
            return LpResult { status: LpStatus::Unbounded, value: None, point: None, ray: Some(self.map_back(dir, true)) };
        }
        match tab.phase_two(&cost) {
            Ok(values) => LpResult { status: LpStatus::Optimal, value: None, point: Some(self.map_back(values, false)), ray: None },
            Err(dir) => LpResult { status: LpStatus::Unbounded, value: None, point: None, ray: Some(self.map_back(dir, true)) },
        }
    }

    fn map_back(&self, mut values: Vec<BigRational>, homogeneous: bool) -> RatVector {
        values.resize(self.ncols, BigRational::zero());
        for e in self.exprs.iter().rev() {
            let mut v = if homogeneous { BigRational::zero() } else { e.constant.clone() };
            for (k, c) in &e.terms {
                v += c * &values[*k];
            }
            values[e.var] = v;
        }
        values.truncate(self.nvars);
        values
    }
}

const DEGENERATE_LIMIT: usize = 50;

struct Tableau {
    ncols: usize,
    rows: Vec<Sparse>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
    /// Reduced costs over structural and artificial columns.
    reduced: Vec<BigRational>,
    /// Columns barred from entering.
    barred: Vec<bool>,
}

impl Tableau {
    fn new(ncols: usize, eqs: &[(Sparse, BigRational)]) -> Self {
        let m = eqs.len();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, (terms, b)) in eqs.iter().enumerate() {
            let flip = b.is_negative();
            let mut r: Sparse = if flip { terms.iter().map(|(j, c)| (*j, -c)).collect() } else { terms.clone() };
            r.push((ncols + i, BigRational::one()));
            rows.push(r);
            rhs.push(if flip { -b } else { b.clone() });
        }
        let barred = vec![false; ncols + m];
        Self { ncols, rows, rhs, basis: (ncols..ncols + m).collect(), reduced: vec![BigRational::zero(); ncols + m], barred }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.ncols
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let a = get(&self.rows[r], c).expect("pivot entry").clone();
        if !a.is_one() {
            for (_, v) in self.rows[r].iter_mut() {
                *v = &*v / &a;
            }
            self.rhs[r] = &self.rhs[r] / &a;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            if let Some(f) = get(&self.rows[i], c).cloned() {
                let f = -f;
                self.rows[i] = axpy(&self.rows[i], &f, &prow);
                self.rhs[i] = &self.rhs[i] + &f * &prhs;
            }
        }
        let d = self.reduced[c].clone();
        if !d.is_zero() {
            for (j, v) in &prow {
                self.reduced[*j] -= &d * v;
            }
        }
        let leaving = self.basis[r];
        if self.is_artificial(leaving) {
            self.barred[leaving] = true;
        }
        self.basis[r] = c;
    }

    /// Runs pivots until optimal (`Ok`) or an unbounded column is found (`Err(col)`).
    fn iterate(&mut self) -> Result<(), usize> {
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            let enter = if bland {
                (0..self.reduced.len()).find(|&j| !self.barred[j] && self.reduced[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..self.reduced.len() {
                    if self.barred[j] || !self.reduced[j].is_negative() {
                        continue;
                    }
                    if best.map_or(true, |b| self.reduced[j] < self.reduced[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = enter else { return Ok(()) };
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                let Some(a) = get(&self.rows[i], c) else { continue };
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else { return Err(c) };
            if ratio.is_zero() {
                degenerate += 1;
                if degenerate > DEGENERATE_LIMIT {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }

    /// Minimizes the sum of artificials; `false` when it stays positive.
    fn phase_one(&mut self) -> bool {
        for j in 0..self.reduced.len() {
            self.reduced[j] = BigRational::zero();
        }
        for row in &self.rows {
            for (j, v) in row {
                if !self.is_artificial(*j) {
                    self.reduced[*j] -= v;
                }
            }
        }
        self.iterate().expect("phase one is bounded below by zero");
        for i in 0..self.rows.len() {
            if self.is_artificial(self.basis[i]) && !self.rhs[i].is_zero() {
                return false;
            }
        }
        // Drive zero-level artificials out, dropping rows that are redundant.
        let mut i = 0;
        while i < self.rows.len() {
            if self.is_artificial(self.basis[i]) {
                let col = self.rows[i].iter().find(|(j, _)| !self.is_artificial(*j)).map(|t| t.0);
                match col {
                    Some(c) => self.pivot(i, c),
                    None => {
                        self.rows.remove(i);
                        self.rhs.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for row in self.rows.iter_mut() {
            row.retain(|(j, _)| *j < self.ncols);
        }
        self.reduced.truncate(self.ncols);
        self.barred.truncate(self.ncols);
        true
    }

    /// Values of the structural columns at the optimum, or an improving ray.
    fn phase_two(&mut self, cost: &[BigRational]) -> Result<Vec<BigRational>, Vec<BigRational>> {
        self.reduced = cost.to_vec();
        for i in 0..self.rows.len() {
            let cb = cost[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, v) in &self.rows[i] {
                self.reduced[*j] -= &cb * v;
            }
        }
        match self.iterate() {
            Ok(()) => {
                let mut x = vec![BigRational::zero(); self.ncols];
                for (i, &b) in self.basis.iter().enumerate() {
                    x[b] = self.rhs[i].clone();
                }
                Ok(x)
            }
            Err(c) => {
                let mut d = vec![BigRational::zero(); self.ncols];
                d[c] = BigRational::one();
                for (i, &b) in self.basis.iter().enumerate() {
                    if let Some(a) = get(&self.rows[i], c) {
                        d[b] = -a.clone();
                    }
                }
                Err(d)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{Block, RowTag};
    use crate::linalg::{rat, ratio};
    use proptest::prelude::*;

    fn one_var(sense: Sense, rhs: i64) -> Formulation {
        let mut f = Formulation::new();
        let x = f.add_var("x", Block::Original);
        f.add_row(vec![(x, rat(1))], sense, rat(rhs), RowTag::Original);
        f.projection = vec![x];
        f
    }

    #[test]
    fn trivial_examples() {
        let r = lp_exact(&one_var(Sense::Ge, 1), &[rat(1)], Goal::Min);
        assert_eq!(r.status, LpStatus::Optimal);
        assert_eq!(r.value, Some(rat(1)));
        let r = lp_exact(&one_var(Sense::Le, 0), &[rat(1)], Goal::Min);
        assert_eq!(r.status, LpStatus::Unbounded);
        assert_eq!(r.ray, Some(vec![rat(-1)]));
    }

    #[test]
    fn infeasible_detected() {
        let mut f = one_var(Sense::Ge, 2);
        f.add_row(vec![(0, rat(1))], Sense::Le, rat(1), RowTag::Original);
        assert_eq!(lp_exact(&f, &[rat(1)], Goal::Min).status, LpStatus::Infeasible);
        let mut f = Formulation::new();
        f.add_row(Vec::new(), Sense::Le, rat(-1), RowTag::Infeasible);
        assert_eq!(lp_exact(&f, &[], Goal::Min).status, LpStatus::Infeasible);
    }

    #[test]
    fn fractional_optimum() {
        // max x + y  s.t. 2x + y <= 4, x + 3y <= 6, x, y >= 0  ->  (6/5, 8/5), value 14/5
        let mut f = Formulation::new();
        let x = f.add_var("x", Block::Original);
        let y = f.add_var("y", Block::Original);
        f.add_row(vec![(x, rat(2)), (y, rat(1))], Sense::Le, rat(4), RowTag::Original);
        f.add_row(vec![(x, rat(1)), (y, rat(3))], Sense::Le, rat(6), RowTag::Original);
        f.add_row(vec![(x, rat(1))], Sense::Ge, rat(0), RowTag::Original);
        f.add_row(vec![(y, rat(1))], Sense::Ge, rat(0), RowTag::Original);
        f.projection = vec![x, y];
        let r = lp_exact(&f, &[rat(1), rat(1)], Goal::Max);
        assert_eq!(r.value, Some(ratio(14, 5)));
        assert_eq!(r.point, Some(vec![ratio(6, 5), ratio(8, 5)]));
    }

    #[test]
    fn free_variable_only_in_objective() {
        let mut f = Formulation::new();
        let x = f.add_var("x", Block::Original);
        let z = f.add_var("z", Block::Original);
        f.add_row(vec![(x, rat(1))], Sense::Ge, rat(0), RowTag::Original);
        f.projection = vec![x, z];
        let r = lp_exact(&f, &[rat(1), rat(1)], Goal::Min);
        assert_eq!(r.status, LpStatus::Unbounded);
        assert_eq!(r.ray.unwrap()[z], rat(-1));
    }

    #[test]
    fn lift_point_respects_target() {
        let mut f = Formulation::new();
        let x = f.add_var("x", Block::Original);
        let y = f.add_var("y", Block::Slack);
        f.add_row(vec![(x, rat(2)), (y, rat(1))], Sense::Eq, rat(1), RowTag::Linking);
        f.add_row(vec![(y, rat(1))], Sense::Ge, rat(1), RowTag::Cone);
        f.projection = vec![x];
        let p = lift_point(&f, &[rat(-3)], false).unwrap();
        assert_eq!(p, vec![rat(-3), rat(7)]);
        assert!(lift_point(&f, &[rat(1)], false).is_none());
    }

    fn vertices_2d(rows: &[(i64, i64, i64)]) -> Vec<(BigRational, BigRational)> {
        let mut out = Vec::new();
        for (i, a) in rows.iter().enumerate() {
            for b in &rows[i + 1..] {
                let det = a.0 * b.1 - a.1 * b.0;
                if det == 0 {
                    continue;
                }
                let x = ratio(a.2 * b.1 - a.1 * b.2, det);
                let y = ratio(a.0 * b.2 - a.2 * b.0, det);
                if rows.iter().all(|r| rat(r.0) * &x + rat(r.1) * &y <= rat(r.2)) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        /// Boxed 2-variable programs: the optimum equals the best listed vertex.
        #[test]
        fn agrees_with_vertex_listing(
            extra in proptest::collection::vec((-4i64..=4, -4i64..=4, -6i64..=12), 0..5),
            c in (-5i64..=5, -5i64..=5),
        ) {
            let mut rows = vec![(1, 0, 5), (-1, 0, 5), (0, 1, 5), (0, -1, 5)];
            rows.extend(extra.into_iter().filter(|r| r.0 != 0 || r.1 != 0));
            let mut f = Formulation::new();
            let x = f.add_var("x", Block::Original);
            let y = f.add_var("y", Block::Original);
            for &(a, b, r) in &rows {
                f.add_row(vec![(x, rat(a)), (y, rat(b))], Sense::Le, rat(r), RowTag::Original);
            }
            f.projection = vec![x, y];
            let res = lp_exact(&f, &[rat(c.0), rat(c.1)], Goal::Min);
            let verts = vertices_2d(&rows);
            if verts.is_empty() {
                prop_assert_eq!(res.status, LpStatus::Infeasible);
            } else {
                let best = verts.iter().map(|(vx, vy)| rat(c.0) * vx + rat(c.1) * vy).min().unwrap();
                prop_assert_eq!(res.status, LpStatus::Optimal);
                let p = res.point.clone().unwrap();
                prop_assert!(f.satisfies(&p, false));
                prop_assert_eq!(res.value.unwrap(), best);
            }
        }
    }
}
