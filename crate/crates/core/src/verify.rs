//! Independent certification of built formulations: brute-force lattice
//! enumeration, exact LP optima, lifted membership and recession checks.

use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::circulation::{BaseGraph, CirculationEf, CosetSystem};
use crate::error::{Error, Result};
use crate::formulation::{Formulation, Row, RowTag, Sense};
use crate::instance::ProblemInstance;
use crate::linalg::{kernel_basis, primitive, rank, solve_int, to_rat_vec, IntMatrix, RatVector};
use crate::lp::{lift_point, lp_exact, solve_rows, Goal, LpStatus};
use crate::modularity::binomial;
use crate::pipeline::{Branch, EfArtifact};
use crate::Caps;

/// Membership checks stop after this many confirmed failures.
const MAX_CONFIRMED_FAILURES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Finite(BigRational),
    Unbounded,
    Infeasible,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Finite(v) => write!(f, "{v}"),
            Value::Unbounded => write!(f, "unbounded"),
            Value::Infeasible => write!(f, "infeasible"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub objective: Vec<BigInt>,
    pub ef: Value,
    pub oracle: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub label: String,
    pub points_checked: usize,
    pub objectives_tested: usize,
    pub matches: usize,
    pub mismatches: Vec<Mismatch>,
    pub membership_failures: Vec<Vec<BigInt>>,
    pub ray_failures: Vec<String>,
    /// Objectives whose oracle optima all sit on the boundary of the search box.
    pub boundary_active: usize,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl VerificationReport {
    fn new(label: &str) -> Self {
        Self {
            label: label.to_string(),
            points_checked: 0,
            objectives_tested: 0,
            matches: 0,
            mismatches: Vec::new(),
            membership_failures: Vec::new(),
            ray_failures: Vec::new(),
            boundary_active: 0,
            notes: Vec::new(),
            verdict: Verdict::Inconclusive,
        }
    }

    fn finish(mut self) -> Self {
        self.verdict = if !self.mismatches.is_empty() || !self.membership_failures.is_empty() || !self.ray_failures.is_empty() {
            Verdict::Fail
        } else if self.objectives_tested == 0 {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        if self.boundary_active > 0 {
            self.notes.push(format!(
                "{} objectives attain their box optimum only on the boundary of the search box; enlarge the radius to rule out truncation",
                self.boundary_active
            ));
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vec_str = |v: &[BigInt]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        json!({
            "label": self.label,
            "points_checked": self.points_checked,
            "objectives_tested": self.objectives_tested,
            "matches": self.matches,
            "mismatches": self.mismatches.iter().map(|m| json!({
                "objective": vec_str(&m.objective),
                "ef": m.ef.to_string(),
                "oracle": m.oracle.to_string(),
            })).collect::<Vec<_>>(),
            "membership_failures": self.membership_failures.iter().map(|p| vec_str(p)).collect::<Vec<_>>(),
            "ray_failures": self.ray_failures,
            "boundary_active": self.boundary_active,
            "notes": self.notes,
            "verdict": self.verdict.as_str(),
        })
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance: {}", self.label)?;
        writeln!(f, "lattice points checked: {}", self.points_checked)?;
        writeln!(f, "objectives: {} tested, {} matched", self.objectives_tested, self.matches)?;
        for m in &self.mismatches {
            writeln!(f, "  mismatch c = ({}): formulation {}, oracle {}", m.objective.iter().join(", "), m.ef, m.oracle)?;
        }
        writeln!(f, "membership failures: {}", self.membership_failures.len())?;
        for p in &self.membership_failures {
            writeln!(f, "  no lift for ({})", p.iter().join(", "))?;
        }
        writeln!(f, "ray failures: {}", self.ray_failures.len())?;
        for r in &self.ray_failures {
            writeln!(f, "  {r}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        write!(f, "verdict: {}", self.verdict.as_str())
    }
}

fn small(a: &IntMatrix) -> Result<Vec<Vec<i64>>> {
    (0..a.rows())
        .map(|i| a.row(i).iter().map(|v| v.to_i64()).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Precondition("entries exceed 64 bits".into()))
}

/// Integer box `[⌊x̄⌋ - r, ⌊x̄⌋ + r]` around the apex.
fn search_box(inst: &ProblemInstance, radius: u64) -> Result<(Vec<i64>, Vec<i64>)> {
    let apex = solve_int(&inst.a, &inst.b)?.ok_or(Error::NotInSpan)?;
    let r = radius as i64;
    let centre = apex
        .iter()
        .map(|x| x.floor().to_integer().to_i64().ok_or_else(|| Error::Precondition("apex exceeds 64 bits".into())))
        .collect::<Result<Vec<_>>>()?;
    Ok((centre.iter().map(|c| c - r).collect(), centre.iter().map(|c| c + r).collect()))
}

/// Every `x` in `Z^n` with `|x - ⌊x̄⌋|_∞ <= radius` and `Ax <= b`, in
/// lexicographic order.
pub fn enumerate_lattice_points(inst: &ProblemInstance, radius: u64, cap: u128) -> Result<Vec<Vec<BigInt>>> {
    let (lo, hi) = search_box(inst, radius)?;
    enumerate_box(inst, &lo, &hi, cap)
}

fn enumerate_box(inst: &ProblemInstance, lo: &[i64], hi: &[i64], cap: u128) -> Result<Vec<Vec<BigInt>>> {
    let n = inst.n();
    let volume = lo.iter().zip(hi).try_fold(1u128, |acc, (l, h)| acc.checked_mul((h - l + 1).max(0) as u128));
    let needed = volume.and_then(|v| v.checked_mul(n as u128)).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::CapExceeded { what: "lattice enumeration", needed, cap });
    }
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Ok(Vec::new());
    }
    let a = small(&inst.a)?;
    let b: Vec<i64> = inst.b.iter().map(|v| v.to_i64()).collect::<Option<_>>().ok_or_else(|| Error::Precondition("b exceeds 64 bits".into()))?;
    let mut x = lo.to_vec();
    // Running activities, updated incrementally as the odometer turns.
    let mut ax: Vec<i128> = a.iter().map(|row| row.iter().zip(&x).map(|(&c, &v)| c as i128 * v as i128).sum()).collect();
    let mut out = Vec::new();
    loop {
        if ax.iter().zip(&b).all(|(&l, &r)| l <= r as i128) {
            out.push(x.iter().map(|&v| BigInt::from(v)).collect());
        }
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            if x[j] < hi[j] {
                x[j] += 1;
                for (i, row) in a.iter().enumerate() {
                    ax[i] += row[j] as i128;
                }
                break;
            }
            let back = (x[j] - lo[j]) as i128;
            x[j] = lo[j];
            for (i, row) in a.iter().enumerate() {
                ax[i] -= row[j] as i128 * back;
            }
        }
    }
}

/// Points of `P ∩ {0,1}^n`.
pub fn enumerate_box_points(inst: &ProblemInstance, cap: u128) -> Result<Vec<Vec<BigInt>>> {
    let n = inst.n();
    enumerate_box(inst, &vec![0; n], &vec![1; n], cap)
}

/// Records points with no lift. A failed proposal falls back to an exact
/// feasibility LP; checking stops after a few confirmed failures.
fn check_membership(
    form: &Formulation,
    points: &[Vec<BigInt>],
    propose: impl Fn(&[BigInt]) -> Option<RatVector>,
    report: &mut VerificationReport,
) {
    for p in points {
        report.points_checked += 1;
        if propose(p).is_some_and(|full| form.satisfies(&full, false)) {
            continue;
        }
        if lift_point(form, &to_rat_vec(p), false).is_some() {
            continue;
        }
        report.membership_failures.push(p.clone());
        if report.membership_failures.len() >= MAX_CONFIRMED_FAILURES {
            report.notes.push(format!("membership checking stopped after {MAX_CONFIRMED_FAILURES} failures"));
            return;
        }
    }
}

fn ef_value(form: &Formulation, c: &[BigInt], goal: Goal) -> Value {
    let res = lp_exact(form, &to_rat_vec(c), goal);
    match res.status {
        LpStatus::Optimal => Value::Finite(res.value.expect("optimal value")),
        LpStatus::Unbounded => Value::Unbounded,
        LpStatus::Infeasible => Value::Infeasible,
    }
}

/// Best value of `c·x` over `points` and whether every optimal point
/// touches the box boundary.
fn oracle_value(points: &[Vec<BigInt>], c: &[BigInt], goal: Goal, lo: &[i64], hi: &[i64]) -> (Value, bool) {
    let vals: Vec<BigInt> = points.iter().map(|p| p.iter().zip(c).map(|(x, w)| x * w).sum()).collect();
    let best = match goal {
        Goal::Min => vals.iter().min(),
        Goal::Max => vals.iter().max(),
    };
    let Some(best) = best.cloned() else { return (Value::Infeasible, false) };
    let boundary = points.iter().zip(&vals).filter(|(_, v)| **v == best).all(|(p, _)| {
        p.iter().enumerate().any(|(j, x)| x == &BigInt::from(lo[j]) || x == &BigInt::from(hi[j]))
    });
    (Value::Finite(BigRational::from_integer(best)), boundary)
}

fn compare(report: &mut VerificationReport, c: Vec<BigInt>, ef: Value, oracle: Value) {
    report.objectives_tested += 1;
    if ef == oracle {
        report.matches += 1;
    } else {
        report.mismatches.push(Mismatch { objective: c, ef, oracle });
    }
}

/// Is `min c·x` over `{Ax <= b}` bounded, i.e. is `-c` a nonnegative
/// combination of the rows of `A`? Decided by an exact feasibility LP.
pub fn objective_bounded(a: &IntMatrix, c: &[BigInt]) -> bool {
    let m = a.rows();
    let mut rows: Vec<Row> = (0..a.cols())
        .map(|j| {
            let terms = (0..m).map(|i| (i, BigRational::from_integer(a.get(i, j).clone()))).collect();
            Row::new(terms, Sense::Eq, BigRational::from_integer(-c[j].clone()), RowTag::Cone)
        })
        .collect();
    rows.extend((0..m).map(|i| Row::new(vec![(i, BigRational::one())], Sense::Ge, BigRational::zero(), RowTag::Cone)));
    solve_rows(m, &rows, &vec![BigRational::zero(); m], Goal::Min, false).status == LpStatus::Optimal
}

/// Extreme rays of the pointed cone `{d : A d <= 0}`, primitive and sorted.
pub fn extreme_rays(a: &IntMatrix, cap: u128) -> Result<Vec<Vec<BigInt>>> {
    let (m, n) = (a.rows(), a.cols());
    if n == 1 {
        let mut rays = Vec::new();
        for d in [1i64, -1] {
            if (0..m).all(|i| (a.get(i, 0) * d).is_negative() || a.get(i, 0).is_zero()) {
                rays.push(vec![BigInt::from(d)]);
            }
        }
        return Ok(rays);
    }
    let needed = binomial(m, n - 1);
    if needed > cap {
        return Err(Error::CapExceeded { what: "extreme ray enumeration", needed, cap });
    }
    let ar = a.to_rat();
    let mut rays: Vec<Vec<BigInt>> = Vec::new();
    for rows in (0..m).combinations(n - 1) {
        let sub = a.select_rows(&rows).to_rat();
        if rank(&sub) != n - 1 {
            continue;
        }
        let k = kernel_basis(&sub);
        let d = primitive(&k[0]);
        let ad = ar.mul_vec(&to_rat_vec(&d)).expect("dimensions agree");
        let sign = if ad.iter().all(|v| !v.is_positive()) {
            1
        } else if ad.iter().all(|v| !v.is_negative()) {
            -1
        } else {
            continue;
        };
        let d: Vec<BigInt> = d.into_iter().map(|v| v * sign).collect();
        if !rays.contains(&d) {
            rays.push(d);
        }
    }
    rays.sort();
    Ok(rays)
}

/// `rec(EF) = {d : A d <= 0}`: every extreme ray lifts, and no row of `A`
/// is unbounded above over the homogenized formulation.
fn check_rays(art: &EfArtifact, caps: &Caps, report: &mut VerificationReport) -> Result<()> {
    let form = &art.formulation;
    for d in extreme_rays(&art.a, caps.enum_cap)? {
        let dr = to_rat_vec(&d);
        let ok = art.propose_ray_lift(&dr).is_some_and(|full| form.satisfies(&full, true)) || lift_point(form, &dr, true).is_some();
        if !ok {
            report.ray_failures.push(format!("recession direction ({}) has no lift", d.iter().join(", ")));
        }
    }
    for i in 0..art.a.rows() {
        if (0..i).any(|j| art.a.row(j) == art.a.row(i)) {
            continue;
        }
        let mut cost = vec![BigRational::zero(); form.num_vars()];
        for (j, &v) in form.projection.iter().enumerate() {
            cost[v] = BigRational::from_integer(art.a.get(i, j).clone());
        }
        if solve_rows(form.num_vars(), &form.rows, &cost, Goal::Max, true).status == LpStatus::Unbounded {
            report.ray_failures.push(format!("formulation recedes along a direction with a_{i} d > 0"));
        }
    }
    Ok(())
}

/// Hull equality check of `art` against `conv(P ∩ Z^n)`, restricted to the
/// radius box around the apex (or to `{0,1}^n` when the artifact carries the
/// unit box).
pub fn verify_hull(art: &EfArtifact, inst: &ProblemInstance, radius: u64, num_objectives: usize, seed: u64, caps: &Caps) -> Result<VerificationReport> {
    let mut report = VerificationReport::new(&art.label);
    let n = inst.n();
    let (lo, hi) = if art.has_box { (vec![0; n], vec![1; n]) } else { search_box(inst, radius)? };
    let points = enumerate_box(inst, &lo, &hi, caps.lattice_cap)?;
    check_membership(&art.formulation, &points, |p| art.propose_lift(p), &mut report);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0;
    while report.objectives_tested < num_objectives && attempts < 4 * num_objectives.max(1) {
        attempts += 1;
        let (c, goal) = if art.has_box {
            ((0..n).map(|_| BigInt::from(rng.gen_range(1..=9))).collect::<Vec<_>>(), Goal::Max)
        } else {
            let u: Vec<BigInt> = (0..inst.m()).map(|_| BigInt::from(rng.gen_range(0..=3))).collect();
            let atu = inst.a.transpose().mul_vec(&u)?;
            (atu.into_iter().map(|v| -v).collect(), Goal::Min)
        };
        if c.iter().all(Zero::is_zero) || (!art.has_box && !objective_bounded(&inst.a, &c)) {
            continue;
        }
        let (oracle, boundary) = oracle_value(&points, &c, goal, &lo, &hi);
        if boundary && !art.has_box {
            report.boundary_active += 1;
        }
        let ef = ef_value(&art.formulation, &c, goal);
        compare(&mut report, c, ef, oracle);
    }
    if !art.has_box {
        check_rays(art, caps, &mut report)?;
    }
    Ok(report.finish())
}

/// Row counts of an artifact against its declared bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeCheck {
    pub inequalities: usize,
    /// The branch bound plus linking rows (and box rows when present).
    pub bound: u128,
    pub linking: usize,
    /// `C n^Δ`.
    pub poly_bound: u128,
    pub holds: bool,
}

pub fn verify_size_bound(art: &EfArtifact) -> SizeCheck {
    let s = &art.formulation.size;
    let n = art.x_vars.len() as u128;
    let box_rows = if art.has_box { 2 * n } else { 0 };
    let base = match art.branch {
        Branch::Apex => 4 * n * n * (s.delta as u128).pow(2),
        Branch::PureCone | Branch::Circulation => s.declared_bound,
    };
    let bound = base + s.linking_rows as u128 + box_rows;
    let actual = art.formulation.inequality_count();
    SizeCheck {
        inequalities: actual,
        bound,
        linking: s.linking_rows,
        poly_bound: s.poly_bound + box_rows,
        holds: actual as u128 <= bound && actual as u128 <= s.poly_bound + box_rows,
    }
}

/// Nonnegative integer circulations with entries at most `bound`, found by
/// fixing the non-tree arcs of a spanning forest and solving for the rest.
pub fn enumerate_circulations(base: &BaseGraph, bound: i64, cap: u128) -> Result<Vec<Vec<i64>>> {
    let arcs = &base.arcs;
    let mut parent_arc: Vec<Option<usize>> = vec![None; base.nodes];
    let mut seen = vec![false; base.nodes];
    let mut order: Vec<usize> = Vec::new();
    let mut in_tree = vec![false; arcs.len()];
    for root in 0..base.nodes {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (a, &(t, h)) in arcs.iter().enumerate() {
                let w = if t == v { h } else if h == v { t } else { continue };
                if !seen[w] {
                    seen[w] = true;
                    parent_arc[w] = Some(a);
                    in_tree[a] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let free: Vec<usize> = (0..arcs.len()).filter(|&a| !in_tree[a]).collect();
    let needed = ((bound + 1) as u128).checked_pow(free.len() as u32).unwrap_or(u128::MAX);
    if needed > cap {
        return Err(Error::CapExceeded { what: "circulation enumeration", needed, cap });
    }
    let mut out = Vec::new();
    let mut vals = vec![0i64; free.len()];
    loop {
        let mut y = vec![0i64; arcs.len()];
        let mut excess = vec![0i64; base.nodes];
        for (k, &a) in free.iter().enumerate() {
            y[a] = vals[k];
            excess[arcs[a].0] += vals[k];
            excess[arcs[a].1] -= vals[k];
        }
        let mut ok = true;
        for &v in order.iter().rev() {
            let Some(a) = parent_arc[v] else { continue };
            let (t, h) = arcs[a];
            let (flow, other) = if t == v { (-excess[v], h) } else { (excess[v], t) };
            if !(0..=bound).contains(&flow) {
                ok = false;
                break;
            }
            y[a] = flow;
            excess[v] = 0;
            if t == v {
                excess[other] -= flow;
            } else {
                excess[other] += flow;
            }
        }
        if ok {
            out.push(y);
        }
        let mut j = free.len();
        loop {
            if j == 0 {
                return Ok(out);
            }
            j -= 1;
            if vals[j] < bound {
                vals[j] += 1;
                break;
            }
            vals[j] = 0;
        }
    }
}

/// Hull equality of a standalone circulation formulation against brute force
/// over circulations with entries at most `bound` in the target class.
pub fn verify_circulation(
    ef: &CirculationEf,
    w: &IntMatrix,
    cs: &CosetSystem,
    target: usize,
    bound: i64,
    num_objectives: usize,
    seed: u64,
    caps: &Caps,
) -> Result<VerificationReport> {
    let base = &ef.block.base;
    let mut report = VerificationReport::new("circulation");
    let all = enumerate_circulations(base, bound, caps.lattice_cap)?;
    let mut points: Vec<Vec<BigInt>> = Vec::new();
    let mut cycles: Vec<Vec<BigInt>> = Vec::new();
    for y in &all {
        let yb: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
        if y.iter().all(|&v| v <= 1) && y.iter().any(|&v| v == 1) {
            cycles.push(yb.clone());
        }
        if cs.classify(&w.mul_vec(&yb)?)? == target {
            points.push(yb);
        }
    }
    let form = &ef.formulation;
    check_membership(form, &points, |p| ef.propose_lift(p), &mut report);

    let arcs = base.arcs.len();
    let lo = vec![0i64; arcs];
    let hi = vec![bound; arcs];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..num_objectives {
        let c: Vec<BigInt> = (0..arcs).map(|_| BigInt::from(rng.gen_range(1..=9))).collect();
        let (oracle, boundary) = oracle_value(&points, &c, Goal::Min, &lo, &hi);
        if boundary {
            report.boundary_active += 1;
        }
        let ef_v = ef_value(form, &c, Goal::Min);
        compare(&mut report, c, ef_v, oracle);
    }

    for d in &cycles {
        let dr = to_rat_vec(d);
        let ok = ef.propose_ray_lift(&dr).is_some_and(|full| form.satisfies(&full, true)) || lift_point(form, &dr, true).is_some();
        if !ok {
            report.ray_failures.push(format!("cycle ({}) has no lift", d.iter().join(", ")));
        }
    }
    // Recession cone inside {y >= 0, D y = 0}.
    let inc = base.incidence();
    let mut checks: Vec<(Vec<BigRational>, Goal)> = Vec::new();
    for a in 0..arcs {
        let mut e = vec![BigRational::zero(); arcs];
        e[a] = BigRational::one();
        checks.push((e, Goal::Min));
    }
    for v in 0..inc.rows() {
        let row: Vec<BigRational> = inc.row(v).iter().map(|x| BigRational::from_integer(x.clone())).collect();
        checks.push((row.clone(), Goal::Min));
        checks.push((row, Goal::Max));
    }
    for (obj, goal) in checks {
        let mut cost = vec![BigRational::zero(); form.num_vars()];
        for (k, &v) in form.projection.iter().enumerate() {
            cost[v] = obj[k].clone();
        }
        if solve_rows(form.num_vars(), &form.rows, &cost, goal, true).status == LpStatus::Unbounded {
            report.ray_failures.push("formulation recedes outside the circulation cone".into());
            break;
        }
    }
    Ok(report.finish())
}

/// Coset of `W y` is `target` exactly when `W y - f` lies in `H Z^d`.
pub fn in_target_class(cs: &CosetSystem, w: &IntMatrix, f: &[BigInt], y: &[BigInt]) -> Result<bool> {
    let wy = w.mul_vec(y)?;
    let diff: Vec<BigInt> = wy.iter().zip(f).map(|(a, b)| a - b).collect();
    Ok(cs.in_lattice(&diff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_odd_cycle_stab;
    use crate::linalg::int_vec;
    use crate::pipeline::build_ef;

    fn one_by_one(b: i64) -> ProblemInstance {
        ProblemInstance::new(IntMatrix::from_rows(&[[2]]), int_vec(&[b]), "1x1").unwrap()
    }

    #[test]
    fn lattice_examples() {
        let cap = 1_000_000;
        let pts = enumerate_lattice_points(&one_by_one(1), 3, cap).unwrap();
        assert_eq!(pts, vec![int_vec(&[-3]), int_vec(&[-2]), int_vec(&[-1]), int_vec(&[0])]);
        let pts = enumerate_lattice_points(&one_by_one(2), 2, cap).unwrap();
        assert_eq!(pts, vec![int_vec(&[-1]), int_vec(&[0]), int_vec(&[1])]);
        let c5 = gen_odd_cycle_stab(5).unwrap();
        let pts = enumerate_lattice_points(&c5, 2, cap).unwrap();
        let stable = (0..32u32)
            .map(|s| (0..5).map(|i| BigInt::from((s >> i) & 1)).collect::<Vec<_>>())
            .filter(|x| (0..5).all(|i| &x[i] + &x[(i + 1) % 5] <= BigInt::one()))
            .collect::<Vec<_>>();
        assert_eq!(stable.len(), 11);
        assert!(stable.iter().all(|s| pts.contains(s)));
        assert!(enumerate_lattice_points(&c5, 6, 100).is_err());
    }

    #[test]
    fn bounded_objectives() {
        let a = IntMatrix::from_rows(&[[2]]);
        assert!(objective_bounded(&a, &int_vec(&[-1])));
        assert!(!objective_bounded(&a, &int_vec(&[1])));
    }

    #[test]
    fn rays_of_simple_cones() {
        assert_eq!(extreme_rays(&IntMatrix::from_rows(&[[2]]), 100).unwrap(), vec![int_vec(&[-1])]);
        let a = IntMatrix::from_rows(&[[1, 1], [1, -1]]);
        assert_eq!(extreme_rays(&a, 100).unwrap(), vec![int_vec(&[-1, -1]), int_vec(&[-1, 1])]);
        let a = IntMatrix::from_rows(&[[1, 1], [1, -1], [-1, 0]]);
        assert!(extreme_rays(&a, 100).unwrap().is_empty());
    }

    #[test]
    fn circulations_of_triangle() {
        let tri = BaseGraph { nodes: 3, arcs: vec![(0, 1), (1, 2), (2, 0)] };
        let c = enumerate_circulations(&tri, 6, 1000).unwrap();
        assert_eq!(c, (0..=6).map(|t| vec![t; 3]).collect::<Vec<_>>());
        let two = BaseGraph { nodes: 2, arcs: vec![(0, 1), (1, 0), (0, 0)] };
        assert_eq!(enumerate_circulations(&two, 1, 1000).unwrap().len(), 4);
    }

    #[test]
    fn one_dimensional_hull_passes() {
        let caps = Caps::default();
        let inst = one_by_one(1);
        let art = build_ef(&inst, &caps).unwrap();
        let rep = verify_hull(&art, &inst, 6, 20, 7, &caps).unwrap();
        assert!(rep.passed(), "{rep}");
        assert_eq!(rep.objectives_tested, 20);
        let again = verify_hull(&art, &inst, 6, 20, 7, &caps).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn dropped_linking_row_fails() {
        let caps = Caps::default();
        let inst = one_by_one(1);
        let mut art = build_ef(&inst, &caps).unwrap();
        assert!(art.formulation.drop_tagged_row(RowTag::Linking, 0));
        assert_eq!(verify_hull(&art, &inst, 6, 5, 7, &caps).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn size_bound_holds_on_c5() {
        let caps = Caps::default();
        let art = build_ef(&gen_odd_cycle_stab(5).unwrap(), &caps).unwrap();
        let s = verify_size_bound(&art);
        assert!(s.holds);
        assert_eq!(s.bound, 21 + 5);
    }
}
