//! Condition checking and end-to-end construction of the extended formulation
//! of `conv(P(A, b) ∩ Z^n)`.
//!
//! Three branches, exactly one of which fires on an accepted instance:
//! `gcd(A) = 1` gives the cone `{y >= 0 : R y = 0}` pulled back through
//! `y = b - Ax`; an integral apex gives `P` itself; otherwise the slack
//! space hull is a congruency-constrained circulation hull on the graph
//! realizing the dual matroid.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::circulation::{assemble_into, pattern_bound, BaseGraph, CirculationBlock, CosetSystem};
use crate::error::{Error, Result};
use crate::formulation::{Block, Formulation, RowTag, Sense};
use crate::hnf::{basis_decomposition, hermite_decompose, reformulate, CongruentSystem};
use crate::instance::ProblemInstance;
use crate::linalg::{as_integral, greedy_row_basis, inverse, solve_int, to_rat_vec, IntMatrix, RatVector};
use crate::modularity::{find_basis, subdeterminant_profile, BasisSplit, ModularityProfile};
use crate::realize::{column_supports, incidence_matrix, loop_nodes, realize_graphic, realize_supports, scaling_equivalence, sign_fix, GraphRealization};
use crate::Caps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// `A` strictly Δ-modular (or `gcd(A) = 1`).
    Modularity,
    /// The row matroid of `A` is cographic.
    Cographic,
    /// `b` lies in the column span of `A`.
    Span,
}

impl Condition {
    pub fn roman(self) -> &'static str {
        match self {
            Condition::Modularity => "(i)",
            Condition::Cographic => "(ii)",
            Condition::Span => "(iii)",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Condition::Modularity => "A is strictly Delta-modular",
            Condition::Cographic => "the row matroid of A is cographic",
            Condition::Span => "b lies in the column span of A",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail(String),
    Undecided(String),
}

impl Status {
    fn is_fail(&self) -> bool {
        matches!(self, Status::Fail(_))
    }

    fn is_undecided(&self) -> bool {
        matches!(self, Status::Undecided(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(Vec<Condition>),
    Undecided(Vec<Condition>),
}

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub profile: Option<ModularityProfile>,
    pub modularity: Status,
    pub cographic: Status,
    pub span: Status,
    pub apex: Option<RatVector>,
    pub apex_integral: bool,
    pub verdict: Verdict,
}

impl ConditionReport {
    pub fn status(&self, c: Condition) -> &Status {
        match c {
            Condition::Modularity => &self.modularity,
            Condition::Cographic => &self.cographic,
            Condition::Span => &self.span,
        }
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = &self.profile {
            writeln!(f, "delta = {}, gcd = {}, strictly modular = {}", p.delta, p.gcd, p.strictly_modular)?;
        }
        for c in [Condition::Modularity, Condition::Cographic, Condition::Span] {
            let s = match self.status(c) {
                Status::Ok => "ok".to_string(),
                Status::Fail(why) => format!("FAIL: {why}"),
                Status::Undecided(why) => format!("undecided: {why}"),
            };
            writeln!(f, "condition {} ({}): {s}", c.roman(), c.describe())?;
        }
        if self.span == Status::Ok {
            writeln!(f, "apex integral: {}", self.apex_integral)?;
        }
        match &self.verdict {
            Verdict::Accept => write!(f, "verdict: accept"),
            Verdict::Reject(cs) => write!(f, "verdict: reject, condition {} fails", cs[0].roman()),
            Verdict::Undecided(cs) => write!(f, "verdict: undecided on condition {}", cs[0].roman()),
        }
    }
}

/// Row-index realization of a hint, listed in the column order of `R`.
fn hint_arcs(inst: &ProblemInstance, order: &[usize]) -> Result<Option<Vec<(usize, usize)>>> {
    let Some(hint) = &inst.graph_hint else { return Ok(None) };
    let m = inst.m();
    let k = m - inst.n();
    if hint.nodes != k + 1 {
        return Err(Error::InvalidHint(format!("{} nodes, expected {}", hint.nodes, k + 1)));
    }
    if hint.arcs.len() != m || hint.column_map.len() != m {
        return Err(Error::InvalidHint(format!("{} arcs and {} map entries for {m} rows", hint.arcs.len(), hint.column_map.len())));
    }
    let mut by_row = vec![None; m];
    for (arc, &row) in hint.column_map.iter().enumerate() {
        if row >= m || by_row[row].is_some() {
            return Err(Error::InvalidHint(format!("column_map entry {row} is out of range or repeated")));
        }
        by_row[row] = Some(hint.arcs[arc]);
    }
    Ok(Some(order.iter().map(|&r| by_row[r].expect("permutation")).collect()))
}

/// `-A_N A_B^{-1}` for any basis.
fn standard_form_block(split: &BasisSplit) -> Result<crate::linalg::RatMatrix> {
    let inv = inverse(&split.a_b.to_rat())?.ok_or_else(|| Error::Reformulation("A_B is singular".into()))?;
    let s = split.a_n.to_rat().mul(&inv)?;
    Ok(crate::linalg::RatMatrix::from_fn(s.rows(), s.cols(), |i, j| -s.get(i, j).clone()))
}

/// The dual matroid of the rows of `A` is graphic, certified by a realization
/// whose ratio matrix is a diagonal rescaling of `-A_N A_B^{-1}`.
fn check_cographic(inst: &ProblemInstance, split: &BasisSplit, caps: &Caps) -> Result<Status> {
    let s = standard_form_block(split)?;
    let k = s.rows();
    let n = s.cols();
    let supports = column_supports(k, n, |i, j| s.get(i, j).clone());
    let arcs = match hint_arcs(inst, &split.order())? {
        Some(arcs) => {
            crate::realize::validate_hint(k, &supports, &arcs)?;
            arcs
        }
        None => match realize_supports(k, &supports, caps.realization_budget) {
            Ok(Some(arcs)) => arcs,
            Ok(None) => {
                return Ok(Status::Fail(format!(
                    "exhaustive search found no graph on {} nodes realizing the dual matroid",
                    k + 1
                )))
            }
            Err(Error::SearchBudget(b)) => return Ok(Status::Undecided(format!("realization search budget {b} exhausted"))),
            Err(e) => return Err(e),
        },
    };
    let g = GraphRealization::from_arcs(k + 1, arcs);
    let ratio = g.ratio(n)?;
    if scaling_equivalence(&s, &ratio).is_none() {
        return Ok(Status::Fail("the dual matroid has graphic fundamental circuits but is not graphic".into()));
    }
    Ok(Status::Ok)
}

pub fn check_conditions(inst: &ProblemInstance, caps: &Caps) -> Result<ConditionReport> {
    let profile = match &inst.trusted_profile {
        Some(p) => Some(p.clone()),
        None => match subdeterminant_profile(&inst.a, caps.enum_cap) {
            Ok(p) => Some(p),
            Err(Error::CapExceeded { .. }) => None,
            Err(e) => return Err(e),
        },
    };
    let modularity = match &profile {
        None => Status::Undecided(format!(
            "C({}, {}) minors exceed the enumeration cap {}",
            inst.m(),
            inst.n(),
            caps.enum_cap
        )),
        Some(p) if p.strictly_modular || p.gcd.is_one() => Status::Ok,
        Some(p) => Status::Fail(format!("nonzero n x n minors take several magnitudes (delta {}, gcd {})", p.delta, p.gcd)),
    };

    let basis = match &profile {
        Some(p) if p.strictly_modular => find_basis(&inst.a, p)?.basis_rows,
        _ => greedy_row_basis(&inst.a),
    };
    let split = BasisSplit::from_basis(&inst.a, basis);
    let cographic = check_cographic(inst, &split, caps)?;

    let (span, apex) = match solve_int(&inst.a, &inst.b)? {
        Some(x) => (Status::Ok, Some(x)),
        None => (Status::Fail("A x = b has no rational solution".into()), None),
    };
    let apex_integral = apex.as_ref().is_some_and(|x| as_integral(x).is_some());

    let statuses = [(Condition::Modularity, &modularity), (Condition::Cographic, &cographic), (Condition::Span, &span)];
    let failed: Vec<Condition> = statuses.iter().filter(|(_, s)| s.is_fail()).map(|(c, _)| *c).collect();
    let undecided: Vec<Condition> = statuses.iter().filter(|(_, s)| s.is_undecided()).map(|(c, _)| *c).collect();
    let verdict = if !failed.is_empty() {
        Verdict::Reject(failed)
    } else if !undecided.is_empty() {
        Verdict::Undecided(undecided)
    } else {
        Verdict::Accept
    };
    Ok(ConditionReport { profile, modularity, cographic, span, apex, apex_integral, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Integral apex: the hull is `P` itself.
    Apex,
    /// `gcd(A) = 1`: the slack hull is `{y >= 0 : R y = 0}`.
    PureCone,
    /// Congruency-constrained circulations on the realized graph.
    Circulation,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Apex => "apex",
            Branch::PureCone => "pure_cone",
            Branch::Circulation => "circulation",
        }
    }
}

/// An extended formulation in `x`-space together with what is needed to
/// lift points and rays into it.
#[derive(Debug, Clone)]
pub struct EfArtifact {
    pub formulation: Formulation,
    pub branch: Branch,
    pub label: String,
    pub a: IntMatrix,
    pub b: Vec<BigInt>,
    pub apex: RatVector,
    pub x_vars: Vec<usize>,
    /// Slack variable of each row of `A`, empty on the apex branch.
    pub y_vars: Vec<usize>,
    pub block: Option<CirculationBlock>,
    pub system: Option<CongruentSystem>,
    pub target_coset: Option<usize>,
    pub has_box: bool,
    pub notes: Vec<String>,
}

impl EfArtifact {
    fn slack(&self, x: &[BigRational], homogeneous: bool) -> Vec<BigRational> {
        let ax = self.a.to_rat().mul_vec(x).expect("dimensions agree");
        (0..self.a.rows())
            .map(|i| if homogeneous { -ax[i].clone() } else { BigRational::from_integer(self.b[i].clone()) - &ax[i] })
            .collect()
    }

    /// A full assignment of the formulation's variables projecting to `x`.
    /// The caller still checks it; `None` when no proposal exists.
    pub fn propose_lift(&self, x: &[BigInt]) -> Option<RatVector> {
        let xr = to_rat_vec(x);
        let mut full = vec![BigRational::zero(); self.formulation.num_vars()];
        for (i, &v) in self.x_vars.iter().enumerate() {
            full[v] = xr[i].clone();
        }
        let y = self.slack(&xr, false);
        for (i, &v) in self.y_vars.iter().enumerate() {
            full[v] = y[i].clone();
        }
        if let Some(block) = &self.block {
            let arc_y: Option<Vec<BigInt>> = block.y_vars.iter().map(|&v| as_integral(&[full[v].clone()]).map(|mut z| z.remove(0))).collect();
            if !block.fill_lift(&arc_y?, &mut full) {
                return None;
            }
        }
        Some(full)
    }

    /// A direction of the homogenized formulation projecting to `d`.
    pub fn propose_ray_lift(&self, d: &[BigRational]) -> Option<RatVector> {
        let mut full = vec![BigRational::zero(); self.formulation.num_vars()];
        for (i, &v) in self.x_vars.iter().enumerate() {
            full[v] = d[i].clone();
        }
        let y = self.slack(d, true);
        for (i, &v) in self.y_vars.iter().enumerate() {
            full[v] = y[i].clone();
        }
        if let Some(block) = &self.block {
            let arc_y: Vec<BigRational> = block.y_vars.iter().map(|&v| full[v].clone()).collect();
            if !block.fill_ray(&arc_y, &mut full) {
                return None;
            }
        }
        Some(full)
    }

    /// Rows in the extended formulation counted as its size.
    pub fn size(&self) -> usize {
        self.formulation.size.inequalities
    }
}

fn x_and_slack_vars(form: &mut Formulation, m: usize, n: usize) -> (Vec<usize>, Vec<usize>) {
    let x_vars: Vec<usize> = (0..n).map(|j| form.add_var(format!("x_{j}"), Block::Original)).collect();
    let y_vars: Vec<usize> = (0..m).map(|i| form.add_var(format!("y_{i}"), Block::Slack)).collect();
    form.projection = x_vars.clone();
    (x_vars, y_vars)
}

/// `y_i + a_i x = b_i` for every row.
fn add_linking(form: &mut Formulation, a: &IntMatrix, b: &[BigInt], x_vars: &[usize], y_vars: &[usize]) {
    for i in 0..a.rows() {
        let mut terms = vec![(y_vars[i], BigRational::one())];
        for j in 0..a.cols() {
            if !a.get(i, j).is_zero() {
                terms.push((x_vars[j], BigRational::from_integer(a.get(i, j).clone())));
            }
        }
        form.add_row(terms, Sense::Eq, BigRational::from_integer(b[i].clone()), RowTag::Linking);
    }
}

fn ceil_div(a: u128, b: u128) -> u128 {
    a.div_ceil(b.max(1))
}

pub fn build_ef(inst: &ProblemInstance, caps: &Caps) -> Result<EfArtifact> {
    let report = check_conditions(inst, caps)?;
    match &report.verdict {
        Verdict::Accept => {}
        Verdict::Reject(cs) => {
            let c = cs[0];
            return Err(Error::Rejected(format!("condition {} fails: {}", c.roman(), c.describe())));
        }
        Verdict::Undecided(cs) => {
            return Err(Error::Undecided(format!("condition {} within the configured caps", cs[0].roman())));
        }
    }
    let profile = report.profile.clone().expect("accepted instances have a profile");
    let apex = report.apex.clone().expect("accepted instances have an apex");
    let (m, n) = (inst.m(), inst.n());
    let delta = profile.delta.to_u64().ok_or_else(|| Error::DeltaCapExceeded { delta: profile.delta.to_string(), cap: caps.delta_cap })?;
    let mut form = Formulation::new();
    let mut art = EfArtifact {
        formulation: Formulation::new(),
        branch: Branch::Apex,
        label: inst.label.clone(),
        a: inst.a.clone(),
        b: inst.b.clone(),
        apex,
        x_vars: Vec::new(),
        y_vars: Vec::new(),
        block: None,
        system: None,
        target_coset: None,
        has_box: false,
        notes: Vec::new(),
    };

    if profile.gcd.is_one() {
        let hnf = hermite_decompose(&inst.a)?;
        hnf.check(&inst.a)?;
        let sys = reformulate(&inst.a, &inst.b, &hnf, caps.delta_cap)?;
        let (x_vars, y_vars) = x_and_slack_vars(&mut form, m, n);
        add_linking(&mut form, &inst.a, &inst.b, &x_vars, &y_vars);
        let order_vars: Vec<usize> = hnf.order.iter().map(|&i| y_vars[i]).collect();
        for &v in &y_vars {
            form.add_row(vec![(v, BigRational::one())], Sense::Ge, BigRational::zero(), RowTag::Cone);
        }
        for i in 0..sys.r().rows() {
            let terms: Vec<(usize, BigRational)> = (0..m)
                .filter(|&p| !sys.r().get(i, p).is_zero())
                .map(|p| (order_vars[p], BigRational::from_integer(sys.r().get(i, p).clone())))
                .collect();
            form.add_row(terms, Sense::Eq, BigRational::zero(), RowTag::Cone);
        }
        form.recount();
        form.size.delta = 1;
        form.size.base_arcs = m;
        form.size.layered_arcs = m;
        form.size.declared_bound = 1 + m as u128;
        form.size.poly_constant = 2 * ceil_div(m as u128, n as u128);
        form.size.poly_bound = form.size.poly_constant * n as u128;
        art.branch = Branch::PureCone;
        art.x_vars = x_vars;
        art.y_vars = y_vars;
        art.system = Some(sys);
        art.notes.push("gcd(A) = 1: every integral slack vector in the cone lifts to an integral point".into());
    } else if report.apex_integral {
        let mut seen: Vec<(Vec<BigInt>, BigInt)> = Vec::new();
        let x_vars: Vec<usize> = (0..n).map(|j| form.add_var(format!("x_{j}"), Block::Original)).collect();
        form.projection = x_vars.clone();
        for i in 0..m {
            let key = (inst.a.row(i).to_vec(), inst.b[i].clone());
            if seen.contains(&key) {
                continue;
            }
            let terms: Vec<(usize, BigRational)> = (0..n)
                .filter(|&j| !inst.a.get(i, j).is_zero())
                .map(|j| (x_vars[j], BigRational::from_integer(inst.a.get(i, j).clone())))
                .collect();
            form.add_row(terms, Sense::Le, BigRational::from_integer(inst.b[i].clone()), RowTag::Original);
            seen.push(key);
        }
        form.recount();
        let d2 = (delta as u128).pow(2);
        form.size.delta = delta;
        form.size.declared_bound = 4 * (n as u128).pow(2) * d2;
        form.size.poly_constant = 4 * d2;
        form.size.poly_bound = form.size.poly_constant * (n as u128).pow(delta as u32);
        art.branch = Branch::Apex;
        art.x_vars = x_vars;
        art.notes.push("integral apex: P is its own integer hull".into());
    } else {
        if delta > caps.delta_cap {
            return Err(Error::DeltaCapExceeded { delta: delta.to_string(), cap: caps.delta_cap });
        }
        let split = find_basis(&inst.a, &profile)?;
        let hnf = basis_decomposition(&split)?;
        hnf.check(&inst.a)?;
        let sys = reformulate(&inst.a, &inst.b, &hnf, caps.delta_cap)?;
        let hint = hint_arcs(inst, &hnf.order)?;
        let realized = realize_graphic(&hnf.r, hint.as_deref(), caps.realization_budget)?;
        let s = hnf.r.select_cols(&(0..n).collect::<Vec<_>>());
        let fix = sign_fix(&s, &realized)?;
        let d = incidence_matrix(&realized, &fix);
        let base = BaseGraph::from_incidence_with_loops(&d, &loop_nodes(&realized))?;
        let w = IntMatrix::from_fn(n, m, |i, p| if i == p { BigInt::one() } else { BigInt::zero() });
        let cs: CosetSystem = sys.cosets.clone().expect("congruency mode");

        let (x_vars, y_vars) = x_and_slack_vars(&mut form, m, n);
        add_linking(&mut form, &inst.a, &inst.b, &x_vars, &y_vars);
        let arc_vars: Vec<usize> = hnf.order.iter().map(|&i| y_vars[i]).collect();
        let block = assemble_into(&mut form, &arc_vars, &base, &w, Some(&cs), &sys.target, caps.assignment_cap)?;
        form.recount();
        let c = pattern_bound(delta) * (1 + (delta as u128).pow(2)) * ceil_div(m as u128, n as u128).pow(delta as u32);
        form.size.delta = delta;
        form.size.declared_bound = block.declared_bound;
        form.size.base_nodes = base.nodes;
        form.size.base_arcs = base.arcs.len();
        form.size.layered_arcs = block.layered_arc_count();
        form.size.disjuncts = block.disjunct_count();
        form.size.poly_constant = c;
        form.size.poly_bound = c * (n as u128).pow(delta as u32);
        art.branch = Branch::Circulation;
        art.x_vars = x_vars;
        art.y_vars = y_vars;
        art.target_coset = sys.target_coset;
        art.block = Some(block);
        art.system = Some(sys);
        art.notes.push(format!(
            "m = {m} rows: a cographic row matroid keeps m linear in n, so |V| = m - n + 1 and |A| = m"
        ));
    }
    if form.size.inequalities as u128 > form.size.poly_bound {
        return Err(Error::Precondition(format!(
            "{} inequalities exceed the recorded bound {} = {} n^{}",
            form.size.inequalities, form.size.poly_bound, form.size.poly_constant, delta
        )));
    }
    art.formulation = form;
    Ok(art)
}

/// Appends `0 <= x <= 1`. Intended for edge-node incidence instances with
/// `b = 1`, whose boxed hull is the stable set polytope.
pub fn stab_box_intersect(art: &EfArtifact, n: usize) -> Result<EfArtifact> {
    if n != art.x_vars.len() {
        return Err(Error::DimensionMismatch(format!("box of dimension {n} for {} variables", art.x_vars.len())));
    }
    let edge_rows = (0..art.a.rows()).all(|i| {
        let row = art.a.row(i);
        row.iter().filter(|v| v.is_one()).count() == 2 && row.iter().filter(|v| !v.is_zero()).count() == 2
    });
    if !edge_rows || art.b.iter().any(|v| !v.is_one()) {
        return Err(Error::Precondition("box intersection expects an edge-node incidence matrix with b = 1".into()));
    }
    let mut out = art.clone();
    for &v in &art.x_vars {
        out.formulation.add_row(vec![(v, BigRational::one())], Sense::Ge, BigRational::zero(), RowTag::Box);
        out.formulation.add_row(vec![(v, BigRational::one())], Sense::Le, BigRational::one(), RowTag::Box);
    }
    out.formulation.recount();
    out.has_box = true;
    out.label = format!("{}-stab", art.label);
    Ok(out)
}
