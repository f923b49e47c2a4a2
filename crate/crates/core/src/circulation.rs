//! Nonnegative integer circulations under a congruency constraint
//! `W y ≡ f (mod H Z^d)`.
//!
//! The hull of such circulations is the projection of a disjunction. Each
//! disjunct fixes a zero-sum-free sequence of nonzero cosets (a pattern)
//! together with one base node per pattern entry, and asks for one unit
//! flow per entry in the layered graph, running from the node's copy in
//! the layer of the partial sum before that entry to its copy in the layer
//! of the partial sum through it.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::formulation::{Block, Formulation, RowTag, Sense};
use crate::hnf::hermite_decompose;
use crate::linalg::{det_exact, inverse, IntMatrix, RatMatrix, RatVector};

/// Representatives `g^0 = 0, g^1, ..., g^{Δ-1}` of `Z^d / H Z^d` taken from
/// `Z^d ∩ H [0,1)^d`, with `g^0` first and the rest in lexicographic order.
#[derive(Debug, Clone)]
pub struct CosetSystem {
    pub h: IntMatrix,
    pub delta: usize,
    pub reps: Vec<Vec<BigInt>>,
    /// `add_table[i][j] = k` with `g^k ≡ g^i + g^j`.
    pub add_table: Vec<Vec<usize>>,
    h_inv: RatMatrix,
    index: HashMap<Vec<BigInt>, usize>,
}

impl CosetSystem {
    pub fn new(h: &IntMatrix, delta_cap: u64) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::NotSquare(h.rows(), h.cols()));
        }
        let det = det_exact(h)?.abs();
        if det.is_zero() {
            return Err(Error::Precondition("H is singular".into()));
        }
        if det > BigInt::from(delta_cap) {
            return Err(Error::DeltaCapExceeded { delta: det.to_string(), cap: delta_cap });
        }
        let delta = det.to_usize().expect("bounded by the cap");
        let d = h.rows();
        let h_inv = inverse(&h.to_rat())?.expect("nonsingular");
        let mut cs = Self { h: h.clone(), delta, reps: Vec::new(), add_table: Vec::new(), h_inv, index: HashMap::new() };

        // H Z^d = L Z^d for the lower triangular column Hermite form L, and
        // the box 0 <= v_i < L_ii is a complete residue system for L.
        let lower = if d == 0 { IntMatrix::zeros(0, 0) } else { hermite_decompose(&h.transpose())?.h.transpose() };
        let bounds: Vec<usize> = (0..d).map(|i| lower.get(i, i).abs().to_usize().expect("divides Δ")).collect();
        let mut reps: Vec<Vec<BigInt>> = Vec::with_capacity(delta);
        let mut v = vec![0usize; d];
        loop {
            let point: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
            reps.push(cs.reduce(&point)?);
            let mut i = 0;
            while i < d {
                v[i] += 1;
                if v[i] < bounds[i] {
                    break;
                }
                v[i] = 0;
                i += 1;
            }
            if i == d {
                break;
            }
        }
        reps.sort();
        reps.dedup();
        if reps.len() != delta {
            return Err(Error::Reformulation(format!("found {} coset representatives, expected {delta}", reps.len())));
        }
        let zero = vec![BigInt::zero(); d];
        let zpos = reps.iter().position(|r| *r == zero).expect("0 reduces to itself");
        let z = reps.remove(zpos);
        reps.insert(0, z);
        cs.index = reps.iter().enumerate().map(|(i, r)| (r.clone(), i)).collect();
        cs.reps = reps;
        let mut table = vec![vec![0usize; delta]; delta];
        for i in 0..delta {
            for j in 0..delta {
                let s: Vec<BigInt> = cs.reps[i].iter().zip(&cs.reps[j]).map(|(a, b)| a + b).collect();
                table[i][j] = cs.classify(&s)?;
            }
        }
        cs.add_table = table;
        Ok(cs)
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// The representative in `H [0,1)^d` congruent to `u`.
    pub fn reduce(&self, u: &[BigInt]) -> Result<Vec<BigInt>> {
        if u.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} for H of order {}", u.len(), self.dim())));
        }
        let t = self.h_inv.mul_vec(&crate::linalg::to_rat_vec(u))?;
        let frac: RatVector = t.iter().map(|x| x - x.floor()).collect();
        let g = self.h.to_rat().mul_vec(&frac)?;
        Ok(g.iter().map(|x| x.to_integer()).collect())
    }

    pub fn classify(&self, u: &[BigInt]) -> Result<usize> {
        let r = self.reduce(u)?;
        self.index
            .get(&r)
            .copied()
            .ok_or_else(|| Error::Reformulation("reduced vector is not a listed representative".into()))
    }

    pub fn add(&self, i: usize, j: usize) -> usize {
        self.add_table[i][j]
    }

    /// Is `u` in `H Z^d`?
    pub fn in_lattice(&self, u: &[BigInt]) -> bool {
        match self.h_inv.mul_vec(&crate::linalg::to_rat_vec(u)) {
            Ok(t) => t.iter().all(|x| x.is_integer()),
            Err(_) => false,
        }
    }
}

/// Nondecreasing sequences of nonzero coset indices, of any length, whose
/// sum is `target` and no nonempty subsequence of which sums to zero.
/// Listed in lexicographic order.
pub fn enumerate_patterns(cs: &CosetSystem, target: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut seq = Vec::new();
    extend_patterns(cs, target, 1, 0, 0u64, &mut seq, &mut out);
    out
}

/// `sums` is the bitmask of classes reached by nonempty subsequences of `seq`.
fn extend_patterns(cs: &CosetSystem, target: usize, from: usize, total: usize, sums: u64, seq: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    for t in from..cs.delta {
        let mut next = sums | (1u64 << t);
        for s in 0..cs.delta {
            if sums & (1u64 << s) != 0 {
                next |= 1u64 << cs.add(s, t);
            }
        }
        if next & 1 != 0 {
            continue;
        }
        let total = if seq.is_empty() { t } else { cs.add(total, t) };
        seq.push(t);
        if total == target {
            out.push(seq.clone());
        }
        extend_patterns(cs, target, t, total, next, seq, out);
        seq.pop();
    }
}

/// `(Δ - 1)^(Δ - 1)`, with `0^0 = 1`.
pub fn pattern_bound(delta: u64) -> u128 {
    if delta <= 1 {
        1
    } else {
        ((delta - 1) as u128).pow((delta - 1) as u32)
    }
}

/// Directed graph read off a node-arc incidence matrix with `+1` at the tail
/// and `-1` at the head. Zero columns are loops at `loop_node`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    pub nodes: usize,
    pub arcs: Vec<(usize, usize)>,
}

impl BaseGraph {
    pub fn from_incidence(d: &IntMatrix) -> Result<Self> {
        Self::from_incidence_with_loops(d, &vec![0; d.cols()])
    }

    pub fn from_incidence_with_loops(d: &IntMatrix, loop_node: &[usize]) -> Result<Self> {
        let mut arcs = Vec::with_capacity(d.cols());
        for j in 0..d.cols() {
            let mut tail = None;
            let mut head = None;
            for i in 0..d.rows() {
                let v = d.get(i, j);
                if v.is_one() && tail.is_none() {
                    tail = Some(i);
                } else if (-v).is_one() && head.is_none() {
                    head = Some(i);
                } else if !v.is_zero() {
                    return Err(Error::Precondition(format!("column {j} is not an incidence column")));
                }
            }
            match (tail, head) {
                (Some(t), Some(h)) => arcs.push((t, h)),
                (None, None) => arcs.push((loop_node[j], loop_node[j])),
                _ => return Err(Error::Precondition(format!("column {j} has a single nonzero")))
            }
        }
        Ok(Self { nodes: d.rows().max(1), arcs })
    }

    pub fn incidence(&self) -> IntMatrix {
        IntMatrix::from_fn(self.nodes, self.arcs.len(), |i, j| {
            let (t, h) = self.arcs[j];
            if t == h {
                BigInt::zero()
            } else if i == t {
                BigInt::one()
            } else if i == h {
                -BigInt::one()
            } else {
                BigInt::zero()
            }
        })
    }
}

/// `H' = (V', A')`: node `(v, l)` has index `l |V| + v`, arc `(a, l)` has
/// index `l |A| + a` and runs from `(tail a, l)` to `(head a, l + class(W_a))`.
#[derive(Debug, Clone)]
pub struct LayeredGraph {
    pub base: BaseGraph,
    pub delta: usize,
    pub arc_class: Vec<usize>,
    pub arcs: Vec<(usize, usize)>,
    pub origin: Vec<usize>,
    pub layer: Vec<usize>,
    pub add_table: Vec<Vec<usize>>,
}

impl LayeredGraph {
    pub fn node(&self, v: usize, layer: usize) -> usize {
        layer * self.base.nodes + v
    }

    pub fn arc(&self, a: usize, layer: usize) -> usize {
        layer * self.base.arcs.len() + a
    }

    pub fn node_count(&self) -> usize {
        self.delta * self.base.nodes
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn incidence(&self) -> IntMatrix {
        BaseGraph { nodes: self.node_count(), arcs: self.arcs.clone() }.incidence()
    }
}

pub fn build_layered(base: &BaseGraph, w: &IntMatrix, cs: &CosetSystem) -> Result<LayeredGraph> {
    if w.cols() != base.arcs.len() || w.rows() != cs.dim() {
        return Err(Error::DimensionMismatch(format!(
            "W is {}x{}, expected {}x{}",
            w.rows(),
            w.cols(),
            cs.dim(),
            base.arcs.len()
        )));
    }
    let arc_class = (0..w.cols()).map(|a| cs.classify(&w.column(a))).collect::<Result<Vec<_>>>()?;
    let (nv, na) = (base.nodes, base.arcs.len());
    let mut arcs = Vec::with_capacity(cs.delta * na);
    let mut origin = Vec::with_capacity(cs.delta * na);
    let mut layer = Vec::with_capacity(cs.delta * na);
    for l in 0..cs.delta {
        for (a, &(t, h)) in base.arcs.iter().enumerate() {
            let to = cs.add(l, arc_class[a]);
            arcs.push((l * nv + t, to * nv + h));
            origin.push(a);
            layer.push(l);
        }
    }
    Ok(LayeredGraph { base: base.clone(), delta: cs.delta, arc_class, arcs, origin, layer, add_table: cs.add_table.clone() })
}

/// `π(x)_a = Σ_l x_{(a, l)}`.
pub fn project<T: Clone + Zero + std::ops::AddAssign>(lg: &LayeredGraph, x: &[T]) -> Vec<T> {
    let mut y = vec![T::zero(); lg.base.arcs.len()];
    for (k, v) in x.iter().enumerate() {
        y[lg.origin[k]] += v.clone();
    }
    y
}

/// One disjunct: a pattern and a node per pattern entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub pattern: usize,
    pub tau: Vec<usize>,
    pub flow_vars: Vec<usize>,
    pub segment_vars: Vec<Vec<usize>>,
    pub lambda: usize,
}

#[derive(Debug, Clone)]
pub enum Layout {
    /// `{y >= 0 : D y = 0}`.
    Cone,
    /// The empty set.
    Empty,
    Disjunctive {
        layered: LayeredGraph,
        patterns: Vec<Vec<usize>>,
        target: usize,
        layered_vars: Vec<usize>,
        assignments: Vec<Assignment>,
        lookup: HashMap<(usize, Vec<usize>), usize>,
    },
}

/// The circulation hull embedded in a formulation: `y_vars` are the
/// projected base-arc variables.
#[derive(Debug, Clone)]
pub struct CirculationBlock {
    pub base: BaseGraph,
    pub y_vars: Vec<usize>,
    pub layout: Layout,
    pub delta: u64,
    pub declared_bound: u128,
}

/// Adds the rows describing the hull of `{y in Z^A_+ : D y = 0, W y ≡ f}` to
/// `form`, over the existing variables `y_vars`.
pub fn assemble_into(
    form: &mut Formulation,
    y_vars: &[usize],
    base: &BaseGraph,
    w: &IntMatrix,
    cs: Option<&CosetSystem>,
    f: &[BigInt],
    assignment_cap: u128,
) -> Result<CirculationBlock> {
    let na = base.arcs.len();
    if y_vars.len() != na {
        return Err(Error::DimensionMismatch(format!("{} arc variables for {na} arcs", y_vars.len())));
    }
    let (delta, target) = match cs {
        Some(cs) => (cs.delta, cs.classify(f)?),
        None => (1, 0),
    };
    if delta == 1 || target == 0 {
        add_cone_rows(form, y_vars, base);
        return Ok(CirculationBlock {
            base: base.clone(),
            y_vars: y_vars.to_vec(),
            layout: Layout::Cone,
            delta: delta as u64,
            declared_bound: pattern_bound(1) * (1 + na as u128),
        });
    }
    let cs = cs.expect("delta > 1");
    let layered = build_layered(base, w, cs)?;
    let patterns = enumerate_patterns(cs, target);
    let nv = base.nodes as u128;
    let bound = pattern_bound(delta as u64) * nv.pow(delta as u32 - 1) * (1 + (delta * layered.arc_count()) as u128);
    if patterns.is_empty() {
        form.add_row(Vec::new(), Sense::Le, -BigRational::one(), RowTag::Infeasible);
        return Ok(CirculationBlock { base: base.clone(), y_vars: y_vars.to_vec(), layout: Layout::Empty, delta: delta as u64, declared_bound: bound });
    }
    let count: u128 = patterns.iter().map(|p| nv.pow(p.len() as u32)).sum();
    if count > assignment_cap {
        return Err(Error::CapExceeded { what: "pattern assignments", needed: count, cap: assignment_cap });
    }

    let nl = layered.arc_count();
    let layered_vars: Vec<usize> =
        (0..nl).map(|k| form.add_var(format!("X_{}_{}", layered.origin[k], layered.layer[k]), Block::Layered)).collect();
    for a in 0..na {
        let mut terms = vec![(y_vars[a], BigRational::one())];
        for l in 0..delta {
            terms.push((layered_vars[layered.arc(a, l)], -BigRational::one()));
        }
        form.add_row(terms, Sense::Eq, BigRational::zero(), RowTag::Projection);
    }

    let d_prime = layered.incidence();
    let mut assignments = Vec::with_capacity(count as usize);
    let mut lookup = HashMap::new();
    for (pi, pattern) in patterns.iter().enumerate() {
        let k = pattern.len();
        for tau in node_sequences(base.nodes, k) {
            let t = assignments.len();
            let flow_vars: Vec<usize> = (0..nl).map(|e| form.add_var(format!("xt_{t}_{e}"), Block::DisjunctFlow(t))).collect();
            let segment_vars: Vec<Vec<usize>> = (0..k)
                .map(|j| (0..nl).map(|e| form.add_var(format!("xs_{t}_{j}_{e}"), Block::Segment(t, j))).collect())
                .collect();
            let lambda = form.add_var(format!("lam_{t}"), Block::Multiplier(t));
            let tag = RowTag::Disjunct(t);
            for e in 0..nl {
                let mut terms: Vec<(usize, BigRational)> = segment_vars.iter().map(|s| (s[e], BigRational::one())).collect();
                terms.push((flow_vars[e], -BigRational::one()));
                form.add_row(terms, Sense::Eq, BigRational::zero(), tag);
            }
            let mut before = 0usize;
            for (j, &cls) in pattern.iter().enumerate() {
                let after = cs.add(before, cls);
                let (src, dst) = (layered.node(tau[j], before), layered.node(tau[j], after));
                for node in 0..layered.node_count() {
                    let mut terms: Vec<(usize, BigRational)> = (0..nl)
                        .filter(|&e| !d_prime.get(node, e).is_zero())
                        .map(|e| (segment_vars[j][e], BigRational::from_integer(d_prime.get(node, e).clone())))
                        .collect();
                    if node == src {
                        terms.push((lambda, -BigRational::one()));
                    } else if node == dst {
                        terms.push((lambda, BigRational::one()));
                    }
                    if !terms.is_empty() {
                        form.add_row(terms, Sense::Eq, BigRational::zero(), tag);
                    }
                }
                before = after;
            }
            for s in &segment_vars {
                for &v in s {
                    form.add_row(vec![(v, BigRational::one())], Sense::Ge, BigRational::zero(), tag);
                }
            }
            form.add_row(vec![(lambda, BigRational::one())], Sense::Ge, BigRational::zero(), tag);
            lookup.insert((pi, tau.clone()), t);
            assignments.push(Assignment { pattern: pi, tau, flow_vars, segment_vars, lambda });
        }
    }
    for e in 0..nl {
        let mut terms: Vec<(usize, BigRational)> = assignments.iter().map(|a| (a.flow_vars[e], BigRational::one())).collect();
        terms.push((layered_vars[e], -BigRational::one()));
        form.add_row(terms, Sense::Eq, BigRational::zero(), RowTag::FlowSum);
    }
    form.add_row(assignments.iter().map(|a| (a.lambda, BigRational::one())).collect(), Sense::Eq, BigRational::one(), RowTag::Convexity);

    Ok(CirculationBlock {
        base: base.clone(),
        y_vars: y_vars.to_vec(),
        layout: Layout::Disjunctive { layered, patterns, target, layered_vars, assignments, lookup },
        delta: delta as u64,
        declared_bound: bound,
    })
}

fn add_cone_rows(form: &mut Formulation, y_vars: &[usize], base: &BaseGraph) {
    for &v in y_vars {
        form.add_row(vec![(v, BigRational::one())], Sense::Ge, BigRational::zero(), RowTag::Cone);
    }
    let d = base.incidence();
    for i in 0..d.rows() {
        let terms: Vec<(usize, BigRational)> = (0..d.cols())
            .filter(|&j| !d.get(i, j).is_zero())
            .map(|j| (y_vars[j], BigRational::from_integer(d.get(i, j).clone())))
            .collect();
        if !terms.is_empty() {
            form.add_row(terms, Sense::Eq, BigRational::zero(), RowTag::Cone);
        }
    }
}

/// All of `V^k` in lexicographic order.
fn node_sequences(nodes: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..nodes).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Splits an integer circulation into directed cycles, each a list of arcs
/// in traversal order. `None` if `y` is negative or not a circulation.
pub fn cycle_decomposition(base: &BaseGraph, y: &[BigInt]) -> Option<Vec<Vec<usize>>> {
    let mut rest: Vec<i64> = y.iter().map(|v| v.to_i64()).collect::<Option<_>>()?;
    if rest.iter().any(|&v| v < 0) {
        return None;
    }
    let mut cycles = Vec::new();
    for (a, &(t, h)) in base.arcs.iter().enumerate() {
        if t == h {
            for _ in 0..rest[a] {
                cycles.push(vec![a]);
            }
            rest[a] = 0;
        }
    }
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); base.nodes];
    for (a, &(t, _)) in base.arcs.iter().enumerate() {
        out_arcs[t].push(a);
    }
    while let Some(start) = rest.iter().position(|&v| v > 0) {
        let mut seen: HashMap<usize, usize> = HashMap::new();
        let mut walk: Vec<usize> = Vec::new();
        let mut v = base.arcs[start].0;
        loop {
            if let Some(&pos) = seen.get(&v) {
                let cycle = walk[pos..].to_vec();
                for &a in &cycle {
                    rest[a] -= 1;
                }
                cycles.push(cycle);
                break;
            }
            seen.insert(v, walk.len());
            let a = *out_arcs[v].iter().find(|&&a| rest[a] > 0)?;
            walk.push(a);
            v = base.arcs[a].1;
        }
    }
    Some(cycles)
}

impl CirculationBlock {
    /// Fills the auxiliary variables of this block for the integer circulation
    /// `y` (already written to `y_vars`). Returns `false` when no lift was found.
    pub fn fill_lift(&self, y: &[BigInt], full: &mut [BigRational]) -> bool {
        match &self.layout {
            Layout::Cone => true,
            Layout::Empty => false,
            Layout::Disjunctive { layered, patterns, target, layered_vars, assignments, lookup } => {
                let Some(cycles) = cycle_decomposition(&self.base, y) else { return false };
                let classes: Vec<usize> = cycles
                    .iter()
                    .map(|c| c.iter().fold(0, |acc, &a| layered.add_table[acc][layered.arc_class[a]]))
                    .collect();
                let Some(chosen) = min_subset_with_sum(&classes, *target, &layered.add_table) else { return false };
                let mut chosen = chosen;
                chosen.sort_by_key(|&i| (classes[i], i));
                let pattern: Vec<usize> = chosen.iter().map(|&i| classes[i]).collect();
                let Some(pi) = patterns.iter().position(|p| *p == pattern) else { return false };
                let tau: Vec<usize> = chosen.iter().map(|&i| self.base.arcs[cycles[i][0]].0).collect();
                let Some(&t) = lookup.get(&(pi, tau)) else { return false };
                let asg = &assignments[t];
                let nl = layered.arc_count();
                let mut seg: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); nl]; pattern.len()];
                let mut rest: Vec<BigInt> = y.to_vec();
                let mut layer = 0usize;
                for (j, &ci) in chosen.iter().enumerate() {
                    for &a in &cycles[ci] {
                        seg[j][layered.arc(a, layer)] += BigRational::one();
                        rest[a] -= 1;
                        layer = layered.add_table[layer][layered.arc_class[a]];
                    }
                }
                let share = BigRational::new(BigInt::one(), BigInt::from(layered.delta));
                for (a, r) in rest.iter().enumerate() {
                    if r.is_zero() {
                        continue;
                    }
                    let amount = &share * BigRational::from_integer(r.clone());
                    for l in 0..layered.delta {
                        seg[0][layered.arc(a, l)] += amount.clone();
                    }
                }
                for (j, s) in seg.iter().enumerate() {
                    for e in 0..nl {
                        full[asg.segment_vars[j][e]] = s[e].clone();
                    }
                }
                for e in 0..nl {
                    let total: BigRational = seg.iter().map(|s| s[e].clone()).sum();
                    full[asg.flow_vars[e]] = total.clone();
                    full[layered_vars[e]] = total;
                }
                full[asg.lambda] = BigRational::one();
                true
            }
        }
    }

    /// Fills the auxiliary variables for a recession direction `d >= 0` with
    /// `D d = 0`, spread evenly over the layers of the first disjunct.
    pub fn fill_ray(&self, d: &[BigRational], full: &mut [BigRational]) -> bool {
        match &self.layout {
            Layout::Cone => true,
            Layout::Empty => false,
            Layout::Disjunctive { layered, layered_vars, assignments, .. } => {
                let asg = &assignments[0];
                let share = BigRational::new(BigInt::one(), BigInt::from(layered.delta));
                for (a, v) in d.iter().enumerate() {
                    for l in 0..layered.delta {
                        let e = layered.arc(a, l);
                        let val = v * &share;
                        full[asg.segment_vars[0][e]] = val.clone();
                        full[asg.flow_vars[e]] = val.clone();
                        full[layered_vars[e]] = val;
                    }
                }
                true
            }
        }
    }

    pub fn disjunct_count(&self) -> usize {
        match &self.layout {
            Layout::Disjunctive { assignments, .. } => assignments.len(),
            _ => 0,
        }
    }

    pub fn layered_arc_count(&self) -> usize {
        match &self.layout {
            Layout::Disjunctive { layered, .. } => layered.arc_count(),
            _ => self.base.arcs.len(),
        }
    }

    pub fn patterns(&self) -> &[Vec<usize>] {
        match &self.layout {
            Layout::Disjunctive { patterns, .. } => patterns,
            _ => &[],
        }
    }
}

/// Smallest index set whose classes sum to `target` (nonzero); such a set
/// has no zero-sum subset, since removing one would leave a smaller set
/// with the same sum.
fn min_subset_with_sum(classes: &[usize], target: usize, add: &[Vec<usize>]) -> Option<Vec<usize>> {
    let delta = add.len();
    let mut best: Vec<Option<Vec<usize>>> = vec![None; delta];
    best[0] = Some(Vec::new());
    for (i, &c) in classes.iter().enumerate() {
        let prev = best.clone();
        for g in 0..delta {
            if let Some(set) = &prev[g] {
                let h = add[g][c];
                if best[h].as_ref().map_or(true, |s| s.len() > set.len() + 1) {
                    let mut s = set.clone();
                    s.push(i);
                    best[h] = Some(s);
                }
            }
        }
    }
    best[target].clone().filter(|s| !s.is_empty())
}

/// A standalone formulation of the circulation hull: the projection is the
/// arc vector `y`.
#[derive(Debug, Clone)]
pub struct CirculationEf {
    pub formulation: Formulation,
    pub block: CirculationBlock,
}

impl CirculationEf {
    /// Full variable assignment lifting the integer circulation `y`.
    pub fn propose_lift(&self, y: &[BigInt]) -> Option<RatVector> {
        let mut full = vec![BigRational::zero(); self.formulation.num_vars()];
        for (a, &v) in self.block.y_vars.iter().enumerate() {
            full[v] = BigRational::from_integer(y[a].clone());
        }
        self.block.fill_lift(y, &mut full).then_some(full)
    }

    pub fn propose_ray_lift(&self, d: &[BigRational]) -> Option<RatVector> {
        let mut full = vec![BigRational::zero(); self.formulation.num_vars()];
        for (a, &v) in self.block.y_vars.iter().enumerate() {
            full[v] = d[a].clone();
        }
        self.block.fill_ray(d, &mut full).then_some(full)
    }
}

/// Extended formulation of `conv{y in Z^A_+ : D y = 0, W y ≡ f (mod H Z^d)}`.
pub fn circulation_ef(d: &IntMatrix, w: &IntMatrix, h: &IntMatrix, f: &[BigInt], caps: &crate::Caps) -> Result<CirculationEf> {
    let base = BaseGraph::from_incidence(d)?;
    circulation_ef_on(&base, w, h, f, caps)
}

pub fn circulation_ef_on(base: &BaseGraph, w: &IntMatrix, h: &IntMatrix, f: &[BigInt], caps: &crate::Caps) -> Result<CirculationEf> {
    let cs = CosetSystem::new(h, caps.delta_cap)?;
    let mut form = Formulation::new();
    let y_vars: Vec<usize> = (0..base.arcs.len()).map(|a| form.add_var(format!("y_{a}"), Block::Slack)).collect();
    form.projection = y_vars.clone();
    let block = assemble_into(&mut form, &y_vars, base, w, Some(&cs), f, caps.assignment_cap)?;
    form.recount();
    form.size.declared_bound = block.declared_bound;
    form.size.delta = block.delta;
    form.size.base_nodes = base.nodes;
    form.size.base_arcs = base.arcs.len();
    form.size.layered_arcs = block.layered_arc_count();
    form.size.disjuncts = block.disjunct_count();
    Ok(CirculationEf { formulation: form, block })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int_vec, to_rat_vec};
    use itertools::Itertools;
    use proptest::prelude::*;

    fn cs(rows: &[&[i64]]) -> CosetSystem {
        CosetSystem::new(&IntMatrix::from_rows(rows), 6).unwrap()
    }

    fn arb_hermite() -> impl Strategy<Value = IntMatrix> {
        (1i64..=3, 1i64..=2, 0i64..3).prop_map(|(a, b, c)| IntMatrix::from_rows(&[[a, c % a], [0, b]]))
    }

    proptest! {
        #[test]
        fn group_table_is_abelian(h in arb_hermite()) {
            let cs = CosetSystem::new(&h, 6).unwrap();
            prop_assert_eq!(cs.reps.len(), cs.delta);
            for i in 0..cs.delta {
                prop_assert_eq!(cs.add(0, i), i);
                prop_assert!((0..cs.delta).any(|j| cs.add(i, j) == 0));
                for j in 0..cs.delta {
                    prop_assert_eq!(cs.add(i, j), cs.add(j, i));
                    let sum: Vec<BigInt> = cs.reps[i].iter().zip(&cs.reps[j]).map(|(a, b)| a + b).collect();
                    prop_assert_eq!(cs.classify(&sum).unwrap(), cs.add(i, j));
                }
            }
        }

        #[test]
        fn patterns_are_zero_sum_free(h in arb_hermite(), t in 0usize..6) {
            let cs = CosetSystem::new(&h, 6).unwrap();
            let target = t % cs.delta;
            let pats = enumerate_patterns(&cs, target);
            prop_assert!(pats.len() as u128 <= pattern_bound(cs.delta as u64));
            for p in &pats {
                prop_assert!(!p.is_empty() && p.len() < cs.delta);
                prop_assert_eq!(p.iter().fold(0, |acc, &g| cs.add(acc, g)), target);
                for mask in 1..1u32 << p.len() {
                    let s = (0..p.len()).filter(|&i| mask >> i & 1 == 1).fold(0, |acc, i| cs.add(acc, p[i]));
                    prop_assert_ne!(s, 0);
                }
            }
        }

        #[test]
        fn layered_graph_sizes(h in arb_hermite(), ws in proptest::collection::vec(-3i64..=3, 8)) {
            let cs = CosetSystem::new(&h, 6).unwrap();
            let base = BaseGraph { nodes: 3, arcs: vec![(0, 1), (1, 2), (2, 0), (0, 2)] };
            let w = IntMatrix::from_fn(2, 4, |i, a| BigInt::from(ws[4 * i + a]));
            let lg = build_layered(&base, &w, &cs).unwrap();
            prop_assert_eq!(lg.node_count(), cs.delta * 3);
            prop_assert_eq!(lg.arc_count(), cs.delta * 4);
            for (k, &(t, hd)) in lg.arcs.iter().enumerate() {
                let (bt, bh) = base.arcs[lg.origin[k]];
                prop_assert_eq!(t, lg.node(bt, lg.layer[k]));
                prop_assert_eq!(hd % 3, bh);
            }
            for a in 0..4 {
                prop_assert_eq!(lg.origin.iter().filter(|&&o| o == a).count(), cs.delta);
            }
        }
    }

    #[test]
    fn coset_examples() {
        assert_eq!(cs(&[&[2]]).reps, vec![int_vec(&[0]), int_vec(&[1])]);
        assert_eq!(cs(&[&[1, 0], &[0, 3]]).reps, vec![int_vec(&[0, 0]), int_vec(&[0, 1]), int_vec(&[0, 2])]);
        let c = cs(&[&[2, 1], &[0, 2]]);
        assert_eq!(c.delta, 4);
        assert_eq!(c.reps.len(), 4);
    }

    #[test]
    fn coset_cap() {
        let h = IntMatrix::from_rows(&[[7]]);
        assert!(matches!(CosetSystem::new(&h, 6), Err(Error::DeltaCapExceeded { .. })));
    }

    #[test]
    fn coset_group_laws() {
        for rows in [vec![vec![2i64, 1], vec![0, 2]], vec![vec![1, 2], vec![-2, 1]], vec![vec![3, 1], vec![1, 2]], vec![vec![6]]] {
            let h = IntMatrix::from_rows(&rows);
            let c = CosetSystem::new(&h, 6).unwrap();
            for (i, g) in c.reps.iter().enumerate() {
                // representative lies in H [0,1)^d
                let t = inverse(&h.to_rat()).unwrap().unwrap().mul_vec(&crate::linalg::to_rat_vec(g)).unwrap();
                assert!(t.iter().all(|x| !x.is_negative() && *x < BigRational::one()));
                for (j, g2) in c.reps.iter().enumerate() {
                    if i < j {
                        let diff: Vec<BigInt> = g.iter().zip(g2).map(|(a, b)| a - b).collect();
                        assert!(!c.in_lattice(&diff));
                    }
                    assert_eq!(c.add(i, j), c.add(j, i));
                }
                assert_eq!(c.add(0, i), i);
            }
            for (i, j, k) in (0..c.delta).cartesian_product(0..c.delta).cartesian_product(0..c.delta).map(|((a, b), c)| (a, b, c)) {
                assert_eq!(c.add(c.add(i, j), k), c.add(i, c.add(j, k)));
            }
        }
    }

    #[test]
    fn pattern_examples() {
        let c2 = cs(&[&[2]]);
        assert_eq!(enumerate_patterns(&c2, 1), vec![vec![1]]);
        let c3 = cs(&[&[3]]);
        assert_eq!(enumerate_patterns(&c3, 1), vec![vec![1], vec![2, 2]]);
        assert!(enumerate_patterns(&c3, 0).is_empty());
        let c1 = cs(&[&[1]]);
        assert!(enumerate_patterns(&c1, 0).is_empty());
    }

    #[test]
    fn layered_examples() {
        let c2 = cs(&[&[2]]);
        let tri = BaseGraph { nodes: 3, arcs: vec![(0, 1), (1, 2), (2, 0)] };
        let lg = build_layered(&tri, &IntMatrix::from_rows(&[[1, 0, 0]]), &c2).unwrap();
        assert_eq!((lg.node_count(), lg.arc_count()), (6, 6));

        let single = BaseGraph { nodes: 1, arcs: vec![(0, 0)] };
        let lg = build_layered(&single, &IntMatrix::from_rows(&[[1]]), &c2).unwrap();
        assert_eq!(lg.node_count(), 2);
        assert_eq!(lg.arcs, vec![(0, 1), (1, 0)]);

        let lg = build_layered(&tri, &IntMatrix::from_rows(&[[0, 0, 0]]), &c2).unwrap();
        assert!(lg.arcs.iter().enumerate().all(|(k, &(t, h))| t / 3 == lg.layer[k] && h / 3 == lg.layer[k]));
    }

    #[test]
    fn projection_examples() {
        let c2 = cs(&[&[2]]);
        let single = BaseGraph { nodes: 1, arcs: vec![(0, 0)] };
        let lg = build_layered(&single, &IntMatrix::from_rows(&[[1]]), &c2).unwrap();
        assert_eq!(project(&lg, &[0i64, 0]), vec![0]);
        assert_eq!(project(&lg, &[1i64, 0]), vec![1]);
        let tri = BaseGraph { nodes: 3, arcs: vec![(0, 1), (1, 2), (2, 0)] };
        let lg = build_layered(&tri, &IntMatrix::from_rows(&[[1, 0, 0]]), &c2).unwrap();
        assert_eq!(project(&lg, &[1i64; 6]), vec![2, 2, 2]);
    }

    #[test]
    fn assembly_sizes() {
        let caps = crate::Caps::default();
        let d = IntMatrix::from_rows(&[[0]]);
        let ef = circulation_ef(&d, &IntMatrix::from_rows(&[[1]]), &IntMatrix::from_rows(&[[2]]), &int_vec(&[1]), &caps).unwrap();
        assert_eq!(ef.block.disjunct_count(), 1);
        let tri = IntMatrix::from_rows(&[[1, 0, -1], [-1, 1, 0], [0, -1, 1]]);
        let ef = circulation_ef(&tri, &IntMatrix::from_rows(&[[1, 0, 0]]), &IntMatrix::from_rows(&[[2]]), &int_vec(&[1]), &caps).unwrap();
        assert_eq!(ef.block.disjunct_count(), 3);
        assert_eq!(ef.block.declared_bound, 39);
        assert!(ef.formulation.inequality_count() as u128 <= 39);
        let ef = circulation_ef(&tri, &IntMatrix::from_rows(&[[1, 0, 0]]), &IntMatrix::from_rows(&[[1]]), &int_vec(&[0]), &caps).unwrap();
        assert!(matches!(ef.block.layout, Layout::Cone));
    }

    #[test]
    fn lifts_satisfy_rows() {
        let caps = crate::Caps::default();
        let tri = IntMatrix::from_rows(&[[1, 0, -1], [-1, 1, 0], [0, -1, 1]]);
        let ef = circulation_ef(&tri, &IntMatrix::from_rows(&[[1, 0, 0]]), &IntMatrix::from_rows(&[[2]]), &int_vec(&[1]), &caps).unwrap();
        for t in [1, 3, 5] {
            let full = ef.propose_lift(&int_vec(&[t, t, t])).unwrap();
            assert!(ef.formulation.satisfies(&full, false));
        }
        // (2,2,2) is the midpoint of (1,1,1) and (3,3,3); (0,0,0) is outside the hull.
        let half = |t: i64| to_rat_vec(&int_vec(&[t, t, t]));
        assert!(crate::lp::lift_point(&ef.formulation, &half(2), false).is_some());
        assert!(crate::lp::lift_point(&ef.formulation, &half(0), false).is_none());
        assert!(ef.propose_lift(&int_vec(&[0, 0, 0])).map_or(true, |full| !ef.formulation.satisfies(&full, false)));
        let ray = ef.propose_ray_lift(&[BigRational::one(), BigRational::one(), BigRational::one()]).unwrap();
        assert!(ef.formulation.satisfies(&ray, true));
    }

    #[test]
    fn cycle_decomposition_sums_back() {
        let g = BaseGraph { nodes: 3, arcs: vec![(0, 1), (1, 0), (1, 2), (2, 1), (0, 0)] };
        let y = int_vec(&[2, 2, 1, 1, 2]);
        let cycles = cycle_decomposition(&g, &y).unwrap();
        let mut total = vec![0i64; 5];
        for c in &cycles {
            for &a in c {
                total[a] += 1;
            }
        }
        assert_eq!(total, vec![2, 2, 1, 1, 2]);
        assert!(cycle_decomposition(&g, &int_vec(&[1, 0, 0, 0, 0])).is_none());
    }
}
