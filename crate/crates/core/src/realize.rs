//! Graph realization of a matroid given in standard form `[S | I_k]`, and
//! the sign fix that turns the realized incidence matrix into one with the
//! same kernel as `[S | I_k]`.
//!
//! Columns of `I_k` are tree edges. Column `j` of `S` is a non-tree edge whose
//! fundamental circuit is the support of that column, so the realization
//! problem is: find a tree on the `k` tree edges in which every support is a
//! path. The search is exhaustive backtracking after series, parallel and
//! separator reductions, so a failure within budget certifies that no graph
//! exists.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{inverse, IntMatrix, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphRealization {
    /// `k + 1`.
    pub node_count: usize,
    /// One arc per column of `[S | I_k]`; loops are `(v, v)`.
    pub arcs: Vec<(usize, usize)>,
    /// `full_incidence` without its last row.
    pub e: IntMatrix,
    /// `+1` at the tail, `-1` at the head, zero columns for loops.
    pub full_incidence: IntMatrix,
}

impl GraphRealization {
    pub fn from_arcs(node_count: usize, arcs: Vec<(usize, usize)>) -> Self {
        let full = crate::circulation::BaseGraph { nodes: node_count, arcs: arcs.clone() }.incidence();
        let e = full.select_rows(&(0..node_count - 1).collect::<Vec<_>>());
        Self { node_count, arcs, e, full_incidence: full }
    }

    /// `E_2^{-1} E_1`, where `E_2` holds the tree columns.
    pub fn ratio(&self, n: usize) -> Result<RatMatrix> {
        let k = self.node_count - 1;
        let e1 = self.e.select_cols(&(0..n).collect::<Vec<_>>()).to_rat();
        let e2 = self.e.select_cols(&(n..n + k).collect::<Vec<_>>()).to_rat();
        let inv = inverse(&e2)?.ok_or_else(|| Error::SignFix("tree columns of E are singular".into()))?;
        inv.mul(&e1)
    }
}

/// Diagonal `P1` (rows) and `P2` (columns) with `P1 S P2 = E_2^{-1} E_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFix {
    pub p1: Vec<BigInt>,
    pub p2: Vec<BigInt>,
}

impl SignFix {
    pub fn p1_matrix(&self) -> IntMatrix {
        diag(&self.p1)
    }

    pub fn p2_matrix(&self) -> IntMatrix {
        diag(&self.p2)
    }
}

fn diag(v: &[BigInt]) -> IntMatrix {
    IntMatrix::from_fn(v.len(), v.len(), |i, j| if i == j { v[i].clone() } else { BigInt::zero() })
}

/// Supports of the columns of `S`, as sorted lists of row indices.
pub fn column_supports<T: Zero>(rows: usize, cols: usize, get: impl Fn(usize, usize) -> T) -> Vec<Vec<usize>> {
    (0..cols).map(|j| (0..rows).filter(|&i| !get(i, j).is_zero()).collect()).collect()
}

/// Realizes `[S | I_k]` given as an integer matrix. With a hint, the hint
/// arcs are validated against the supports and used as they are.
pub fn realize_graphic(r: &IntMatrix, hint: Option<&[(usize, usize)]>, budget: u64) -> Result<GraphRealization> {
    let k = r.rows();
    let m = r.cols();
    if m < k {
        return Err(Error::DimensionMismatch(format!("R is {k}x{m}")));
    }
    let n = m - k;
    let tail = r.select_cols(&(n..m).collect::<Vec<_>>());
    if tail != IntMatrix::identity(k) {
        return Err(Error::Precondition("R is not in standard form [S | I]".into()));
    }
    let supports = column_supports(k, n, |i, j| r.get(i, j).clone());
    let arcs = match hint {
        Some(arcs) => {
            validate_hint(k, &supports, arcs)?;
            arcs.to_vec()
        }
        None => realize_supports(k, &supports, budget)?.ok_or_else(|| {
            Error::NotGraphic("no tree carries every fundamental circuit as a path".into())
        })?,
    };
    Ok(GraphRealization::from_arcs(k + 1, arcs))
}

/// A hint is valid when its tree arcs span `k + 1` nodes and every non-tree
/// arc closes exactly its fundamental circuit.
pub fn validate_hint(k: usize, supports: &[Vec<usize>], arcs: &[(usize, usize)]) -> Result<()> {
    let n = supports.len();
    if arcs.len() != n + k {
        return Err(Error::InvalidHint(format!("{} arcs for {} elements", arcs.len(), n + k)));
    }
    if arcs.iter().any(|&(t, h)| t > k || h > k) {
        return Err(Error::InvalidHint(format!("node index outside 0..{}", k + 1)));
    }
    let tree: Vec<(usize, usize)> = arcs[n..].to_vec();
    let mut dsu = Dsu::new(k + 1);
    for &(t, h) in &tree {
        if !dsu.union(t, h) {
            return Err(Error::InvalidHint("tree arcs contain a cycle".into()));
        }
    }
    for (j, sup) in supports.iter().enumerate() {
        let (t, h) = arcs[j];
        let path = tree_path(k + 1, &tree, t, h);
        if path != *sup {
            return Err(Error::InvalidHint(format!("arc {j} closes circuit {path:?}, expected {sup:?}")));
        }
    }
    Ok(())
}

/// Tree edges on the path between `s` and `t`, sorted.
fn tree_path(nodes: usize, tree: &[(usize, usize)], s: usize, t: usize) -> Vec<usize> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    for (e, &(a, b)) in tree.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut seen = vec![false; nodes];
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                prev[w] = Some((v, e));
                queue.push_back(w);
            }
        }
    }
    let mut path = Vec::new();
    let mut v = t;
    while v != s {
        let Some((p, e)) = prev[v] else { return vec![usize::MAX] };
        path.push(e);
        v = p;
    }
    path.sort_unstable();
    path
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

enum Reduction {
    /// Non-tree element shares the arc of another element (tree `e < k`
    /// or non-tree `k + j`); `with == k + j` marks a loop.
    Parallel { j: usize, with: usize },
    /// Tree edge `e` was contracted while lying only on the circuit of `j`.
    Series { e: usize, j: usize },
}

/// Arcs for `n` non-tree elements followed by `k` tree elements, on nodes
/// `0..=k`, or `None` when no tree carries every support as a path.
///
/// Series and parallel pairs are stripped to a fixpoint first; the remaining
/// core goes to the separator split and backtracking search.
pub fn realize_supports(k: usize, supports: &[Vec<usize>], budget: u64) -> Result<Option<Vec<(usize, usize)>>> {
    let n = supports.len();
    let mut sup: Vec<Option<Vec<usize>>> = supports.iter().map(|s| Some(s.clone())).collect();
    let mut tree_alive = vec![true; k];
    let mut stack: Vec<Reduction> = Vec::new();
    loop {
        let mut changed = false;
        let mut by_support: HashMap<Vec<usize>, usize> = HashMap::new();
        for j in 0..n {
            let Some(s) = sup[j].clone() else { continue };
            let with = match s.len() {
                0 => Some(k + j),
                1 => Some(s[0]),
                _ => match by_support.get(&s) {
                    Some(&o) => Some(k + o),
                    None => {
                        by_support.insert(s, j);
                        None
                    }
                },
            };
            if let Some(with) = with {
                stack.push(Reduction::Parallel { j, with });
                sup[j] = None;
                changed = true;
            }
        }
        let mut count = vec![0usize; k];
        let mut last = vec![usize::MAX; k];
        for (j, s) in sup.iter().enumerate() {
            for &e in s.iter().flatten() {
                count[e] += 1;
                last[e] = j;
            }
        }
        for e in 0..k {
            if tree_alive[e] && count[e] == 1 {
                let j = last[e];
                let s = sup[j].as_mut().expect("alive");
                if s.len() < 2 {
                    continue;
                }
                s.retain(|&f| f != e);
                tree_alive[e] = false;
                stack.push(Reduction::Series { e, j });
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let kept_tree: Vec<usize> = (0..k).filter(|&e| tree_alive[e]).collect();
    let kept_cotree: Vec<usize> = (0..n).filter(|&j| sup[j].as_ref().is_some_and(|s| !s.is_empty())).collect();
    let local: HashMap<usize, usize> = kept_tree.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let core_supports: Vec<Vec<usize>> = kept_cotree
        .iter()
        .map(|&j| sup[j].as_ref().expect("kept").iter().map(|e| local[e]).collect())
        .collect();
    let Some(core) = realize_reduced(kept_tree.len(), &core_supports, budget)? else {
        return Ok(None);
    };
    let mut arc: Vec<Option<(usize, usize)>> = vec![None; n + k];
    for (i, &j) in kept_cotree.iter().enumerate() {
        arc[j] = Some(core[i]);
    }
    for (i, &e) in kept_tree.iter().enumerate() {
        arc[n + e] = Some(core[kept_cotree.len() + i]);
    }
    let mut next_node = kept_tree.len() + 1;
    for r in stack.iter().rev() {
        match *r {
            Reduction::Parallel { j, with } => {
                arc[j] = Some(if with == k + j { (0, 0) } else if with < k { arc[n + with].expect("placed") } else { arc[with - k].expect("placed") });
            }
            Reduction::Series { e, j } => {
                let (a, b) = arc[j].expect("placed");
                arc[j] = Some((a, next_node));
                arc[n + e] = Some((next_node, b));
                next_node += 1;
            }
        }
    }
    debug_assert_eq!(next_node, k + 1);
    Ok(Some(arc.into_iter().map(|a| a.expect("every element placed")).collect()))
}

fn realize_reduced(k: usize, supports: &[Vec<usize>], budget: u64) -> Result<Option<Vec<(usize, usize)>>> {
    let n = supports.len();
    // Parallel classes: identical supports share endpoints; empty ones are loops.
    let mut circuit_ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for s in supports.iter().filter(|s| !s.is_empty()) {
        let next = circuit_ids.len();
        circuit_ids.entry(s.clone()).or_insert(next);
    }
    let mut circuits: Vec<Vec<usize>> = vec![Vec::new(); circuit_ids.len()];
    for (s, &id) in &circuit_ids {
        circuits[id] = s.clone();
    }
    // Series classes: tree edges lying in exactly the same circuits.
    let membership: Vec<Vec<usize>> =
        (0..k).map(|e| (0..circuits.len()).filter(|&c| circuits[c].binary_search(&e).is_ok()).collect()).collect();
    let mut series_rep: Vec<usize> = (0..k).collect();
    let mut reps: Vec<usize> = Vec::new();
    let mut by_membership: HashMap<Vec<usize>, usize> = HashMap::new();
    for e in 0..k {
        if membership[e].is_empty() {
            reps.push(e);
            continue;
        }
        match by_membership.get(&membership[e]) {
            Some(&r) => series_rep[e] = r,
            None => {
                by_membership.insert(membership[e].clone(), e);
                reps.push(e);
            }
        }
    }
    let reduced: Vec<Vec<usize>> =
        circuits.iter().map(|c| c.iter().copied().filter(|&e| series_rep[e] == e).collect()).collect();

    // Separators: connected components of the element/circuit incidence.
    let mut dsu = Dsu::new(k);
    for c in &reduced {
        for w in c.windows(2) {
            dsu.union(w[0], w[1]);
        }
    }
    let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &e in &reps {
        blocks.entry(dsu.find(e)).or_default().push(e);
    }

    let mut tree_arcs: Vec<Option<(usize, usize)>> = vec![None; k];
    let mut next_node = 1usize;
    let mut visited = 0u64;
    for edges in blocks.values() {
        let local: HashMap<usize, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let block_circuits: Vec<Vec<usize>> = reduced
            .iter()
            .filter(|c| c.first().is_some_and(|e| local.contains_key(e)))
            .map(|c| c.iter().map(|e| local[e]).collect())
            .collect();
        let Some(placed) = search_block(edges.len(), &block_circuits, budget, &mut visited)? else {
            return Ok(None);
        };
        // Local node 0 is glued to global node 0.
        let mut map: HashMap<usize, usize> = HashMap::from([(0, 0)]);
        for (i, &(a, b)) in placed.iter().enumerate() {
            let mut global = |x: usize, map: &mut HashMap<usize, usize>| {
                *map.entry(x).or_insert_with(|| {
                    next_node += 1;
                    next_node - 1
                })
            };
            let ga = global(a, &mut map);
            let gb = global(b, &mut map);
            tree_arcs[edges[i]] = Some((ga, gb));
        }
    }
    // Subdivide series representatives.
    for e in 0..k {
        if series_rep[e] == e {
            continue;
        }
        let r = series_rep[e];
        let (a, b) = tree_arcs[r].expect("representative placed");
        let mid = next_node;
        next_node += 1;
        tree_arcs[r] = Some((a, mid));
        tree_arcs[e] = Some((mid, b));
    }
    debug_assert_eq!(next_node, k + 1);
    let tree: Vec<(usize, usize)> = tree_arcs.into_iter().map(|a| a.expect("every tree edge placed")).collect();
    let mut arcs = Vec::with_capacity(n + k);
    for s in supports {
        arcs.push(if s.is_empty() { (0, 0) } else { path_endpoints(&tree, s) });
    }
    arcs.extend(tree);
    Ok(Some(arcs))
}

/// The two degree-one nodes of the path formed by `edges`.
fn path_endpoints(tree: &[(usize, usize)], edges: &[usize]) -> (usize, usize) {
    let mut deg: BTreeMap<usize, usize> = BTreeMap::new();
    for &e in edges {
        let (a, b) = tree[e];
        *deg.entry(a).or_default() += 1;
        *deg.entry(b).or_default() += 1;
    }
    let ends: Vec<usize> = deg.iter().filter(|(_, &d)| d == 1).map(|(&v, _)| v).collect();
    (ends[0], ends[1])
}

struct Search<'a> {
    edges: usize,
    circuits: &'a [Vec<usize>],
    /// Circuits containing each edge.
    member: Vec<Vec<usize>>,
    order: Vec<usize>,
    ends: Vec<Option<(usize, usize)>>,
    comp: Vec<usize>,
    nodes: usize,
    budget: u64,
    visited: &'a mut u64,
}

/// Backtracking over forests: edges are placed in a co-occurrence BFS order
/// as a new component, a pendant, or a bridge between two components.
fn search_block(edges: usize, circuits: &[Vec<usize>], budget: u64, visited: &mut u64) -> Result<Option<Vec<(usize, usize)>>> {
    let mut member: Vec<Vec<usize>> = vec![Vec::new(); edges];
    for (c, es) in circuits.iter().enumerate() {
        for &e in es {
            member[e].push(c);
        }
    }
    let start = (0..edges).max_by_key(|&e| (member[e].len(), std::cmp::Reverse(e))).unwrap_or(0);
    let mut order = Vec::with_capacity(edges);
    let mut seen = vec![false; edges];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(e) = queue.pop_front() {
        order.push(e);
        let mut nbrs: Vec<usize> = member[e].iter().flat_map(|&c| circuits[c].iter().copied()).filter(|&f| !seen[f]).collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        for f in nbrs {
            seen[f] = true;
            queue.push_back(f);
        }
    }
    for e in 0..edges {
        if !seen[e] {
            order.push(e);
        }
    }
    let mut s = Search { edges, circuits, member, order, ends: vec![None; edges], comp: Vec::new(), nodes: 0, budget, visited };
    if s.place(0)? {
        Ok(Some(s.ends.into_iter().map(|e| e.expect("placed")).collect()))
    } else {
        Ok(None)
    }
}

impl Search<'_> {
    fn components(&self) -> usize {
        let mut roots: Vec<usize> = self.comp.clone();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }

    fn place(&mut self, depth: usize) -> Result<bool> {
        *self.visited += 1;
        if *self.visited > self.budget {
            return Err(Error::SearchBudget(self.budget));
        }
        if depth == self.edges {
            return Ok(self.components() == 1);
        }
        let e = self.order[depth];
        let remaining = self.edges - depth - 1;
        let mut options: Vec<(usize, usize)> = Vec::new();
        if depth == 0 {
            options.push((0, 1));
        } else {
            for x in 0..self.nodes {
                options.push((x, self.nodes));
            }
            for x in 0..self.nodes {
                for y in x + 1..self.nodes {
                    if self.comp[x] != self.comp[y] {
                        options.push((x, y));
                    }
                }
            }
            options.push((self.nodes, self.nodes + 1));
        }
        for (a, b) in options {
            let saved_comp = self.comp.clone();
            let saved_nodes = self.nodes;
            while self.nodes <= a.max(b) {
                self.comp.push(self.nodes);
                self.nodes += 1;
            }
            let (ca, cb) = (self.comp[a], self.comp[b]);
            for c in self.comp.iter_mut() {
                if *c == cb {
                    *c = ca;
                }
            }
            self.ends[e] = Some((a, b));
            if self.components() <= remaining + 1 && self.consistent(e) && self.place(depth + 1)? {
                return Ok(true);
            }
            self.ends[e] = None;
            self.comp = saved_comp;
            self.nodes = saved_nodes;
        }
        Ok(false)
    }

    /// Every circuit meeting the component of `e` restricts to a path there.
    fn consistent(&self, e: usize) -> bool {
        let (a, _) = self.ends[e].expect("just placed");
        let root = self.comp[a];
        let in_comp: Vec<usize> = (0..self.edges)
            .filter(|&f| self.ends[f].is_some_and(|(x, _)| self.comp[x] == root))
            .collect();
        let mut touched: Vec<usize> = in_comp.iter().flat_map(|&f| self.member[f].iter().copied()).collect();
        touched.sort_unstable();
        touched.dedup();
        touched.into_iter().all(|c| {
            let es: Vec<(usize, usize)> = self.circuits[c]
                .iter()
                .filter_map(|&f| self.ends[f].filter(|(x, _)| self.comp[*x] == root))
                .collect();
            is_path(&es)
        })
    }
}

fn is_path(edges: &[(usize, usize)]) -> bool {
    if edges.is_empty() {
        return true;
    }
    let mut deg: HashMap<usize, usize> = HashMap::new();
    for &(a, b) in edges {
        *deg.entry(a).or_default() += 1;
        *deg.entry(b).or_default() += 1;
    }
    if deg.values().any(|&d| d > 2) || deg.len() != edges.len() + 1 {
        return false;
    }
    // In a forest, |nodes| = |edges| + 1 means connected.
    true
}

/// Diagonal rational `p1`, `p2` with `p1_i s_ij p2_j = t_ij` for all entries,
/// anchoring the lowest column of each connected support component to 1.
/// `None` when supports differ or no such scaling exists.
pub fn scaling_equivalence(s: &RatMatrix, t: &RatMatrix) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    let (k, n) = (s.rows(), s.cols());
    if t.rows() != k || t.cols() != n {
        return None;
    }
    for i in 0..k {
        for j in 0..n {
            if s.get(i, j).is_zero() != t.get(i, j).is_zero() {
                return None;
            }
        }
    }
    let mut p1: Vec<Option<BigRational>> = vec![None; k];
    let mut p2: Vec<Option<BigRational>> = vec![None; n];
    for anchor in 0..n {
        if p2[anchor].is_some() {
            continue;
        }
        p2[anchor] = Some(BigRational::one());
        let mut queue: VecDeque<(bool, usize)> = VecDeque::from([(false, anchor)]);
        while let Some((is_row, idx)) = queue.pop_front() {
            if is_row {
                let pi = p1[idx].clone().expect("set before queued");
                for j in 0..n {
                    if !s.get(idx, j).is_zero() && p2[j].is_none() {
                        p2[j] = Some(t.get(idx, j) / (&pi * s.get(idx, j)));
                        queue.push_back((false, j));
                    }
                }
            } else {
                let pj = p2[idx].clone().expect("set before queued");
                for i in 0..k {
                    if !s.get(i, idx).is_zero() && p1[i].is_none() {
                        p1[i] = Some(t.get(i, idx) / (s.get(i, idx) * &pj));
                        queue.push_back((true, i));
                    }
                }
            }
        }
    }
    let p1: Vec<BigRational> = p1.into_iter().map(|v| v.unwrap_or_else(BigRational::one)).collect();
    let p2: Vec<BigRational> = p2.into_iter().map(|v| v.unwrap_or_else(BigRational::one)).collect();
    for i in 0..k {
        for j in 0..n {
            if &p1[i] * s.get(i, j) * &p2[j] != *t.get(i, j) {
                return None;
            }
        }
    }
    Some((p1, p2))
}

/// `±1` diagonals with `P1 target P2 = E_2^{-1} E_1`.
pub fn sign_fix(target: &IntMatrix, realized: &GraphRealization) -> Result<SignFix> {
    let n = target.cols();
    let ratio = realized.ratio(n)?;
    let (p1, p2) = scaling_equivalence(&target.to_rat(), &ratio)
        .ok_or_else(|| Error::SignFix("supports differ or no consistent signing exists".into()))?;
    let to_sign = |v: Vec<BigRational>| -> Result<Vec<BigInt>> {
        v.into_iter()
            .map(|x| {
                if x.is_integer() && x.numer().abs().is_one() {
                    Ok(x.to_integer())
                } else {
                    Err(Error::SignFix(format!("scaling factor {x} is not a sign")))
                }
            })
            .collect()
    };
    Ok(SignFix { p1: to_sign(p1)?, p2: to_sign(p2)? })
}

/// `[E; -1^T E] blockdiag(P2^{-1}, P1)`.
pub fn incidence_matrix(realized: &GraphRealization, fix: &SignFix) -> IntMatrix {
    let n = fix.p2.len();
    let full = &realized.full_incidence;
    IntMatrix::from_fn(full.rows(), full.cols(), |i, j| {
        let s = if j < n { &fix.p2[j] } else { &fix.p1[j - n] };
        full.get(i, j) * s
    })
}

/// Loop nodes of the realized arcs, for reading `D` back as a graph.
pub fn loop_nodes(realized: &GraphRealization) -> Vec<usize> {
    realized.arcs.iter().map(|&(t, _)| t).collect()
}
