//! Instance generators: odd-cycle stable set instances, the dual complete
//! graph family, and the two counterexample constructions that must be
//! rejected.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::instance::{GraphHint, ProblemInstance};
use crate::linalg::{as_integral, det_exact, inverse, IntMatrix};

/// Edge-node incidence of the cycle `C_k`: row `i` has ones at `i` and `i + 1 mod k`.
pub fn cycle_incidence(k: usize) -> IntMatrix {
    IntMatrix::from_fn(k, k, |i, j| {
        if j == i || j == (i + 1) % k {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    })
}

/// Pairs `(i, j)` with `i < j < n` in lexicographic order.
pub fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// `D_{r-1}`: the `(r-1) x C(r-1, 2)` matrix with columns `e_i - e_j`, `i < j`.
/// `[I D_{r-1}]` represents the cycle matroid of `K_r`.
pub fn canonical_graphic_d(r: usize) -> IntMatrix {
    let pairs = ordered_pairs(r - 1);
    IntMatrix::from_fn(r - 1, pairs.len(), |row, col| {
        let (i, j) = pairs[col];
        if row == i {
            BigInt::one()
        } else if row == j {
            -BigInt::one()
        } else {
            BigInt::zero()
        }
    })
}

/// `D_{r-1}` with the edge `{i, j}` oriented `i -> j` when `j - i <= (r-1)/2`
/// and `j -> i` otherwise, so every triangle `0, 1, 2` lies on a directed
/// cycle. Same matroid as [`canonical_graphic_d`]; column signs differ.
pub fn rotational_graphic_d(r: usize) -> IntMatrix {
    let pairs = ordered_pairs(r - 1);
    let d = canonical_graphic_d(r);
    IntMatrix::from_fn(d.rows(), d.cols(), |row, col| {
        let (i, j) = pairs[col];
        if j - i <= (r - 1) / 2 {
            d.get(row, col).clone()
        } else {
            -d.get(row, col).clone()
        }
    })
}

/// `[-D_{r-1}^T  I]`, representing the dual of the cycle matroid of `K_r`.
pub fn canonical_cographic_k(r: usize) -> IntMatrix {
    let d = canonical_graphic_d(r);
    let n = d.cols();
    d.transpose().neg().hstack(&IntMatrix::identity(n)).expect("row counts agree")
}

/// Node-arc incidence of the complete digraph on `nodes` nodes, arcs `(v, w)`
/// with `v != w` in lexicographic order, `+1` at the head and `-1` at the tail.
pub fn complete_digraph_incidence(nodes: usize) -> (IntMatrix, Vec<(usize, usize)>) {
    let arcs: Vec<(usize, usize)> =
        (0..nodes).flat_map(|v| (0..nodes).filter(move |&w| w != v).map(move |w| (v, w))).collect();
    let d = IntMatrix::from_fn(nodes, arcs.len(), |row, col| {
        let (v, w) = arcs[col];
        if row == w {
            BigInt::one()
        } else if row == v {
            -BigInt::one()
        } else {
            BigInt::zero()
        }
    });
    (d, arcs)
}

/// `A^T = scale [-D^T I]`, i.e. `A = [-D; I] scale^T`, with `b = A z` for
/// `z = scale^{-T} e_j` and `j` the first index making `z` fractional.
/// `D` is [`rotational_graphic_d`]; with an acyclic orientation the cone
/// `{d : A d <= 0}` would be `{0}` and `P` a single fractional point.
/// The graph hint is `K_r`: row `i < r - 1` is the edge `(i, r - 1)`, the
/// remaining rows are the edges `(i, j)` in pair order.
pub fn gen_dual_complete(r: usize, scale: &IntMatrix, delta_cap: u64) -> Result<ProblemInstance> {
    if !(4..=7).contains(&r) {
        return Err(Error::Precondition(format!("r = {r} outside 4..=7")));
    }
    let d = rotational_graphic_d(r);
    let n = d.cols();
    if scale.rows() != n || scale.cols() != n {
        return Err(Error::DimensionMismatch(format!("scale must be {n}x{n} for r = {r}")));
    }
    let det = det_exact(scale)?.abs();
    if det.is_zero() {
        return Err(Error::Precondition("scale is singular".into()));
    }
    if det > BigInt::from(delta_cap) {
        return Err(Error::DeltaCapExceeded { delta: det.to_string(), cap: delta_cap });
    }
    let base = d.neg().vstack(&IntMatrix::identity(n))?;
    let a = base.mul(&scale.transpose())?;
    let inv_t = inverse(&scale.transpose().to_rat())?.expect("nonsingular");
    let j = (0..n)
        .find(|&j| (0..n).any(|i| !inv_t.get(i, j).is_integer()))
        .unwrap_or(0);
    let b = base.column(j);
    let mut arcs: Vec<(usize, usize)> = (0..r - 1).map(|i| (i, r - 1)).collect();
    arcs.extend(ordered_pairs(r - 1));
    let hint = GraphHint { nodes: r, column_map: (0..arcs.len()).collect(), arcs };
    let diag: Vec<String> = (0..n).map(|i| scale.get(i, i).to_string()).collect();
    let label = format!("dual-complete-r{r}-scale{}", diag.join("."));
    Ok(ProblemInstance::new(a, b, label)?.with_hint(hint))
}

/// The rational point `z` used by [`gen_dual_complete`].
pub fn dual_complete_apex(inst: &ProblemInstance) -> Option<Vec<BigRational>> {
    crate::linalg::solve_int(&inst.a, &inst.b).ok().flatten()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CounterexampleKind {
    /// Strictly bimodular, `b` in the span, row matroid graphic but not cographic.
    Cevallos,
    /// Strictly bimodular, row matroid cographic, `b` outside the span.
    Jia,
}

pub fn gen_counterexample(kind: CounterexampleKind, size: usize) -> Result<ProblemInstance> {
    match kind {
        CounterexampleKind::Cevallos => cevallos(size),
        CounterexampleKind::Jia => jia(size),
    }
}

/// Rows `[-I D̄^T 0; -I 0 0; 0 1^T -2; 0 -1^T 2]` over the complete digraph on
/// `size` nodes with node 0 deleted from `D̄`; `b = (0, 0, 1, -1)`.
fn cevallos(size: usize) -> Result<ProblemInstance> {
    if size < 2 || size % 2 != 0 {
        return Err(Error::Precondition(format!("cevallos size must be even and >= 2, got {size}")));
    }
    let (d, arcs) = complete_digraph_incidence(size);
    let na = arcs.len();
    let ny = size - 1;
    let n = na + ny + 1;
    let m = 2 * na + 2;
    let mut a = IntMatrix::zeros(m, n).to_rows();
    for e in 0..na {
        a[e][e] = BigInt::from(-1);
        for v in 0..ny {
            a[e][na + v] = d.get(v + 1, e).clone();
        }
        a[na + e][e] = BigInt::from(-1);
    }
    for v in 0..ny {
        a[2 * na][na + v] = BigInt::one();
        a[2 * na + 1][na + v] = -BigInt::one();
    }
    a[2 * na][n - 1] = BigInt::from(-2);
    a[2 * na + 1][n - 1] = BigInt::from(2);
    let mut b = vec![BigInt::zero(); m];
    b[2 * na] = BigInt::one();
    b[2 * na + 1] = -BigInt::one();
    ProblemInstance::new(IntMatrix::from_big_rows(a, n)?, b, format!("cevallos-{size}"))
}

/// Rows `[D_G 0; -D_G 0; -I 0; γ^T -2; -γ^T 2]` for `K_{size,size}` oriented
/// from `U` to `V` (`+1` at the `U` end), `γ = e_1`;
/// `b = (D_G 1 / size, -D_G 1 / size, 0, 1, -1)`.
fn jia(size: usize) -> Result<ProblemInstance> {
    if size < 2 {
        return Err(Error::Precondition(format!("jia size must be >= 2, got {size}")));
    }
    let edges: Vec<(usize, usize)> = (0..size).flat_map(|u| (0..size).map(move |v| (u, size + v))).collect();
    let ne = edges.len();
    let nodes = 2 * size;
    let dg = IntMatrix::from_fn(nodes, ne, |row, e| {
        let (u, v) = edges[e];
        if row == u {
            BigInt::one()
        } else if row == v {
            -BigInt::one()
        } else {
            BigInt::zero()
        }
    });
    let n = ne + 1;
    let m = 2 * nodes + ne + 2;
    let mut a = IntMatrix::zeros(m, n).to_rows();
    for v in 0..nodes {
        for e in 0..ne {
            a[v][e] = dg.get(v, e).clone();
            a[nodes + v][e] = -dg.get(v, e).clone();
        }
    }
    for e in 0..ne {
        a[2 * nodes + e][e] = BigInt::from(-1);
    }
    a[2 * nodes + ne][0] = BigInt::one();
    a[2 * nodes + ne][n - 1] = BigInt::from(-2);
    a[2 * nodes + ne + 1][0] = -BigInt::one();
    a[2 * nodes + ne + 1][n - 1] = BigInt::from(2);
    let degrees = dg.mul_vec(&vec![BigInt::one(); ne])?;
    let size_big = BigInt::from(size);
    let mut b = Vec::with_capacity(m);
    let scaled: Vec<BigRational> =
        degrees.iter().map(|d| BigRational::new(d.clone(), size_big.clone())).collect();
    let scaled = as_integral(&scaled).expect("every node of K_{n,n} has degree n");
    b.extend(scaled.iter().cloned());
    b.extend(scaled.iter().map(|x| -x));
    b.extend(std::iter::repeat(BigInt::zero()).take(ne));
    b.push(BigInt::one());
    b.push(-BigInt::one());
    ProblemInstance::new(IntMatrix::from_big_rows(a, n)?, b, format!("jia-{size}"))
}

/// Edge-node incidence of `C_k` with `b = 1`; `k` odd, `3 <= k <= 9`.
pub fn gen_odd_cycle_stab(k: usize) -> Result<ProblemInstance> {
    if k % 2 == 0 || !(3..=9).contains(&k) {
        return Err(Error::Precondition(format!("odd cycle length must be odd and in 3..=9, got {k}")));
    }
    ProblemInstance::new(cycle_incidence(k), vec![BigInt::one(); k], format!("odd-cycle-{k}"))
}
