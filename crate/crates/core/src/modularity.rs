//! Subdeterminant profile of a full-column-rank matrix: `Δ(A)`, `gcd(A)`,
//! strictness, a witness basis, and brute-force total unimodularity.
//!
//! Everything here enumerates minors outright, behind hard caps. There is no
//! polynomial recognition algorithm for strict Δ-modularity to lean on, so
//! the caps are the contract: callers either stay below them or supply a
//! trusted profile.

use itertools::Itertools;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det_exact, det_rows_i64, rank_int, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModularityProfile {
    pub delta: BigInt,
    pub gcd: BigInt,
    pub strictly_modular: bool,
    /// Lexicographically smallest row set realizing `delta`.
    pub witness_basis: Option<Vec<usize>>,
}

impl ModularityProfile {
    /// A profile asserted by the caller instead of computed.
    pub fn trusted(delta: u64, gcd: u64, strict: bool) -> Self {
        Self {
            delta: BigInt::from(delta),
            gcd: BigInt::from(gcd),
            strictly_modular: strict,
            witness_basis: None,
        }
    }
}

/// Row partition `B ∪ N` with `|det A_B| = Δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisSplit {
    pub basis_rows: Vec<usize>,
    pub nonbasis_rows: Vec<usize>,
    pub a_b: IntMatrix,
    pub a_n: IntMatrix,
}

impl BasisSplit {
    pub fn from_basis(a: &IntMatrix, basis_rows: Vec<usize>) -> Self {
        let nonbasis_rows: Vec<usize> = (0..a.rows()).filter(|i| !basis_rows.contains(i)).collect();
        Self {
            a_b: a.select_rows(&basis_rows),
            a_n: a.select_rows(&nonbasis_rows),
            basis_rows,
            nonbasis_rows,
        }
    }

    /// Basis rows followed by non-basis rows.
    pub fn order(&self) -> Vec<usize> {
        self.basis_rows.iter().chain(&self.nonbasis_rows).copied().collect()
    }
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Determinants of every `n x n` row submatrix, in lexicographic order of the row sets.
fn for_each_minor(a: &IntMatrix, mut f: impl FnMut(&[usize], BigInt)) {
    let n = a.cols();
    let small = a.to_i64();
    let mut buf = vec![0i64; n * n];
    for rows in (0..a.rows()).combinations(n) {
        let d = match &small {
            Some(entries) => {
                for (bi, &r) in rows.iter().enumerate() {
                    buf[bi * n..(bi + 1) * n].copy_from_slice(&entries[r * n..(r + 1) * n]);
                }
                det_rows_i64(&buf, n)
            }
            None => det_exact(&a.select_rows(&rows)).expect("square by construction"),
        };
        f(&rows, d);
    }
}

pub fn subdeterminant_profile(a: &IntMatrix, cap: u128) -> Result<ModularityProfile> {
    let rank = rank_int(a);
    if rank != a.cols() {
        return Err(Error::RankDeficient { rank, cols: a.cols() });
    }
    let needed = binomial(a.rows(), a.cols());
    if needed > cap {
        return Err(Error::CapExceeded { what: "n x n minor enumeration", needed, cap });
    }
    let mut delta = BigInt::zero();
    let mut gcd = BigInt::zero();
    let mut witness: Option<Vec<usize>> = None;
    let mut magnitudes: Vec<BigInt> = Vec::new();
    for_each_minor(a, |rows, d| {
        let d = d.abs();
        if d.is_zero() {
            return;
        }
        gcd = gcd.gcd(&d);
        if d > delta {
            delta = d.clone();
            witness = Some(rows.to_vec());
        }
        if !magnitudes.contains(&d) {
            magnitudes.push(d);
        }
    });
    let strictly_modular = magnitudes.len() == 1;
    Ok(ModularityProfile { delta, gcd, strictly_modular, witness_basis: witness })
}

/// The lexicographically smallest basis with `|det A_B| = profile.delta`.
pub fn find_basis(a: &IntMatrix, profile: &ModularityProfile) -> Result<BasisSplit> {
    if !profile.strictly_modular {
        return Err(Error::NotStrictlyModular);
    }
    if let Some(w) = &profile.witness_basis {
        let d = det_exact(&a.select_rows(w))?;
        if d.abs() == profile.delta {
            return Ok(BasisSplit::from_basis(a, w.clone()));
        }
    }
    let n = a.cols();
    let small = a.to_i64();
    let mut buf = vec![0i64; n * n];
    for rows in (0..a.rows()).combinations(n) {
        let d = match &small {
            Some(entries) => {
                for (bi, &r) in rows.iter().enumerate() {
                    buf[bi * n..(bi + 1) * n].copy_from_slice(&entries[r * n..(r + 1) * n]);
                }
                det_rows_i64(&buf, n)
            }
            None => det_exact(&a.select_rows(&rows))?,
        };
        if d.abs() == profile.delta {
            return Ok(BasisSplit::from_basis(a, rows));
        }
    }
    Err(Error::NoBasis(profile.delta.to_string()))
}

/// Every square subdeterminant in `{0, ±1}`, by enumeration.
pub fn is_totally_unimodular(m: &IntMatrix, cap: u128) -> Result<bool> {
    let small = match m.to_i64() {
        Some(e) if e.iter().all(|x| x.abs() <= 1) => e,
        _ => return Ok(false),
    };
    let (r, c) = (m.rows(), m.cols());
    let kmax = r.min(c);
    let needed: u128 = (2..=kmax).map(|k| binomial(r, k).saturating_mul(binomial(c, k))).sum();
    if needed > cap {
        return Err(Error::CapExceeded { what: "square minor enumeration", needed, cap });
    }
    for k in 2..=kmax {
        let mut buf = vec![0i64; k * k];
        for rows in (0..r).combinations(k) {
            for cols in (0..c).combinations(k) {
                for (bi, &ri) in rows.iter().enumerate() {
                    for (bj, &cj) in cols.iter().enumerate() {
                        buf[bi * k + bj] = small[ri * c + cj];
                    }
                }
                let d = det_rows_i64(&buf, k);
                if d.abs() > BigInt::one() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `Δ` as a machine integer, for code paths that enumerate cosets.
pub fn delta_u64(profile: &ModularityProfile) -> Option<u64> {
    profile.delta.to_u64()
}
