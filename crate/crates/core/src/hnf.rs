//! Unimodular triples `(U, R, H)` with `[U; R] A = [H; 0]`, and the
//! slack-space reformulation built on them.
//!
//! Two constructions live here. [`hermite_decompose`] is a plain row-style
//! Hermite normal form and works for any full-column-rank `A`.
//! [`basis_decomposition`] is the one used on strictly Δ-modular input: with
//! the basis rows first it takes `U = [I 0]`, `R = [-A_N A_B^-1  I]` and
//! `H = A_B`, which keeps `R` totally unimodular.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::circulation::CosetSystem;
use crate::error::{Error, Result};
use crate::linalg::{as_integral, det_exact, inverse, rank_int, solve_int, to_rat_vec, IntMatrix, RatVector};
use crate::modularity::BasisSplit;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnfDecomposition {
    /// `n x m`, columns indexed by `order`.
    pub u: IntMatrix,
    /// `(m - n) x m`, columns indexed by `order`.
    pub r: IntMatrix,
    pub h: IntMatrix,
    pub gcd_abs: BigInt,
    /// Row permutation of `A` the columns of `U` and `R` refer to.
    pub order: Vec<usize>,
}

impl HnfDecomposition {
    /// `[U; R]` stacked.
    pub fn stacked(&self) -> IntMatrix {
        self.u.vstack(&self.r).expect("U and R share a column count")
    }

    pub fn permute_rows(&self, a: &IntMatrix) -> IntMatrix {
        a.select_rows(&self.order)
    }

    pub fn permute<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.order.iter().map(|&i| v[i].clone()).collect()
    }

    /// Checks `[U; R]` unimodular, `[U; R] A = [H; 0]` and `|det H| = gcd_abs`.
    pub fn check(&self, a: &IntMatrix) -> Result<()> {
        let n = a.cols();
        let stacked = self.stacked();
        if det_exact(&stacked)?.abs() != BigInt::one() {
            return Err(Error::Reformulation("[U; R] is not unimodular".into()));
        }
        let prod = stacked.mul(&self.permute_rows(a))?;
        let expected = self.h.vstack(&IntMatrix::zeros(a.rows() - n, n))?;
        if prod != expected {
            return Err(Error::Reformulation("[U; R] A differs from [H; 0]".into()));
        }
        if det_exact(&self.h)?.abs() != self.gcd_abs {
            return Err(Error::Reformulation("|det H| differs from gcd(A)".into()));
        }
        Ok(())
    }
}

fn row_combine(m: &mut [Vec<BigInt>], r: usize, i: usize, s: &BigInt, t: &BigInt, p: &BigInt, q: &BigInt) {
    // (row_r, row_i) <- (s row_r + t row_i, p row_r + q row_i)
    let cols = m[r].len();
    for k in 0..cols {
        let a = m[r][k].clone();
        let b = m[i][k].clone();
        m[r][k] = s * &a + t * &b;
        m[i][k] = p * &a + q * &b;
    }
}

/// Row-style Hermite normal form: `V A = [H; 0]` with `V` unimodular and `H`
/// upper triangular, positive diagonal, off-diagonal entries reduced into
/// `[0, h_jj)`.
pub fn hermite_decompose(a: &IntMatrix) -> Result<HnfDecomposition> {
    let (m, n) = (a.rows(), a.cols());
    let rank = rank_int(a);
    if rank != n {
        return Err(Error::RankDeficient { rank, cols: n });
    }
    let mut mat = a.to_rows();
    let mut v = IntMatrix::identity(m).to_rows();
    for j in 0..n {
        let r = j;
        for i in r + 1..m {
            if mat[i][j].is_zero() {
                continue;
            }
            let a_rj = mat[r][j].clone();
            let a_ij = mat[i][j].clone();
            if !a_rj.is_zero() && a_ij.is_multiple_of(&a_rj) {
                let q = &a_ij / &a_rj;
                let (zero, one) = (BigInt::zero(), BigInt::one());
                row_combine(&mut mat, r, i, &one, &zero, &-&q, &one);
                row_combine(&mut v, r, i, &one, &zero, &-&q, &one);
                continue;
            }
            let eg = a_rj.extended_gcd(&a_ij);
            let g = eg.gcd;
            let p = -(&a_ij / &g);
            let q = &a_rj / &g;
            row_combine(&mut mat, r, i, &eg.x, &eg.y, &p, &q);
            row_combine(&mut v, r, i, &eg.x, &eg.y, &p, &q);
        }
        if mat[r][j].is_zero() {
            return Err(Error::RankDeficient { rank, cols: n });
        }
        if mat[r][j].is_negative() {
            for x in mat[r].iter_mut() {
                *x = -x.clone();
            }
            for x in v[r].iter_mut() {
                *x = -x.clone();
            }
        }
        let pivot = mat[r][j].clone();
        for k in 0..r {
            let q = mat[k][j].div_floor(&pivot);
            if q.is_zero() {
                continue;
            }
            let (zero, one) = (BigInt::zero(), BigInt::one());
            row_combine(&mut mat, k, r, &one, &-&q, &zero, &one);
            row_combine(&mut v, k, r, &one, &-&q, &zero, &one);
        }
    }
    let h = IntMatrix::from_big_rows(mat[..n].to_vec(), n)?;
    let u = IntMatrix::from_big_rows(v[..n].to_vec(), m)?;
    let r = IntMatrix::from_big_rows(v[n..].to_vec(), m)?;
    let gcd_abs = det_exact(&h)?.abs();
    Ok(HnfDecomposition { u, r, h, gcd_abs, order: (0..m).collect() })
}

/// `U = [I 0]`, `R = [-A_N A_B^-1  I]`, `H = A_B` over the row order `B, N`.
/// Fails when `A_N A_B^-1` is not integral, which cannot happen for a basis of
/// a strictly Δ-modular matrix.
pub fn basis_decomposition(split: &BasisSplit) -> Result<HnfDecomposition> {
    let n = split.a_b.cols();
    let k = split.a_n.rows();
    let inv = inverse(&split.a_b.to_rat())?
        .ok_or_else(|| Error::Reformulation("A_B is singular".into()))?;
    let s = split.a_n.to_rat().mul(&inv)?;
    let s = s
        .to_int()
        .ok_or_else(|| Error::Reformulation("A_N A_B^-1 is not integral; the profile does not match A".into()))?;
    let u = IntMatrix::identity(n).hstack(&IntMatrix::zeros(n, k))?;
    let r = s.neg().hstack(&IntMatrix::identity(k))?;
    let gcd_abs = det_exact(&split.a_b)?.abs();
    Ok(HnfDecomposition { u, r, h: split.a_b.clone(), gcd_abs, order: split.order() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemMode {
    /// `gcd(A) = 1`: the slack hull is the cone `{y >= 0 : R y = 0}`.
    PureCone,
    /// `y >= 0` integral, `R y = 0`, `U y ≡ U b (mod H Z^n)`.
    Congruency,
}

/// Slack-space system `{y in Z^m_+ : R (y - b) = 0, U (y - b) ≡ 0 mod H Z^n}`,
/// in the row order of the decomposition.
#[derive(Debug, Clone)]
pub struct CongruentSystem {
    pub mode: SystemMode,
    pub hnf: HnfDecomposition,
    /// `b` permuted into the decomposition's row order.
    pub b: Vec<BigInt>,
    /// `U b`, the congruency target.
    pub target: Vec<BigInt>,
    pub cosets: Option<CosetSystem>,
    pub target_coset: Option<usize>,
}

impl CongruentSystem {
    pub fn r(&self) -> &IntMatrix {
        &self.hnf.r
    }

    pub fn u(&self) -> &IntMatrix {
        &self.hnf.u
    }

    pub fn h(&self) -> &IntMatrix {
        &self.hnf.h
    }

    /// Does `y` (decomposition order) satisfy both constraints of the system?
    pub fn contains(&self, y: &[BigInt]) -> bool {
        if y.len() != self.b.len() || y.iter().any(|v| v.is_negative()) {
            return false;
        }
        let diff: Vec<BigInt> = y.iter().zip(&self.b).map(|(a, b)| a - b).collect();
        let Ok(ry) = self.hnf.r.mul_vec(&diff) else { return false };
        if ry.iter().any(|v| !v.is_zero()) {
            return false;
        }
        let Ok(uy) = self.hnf.u.mul_vec(&diff) else { return false };
        match solve_int(&self.hnf.h, &uy) {
            Ok(Some(t)) => t.iter().all(|x| x.is_integer()),
            _ => false,
        }
    }
}

/// Builds the congruent slack system for `A x <= b` from a decomposition.
pub fn reformulate(a: &IntMatrix, b: &[BigInt], hnf: &HnfDecomposition, delta_cap: u64) -> Result<CongruentSystem> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!("b has {} entries for {} rows", b.len(), a.rows())));
    }
    if solve_int(a, b)?.is_none() {
        return Err(Error::NotInSpan);
    }
    let b_perm = hnf.permute(b);
    let target = hnf.u.mul_vec(&b_perm)?;
    if hnf.gcd_abs.is_one() {
        return Ok(CongruentSystem {
            mode: SystemMode::PureCone,
            hnf: hnf.clone(),
            b: b_perm,
            target,
            cosets: None,
            target_coset: None,
        });
    }
    let cosets = CosetSystem::new(&hnf.h, delta_cap)?;
    let target_coset = cosets.classify(&target)?;
    Ok(CongruentSystem {
        mode: SystemMode::Congruency,
        hnf: hnf.clone(),
        b: b_perm,
        target,
        cosets: Some(cosets),
        target_coset: Some(target_coset),
    })
}

/// `x = H^-1 U (b - y)`, the preimage of a slack vector under `x -> b - A x`.
pub fn lift_back(y: &[BigRational], sys: &CongruentSystem) -> Result<RatVector> {
    if y.len() != sys.b.len() {
        return Err(Error::DimensionMismatch(format!("slack of length {} for {} rows", y.len(), sys.b.len())));
    }
    let b = to_rat_vec(&sys.b);
    let diff: RatVector = b.iter().zip(y).map(|(bi, yi)| bi - yi).collect();
    let rd = sys.hnf.r.to_rat().mul_vec(&diff)?;
    if rd.iter().any(|v| !v.is_zero()) {
        return Err(Error::Precondition("R (y - b) != 0".into()));
    }
    let ud = sys.hnf.u.to_rat().mul_vec(&diff)?;
    let inv = inverse(&sys.hnf.h.to_rat())?.ok_or_else(|| Error::Reformulation("H is singular".into()))?;
    inv.mul_vec(&ud)
}

/// Integral preimage, if the slack vector lifts to an integer point.
pub fn lift_back_integral(y: &[BigInt], sys: &CongruentSystem) -> Result<Option<Vec<BigInt>>> {
    Ok(as_integral(&lift_back(&to_rat_vec(y), sys)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cycle_incidence;
    use crate::linalg::{int_vec, rat};
    use crate::modularity::{find_basis, subdeterminant_profile};
    use proptest::prelude::*;

    #[test]
    fn identity_decomposition() {
        let d = hermite_decompose(&IntMatrix::identity(2)).unwrap();
        assert_eq!(d.u, IntMatrix::identity(2));
        assert_eq!(d.r.rows(), 0);
        assert_eq!(d.r.cols(), 2);
        assert_eq!(d.h, IntMatrix::identity(2));
    }

    #[test]
    fn one_by_one() {
        let a = IntMatrix::from_rows(&[[2]]);
        let d = hermite_decompose(&a).unwrap();
        assert_eq!(d.u, IntMatrix::from_rows(&[[1]]));
        assert_eq!(d.r.rows(), 0);
        assert_eq!(d.h, IntMatrix::from_rows(&[[2]]));
        d.check(&a).unwrap();
    }

    #[test]
    fn column_of_ones() {
        let a = IntMatrix::from_rows(&[[1], [1]]);
        let d = hermite_decompose(&a).unwrap();
        assert_eq!(d.h, IntMatrix::from_rows(&[[1]]));
        let r = d.r.row(0).to_vec();
        assert!(r == int_vec(&[-1, 1]) || r == int_vec(&[1, -1]));
        d.check(&a).unwrap();
    }

    #[test]
    fn rank_deficient_rejected() {
        let a = IntMatrix::from_rows(&[[1, 2], [2, 4]]);
        assert!(matches!(hermite_decompose(&a), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn reformulate_examples() {
        let a = IntMatrix::from_rows(&[[2]]);
        let hnf = hermite_decompose(&a).unwrap();
        let sys = reformulate(&a, &int_vec(&[1]), &hnf, 6).unwrap();
        assert_eq!(sys.mode, SystemMode::Congruency);
        assert_eq!(sys.r().rows(), 0);
        assert_eq!(sys.h(), &IntMatrix::from_rows(&[[2]]));
        let cs = sys.cosets.as_ref().unwrap();
        assert_eq!(cs.reps[sys.target_coset.unwrap()], int_vec(&[1]));

        let c5 = cycle_incidence(5);
        let p = subdeterminant_profile(&c5, 100).unwrap();
        let split = find_basis(&c5, &p).unwrap();
        let hnf = basis_decomposition(&split).unwrap();
        let sys = reformulate(&c5, &int_vec(&[1; 5]), &hnf, 6).unwrap();
        assert_eq!(sys.mode, SystemMode::Congruency);
        assert_eq!(sys.r().rows(), 0);
        assert_ne!(sys.target_coset, Some(0));

        // totally unimodular network matrix, integral apex
        let net = IntMatrix::from_rows(&[[1, 0], [-1, 1], [0, -1], [1, 1]]);
        let hnf = hermite_decompose(&net).unwrap();
        let b = net.mul_vec(&int_vec(&[2, -1])).unwrap();
        let sys = reformulate(&net, &b, &hnf, 6).unwrap();
        assert_eq!(sys.mode, SystemMode::PureCone);
    }

    #[test]
    fn reformulate_rejects_span_violation() {
        let a = IntMatrix::from_rows(&[[1], [1]]);
        let hnf = hermite_decompose(&a).unwrap();
        assert!(matches!(reformulate(&a, &int_vec(&[0, 1]), &hnf, 6), Err(Error::NotInSpan)));
    }

    #[test]
    fn basis_decomposition_rejects_non_integral() {
        let a = IntMatrix::from_rows(&[[2, 0], [0, 1], [1, 1]]);
        let split = BasisSplit::from_basis(&a, vec![0, 1]);
        assert!(matches!(basis_decomposition(&split), Err(Error::Reformulation(_))));
    }

    #[test]
    fn lift_back_examples() {
        let a = IntMatrix::from_rows(&[[2]]);
        let hnf = hermite_decompose(&a).unwrap();
        let sys = reformulate(&a, &int_vec(&[1]), &hnf, 6).unwrap();
        assert_eq!(lift_back(&[rat(1)], &sys).unwrap(), vec![rat(0)]);
        assert_eq!(lift_back(&[rat(3)], &sys).unwrap(), vec![rat(-1)]);

        let net = IntMatrix::from_rows(&[[1, 0], [-1, 1], [0, -1]]);
        let b = net.mul_vec(&int_vec(&[1, 1])).unwrap();
        let sys = reformulate(&net, &b, &hermite_decompose(&net).unwrap(), 6).unwrap();
        let y: Vec<BigRational> = sys.b.iter().cloned().map(BigRational::from_integer).collect();
        let x = lift_back(&y, &sys).unwrap();
        assert!(x.iter().all(Zero::is_zero));
        assert!(matches!(lift_back(&[rat(1), rat(0), rat(0)], &sys), Err(Error::Precondition(_))));
    }

    fn full_rank_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..=5)
            .prop_flat_map(|n| (Just(n), n..=8usize))
            .prop_flat_map(|(n, m)| (Just(n), Just(m), proptest::collection::vec(-4i64..=4, m * n)))
            .prop_map(|(n, m, e)| IntMatrix::from_fn(m, n, |i, j| BigInt::from(e[i * n + j])))
            .prop_filter("full column rank", |a| rank_int(a) == a.cols())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn hnf_invariants(a in full_rank_matrix()) {
            let d = hermite_decompose(&a).unwrap();
            prop_assert!(d.check(&a).is_ok());
            let p = subdeterminant_profile(&a, 1_000_000).unwrap();
            prop_assert_eq!(d.gcd_abs, p.gcd);
        }

        #[test]
        fn slack_round_trip(x in proptest::collection::vec(-3i64..=3, 3), slack in proptest::collection::vec(0i64..=2, 5)) {
            // A x <= b with b = A x0 + s; y = b - A x satisfies the congruent system.
            let a = IntMatrix::from_rows(&[[1, 1, 0], [0, 1, 1], [1, 0, 1], [2, 0, 0], [0, -1, 1]]);
            let x0 = int_vec(&[0, 1, 0]);
            let ax0 = a.mul_vec(&x0).unwrap();
            let b_off: Vec<BigInt> = ax0.iter().zip(&slack).map(|(v, s)| v + BigInt::from(*s)).collect();
            // keep b in the span: take the slack only on the direction of A's image
            let b = if solve_int(&a, &b_off).unwrap().is_some() { b_off } else { ax0.clone() };
            let hnf = hermite_decompose(&a).unwrap();
            let sys = reformulate(&a, &b, &hnf, 6).unwrap();
            let x = int_vec(&x);
            let ax = a.mul_vec(&x).unwrap();
            let y: Vec<BigInt> = b.iter().zip(&ax).map(|(bi, v)| bi - v).collect();
            if y.iter().all(|v| !v.is_negative()) {
                let y_perm = hnf.permute(&y);
                prop_assert!(sys.contains(&y_perm));
                let back = lift_back_integral(&y_perm, &sys).unwrap().unwrap();
                prop_assert_eq!(back, x);
            }
        }
    }

    /// Every member of the congruent system in a small box lifts to an
    /// integral feasible point.
    #[test]
    fn members_lift_to_feasible_points() {
        let a = IntMatrix::from_rows(&[[1, 1], [1, -1], [-1, 0]]);
        let b = int_vec(&[1, -1, 0]);
        for hnf in [hermite_decompose(&a).unwrap()] {
            let sys = reformulate(&a, &b, &hnf, 6).unwrap();
            let mut found = 0;
            for y0 in 0..6i64 {
                for y1 in 0..6i64 {
                    for y2 in 0..6i64 {
                        let y = hnf.permute(&int_vec(&[y0, y1, y2]));
                        if !sys.contains(&y) {
                            continue;
                        }
                        found += 1;
                        let x = lift_back_integral(&y, &sys).unwrap().expect("integral lift");
                        let ax = a.mul_vec(&x).unwrap();
                        assert!(ax.iter().zip(&b).all(|(l, r)| l <= r));
                    }
                }
            }
            assert!(found > 0);
        }
    }
}
