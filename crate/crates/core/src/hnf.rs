//! Column Hermite normal form and integer kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::IntegerMatrix;

/// Column-style Hermite normal form.
///
/// Returns `(h, u)` with `m · u = h`, `u` unimodular and `h` in column echelon
/// form: the first `r` columns carry pivots in strictly increasing rows, the
/// pivots are positive, every other entry in a pivot row that belongs to an
/// earlier pivot column is reduced into `[0, pivot)`, and the remaining
/// columns are zero.
pub fn hnf(m: &IntegerMatrix) -> (IntegerMatrix, IntegerMatrix) {
    let mut h = m.clone();
    let mut u = IntegerMatrix::identity(m.cols());
    let mut p = 0;
    for row in 0..h.rows() {
        if p == h.cols() {
            break;
        }
        // gcd-eliminate row entries in columns p+1.. into column p
        for j in p + 1..h.cols() {
            if h[(row, j)].is_zero() {
                continue;
            }
            let a = h[(row, p)].clone();
            let b = h[(row, j)].clone();
            let eg = a.extended_gcd(&b);
            let (g, s, t) = (eg.gcd, eg.x, eg.y);
            let a_g = &a / &g;
            let b_g = &b / &g;
            let neg_b_g = -&b_g;
            // (col_p, col_j) <- (s·col_p + t·col_j, −b/g·col_p + a/g·col_j)
            h.combine_columns(p, j, [&s, &t, &neg_b_g, &a_g]);
            u.combine_columns(p, j, [&s, &t, &neg_b_g, &a_g]);
        }
        if h[(row, p)].is_zero() {
            continue;
        }
        if h[(row, p)].is_negative() {
            h.negate_column(p);
            u.negate_column(p);
        }
        let pivot = h[(row, p)].clone();
        for j in 0..p {
            let q = h[(row, j)].div_floor(&pivot);
            if !q.is_zero() {
                let neg_q = -q;
                h.add_column_multiple(j, p, &neg_q);
                u.add_column_multiple(j, p, &neg_q);
            }
        }
        p += 1;
    }
    (h, u)
}

/// Number of pivot columns of a column HNF.
pub fn hnf_rank(h: &IntegerMatrix) -> usize {
    (0..h.cols())
        .take_while(|&j| (0..h.rows()).any(|i| !h[(i, j)].is_zero()))
        .count()
}

/// A Z-basis (as columns) of `{x ∈ Z^n : m · x = 0}`.
pub fn integer_kernel(m: &IntegerMatrix) -> IntegerMatrix {
    let (h, u) = hnf(m);
    let r = hnf_rank(&h);
    u.select_columns(r..m.cols())
}

/// Reduces the generators given as columns to a basis of the group they
/// span (the nonzero columns of their HNF).
pub fn column_basis(gens: &IntegerMatrix) -> IntegerMatrix {
    let (h, _) = hnf(gens);
    let r = hnf_rank(&h);
    h.select_columns(0..r)
}

/// Canonical coset representatives modulo a full-rank integer lattice.
///
/// The lattice is kept in lower-triangular column HNF, so reducing the
/// coordinates top to bottom lands every vector in `∏ [0, h_ii)`.
#[derive(Debug, Clone)]
pub struct CosetReducer {
    h: IntegerMatrix,
}

impl CosetReducer {
    /// `basis` must be square with nonzero determinant.
    pub fn new(basis: &IntegerMatrix) -> Self {
        assert_eq!(basis.rows(), basis.cols(), "square basis");
        let (h, _) = hnf(basis);
        assert_eq!(hnf_rank(&h), basis.cols(), "full-rank basis");
        CosetReducer { h }
    }

    /// The quotient order `|Z^d / lattice|`.
    pub fn index(&self) -> BigInt {
        (0..self.h.rows()).fold(BigInt::one(), |acc, i| acc * &self.h[(i, i)])
    }

    pub fn reduce(&self, v: &[BigInt]) -> Vec<BigInt> {
        let mut v = v.to_vec();
        for i in 0..self.h.rows() {
            let q = v[i].div_floor(&self.h[(i, i)]);
            if q.is_zero() {
                continue;
            }
            for (r, x) in v.iter_mut().enumerate().skip(i) {
                *x -= &q * &self.h[(r, i)];
            }
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn is_column_hnf(h: &IntegerMatrix) -> bool {
        let r = hnf_rank(h);
        let mut last_row: Option<usize> = None;
        for j in 0..r {
            let Some(pr) = (0..h.rows()).find(|&i| !h[(i, j)].is_zero()) else {
                return false;
            };
            if last_row.is_some_and(|l| pr <= l) || !h[(pr, j)].is_positive() {
                return false;
            }
            for k in 0..j {
                if h[(pr, k)].is_negative() || h[(pr, k)] >= h[(pr, j)] {
                    return false;
                }
            }
            last_row = Some(pr);
        }
        (r..h.cols()).all(|j| (0..h.rows()).all(|i| h[(i, j)].is_zero()))
    }

    fn span_in_box(gens: &IntegerMatrix, coeff: i64, window: i64) -> BTreeSet<Vec<BigInt>> {
        let n = gens.cols();
        let mut out = BTreeSet::new();
        let mut k = vec![-coeff; n];
        loop {
            let kb: Vec<BigInt> = k.iter().map(|&x| BigInt::from(x)).collect();
            let p = gens.mul_vec(&kb);
            if p.iter().all(|x| x.abs() <= BigInt::from(window)) {
                out.insert(p);
            }
            let mut i = 0;
            loop {
                if i == n {
                    return out;
                }
                k[i] += 1;
                if k[i] <= coeff {
                    break;
                }
                k[i] = -coeff;
                i += 1;
            }
        }
    }

    #[test]
    fn identity_is_fixed() {
        let id = IntegerMatrix::identity(2);
        let (h, u) = hnf(&id);
        assert_eq!(h, id);
        assert_eq!(u, id);
    }

    #[test]
    fn index_two_columns() {
        // columns (2,0), (1,1): det 2, the lattice {x + y even}
        let m = IntegerMatrix::from_rows(&[&[2, 1], &[0, 1]]);
        let (h, u) = hnf(&m);
        assert_eq!(m.mul(&u), h);
        assert_eq!(h, IntegerMatrix::from_rows(&[&[1, 0], &[1, 2]]));
        let window = 2;
        let from_m = span_in_box(&m, 8, window);
        assert_eq!(from_m, span_in_box(&h, 8, window));
        let even: BTreeSet<Vec<BigInt>> = span_in_box(&IntegerMatrix::identity(2), window, window)
            .into_iter()
            .filter(|p| (&p[0] + &p[1]).is_even())
            .collect();
        assert_eq!(from_m, even);
    }

    #[test]
    fn unimodular_columns_give_identity() {
        let m = IntegerMatrix::from_rows(&[&[2, 1], &[1, 1]]);
        let (h, _) = hnf(&m);
        assert_eq!(h, IntegerMatrix::identity(2));
        assert_eq!(span_in_box(&m, 6, 2).len(), 25);
    }

    #[test]
    fn zero_matrix() {
        let z = IntegerMatrix::zeros(2, 3);
        let (h, u) = hnf(&z);
        assert!(h.is_zero());
        assert_eq!(u, IntegerMatrix::identity(3));
    }

    #[test]
    fn kernels() {
        let k = integer_kernel(&IntegerMatrix::from_rows(&[&[1, -1]]));
        assert_eq!(k.cols(), 1);
        let v = k.column(0);
        assert_eq!(v[0], v[1]);
        assert_eq!(v[0].abs(), BigInt::one());

        assert_eq!(integer_kernel(&IntegerMatrix::identity(3)).cols(), 0);

        let k = integer_kernel(&IntegerMatrix::from_rows(&[&[2, 4]]));
        assert_eq!(k.cols(), 1);
        let v = k.column(0);
        // brute force over [-5, 5]²: every solution is a multiple of v
        for x in -5i64..=5 {
            for y in -5i64..=5 {
                if 2 * x + 4 * y == 0 {
                    let (x, y) = (BigInt::from(x), BigInt::from(y));
                    let t = if v[0].is_zero() { &y / &v[1] } else { &x / &v[0] };
                    assert_eq!((&t * &v[0], &t * &v[1]), (x, y));
                }
            }
        }
        assert_eq!(v[0].abs(), BigInt::from(2));
    }

    #[test]
    fn coset_reduction() {
        let r = CosetReducer::new(&IntegerMatrix::from_rows(&[&[1, 1], &[1, -1]]));
        assert_eq!(r.index(), BigInt::from(2));
        let a = r.reduce(&[BigInt::from(3), BigInt::from(4)]);
        let b = r.reduce(&[BigInt::from(0), BigInt::from(1)]);
        assert_eq!(a, b);
        let c = r.reduce(&[BigInt::from(5), BigInt::from(-3)]);
        assert_eq!(c, r.reduce(&[BigInt::zero(), BigInt::zero()]));
    }

    fn arb_matrix() -> impl Strategy<Value = IntegerMatrix> {
        (1usize..4, 1usize..4).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-4i64..=4, r * c).prop_map(move |v| {
                let rows: Vec<&[i64]> = v.chunks(c).collect();
                IntegerMatrix::from_rows(&rows)
            })
        })
    }

    proptest! {
        #[test]
        fn hnf_properties(m in arb_matrix()) {
            let (h, u) = hnf(&m);
            prop_assert_eq!(m.mul(&u), h.clone());
            prop_assert_eq!(u.det().abs(), BigInt::one());
            prop_assert!(is_column_hnf(&h));
            let basis = h.select_columns(0..hnf_rank(&h));
            if m.cols() <= 3 {
                prop_assert_eq!(span_in_box(&m, 5, 3).is_subset(&span_in_box(&basis, 12, 3)), true);
            }
        }

        #[test]
        fn kernel_properties(m in arb_matrix()) {
            let k = integer_kernel(&m);
            prop_assert!(m.mul(&k).is_zero());
            // brute force: every small solution lies in the kernel span
            let n = m.cols();
            let kernel_pts = span_in_box(&k, 8, 3);
            let all = span_in_box(&IntegerMatrix::identity(n), 3, 3);
            for x in all {
                if m.mul_vec(&x).iter().all(Zero::is_zero) {
                    prop_assert!(kernel_pts.contains(&x), "missing {:?}", x);
                }
            }
        }
    }
}
