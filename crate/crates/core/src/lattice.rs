//! Lattices over `Q(√D)`: membership, duals, intersections and indices.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::field::{FieldElement, FieldError, Rational};
use crate::hnf::{column_basis, integer_kernel};
use crate::matrix::{clear_denominators, IntegerMatrix, Matrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("basis columns are linearly dependent")]
    DependentBasis,
    #[error("operation needs a full-rank lattice")]
    NotFullRank,
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("sublattice generator {0} is not a member of the superlattice")]
    NotContained(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A lattice `B·Z^r` in `R^d`, stored by a `d × r` basis matrix whose
/// columns are the generators.
#[derive(Clone, PartialEq, Eq)]
pub struct Lattice {
    basis: Matrix,
    gram_det: FieldElement,
    covolume: Option<FieldElement>,
    inverse: Option<Matrix>,
}

impl Lattice {
    /// Fails if the columns are dependent over the reals.
    pub fn new(basis: Matrix) -> Result<Self, LatticeError> {
        let gram = basis.transpose().mul(&basis);
        let gram_det = gram.det();
        if basis.cols() > 0 && !gram_det.is_positive() {
            return Err(LatticeError::DependentBasis);
        }
        if basis.cols() > basis.rows() {
            return Err(LatticeError::DependentBasis);
        }
        let (covolume, inverse) = if basis.is_square() {
            let inv = basis.inverse().ok_or(LatticeError::DependentBasis)?;
            (Some(basis.det().abs()), Some(inv))
        } else {
            (support_covolume(&basis).or_else(|| gram_det.sqrt_exact()), None)
        };
        Ok(Lattice {
            basis,
            gram_det,
            covolume,
            inverse,
        })
    }

    /// `Z^d`.
    pub fn integer(d: usize) -> Self {
        Self::new(Matrix::identity(d)).expect("identity basis")
    }

    /// The rank-0 lattice in `R^d`.
    pub fn trivial(d: usize) -> Self {
        Self::new(Matrix::zeros(d, 0)).expect("empty basis")
    }

    pub fn from_columns(d: usize, columns: &[Vec<FieldElement>]) -> Result<Self, LatticeError> {
        if let Some(bad) = columns.iter().find(|c| c.len() != d) {
            return Err(LatticeError::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        Self::new(Matrix::from_columns(d, columns))
    }

    /// The group generated by the columns of `ambient · coeffs`, reduced to
    /// a basis through the HNF of the coefficient matrix. `ambient` must
    /// have independent columns.
    pub fn from_coefficient_generators(
        ambient: &Matrix,
        coeffs: &IntegerMatrix,
    ) -> Result<Self, LatticeError> {
        let reduced = column_basis(coeffs);
        Self::new(ambient.mul_int(&reduced))
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Determinant of the Gram matrix (the squared covolume).
    pub fn gram_det(&self) -> &FieldElement {
        &self.gram_det
    }

    /// Rank-dimensional volume of a fundamental cell. Always present for
    /// full-rank lattices; for lower rank it is present when it lies in
    /// the field.
    pub fn covolume(&self) -> Option<&FieldElement> {
        self.covolume.as_ref()
    }

    pub(crate) fn full_covolume(&self) -> &FieldElement {
        self.covolume.as_ref().expect("full-rank lattice has a covolume")
    }

    /// Inverse of the basis matrix, for full-rank lattices.
    pub fn basis_inverse(&self) -> Option<&Matrix> {
        self.inverse.as_ref()
    }

    pub fn point(&self, coeffs: &[BigInt]) -> Vec<FieldElement> {
        self.basis.mul_int_vec(coeffs)
    }

    /// The image `t · L`.
    pub fn transform(&self, t: &Matrix) -> Result<Lattice, LatticeError> {
        if t.cols() != self.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.dim(),
                got: t.cols(),
            });
        }
        Lattice::new(t.mul(&self.basis))
    }

    /// An LLL-reduced basis (`δ = 0.99`) of the same lattice. Floating point
    /// only steers the choice of integer column operations, which are
    /// applied exactly, so the result always generates the same lattice.
    pub fn reduced(&self) -> Lattice {
        let r = self.rank();
        let mut cols = self.basis.columns();
        let mut k = 1;
        let mut steps = 0;
        while k < r && steps < 10_000 * r * r {
            steps += 1;
            for j in (0..k).rev() {
                let (mu, _) = gram_schmidt(&cols, k, j);
                let c = mu.round();
                if c != 0.0 && c.is_finite() {
                    let c = FieldElement::from_int(c as i64);
                    let bj = cols[j].clone();
                    for (x, y) in cols[k].iter_mut().zip(&bj) {
                        *x = &*x - &(&c * y);
                    }
                }
            }
            let (mu, norms) = gram_schmidt(&cols, k, k - 1);
            if norms[k] >= (0.99 - mu * mu) * norms[k - 1] {
                k += 1;
            } else {
                cols.swap(k, k - 1);
                k = (k - 1).max(1);
            }
        }
        Lattice::new(Matrix::from_columns(self.dim(), &cols)).expect("unimodular change of basis")
    }

    /// Integer coordinates of `v` in this lattice, or `None` when `v` is
    /// not a lattice point.
    pub fn membership(&self, v: &[FieldElement]) -> Result<Option<Vec<BigInt>>, LatticeError> {
        if v.len() != self.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let coords = match &self.inverse {
            Some(inv) => Some(inv.mul_vec(v)),
            None => self.basis.solve(v),
        };
        Ok(coords.and_then(|c| c.iter().map(FieldElement::to_integer).collect()))
    }

    pub fn contains(&self, v: &[FieldElement]) -> Result<bool, LatticeError> {
        Ok(self.membership(v)?.is_some())
    }

    /// `L* = B^{-T} Z^d`.
    pub fn dual(&self) -> Result<Lattice, LatticeError> {
        let inv = self.inverse.as_ref().ok_or(LatticeError::NotFullRank)?;
        Lattice::new(inv.transpose())
    }

    /// `a ∩ b`, possibly of lower rank.
    ///
    /// Solves `A u = B v` over the integers by splitting every equation into
    /// its rational and `√D` components.
    pub fn intersection(a: &Lattice, b: &Lattice) -> Result<Lattice, LatticeError> {
        if a.dim() != b.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        let (ra, rb) = (a.rank(), b.rank());
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(2 * a.dim());
        for i in 0..a.dim() {
            let mut rational = Vec::with_capacity(ra + rb);
            let mut irrational = Vec::with_capacity(ra + rb);
            for j in 0..ra {
                let e = &a.basis[(i, j)];
                rational.push(e.rational_part().clone());
                irrational.push(e.irrational_part().clone());
            }
            for j in 0..rb {
                let e = &b.basis[(i, j)];
                rational.push(-e.rational_part().clone());
                irrational.push(-e.irrational_part().clone());
            }
            // radicand mismatch shows up as two independent irrational rows;
            // reject it explicitly instead
            check_tags(a.basis.row(i), b.basis.row(i))?;
            rows.push(clear_denominators(&rational));
            if irrational.iter().any(|q: &Rational| !q.is_zero()) {
                rows.push(clear_denominators(&irrational));
            }
        }
        let mut system = IntegerMatrix::zeros(rows.len(), ra + rb);
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                system[(i, j)] = x.clone();
            }
        }
        let kernel = integer_kernel(&system);
        let u_block = kernel.select_rows(0..ra);
        Lattice::from_coefficient_generators(&a.basis, &u_block)
    }

    /// `[super : sub]` for lattices of equal rank with `sub ⊆ super`.
    pub fn sublattice_index(sub: &Lattice, sup: &Lattice) -> Result<Rational, LatticeError> {
        if sub.dim() != sup.dim() {
            return Err(LatticeError::DimensionMismatch {
                expected: sup.dim(),
                got: sub.dim(),
            });
        }
        if sub.rank() != sup.rank() {
            return Err(LatticeError::RankMismatch(sub.rank(), sup.rank()));
        }
        let mut coords = Vec::with_capacity(sub.rank());
        for (j, col) in sub.basis.columns().into_iter().enumerate() {
            coords.push(sup.membership(&col)?.ok_or(LatticeError::NotContained(j))?);
        }
        let c = IntegerMatrix::from_columns(sup.rank(), &coords);
        Ok(Rational::from_integer(c.det().abs()))
    }

    /// Closed coefficient box `[ceil(min), floor(max)]` per coordinate
    /// covering every lattice point of the closed box `[lo, hi]`.
    pub fn coefficient_bounds(
        &self,
        lo: &[FieldElement],
        hi: &[FieldElement],
    ) -> Option<Vec<(BigInt, BigInt)>> {
        let inv = self.inverse.as_ref()?;
        let mut out = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let (mut min, mut max) = (FieldElement::zero(), FieldElement::zero());
            for j in 0..self.dim() {
                let c = &inv[(i, j)];
                match c.signum() {
                    1 => {
                        min = &min + &(c * &lo[j]);
                        max = &max + &(c * &hi[j]);
                    }
                    -1 => {
                        min = &min + &(c * &hi[j]);
                        max = &max + &(c * &lo[j]);
                    }
                    _ => {}
                }
            }
            out.push((min.ceil(), max.floor()));
        }
        Some(out)
    }

    /// Lattice points (as coefficient vectors) in the closed box `[lo, hi]`.
    pub fn points_in_closed_box(
        &self,
        lo: &[FieldElement],
        hi: &[FieldElement],
    ) -> Vec<Vec<BigInt>> {
        let Some(bounds) = self.coefficient_bounds(lo, hi) else {
            return Vec::new();
        };
        IntegerBox::new(bounds)
            .filter(|k| {
                let p = self.point(k);
                p.iter()
                    .zip(lo.iter().zip(hi))
                    .all(|(x, (l, h))| x >= l && x <= h)
            })
            .collect()
    }
}

impl std::fmt::Debug for Lattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Lattice")
            .field("basis_columns", &self.basis.columns())
            .finish()
    }
}

fn check_tags(a: &[FieldElement], b: &[FieldElement]) -> Result<(), FieldError> {
    let mut tag = None;
    for e in a.iter().chain(b) {
        if let Some(d) = e.radicand() {
            match tag {
                Some(t) if t != d => return Err(FieldError::MismatchedRadicand(t, d)),
                _ => tag = Some(d),
            }
        }
    }
    Ok(())
}

/// `μ_{k,j}` and the squared Gram–Schmidt norms of `cols[..=k]`, in f64.
fn gram_schmidt(cols: &[Vec<FieldElement>], k: usize, j: usize) -> (f64, Vec<f64>) {
    let vf: Vec<Vec<f64>> = cols[..=k]
        .iter()
        .map(|c| c.iter().map(FieldElement::to_f64).collect())
        .collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut norms: Vec<f64> = Vec::with_capacity(k + 1);
    let mut mu_kj = 0.0;
    for (i, v) in vf.iter().enumerate() {
        let mut w = v.clone();
        for (t, s) in star.iter().enumerate() {
            let m = if norms[t] > 0.0 { dot(v, s) / norms[t] } else { 0.0 };
            if i == k && t == j {
                mu_kj = m;
            }
            for (x, y) in w.iter_mut().zip(s) {
                *x -= m * y;
            }
        }
        norms.push(dot(&w, &w));
        star.push(w);
    }
    (mu_kj, norms)
}

/// Covolume of a lattice whose basis vanishes outside exactly `rank`
/// coordinates: the absolute determinant of that block.
fn support_covolume(basis: &Matrix) -> Option<FieldElement> {
    let support: Vec<usize> = (0..basis.rows())
        .filter(|&i| basis.row(i).iter().any(|x| !x.is_zero()))
        .collect();
    if support.len() != basis.cols() {
        return None;
    }
    Some(basis.select_rows(&support).det().abs())
}

/// Iterates every integer vector of a product of closed ranges, in
/// lexicographic order (last coordinate fastest).
#[derive(Debug, Clone)]
pub struct IntegerBox {
    bounds: Vec<(BigInt, BigInt)>,
    next: Option<Vec<BigInt>>,
}

impl IntegerBox {
    pub fn new(bounds: Vec<(BigInt, BigInt)>) -> Self {
        let empty = bounds.iter().any(|(l, h)| l > h);
        let next = (!empty).then(|| bounds.iter().map(|(l, _)| l.clone()).collect());
        IntegerBox { bounds, next }
    }
}

impl Iterator for IntegerBox {
    type Item = Vec<BigInt>;

    fn next(&mut self) -> Option<Vec<BigInt>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut i = succ.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            succ[i] += 1;
            if succ[i] <= self.bounds[i].1 {
                self.next = Some(succ);
                break;
            }
            succ[i] = self.bounds[i].0.clone();
        }
        Some(current)
    }
}

/// Integer vectors of `Z^d` with `ℓ∞` norm exactly `radius`, in
/// lexicographic order.
pub fn linf_shell(d: usize, radius: u64) -> Vec<Vec<i64>> {
    let r = radius as i64;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    shell_rec(d, r, false, &mut cur, &mut out);
    out
}

fn shell_rec(d: usize, r: i64, hit: bool, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if cur.len() == d {
        if hit || r == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let last = cur.len() + 1 == d;
    for x in -r..=r {
        let on = x.abs() == r;
        if last && !hit && !on {
            continue;
        }
        cur.push(x);
        shell_rec(d, r, hit || on, cur, out);
        cur.pop();
    }
}

pub fn to_bigints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
