//! Closure of `L + M` and the coordinates in which it reads `Z^m × R^n`.
//!
//! The closure is the annihilator of `W = L* ∩ M*`: a point lies in
//! `closure(L + M)` iff it pairs integrally with every element of `W`. Taking
//! a basis of `W` as the first `m` rows of `t` therefore sends the closure to
//! `Z^m × R^n`.

use crate::field::FieldElement;
use crate::lattice::{Lattice, LatticeError};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// `m = 0`: `L + M` is dense.
    Dense,
    /// `m = d`: `L + M` is itself a lattice.
    Commensurable,
    /// `0 < m < d`.
    Intermediate,
}

impl CaseTag {
    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::Dense => "Dense",
            CaseTag::Commensurable => "Commensurable",
            CaseTag::Intermediate => "Intermediate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClosureDecomposition {
    /// Invertible change of coordinates with `t · closure(L+M) = Z^m × R^n`.
    pub t: Matrix,
    pub t_inverse: Matrix,
    /// Number of discrete directions.
    pub m: usize,
    /// Number of dense directions.
    pub n: usize,
    /// Basis (as columns) of `W = L* ∩ M*`.
    pub w_basis: Matrix,
    pub case_tag: CaseTag,
}

pub fn closure_decomposition(l: &Lattice, m_lat: &Lattice) -> Result<ClosureDecomposition, LatticeError> {
    check_pair(l, m_lat)?;
    let d = l.dim();
    let w = Lattice::intersection(&l.dual()?, &m_lat.dual()?)?;
    let m = w.rank();
    let mut rows: Vec<Vec<FieldElement>> = w.basis().columns();
    for i in 0..d {
        if rows.len() == d {
            break;
        }
        let mut unit = vec![FieldElement::zero(); d];
        unit[i] = FieldElement::one();
        rows.push(unit);
        if Matrix::from_rows(rows.clone()).rank() < rows.len() {
            rows.pop();
        }
    }
    let t = Matrix::from_rows(rows);
    let t_inverse = t.inverse().expect("completion is invertible");
    let case_tag = match m {
        0 => CaseTag::Dense,
        _ if m == d => CaseTag::Commensurable,
        _ => CaseTag::Intermediate,
    };
    Ok(ClosureDecomposition {
        t,
        t_inverse,
        m,
        n: d - m,
        w_basis: w.basis().clone(),
        case_tag,
    })
}

/// Moves `l` to `Z^d`: returns `s = basis(l)^{-1}`, `Z^d` and `s · m_lat`.
pub fn normalize_to_unit_lattice(
    l: &Lattice,
    m_lat: &Lattice,
) -> Result<(Matrix, Lattice, Lattice), LatticeError> {
    check_pair(l, m_lat)?;
    let s = l.basis_inverse().ok_or(LatticeError::NotFullRank)?.clone();
    let m_image = m_lat.transform(&s)?;
    Ok((s, Lattice::integer(l.dim()), m_image))
}

pub(crate) fn check_pair(l: &Lattice, m_lat: &Lattice) -> Result<(), LatticeError> {
    if l.dim() != m_lat.dim() {
        return Err(LatticeError::DimensionMismatch {
            expected: l.dim(),
            got: m_lat.dim(),
        });
    }
    if !l.is_full_rank() || !m_lat.is_full_rank() {
        return Err(LatticeError::NotFullRank);
    }
    Ok(())
}
