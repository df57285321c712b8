//! Counting certificate against bounded common fundamental domains.
//!
//! If `F ⊆ [−r, r]^d` were a common fundamental domain of `Z^d` and `M` with
//! `Z^d ∩ M = {0}`, every `n ∈ Z^d ∩ B_R` would give a distinct point of
//! `M ∩ B_{R+r}`. A radius with `|Z^d ∩ B_R| > |M ∩ B_{R+r}|` rules that out.

use num_bigint::BigInt;
use num_traits::{One, Pow};
use thiserror::Error;

use crate::field::{rational_floor, FieldElement, Rational};
use crate::lattice::{Lattice, LatticeError};
use crate::structure::normalize_to_unit_lattice;

/// Doublings tried before giving up.
pub const MAX_DOUBLINGS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NofdError {
    #[error("L ∩ M is nontrivial (rank {0})")]
    NontrivialIntersection(usize),
    #[error("covolume(M) / covolume(L) = {0} is not greater than 1")]
    VolumeOrder(FieldElement),
    #[error("r must be nonnegative")]
    NegativeRadius,
    #[error("no witness radius below {0}")]
    NotFound(Rational),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Counts are taken after normalizing `L` to `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnboundednessWitness {
    pub r: Rational,
    pub big_r: Rational,
    /// `|Z^d ∩ [−R, R]^d|`.
    pub count_n: BigInt,
    /// `|M ∩ [−R−r, R+r]^d|`.
    pub count_m: BigInt,
}

pub fn witness_unbounded(
    l: &Lattice,
    m_lat: &Lattice,
    r: &Rational,
) -> Result<UnboundednessWitness, NofdError> {
    if r < &Rational::from_integer(BigInt::from(0)) {
        return Err(NofdError::NegativeRadius);
    }
    let (_, _, m_unit) = normalize_to_unit_lattice(l, m_lat)?;
    let common = Lattice::intersection(l, m_lat)?;
    if common.rank() > 0 {
        return Err(NofdError::NontrivialIntersection(common.rank()));
    }
    let ratio = m_unit.full_covolume().clone();
    if ratio <= FieldElement::one() {
        return Err(NofdError::VolumeOrder(ratio));
    }
    let d = l.dim();
    let one = Rational::one();
    let mut big_r = if r > &one { r.clone() } else { one };
    for _ in 0..=MAX_DOUBLINGS {
        let count_n = count_integer_points(d, &big_r);
        let count_m = count_lattice_points(&m_unit, &(&big_r + r));
        if count_n > count_m {
            return Ok(UnboundednessWitness {
                r: r.clone(),
                big_r,
                count_n,
                count_m,
            });
        }
        big_r = big_r * BigInt::from(2);
    }
    Err(NofdError::NotFound(big_r))
}

/// `(2·floor(R) + 1)^d`.
pub fn count_integer_points(d: usize, radius: &Rational) -> BigInt {
    let side = rational_floor(radius) * 2 + 1;
    Pow::pow(side, d as u32)
}

/// `|lat ∩ [−radius, radius]^d|` by enumeration inside exact coefficient
/// bounds.
pub fn count_lattice_points(lat: &Lattice, radius: &Rational) -> BigInt {
    let d = lat.dim();
    let hi = vec![FieldElement::from_rational(radius.clone()); d];
    let lo: Vec<FieldElement> = hi.iter().map(|x| -x).collect();
    BigInt::from(lat.points_in_closed_box(&lo, &hi).len())
}
