//! `L + M = Z^d`: `F` is a union of unit cubes at the points
//! `e_i = g_i + h_i`, where the `g_i ∈ M` run over `Z^d / L` and the
//! `h_i ∈ L` over part of `Z^d / M`. Each `e_i` is congruent to `g_i` mod `L`
//! and to `h_i` mod `M`, so the cubes tile by `L` and pack by `M`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::ConstructError;
use crate::field::FieldElement;
use crate::geometry::{Body, Frame, HalfOpenBox};
use crate::hnf::CosetReducer;
use crate::lattice::{linf_shell, to_bigints, Lattice};
use crate::matrix::{IntegerMatrix, Matrix};

#[derive(Debug, Clone)]
pub struct CommensurableTrace {
    /// `H = L ∩ M`.
    pub h_basis: Lattice,
    /// `|Z^d / H|`.
    pub group_order: BigInt,
    /// Points of `M`, one per class of `Z^d / L`.
    pub g_reps: Vec<Vec<BigInt>>,
    /// Points of `L`, one per class of `Z^d / M`.
    pub h_reps: Vec<Vec<BigInt>>,
    pub e_points: Vec<Vec<BigInt>>,
}

/// Both lattices must have integer bases with `L + M = Z^d` and
/// `covolume(L) ≤ covolume(M)`. The body is in the input coordinates.
pub fn commensurable_construct(
    l: &Lattice,
    m_lat: &Lattice,
) -> Result<(Body, CommensurableTrace), ConstructError> {
    let d = l.dim();
    let lb = integer_basis(l)?;
    let mb = integer_basis(m_lat)?;
    let g_reps = class_representatives(&mb, &lb);
    let h_reps = class_representatives(&lb, &mb);
    if g_reps.len() > h_reps.len() {
        return Err(ConstructError::Internal(
            "covolume order checked before dispatch".into(),
        ));
    }
    let e_points: Vec<Vec<BigInt>> = g_reps
        .iter()
        .zip(&h_reps)
        .map(|(g, h)| g.iter().zip(h).map(|(a, b)| a + b).collect())
        .collect();
    let one = FieldElement::one();
    let boxes = e_points
        .iter()
        .map(|e| {
            let lo = e.iter().cloned().map(FieldElement::from_bigint).collect();
            HalfOpenBox::cube(lo, &one).expect("unit side")
        })
        .collect();
    let body = Body::new(d, boxes, Frame::Canonical, Matrix::identity(d))
        .map_err(|e| ConstructError::Internal(format!("commensurable cubes: {e}")))?;
    let h_basis = Lattice::intersection(l, m_lat)?;
    let group_order = h_basis
        .full_covolume()
        .to_integer()
        .ok_or_else(|| ConstructError::Internal("L ∩ M is not an integer lattice".into()))?;
    Ok((
        body,
        CommensurableTrace {
            h_basis,
            group_order,
            g_reps,
            h_reps,
            e_points,
        },
    ))
}

fn integer_basis(lat: &Lattice) -> Result<IntegerMatrix, ConstructError> {
    lat.basis()
        .to_integer()
        .ok_or_else(|| ConstructError::Internal("basis is not integral in canonical coordinates".into()))
}

/// Points of `source` (scanned by `ℓ∞` shells of coefficients), the first
/// one met in each class of `Z^d / modulus`. `source + modulus = Z^d`
/// guarantees every class is hit; coefficients below the quotient order
/// already reach all of them.
fn class_representatives(source: &IntegerMatrix, modulus: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    let reducer = CosetReducer::new(modulus);
    let order = reducer.index().to_usize().expect("quotient order fits in memory");
    let d = source.cols();
    let mut seen = HashSet::with_capacity(order);
    let mut reps = Vec::with_capacity(order);
    let mut radius = 0u64;
    while reps.len() < order {
        for k in linf_shell(d, radius) {
            let p = source.mul_vec(&to_bigints(&k));
            if seen.insert(reducer.reduce(&p)) {
                reps.push(p);
                if reps.len() == order {
                    break;
                }
            }
        }
        radius += 1;
    }
    reps
}
