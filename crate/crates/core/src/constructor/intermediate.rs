//! `closure(L + M) = Z^m × R^n` with `0 < m < d`.
//!
//! `L = L₁ ⊕ L₂` with `L₂ = L ∩ ({0}^m × R^n)`, likewise `M`. With
//! `p = det π(L₁)` and `q = det π(M₁)`, the superlattices `L₂′ ⊇ L₂` of index
//! `q` and `M₂′ ⊇ M₂` of index `p` satisfy `covolume(L₂′) < covolume(M₂′)`, so
//! the `n`-dimensional construction gives `E` tiling by `L₂′` and packing by
//! `M₂′`. Then
//!
//! `F = [0,1)^m × {0}^n + { x + ψ(x) + y + φ(y) : x ∈ K₁, y ∈ J₁ } + E`
//!
//! where `J₁ ⊆ L₁` represents `Z^m / π(M₁)`, `K₁ ⊆ M₁` represents
//! `Z^m / π(L₁)`, `φ : J₁ → J₂ = L₂′ / L₂` and `ψ : K₁ → K₂ = M₂′ / M₂`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use super::{construct_with, ConstructError, ConstructOptions, Construction};
use crate::field::FieldElement;
use crate::geometry::HalfOpenBox;
use crate::hnf::{hnf, hnf_rank, CosetReducer};
use crate::lattice::{linf_shell, to_bigints, Lattice};
use crate::matrix::{IntegerMatrix, Matrix};

#[derive(Debug, Clone)]
pub struct IntermediateTrace {
    pub m: usize,
    pub n: usize,
    pub l1: Lattice,
    pub l2: Lattice,
    pub m1: Lattice,
    pub m2: Lattice,
    /// `det π(L₁) = [Z^m : π(L)]`.
    pub det_l1: BigInt,
    /// `det π(M₁) = [Z^m : π(M)]`.
    pub det_m1: BigInt,
    /// `L₂′`, `M₂′` embedded in `R^d` (first `m` coordinates zero).
    pub l2_prime: Lattice,
    pub m2_prime: Lattice,
    pub j1: Vec<Vec<FieldElement>>,
    pub k1: Vec<Vec<FieldElement>>,
    /// Coset representatives of `L₂′ / L₂` and `M₂′ / M₂`, in `R^n`.
    pub j2: Vec<Vec<FieldElement>>,
    pub k2: Vec<Vec<FieldElement>>,
    /// `pairing_l[b]` is the index in `j2` assigned to `j1[b]`.
    pub pairing_l: Vec<usize>,
    pub pairing_m: Vec<usize>,
    /// The points `x + ψ(x) + y + φ(y)`, `x`-major.
    pub translates: Vec<Vec<FieldElement>>,
    /// Construction on `(L₂′, M₂′)` in `R^n`; its body is `E`.
    pub e: Box<Construction>,
}

pub(crate) struct Built {
    pub boxes: Vec<HalfOpenBox>,
    /// Maps the input coordinates to box coordinates.
    pub frame: Matrix,
    pub trace: IntermediateTrace,
}

struct Split {
    first: Lattice,
    second: Lattice,
    /// `π` of the first part: an `m × m` lower-triangular integer basis.
    head: IntegerMatrix,
    det: BigInt,
}

/// `lat = first ⊕ second` with `second = lat ∩ ({0}^m × R^n)`.
fn split(lat: &Lattice, m: usize) -> Result<Split, ConstructError> {
    let d = lat.dim();
    let top = lat
        .basis()
        .submatrix(0..m, 0..d)
        .to_integer()
        .ok_or_else(|| ConstructError::Internal("discrete coordinates are not integral".into()))?;
    let (h, u) = hnf(&top);
    if hnf_rank(&h) != m {
        return Err(ConstructError::Internal("projection to Z^m is not full rank".into()));
    }
    let first = Lattice::new(lat.basis().mul_int(&u.select_columns(0..m)))?;
    let second = Lattice::new(lat.basis().mul_int(&u.select_columns(m..d)))?;
    let head = h.select_columns(0..m);
    let det = head.det().abs();
    Ok(Split {
        first,
        second,
        head,
        det,
    })
}

/// The last `n` rows of a basis whose first `m` rows vanish, with the first
/// column divided by `index`.
fn refine(second: &Lattice, m: usize, index: &BigInt) -> Result<(Matrix, Lattice), ConstructError> {
    let d = second.dim();
    let mut tail = second.basis().submatrix(m..d, 0..d - m);
    let div = FieldElement::from_bigint(index.clone());
    for i in 0..tail.rows() {
        tail[(i, 0)] = &tail[(i, 0)] / &div;
    }
    Ok((tail.clone(), Lattice::new(tail)?))
}

fn embed(m: usize, v: &[FieldElement]) -> Vec<FieldElement> {
    let mut out = vec![FieldElement::zero(); m];
    out.extend_from_slice(v);
    out
}

/// `{k · b / q : 0 ≤ k < q}` for the first basis column `b`.
fn progression(first_column: &[FieldElement], q: &BigInt) -> Vec<Vec<FieldElement>> {
    let q_fe = FieldElement::from_bigint(q.clone());
    let count = q.to_usize().expect("index fits in memory");
    (0..count)
        .map(|k| {
            let k = FieldElement::from_int(k as i64);
            first_column.iter().map(|x| &(&k * x) / &q_fe).collect()
        })
        .collect()
}

/// Points of `part` (rank `m`), one per class of `Z^m / modulus` under the
/// projection to the first `m` coordinates.
fn projected_representatives(part: &Lattice, m: usize, modulus: &IntegerMatrix) -> Vec<Vec<FieldElement>> {
    let reducer = CosetReducer::new(modulus);
    let order = reducer.index().to_usize().expect("quotient order fits in memory");
    let mut seen = HashSet::with_capacity(order);
    let mut reps = Vec::with_capacity(order);
    let mut radius = 0u64;
    while reps.len() < order {
        for k in linf_shell(m, radius) {
            let p = part.point(&to_bigints(&k));
            let head: Vec<BigInt> = p[..m]
                .iter()
                .map(|x| x.to_integer().expect("integral discrete coordinates"))
                .collect();
            if seen.insert(reducer.reduce(&head)) {
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

/// `l`, `m_lat` are in canonical coordinates (`closure(L+M) = Z^m × R^n`).
pub(crate) fn build(
    l: &Lattice,
    m_lat: &Lattice,
    m: usize,
    opts: &ConstructOptions,
) -> Result<Built, ConstructError> {
    let d = l.dim();
    let n = d - m;
    let ls = split(l, m)?;
    let ms = split(m_lat, m)?;
    let (p, q) = (&ls.det, &ms.det);

    let (l2p_tail, l2p) = refine(&ls.second, m, q)?;
    let (m2p_tail, m2p) = refine(&ms.second, m, p)?;
    let j2 = progression(&ls.second.basis().submatrix(m..d, 0..n).column(0), q);
    let k2 = progression(&ms.second.basis().submatrix(m..d, 0..n).column(0), p);

    let e = construct_with(&l2p, &m2p, opts)?;
    let to_e = e.body.transform_to_frame().clone();

    let j1 = projected_representatives(&ls.first, m, &ms.head);
    let k1 = projected_representatives(&ms.first, m, &ls.head);
    let pairing_l: Vec<usize> = (0..j1.len()).collect();
    let pairing_m: Vec<usize> = (0..k1.len()).collect();

    let mut translates = Vec::with_capacity(j1.len() * k1.len());
    for (a, x) in k1.iter().enumerate() {
        let psi = embed(m, &k2[pairing_m[a]]);
        for (b, y) in j1.iter().enumerate() {
            let phi = embed(m, &j2[pairing_l[b]]);
            translates.push(
                (0..d)
                    .map(|i| &(&(&x[i] + &psi[i]) + &y[i]) + &phi[i])
                    .collect::<Vec<FieldElement>>(),
            );
        }
    }

    let one = FieldElement::one();
    let mut boxes = Vec::with_capacity(translates.len() * e.body.boxes().len());
    for t in &translates {
        let head_lo = &t[..m];
        let head_hi: Vec<FieldElement> = head_lo.iter().map(|x| x + &one).collect();
        let tail_shift = to_e.mul_vec(&t[m..]);
        for b in e.body.boxes() {
            boxes.push(b.translate(&tail_shift).prepend(head_lo, &head_hi));
        }
    }

    let frame = Matrix::block_diagonal(&Matrix::identity(m), &to_e);
    let trace = IntermediateTrace {
        m,
        n,
        l1: ls.first,
        l2: ls.second,
        m1: ms.first,
        m2: ms.second,
        det_l1: p.clone(),
        det_m1: q.clone(),
        l2_prime: Lattice::new(embed_basis(m, &l2p_tail))?,
        m2_prime: Lattice::new(embed_basis(m, &m2p_tail))?,
        j1,
        k1,
        j2,
        k2,
        pairing_l,
        pairing_m,
        translates,
        e: Box::new(e),
    };
    Ok(Built {
        boxes,
        frame,
        trace,
    })
}

fn embed_basis(m: usize, tail: &Matrix) -> Matrix {
    let cols: Vec<Vec<FieldElement>> = tail.columns().iter().map(|c| embed(m, c)).collect();
    Matrix::from_columns(m + tail.rows(), &cols)
}
