//! Half-open axis-aligned boxes and finite disjoint unions of them.

use thiserror::Error;

use crate::field::FieldElement;
use crate::lattice::{Lattice, LatticeError};
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("box {0} has lo >= hi in some coordinate")]
    EmptyBox(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("boxes {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("frame transform is not invertible or does not match the frame")]
    BadTransform,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// `∏ [lo_i, hi_i)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HalfOpenBox {
    lo: Vec<FieldElement>,
    hi: Vec<FieldElement>,
}

impl HalfOpenBox {
    /// Requires `lo_i < hi_i` in every coordinate.
    pub fn new(lo: Vec<FieldElement>, hi: Vec<FieldElement>) -> Option<Self> {
        (lo.len() == hi.len() && lo.iter().zip(&hi).all(|(l, h)| l < h))
            .then_some(HalfOpenBox { lo, hi })
    }

    /// The cube `[corner, corner + side)`.
    pub fn cube(corner: Vec<FieldElement>, side: &FieldElement) -> Option<Self> {
        let hi = corner.iter().map(|c| c + side).collect();
        Self::new(corner, hi)
    }

    pub fn lo(&self) -> &[FieldElement] {
        &self.lo
    }

    pub fn hi(&self) -> &[FieldElement] {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> FieldElement {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(FieldElement::one(), |acc, (l, h)| acc * (h - l))
    }

    pub fn contains(&self, x: &[FieldElement]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| l <= v && v < h)
    }

    /// Whether the closed box `[lo, hi]` of `self` sits inside the closed box of `outer`.
    pub fn within(&self, outer: &HalfOpenBox) -> bool {
        self.lo.iter().zip(&outer.lo).all(|(a, b)| a >= b)
            && self.hi.iter().zip(&outer.hi).all(|(a, b)| a <= b)
    }

    pub fn translate(&self, v: &[FieldElement]) -> HalfOpenBox {
        HalfOpenBox {
            lo: self.lo.iter().zip(v).map(|(a, b)| a + b).collect(),
            hi: self.hi.iter().zip(v).map(|(a, b)| a + b).collect(),
        }
    }

    /// Half-open boxes meet iff they share a set of positive measure.
    pub fn overlaps(&self, other: &HalfOpenBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i] < other.hi[i] && other.lo[i] < self.hi[i])
    }

    /// Whether `self + shift` meets `other`.
    pub fn overlaps_shifted(&self, shift: &[FieldElement], other: &HalfOpenBox) -> bool {
        (0..self.dim()).all(|i| {
            let lo = &self.lo[i] + &shift[i];
            let hi = &self.hi[i] + &shift[i];
            lo < other.hi[i] && other.lo[i] < hi
        })
    }

    /// Multiplies coordinate `i` by a positive factor.
    pub fn scale_coordinate(&self, i: usize, factor: &FieldElement) -> HalfOpenBox {
        debug_assert!(factor.is_positive());
        let mut b = self.clone();
        b.lo[i] = &b.lo[i] * factor;
        b.hi[i] = &b.hi[i] * factor;
        b
    }

    /// Embeds into a larger space: `prefix_lo..prefix_hi` first, then `self`.
    pub fn prepend(&self, lo: &[FieldElement], hi: &[FieldElement]) -> HalfOpenBox {
        HalfOpenBox {
            lo: lo.iter().chain(&self.lo).cloned().collect(),
            hi: hi.iter().chain(&self.hi).cloned().collect(),
        }
    }

    pub fn to_f64(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.lo.iter().map(FieldElement::to_f64).collect(),
            self.hi.iter().map(FieldElement::to_f64).collect(),
        )
    }
}

impl std::fmt::Debug for HalfOpenBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{:?}, {:?})", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    /// Boxes live in a construction frame; `transform_to_original` maps
    /// them back.
    Canonical,
    /// Boxes live in the input coordinates.
    Original,
}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Frame::Canonical => "canonical",
            Frame::Original => "original",
        }
    }
}

/// A finite union of pairwise disjoint half-open boxes, with the linear map
/// taking box coordinates back to the input coordinates.
#[derive(Debug, Clone)]
pub struct Body {
    boxes: Vec<HalfOpenBox>,
    dim: usize,
    frame: Frame,
    to_original: Matrix,
    to_frame: Matrix,
}

impl Body {
    pub fn new(
        dim: usize,
        boxes: Vec<HalfOpenBox>,
        frame: Frame,
        transform_to_original: Matrix,
    ) -> Result<Self, GeometryError> {
        if let Some(b) = boxes.iter().find(|b| b.dim() != dim) {
            return Err(GeometryError::DimensionMismatch {
                expected: dim,
                got: b.dim(),
            });
        }
        if transform_to_original.rows() != dim || transform_to_original.cols() != dim {
            return Err(GeometryError::BadTransform);
        }
        if frame == Frame::Original && !transform_to_original.is_identity() {
            return Err(GeometryError::BadTransform);
        }
        let to_frame = transform_to_original
            .inverse()
            .ok_or(GeometryError::BadTransform)?;
        if let Some((i, j)) = first_overlap(&boxes) {
            return Err(GeometryError::Overlap(i, j));
        }
        Ok(Body {
            boxes,
            dim,
            frame,
            to_original: transform_to_original,
            to_frame,
        })
    }

    /// A body given directly in input coordinates.
    pub fn original(dim: usize, boxes: Vec<HalfOpenBox>) -> Result<Self, GeometryError> {
        Self::new(dim, boxes, Frame::Original, Matrix::identity(dim))
    }

    pub fn boxes(&self) -> &[HalfOpenBox] {
        &self.boxes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn transform_to_original(&self) -> &Matrix {
        &self.to_original
    }

    /// Inverse of [`Self::transform_to_original`].
    pub fn transform_to_frame(&self) -> &Matrix {
        &self.to_frame
    }

    /// `Σ ∏ (hi − lo)`, measured in box coordinates.
    pub fn volume(&self) -> FieldElement {
        self.boxes
            .iter()
            .fold(FieldElement::zero(), |acc, b| acc + b.volume())
    }

    /// Volume of the body mapped back to input coordinates.
    pub fn volume_original(&self) -> FieldElement {
        self.volume() * self.to_original.det().abs()
    }

    /// A lattice given in input coordinates, expressed in box coordinates.
    pub fn lattice_in_frame(&self, lat: &Lattice) -> Result<Lattice, GeometryError> {
        if lat.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                got: lat.dim(),
            });
        }
        Ok(lat.transform(&self.to_frame)?)
    }

    pub fn point_to_frame(&self, x: &[FieldElement]) -> Vec<FieldElement> {
        self.to_frame.mul_vec(x)
    }

    pub fn contains(&self, x: &[FieldElement]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    pub fn bounding_box(&self) -> Option<HalfOpenBox> {
        let first = self.boxes.first()?;
        let mut lo = first.lo.clone();
        let mut hi = first.hi.clone();
        for b in &self.boxes[1..] {
            for i in 0..self.dim {
                if b.lo[i] < lo[i] {
                    lo[i] = b.lo[i].clone();
                }
                if b.hi[i] > hi[i] {
                    hi[i] = b.hi[i].clone();
                }
            }
        }
        Some(HalfOpenBox { lo, hi })
    }

    /// The same geometry translated by `v` (box coordinates).
    pub fn translate(&self, v: &[FieldElement]) -> Body {
        Body {
            boxes: self.boxes.iter().map(|b| b.translate(v)).collect(),
            ..self.clone()
        }
    }
}

/// First overlapping pair, found by a sweep over the first coordinate with
/// an f64 prefilter and an exact final test.
fn first_overlap(boxes: &[HalfOpenBox]) -> Option<(usize, usize)> {
    if boxes.is_empty() || boxes[0].dim() == 0 {
        return (boxes.len() > 1).then_some((0, 1));
    }
    let approx: Vec<(f64, f64)> = boxes
        .iter()
        .map(|b| (b.lo[0].to_f64(), b.hi[0].to_f64()))
        .collect();
    let mut order: Vec<usize> = (0..boxes.len()).collect();
    order.sort_by(|&a, &b| approx[a].0.total_cmp(&approx[b].0));
    for (pos, &i) in order.iter().enumerate() {
        let reach = approx[i].1 + 1e-9 * (1.0 + approx[i].1.abs());
        for &j in &order[pos + 1..] {
            if approx[j].0 > reach {
                break;
            }
            if boxes[i].overlaps(&boxes[j]) {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fe(n: i64) -> FieldElement {
        FieldElement::from_int(n)
    }

    fn interval(a: i64, b: i64) -> HalfOpenBox {
        HalfOpenBox::new(vec![fe(a)], vec![fe(b)]).unwrap()
    }

    #[test]
    fn boxes_need_positive_sides() {
        assert!(HalfOpenBox::new(vec![fe(1)], vec![fe(1)]).is_none());
        assert!(HalfOpenBox::new(vec![fe(0), fe(2)], vec![fe(1), fe(1)]).is_none());
    }

    #[test]
    fn touching_intervals_are_disjoint() {
        assert!(!interval(0, 1).overlaps(&interval(1, 2)));
        assert!(interval(0, 2).overlaps(&interval(1, 3)));
        assert!(Body::original(1, vec![interval(0, 1), interval(1, 2)]).is_ok());
        assert_eq!(
            Body::original(1, vec![interval(0, 2), interval(5, 6), interval(1, 3)]).unwrap_err(),
            GeometryError::Overlap(0, 2)
        );
    }

    #[test]
    fn volumes() {
        let unit = HalfOpenBox::cube(vec![fe(0), fe(0)], &fe(1)).unwrap();
        assert_eq!(Body::original(2, vec![unit]).unwrap().volume(), fe(1));
        let third = FieldElement::from_ratio(1, 3);
        let boxes = (0..3)
            .map(|k| HalfOpenBox::cube(vec![&third * &fe(k)], &third).unwrap())
            .collect();
        assert_eq!(Body::original(1, boxes).unwrap().volume(), fe(1));
    }

    #[test]
    fn original_frame_requires_identity() {
        let t = Matrix::diagonal(&[fe(2)]);
        assert_eq!(
            Body::new(1, vec![interval(0, 1)], Frame::Original, t.clone()).unwrap_err(),
            GeometryError::BadTransform
        );
        let b = Body::new(1, vec![interval(0, 1)], Frame::Canonical, t).unwrap();
        assert_eq!(b.volume_original(), fe(2));
    }
}
