//! Exact packing and tiling certificates for box unions.
//!
//! `B_i + λ` and `B_j` share interior points iff `λ` lies in the open box
//! `(lo_j − hi_i, hi_j − lo_i)`, so every overlap is found by enumerating
//! lattice points in one difference box per ordered pair of boxes.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::field::FieldElement;
use crate::geometry::{Body, GeometryError, HalfOpenBox};
use crate::lattice::{IntegerBox, Lattice, LatticeError};
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("frame mismatch: body has dimension {body}, lattice has dimension {lattice}")]
    FrameMismatch { body: usize, lattice: usize },
    #[error("lattice must be full rank")]
    NotFullRank,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl From<GeometryError> for VerifyError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::DimensionMismatch { expected, got } => VerifyError::FrameMismatch {
                body: expected,
                lattice: got,
            },
            GeometryError::Lattice(l) => VerifyError::Lattice(l),
            _ => VerifyError::NotFullRank,
        }
    }
}

/// Box `first` translated by the lattice vector with these coefficients
/// (frame basis) meets box `second` in a set of positive measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub first: usize,
    pub second: usize,
    pub coefficients: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingReport {
    pub is_packing: bool,
    pub is_tiling: bool,
    /// Volume of the body in input coordinates.
    pub body_volume: FieldElement,
    pub lattice_covolume: FieldElement,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub execution: Execution,
    /// Each difference box is enlarged about its center by this factor
    /// before enumeration. Values above 1 only add candidates that the exact
    /// test rejects; used to check that enumeration is complete.
    pub bound_scale: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            execution: Execution::default(),
            bound_scale: 1,
        }
    }
}

/// `lat` is given in input coordinates.
pub fn verify_packing(f: &Body, lat: &Lattice) -> Result<PackingReport, VerifyError> {
    verify_packing_with(f, lat, VerifyOptions::default())
}

pub fn verify_tiling(f: &Body, lat: &Lattice) -> Result<PackingReport, VerifyError> {
    verify_packing_with(f, lat, VerifyOptions::default())
}

pub fn verify_packing_with(
    f: &Body,
    lat: &Lattice,
    opts: VerifyOptions,
) -> Result<PackingReport, VerifyError> {
    if !lat.is_full_rank() {
        return Err(VerifyError::NotFullRank);
    }
    let frame_lat = f.lattice_in_frame(lat)?;
    let violations = find_overlaps(f.boxes(), &frame_lat, opts);
    let body_volume = body_volume(f);
    let lattice_covolume = lat.full_covolume().clone();
    let is_packing = violations.is_empty();
    Ok(PackingReport {
        is_packing,
        is_tiling: is_packing && body_volume == lattice_covolume,
        body_volume,
        lattice_covolume,
        violations,
    })
}

/// Volume of `f` in input coordinates.
pub fn body_volume(f: &Body) -> FieldElement {
    f.volume_original()
}

/// For each point (input coordinates) the number of `λ ∈ lat` with
/// `x − λ ∈ f`.
pub fn sample_multiplicity(
    f: &Body,
    lat: &Lattice,
    points: &[Vec<FieldElement>],
) -> Result<Vec<usize>, VerifyError> {
    sample_multiplicity_with(f, lat, points, Execution::default())
}

pub fn sample_multiplicity_with(
    f: &Body,
    lat: &Lattice,
    points: &[Vec<FieldElement>],
    exec: Execution,
) -> Result<Vec<usize>, VerifyError> {
    if !lat.is_full_rank() {
        return Err(VerifyError::NotFullRank);
    }
    let frame_lat = f.lattice_in_frame(lat)?;
    if let Some(p) = points.iter().find(|p| p.len() != f.dim()) {
        return Err(VerifyError::FrameMismatch {
            body: f.dim(),
            lattice: p.len(),
        });
    }
    Ok(par::map(exec, points, |x| {
        let y = f.point_to_frame(x);
        f.boxes()
            .iter()
            .map(|b| {
                let lo: Vec<FieldElement> = y.iter().zip(b.hi()).map(|(a, h)| a - h).collect();
                let hi: Vec<FieldElement> = y.iter().zip(b.lo()).map(|(a, l)| a - l).collect();
                frame_lat
                    .points_in_closed_box(&lo, &hi)
                    .into_iter()
                    .filter(|k| {
                        let p = frame_lat.point(k);
                        let shifted: Vec<FieldElement> =
                            y.iter().zip(&p).map(|(a, b)| a - b).collect();
                        b.contains(&shifted)
                    })
                    .count()
            })
            .sum()
    }))
}

struct ApproxBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Relative slack for every floating point decision. Anything within it is
/// settled exactly.
const SLACK: f64 = 1e-9;

fn find_overlaps(boxes: &[HalfOpenBox], lat: &Lattice, opts: VerifyOptions) -> Vec<Violation> {
    let inv = lat
        .basis_inverse()
        .expect("full-rank lattice has an inverse")
        .to_f64();
    let basis = lat.basis().to_f64();
    let approx: Vec<ApproxBox> = boxes
        .iter()
        .map(|b| {
            let (lo, hi) = b.to_f64();
            ApproxBox { lo, hi }
        })
        .collect();
    let scale = f64::from(opts.bound_scale.max(1));
    par::flat_map_range(opts.execution, boxes.len(), |i| {
        let mut out = Vec::new();
        for j in 0..boxes.len() {
            let Some(range) = coefficient_range(&inv, &approx[i], &approx[j], scale) else {
                continue;
            };
            for k in IntegerBox::new(range) {
                if i == j && k.iter().all(|c| c.sign() == num_bigint::Sign::NoSign) {
                    continue;
                }
                if clearly_apart(&basis, &k, &approx[i], &approx[j]) {
                    continue;
                }
                if boxes[i].overlaps_shifted(&lat.point(&k), &boxes[j]) {
                    out.push(Violation {
                        first: i,
                        second: j,
                        coefficients: k,
                    });
                }
            }
        }
        out
    })
}

/// Integer coefficient ranges, padded by the slack, that contain every
/// lattice vector in the open difference box `b − a` enlarged about its
/// center by `scale`. `None` when some range is empty.
fn coefficient_range(
    inv: &[Vec<f64>],
    a: &ApproxBox,
    b: &ApproxBox,
    scale: f64,
) -> Option<Vec<(BigInt, BigInt)>> {
    let d = a.lo.len();
    let mut out = Vec::with_capacity(d);
    for row in inv {
        let (mut min, mut max, mut mag) = (0.0f64, 0.0f64, 0.0f64);
        for j in 0..d {
            let (lo, hi) = (b.lo[j] - a.hi[j], b.hi[j] - a.lo[j]);
            let (center, radius) = ((lo + hi) / 2.0, (hi - lo) / 2.0 * scale);
            let (lo, hi) = (center - radius, center + radius);
            let c = row[j];
            if c > 0.0 {
                min += c * lo;
                max += c * hi;
            } else {
                min += c * hi;
                max += c * lo;
            }
            mag += c.abs() * (lo.abs() + hi.abs());
        }
        let slack = SLACK * (1.0 + mag);
        let (lo, hi) = ((min - slack).ceil(), (max + slack).floor());
        if lo > hi {
            return None;
        }
        out.push((BigInt::from(lo as i64), BigInt::from(hi as i64)));
    }
    Some(out)
}

/// True when `a + basis·k` and `b` are separated by more than the slack in
/// some coordinate, so they cannot meet.
fn clearly_apart(basis: &[Vec<f64>], k: &[BigInt], a: &ApproxBox, b: &ApproxBox) -> bool {
    let kf: Vec<f64> = k.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    (0..a.lo.len()).any(|i| {
        let (mut v, mut mag) = (0.0f64, 0.0f64);
        for (c, x) in basis[i].iter().zip(&kf) {
            v += c * x;
            mag += (c * x).abs();
        }
        let slack = SLACK * (1.0 + mag + a.hi[i].abs() + b.hi[i].abs() + a.lo[i].abs() + b.lo[i].abs());
        a.hi[i] + v < b.lo[i] - slack || b.hi[i] < a.lo[i] + v - slack
    })
}
