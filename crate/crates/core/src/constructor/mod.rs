//! Bounded sets that tile by `L` and pack by `M`.
//!
//! Each case works in coordinates where its boxes are axis-aligned: `L = Z^d`
//! for the dense case, `L + M = Z^d` for the commensurable case, and the
//! canonical coordinates refined by the frame of `E` for the intermediate
//! case. The last box coordinate is then rescaled so that the frame has
//! determinant `±1` and box volumes are true volumes.

mod commensurable;
mod dense;
mod intermediate;

pub use commensurable::{commensurable_construct, CommensurableTrace};
pub use dense::{approximate_in_sumset, choose_grid_params, dense_construct, DenseTrace, GridParams};
pub use intermediate::IntermediateTrace;

use thiserror::Error;

use crate::field::FieldElement;
use crate::geometry::{Body, Frame, HalfOpenBox};
use crate::lattice::{Lattice, LatticeError};
use crate::matrix::Matrix;
use crate::par::Execution;
use crate::structure::{
    check_pair, closure_decomposition, normalize_to_unit_lattice, CaseTag, ClosureDecomposition,
};
use crate::verifier::{verify_packing_with, VerifyOptions};

pub const DEFAULT_SEARCH_CAP: u64 = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("covolume order violated for the {case} case: covolume(L) = {l}, covolume(M) = {m}")]
    VolumeOrder {
        case: &'static str,
        l: FieldElement,
        m: FieldElement,
    },
    #[error("no approximation found within search radius {cap}")]
    SearchExhausted { cap: u64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("internal error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy)]
pub struct ConstructOptions {
    pub search_cap: u64,
    pub execution: Execution,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        ConstructOptions {
            search_cap: DEFAULT_SEARCH_CAP,
            execution: Execution::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Trace {
    Dense(DenseTrace),
    Commensurable(CommensurableTrace),
    Intermediate(IntermediateTrace),
}

impl Trace {
    pub fn case_tag(&self) -> CaseTag {
        match self {
            Trace::Dense(_) => CaseTag::Dense,
            Trace::Commensurable(_) => CaseTag::Commensurable,
            Trace::Intermediate(_) => CaseTag::Intermediate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Volumes {
    pub body: FieldElement,
    pub covolume_l: FieldElement,
    pub covolume_m: FieldElement,
}

#[derive(Debug, Clone)]
pub struct Construction {
    /// `F`, certified to tile by `L` and pack by `M`.
    pub body: Body,
    pub decomposition: ClosureDecomposition,
    /// Linear map from input coordinates to the coordinates the trace is
    /// written in (`L = Z^d` for the dense case, canonical otherwise).
    pub working_frame: Matrix,
    pub trace: Trace,
    pub volumes: Volumes,
}

pub fn construct(l: &Lattice, m_lat: &Lattice, search_cap: u64) -> Result<Construction, ConstructError> {
    construct_with(
        l,
        m_lat,
        &ConstructOptions {
            search_cap,
            ..ConstructOptions::default()
        },
    )
}

pub fn construct_with(
    l: &Lattice,
    m_lat: &Lattice,
    opts: &ConstructOptions,
) -> Result<Construction, ConstructError> {
    check_pair(l, m_lat)?;
    let d = l.dim();
    let decomposition = closure_decomposition(l, m_lat)?;
    let case = decomposition.case_tag;
    let (cl, cm) = (l.full_covolume().clone(), m_lat.full_covolume().clone());
    let order_ok = match case {
        CaseTag::Commensurable => cl <= cm,
        _ => cl < cm,
    };
    if !order_ok {
        return Err(ConstructError::VolumeOrder {
            case: case.name(),
            l: cl,
            m: cm,
        });
    }

    let (working_frame, to_box, boxes, trace) = match case {
        CaseTag::Dense => {
            let (s, _, m_unit) = normalize_to_unit_lattice(l, m_lat)?;
            let (body, trace) = dense_construct(&m_unit, opts.search_cap, opts.execution)?;
            (s, Matrix::identity(d), body.boxes().to_vec(), Trace::Dense(trace))
        }
        CaseTag::Commensurable => {
            let t = decomposition.t.clone();
            let (body, trace) = commensurable_construct(&l.transform(&t)?, &m_lat.transform(&t)?)?;
            (t, Matrix::identity(d), body.boxes().to_vec(), Trace::Commensurable(trace))
        }
        CaseTag::Intermediate => {
            let t = decomposition.t.clone();
            let built = intermediate::build(
                &l.transform(&t)?,
                &m_lat.transform(&t)?,
                decomposition.m,
                opts,
            )?;
            (t, built.frame, built.boxes, Trace::Intermediate(built.trace))
        }
    };

    let unit = to_box.mul(&working_frame);
    let c = unit
        .det()
        .abs()
        .checked_inv()
        .map_err(|_| ConstructError::Internal("singular frame".into()))?;
    let mut diag = vec![FieldElement::one(); d];
    diag[d - 1] = c.clone();
    let frame = Matrix::diagonal(&diag).mul(&unit);
    let boxes: Vec<HalfOpenBox> = boxes.iter().map(|b| b.scale_coordinate(d - 1, &c)).collect();
    let to_original = frame
        .inverse()
        .ok_or_else(|| ConstructError::Internal("singular frame".into()))?;
    let body = Body::new(d, boxes, Frame::Canonical, to_original)
        .map_err(|e| ConstructError::Internal(format!("assembled body: {e}")))?;

    certify(&body, l, m_lat, opts.execution)?;
    let volumes = Volumes {
        body: body.volume_original(),
        covolume_l: cl,
        covolume_m: cm,
    };
    Ok(Construction {
        body,
        decomposition,
        working_frame,
        trace,
        volumes,
    })
}

fn certify(body: &Body, l: &Lattice, m_lat: &Lattice, exec: Execution) -> Result<(), ConstructError> {
    let opts = VerifyOptions {
        execution: exec,
        ..VerifyOptions::default()
    };
    let tiling = verify_packing_with(body, l, opts)
        .map_err(|e| ConstructError::Certification(e.to_string()))?;
    if !tiling.is_tiling {
        return Err(ConstructError::Certification(format!(
            "not a tiling by L ({} overlaps, volume {} vs covolume {})",
            tiling.violations.len(),
            tiling.body_volume,
            tiling.lattice_covolume
        )));
    }
    let packing = verify_packing_with(body, m_lat, opts)
        .map_err(|e| ConstructError::Certification(e.to_string()))?;
    if !packing.is_packing {
        return Err(ConstructError::Certification(format!(
            "not a packing by M ({} overlaps)",
            packing.violations.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::QuadField;

    fn sqrt2() -> FieldElement {
        QuadField::new(2).unwrap().sqrt_d().unwrap()
    }

    fn fe(n: i64) -> FieldElement {
        FieldElement::from_int(n)
    }

    fn diag(x: &[FieldElement]) -> Lattice {
        Lattice::new(Matrix::diagonal(x)).unwrap()
    }

    #[test]
    fn integers_and_sqrt2() {
        let c = construct(&Lattice::integer(1), &diag(&[sqrt2()]), 64).unwrap();
        assert_eq!(c.trace.case_tag(), CaseTag::Dense);
        assert_eq!(c.body.boxes().len(), 3);
        assert_eq!(c.volumes.body, fe(1));
    }

    #[test]
    fn integers_and_evens() {
        let c = construct(&Lattice::integer(1), &diag(&[fe(2)]), 64).unwrap();
        assert_eq!(c.body.boxes().len(), 1);
        assert_eq!(c.body.boxes()[0].lo(), &[fe(0)]);
        assert_eq!(c.body.boxes()[0].hi(), &[fe(1)]);
    }

    #[test]
    fn intermediate_plane() {
        let c = construct(&Lattice::integer(2), &diag(&[fe(2), sqrt2()]), 64).unwrap();
        let Trace::Intermediate(t) = &c.trace else {
            panic!("expected the intermediate case");
        };
        assert_eq!((t.j1.len(), t.k1.len()), (2, 1));
        assert_eq!(t.l2_prime.covolume(), Some(&FieldElement::from_ratio(1, 2)));
        assert_eq!(t.m2_prime.covolume(), Some(&sqrt2()));
        assert_eq!(c.volumes.body, fe(1));
    }

    #[test]
    fn scaled_dense() {
        // L = 3Z, M = 3√2 Z
        let three = fe(3);
        let c = construct(&diag(&[three.clone()]), &diag(&[&three * &sqrt2()]), 64).unwrap();
        assert_eq!(c.volumes.body, three);
    }

    #[test]
    fn volume_order() {
        let err = construct(&diag(&[sqrt2()]), &Lattice::integer(1), 64).unwrap_err();
        assert!(matches!(err, ConstructError::VolumeOrder { case: "Dense", .. }));
        // equal volumes are fine when commensurable
        let c = construct(&Lattice::integer(2), &Lattice::integer(2), 64).unwrap();
        assert_eq!(c.volumes.body, fe(1));
    }
}
