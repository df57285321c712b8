//! `L = Z^d` with `L + M` dense.
//!
//! The unit cube is cut into `N^d` small cells `R_j` of side `1/N`. The
//! fundamental parallelepiped `P` of `M` holds at least `N^d` disjoint grid
//! cells `Q_j` of side `s = 1/N + 1/N²`. Density of `L + M` gives `l_j ∈ L`,
//! `m_j ∈ M` with `R_j + l_j + m_j ⊆ Q_j`, and `F = ⋃ (R_j + l_j)`.
//! `F` tiles by `L` because the `l_j` are integral; it packs by `M` because
//! modulo `M` it lands inside disjoint pieces of `P`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::ConstructError;
use crate::field::{FieldElement, Rational};
use crate::geometry::{Body, Frame, HalfOpenBox};
use crate::lattice::{linf_shell, IntegerBox, Lattice};
use crate::matrix::Matrix;
use crate::par::{self, Execution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseTrace {
    pub n_grid: u64,
    /// Side of the large cells.
    pub side: Rational,
    /// `(s − 1/N) / 2`.
    pub margin: Rational,
    /// The `R_j`, lexicographic in `[0,1)^d`.
    pub small_cells: Vec<HalfOpenBox>,
    /// The `Q_j` paired with the `R_j`.
    pub large_cells: Vec<HalfOpenBox>,
    pub shifts_l: Vec<Vec<BigInt>>,
    /// `m_j` as coefficient vectors in `m_basis`.
    pub shifts_m: Vec<Vec<BigInt>>,
    /// The reduced basis of `M` whose parallelepiped holds the `Q_j`.
    pub m_basis: Matrix,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridParams {
    pub n_grid: u64,
    pub side: Rational,
    /// Every side-`s` grid cell inside the closed parallelepiped, in
    /// lexicographic order of the grid index.
    pub large_cells: Vec<HalfOpenBox>,
}

/// Smallest `N ≥ 2` whose side-`s` grid puts at least `N^d` whole cells in
/// the closed fundamental parallelepiped of `m_lat`.
pub fn choose_grid_params(m_lat: &Lattice) -> GridParams {
    let d = m_lat.dim();
    let basis = m_lat.basis();
    let inv = m_lat.basis_inverse().expect("full-rank lattice");
    let (mut box_lo, mut box_hi) = (vec![FieldElement::zero(); d], vec![FieldElement::zero(); d]);
    for i in 0..d {
        for j in 0..d {
            let x = &basis[(i, j)];
            if x.is_negative() {
                box_lo[i] = &box_lo[i] + x;
            } else {
                box_hi[i] = &box_hi[i] + x;
            }
        }
    }
    let mut n: u64 = 2;
    loop {
        let nn = BigInt::from(n);
        let side = Rational::new(BigInt::one(), nn.clone()) + Rational::new(BigInt::one(), &nn * &nn);
        let s = FieldElement::from_rational(side.clone());
        let bounds = (0..d)
            .map(|i| ((&box_lo[i] / &s).floor(), (&box_hi[i] / &s).ceil() - 1))
            .collect();
        let large_cells: Vec<HalfOpenBox> = IntegerBox::new(bounds)
            .filter_map(|k| {
                let lo: Vec<FieldElement> =
                    k.iter().map(|c| &FieldElement::from_bigint(c.clone()) * &s).collect();
                let cell = HalfOpenBox::cube(lo, &s).expect("positive side");
                cell_in_parallelepiped(inv, &cell).then_some(cell)
            })
            .collect();
        if large_cells.len() as u128 >= (n as u128).pow(d as u32) {
            return GridParams {
                n_grid: n,
                side,
                large_cells,
            };
        }
        n += 1;
    }
}

/// Closed cell inside `{basis · c : c ∈ [0,1]^d}`: every row of the inverse
/// basis ranges over `[0, 1]` on the cell (equivalent to testing the `2^d`
/// vertices, by linearity).
fn cell_in_parallelepiped(inv: &Matrix, cell: &HalfOpenBox) -> bool {
    let d = cell.dim();
    (0..d).all(|i| {
        let (mut min, mut max) = (FieldElement::zero(), FieldElement::zero());
        for j in 0..d {
            let c = &inv[(i, j)];
            let (a, b) = (c * &cell.lo()[j], c * &cell.hi()[j]);
            if c.is_negative() {
                min = &min + &b;
                max = &max + &a;
            } else {
                min = &min + &a;
                max = &max + &b;
            }
        }
        !min.is_negative() && max <= FieldElement::one()
    })
}

/// Finds `l ∈ Z^d` and `m = basis(M)·k` with `|l + m − target|_∞ < margin`,
/// scanning `k` over `ℓ∞` shells of radius `0..=search_cap`.
pub fn approximate_in_sumset(
    m_lat: &Lattice,
    target: &[FieldElement],
    margin: &FieldElement,
    search_cap: u64,
) -> Result<(Vec<BigInt>, Vec<BigInt>), ConstructError> {
    let d = m_lat.dim();
    let basis_f = m_lat.basis().to_f64();
    let target_f: Vec<f64> = target.iter().map(FieldElement::to_f64).collect();
    let margin_f = margin.to_f64();
    let mut m_f = vec![0.0f64; d];
    for radius in 0..=search_cap {
        for k in linf_shell(d, radius) {
            for (i, row) in basis_f.iter().enumerate() {
                m_f[i] = row.iter().zip(&k).map(|(a, &b)| a * b as f64).sum();
            }
            let plausible = (0..d).all(|i| {
                let e = target_f[i] - m_f[i];
                (e - e.round()).abs() < margin_f + 1e-9 * (1.0 + e.abs())
            });
            if !plausible {
                continue;
            }
            let kb: Vec<BigInt> = k.iter().map(|&x| BigInt::from(x)).collect();
            let m = m_lat.point(&kb);
            let l: Vec<BigInt> = target.iter().zip(&m).map(|(t, x)| (t - x).round()).collect();
            let close = (0..d).all(|i| {
                let err = &(&FieldElement::from_bigint(l[i].clone()) + &m[i]) - &target[i];
                &err.abs() < margin
            });
            if close {
                return Ok((l, kb));
            }
        }
    }
    Err(ConstructError::SearchExhausted { cap: search_cap })
}

/// The points `M·k` for all `k` up to some `ℓ∞` radius, kept in the scan
/// order of [`approximate_in_sumset`] and bucketed by their fractional
/// parts. A query returns the same pair as that scan would, without
/// visiting every `k` again for every target.
struct SumsetIndex<'a> {
    m_lat: &'a Lattice,
    basis_f: Vec<Vec<f64>>,
    margin: &'a FieldElement,
    margin_f: f64,
    /// Buckets per axis; each bucket is at least as wide as the margin plus
    /// the floating point slack.
    buckets_per_axis: i64,
    /// Coefficient vectors, flattened with stride `d`, in scan order.
    coeffs: Vec<i64>,
    buckets: HashMap<Vec<i64>, Vec<u32>>,
    radius: Option<u64>,
}

impl<'a> SumsetIndex<'a> {
    fn new(m_lat: &'a Lattice, margin: &'a FieldElement) -> Self {
        let margin_f = margin.to_f64();
        let width = margin_f * (1.0 + 1e-6) + 1e-9;
        SumsetIndex {
            m_lat,
            basis_f: m_lat.basis().to_f64(),
            margin,
            margin_f,
            buckets_per_axis: ((1.0 / width).floor() as i64).max(1),
            coeffs: Vec::new(),
            buckets: HashMap::new(),
            radius: None,
        }
    }

    fn bucket(&self, x: &[f64]) -> Vec<i64> {
        let nb = self.buckets_per_axis;
        x.iter()
            .map(|v| (((v - v.floor()) * nb as f64).floor() as i64).clamp(0, nb - 1))
            .collect()
    }

    fn extend_to(&mut self, radius: u64) {
        let d = self.m_lat.dim();
        let start = self.radius.map_or(0, |r| r + 1);
        for r in start..=radius {
            for k in linf_shell(d, r) {
                let m_f: Vec<f64> = self
                    .basis_f
                    .iter()
                    .map(|row| row.iter().zip(&k).map(|(a, &b)| a * b as f64).sum())
                    .collect();
                let id = (self.coeffs.len() / d.max(1)) as u32;
                self.coeffs.extend_from_slice(&k);
                let key = self.bucket(&m_f);
                self.buckets.entry(key).or_default().push(id);
            }
        }
        self.radius = Some(radius);
    }

    fn query(&self, target: &[FieldElement]) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
        let d = self.m_lat.dim();
        let nb = self.buckets_per_axis;
        let target_f: Vec<f64> = target.iter().map(FieldElement::to_f64).collect();
        let home = self.bucket(&target_f);
        let mut ids: Vec<u32> = Vec::new();
        let offsets = IntegerBox::new(vec![(BigInt::from(-1), BigInt::one()); d]);
        let mut seen = std::collections::HashSet::new();
        for off in offsets {
            let key: Vec<i64> = home
                .iter()
                .zip(&off)
                .map(|(h, o)| (h + i64::try_from(o).unwrap_or(0)).rem_euclid(nb))
                .collect();
            if seen.insert(key.clone()) {
                if let Some(v) = self.buckets.get(&key) {
                    ids.extend_from_slice(v);
                }
            }
        }
        ids.sort_unstable();
        for id in ids {
            let k = &self.coeffs[id as usize * d..(id as usize + 1) * d];
            let plausible = (0..d).all(|i| {
                let m: f64 = self.basis_f[i].iter().zip(k).map(|(a, &b)| a * b as f64).sum();
                let e = target_f[i] - m;
                (e - e.round()).abs() < self.margin_f + 1e-9 * (1.0 + e.abs())
            });
            if !plausible {
                continue;
            }
            let kb: Vec<BigInt> = k.iter().map(|&x| BigInt::from(x)).collect();
            let m = self.m_lat.point(&kb);
            let l: Vec<BigInt> = target.iter().zip(&m).map(|(t, x)| (t - x).round()).collect();
            let close = (0..d).all(|i| {
                let err = &(&FieldElement::from_bigint(l[i].clone()) + &m[i]) - &target[i];
                &err.abs() < self.margin
            });
            if close {
                return Some((l, kb));
            }
        }
        None
    }
}

/// Solves every target with the smallest search radius that works,
/// growing the index geometrically up to `search_cap`.
fn solve_targets(
    m_lat: &Lattice,
    targets: &[Vec<FieldElement>],
    margin: &FieldElement,
    search_cap: u64,
    exec: Execution,
) -> Result<Vec<(Vec<BigInt>, Vec<BigInt>)>, ConstructError> {
    let mut index = SumsetIndex::new(m_lat, margin);
    let mut found: Vec<Option<(Vec<BigInt>, Vec<BigInt>)>> = vec![None; targets.len()];
    let mut radius = search_cap.min(4);
    loop {
        index.extend_to(radius);
        let open: Vec<usize> = (0..targets.len()).filter(|&j| found[j].is_none()).collect();
        let results = par::map(exec, &open, |&j| index.query(&targets[j]));
        for (j, r) in open.into_iter().zip(results) {
            found[j] = r;
        }
        if found.iter().all(Option::is_some) {
            return Ok(found.into_iter().map(Option::unwrap).collect());
        }
        if radius >= search_cap {
            return Err(ConstructError::SearchExhausted { cap: search_cap });
        }
        radius = (radius * 2).min(search_cap);
    }
}

/// Construction for `L = Z^d`. The returned body is in the coordinates of
/// the input (where `L = Z^d`). `M` is first given a reduced basis, whose
/// parallelepiped is far less elongated than an arbitrary one.
pub fn dense_construct(
    m_lat: &Lattice,
    search_cap: u64,
    exec: Execution,
) -> Result<(Body, DenseTrace), ConstructError> {
    let d = m_lat.dim();
    let reduced = m_lat.reduced();
    let m_lat = &reduced;
    let params = choose_grid_params(m_lat);
    let n = params.n_grid;
    let nn = BigInt::from(n);
    let small_side = FieldElement::from_rational(Rational::new(BigInt::one(), nn.clone()));
    let small_cells: Vec<HalfOpenBox> = IntegerBox::new(vec![(BigInt::zero(), &nn - 1); d])
        .map(|k| {
            let lo = k
                .iter()
                .map(|c| &FieldElement::from_bigint(c.clone()) * &small_side)
                .collect();
            HalfOpenBox::cube(lo, &small_side).expect("positive side")
        })
        .collect();
    let large_cells: Vec<HalfOpenBox> = params.large_cells[..small_cells.len()].to_vec();
    let margin = (&params.side - Rational::new(BigInt::one(), nn)) / BigInt::from(2);
    let margin_fe = FieldElement::from_rational(margin.clone());

    let targets: Vec<Vec<FieldElement>> = (0..small_cells.len())
        .map(|j| {
            (0..d)
                .map(|i| &(&large_cells[j].lo()[i] - &small_cells[j].lo()[i]) + &margin_fe)
                .collect()
        })
        .collect();
    let shifts = solve_targets(m_lat, &targets, &margin_fe, search_cap, exec)?;

    let boxes = small_cells
        .iter()
        .zip(&shifts)
        .map(|(r, (l, _))| {
            let v: Vec<FieldElement> = l.iter().cloned().map(FieldElement::from_bigint).collect();
            r.translate(&v)
        })
        .collect();
    let body = Body::new(d, boxes, Frame::Canonical, Matrix::identity(d))
        .map_err(|e| ConstructError::Internal(format!("dense cells: {e}")))?;
    let (shifts_l, shifts_m) = shifts.into_iter().unzip();
    Ok((
        body,
        DenseTrace {
            n_grid: n,
            side: params.side,
            margin,
            small_cells,
            large_cells,
            shifts_l,
            shifts_m,
            m_basis: m_lat.basis().clone(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::QuadField;

    fn sqrt2() -> FieldElement {
        QuadField::new(2).unwrap().sqrt_d().unwrap()
    }

    fn line(x: FieldElement) -> Lattice {
        Lattice::new(Matrix::diagonal(&[x])).unwrap()
    }

    fn q(p: i64, r: i64) -> Rational {
        Rational::new(BigInt::from(p), BigInt::from(r))
    }

    #[test]
    fn grid_for_sqrt2() {
        // N = 2: s = 3/4, only [0, 3/4) fits since 3/2 > √2
        // N = 3: s = 4/9, 12/9 ≤ √2 < 16/9 gives 3 cells
        let p = choose_grid_params(&line(sqrt2()));
        assert_eq!(p.n_grid, 3);
        assert_eq!(p.side, q(4, 9));
        assert_eq!(p.large_cells.len(), 3);
        let twelve_ninths = FieldElement::from_ratio(12, 9);
        assert!(twelve_ninths <= sqrt2() && sqrt2() < FieldElement::from_ratio(16, 9));
    }

    #[test]
    fn grid_for_ten() {
        let p = choose_grid_params(&line(FieldElement::from_int(10)));
        assert_eq!(p.n_grid, 2);
        assert_eq!(p.side, q(3, 4));
        // floor(10 / (3/4)) = 13
        assert_eq!(p.large_cells.len(), 13);
    }

    #[test]
    fn grid_for_negative_basis() {
        let p = choose_grid_params(&line(-sqrt2()));
        assert_eq!(p.n_grid, 3);
        assert!(p.large_cells.iter().all(|c| !c.hi()[0].is_positive()));
    }

    #[test]
    fn zero_target() {
        let z = vec![FieldElement::zero()];
        let (l, k) =
            approximate_in_sumset(&line(sqrt2()), &z, &FieldElement::from_ratio(1, 100), 0).unwrap();
        assert!(l[0].is_zero() && k[0].is_zero());
    }

    #[test]
    fn half_margin_rounds_at_radius_zero() {
        let t = vec![FieldElement::from_ratio(7, 3), -sqrt2()];
        let m = Lattice::new(Matrix::diagonal(&[sqrt2(), sqrt2()])).unwrap();
        let (l, k) = approximate_in_sumset(&m, &t, &FieldElement::from_ratio(1, 2), 0).unwrap();
        assert_eq!(l, vec![BigInt::from(2), BigInt::from(-1)]);
        assert!(k.iter().all(Zero::is_zero));
    }

    #[test]
    fn approximating_one_half() {
        let margin = FieldElement::from_ratio(1, 18);
        let half = FieldElement::from_ratio(1, 2);
        // oracle: scan k ∈ [−20, 20] for |round(1/2 − k√2) + k√2 − 1/2| < 1/18
        let exists = (-20i64..=20).any(|k| {
            let m = &FieldElement::from_int(k) * &sqrt2();
            let l = FieldElement::from_bigint((&half - &m).round());
            (&(&l + &m) - &half).abs() < margin
        });
        assert!(exists);
        let (l, k) = approximate_in_sumset(&line(sqrt2()), &[half.clone()], &margin, 20).unwrap();
        let err = &(&FieldElement::from_bigint(l[0].clone()) + &(&FieldElement::from_bigint(k[0].clone()) * &sqrt2())) - &half;
        assert!(err.abs() < margin);
    }

    #[test]
    fn cap_too_small() {
        let margin = FieldElement::from_ratio(1, 1000);
        let t = vec![FieldElement::from_ratio(1, 2)];
        assert_eq!(
            approximate_in_sumset(&line(sqrt2()), &t, &margin, 1).unwrap_err(),
            ConstructError::SearchExhausted { cap: 1 }
        );
    }

    #[test]
    fn sqrt2_construction() {
        let (body, trace) = dense_construct(&line(sqrt2()), 64, Execution::Sequential).unwrap();
        assert_eq!(trace.n_grid, 3);
        assert_eq!(body.boxes().len(), 3);
        assert_eq!(body.volume(), FieldElement::one());
        assert_eq!(trace.margin, q(1, 18));
        // every image R_j + l_j + m_j sits inside its Q_j
        for j in 0..3 {
            let m = line(sqrt2()).point(&trace.shifts_m[j]);
            let l = FieldElement::from_bigint(trace.shifts_l[j][0].clone());
            let img = trace.small_cells[j].translate(&[&l + &m[0]]);
            assert!(img.within(&trace.large_cells[j]));
        }
    }

    #[test]
    fn index_matches_scan() {
        let plane = Lattice::from_columns(
            2,
            &[
                vec![&FieldElement::from_ratio(1, 2) * &sqrt2(), FieldElement::from_ratio(1, 3)],
                vec![FieldElement::from_ratio(-1, 5), &sqrt2() + &FieldElement::from_int(1)],
            ],
        )
        .unwrap();
        for (lat, margin) in [
            (line(sqrt2()), FieldElement::from_ratio(1, 50)),
            (plane, FieldElement::from_ratio(1, 20)),
        ] {
            let d = lat.dim();
            let targets: Vec<Vec<FieldElement>> = (0..12)
                .map(|t| (0..d).map(|i| FieldElement::from_ratio((7 * t + 3 * i as i64) % 11, 11)).collect())
                .collect();
            let indexed = solve_targets(&lat, &targets, &margin, 40, Execution::Sequential).unwrap();
            for (t, got) in targets.iter().zip(&indexed) {
                assert_eq!(&approximate_in_sumset(&lat, t, &margin, 40).unwrap(), got);
            }
        }
        let tight = FieldElement::from_ratio(1, 100_000);
        let far = vec![vec![FieldElement::from_ratio(1, 2)]];
        assert_eq!(
            solve_targets(&line(sqrt2()), &far, &tight, 3, Execution::Sequential).unwrap_err(),
            ConstructError::SearchExhausted { cap: 3 }
        );
    }
}
