#![allow(dead_code)]

use num_bigint::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tilepack::field::{FieldElement, QuadField};
use tilepack::geometry::Body;
use tilepack::lattice::Lattice;
use tilepack::matrix::Matrix;

pub fn sqrt2() -> FieldElement {
    QuadField::new(2).unwrap().sqrt_d().unwrap()
}

pub fn fe(n: i64) -> FieldElement {
    FieldElement::from_int(n)
}

pub fn ratio(p: i64, q: i64) -> FieldElement {
    FieldElement::from_ratio(p, q)
}

/// `a + b√2`.
pub fn quad(a: FieldElement, b: FieldElement) -> FieldElement {
    &a + &(&b * &sqrt2())
}

pub fn diag(x: &[FieldElement]) -> Lattice {
    Lattice::new(Matrix::diagonal(x)).unwrap()
}

/// Lattice whose basis columns are the given vectors.
pub fn columns(cols: &[Vec<FieldElement>]) -> Lattice {
    Lattice::from_columns(cols[0].len(), cols).unwrap()
}

/// `{(x, y) ∈ Z² : x + y even}`.
pub fn checkerboard() -> Lattice {
    columns(&[vec![fe(1), fe(1)], vec![fe(1), fe(-1)]])
}

/// For each box of `f`, the points `x − λ` (box coordinates) for the
/// `λ ∈ lat` that could bring `x` into that box, padded by one coefficient
/// in every direction. Ranges come from floating point images of the box
/// corners; they do not use the crate's exact bounds.
fn candidates(f: &Body, lat: &Lattice, x: &[FieldElement]) -> Vec<(usize, Vec<FieldElement>)> {
    let d = f.dim();
    let to_frame = f.transform_to_frame();
    let y = to_frame.mul_vec(x);
    let b = to_frame.mul(lat.basis());
    let b_inv = b.inverse().unwrap().to_f64();
    let yf: Vec<f64> = y.iter().map(FieldElement::to_f64).collect();
    let mut out = Vec::new();
    for (n, bx) in f.boxes().iter().enumerate() {
        let (lo, hi) = bx.to_f64();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for corner in 0..(1usize << d) {
            let z: Vec<f64> = (0..d)
                .map(|i| yf[i] - if corner >> i & 1 == 1 { hi[i] } else { lo[i] })
                .collect();
            for i in 0..d {
                let k: f64 = (0..d).map(|j| b_inv[i][j] * z[j]).sum();
                min[i] = min[i].min(k);
                max[i] = max[i].max(k);
            }
        }
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|i| (min[i].floor() as i64 - 1, max[i].ceil() as i64 + 1))
            .collect();
        let mut k: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'walk: loop {
            let kb: Vec<BigInt> = k.iter().map(|&v| BigInt::from(v)).collect();
            let shift = b.mul_int_vec(&kb);
            out.push((n, y.iter().zip(&shift).map(|(a, s)| a - s).collect()));
            let mut i = 0;
            loop {
                if i == d {
                    break 'walk;
                }
                k[i] += 1;
                if k[i] <= ranges[i].1 {
                    break;
                }
                k[i] = ranges[i].0;
                i += 1;
            }
        }
    }
    out
}

/// Number of `λ ∈ lat` with `x − λ ∈ f`, `x` in input coordinates.
pub fn brute_multiplicity(f: &Body, lat: &Lattice, x: &[FieldElement]) -> usize {
    candidates(f, lat, x)
        .iter()
        .filter(|(n, p)| f.boxes()[*n].contains(p))
        .count()
}

/// True when `x` lies on no face of any `lat`-translate of a box of `f`.
pub fn off_boundary(f: &Body, lat: &Lattice, x: &[FieldElement]) -> bool {
    let d = f.dim();
    candidates(f, lat, x).iter().all(|(n, p)| {
        let bx = &f.boxes()[*n];
        let closed = (0..d).all(|i| bx.lo()[i] <= p[i] && p[i] <= bx.hi()[i]);
        !closed || (0..d).all(|i| bx.lo()[i] != p[i] && bx.hi()[i] != p[i])
    })
}

/// Points `lo + t·(hi − lo)` of the body's bounding box (box coordinates)
/// with `t` on a Kronecker sequence over a prime denominator, mapped to
/// input coordinates.
pub fn kronecker_points(f: &Body, count: usize, p: i64) -> Vec<Vec<FieldElement>> {
    let bb = f.bounding_box().unwrap();
    let steps = [p / 2 + 3, p / 3 + 7, p / 5 + 11];
    (0..count as i64)
        .map(|n| {
            let y: Vec<FieldElement> = (0..f.dim())
                .map(|i| {
                    let t = ratio(((n + 1) * steps[i] + i as i64) % p, p);
                    &bb.lo()[i] + &(&t * &(&bb.hi()[i] - &bb.lo()[i]))
                })
                .collect();
            f.transform_to_original().mul_vec(&y)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    /// `d = 1`, both lattices rational.
    LineRational,
    /// `d = 1`, `M` generated by an irrational element.
    LineIrrational,
    /// `d = 2`, both lattices rational.
    PlaneRational,
    /// `d = 2`, `L` rational, one column of `M` rational.
    PlaneMixed,
    /// `d = 2`, irrational entries in both lattices.
    PlaneGeneral,
}

#[derive(Debug, Clone)]
pub struct RandomScene {
    pub seed: u64,
    pub kind: SceneKind,
    pub l: Lattice,
    pub m: Lattice,
}

fn small_rational(rng: &mut ChaCha8Rng, num: i64, dens: &[i64]) -> FieldElement {
    let q = dens[rng.gen_range(0..dens.len())];
    ratio(rng.gen_range(-num..=num), q)
}

fn nonsingular(rng: &mut ChaCha8Rng, mut entry: impl FnMut(&mut ChaCha8Rng) -> FieldElement) -> Matrix {
    loop {
        let m = Matrix::from_rows(vec![
            vec![entry(rng), entry(rng)],
            vec![entry(rng), entry(rng)],
        ]);
        if !m.det().is_zero() {
            return m;
        }
    }
}

/// Replace column `j` of `basis` by `c` times itself.
fn scale_column(basis: &Matrix, j: usize, c: &FieldElement) -> Matrix {
    let mut cols = basis.columns();
    for x in cols[j].iter_mut() {
        *x = &*x * c;
    }
    Matrix::from_columns(basis.rows(), &cols)
}

/// A seeded random pair over `Q(√2)` with `covolume(M) / covolume(L)` in
/// `(1, 4]`.
pub fn random_scene(seed: u64) -> RandomScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = match seed % 5 {
        0 => SceneKind::LineRational,
        1 => SceneKind::LineIrrational,
        2 => SceneKind::PlaneRational,
        3 => SceneKind::PlaneMixed,
        _ => SceneKind::PlaneGeneral,
    };
    // target ratio k/12 with 13 <= k <= 48
    let rho = ratio(rng.gen_range(13..=48), 12);
    let (l_basis, m_basis, scaled) = match kind {
        SceneKind::LineRational => {
            let a = [ratio(1, 1), ratio(2, 1), ratio(1, 2), ratio(3, 2)][rng.gen_range(0..4)].clone();
            (Matrix::diagonal(&[a]), Matrix::diagonal(&[fe(1)]), Some(0))
        }
        SceneKind::LineIrrational => {
            // M = a·(u + b√2) with u + b√2 in (1, 4]; scaling would make it rational
            let a = [ratio(1, 1), ratio(2, 1), ratio(1, 2), ratio(3, 2)][rng.gen_range(0..4)].clone();
            let b = [ratio(1, 1), ratio(-1, 1), ratio(1, 2), ratio(-1, 3), ratio(2, 1)][rng.gen_range(0..5)].clone();
            let shape = loop {
                let x = quad(ratio(rng.gen_range(-36..=36), 6), b.clone());
                if x > fe(1) && x <= fe(4) {
                    break x;
                }
            };
            (Matrix::diagonal(&[a.clone()]), Matrix::diagonal(&[&a * &shape]), None)
        }
        SceneKind::PlaneRational => {
            let l = nonsingular(&mut rng, |r| fe(r.gen_range(-2..=2)));
            let m = nonsingular(&mut rng, |r| small_rational(r, 3, &[1, 2]));
            (l, m, Some(0))
        }
        SceneKind::PlaneMixed => {
            let l = nonsingular(&mut rng, |r| fe(r.gen_range(-2..=2)));
            let m = loop {
                let c0 = vec![small_rational(&mut rng, 3, &[1, 2]), small_rational(&mut rng, 3, &[1, 2])];
                let c1 = vec![
                    quad(small_rational(&mut rng, 2, &[1]), small_rational(&mut rng, 1, &[1, 2])),
                    quad(small_rational(&mut rng, 2, &[1]), small_rational(&mut rng, 1, &[1, 2])),
                ];
                let m = Matrix::from_columns(2, &[c0, c1]);
                if !m.det().is_zero() {
                    break m;
                }
            };
            (l, m, Some(1))
        }
        SceneKind::PlaneGeneral => {
            let entry = |r: &mut ChaCha8Rng| quad(small_rational(r, 2, &[1, 2]), small_rational(r, 1, &[1, 2]));
            let l = nonsingular(&mut rng, |r| {
                if r.gen_bool(0.7) {
                    fe(r.gen_range(-2..=2))
                } else {
                    entry(r)
                }
            });
            let m = nonsingular(&mut rng, entry);
            (l, m, Some(0))
        }
    };
    let l = Lattice::new(l_basis).unwrap();
    let m_basis = match scaled {
        Some(j) => {
            let c = &(&rho * &l.basis().det().abs()) / &m_basis.det().abs();
            scale_column(&m_basis, j, &c)
        }
        None => m_basis,
    };
    let m = Lattice::new(m_basis).unwrap();
    RandomScene { seed, kind, l, m }
}

/// A random pair of rational lattices in dimension `d`.
pub fn random_rational_pair(seed: u64, d: usize) -> (Lattice, Lattice) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let make = |rng: &mut ChaCha8Rng| loop {
        let rows: Vec<Vec<FieldElement>> = (0..d)
            .map(|_| (0..d).map(|_| small_rational(rng, 3, &[1, 2, 3])).collect())
            .collect();
        let m = Matrix::from_rows(rows);
        if !m.det().is_zero() {
            break Lattice::new(m).unwrap();
        }
    };
    (make(&mut rng), make(&mut rng))
}
