//! 2-D drawing of a construction in box coordinates: `F` filled, the
//! neighbouring `L`-translates of `F` outlined, the fundamental parallelogram of `M`
//! dashed, lattice points as dots.

use std::fmt::Write;

use num_bigint::{BigInt, Sign};
use tilepack::constructor::Construction;
use tilepack::field::FieldElement;
use tilepack::lattice::{IntegerBox, Lattice};

use crate::CliError;

/// Decimal with 12 significant digits, trailing zeros trimmed.
pub fn decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

fn fe(x: &FieldElement) -> String {
    decimal(x.to_f64())
}

fn point_f64(lat: &Lattice, k: &[i64]) -> [f64; 2] {
    let basis = lat.basis().to_f64();
    let mut p = [0.0; 2];
    for (i, row) in basis.iter().enumerate() {
        p[i] = row.iter().zip(k).map(|(a, &b)| a * b as f64).sum();
    }
    p
}

pub fn render(c: &Construction, l: &Lattice, m: &Lattice) -> Result<String, CliError> {
    let body = &c.body;
    let frame_l = body
        .lattice_in_frame(l)
        .map_err(|e| CliError::Dimension(e.to_string()))?;
    let frame_m = body
        .lattice_in_frame(m)
        .map_err(|e| CliError::Dimension(e.to_string()))?;
    let bb = body
        .bounding_box()
        .ok_or_else(|| CliError::Unsupported("empty body".into()))?;
    let (lo, hi) = bb.to_f64();

    // window: F's bounding box plus one period of M in every direction
    let mb = frame_m.basis().to_f64();
    let reach: Vec<f64> = (0..2).map(|i| mb[i].iter().map(|x| x.abs()).sum()).collect();
    let (x0, y0) = (lo[0].min(0.0) - reach[0] * 0.25, lo[1].min(0.0) - reach[1] * 0.25);
    let (x1, y1) = (
        hi[0].max(reach[0]) + reach[0] * 0.25,
        hi[1].max(reach[1]) + reach[1] * 0.25,
    );
    let (w, h) = (x1 - x0, y1 - y0);
    let stroke = w.max(h) / 500.0;

    let mut out = String::new();
    let px = 800.0;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        decimal(x0),
        decimal(-y1),
        decimal(w),
        decimal(h),
        decimal(px),
        decimal(px * h / w)
    );
    let _ = writeln!(out, r#"<g transform="matrix(1 0 0 -1 0 0)">"#);

    // F + λ for the L-vectors λ with coefficients in {−1, 0, 1}, λ ≠ 0
    let _ = writeln!(
        out,
        r##"<g fill="none" stroke="#4a6fa5" stroke-width="{}">"##,
        decimal(stroke)
    );
    let ring = IntegerBox::new(vec![(BigInt::from(-1), BigInt::from(1)); 2]);
    for k in ring.filter(|k| k.iter().any(|x| x.sign() != Sign::NoSign)) {
        let v = frame_l.point(&k);
        for b in body.boxes() {
            let t = b.translate(&v);
            rect(&mut out, t.lo(), t.hi());
        }
    }
    let _ = writeln!(out, "</g>");

    let _ = writeln!(out, r##"<g fill="#e07b39" fill-opacity="0.8" stroke="#8c3d10" stroke-width="{}">"##, decimal(stroke));
    for b in body.boxes() {
        rect(&mut out, b.lo(), b.hi());
    }
    let _ = writeln!(out, "</g>");

    let corners = [[0, 0], [1, 0], [1, 1], [0, 1]].map(|k| point_f64(&frame_m, &k));
    let pts: Vec<String> = corners
        .iter()
        .map(|p| format!("{},{}", decimal(p[0]), decimal(p[1])))
        .collect();
    let _ = writeln!(
        out,
        r##"<polygon points="{}" fill="none" stroke="#2b2b2b" stroke-width="{}" stroke-dasharray="{} {}"/>"##,
        pts.join(" "),
        decimal(stroke * 1.5),
        decimal(stroke * 6.0),
        decimal(stroke * 4.0)
    );

    for (lat, color) in [(&frame_l, "#4a6fa5"), (&frame_m, "#2b2b2b")] {
        let _ = writeln!(out, r#"<g fill="{color}">"#);
        let bounds = lat
            .coefficient_bounds(
                &[
                    FieldElement::from_rational(rational_approx(x0)),
                    FieldElement::from_rational(rational_approx(y0)),
                ],
                &[
                    FieldElement::from_rational(rational_approx(x1)),
                    FieldElement::from_rational(rational_approx(y1)),
                ],
            )
            .unwrap_or_default();
        for k in IntegerBox::new(bounds).take(10_000) {
            let p = lat.point(&k);
            let _ = writeln!(
                out,
                r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                fe(&p[0]),
                fe(&p[1]),
                decimal(stroke * 3.0)
            );
        }
        let _ = writeln!(out, "</g>");
    }

    let _ = writeln!(out, "</g>\n</svg>");
    Ok(out)
}

fn rect(out: &mut String, lo: &[FieldElement], hi: &[FieldElement]) {
    let _ = writeln!(
        out,
        r#"<rect x="{}" y="{}" width="{}" height="{}"/>"#,
        fe(&lo[0]),
        fe(&lo[1]),
        fe(&(&hi[0] - &lo[0])),
        fe(&(&hi[1] - &lo[1]))
    );
}

/// A rational within 1e-6 of `x`, for window bounds only.
fn rational_approx(x: f64) -> tilepack::field::Rational {
    let scale = 1_000_000i64;
    tilepack::field::Rational::new(((x * scale as f64).round() as i64).into(), scale.into())
}
