//! Sufficient parameter regions in the `(c, b)` plane and their
//! rasterization.
//!
//! Every region depends on `b` only through `|b|`, and every inequality is
//! strict: boundary points evaluate to `false`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{in_main_cardioid, Point2};
use crate::error::{Error, Result};
use crate::fmt_f64;

/// Largest supported grid side.
pub const MAX_RESOLUTION: usize = 4096;

/// Names accepted by [`predicate_by_name`].
pub const PREDICATES: [&str; 4] = ["mummert", "ishii", "horseshoe", "cardioid"];

pub type Predicate = fn(Complex64, Complex64) -> bool;

/// `1 + 2√((1−|b|)² − 4|c|) − 4|c| − 6|b| − 3|b|² − 2|b|√((1+|b|)² + 4|c|) > 0`
/// with `c` in the main cardioid and `b ≠ 0`. A negative inner radicand
/// gives `false`.
pub fn solenoid_mummert(c: Complex64, b: Complex64) -> bool {
    let (ac, ab) = (c.norm(), b.norm());
    if ab == 0.0 || !in_main_cardioid(c) {
        return false;
    }
    let inner = (1.0 - ab).powi(2) - 4.0 * ac;
    if inner < 0.0 {
        return false;
    }
    let lhs = 1.0 + 2.0 * inner.sqrt() - 4.0 * ac - 6.0 * ab - 3.0 * ab * ab
        - 2.0 * ab * ((1.0 + ab).powi(2) + 4.0 * ac).sqrt();
    lhs > 0.0
}

/// `(1 − |1 − √(1−4c)|)² − 2|b| − 2|b|² − 2|b|√((1+|b|)² + 4|c|) > 0`
/// with `c` in the main cardioid and `b ≠ 0`.
pub fn solenoid_ishii(c: Complex64, b: Complex64) -> bool {
    let (ac, ab) = (c.norm(), b.norm());
    if ab == 0.0 || !in_main_cardioid(c) {
        return false;
    }
    let gap = 1.0 - (1.0 - (1.0 - 4.0 * c).sqrt()).norm();
    let lhs = gap * gap - 2.0 * ab - 2.0 * ab * ab - 2.0 * ab * ((1.0 + ab).powi(2) + 4.0 * ac).sqrt();
    lhs > 0.0
}

/// `|c| > 2(1+|b|)²` and `b ≠ 0`.
pub fn horseshoe_region(c: Complex64, b: Complex64) -> bool {
    let ab = b.norm();
    ab != 0.0 && c.norm() > 2.0 * (1.0 + ab).powi(2)
}

fn cardioid_predicate(c: Complex64, _b: Complex64) -> bool {
    in_main_cardioid(c)
}

/// `R = (1 + |b| + √((1+|b|)² + 4|c|)) / 2`, a bound on `max(|x|, |y|)`
/// over the Julia set of `H_b`.
pub fn radius_bound(c: Complex64, b: Complex64) -> f64 {
    let s = 1.0 + b.norm();
    (s + (s * s + 4.0 * c.norm()).sqrt()) / 2.0
}

/// `inf min(|x|, |y|) > (1+|b|)/2` over the given points.
pub fn continuation_condition(points: &[Point2], b: Complex64) -> Result<bool> {
    if points.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let inf = points.iter().map(|z| z.x.norm().min(z.y.norm())).fold(f64::INFINITY, f64::min);
    Ok(inf > (1.0 + b.norm()) / 2.0)
}

pub fn predicate_by_name(name: &str) -> Result<Predicate> {
    match name {
        "mummert" => Ok(solenoid_mummert),
        "ishii" => Ok(solenoid_ishii),
        "horseshoe" => Ok(horseshoe_region),
        "cardioid" => Ok(cardioid_predicate),
        _ => Err(Error::UnknownPredicate { name: name.to_string(), registered: PREDICATES.join(", ") }),
    }
}

/// Axis-aligned rectangle in a complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let ok = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite()) && re_min < re_max && im_min < im_max;
        if !ok {
            return Err(Error::InvalidArgument(format!("bad window [{re_min}, {re_max}] x [{im_min}, {im_max}]")));
        }
        Ok(Self { re_min, re_max, im_min, im_max })
    }

    /// Parses `re_min,re_max,im_min,im_max`.
    pub fn parse(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("window '{s}': {e}"))))
            .collect::<Result<_>>()?;
        match v[..] {
            [a, b, c, d] => Self::new(a, b, c, d),
            _ => Err(Error::Parse(format!("window '{s}' needs four numbers re_min,re_max,im_min,im_max"))),
        }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new((self.re_min + self.re_max) / 2.0, (self.im_min + self.im_max) / 2.0)
    }
}

/// Which parameter varies over the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plane {
    /// `c` varies, `b` fixed.
    C { b: Complex64 },
    /// `b` varies, `c` fixed.
    B { c: Complex64 },
}

/// A rasterized region. Cells are stored row-major with row 0 at the top
/// (largest imaginary part) and are evaluated at their centers.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub predicate: String,
    pub plane: Plane,
    pub window: Rect,
    pub width: usize,
    pub height: usize,
    pub cells: Vec<bool>,
}

impl RegionGrid {
    /// Parameter value at the center of cell `(row, col)`.
    pub fn cell_center(window: &Rect, width: usize, height: usize, row: usize, col: usize) -> Complex64 {
        let dx = (window.re_max - window.re_min) / width as f64;
        let dy = (window.im_max - window.im_min) / height as f64;
        Complex64::new(window.re_min + (col as f64 + 0.5) * dx, window.im_max - (row as f64 + 0.5) * dy)
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.width + col]
    }

    /// `(c, b)` at cell `(row, col)`.
    pub fn params_at(&self, row: usize, col: usize) -> (Complex64, Complex64) {
        let z = Self::cell_center(&self.window, self.width, self.height, row, col);
        match self.plane {
            Plane::C { b } => (z, b),
            Plane::B { c } => (c, z),
        }
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&v| v).count()
    }

    /// One line per cell, `re_c,im_c,re_b,im_b,predicate,value` with value
    /// `1` or `0`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re_c,im_c,re_b,im_b,predicate,value")?;
        for row in 0..self.height {
            for col in 0..self.width {
                let (c, b) = self.params_at(row, col);
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_f64(c.re),
                    fmt_f64(c.im),
                    fmt_f64(b.re),
                    fmt_f64(b.im),
                    self.predicate,
                    u8::from(self.get(row, col))
                )?;
            }
        }
        Ok(())
    }

    /// Binary 8-bit PGM, white where the predicate holds.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        let bytes: Vec<u8> = self.cells.iter().map(|&v| if v { 255 } else { 0 }).collect();
        out.write_all(&bytes)?;
        Ok(())
    }
}

/// Evaluates a registered predicate at every cell center, rows in parallel.
pub fn rasterize(predicate: &str, window: Rect, width: usize, height: usize, plane: Plane) -> Result<RegionGrid> {
    let f = predicate_by_name(predicate)?;
    if width == 0 || height == 0 || width > MAX_RESOLUTION || height > MAX_RESOLUTION {
        return Err(Error::InvalidArgument(format!(
            "resolution {width}x{height} outside 1..={MAX_RESOLUTION}"
        )));
    }
    let cells: Vec<bool> = (0..height)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..width).map(move |col| {
                let z = RegionGrid::cell_center(&window, width, height, row, col);
                match plane {
                    Plane::C { b } => f(z, b),
                    Plane::B { c } => f(c, z),
                }
            })
        })
        .collect();
    Ok(RegionGrid { predicate: predicate.to_string(), plane, window, width, height, cells })
}

/// Bisection on `|b| ∈ [0, hi]` (along the positive real axis) for the
/// boundary of `predicate(c, ·)`, assuming it holds near 0 and fails at `hi`.
pub fn threshold_in_b(predicate: Predicate, c: Complex64, hi: f64, iterations: usize) -> f64 {
    let (mut lo, mut hi) = (0.0f64, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && predicate(c, Complex64::new(mid, 0.0)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
