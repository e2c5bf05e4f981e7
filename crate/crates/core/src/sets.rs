//! Point clouds standing in for the invariant sets `𝒜 = g(Λ)` and `𝒜_b`,
//! and the set-level checks built on them.
//!
//! `𝒜` and `𝒜_b` are represented by periodic skeletons: every point of every
//! repelling cycle up to a period cap, lifted by `g` and (for `𝒜_b`)
//! continued to `H_b`.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{embed_g, henon_step, repelling_cycles_up_to, sample_julia_quad, Params, Point2, QuadCycle};
use crate::error::{Error, Result};
use crate::fmt_f64;
use crate::shadowing::{continue_orbit, continue_path, straight_path, ContinuationConfig, DEFAULT_STEP};
use crate::window::{Geometry, OrbitWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    LiftedA,
    ContinuedAb,
    JuliaSample,
    /// Read back from a file.
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point2>,
    pub label: String,
    pub params: Params,
    pub provenance: Provenance,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One line per point, `re_x,im_x,re_y,im_y,label`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re_x,im_x,re_y,im_y,label")?;
        for z in &self.points {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(z.x.re),
                fmt_f64(z.x.im),
                fmt_f64(z.y.re),
                fmt_f64(z.y.im),
                self.label
            )?;
        }
        Ok(())
    }

    /// Reads the format of [`PointCloud::write_csv`]. The label of the first
    /// row is kept; parameters are unknown and set to zero.
    pub fn read_csv<R: BufRead>(input: R) -> Result<PointCloud> {
        let mut points = Vec::new();
        let mut label = String::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            if n == 0 || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(5, ',').collect();
            if fields.len() < 4 {
                return Err(Error::Parse(format!("line {}: expected re_x,im_x,re_y,im_y,label", n + 1)));
            }
            let mut v = [0.0; 4];
            for (slot, text) in v.iter_mut().zip(&fields) {
                *slot = text.trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
            }
            if label.is_empty() {
                label = fields.get(4).unwrap_or(&"").to_string();
            }
            points.push(Point2::from_array(v));
        }
        Ok(PointCloud { points, label, params: Params::real(0.0, 0.0), provenance: Provenance::External })
    }
}

/// `{(q(x), x) : x ∈ samples}`.
pub fn build_a(c: Complex64, samples: &[Complex64], label: &str) -> PointCloud {
    PointCloud {
        points: samples.iter().map(|&x| embed_g(x, c)).collect(),
        label: label.to_string(),
        params: Params::new(c, Complex64::new(0.0, 0.0)),
        provenance: Provenance::LiftedA,
    }
}

/// `g` applied to `n` inverse-iteration samples of `J(q)`.
pub fn julia_cloud(c: Complex64, n: usize, seed: u64) -> PointCloud {
    PointCloud { provenance: Provenance::JuliaSample, ..build_a(c, &sample_julia_quad(c, n, seed), "julia") }
}

/// All points of the repelling cycles of exact period `≤ max_period`.
pub fn skeleton(c: Complex64, max_period: usize) -> Result<Vec<QuadCycle>> {
    repelling_cycles_up_to(c, max_period)
}

pub fn skeleton_points(cycles: &[QuadCycle]) -> Vec<Complex64> {
    cycles.iter().flat_map(|cyc| cyc.points.iter().copied()).collect()
}

/// `w†` for a cycle: `w†_i = g(x_i)`.
pub fn cycle_lift(cycle: &QuadCycle, c: Complex64) -> OrbitWindow {
    OrbitWindow::periodic(cycle.points.iter().map(|&x| embed_g(x, c)).collect()).expect("cycles are nonempty")
}

/// A continued skeleton: the cloud of every entry of every continued cycle
/// (the entries of `θ(b; w†)` are `π₀ θ(b; σ^k w†)`), plus the cycles that
/// failed and why.
#[derive(Debug, Clone)]
pub struct ContinuedFamily {
    pub cloud: PointCloud,
    pub orbits: Vec<OrbitWindow>,
    pub failures: Vec<(usize, String)>,
}

pub fn build_ab(c: Complex64, b: Complex64, cycles: &[QuadCycle], config: &ContinuationConfig) -> ContinuedFamily {
    let params = Params::new(c, b);
    let results: Vec<Result<OrbitWindow>> = cycles
        .par_iter()
        .map(|cyc| continue_orbit(&cycle_lift(cyc, c), &params, config).map(|r| r.orbit))
        .collect();
    let mut orbits = Vec::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(w) => orbits.push(w),
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    let points = orbits.iter().flat_map(|w| w.entries().iter().copied()).collect();
    ContinuedFamily {
        cloud: PointCloud { points, label: format!("A_b(c={c},b={b})"), params, provenance: Provenance::ContinuedAb },
        orbits,
        failures,
    }
}

fn directed(from: &[Point2], to: &[Point2]) -> f64 {
    from.par_iter()
        .map(|p| to.iter().map(|q| (*p - *q).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Hausdorff distance in the max-modulus metric, computed exactly over the
/// two finite clouds.
pub fn hausdorff_distance(p: &[Point2], q: &[Point2]) -> Result<f64> {
    if p.is_empty() || q.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(directed(p, q).max(directed(q, p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotionTrace {
    pub base_point: Point2,
    pub b_samples: Vec<Complex64>,
    pub positions: Vec<Point2>,
    /// For interior samples: `|mean over 8 points on a small circle around
    /// b_k − value at b_k|`. A holomorphic motion has zero defect up to
    /// solver tolerance.
    pub holomorphicity_defect: Vec<Option<f64>>,
}

impl MotionTrace {
    /// One line per sample, `re_b,im_b,re_x,im_x,re_y,im_y`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re_b,im_b,re_x,im_x,re_y,im_y")?;
        for (b, z) in self.b_samples.iter().zip(&self.positions) {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(b.re),
                fmt_f64(b.im),
                fmt_f64(z.x.re),
                fmt_f64(z.x.im),
                fmt_f64(z.y.re),
                fmt_f64(z.y.im)
            )?;
        }
        Ok(())
    }
}

/// Radius of the probe circle used for the holomorphicity defect.
pub const PROBE_RADIUS: f64 = 1e-3;

/// Subdivides the segment `from → to` into steps no longer than the default
/// continuation step.
fn segment(from: Complex64, to: Complex64) -> Vec<Complex64> {
    let steps = (((to - from).norm() / DEFAULT_STEP).ceil() as usize).max(1);
    straight_path(to - from, steps).into_iter().map(|d| from + d).collect()
}

/// `π₀ θ(b_k; w†)` along a path of `b` values starting at 0.
pub fn motion_trace(w_dag: &OrbitWindow, c: Complex64, b_path: &[Complex64], config: &ContinuationConfig) -> Result<MotionTrace> {
    let zero = Complex64::new(0.0, 0.0);
    if b_path.first() != Some(&zero) {
        return Err(Error::InvalidArgument("motion paths start at b = 0".into()));
    }
    let origin = w_dag.geometry().origin();
    let mut orbit = w_dag.clone();
    let mut positions = vec![w_dag.entries()[origin]];
    let mut orbits = vec![orbit.clone()];
    for pair in b_path.windows(2) {
        orbit = continue_path(&orbit, c, pair[0], &segment(pair[0], pair[1]), config)?.orbit;
        positions.push(orbit.entries()[origin]);
        orbits.push(orbit.clone());
    }
    let last = b_path.len() - 1;
    let holomorphicity_defect = (0..b_path.len())
        .into_par_iter()
        .map(|k| {
            if k == 0 || k == last {
                return Ok(None);
            }
            let mut mean = Point2::ZERO;
            for j in 0..8 {
                let probe = b_path[k] + Complex64::from_polar(PROBE_RADIUS, std::f64::consts::TAU * j as f64 / 8.0);
                let r = continue_path(&orbits[k], c, b_path[k], &[probe], config)?;
                mean = mean + r.orbit.entries()[origin] * (1.0 / 8.0);
            }
            Ok(Some((mean - positions[k]).norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MotionTrace { base_point: positions[0], b_samples: b_path.to_vec(), positions, holomorphicity_defect })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Sup distance between two orbit windows viewed as sequences: periodic
/// windows are compared over the least common multiple of their periods;
/// pinned windows must have the same geometry.
pub fn sequence_distance(a: &OrbitWindow, b: &OrbitWindow) -> Result<f64> {
    match (a.geometry(), b.geometry()) {
        (Geometry::Periodic { p }, Geometry::Periodic { p: q }) => {
            let l = p / gcd(p, q) * q;
            Ok((0..l)
                .map(|i| (a.entries()[i % p] - b.entries()[i % q]).norm())
                .fold(0.0, f64::max))
        }
        _ => crate::window::sup_distance(a, b),
    }
}

/// Minimum pairwise [`sequence_distance`], the empirical discreteness
/// constant `τ`.
pub fn separation(windows: &[OrbitWindow]) -> Result<f64> {
    if windows.len() < 2 {
        return Err(Error::TooFewElements);
    }
    let pairs: Vec<(usize, usize)> =
        (0..windows.len()).flat_map(|i| (i + 1..windows.len()).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| sequence_distance(&windows[i], &windows[j]))
        .try_reduce(|| f64::INFINITY, |x, y| Ok(x.min(y)))
}

/// Minimum pairwise distance between points.
pub fn point_separation(points: &[Point2]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewElements);
    }
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| points[i + 1..].iter().map(|q| (points[i] - *q).norm()).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min))
}

/// `‖π₀ θ(b; σw†) − H_b(π₀ θ(b; w†))‖`, with the two continuations run
/// independently.
pub fn diagram_check(w_dag: &OrbitWindow, params: &Params, config: &ContinuationConfig) -> Result<f64> {
    if !w_dag.geometry().is_periodic() {
        return Err(Error::GeometryMismatch("diagram check needs a periodic window".into()));
    }
    let base = continue_orbit(w_dag, params, config)?.orbit;
    let shifted = continue_orbit(&w_dag.shift()?, params, config)?.orbit;
    Ok((*shifted.at_origin() - henon_step(*base.at_origin(), params)).norm())
}
