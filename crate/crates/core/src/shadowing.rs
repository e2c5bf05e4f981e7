//! Continuation of `H_0` orbits to `H_b` orbits, and the two fixed-point
//! operators on scalar sequences.
//!
//! [`continue_orbit`] walks `b` from 0 to the target in equal steps. At each
//! step the Newton operator `v ↦ v − J⁻¹ F(v; H_b)` is iterated with `J`
//! frozen at the previously converged orbit (at the first step `J` is
//! `DF(w†; H_0)`, inverted by [`solve_df_h0`]).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{beta_fixed_point, coding_sqrt, embed_g, polish_cycle, Params, Point2};
use crate::error::{Error, Result};
use crate::linsolve::{solve_df_h0, DfFactorization};
use crate::window::{residual_f, sup_distance, sup_norm, Geometry, OrbitWindow, ScalarWindow, TangentWindow, Window};

/// Size of a default `b`-step.
pub const DEFAULT_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationConfig {
    /// Number of equal `b`-steps; `None` means `ceil(|b| / 0.01)`.
    pub steps: Option<usize>,
    /// Residual at which a step counts as converged.
    pub tol: f64,
    /// Newton iterations allowed per step.
    pub max_iter: usize,
    /// The residual must halve within this many iterations.
    pub halving_window: usize,
    /// Iterates must stay within this sup-distance of the step's anchor.
    pub ball_radius: f64,
    /// Largest `|b|` attempted at all.
    pub reach_cap: f64,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self { steps: None, tol: 1e-12, max_iter: 60, halving_window: 5, ball_radius: 0.25, reach_cap: 0.5 }
    }
}

impl ContinuationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.ball_radius > 0.0) || !(self.reach_cap > 0.0) {
            return Err(Error::InvalidArgument("tolerances and radii must be positive".into()));
        }
        if self.steps == Some(0) || self.max_iter == 0 || self.halving_window == 0 {
            return Err(Error::InvalidArgument("steps, max_iter and halving_window must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps_for(&self, target_b: Complex64) -> usize {
        self.steps.unwrap_or_else(|| ((target_b.norm() / DEFAULT_STEP).ceil() as usize).max(1))
    }
}

/// The continued orbit `θ(b; w†)` with its path diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationResult {
    pub orbit: OrbitWindow,
    /// `b` values reached, in order (the start is not included).
    pub b_path: Vec<Complex64>,
    pub final_residual: f64,
    pub iterations_per_step: Vec<usize>,
    /// `‖θ(b; w†) − w†‖∞`.
    pub displacement: f64,
}

/// One frozen Newton step `v − DF(w†; H_0)⁻¹ F(v; H_b)`.
pub fn frozen_newton_step(v: &OrbitWindow, w_dag: &OrbitWindow, params: &Params) -> Result<OrbitWindow> {
    let r = residual_f(v, params)?;
    let delta = solve_df_h0(&w_dag.first_components(), &r)?;
    v.sub(&delta)
}

enum Frozen {
    H0(ScalarWindow),
    Lu(DfFactorization),
}

impl Frozen {
    fn at(anchor: &OrbitWindow, params: &Params) -> Result<Self> {
        if params.b == Complex64::new(0.0, 0.0) {
            Ok(Frozen::H0(anchor.first_components()))
        } else {
            Ok(Frozen::Lu(DfFactorization::new(anchor, params)?))
        }
    }

    fn solve(&self, eta: &TangentWindow) -> Result<TangentWindow> {
        match self {
            Frozen::H0(x) => solve_df_h0(x, eta),
            Frozen::Lu(f) => f.solve(eta),
        }
    }
}

/// Continues an orbit of `H_{b_start}` along the given sequence of `b`
/// values, re-freezing the Jacobian at each converged point.
pub fn continue_path(
    start: &OrbitWindow,
    c: Complex64,
    b_start: Complex64,
    path: &[Complex64],
    config: &ContinuationConfig,
) -> Result<ContinuationResult> {
    config.validate()?;
    let mut result = ContinuationResult {
        orbit: start.clone(),
        b_path: Vec::with_capacity(path.len()),
        final_residual: sup_norm(&residual_f(start, &Params::new(c, b_start))?),
        iterations_per_step: Vec::with_capacity(path.len()),
        displacement: 0.0,
    };
    let mut b_prev = b_start;
    for &b in path {
        if b.norm() > config.reach_cap {
            return Err(Error::BeyondReach { modulus: b.norm(), cap: config.reach_cap });
        }
        let frozen = Frozen::at(&result.orbit, &Params::new(c, b_prev))?;
        let params = Params::new(c, b);
        let anchor = result.orbit.clone();
        let mut v = anchor.clone();
        let mut r = residual_f(&v, &params)?;
        let mut history = vec![sup_norm(&r)];
        let mut iterations = 0;
        let fail = |residual: f64, iterations: usize, partial: &ContinuationResult| Error::ContractionFailure {
            b,
            residual,
            iterations,
            partial: Box::new(partial.clone()),
        };
        while history[iterations] > config.tol {
            if iterations == config.max_iter {
                return Err(fail(history[iterations], iterations, &result));
            }
            let delta = frozen.solve(&r)?;
            v = v.sub(&delta)?;
            iterations += 1;
            let distance = sup_distance(&v, &anchor)?;
            if !(distance <= config.ball_radius) {
                return Err(Error::BallEscape {
                    b,
                    radius: config.ball_radius,
                    distance,
                    partial: Box::new(result.clone()),
                });
            }
            r = residual_f(&v, &params)?;
            let norm = sup_norm(&r);
            history.push(norm);
            if !norm.is_finite() {
                return Err(fail(norm, iterations, &result));
            }
            if iterations >= config.halving_window
                && norm > config.tol
                && norm > 0.5 * history[iterations - config.halving_window]
            {
                return Err(fail(norm, iterations, &result));
            }
        }
        result.final_residual = history[iterations];
        result.orbit = v;
        result.b_path.push(b);
        result.iterations_per_step.push(iterations);
        result.displacement = sup_distance(&result.orbit, start)?;
        b_prev = b;
    }
    Ok(result)
}

/// Equally spaced `b` values from 0 (exclusive) to `target` (inclusive).
pub fn straight_path(target: Complex64, steps: usize) -> Vec<Complex64> {
    (1..=steps).map(|k| target * (k as f64 / steps as f64)).collect()
}

/// `θ(params.b; w†)` for an orbit `w†` of `H_0`.
pub fn continue_orbit(w_dag: &OrbitWindow, params: &Params, config: &ContinuationConfig) -> Result<ContinuationResult> {
    if params.b.norm() > config.reach_cap {
        return Err(Error::BeyondReach { modulus: params.b.norm(), cap: config.reach_cap });
    }
    let path = straight_path(params.b, config.steps_for(params.b));
    continue_path(w_dag, params.c, Complex64::new(0.0, 0.0), &path, config)
}

/// `z_i = (x_{i+1}, x_i)`. Periodic windows keep their length; a pinned
/// window `Pinned(m, n)` becomes `Pinned(m, n − 1)`.
pub fn delay_embed(x: &ScalarWindow) -> Result<OrbitWindow> {
    let e = x.entries();
    let len = e.len();
    match x.geometry() {
        Geometry::Periodic { .. } => {
            OrbitWindow::periodic((0..len).map(|i| Point2::new(e[(i + 1) % len], e[i])).collect())
        }
        Geometry::Pinned { n: 0, .. } => Err(Error::EmptyWindow),
        Geometry::Pinned { m, n } => {
            OrbitWindow::pinned(m, n - 1, (0..len - 1).map(|i| Point2::new(e[i + 1], e[i])).collect())
        }
    }
}

/// Indices that get updated (pinned windows keep both ends).
fn free_range(g: Geometry) -> Result<std::ops::Range<usize>> {
    match g {
        Geometry::Periodic { p } => Ok(0..p),
        Geometry::Pinned { m, n } if m + n >= 2 => Ok(1..m + n),
        Geometry::Pinned { .. } => Err(Error::EmptyWindow),
    }
}

fn neighbours(x: &[Complex64], g: Geometry, i: usize) -> (Complex64, Complex64) {
    let len = x.len();
    match g {
        Geometry::Periodic { .. } => (x[(i + len - 1) % len], x[(i + 1) % len]),
        Geometry::Pinned { .. } => (x[i - 1], x[i + 1]),
    }
}

fn fixed_point_loop(
    x: &ScalarWindow,
    max_iter: usize,
    tol: f64,
    mut update: impl FnMut(usize, Complex64, Complex64, Complex64) -> Result<Complex64>,
) -> Result<ScalarWindow> {
    let g = x.geometry();
    let range = free_range(g)?;
    let mut cur = x.entries().to_vec();
    let mut last = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = cur.clone();
        for i in range.clone() {
            let (prev, succ) = neighbours(&cur, g, i);
            next[i] = update(i, prev, cur[i], succ)?;
        }
        last = next.iter().zip(&cur).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        cur = next;
        if last <= tol {
            return Window::new(g, cur);
        }
        if !last.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, last_update: last })
}

/// Iterates `x′_i = ½(x_i + (x_{i+1} − c + b·x_{i−1}) / x_i)` (all slots at
/// once) until the update is at most `tol`. At a fixed point
/// `x_i² = x_{i+1} − c + b·x_{i−1}`, so [`delay_embed`] gives an `H_b` orbit.
pub fn mummert_iterate(x: &ScalarWindow, params: &Params, max_iter: usize, tol: f64) -> Result<ScalarWindow> {
    fixed_point_loop(x, max_iter, tol, |i, prev, xi, succ| {
        if xi.norm() <= 1e-12 {
            return Err(Error::ZeroDivision { index: i });
        }
        Ok(0.5 * (xi + (succ - params.c + params.b * prev) / xi))
    })
}

/// A sign itinerary `s_i ∈ {+1, −1}`, written as a string of `+` and `-`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SymbolCode {
    signs: Vec<i8>,
}

impl SymbolCode {
    pub fn new(signs: Vec<i8>) -> Result<Self> {
        if signs.is_empty() {
            return Err(Error::InvalidArgument("symbol code must be nonempty".into()));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument("signs must be +1 or -1".into()));
        }
        Ok(Self { signs })
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn sign(&self, i: usize) -> f64 {
        f64::from(self.signs[i % self.signs.len()])
    }

    /// True if the code is not a repetition of a shorter code.
    pub fn is_primitive(&self) -> bool {
        let n = self.signs.len();
        (1..n).filter(|d| n % d == 0).all(|d| (0..n).any(|i| self.signs[i] != self.signs[i % d]))
    }

    /// Every code of the given length, `+` sorting first.
    pub fn all_of_length(len: usize) -> Vec<SymbolCode> {
        (0..1usize << len)
            .map(|bits| SymbolCode {
                signs: (0..len).map(|i| if bits >> (len - 1 - i) & 1 == 0 { 1 } else { -1 }).collect(),
            })
            .collect()
    }
}

impl FromStr for SymbolCode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let signs = s
            .chars()
            .map(|ch| match ch {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::Parse(format!("symbol code '{s}' may only contain '+' and '-'"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        Self::new(signs).map_err(|_| Error::Parse("empty symbol code".into()))
    }
}

impl TryFrom<String> for SymbolCode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SymbolCode> for String {
    fn from(code: SymbolCode) -> String {
        code.to_string()
    }
}

impl fmt::Display for SymbolCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.signs {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// `x_i = s_i·√(−c)`, the orbit of the anti-integrable limit.
pub fn anti_integrable_seed(code: &SymbolCode, c: Complex64, geometry: Geometry) -> Result<ScalarWindow> {
    let r = (-c).sqrt();
    Window::new(geometry, (0..geometry.len()).map(|i| r * code.sign(i)).collect())
}

/// Iterates `x′_i = s_i·√(x_{i+1} − c + b·x_{i−1})` (principal root).
/// The code is read cyclically if it is shorter than the window.
pub fn sterling_meiss_iterate(
    x: &ScalarWindow,
    code: &SymbolCode,
    params: &Params,
    max_iter: usize,
    tol: f64,
) -> Result<ScalarWindow> {
    if x.geometry().is_periodic() && code.len() != x.len() {
        return Err(Error::GeometryMismatch(format!("code of length {} on a window of {}", code.len(), x.len())));
    }
    fixed_point_loop(x, max_iter, tol, |i, prev, _xi, succ| {
        let radicand = succ - params.c + params.b * prev;
        let on_cut = radicand.re < 0.0 && radicand.im.abs() <= 1e-12 * radicand.norm();
        if radicand.norm() < 1e-12 || on_cut {
            return Err(Error::BranchCollision { index: i });
        }
        Ok(code.sign(i) * radicand.sqrt())
    })
}

/// How a code is laid out on a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeLayout {
    /// The code is one period of a cycle.
    Periodic,
    /// The code gives the branches for indices `−m..n`, and `x_n` sits on the
    /// repelling fixed point.
    Pinned { m: usize },
}

/// The `q`-orbit selected by backward branches `x_i = s_i·√⁺(x_{i+1} − c)`,
/// where `√⁺` is [`coding_sqrt`].
pub fn q_orbit_from_code(code: &SymbolCode, c: Complex64, layout: CodeLayout) -> Result<ScalarWindow> {
    let len = code.len();
    let back = |x: Complex64, i: usize| code.sign(i) * coding_sqrt(x - c, c);
    match layout {
        CodeLayout::Periodic => {
            if code.signs().iter().all(|&s| s < 0) {
                // binary angle 0.111… = 0: the fixed point β, which is coded `+`
                return Err(Error::InvalidArgument(format!("periodic code {code} names β from the far side of the cut; use '+'")));
            }
            let mut x = vec![beta_fixed_point(c); len];
            let mut next = x[0];
            // the backward branches contract on the Julia set; go around until settled
            for _ in 0..200 {
                let before = x.clone();
                for i in (0..len).rev() {
                    next = back(next, i);
                    x[i] = next;
                }
                let moved = x.iter().zip(&before).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                if moved <= 1e-15 {
                    break;
                }
            }
            polish_cycle(&mut x, c);
            let residual = (0..len).map(|i| (x[(i + 1) % len] - (x[i] * x[i] + c)).norm()).fold(0.0, f64::max);
            if !(residual <= 1e-10) {
                return Err(Error::NoConvergence { iterations: 200, last_update: residual });
            }
            ScalarWindow::periodic(x)
        }
        CodeLayout::Pinned { m } => {
            if m > len {
                return Err(Error::InvalidArgument(format!("m = {m} exceeds code length {len}")));
            }
            let mut x = vec![beta_fixed_point(c); len + 1];
            for i in (0..len).rev() {
                x[i] = back(x[i + 1], i);
            }
            ScalarWindow::pinned(m, len - m, x)
        }
    }
}

/// `w†_i = g(x_i) = (q(x_i), x_i)`.
pub fn lift_orbit(x: &ScalarWindow, c: Complex64) -> OrbitWindow {
    x.map(|&v| embed_g(v, c))
}

/// Code → `q`-orbit → lift → continuation to `params.b`.
pub fn shadow_from_code(
    code: &SymbolCode,
    params: &Params,
    layout: CodeLayout,
    config: &ContinuationConfig,
) -> Result<ContinuationResult> {
    let x = q_orbit_from_code(code, params.c, layout)?;
    continue_orbit(&lift_orbit(&x, params.c), params, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::find_quad_cycles;
    use crate::window::apply_df;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fixed_lift() -> OrbitWindow {
        OrbitWindow::periodic(vec![Point2::real(1.0, 1.0)]).unwrap()
    }

    /// Period-2 orbit of `H_b`: `x_0, x_1` are the roots of
    /// `t² + (1+b)t + (1+b)² + c`.
    fn two_cycle_oracle(c: Complex64, b: Complex64) -> [Complex64; 2] {
        let s = 1.0 + b;
        let disc = (s * s - 4.0 * (s * s + c)).sqrt();
        [(-s + disc) / 2.0, (-s - disc) / 2.0]
    }

    #[test]
    fn newton_step_fixed_at_b_zero() {
        let w = fixed_lift();
        assert_eq!(frozen_newton_step(&w, &w, &Params::real(0.0, 0.0)).unwrap(), w);
    }

    #[test]
    fn newton_step_iterates_to_fixed_orbit() {
        let w = fixed_lift();
        let params = Params::real(0.0, 0.1);
        let mut v = w.clone();
        for _ in 0..80 {
            v = frozen_newton_step(&v, &w, &params).unwrap();
        }
        assert!((v.entries()[0] - Point2::real(1.1, 1.1)).norm() < 1e-12);
    }

    #[test]
    fn newton_step_is_half_contraction() {
        let c = cx(0.0, 0.0);
        let cyc = find_quad_cycles(c, 3).unwrap().into_iter().find(|cyc| cyc.period == 3).unwrap();
        let w = lift_orbit(&ScalarWindow::periodic(cyc.points.clone()).unwrap(), c);
        let params = Params::new(c, cx(0.05, 0.0));
        let bumps = [
            Point2::new(cx(0.03, -0.02), cx(0.0, 0.05)),
            Point2::new(cx(-0.05, 0.0), cx(0.01, 0.01)),
            Point2::new(cx(0.0, 0.04), cx(-0.03, 0.0)),
        ];
        for k in 0..3 {
            let v1 = w.add(&OrbitWindow::periodic(bumps.to_vec()).unwrap()).unwrap();
            let mut b2 = bumps.to_vec();
            b2.rotate_left(k);
            let v2 = w.add(&OrbitWindow::periodic(b2).unwrap().scaled(-0.5)).unwrap();
            let g1 = frozen_newton_step(&v1, &w, &params).unwrap();
            let g2 = frozen_newton_step(&v2, &w, &params).unwrap();
            assert!(sup_distance(&g1, &g2).unwrap() <= 0.5 * sup_distance(&v1, &v2).unwrap());
        }
    }

    #[test]
    fn continuation_of_fixed_orbit() {
        let r = continue_orbit(&fixed_lift(), &Params::real(0.0, 0.1), &ContinuationConfig::default()).unwrap();
        assert!((r.orbit.entries()[0] - Point2::real(1.1, 1.1)).norm() <= 1e-12);
        assert!(r.final_residual <= 1e-12);
        assert_eq!(r.b_path.len(), 10);
        assert!((r.displacement - 0.1).abs() < 1e-12);
    }

    #[test]
    fn continuation_to_zero_is_identity() {
        let r = continue_orbit(&fixed_lift(), &Params::real(0.0, 0.0), &ContinuationConfig::default()).unwrap();
        assert_eq!(r.orbit, fixed_lift());
        assert_eq!(r.displacement, 0.0);
        assert_eq!(r.iterations_per_step, vec![0]);
    }

    #[test]
    fn continuation_of_two_cycle_matches_closed_form() {
        let c = cx(0.0, 0.0);
        let code: SymbolCode = "+-".parse().unwrap();
        let b = cx(0.05, 0.0);
        let r = shadow_from_code(&code, &Params::new(c, b), CodeLayout::Periodic, &ContinuationConfig::default()).unwrap();
        let roots = two_cycle_oracle(c, b);
        let got = [r.orbit.entries()[0].y, r.orbit.entries()[1].y];
        let direct = (got[0] - roots[0]).norm().max((got[1] - roots[1]).norm());
        let swapped = (got[0] - roots[1]).norm().max((got[1] - roots[0]).norm());
        assert!(direct.min(swapped) < 1e-10);
        assert!((r.orbit.entries()[0].x - r.orbit.entries()[1].y).norm() < 1e-12);
    }

    #[test]
    fn codes_select_expected_cycles() {
        let c = cx(0.0, 0.0);
        let x = q_orbit_from_code(&"+".parse().unwrap(), c, CodeLayout::Periodic).unwrap();
        assert!((x.entries()[0] - 1.0).norm() < 1e-15);
        let x = q_orbit_from_code(&"+-".parse().unwrap(), c, CodeLayout::Periodic).unwrap();
        let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((x.entries()[0] - omega).norm() < 1e-14);
        assert!((x.entries()[1] - omega * omega).norm() < 1e-14);
        let r = shadow_from_code(&"+".parse().unwrap(), &Params::real(0.0, 0.0), CodeLayout::Periodic, &ContinuationConfig::default()).unwrap();
        assert_eq!(r.orbit, fixed_lift());
    }

    #[test]
    fn codes_reach_every_repelling_cycle_once() {
        for c in [cx(0.0, 0.1), cx(0.15, 0.1), cx(-0.3, 0.0)] {
            for p in 1..=5 {
                let starts: Vec<Complex64> = SymbolCode::all_of_length(p)
                    .into_iter()
                    .filter(|code| code.is_primitive() && code.signs().iter().any(|&s| s > 0))
                    .map(|code| q_orbit_from_code(&code, c, CodeLayout::Periodic).unwrap().entries()[0])
                    .collect();
                let mut cycle_points: Vec<Complex64> = crate::dynamics::repelling_cycles_up_to(c, p)
                    .unwrap()
                    .into_iter()
                    .filter(|cyc| cyc.period == p)
                    .flat_map(|cyc| cyc.points)
                    .collect();
                assert_eq!(starts.len(), cycle_points.len(), "c = {c}, p = {p}");
                for z in starts {
                    let k = cycle_points.iter().position(|w| (w - z).norm() < 1e-10);
                    assert!(k.is_some(), "c = {c}, p = {p}: {z} is not an unused cycle point");
                    cycle_points.swap_remove(k.unwrap());
                }
            }
        }
        assert!(q_orbit_from_code(&"--".parse().unwrap(), cx(0.0, 0.1), CodeLayout::Periodic).is_err());
    }

    #[test]
    fn shift_equivariance_of_continuation() {
        let c = cx(-0.1, 0.0);
        let params = Params::new(c, cx(0.03, 0.01));
        let cfg = ContinuationConfig::default();
        let cyc = &find_quad_cycles(c, 4).unwrap()[1];
        let w = lift_orbit(&ScalarWindow::periodic(cyc.points.clone()).unwrap(), c);
        let a = continue_orbit(&w.shift().unwrap(), &params, &cfg).unwrap().orbit;
        let b = continue_orbit(&w, &params, &cfg).unwrap().orbit.shift().unwrap();
        assert!(sup_distance(&a, &b).unwrap() < 1e-11);
    }

    #[test]
    fn pinned_shadowing_converges() {
        let c = cx(-0.1, 0.05);
        let code: SymbolCode = "+-++-+--+-+".parse().unwrap();
        let params = Params::new(c, cx(0.02, 0.0));
        let r = shadow_from_code(&code, &params, CodeLayout::Pinned { m: 5 }, &ContinuationConfig::default()).unwrap();
        assert_eq!(r.orbit.geometry(), Geometry::Pinned { m: 5, n: 6 });
        assert!(sup_norm(&residual_f(&r.orbit, &params).unwrap()) <= 1e-12);
        let r0 = shadow_from_code(&code, &params.with_b(cx(0.0, 0.0)), CodeLayout::Pinned { m: 5 }, &ContinuationConfig::default()).unwrap();
        assert!(r.displacement > 0.0 && r0.displacement == 0.0);
    }

    #[test]
    fn continuation_errors() {
        let cfg = ContinuationConfig::default();
        assert!(matches!(
            continue_orbit(&fixed_lift(), &Params::real(0.0, 0.9), &cfg),
            Err(Error::BeyondReach { .. })
        ));
        let tight = ContinuationConfig { max_iter: 1, steps: Some(1), ..cfg };
        let c = cx(-0.1, 0.1);
        let three = lift_orbit(&q_orbit_from_code(&"+--".parse().unwrap(), c, CodeLayout::Periodic).unwrap(), c);
        match continue_orbit(&three, &Params::new(c, cx(0.1, 0.0)), &tight) {
            Err(Error::ContractionFailure { partial, .. }) => assert!(partial.b_path.is_empty()),
            other => panic!("{other:?}"),
        }
        let small = ContinuationConfig { ball_radius: 0.01, steps: Some(2), ..cfg };
        assert!(matches!(continue_orbit(&fixed_lift(), &Params::real(0.0, 0.1), &small), Err(Error::BallEscape { .. })));
    }

    #[test]
    fn mummert_examples() {
        let params = Params::real(0.0, 0.1);
        let x = ScalarWindow::periodic(vec![cx(1.0, 0.0); 3]).unwrap();
        let one = mummert_iterate(&x, &params, 1, 0.0);
        assert!(matches!(one, Err(Error::NoConvergence { .. })));
        // a single sweep: ½(1 + 1.1) = 1.05
        let mut cur = x.entries().to_vec();
        let next: Vec<Complex64> = (0..3).map(|i| 0.5 * (cur[i] + (cur[(i + 1) % 3] + 0.1 * cur[(i + 2) % 3]) / cur[i])).collect();
        assert!(next.iter().all(|v| (v - 1.05).norm() < 1e-15));
        cur = mummert_iterate(&x, &params, 200, 1e-15).unwrap().into_entries();
        assert!(cur.iter().all(|v| (v - 1.1).norm() < 1e-14));
        let zero = ScalarWindow::periodic(vec![cx(0.0, 0.0); 2]).unwrap();
        assert!(matches!(mummert_iterate(&zero, &params, 10, 1e-12), Err(Error::ZeroDivision { .. })));
    }

    #[test]
    fn mummert_agrees_with_continuation() {
        let c = cx(0.0, 0.0);
        let params = Params::new(c, cx(0.05, 0.0));
        for code in ["+", "+-"] {
            let code: SymbolCode = code.parse().unwrap();
            let x = q_orbit_from_code(&code, c, CodeLayout::Periodic).unwrap();
            let cont = continue_orbit(&lift_orbit(&x, c), &params, &ContinuationConfig::default()).unwrap();
            let fixed = mummert_iterate(&x, &params, 500, 1e-15).unwrap();
            let z = delay_embed(&fixed).unwrap();
            assert!(sup_distance(&z, &cont.orbit).unwrap() < 1e-8);
        }
    }

    #[test]
    fn sterling_meiss_examples() {
        let params = Params::real(-6.0, 0.0);
        let plus: SymbolCode = "+".parse().unwrap();
        let x = ScalarWindow::periodic(vec![cx(3.0, 0.0)]).unwrap();
        let y = sterling_meiss_iterate(&x, &plus, &params, 10, 1e-15).unwrap();
        assert_eq!(y.entries()[0], cx(3.0, 0.0));

        let alt: SymbolCode = "+-".parse().unwrap();
        let seed = anti_integrable_seed(&alt, params.c, Geometry::Periodic { p: 2 }).unwrap();
        let y = sterling_meiss_iterate(&seed, &alt, &params, 200, 1e-15).unwrap();
        let e = y.entries();
        assert!((e[0] * e[0] + params.c - e[1]).norm() <= 1e-10);
        assert!((e[1] * e[1] + params.c - e[0]).norm() <= 1e-10);
        let oracle = find_quad_cycles(params.c, 2).unwrap();
        assert!(oracle.iter().filter(|cyc| cyc.period == 2).any(|cyc| cyc.points.iter().any(|p| (p - e[0]).norm() < 1e-10)));
    }

    #[test]
    fn sterling_meiss_pinned_and_errors() {
        let params = Params::real(-6.0, 0.1);
        let code: SymbolCode = "+--+-++".parse().unwrap();
        let g = Geometry::Pinned { m: 3, n: 3 };
        let seed = anti_integrable_seed(&code, params.c, g).unwrap();
        let y = sterling_meiss_iterate(&seed, &code, &params, 200, 1e-15).unwrap();
        let z = delay_embed(&y).unwrap();
        assert!(sup_norm(&residual_f(&z, &params).unwrap()) < 1e-10);

        let zero = ScalarWindow::periodic(vec![cx(-6.0, 0.0)]).unwrap();
        let p0 = Params::real(0.0, 0.0);
        assert!(matches!(sterling_meiss_iterate(&zero, &"+".parse().unwrap(), &p0, 5, 1e-12), Err(Error::BranchCollision { .. })));
    }

    #[test]
    fn symbol_codes() {
        let code: SymbolCode = "+-+".parse().unwrap();
        assert_eq!(code.to_string(), "+-+");
        assert!("".parse::<SymbolCode>().is_err());
        assert!("+x".parse::<SymbolCode>().is_err());
        assert!(!"+-+-".parse::<SymbolCode>().unwrap().is_primitive());
        assert!("+--".parse::<SymbolCode>().unwrap().is_primitive());
        assert_eq!(SymbolCode::all_of_length(3).len(), 8);
        assert_eq!(SymbolCode::all_of_length(2)[0].to_string(), "++");
        assert_eq!(serde_json::to_string(&code).unwrap(), "\"+-+\"");
    }

    #[test]
    fn delay_embedding_layout() {
        let x = ScalarWindow::pinned(1, 2, vec![cx(1.0, 0.0), cx(2.0, 0.0), cx(3.0, 0.0), cx(4.0, 0.0)]).unwrap();
        let z = delay_embed(&x).unwrap();
        assert_eq!(z.geometry(), Geometry::Pinned { m: 1, n: 1 });
        assert_eq!(z.entries()[0], Point2::real(2.0, 1.0));
    }

    #[test]
    fn displacement_bounded_by_tangent_estimate() {
        // dz/db = DF⁻¹η with η_i = (−y_i, 0); compare one small step with the linear prediction
        let c = cx(0.0, 0.0);
        let x = q_orbit_from_code(&"+--".parse().unwrap(), c, CodeLayout::Periodic).unwrap();
        let w = lift_orbit(&x, c);
        let db = cx(1e-6, 0.0);
        let r = continue_orbit(&w, &Params::new(c, db), &ContinuationConfig::default()).unwrap();
        let eta = w.map(|z| Point2::new(-z.y, cx(0.0, 0.0)));
        let p0 = Params::new(c, cx(0.0, 0.0));
        let tangent = solve_df_h0(&w.first_components(), &eta).unwrap();
        let check = apply_df(&w, &tangent, &p0).unwrap();
        assert!(sup_distance(&check, &eta).unwrap() < 1e-12);
        let predicted = w.add(&tangent.scaled(db.re)).unwrap();
        assert!(sup_distance(&predicted, &r.orbit).unwrap() < 1e-10);
    }
}
