//! Numerical evidence of hyperbolicity along orbit windows: expansion
//! constants of `q`, a cone-field check, twisted-cyclic singular values and
//! a combined verdict.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{dhenon, dq, Mat2, Params, QuadCycle};
use crate::error::{Error, Result};
use crate::linsolve::{assemble_df, monodromy, DfFactorization};
use crate::window::{residual_rows, Geometry, OrbitWindow};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Expansion constants of `q` on a family of repelling cycles:
/// `|Dq^n(x)| ≥ C_u λ_u^n` along every sampled segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionEstimate {
    pub lambda_u: f64,
    pub c_u: f64,
    /// Index of the cycle realizing `λ_u`.
    pub minimizing_cycle: usize,
}

/// `λ_u = min |multiplier|^{1/p}`; `C_u` is the largest constant valid for
/// every orbit segment of length `1..=3·max period` starting on a cycle.
pub fn estimate_expansion(cycles: &[QuadCycle]) -> Result<ExpansionEstimate> {
    if cycles.is_empty() {
        return Err(Error::EmptyCycles);
    }
    let mut lambda_u = f64::INFINITY;
    let mut minimizing_cycle = 0;
    for (index, cyc) in cycles.iter().enumerate() {
        let modulus = cyc.multiplier.norm();
        if modulus <= 1.0 {
            return Err(Error::NonRepellingCycle { index, modulus });
        }
        let rate = modulus.powf(1.0 / cyc.points.len() as f64);
        if rate < lambda_u {
            lambda_u = rate;
            minimizing_cycle = index;
        }
    }
    let horizon = 3 * cycles.iter().map(|c| c.points.len()).max().unwrap_or(1);
    let mut c_u = f64::INFINITY;
    for cyc in cycles {
        let p = cyc.points.len();
        for start in 0..p {
            // work in logs so long segments neither overflow nor underflow
            let mut log_ratio = 0.0;
            for n in 1..=horizon {
                log_ratio += dq(cyc.points[(start + n - 1) % p]).norm().ln() - lambda_u.ln();
                c_u = c_u.min(log_ratio.exp());
            }
        }
    }
    Ok(ExpansionEstimate { lambda_u, c_u, minimizing_cycle })
}

/// Cone field along an orbit window.
///
/// Directions are written in the frame `u_i = (2y_i, 1)` (tangent to the
/// graph `x = y² + c` at `b = 0`) and `s = (0, 1)`. With slope
/// `t = β/α` for `α·u_i + β·s`, the unstable cone at `i` is `|t| ≤ width·μ_i`
/// and the stable cone is `|t| ≥ μ_i/width`, where the weights `μ_i` are
/// fitted so that the diagonal growth rate is constant along the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub width: f64,
}

impl Default for ConeSpec {
    fn default() -> Self {
        Self { width: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck {
    pub holds: bool,
    /// Smallest relative slack over all conditions and indices; negative on
    /// failure.
    pub margin: f64,
    /// Smallest guaranteed one-step expansion in the unstable cones.
    pub expansion: f64,
    /// Largest guaranteed one-step contraction in the stable cones.
    pub contraction: f64,
    pub weights: Vec<f64>,
}

impl ConeCheck {
    fn degenerate(len: usize) -> Self {
        Self { holds: false, margin: -1.0, expansion: 0.0, contraction: f64::INFINITY, weights: vec![1.0; len] }
    }
}

/// Largest `|f(t)|` over `|t| ≤ r` for `f(t) = (m21 + m22·t)/(m11 + m12·t)`;
/// infinite when the pole lies in the closed disk.
fn mobius_disk_max(m: &Mat2, r: f64) -> f64 {
    let (m11, m12, m21, m22) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    if m11.norm() <= m12.norm() * r {
        return f64::INFINITY;
    }
    let f = |t: Complex64| (m21 + m22 * t) / (m11 + m12 * t);
    // the image of the disk is a disk centred at the image of the pole's
    // reflection in the boundary circle
    let reflected = if m12 == ZERO { ZERO } else { r * r / (-m11 / m12).conj() };
    let center = f(reflected);
    let radius = (f(Complex64::new(r, 0.0)) - center).norm();
    center.norm() + radius
}

/// Checks forward invariance of the unstable cones, forward invariance of
/// the complements of the stable cones (equivalently backward invariance of
/// the stable cones), expansion in the unstable cones and contraction in the
/// stable ones, all in the weighted frame.
pub fn cone_check(w: &OrbitWindow, params: &Params, cones: &ConeSpec) -> ConeCheck {
    const TOL: f64 = 1e-6;
    let len = w.len();
    let rows = residual_rows(w.geometry());
    let width = cones.width;
    if !(width > 0.0) || rows == 0 {
        return ConeCheck::degenerate(len);
    }
    let frame = |i: usize| -> Option<Mat2> {
        let y2 = 2.0 * w.entries()[i].y;
        if y2.norm() <= 1e-12 {
            None
        } else {
            Some(Mat2::new(y2, ZERO, ONE, ONE))
        }
    };
    let mut local = Vec::with_capacity(rows);
    for i in 0..rows {
        let next = (i + 1) % len;
        let (Some(p_i), Some(p_next)) = (frame(i), frame(next)) else {
            return ConeCheck::degenerate(len);
        };
        let Some(p_inv) = p_next.try_inverse() else {
            return ConeCheck::degenerate(len);
        };
        local.push(p_inv * dhenon(w.entries()[i], params) * p_i);
    }
    if local.iter().any(|m| m[(0, 0)].norm() <= 1e-300) {
        return ConeCheck::degenerate(len);
    }
    let log_mean = local.iter().map(|m| m[(0, 0)].norm().ln()).sum::<f64>() / rows as f64;
    let rate = log_mean.exp();
    let mut weights = vec![1.0; len];
    for i in 0..rows.min(len - 1) {
        weights[i + 1] = weights[i] * rate / local[i][(0, 0)].norm();
    }

    let mut margin = f64::INFINITY;
    let mut expansion = f64::INFINITY;
    let mut contraction: f64 = 0.0;
    let stretch = width.max(1.0);
    for (i, m) in local.iter().enumerate() {
        let (mu, mu_next) = (weights[i], weights[(i + 1) % len]);
        let unstable = mobius_disk_max(m, width * mu) / (width * mu_next);
        let stable_complement = mobius_disk_max(m, mu / width) / (mu_next / width);
        let grow = mu_next * (m[(0, 0)].norm() - m[(0, 1)].norm() * width * mu) / (mu * stretch);
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
        let denom = m[(0, 0)].norm() - m[(1, 0)].norm() * width / mu_next;
        let shrink = if denom > 0.0 { stretch * det / denom } else { f64::INFINITY };
        expansion = expansion.min(grow);
        contraction = contraction.max(shrink);
        for slack in [1.0 - unstable, 1.0 - stable_complement, grow - 1.0, 1.0 - shrink] {
            margin = margin.min(if slack.is_nan() { -1.0 } else { slack });
        }
    }
    ConeCheck { holds: margin > TOL, margin, expansion, contraction, weights }
}

/// Minimum over `θ = 2πk/grid` of the smallest singular value of the
/// twisted cyclic operator whose wrap-around row uses `e^{iθ}·ξ_0`. It is
/// zero exactly when the monodromy has the eigenvalue `e^{iθ}`.
pub fn quasi_hyp_margin(w: &OrbitWindow, params: &Params, grid: usize) -> Result<f64> {
    if !w.geometry().is_periodic() {
        return Err(Error::GeometryMismatch("twisted operator needs a periodic window".into()));
    }
    let grid = grid.max(1);
    let mut best = f64::INFINITY;
    for k in 0..grid {
        let twist = Complex64::from_polar(1.0, TAU * k as f64 / grid as f64);
        let svd = assemble_df(w, params, twist).svd(false, false);
        best = best.min(svd.singular_values.min());
    }
    Ok(best)
}

/// Smallest singular value of `DF` on a pinned window.
pub fn pinned_margin(w: &OrbitWindow, params: &Params) -> f64 {
    assemble_df(w, params, ONE).svd(false, false).singular_values.min()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyTolerances {
    pub gap_tol: f64,
    pub quasi_tol: f64,
    pub cone_tol: f64,
    /// Largest acceptable condition number of `DF`.
    pub cond_max: f64,
    pub theta_grid: usize,
}

impl Default for CertifyTolerances {
    fn default() -> Self {
        Self { gap_tol: 1e-4, quasi_tol: 1e-6, cone_tol: 1e-6, cond_max: 1e12, theta_grid: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Hyperbolic,
    Marginal,
    NotHyperbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicityEstimate {
    pub lambda_u: f64,
    pub c_u: Option<f64>,
    /// `None` when no contraction rate could be measured.
    pub lambda_s: Option<f64>,
    pub c_s: Option<f64>,
    /// Periodic windows: distance of the monodromy eigenvalue moduli from 1.
    /// Pinned windows: distance of the cone rates from 1.
    pub gap: f64,
    pub cone: ConeCheck,
    /// Twisted-operator margin (periodic) or smallest singular value of `DF`
    /// (pinned).
    pub quasi_margin: f64,
    /// `None` when the solve failed.
    pub condition: Option<f64>,
    /// Exact `‖DF⁻¹‖∞` when the solve succeeded.
    pub inverse_norm: Option<f64>,
    /// `C_s/(1 − λ_s) + C_u/(λ_u − 1)` when all constants are available.
    pub dichotomy_bound: Option<f64>,
    pub verdict: Verdict,
}

fn inf_norm2(m: &Mat2) -> f64 {
    (0..2).map(|r| m[(r, 0)].norm() + m[(r, 1)].norm()).fold(0.0, f64::max)
}

fn eigvec(m: &Mat2, mu: Complex64) -> [Complex64; 2] {
    let a = [m[(0, 1)], mu - m[(0, 0)]];
    let b = [mu - m[(1, 1)], m[(1, 0)]];
    let na = a[0].norm().max(a[1].norm());
    let nb = b[0].norm().max(b[1].norm());
    let (v, n) = if na >= nb { (a, na) } else { (b, nb) };
    if n == 0.0 {
        // scalar matrix: any basis works; callers only hit this for λ_u = λ_s
        return [ONE, ZERO];
    }
    [v[0] / n, v[1] / n]
}

struct Dichotomy {
    c_u: f64,
    c_s: f64,
}

/// Dichotomy constants along a periodic orbit, measured from the exact
/// invariant splitting: `‖Φ(i, i+n) P^u_{i+n}‖ ≤ C_u λ_u^{−n}` and
/// `‖Φ(i+n, i) P^s_i‖ ≤ C_s λ_s^n` for all `n ≥ 0` (only `n = 0` when
/// `λ_s = 0`). Both ratios are periodic in `n`, so one period suffices.
fn dichotomy(w: &OrbitWindow, params: &Params, lambda_u: f64, lambda_s: f64) -> Option<Dichotomy> {
    let p = w.len();
    let jac: Vec<Mat2> = w.entries().iter().map(|z| dhenon(*z, params)).collect();
    let mono = monodromy(w, params).ok()?;
    let [mu_u, mu_s] = mono.eigenvalues;
    let mut proj_u = Vec::with_capacity(p);
    let mut proj_s = Vec::with_capacity(p);
    let mut grow = Vec::with_capacity(p);
    let mut shrink = Vec::with_capacity(p);
    for i in 0..p {
        // monodromy based at i
        let mut m = Mat2::identity();
        for k in 0..p {
            m = jac[(i + k) % p] * m;
        }
        let e = eigvec(&m, mu_u);
        let s = eigvec(&m, mu_s);
        let basis = Mat2::new(e[0], s[0], e[1], s[1]);
        let inv = basis.try_inverse()?;
        let pu = Mat2::new(e[0] * inv[(0, 0)], e[0] * inv[(0, 1)], e[1] * inv[(0, 0)], e[1] * inv[(0, 1)]);
        proj_u.push(inf_norm2(&pu));
        proj_s.push(inf_norm2(&(Mat2::identity() - pu)));
        let ge = jac[i] * nalgebra::Vector2::new(e[0], e[1]);
        let gs = jac[i] * nalgebra::Vector2::new(s[0], s[1]);
        grow.push(ge[0].norm().max(ge[1].norm()));
        shrink.push(gs[0].norm().max(gs[1].norm()));
    }
    let mut c_u: f64 = 0.0;
    let mut c_s: f64 = 0.0;
    for i in 0..p {
        let mut prod_g = 1.0;
        let mut prod_k = 1.0;
        for n in 0..p {
            c_u = c_u.max(proj_u[(i + n) % p] * lambda_u.powi(n as i32) / prod_g);
            if n == 0 || lambda_s > 0.0 {
                c_s = c_s.max(proj_s[i] * prod_k / lambda_s.powi(n as i32));
            }
            prod_g *= grow[(i + n) % p];
            prod_k *= shrink[(i + n) % p];
        }
    }
    (c_u.is_finite() && c_s.is_finite()).then_some(Dichotomy { c_u, c_s })
}

/// Combines the cone check, the quasi-hyperbolicity margin and the linear
/// solve into a verdict: `Hyperbolic` only if all pass with room to spare,
/// `Marginal` if all pass but one is within ten tolerances of failing.
pub fn certify_orbit(w: &OrbitWindow, params: &Params, tol: &CertifyTolerances) -> HyperbolicityEstimate {
    let cone = cone_check(w, params, &ConeSpec::default());
    let fact = DfFactorization::new(w, params).ok();
    let condition = fact.as_ref().and_then(|f| f.condition().ok()).filter(|c| c.is_finite());
    let inverse_norm = fact.as_ref().and_then(|f| f.inverse_norm().ok());

    let (lambda_u, lambda_s, c_u, c_s, gap, quasi_margin) = match w.geometry() {
        Geometry::Periodic { p } => {
            let mono = monodromy(w, params).expect("periodic window");
            let [big, small] = mono.eigenvalues.map(|z| z.norm());
            let lambda_u = big.powf(1.0 / p as f64);
            let lambda_s = small.powf(1.0 / p as f64);
            let gap = (big - 1.0).abs().min((1.0 - small).abs());
            let quasi = quasi_hyp_margin(w, params, tol.theta_grid).unwrap_or(0.0);
            let d = (lambda_u > 1.0 && lambda_s < 1.0)
                .then(|| dichotomy(w, params, lambda_u, lambda_s))
                .flatten();
            (lambda_u, Some(lambda_s), d.as_ref().map(|d| d.c_u), d.as_ref().map(|d| d.c_s), gap, quasi)
        }
        Geometry::Pinned { .. } => {
            let lambda_s = cone.contraction.is_finite().then_some(cone.contraction);
            let gap = (cone.expansion - 1.0).min(1.0 - cone.contraction).max(0.0);
            (cone.expansion, lambda_s, None, None, gap, pinned_margin(w, params))
        }
    };
    let dichotomy_bound = match (c_u, c_s, lambda_s) {
        (Some(cu), Some(cs), Some(ls)) => Some(cs / (1.0 - ls) + cu / (lambda_u - 1.0)),
        _ => None,
    };

    let solve_ok = condition.is_some_and(|c| c <= tol.cond_max);
    let pass = cone.margin > tol.cone_tol && quasi_margin > tol.quasi_tol && solve_ok && gap > tol.gap_tol;
    let close = cone.margin < 10.0 * tol.cone_tol
        || quasi_margin < 10.0 * tol.quasi_tol
        || gap < 10.0 * tol.gap_tol
        || condition.is_some_and(|c| c > tol.cond_max / 10.0);
    let verdict = if !pass {
        Verdict::NotHyperbolic
    } else if close {
        Verdict::Marginal
    } else {
        Verdict::Hyperbolic
    };
    HyperbolicityEstimate {
        lambda_u,
        c_u,
        lambda_s,
        c_s,
        gap,
        cone,
        quasi_margin,
        condition,
        inverse_norm,
        dichotomy_bound,
        verdict,
    }
}
