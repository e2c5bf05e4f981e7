//! Linear solves of `DF(z)·ξ = η` along orbit windows.
//!
//! Two independent solvers are provided. [`solve_df_h0`] exploits the
//! triangular structure of `DH_0` and reduces everything to the scalar
//! recurrence `ξ_{i+1} − a_i ξ_i = η_i` plus a shifted sum; it only applies
//! at `b = 0`. [`DfFactorization`] assembles the full block-bidiagonal system
//! for any `b` and geometry and factors it with dense LU.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{dhenon, Mat2, Params, Point2};
use crate::error::{Error, Result};
use crate::window::{apply_df, residual_rows, sup_norm, Geometry, OrbitWindow, ScalarWindow, TangentWindow, Window};

/// Relative distance to 1 below which a multiplier counts as neutral.
pub const UNIT_MULTIPLIER_TOL: f64 = 1e-8;
/// `|x_i|` at or below this is treated as a critical point.
pub const ZERO_DERIVATIVE_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_unit(m: Complex64) -> Result<()> {
    if (m.norm() - 1.0).abs() <= UNIT_MULTIPLIER_TOL {
        Err(Error::UnitMultiplier { modulus: m.norm() })
    } else {
        Ok(())
    }
}

/// Unique solution of the cyclic recurrence `ξ_{i+1} − a_i ξ_i = η_i`
/// (indices mod `p`).
///
/// With `M = Π a_i`, the solution is resummed in closed form: backward from
/// the future when `|M| > 1`, forward from the past otherwise, so that every
/// partial product stays bounded by the dominant direction.
pub fn solve_scalar_cyclic(a: &[Complex64], eta: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = a.len();
    if p == 0 || eta.len() != p {
        return Err(Error::EmptyWindow);
    }
    let m: Complex64 = a.iter().product();
    check_unit(m)?;
    let mut xi = vec![ZERO; p];
    if m.norm() > 1.0 {
        // ξ_0 = −Σ_k η_k / (a_0⋯a_k) · 1/(1 − 1/M)
        let mut prod = ONE;
        let mut sum = ZERO;
        for k in 0..p {
            prod *= a[k];
            sum += eta[k] / prod;
        }
        xi[0] = -sum / (1.0 - 1.0 / m);
        let mut next = xi[0];
        for i in (1..p).rev() {
            // ξ_i = (ξ_{i+1} − η_i)/a_i
            next = (next - eta[i]) / a[i];
            xi[i] = next;
        }
    } else {
        // ξ_0 = Σ_k (a_{p−1}⋯a_{k+1}) η_k / (1 − M)
        let mut prod = ONE;
        let mut sum = ZERO;
        for k in (0..p).rev() {
            sum += prod * eta[k];
            prod *= a[k];
        }
        xi[0] = sum / (1.0 - m);
        for i in 0..p - 1 {
            xi[i + 1] = a[i] * xi[i] + eta[i];
        }
    }
    Ok(xi)
}

/// Solves `DF(w; H_0)·ξ = η` where `coeffs` holds the first components of
/// `w` (for the lift of a `q`-orbit these are `x_{i+1}`).
///
/// First components: `ξ_{i+1} − 2X_i ξ_i = η_i`. Second components:
/// `ξ̃_i = η̃_{i−1} + ξ_{i−1}`. On pinned windows the `x` component of the
/// last entry and the `y` component of the first entry are held at zero.
pub fn solve_df_h0(coeffs: &ScalarWindow, eta: &TangentWindow) -> Result<TangentWindow> {
    coeffs.same_shape(eta)?;
    let g = coeffs.geometry();
    let x = coeffs.entries();
    let e = eta.entries();
    let len = x.len();
    let rows = residual_rows(g);
    if rows == 0 {
        return Err(Error::EmptyWindow);
    }
    for (index, xi) in x.iter().enumerate().take(rows) {
        if xi.norm() <= ZERO_DERIVATIVE_TOL {
            return Err(Error::ZeroDerivative { index, modulus: xi.norm() });
        }
    }
    let a: Vec<Complex64> = x.iter().map(|&v| 2.0 * v).collect();
    let first: Vec<Complex64> = match g {
        Geometry::Periodic { .. } => {
            let rhs: Vec<Complex64> = e.iter().map(|v| v.x).collect();
            solve_scalar_cyclic(&a, &rhs)?
        }
        Geometry::Pinned { .. } => {
            let mut out = vec![ZERO; len];
            for i in (0..rows).rev() {
                out[i] = (out[i + 1] - e[i].x) / a[i];
            }
            out
        }
    };
    let mut sol = vec![Point2::ZERO; len];
    for i in 0..len {
        sol[i].x = first[i];
    }
    match g {
        Geometry::Periodic { .. } => {
            for i in 0..len {
                let prev = (i + len - 1) % len;
                sol[i].y = e[prev].y + first[prev];
            }
        }
        Geometry::Pinned { .. } => {
            for i in 1..len {
                sol[i].y = e[i - 1].y + first[i - 1];
            }
        }
    }
    Window::new(g, sol)
}

/// Position of each unknown `(entry, component)` in the linear system.
fn unknowns(g: Geometry) -> Vec<(usize, usize)> {
    let len = g.len();
    let mut out = Vec::with_capacity(2 * len);
    for i in 0..len {
        for comp in 0..2 {
            let pinned = match g {
                Geometry::Periodic { .. } => false,
                Geometry::Pinned { .. } => (i == len - 1 && comp == 0) || (i == 0 && comp == 1),
            };
            if !pinned {
                out.push((i, comp));
            }
        }
    }
    out
}

/// Matrix of `DF(w)` on the free unknowns. On periodic windows, `twist`
/// multiplies the wrap-around coupling of row `p − 1` to `ξ_0`; `twist = 1`
/// gives `DF` itself.
pub(crate) fn assemble_df(w: &OrbitWindow, params: &Params, twist: Complex64) -> DMatrix<Complex64> {
    let g = w.geometry();
    let len = w.len();
    let cols = unknowns(g);
    let mut col_of = vec![[usize::MAX; 2]; len];
    for (k, &(i, comp)) in cols.iter().enumerate() {
        col_of[i][comp] = k;
    }
    let rows = residual_rows(g);
    let mut mat = DMatrix::from_element(2 * rows, cols.len(), ZERO);
    for i in 0..rows {
        let d = dhenon(w.entries()[i], params);
        let next = (i + 1) % len;
        let wrap = if next == 0 { twist } else { ONE };
        for r in 0..2 {
            let row = 2 * i + r;
            if col_of[next][r] != usize::MAX {
                mat[(row, col_of[next][r])] += wrap;
            }
            for comp in 0..2 {
                if col_of[i][comp] != usize::MAX {
                    mat[(row, col_of[i][comp])] -= d[(r, comp)];
                }
            }
        }
    }
    mat
}

fn inf_norm(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization of `DF(w)` for repeated solves.
pub struct DfFactorization {
    geometry: Geometry,
    matrix: DMatrix<Complex64>,
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl DfFactorization {
    pub fn new(w: &OrbitWindow, params: &Params) -> Result<Self> {
        let g = w.geometry();
        if residual_rows(g) == 0 {
            return Err(Error::EmptyWindow);
        }
        if g.is_periodic() {
            let mono = monodromy(w, params)?;
            if mono.eigenvalues.iter().any(|l| (l - 1.0).norm() <= UNIT_MULTIPLIER_TOL) {
                return Err(Error::SingularSystem);
            }
        }
        let matrix = assemble_df(w, params, ONE);
        let lu = matrix.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::SingularSystem);
        }
        Ok(Self { geometry: g, matrix, lu })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn solve(&self, eta: &TangentWindow) -> Result<TangentWindow> {
        if eta.geometry() != self.geometry {
            return Err(Error::GeometryMismatch(format!("{:?} vs {:?}", eta.geometry(), self.geometry)));
        }
        let rows = residual_rows(self.geometry);
        let rhs = DVector::from_iterator(
            2 * rows,
            eta.entries()[..rows].iter().flat_map(|v| [v.x, v.y]),
        );
        let x = self.lu.solve(&rhs).ok_or(Error::SingularSystem)?;
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::SingularSystem);
        }
        let mut sol = vec![Point2::ZERO; self.geometry.len()];
        for (k, (i, comp)) in unknowns(self.geometry).into_iter().enumerate() {
            if comp == 0 {
                sol[i].x = x[k];
            } else {
                sol[i].y = x[k];
            }
        }
        Window::new(self.geometry, sol)
    }

    /// The exact operator norm `‖DF⁻¹‖∞` (maximum absolute row sum of the
    /// inverse matrix; entries are measured by their largest component).
    pub fn inverse_norm(&self) -> Result<f64> {
        let inv = self.lu.try_inverse().ok_or(Error::SingularSystem)?;
        Ok(inf_norm(&inv))
    }

    /// `‖DF‖∞ · ‖DF⁻¹‖∞`.
    pub fn condition(&self) -> Result<f64> {
        Ok(inf_norm(&self.matrix) * self.inverse_norm()?)
    }
}

/// Outcome of a checked linear solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub solution: TangentWindow,
    /// `‖DF·ξ − η‖∞`, recomputed from the solution.
    pub residual_norm: f64,
    pub condition_estimate: f64,
}

/// Solves `DF(w)·ξ = η` by dense LU on any geometry and reports the
/// recomputed residual and the condition number.
pub fn solve_df(w: &OrbitWindow, eta: &TangentWindow, params: &Params) -> Result<SolveReport> {
    w.same_shape(eta)?;
    let fact = DfFactorization::new(w, params)?;
    let solution = fact.solve(eta)?;
    let back = apply_df(w, &solution, params)?;
    let rows = residual_rows(w.geometry());
    let residual_norm = back.entries()[..rows]
        .iter()
        .zip(&eta.entries()[..rows])
        .map(|(u, v)| (*u - *v).norm())
        .fold(0.0, f64::max);
    Ok(SolveReport { solution, residual_norm, condition_estimate: fact.condition()? })
}

/// [`solve_df`] restricted to periodic windows.
pub fn solve_df_periodic(w: &OrbitWindow, eta: &TangentWindow, params: &Params) -> Result<SolveReport> {
    if !w.geometry().is_periodic() {
        return Err(Error::GeometryMismatch("periodic window required".into()));
    }
    solve_df(w, eta, params)
}

/// Lower estimate of `‖DF(w)⁻¹‖∞`: the largest solution norm over every
/// coordinate impulse followed by `trials` random unit-phase right-hand
/// sides drawn from a seeded stream. Adding trials never lowers the value.
pub fn inverse_norm_estimate(w: &OrbitWindow, params: &Params, trials: usize, seed: u64) -> Result<f64> {
    let fact = DfFactorization::new(w, params)?;
    let g = w.geometry();
    let rows = residual_rows(g);
    let mut best: f64 = 0.0;
    let mut eta = OrbitWindow::zeros(g).into_entries();
    for i in 0..rows {
        for comp in 0..2 {
            let mut e = eta.clone();
            if comp == 0 {
                e[i].x = ONE;
            } else {
                e[i].y = ONE;
            }
            best = best.max(sup_norm(&fact.solve(&Window::new(g, e)?)?));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = |rng: &mut ChaCha8Rng| Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    for _ in 0..trials {
        for v in eta.iter_mut().take(rows) {
            v.x = phase(&mut rng);
            v.y = phase(&mut rng);
        }
        best = best.max(sup_norm(&fact.solve(&Window::new(g, eta.clone())?)?));
    }
    Ok(best)
}

/// Exact `‖DF(w)⁻¹‖∞` from the inverse matrix.
pub fn inverse_norm_exact(w: &OrbitWindow, params: &Params) -> Result<f64> {
    DfFactorization::new(w, params)?.inverse_norm()
}

/// Product of the Jacobians around a periodic orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Monodromy {
    /// `DH_b(z_{p−1}) ⋯ DH_b(z_0)`.
    pub matrix: Mat2,
    /// Largest modulus first.
    pub eigenvalues: [Complex64; 2],
    /// `|det − b^p|`.
    pub det_defect: f64,
}

pub fn monodromy(w: &OrbitWindow, params: &Params) -> Result<Monodromy> {
    let Geometry::Periodic { p } = w.geometry() else {
        return Err(Error::GeometryMismatch("monodromy needs a periodic window".into()));
    };
    let mut m = Mat2::identity();
    for z in w.entries() {
        m = dhenon(*z, params) * m;
    }
    let eigenvalues = eigenvalues_2x2(&m);
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let det_defect = (det - params.b.powu(p as u32)).norm();
    Ok(Monodromy { matrix: m, eigenvalues, det_defect })
}

/// Eigenvalues of a 2×2 matrix, largest modulus first. The small one is
/// recovered from the determinant to avoid cancellation.
pub fn eigenvalues_2x2(m: &Mat2) -> [Complex64; 2] {
    let tr = m[(0, 0)] + m[(1, 1)];
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let (p, q) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
    let big = if p.norm() >= q.norm() { p } else { q };
    let small = if big == ZERO { ZERO } else { det / big };
    [big, small]
}
