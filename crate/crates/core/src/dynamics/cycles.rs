//! All cycles of `q` of period dividing `p`.
//!
//! The `2^p` roots of `q^p(x) − x` are found simultaneously with the
//! Aberth–Ehrlich iteration, evaluating `q^p` by composition rather than
//! through its (badly conditioned) coefficients. Roots are then grouped into
//! cycles by following `q` and polished by a periodic Newton solve.

use num_complex::Complex64;

use super::{dq, quad_step, QuadCycle};
use crate::error::{Error, Result};
use crate::linsolve::solve_scalar_cyclic;

pub const DEFAULT_MAX_PERIOD: usize = 12;

const ESCAPE: f64 = 1e50;
const ABERTH_MAX_SWEEPS: usize = 2000;
const RESIDUAL_TOL: f64 = 1e-12;
const DISTINCT_TOL: f64 = 1e-8;

/// Newton quotient `f/f'` for `f(x) = q^p(x) − x`.
///
/// Once an iterate has escaped, `q^j(x) ≈ u_k^{2^{j−k}}` and the quotient
/// collapses to `u_k / (d_k · 2^{p−k})`, which avoids overflow.
fn newton_quotient(x: Complex64, c: Complex64, p: usize) -> Complex64 {
    let mut u = x;
    let mut d = Complex64::new(1.0, 0.0);
    for k in 0..p {
        if u.norm() > ESCAPE {
            return u / (d * 2f64.powi((p - k) as i32));
        }
        d *= 2.0 * u;
        u = u * u + c;
    }
    (u - x) / (d - 1.0)
}

fn aberth_roots(c: Complex64, p: usize) -> Result<Vec<Complex64>> {
    let n = 1usize << p;
    let radius = 0.5 * (1.0 + (1.0 + 4.0 * c.norm()).sqrt());
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * (k as f64 + 0.25) / n as f64 + 0.4 / n as f64;
            Complex64::from_polar(radius * 1.05, t)
        })
        .collect();
    let mut converged = vec![false; n];
    for _ in 0..ABERTH_MAX_SWEEPS {
        let mut all = true;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let ratio = newton_quotient(z[k], c, p);
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let mut w = ratio / (1.0 - ratio * s);
            if !w.is_finite() {
                w = ratio;
            }
            if !w.is_finite() {
                return Err(Error::RootFindingFailed {
                    period: p,
                    reason: "non-finite Aberth correction".into(),
                });
            }
            z[k] -= w;
            if w.norm() <= 1e-15 * (1.0 + z[k].norm()) {
                converged[k] = true;
            } else {
                all = false;
            }
        }
        if all {
            return Ok(z);
        }
    }
    // slow (e.g. multiple) roots may stall above machine precision; accept
    // them when the polynomial residual is already small
    let worst = z
        .iter()
        .map(|&x| {
            let mut u = x;
            for _ in 0..p {
                u = quad_step(u, c);
            }
            (u - x).norm()
        })
        .fold(0.0, f64::max);
    if worst <= 1e-10 {
        Ok(z)
    } else {
        Err(Error::RootFindingFailed {
            period: p,
            reason: format!("Aberth iteration stalled (worst residual {worst:e})"),
        })
    }
}

/// Periodic Newton refinement of a cycle: solves `x_{i+1} = q(x_i)` for all
/// `i` simultaneously. Steps that do not reduce the residual are rejected,
/// which leaves parabolic cycles at their root-finder accuracy.
pub fn polish_cycle(points: &mut [Complex64], c: Complex64) {
    let p = points.len();
    let residual = |xs: &[Complex64]| -> Vec<Complex64> {
        (0..p).map(|i| xs[(i + 1) % p] - quad_step(xs[i], c)).collect()
    };
    let sup = |r: &[Complex64]| r.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut r = residual(points);
    for _ in 0..20 {
        let before = sup(&r);
        if before == 0.0 {
            return;
        }
        let a: Vec<Complex64> = points.iter().map(|&x| dq(x)).collect();
        let rhs: Vec<Complex64> = r.iter().map(|&v| -v).collect();
        let Ok(delta) = solve_scalar_cyclic(&a, &rhs) else {
            return;
        };
        let trial: Vec<Complex64> = points.iter().zip(&delta).map(|(x, d)| x + d).collect();
        let r_trial = residual(&trial);
        if sup(&r_trial) < before {
            points.copy_from_slice(&trial);
            r = r_trial;
        } else {
            return;
        }
    }
}

fn nearest(roots: &[Complex64], x: Complex64) -> (usize, f64) {
    roots
        .iter()
        .enumerate()
        .map(|(i, r)| (i, (r - x).norm()))
        .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
}

fn canonical_start(points: &[Complex64]) -> usize {
    (0..points.len())
        .min_by(|&i, &j| {
            let (a, b) = (points[i], points[j]);
            a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
        })
        .unwrap_or(0)
}

/// All cycles of `q` whose exact period divides `period`.
///
/// Each cycle is polished to `max_i |q(x_i) − x_{i+1}| ≤ 1e−12`, rotated to
/// start at its lexicographically smallest point, and the list is sorted by
/// period and then by that point.
pub fn find_quad_cycles(c: Complex64, period: usize) -> Result<Vec<QuadCycle>> {
    if period == 0 || period > 20 {
        return Err(Error::InvalidArgument(format!(
            "period must be in 1..=20 (default cap {DEFAULT_MAX_PERIOD}), got {period}"
        )));
    }
    let mut roots = aberth_roots(c, period)?;
    // merge numerically coincident roots (multiple roots at parabolic parameters)
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut merged: Vec<Complex64> = Vec::with_capacity(roots.len());
    for r in roots {
        if merged.iter().all(|m| (m - r).norm() > 1e-6) {
            merged.push(r);
        }
    }
    let roots = merged;
    let snap_tol = 1e-6;

    let mut used = vec![false; roots.len()];
    let mut cycles = Vec::new();
    for start in 0..roots.len() {
        if used[start] {
            continue;
        }
        let mut idx = vec![start];
        let mut current = start;
        loop {
            let image = quad_step(roots[current], c);
            let (next, dist) = nearest(&roots, image);
            if dist > snap_tol * (1.0 + image.norm()) {
                return Err(Error::RootFindingFailed {
                    period,
                    reason: format!("image of a root is {dist:e} away from every root"),
                });
            }
            if next == start {
                break;
            }
            if idx.contains(&next) || idx.len() > period {
                return Err(Error::RootFindingFailed {
                    period,
                    reason: "root images do not close up into a cycle".into(),
                });
            }
            idx.push(next);
            current = next;
        }
        if period % idx.len() != 0 {
            return Err(Error::RootFindingFailed {
                period,
                reason: format!("found a cycle of period {} not dividing {period}", idx.len()),
            });
        }
        for &i in &idx {
            used[i] = true;
        }
        let mut points: Vec<Complex64> = idx.iter().map(|&i| roots[i]).collect();
        polish_cycle(&mut points, c);
        let k = canonical_start(&points);
        points.rotate_left(k);
        cycles.push(QuadCycle::from_points(points));
    }

    for (n, cyc) in cycles.iter().enumerate() {
        let res = cyc.residual(c);
        if !(res <= RESIDUAL_TOL) {
            return Err(Error::RootFindingFailed {
                period,
                reason: format!("cycle {n} has residual {res:e}"),
            });
        }
        for i in 0..cyc.points.len() {
            for j in 0..i {
                if (cyc.points[i] - cyc.points[j]).norm() <= DISTINCT_TOL {
                    return Err(Error::RootFindingFailed {
                        period,
                        reason: format!("cycle {n} has coincident points"),
                    });
                }
            }
        }
    }

    cycles.sort_by(|a, b| {
        a.period
            .cmp(&b.period)
            .then(a.points[0].re.total_cmp(&b.points[0].re))
            .then(a.points[0].im.total_cmp(&b.points[0].im))
    });
    Ok(cycles)
}

/// Repelling cycles of every exact period `1..=max_period`, in period order.
pub fn repelling_cycles_up_to(c: Complex64, max_period: usize) -> Result<Vec<QuadCycle>> {
    let mut out = Vec::new();
    for p in 1..=max_period {
        out.extend(
            find_quad_cycles(c, p)?
                .into_iter()
                .filter(|cyc| cyc.period == p && cyc.repelling),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Coefficients (low to high) of `q^p(x) − x`, by repeated polynomial
    /// squaring.
    fn iterate_coeffs(c: Complex64, p: usize) -> Vec<Complex64> {
        let mut poly = vec![cx(0.0, 0.0), cx(1.0, 0.0)];
        for _ in 0..p {
            let mut sq = vec![cx(0.0, 0.0); 2 * poly.len() - 1];
            for (i, a) in poly.iter().enumerate() {
                for (j, b) in poly.iter().enumerate() {
                    sq[i + j] += a * b;
                }
            }
            sq[0] += c;
            poly = sq;
        }
        poly[1] -= 1.0;
        poly
    }

    /// Independent oracle: eigenvalues of the companion matrix.
    fn companion_roots(c: Complex64, p: usize) -> Vec<Complex64> {
        let coeffs = iterate_coeffs(c, p);
        let n = coeffs.len() - 1;
        let lead = coeffs[n];
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = cx(1.0, 0.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -coeffs[i] / lead;
        }
        m.schur().eigenvalues().unwrap().iter().copied().collect()
    }

    #[test]
    fn fixed_points_c0() {
        let cycles = find_quad_cycles(cx(0.0, 0.0), 1).unwrap();
        assert_eq!(cycles.len(), 2);
        assert!(cycles[0].points[0].norm() < 1e-14);
        assert!(cycles[0].multiplier.norm() < 1e-13);
        assert!((cycles[1].points[0] - 1.0).norm() < 1e-14);
        assert!((cycles[1].multiplier - 2.0).norm() < 1e-13);
        assert!(cycles[1].repelling && !cycles[0].repelling);
    }

    #[test]
    fn two_cycle_c0() {
        let cycles = find_quad_cycles(cx(0.0, 0.0), 2).unwrap();
        let two: Vec<_> = cycles.iter().filter(|c| c.period == 2).collect();
        assert_eq!(two.len(), 1);
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        for z in &two[0].points {
            assert!((z - w).norm() < 1e-13 || (z - w.conj()).norm() < 1e-13);
        }
        assert!((two[0].multiplier.norm() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_points_c_minus_one() {
        let cycles = find_quad_cycles(cx(-1.0, 0.0), 1).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let g = cycles.iter().find(|c| (c.points[0] - golden).norm() < 1e-13).unwrap();
        assert!((g.multiplier.norm() - 2.0 * golden).abs() < 1e-12);
        assert!(cycles.iter().any(|c| (c.points[0] - (1.0 - 5f64.sqrt()) / 2.0).norm() < 1e-13));
    }

    #[test]
    fn root_sets_match_companion_oracle() {
        for &(c, p) in &[(cx(-0.1, 0.0), 3usize), (cx(0.1, 0.2), 4), (cx(-1.0, 0.0), 2), (cx(0.25, 0.0), 1)] {
            let found: Vec<Complex64> = find_quad_cycles(c, p)
                .unwrap()
                .iter()
                .flat_map(|cy| cy.points.clone())
                .collect();
            for r in companion_roots(c, p) {
                let d = found.iter().map(|f| (f - r).norm()).fold(f64::INFINITY, f64::min);
                assert!(d < 1e-6, "c={c} p={p} root {r} missed by {d:e}");
            }
        }
    }

    #[test]
    fn counts_residuals_and_unit_circle_multipliers() {
        for p in 1..=8 {
            let cycles = find_quad_cycles(cx(0.0, 0.0), p).unwrap();
            let n: usize = cycles.iter().map(|c| c.period).sum();
            assert_eq!(n, 1 << p);
            for cyc in &cycles {
                assert!(cyc.residual(cx(0.0, 0.0)) <= 1e-12);
                if cyc.repelling {
                    let expected = 2f64.powi(cyc.period as i32);
                    assert!((cyc.multiplier.norm() - expected).abs() <= 1e-12 * expected);
                }
            }
        }
    }

    #[test]
    fn horseshoe_parameter_cycles() {
        let cycles = find_quad_cycles(cx(-6.0, 0.0), 5).unwrap();
        let n: usize = cycles.iter().map(|c| c.period).sum();
        assert_eq!(n, 32);
        assert!(cycles.iter().all(|c| c.repelling && c.residual(cx(-6.0, 0.0)) <= 1e-12));
    }

    #[test]
    fn parabolic_double_root_merged() {
        let cycles = find_quad_cycles(cx(0.25, 0.0), 1).unwrap();
        assert_eq!(cycles.len(), 1);
        assert!((cycles[0].points[0] - 0.5).norm() < 1e-6);
    }

    #[test]
    fn rejects_bad_period() {
        assert!(find_quad_cycles(cx(0.0, 0.0), 0).is_err());
    }
}
