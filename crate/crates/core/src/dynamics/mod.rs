//! The quadratic map `q(x) = x² + c`, the Hénon map `H_b`, and the
//! elementary objects built from them.

mod cycles;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::loci::radius_bound;

pub use cycles::{find_quad_cycles, polish_cycle, repelling_cycles_up_to, DEFAULT_MAX_PERIOD};

pub type Mat2 = Matrix2<Complex64>;

/// Backward steps discarded before inverse-iteration samples are kept.
pub const JULIA_BURN_IN: usize = 50;

/// A point `(c, b)` of parameter space, with the escape radius used to
/// detect runaway iterates and a default iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub c: Complex64,
    pub b: Complex64,
    pub escape_radius: f64,
    pub max_iter: usize,
}

impl Params {
    pub fn new(c: Complex64, b: Complex64) -> Self {
        Self {
            c,
            b,
            // strictly above R(c, b) so that points of J(H_b) never count as escaped
            escape_radius: 2.0 * radius_bound(c, b) + 1.0,
            max_iter: 500,
        }
    }

    pub fn real(c: f64, b: f64) -> Self {
        Self::new(Complex64::new(c, 0.0), Complex64::new(b, 0.0))
    }

    /// Same `c`, different `b`; the escape radius is recomputed.
    pub fn with_b(&self, b: Complex64) -> Self {
        Self { max_iter: self.max_iter, ..Self::new(self.c, b) }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(self.c) || !finite(self.b) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        if !(self.escape_radius >= radius_bound(self.c, self.b)) {
            return Err(Error::InvalidArgument(format!(
                "escape radius {} is below R(c, b) = {}",
                self.escape_radius,
                radius_bound(self.c, self.b)
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// A phase point `(x, y)` of ℂ².
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: Complex64,
    pub y: Complex64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 {
        x: Complex64::new(0.0, 0.0),
        y: Complex64::new(0.0, 0.0),
    };

    pub fn new(x: Complex64, y: Complex64) -> Self {
        Self { x, y }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), Complex64::new(y, 0.0))
    }

    /// Max of the two component moduli.
    pub fn norm(&self) -> f64 {
        self.x.norm().max(self.y.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x.re, self.x.im, self.y.re, self.y.im]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(Complex64::new(a[0], a[1]), Complex64::new(a[2], a[3]))
    }

    /// Matrix-vector product `m · (x, y)ᵀ`.
    pub fn apply(m: &Mat2, v: &Point2) -> Point2 {
        Point2::new(m[(0, 0)] * v.x + m[(0, 1)] * v.y, m[(1, 0)] * v.x + m[(1, 1)] * v.y)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl Serialize for Point2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        <[f64; 4]>::deserialize(d).map(Point2::from_array)
    }
}

/// A periodic cycle of `q`, stored in orbit order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadCycle {
    pub points: Vec<Complex64>,
    /// Exact (minimal) period.
    pub period: usize,
    /// `Π 2·x_i` around the cycle.
    pub multiplier: Complex64,
    pub repelling: bool,
}

impl QuadCycle {
    /// Builds a cycle from its points, computing the multiplier.
    pub fn from_points(points: Vec<Complex64>) -> Self {
        let multiplier = points.iter().map(|&x| dq(x)).product::<Complex64>();
        Self {
            period: points.len(),
            repelling: multiplier.norm() > 1.0,
            points,
            multiplier,
        }
    }

    /// `max_i |q(x_i) − x_{i+1}|`.
    pub fn residual(&self, c: Complex64) -> f64 {
        let p = self.points.len();
        (0..p)
            .map(|i| (quad_step(self.points[i], c) - self.points[(i + 1) % p]).norm())
            .fold(0.0, f64::max)
    }

    /// The same cycle started `k` steps later.
    pub fn rotated(&self, k: usize) -> Self {
        let mut points = self.points.clone();
        points.rotate_left(k % self.points.len());
        Self { points, ..self.clone() }
    }
}

pub fn quad_step(x: Complex64, c: Complex64) -> Complex64 {
    x * x + c
}

pub fn henon_step(z: Point2, params: &Params) -> Point2 {
    Point2::new(z.x * z.x + params.c - params.b * z.y, z.x)
}

/// `H_b⁻¹(x, y) = (y, (y² + c − x)/b)`.
pub fn henon_inverse(z: Point2, params: &Params) -> Result<Point2> {
    if params.b == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroJacobian);
    }
    Ok(Point2::new(z.y, (z.y * z.y + params.c - z.x) / params.b))
}

pub fn dq(x: Complex64) -> Complex64 {
    2.0 * x
}

/// `DH_b(x, y) = [[2x, −b], [1, 0]]`; its determinant is `b`.
pub fn dhenon(z: Point2, params: &Params) -> Mat2 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    Mat2::new(2.0 * z.x, -params.b, one, zero)
}

/// `g(x) = (q(x), x)`, which satisfies `H_0 ∘ g = g ∘ q`.
pub fn embed_g(x: Complex64, c: Complex64) -> Point2 {
    Point2::new(quad_step(x, c), x)
}

/// `|1 − √(1 − 4c)| < 1` with the principal square root.
pub fn in_main_cardioid(c: Complex64) -> bool {
    (1.0 - (1.0 - 4.0 * c).sqrt()).norm() < 1.0
}

/// The fixed point `(1 + √(1 − 4c))/2`, repelling for `c` in the main cardioid.
pub fn beta_fixed_point(c: Complex64) -> Complex64 {
    0.5 * (1.0 + (1.0 - 4.0 * c).sqrt())
}

/// Square root of `w` with argument in `[0, π)`.
///
/// This places the branch cut along the positive real axis of the radicand,
/// so that for `c = 0` the sign choices `+`/`−` are the binary digits of the
/// angle of a point on the unit circle.
pub fn upper_sqrt(w: Complex64) -> Complex64 {
    let r = w.sqrt();
    if r.im < 0.0 || (r.im == 0.0 && r.re < 0.0) {
        -r
    } else {
        r
    }
}

/// Square root of `w` with the branch cut along the ray from 0 through
/// `β − c`, normalised so that `β − c ↦ β`. For `c = 0` this is
/// [`upper_sqrt`]; for other `c` the two branches split `J(q)` at `±β`, as the
/// binary-angle coding does. Radicands within `1e−12` (relative) below the
/// cut are treated as lying on it.
pub fn coding_sqrt(w: Complex64, c: Complex64) -> Complex64 {
    let beta = beta_fixed_point(c);
    let d = beta - c;
    let u = d / d.norm();
    let r = (w / u).sqrt();
    let upper = if r.im.abs() <= 1e-12 * r.norm() { r.re >= 0.0 } else { r.im > 0.0 };
    let r = if upper { r } else { -r };
    beta / d.norm().sqrt() * r
}

/// `n` points of `J(q)` by backward iteration `x ← s·√(x − c)` with seeded
/// random signs, started at the repelling fixed point.
pub fn sample_julia_quad(c: Complex64, n: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = beta_fixed_point(c);
    let step = |x: Complex64, rng: &mut ChaCha8Rng| {
        let r = (x - c).sqrt();
        if rng.gen::<bool>() {
            r
        } else {
            -r
        }
    };
    for _ in 0..JULIA_BURN_IN {
        x = step(x, &mut rng);
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        x = step(x, &mut rng);
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cx(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quad_step_examples() {
        assert_eq!(quad_step(cx(0.0, 0.0), cx(0.0, 0.0)), cx(0.0, 0.0));
        assert_eq!(quad_step(cx(1.0, 0.0), cx(0.0, 0.0)), cx(1.0, 0.0));
        assert_eq!(quad_step(cx(0.0, 1.0), cx(-1.0, 0.0)), cx(-2.0, 0.0));
    }

    #[test]
    fn henon_step_examples() {
        assert_eq!(henon_step(Point2::real(1.0, 1.0), &Params::real(0.0, 0.0)), Point2::real(1.0, 1.0));
        assert_eq!(henon_step(Point2::real(0.0, 0.0), &Params::real(0.0, 0.1)), Point2::real(0.0, 0.0));
        assert_eq!(henon_step(Point2::real(-1.0, 0.0), &Params::real(-1.0, 0.0)), Point2::real(0.0, -1.0));
    }

    #[test]
    fn henon_inverse_examples() {
        let p = Params::real(0.0, 0.5);
        assert_eq!(henon_inverse(Point2::ZERO, &p).unwrap(), Point2::ZERO);
        assert!(matches!(
            henon_inverse(Point2::real(1.0, 1.0), &Params::real(0.0, 0.0)),
            Err(Error::ZeroJacobian)
        ));
        let p = Params::real(0.0, 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let z = Point2::new(
                cx(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
                cx(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)),
            );
            let back = henon_step(henon_inverse(z, &p).unwrap(), &p);
            assert!((back - z).norm() <= 1e-12, "{z:?}");
        }
    }

    #[test]
    fn jacobians() {
        assert_eq!(dq(cx(1.0, 0.0)), cx(2.0, 0.0));
        let m = dhenon(Point2::real(1.0, 1.0), &Params::real(0.0, 0.1));
        assert_eq!(m, Mat2::new(cx(2.0, 0.0), cx(-0.1, 0.0), cx(1.0, 0.0), cx(0.0, 0.0)));
        assert!((m.determinant() - cx(0.1, 0.0)).norm() < 1e-15);
        let m0 = dhenon(Point2::ZERO, &Params::real(0.0, 0.0));
        assert_eq!(m0.determinant(), cx(0.0, 0.0));
    }

    #[test]
    fn embedding_semiconjugacy() {
        assert_eq!(embed_g(cx(1.0, 0.0), cx(0.0, 0.0)), Point2::real(1.0, 1.0));
        assert_eq!(embed_g(cx(0.0, 0.0), cx(-1.0, 0.0)), Point2::real(-1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let r = rng.gen_range(0.0..2.0);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            let x = Complex64::from_polar(r, t);
            let c = cx(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let p = Params::new(c, cx(0.0, 0.0));
            assert_eq!(henon_step(embed_g(x, c), &p), embed_g(quad_step(x, c), c));
        }
    }

    #[test]
    fn cardioid_examples() {
        assert!(in_main_cardioid(cx(0.0, 0.0)));
        assert!(!in_main_cardioid(cx(0.3, 0.0)));
        assert!(in_main_cardioid(cx(-0.5, 0.0)));
        // |1 − √3.8| ≈ 0.949: −0.7 sits inside the cardioid, just short of −3/4
        assert!(in_main_cardioid(cx(-0.7, 0.0)));
        assert!(!in_main_cardioid(cx(-0.8, 0.0)));
    }

    #[test]
    fn julia_samples_on_unit_circle() {
        let xs = sample_julia_quad(cx(0.0, 0.0), 1000, 42);
        assert_eq!(xs.len(), 1000);
        assert!(xs.iter().all(|x| (x.norm() - 1.0).abs() <= 1e-9));
        assert!(sample_julia_quad(cx(0.0, 0.0), 0, 42).is_empty());
        let a = sample_julia_quad(cx(-0.1, 0.2), 64, 3);
        let b = sample_julia_quad(cx(-0.1, 0.2), 64, 3);
        assert_eq!(
            a.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect::<Vec<_>>(),
            b.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect::<Vec<_>>()
        );
    }

    #[test]
    fn upper_branch_codes_binary_angles() {
        let w = Complex64::from_polar(1.0, 4.0 * std::f64::consts::PI / 3.0);
        let r = upper_sqrt(w);
        assert!((r - Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)).norm() < 1e-15);
        assert_eq!(upper_sqrt(cx(1.0, 0.0)), cx(1.0, 0.0));
    }
}
