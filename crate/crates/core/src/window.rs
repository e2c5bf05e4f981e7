//! Finite stand-ins for bounded bi-infinite sequences.
//!
//! A [`Window`] is either *periodic* (`p` entries, index `i` wraps mod `p`,
//! which represents a cycle exactly) or *pinned* (`m + n + 1` entries for the
//! indices `−m..=n`). On a pinned window the residual has `m + n` meaningful
//! entries, `F_i = z_{i+1} − H_b(z_i)` for `i < n`; the slot for `i = n` is
//! kept and always zero. Linear solves on pinned windows hold the `x`
//! component of the last entry and the `y` component of the first entry
//! fixed, i.e. the unstable coordinate is pinned in the future and the
//! stable one in the past.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{dhenon, henon_step, Params, Point2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Periodic { p: usize },
    Pinned { m: usize, n: usize },
}

impl Geometry {
    pub fn len(&self) -> usize {
        match *self {
            Geometry::Periodic { p } => p,
            Geometry::Pinned { m, n } => m + n + 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position in the entry list of sequence index 0.
    pub fn origin(&self) -> usize {
        match *self {
            Geometry::Periodic { .. } => 0,
            Geometry::Pinned { m, .. } => m,
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Geometry::Periodic { .. })
    }
}

/// A window of a sequence with entries of type `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWindow<T>", bound(deserialize = "T: Deserialize<'de>"))]
pub struct Window<T> {
    geometry: Geometry,
    entries: Vec<T>,
}

#[derive(Deserialize)]
struct RawWindow<T> {
    geometry: Geometry,
    entries: Vec<T>,
}

impl<T> TryFrom<RawWindow<T>> for Window<T> {
    type Error = Error;
    fn try_from(raw: RawWindow<T>) -> Result<Self> {
        Window::new(raw.geometry, raw.entries)
    }
}

/// Sequence in ℂ² (orbits of `H_b`).
pub type OrbitWindow = Window<Point2>;
/// Tangent vectors / residuals along an [`OrbitWindow`].
pub type TangentWindow = Window<Point2>;
/// Sequence in ℂ (orbits of `q`, or the scalar form used by the fixed-point
/// operators).
pub type ScalarWindow = Window<Complex64>;

impl<T> Window<T> {
    pub fn new(geometry: Geometry, entries: Vec<T>) -> Result<Self> {
        match geometry {
            Geometry::Periodic { p: 0 } => return Err(Error::EmptyWindow),
            g if g.len() != entries.len() => {
                return Err(Error::GeometryMismatch(format!(
                    "{g:?} needs {} entries, got {}",
                    g.len(),
                    entries.len()
                )))
            }
            _ => {}
        }
        Ok(Self { geometry, entries })
    }

    pub fn periodic(entries: Vec<T>) -> Result<Self> {
        Self::new(Geometry::Periodic { p: entries.len() }, entries)
    }

    pub fn pinned(m: usize, n: usize, entries: Vec<T>) -> Result<Self> {
        Self::new(Geometry::Pinned { m, n }, entries)
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry at sequence index 0 (the projection `π₀`).
    pub fn at_origin(&self) -> &T {
        &self.entries[self.geometry.origin()]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Window<U> {
        Window {
            geometry: self.geometry,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn same_shape<U>(&self, other: &Window<U>) -> Result<()> {
        if self.geometry == other.geometry {
            Ok(())
        } else {
            Err(Error::GeometryMismatch(format!(
                "{:?} vs {:?}",
                self.geometry, other.geometry
            )))
        }
    }
}

impl<T: Clone> Window<T> {
    /// The shift `(σz)_i = z_{i+1}`.
    ///
    /// Periodic windows rotate by one. Pinned windows keep their entries and
    /// move the origin one step right, `Pinned(m, n) → Pinned(m + 1, n − 1)`.
    pub fn shift(&self) -> Result<Self> {
        match self.geometry {
            Geometry::Periodic { .. } => {
                let mut entries = self.entries.clone();
                entries.rotate_left(1);
                Ok(Self { geometry: self.geometry, entries })
            }
            Geometry::Pinned { n: 0, .. } => Err(Error::EmptyWindow),
            Geometry::Pinned { m, n } => Ok(Self {
                geometry: Geometry::Pinned { m: m + 1, n: n - 1 },
                entries: self.entries.clone(),
            }),
        }
    }

    pub fn shift_by(&self, k: usize) -> Result<Self> {
        let mut w = self.clone();
        for _ in 0..k {
            w = w.shift()?;
        }
        Ok(w)
    }
}

/// Entrywise norm used by [`sup_norm`].
pub trait EntryNorm {
    fn entry_norm(&self) -> f64;
}

impl EntryNorm for Point2 {
    fn entry_norm(&self) -> f64 {
        self.norm()
    }
}

impl EntryNorm for Complex64 {
    fn entry_norm(&self) -> f64 {
        self.norm()
    }
}

/// `max_i ‖w_i‖`, with the ℂ² norm being the max of the component moduli.
pub fn sup_norm<T: EntryNorm>(w: &Window<T>) -> f64 {
    w.entries().iter().map(EntryNorm::entry_norm).fold(0.0, f64::max)
}

/// Sup distance between two windows of the same shape.
pub fn sup_distance(a: &OrbitWindow, b: &OrbitWindow) -> Result<f64> {
    a.same_shape(b)?;
    Ok(a.entries()
        .iter()
        .zip(b.entries())
        .map(|(u, v)| (*u - *v).norm())
        .fold(0.0, f64::max))
}

impl OrbitWindow {
    pub fn zeros(geometry: Geometry) -> Self {
        Window { geometry, entries: vec![Point2::ZERO; geometry.len()] }
    }

    /// First components `x_i` of the entries.
    pub fn first_components(&self) -> ScalarWindow {
        self.map(|z| z.x)
    }

    pub fn add(&self, other: &OrbitWindow) -> Result<OrbitWindow> {
        self.same_shape(other)?;
        Ok(Window {
            geometry: self.geometry,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| *a + *b).collect(),
        })
    }

    pub fn sub(&self, other: &OrbitWindow) -> Result<OrbitWindow> {
        self.same_shape(other)?;
        Ok(Window {
            geometry: self.geometry,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| *a - *b).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> OrbitWindow {
        self.map(|z| *z * s)
    }
}

/// Number of meaningful residual rows.
pub(crate) fn residual_rows(g: Geometry) -> usize {
    match g {
        Geometry::Periodic { p } => p,
        Geometry::Pinned { m, n } => m + n,
    }
}

/// `F(z)_i = z_{i+1} − H_b(z_i)`.
pub fn residual_f(w: &OrbitWindow, params: &Params) -> Result<TangentWindow> {
    let g = w.geometry();
    if let Geometry::Pinned { m: 0, n: 0 } = g {
        return Err(Error::EmptyWindow);
    }
    let len = w.len();
    let mut out = vec![Point2::ZERO; len];
    for (i, slot) in out.iter_mut().enumerate().take(residual_rows(g)) {
        *slot = w.entries[(i + 1) % len] - henon_step(w.entries[i], params);
    }
    Window::new(g, out)
}

/// `(DF(z)ξ)_i = ξ_{i+1} − DH_b(z_i) ξ_i`, with the same wrap/truncation
/// rule as [`residual_f`].
pub fn apply_df(w: &OrbitWindow, xi: &TangentWindow, params: &Params) -> Result<TangentWindow> {
    w.same_shape(xi)?;
    let g = w.geometry();
    let len = w.len();
    let mut out = vec![Point2::ZERO; len];
    for (i, slot) in out.iter_mut().enumerate().take(residual_rows(g)) {
        let a = dhenon(w.entries[i], params);
        *slot = xi.entries[(i + 1) % len] - Point2::apply(&a, &xi.entries[i]);
    }
    Window::new(g, out)
}
