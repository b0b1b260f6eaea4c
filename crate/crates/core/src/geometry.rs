//! Half-spaces, polyhedra and the single-set operations the solvers are built from.
//!
//! Every half-space is stored with a unit normal, so the signed residual
//! `aᵀx − b` is also the signed Euclidean distance to the bounding hyperplane.

use nalgebra::DVector;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;

/// Default absolute tolerance on the residual used by [`classify_activity`].
pub const DEFAULT_ACTIVITY_TOL: f64 = 1e-9;

/// The set `{x : normalᵀx ≤ offset}` with `‖normal‖₂ = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    normal: Vector,
    offset: f64,
}

impl HalfSpace {
    /// Builds a half-space from an arbitrary (non-zero) normal, rescaling the
    /// normal to unit length and the offset by the same factor.
    pub fn new(raw_normal: Vector, raw_offset: f64) -> Result<Self> {
        if !raw_normal.iter().all(|v| v.is_finite()) || !raw_offset.is_finite() {
            return Err(Error::NonFinite("half-space data"));
        }
        let norm = raw_normal.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateHalfSpace);
        }
        Ok(Self {
            normal: raw_normal / norm,
            offset: raw_offset / norm,
        })
    }

    pub fn from_slice(raw_normal: &[f64], raw_offset: f64) -> Result<Self> {
        Self::new(Vector::from_column_slice(raw_normal), raw_offset)
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Signed residual `normalᵀx − offset`. Dimensions are not checked here;
    /// use [`violation`] at API boundaries.
    #[inline]
    pub fn residual(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    #[inline]
    pub fn contains(&self, x: &Vector) -> bool {
        self.residual(x) <= 0.0
    }

    /// Euclidean projection onto the half-space (unchecked dimensions).
    pub fn project(&self, x: &Vector) -> Vector {
        let r = self.residual(x);
        if r <= 0.0 {
            x.clone()
        } else {
            x - &self.normal * r
        }
    }

    /// The opposing half-space `{x : −normalᵀx ≤ −offset}`.
    pub fn negated(&self) -> Self {
        Self {
            normal: -&self.normal,
            offset: -self.offset,
        }
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Normalizing constructor for a half-space `raw_normalᵀx ≤ raw_offset`.
pub fn make_halfspace(raw_normal: &[f64], raw_offset: f64) -> Result<HalfSpace> {
    HalfSpace::from_slice(raw_normal, raw_offset)
}

/// Signed constraint residual; positive means `x` violates `h`.
pub fn violation(x: &Vector, h: &HalfSpace) -> Result<f64> {
    h.check_dim(x)?;
    Ok(h.residual(x))
}

/// Projection of `x` onto `h`. Feasible points are returned unchanged.
pub fn project_halfspace(x: &Vector, h: &HalfSpace) -> Result<Vector> {
    h.check_dim(x)?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("point"));
    }
    Ok(h.project(x))
}

/// Splits the hyperplane `raw_normalᵀx = raw_offset` into its `≤` half-space
/// and the negated `≥` companion.
pub fn equality_to_halfspaces(raw_normal: &[f64], raw_offset: f64) -> Result<(HalfSpace, HalfSpace)> {
    let le = HalfSpace::from_slice(raw_normal, raw_offset)?;
    let ge = le.negated();
    Ok((le, ge))
}

/// Ordered intersection of half-spaces. The order is the cyclic projection
/// schedule: iteration `m` visits half-space `m mod n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    halfspaces: Vec<HalfSpace>,
    dim: usize,
}

impl Polyhedron {
    pub fn new(halfspaces: Vec<HalfSpace>) -> Result<Self> {
        let dim = halfspaces.first().ok_or(Error::EmptyPolyhedron)?.dim();
        if dim == 0 {
            return Err(Error::DegenerateHalfSpace);
        }
        if let Some(h) = halfspaces.iter().find(|h| h.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: h.dim(),
            });
        }
        Ok(Self { halfspaces, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of half-spaces `n`.
    pub fn len(&self) -> usize {
        self.halfspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.halfspaces.is_empty()
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn get(&self, i: usize) -> &HalfSpace {
        &self.halfspaces[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, HalfSpace> {
        self.halfspaces.iter()
    }

    /// Largest residual over all half-spaces (≤ 0 iff `x` is feasible).
    pub fn max_violation(&self, x: &Vector) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.residual(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn check_point(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("point"));
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a Polyhedron {
    type Item = &'a HalfSpace;
    type IntoIter = std::slice::Iter<'a, HalfSpace>;

    fn into_iter(self) -> Self::IntoIter {
        self.halfspaces.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activity {
    Interior,
    Boundary,
    Exterior,
}

/// Per-half-space status of a point relative to a polyhedron.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityReport {
    pub statuses: Vec<Activity>,
    pub tol: f64,
}

impl ActivityReport {
    /// Indices on the boundary or outside (the active partition).
    pub fn active(&self) -> Vec<usize> {
        self.indices(|a| a != Activity::Interior)
    }

    /// Indices strictly inside (the inactive partition).
    pub fn inactive(&self) -> Vec<usize> {
        self.indices(|a| a == Activity::Interior)
    }

    pub fn count(&self, status: Activity) -> usize {
        self.statuses.iter().filter(|&&s| s == status).count()
    }

    fn indices(&self, pred: impl Fn(Activity) -> bool) -> Vec<usize> {
        self.statuses
            .iter()
            .enumerate()
            .filter(|(_, &s)| pred(s))
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn classify_activity(x: &Vector, poly: &Polyhedron, tol: f64) -> Result<ActivityReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidOptions(format!("activity tolerance must be positive, got {tol}")));
    }
    poly.check_point(x)?;
    let statuses = poly
        .iter()
        .map(|h| {
            let r = h.residual(x);
            if r > tol {
                Activity::Exterior
            } else if r < -tol {
                Activity::Interior
            } else {
                Activity::Boundary
            }
        })
        .collect();
    Ok(ActivityReport { statuses, tol })
}
