//! Points on `S^d ⊂ ℝ^{d+1}`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};

/// Allowed deviation of `‖x‖` from one.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// A unit vector in `ℝ^{d+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Wraps `coords`, checking `|‖x‖ − 1| ≤ 1e−12`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(domain("a sphere point needs at least two coordinates"));
        }
        check_unit(&coords)?;
        Ok(Self { coords })
    }

    /// Rescales a nonzero vector onto the sphere.
    pub fn normalized(mut coords: Vec<f64>) -> Result<Self> {
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(domain("cannot normalize a zero or non-finite vector"));
        }
        coords.iter_mut().for_each(|c| *c /= norm);
        Self::new(coords)
    }

    /// Point at colatitude `colat` and longitude `lon` on `S²`.
    pub fn from_angles(colat: f64, lon: f64) -> Self {
        Self {
            coords: vec![colat.sin() * lon.cos(), colat.sin() * lon.sin(), colat.cos()],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Sphere dimension `d`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(&self.coords, &other.coords)
    }
}

fn check_unit(coords: &[f64]) -> Result<()> {
    let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE || !norm.is_finite() {
        return Err(domain(format!("point has norm {norm}, not 1")));
    }
    Ok(())
}

/// Inner product over the shorter of the two slices; missing coordinates
/// count as zero.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Geodesic distance `arccos(x₁ᵀx₂)`, clamped against rounding.
pub fn geodesic(x1: &SpherePoint, x2: &SpherePoint) -> f64 {
    x1.dot(x2).clamp(-1.0, 1.0).acos()
}

/// Uniform point on `S^d`: a normalized vector of `d+1` standard normals.
pub fn sample_pole<R: Rng + ?Sized>(d: usize, rng: &mut R) -> SpherePoint {
    let mut coords = vec![0.0; d + 1];
    loop {
        coords.iter_mut().for_each(|c| *c = rng.sample(StandardNormal));
        let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm >= 1e-150 {
            coords.iter_mut().for_each(|c| *c /= norm);
            return SpherePoint { coords };
        }
    }
}

/// A list of points on `S^d` in one flat buffer.
///
/// Each point stores its leading `stored` coordinates; the remaining
/// `d + 1 − stored` are zero. Sections of high-dimensional spheres
/// therefore cost no more than points on `S²`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    stored: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Points on `S^d` with `stored` explicit coordinates each.
    pub fn new(dim: usize, stored: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(domain("sphere dimension must be at least 1"));
        }
        if stored == 0 || stored > dim + 1 {
            return Err(domain(format!("cannot store {stored} coordinates of a point on S^{dim}")));
        }
        if coords.len() % stored != 0 {
            return Err(domain("coordinate buffer length is not a multiple of the point width"));
        }
        for point in coords.chunks_exact(stored) {
            check_unit(point)?;
        }
        Ok(Self { dim, stored, coords })
    }

    pub fn from_points(points: &[SpherePoint]) -> Result<Self> {
        let dim = points
            .first()
            .map(SpherePoint::dim)
            .ok_or_else(|| domain("empty point list"))?;
        if points.iter().any(|p| p.dim() != dim) {
            return Err(domain("points lie on spheres of different dimensions"));
        }
        let coords = points.iter().flat_map(|p| p.coords.iter().copied()).collect();
        Ok(Self {
            dim,
            stored: dim + 1,
            coords,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of explicit coordinates per point.
    pub fn stored(&self) -> usize {
        self.stored
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.stored
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Explicit coordinates of point `i`.
    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i * self.stored..(i + 1) * self.stored]
    }

    pub fn raw(&self) -> &[f64] {
        &self.coords
    }

    /// Point `i` with all `d + 1` coordinates.
    pub fn point(&self, i: usize) -> SpherePoint {
        let mut coords = self.coords(i).to_vec();
        coords.resize(self.dim + 1, 0.0);
        SpherePoint { coords }
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.stored)
    }
}
