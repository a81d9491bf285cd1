use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite sample of points in `R^N`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    ambient_n: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(ambient_n: usize, coords: Vec<f64>) -> Result<Self> {
        if ambient_n == 0 {
            return Err(Error::domain("point cloud dimension must be at least 1"));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(ambient_n) {
            return Err(Error::domain(format!(
                "need a nonempty multiple of {ambient_n} coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("point cloud coordinates must be finite"));
        }
        Ok(PointCloud { ambient_n, coords })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::domain("points have mixed arity"));
        }
        PointCloud::new(n, points.concat())
    }

    /// Cartesian product of two clouds.
    pub fn product(&self, other: &PointCloud) -> Result<Self> {
        let mut coords =
            Vec::with_capacity(self.len() * other.len() * (self.ambient_n + other.ambient_n));
        for p in self.points() {
            for q in other.points() {
                coords.extend_from_slice(p);
                coords.extend_from_slice(q);
            }
        }
        PointCloud::new(self.ambient_n + other.ambient_n, coords)
    }

    pub fn ambient_n(&self) -> usize {
        self.ambient_n
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.ambient_n
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_n..(i + 1) * self.ambient_n]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.ambient_n)
    }

    /// Componentwise bounds `(lo, hi)`.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.ambient_n];
        let mut hi = vec![f64::NEG_INFINITY; self.ambient_n];
        for p in self.points() {
            for d in 0..self.ambient_n {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }
}
