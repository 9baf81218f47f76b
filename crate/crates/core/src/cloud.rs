//! Finite point sets and the shape descriptors that generate them.
//!
//! Every downstream computation certifies statements about a finite
//! sample, so point enumeration must be deterministic: the same shape
//! descriptor always yields the same cloud in the same order.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::{cantor_endpoint, MAX_CANTOR_LEVEL};

/// Largest Cantor level materialized as a cloud (2^20 points).
pub const MAX_CANTOR_CLOUD_LEVEL: u32 = 20;

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("point {index} has {got} coordinates, expected {expected}")]
    DimensionMismatch { index: usize, got: usize, expected: usize },
    #[error("point {index} duplicates an earlier point")]
    DuplicatePoint { index: usize },
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("points-per-axis must be >= 2, got {got}")]
    TooFewPointsPerAxis { got: usize },
    #[error("cantor level {level} exceeds the materialization cap {max}")]
    LevelTooLarge { level: u32, max: u32 },
    #[error("ambient dimension must be >= 1")]
    ZeroDimension,
    #[error("axis {axis} has empty extent (hi <= lo)")]
    BadBounds { axis: usize },
    #[error("radius must be positive, got {got}")]
    BadRadius { got: f64 },
    #[error("shape enumerates {got} points, over the cap {max}")]
    TooManyPoints { got: u128, max: u64 },
}

/// Largest cloud any shape may enumerate (2^22 points).
pub const MAX_CLOUD_POINTS: u64 = 1 << 22;

/// Declarative description of a finite point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    /// Uniform lattice over an axis-aligned box, endpoints included.
    Grid { bounds: Vec<[f64; 2]>, points_per_axis: usize },
    /// Lattice over `[-radius, radius]^dim` restricted to the closed
    /// Euclidean ball of the given radius.
    BallGrid { radius: f64, points_per_axis: usize, dim: usize },
    /// The `2^level` left endpoints of the level-`level` Cantor intervals.
    Cantor { level: u32 },
    /// An explicit list of points.
    Explicit { dim: usize, points: Vec<Vec<f64>> },
}

impl ShapeSpec {
    pub fn dim(&self) -> usize {
        match self {
            ShapeSpec::Grid { bounds, .. } => bounds.len(),
            ShapeSpec::BallGrid { dim, .. } => *dim,
            ShapeSpec::Cantor { .. } => 1,
            ShapeSpec::Explicit { dim, .. } => *dim,
        }
    }

    /// Short provenance tag used in cover and estimate ids.
    pub fn descriptor(&self) -> String {
        match self {
            ShapeSpec::Grid { bounds, .. } => format!("box{}d", bounds.len()),
            ShapeSpec::BallGrid { radius, dim, .. } => format!("ball{dim}d:r={radius}"),
            ShapeSpec::Cantor { level } => format!("cantor:{level}"),
            ShapeSpec::Explicit { .. } => "explicit".to_string(),
        }
    }
}

/// Immutable finite sample of a region of R^n.
///
/// Coordinates are stored flat; `point(i)` views the `i`-th vector.
/// Points are pairwise distinct by construction (exact equality, with
/// `-0.0` identified with `0.0`).
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    label: String,
}

impl PointCloud {
    pub fn new(dim: usize, label: &str, points: Vec<Vec<f64>>) -> Result<Self, CloudError> {
        if dim == 0 {
            return Err(CloudError::ZeroDimension);
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        let mut seen = std::collections::HashSet::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(CloudError::DimensionMismatch { index, got: p.len(), expected: dim });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(CloudError::NonFinite { index });
            }
            // normalize -0.0 so duplicate detection is by numeric equality
            let key: Vec<u64> = p.iter().map(|c| (c + 0.0).to_bits()).collect();
            if !seen.insert(key) {
                return Err(CloudError::DuplicatePoint { index });
            }
            coords.extend_from_slice(p);
        }
        Ok(PointCloud { coords, dim, label: label.to_string() })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Provenance id carried by fields and envelopes built on this cloud.
    pub fn id(&self) -> String {
        format!("{}:{}d:{}", self.label, self.dim, self.len())
    }
}

/// Deterministically enumerates the point set described by `shape`.
pub fn build_point_set(shape: &ShapeSpec) -> Result<PointCloud, CloudError> {
    match shape {
        ShapeSpec::Grid { bounds, points_per_axis } => {
            grid_cloud(bounds, *points_per_axis, "grid")
        }
        ShapeSpec::BallGrid { radius, points_per_axis, dim } => {
            if *radius <= 0.0 || !radius.is_finite() {
                return Err(CloudError::BadRadius { got: *radius });
            }
            let bounds = vec![[-radius, *radius]; *dim];
            let cube = grid_cloud(&bounds, *points_per_axis, "ball")?;
            let r2 = radius * radius;
            let points: Vec<Vec<f64>> = cube
                .iter_points()
                .filter(|p| p.iter().map(|c| c * c).sum::<f64>() <= r2)
                .map(|p| p.to_vec())
                .collect();
            PointCloud::new(*dim, "ball", points)
        }
        ShapeSpec::Cantor { level } => {
            if *level > MAX_CANTOR_CLOUD_LEVEL || *level > MAX_CANTOR_LEVEL {
                return Err(CloudError::LevelTooLarge { level: *level, max: MAX_CANTOR_CLOUD_LEVEL });
            }
            let points: Vec<Vec<f64>> =
                (0..1u64 << level).map(|i| vec![cantor_endpoint(*level, i)]).collect();
            PointCloud::new(1, "cantor", points)
        }
        ShapeSpec::Explicit { dim, points } => PointCloud::new(*dim, "custom", points.clone()),
    }
}

fn grid_cloud(bounds: &[[f64; 2]], ppa: usize, label: &str) -> Result<PointCloud, CloudError> {
    if bounds.is_empty() {
        return Err(CloudError::ZeroDimension);
    }
    if ppa < 2 {
        return Err(CloudError::TooFewPointsPerAxis { got: ppa });
    }
    for (axis, b) in bounds.iter().enumerate() {
        if !(b[0] < b[1]) || !b[0].is_finite() || !b[1].is_finite() {
            return Err(CloudError::BadBounds { axis });
        }
    }
    let dim = bounds.len();
    let axis_pos = |b: &[f64; 2], i: usize| -> f64 {
        if i == ppa - 1 {
            b[1]
        } else {
            b[0] + i as f64 * (b[1] - b[0]) / (ppa - 1) as f64
        }
    };
    let requested = (ppa as u128).pow(dim as u32);
    if requested > MAX_CLOUD_POINTS as u128 {
        return Err(CloudError::TooManyPoints { got: requested, max: MAX_CLOUD_POINTS });
    }
    let total = ppa.pow(dim as u32);
    let mut points = Vec::with_capacity(total);
    // first axis varies slowest: lexicographic enumeration
    for flat in 0..total {
        let mut idx = flat;
        let mut p = vec![0.0; dim];
        for axis in (0..dim).rev() {
            p[axis] = axis_pos(&bounds[axis], idx % ppa);
            idx /= ppa;
        }
        points.push(p);
    }
    PointCloud::new(dim, label, points)
}
