//! Metric specifications, evaluation, and metric-axiom validation.
//!
//! All distance evaluation in the crate goes through [`MetricSpec`]:
//! either directly on coordinate vectors (the analytic kinds) or through
//! a [`BoundMetric`] tied to a specific [`PointCloud`] (required for the
//! table and Cantor-pullback kinds, whose distances are defined per rank
//! rather than per coordinate).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::{cantor_endpoint, MAX_CANTOR_LEVEL};
use crate::cloud::PointCloud;

/// Clouds up to this size get the full O(m^3) triangle scan.
pub const EXHAUSTIVE_TRIPLE_CAP: usize = 200;
/// Number of seeded random triples sampled above the cap.
pub const SAMPLED_TRIPLES: u64 = 1_000_000;
/// Full pairwise matrices are precomputed up to this cloud size.
const MATRIX_CAP: usize = 2048;
/// Seed for the sampled triangle scan; fixed for reproducibility.
const SAMPLE_SEED: u64 = 0x4841_5553;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("scale factor must be positive, got {got}")]
    BadScale { got: f64 },
    #[error("snowflake exponent must be positive, got {got}")]
    BadExponent { got: f64 },
    #[error("pullback level {level} exceeds {max}")]
    PullbackLevelTooLarge { level: u32, max: u32 },
    #[error("cloud has {cloud} points but pullback level {level} only enumerates {capacity}")]
    PullbackCapacity { cloud: usize, level: u32, capacity: u64 },
    #[error("table is {rows}x{cols}, expected square of side {expected}")]
    TableShape { rows: usize, cols: usize, expected: usize },
    #[error("table is not symmetric at ({i},{j})")]
    TableAsymmetric { i: usize, j: usize },
    #[error("table diagonal entry {i} is {got}, expected 0")]
    TableDiagonal { i: usize, got: f64 },
    #[error("table entry ({i},{j}) is negative or non-finite")]
    TableEntry { i: usize, j: usize },
    #[error("points have dimensions {got_x} and {got_y}, metric expects {expected}")]
    DimensionMismatch { got_x: usize, got_y: usize, expected: usize },
    #[error("{kind} metric evaluates only on points of its bound cloud")]
    RequiresCloud { kind: &'static str },
    #[error("point is not a member of the bound cloud")]
    PointNotInCloud,
    #[error("cloud is empty")]
    EmptyCloud,
    #[error("tolerance must be >= 0, got {got}")]
    BadTolerance { got: f64 },
}

/// Declarative description of a metric on a point set.
///
/// `Snowflake` admits any positive exponent so that non-metric powers
/// (`alpha > 1`) can be constructed and then flagged by
/// [`validate_metric`]; exponents in `(0, 1]` always satisfy the axioms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpec {
    Euclidean,
    Scaled { c: f64 },
    Snowflake { alpha: f64 },
    CantorPullback { level: u32 },
    Table { matrix: Vec<Vec<f64>> },
}

impl MetricSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MetricSpec::Euclidean => "euclidean",
            MetricSpec::Scaled { .. } => "scaled",
            MetricSpec::Snowflake { .. } => "snowflake",
            MetricSpec::CantorPullback { .. } => "cantor_pullback",
            MetricSpec::Table { .. } => "table",
        }
    }

    /// True for kinds whose distance is a function of the coordinates
    /// alone (evaluable off-cloud).
    pub fn is_analytic(&self) -> bool {
        matches!(
            self,
            MetricSpec::Euclidean | MetricSpec::Scaled { .. } | MetricSpec::Snowflake { .. }
        )
    }

    /// Checks the declarative parameter invariants (positivity, table
    /// shape/symmetry/zero diagonal). Metric axioms are checked
    /// separately by [`validate_metric`].
    pub fn validate_params(&self) -> Result<(), MetricError> {
        match self {
            MetricSpec::Euclidean => Ok(()),
            MetricSpec::Scaled { c } => {
                if *c > 0.0 && c.is_finite() {
                    Ok(())
                } else {
                    Err(MetricError::BadScale { got: *c })
                }
            }
            MetricSpec::Snowflake { alpha } => {
                if *alpha > 0.0 && alpha.is_finite() {
                    Ok(())
                } else {
                    Err(MetricError::BadExponent { got: *alpha })
                }
            }
            MetricSpec::CantorPullback { level } => {
                if *level > MAX_CANTOR_LEVEL {
                    Err(MetricError::PullbackLevelTooLarge { level: *level, max: MAX_CANTOR_LEVEL })
                } else {
                    Ok(())
                }
            }
            MetricSpec::Table { matrix } => {
                let n = matrix.len();
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != n {
                        return Err(MetricError::TableShape { rows: n, cols: row.len(), expected: n });
                    }
                    for (j, v) in row.iter().enumerate() {
                        if !v.is_finite() || *v < 0.0 {
                            return Err(MetricError::TableEntry { i, j });
                        }
                    }
                }
                for i in 0..n {
                    if matrix[i][i] != 0.0 {
                        return Err(MetricError::TableDiagonal { i, got: matrix[i][i] });
                    }
                    for j in (i + 1)..n {
                        if matrix[i][j] != matrix[j][i] {
                            return Err(MetricError::TableAsymmetric { i, j });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Distance between two coordinate vectors for the analytic kinds.
    ///
    /// Table and pullback metrics need a bound cloud; use [`MetricSpec::bind`].
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
        if x.len() != y.len() {
            return Err(MetricError::DimensionMismatch {
                got_x: x.len(),
                got_y: y.len(),
                expected: x.len(),
            });
        }
        self.validate_params()?;
        match self {
            MetricSpec::Euclidean => Ok(euclidean(x, y)),
            MetricSpec::Scaled { c } => Ok(c * euclidean(x, y)),
            MetricSpec::Snowflake { alpha } => Ok(euclidean(x, y).powf(*alpha)),
            other => Err(MetricError::RequiresCloud { kind: other.kind_name() }),
        }
    }

    /// Binds the spec to a cloud so distances can be looked up by index.
    pub fn bind<'a>(&'a self, cloud: &'a PointCloud) -> Result<BoundMetric<'a>, MetricError> {
        self.validate_params()?;
        let ranks = match self {
            MetricSpec::CantorPullback { level } => {
                let capacity = if *level >= 63 { u64::MAX } else { 1u64 << level };
                if cloud.len() as u64 > capacity {
                    return Err(MetricError::PullbackCapacity {
                        cloud: cloud.len(),
                        level: *level,
                        capacity,
                    });
                }
                Some((0..cloud.len()).map(|i| cantor_endpoint(*level, i as u64)).collect())
            }
            MetricSpec::Table { matrix } => {
                if matrix.len() != cloud.len() {
                    return Err(MetricError::TableShape {
                        rows: matrix.len(),
                        cols: matrix.first().map_or(0, Vec::len),
                        expected: cloud.len(),
                    });
                }
                None
            }
            _ => None,
        };
        let index = if self.is_analytic() { None } else { Some(point_index(cloud)) };
        Ok(BoundMetric { spec: self, cloud, ranks, index })
    }
}

/// Transport of a Euclidean diameter through an analytic metric.
///
/// Valid because scaling and concave powers are monotone: the supremum
/// of pairwise distances maps to the transformed supremum.
pub fn transported_diameter(metric: &MetricSpec, euclidean_diam: f64) -> Result<f64, MetricError> {
    match metric {
        MetricSpec::Euclidean => Ok(euclidean_diam),
        MetricSpec::Scaled { c } => Ok(c * euclidean_diam),
        MetricSpec::Snowflake { alpha } => Ok(euclidean_diam.powf(*alpha)),
        other => Err(MetricError::RequiresCloud { kind: other.kind_name() }),
    }
}

fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn point_index(cloud: &PointCloud) -> std::collections::HashMap<Vec<u64>, usize> {
    cloud
        .iter_points()
        .enumerate()
        .map(|(i, p)| (p.iter().map(|c| (c + 0.0).to_bits()).collect(), i))
        .collect()
}

/// A metric spec attached to a concrete cloud.
pub struct BoundMetric<'a> {
    spec: &'a MetricSpec,
    cloud: &'a PointCloud,
    ranks: Option<Vec<f64>>,
    index: Option<std::collections::HashMap<Vec<u64>, usize>>,
}

impl<'a> BoundMetric<'a> {
    pub fn spec(&self) -> &MetricSpec {
        self.spec
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    /// Distance between cloud points `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match self.spec {
            MetricSpec::Euclidean => euclidean(self.cloud.point(i), self.cloud.point(j)),
            MetricSpec::Scaled { c } => c * euclidean(self.cloud.point(i), self.cloud.point(j)),
            MetricSpec::Snowflake { alpha } => {
                euclidean(self.cloud.point(i), self.cloud.point(j)).powf(*alpha)
            }
            MetricSpec::CantorPullback { .. } => {
                let r = self.ranks.as_ref().expect("pullback ranks present");
                (r[i] - r[j]).abs()
            }
            MetricSpec::Table { matrix } => matrix[i][j],
        }
    }

    /// Distance between arbitrary coordinate vectors. For table and
    /// pullback kinds both points must be members of the bound cloud.
    pub fn dist_points(&self, x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
        if self.spec.is_analytic() {
            return self.spec.eval(x, y);
        }
        let idx = self.index.as_ref().expect("index present for non-analytic kinds");
        let key = |p: &[f64]| -> Vec<u64> { p.iter().map(|c| (c + 0.0).to_bits()).collect() };
        let i = *idx.get(&key(x)).ok_or(MetricError::PointNotInCloud)?;
        let j = *idx.get(&key(y)).ok_or(MetricError::PointNotInCloud)?;
        Ok(self.dist(i, j))
    }

    /// Full pairwise distance matrix.
    pub fn matrix(&self) -> PairwiseDistances {
        let n = self.cloud.len();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.dist(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        PairwiseDistances { n, data }
    }
}

/// Dense symmetric pairwise distance storage.
#[derive(Debug, Clone)]
pub struct PairwiseDistances {
    n: usize,
    data: Vec<f64>,
}

impl PairwiseDistances {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Worst observed violations of the metric axioms on a cloud.
///
/// Violations are signed: the triangle field is
/// `max over triples of d(x,z) - d(x,y) - d(y,z)`, so any value `<= tol`
/// means the inequality holds up to tolerance. `min_offdiagonal` is
/// `None` for single-point clouds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricReport {
    pub symmetry_violation: f64,
    pub triangle_violation: f64,
    pub identity_violation: f64,
    pub min_offdiagonal: Option<f64>,
    pub pairs_checked: u64,
    pub triples_checked: u64,
    pub exhaustive_triples: bool,
    pub tolerance: f64,
    pub pass: bool,
}

/// Evaluates the distance for analytic metric kinds.
pub fn eval_metric(spec: &MetricSpec, x: &[f64], y: &[f64]) -> Result<f64, MetricError> {
    spec.eval(x, y)
}

/// Exhaustively checks symmetry and identity of indiscernibles on all
/// pairs, and the triangle inequality on all triples when the cloud has
/// at most [`EXHAUSTIVE_TRIPLE_CAP`] points; larger clouds get a seeded
/// random sample of [`SAMPLED_TRIPLES`] triples.
pub fn validate_metric(
    spec: &MetricSpec,
    cloud: &PointCloud,
    tol: f64,
) -> Result<MetricReport, MetricError> {
    if cloud.is_empty() {
        return Err(MetricError::EmptyCloud);
    }
    if !(tol >= 0.0) {
        return Err(MetricError::BadTolerance { got: tol });
    }
    let bound = spec.bind(cloud)?;
    let m = cloud.len();

    let matrix = if m <= MATRIX_CAP { Some(bound.matrix()) } else { None };
    let d = |i: usize, j: usize| -> f64 {
        match &matrix {
            Some(mx) => mx.get(i, j),
            None => bound.dist(i, j),
        }
    };

    let mut identity_violation: f64 = 0.0;
    for i in 0..m {
        identity_violation = identity_violation.max(bound.dist(i, i));
    }

    let mut symmetry_violation: f64 = 0.0;
    let mut min_offdiagonal = f64::INFINITY;
    for i in 0..m {
        for j in (i + 1)..m {
            // evaluate both orders directly; the matrix is symmetric by storage
            let dij = bound.dist(i, j);
            let dji = bound.dist(j, i);
            symmetry_violation = symmetry_violation.max((dij - dji).abs());
            min_offdiagonal = min_offdiagonal.min(dij.min(dji));
        }
    }
    let pairs_checked = (m as u64) * (m as u64 - 1) / 2 + m as u64;

    let mut triangle_violation = f64::NEG_INFINITY;
    let mut triples_checked = 0u64;
    let exhaustive = m <= EXHAUSTIVE_TRIPLE_CAP;
    if m < 3 {
        triangle_violation = 0.0;
    } else if exhaustive {
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    let (a, b, c) = (d(i, j), d(j, k), d(i, k));
                    // three rotations of the unordered triple
                    triangle_violation = triangle_violation
                        .max(c - a - b)
                        .max(a - c - b)
                        .max(b - a - c);
                    triples_checked += 1;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED);
        for _ in 0..SAMPLED_TRIPLES {
            let i = rng.gen_range(0..m);
            let j = rng.gen_range(0..m);
            let k = rng.gen_range(0..m);
            if i == j || j == k || i == k {
                continue;
            }
            triangle_violation = triangle_violation.max(d(i, k) - d(i, j) - d(j, k));
            triples_checked += 1;
        }
        triangle_violation = triangle_violation.max(0.0);
    }

    let min_off = if m >= 2 { Some(min_offdiagonal) } else { None };
    let pass = symmetry_violation <= tol
        && triangle_violation <= tol
        && identity_violation <= tol
        && min_off.is_none_or(|v| v > tol);

    Ok(MetricReport {
        symmetry_violation,
        triangle_violation,
        identity_violation,
        min_offdiagonal: min_off,
        pairs_checked,
        triples_checked,
        exhaustive_triples: exhaustive,
        tolerance: tol,
        pass,
    })
}
