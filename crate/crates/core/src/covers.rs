//! Canonical covers, Hausdorff premeasure upper bounds, and box-counting
//! dimension estimates.
//!
//! For a mesh bound `delta` and exponent `s`, the premeasure of a set is
//! the infimum of `sum diam(A_i)^s` over covers of mesh at most `delta`.
//! This module exhibits covers, so every value it reports is an upper
//! bound for that infimum restricted to the sampled set; exactness is
//! claimed only where the canonical family is known to be optimal
//! (interval partitions, Cantor level covers), and the cover used is
//! recorded in each estimate's `cover_id`.
//!
//! Canonical families are uniform: level `k` partitions a box dyadically
//! into `2^(n*k)` cells, and splits the Cantor set into its `2^k` level-k
//! intervals. Block diameters are the continuum diameters of the cells,
//! transported through the metric (exact for scaling and powers since
//! both are monotone in the Euclidean distance). The greedy fallback for
//! explicit clouds instead measures exact max pairwise distances within
//! each block.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cantor::cantor_interval_length;
use crate::cloud::{build_point_set, ShapeSpec};
use crate::metric::{transported_diameter, MetricError, MetricSpec};

/// Block count cap for materialized covers (index sets per block).
const MAX_MATERIALIZED_BLOCKS: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("shape {0} has no canonical cover family")]
    UnsupportedShape(String),
    #[error("metric kind {0} cannot be transported onto canonical covers")]
    UnsupportedMetric(&'static str),
    #[error("refinement level {level} exceeds the canonical cap {max} for this shape")]
    LevelTooDeep { level: u32, max: u32 },
    #[error("cantor cover level {level} exceeds the shape's resolution {shape_level}")]
    RefinementExceedsShape { level: u32, shape_level: u32 },
    #[error("no canonical cover reaches mesh <= {delta} within level cap {max_level} (finest mesh {finest})")]
    MeshUnachievable { delta: f64, max_level: u32, finest: f64 },
    #[error("exponent must be >= 0, got {got}")]
    NegativeExponent { got: f64 },
    #[error("mesh bound must be positive, got {got}")]
    BadDelta { got: f64 },
    #[error("level range must span at least 3 levels")]
    RangeTooShort,
    #[error("degenerate fit: scales do not vary")]
    DegenerateFit,
    #[error("cover invariant violated: {0}")]
    InvalidCover(String),
    #[error("ball cell counting supports dimensions 1 and 2, got {0}")]
    BallDimension(usize),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Cloud(#[from] crate::cloud::CloudError),
}

/// A finite family of blocks covering a point cloud.
///
/// Blocks are index sets into the canonical cloud of the shape the cover
/// was built from; `diameters[b]` is the diameter of block `b` under
/// `metric` and `delta` is their maximum.
#[derive(Debug, Clone, Serialize)]
pub struct Cover {
    pub blocks: Vec<Vec<usize>>,
    pub diameters: Vec<f64>,
    pub delta: f64,
    pub metric: MetricSpec,
    pub n_points: usize,
    pub id: String,
}

impl Cover {
    /// Checks the two type invariants: every cloud index is covered and
    /// every block diameter is at most `delta`.
    pub fn validate(&self) -> Result<(), CoverError> {
        if self.blocks.len() != self.diameters.len() {
            return Err(CoverError::InvalidCover("blocks/diameters length mismatch".into()));
        }
        let mut covered = vec![false; self.n_points];
        for (b, block) in self.blocks.iter().enumerate() {
            if self.diameters[b] > self.delta {
                return Err(CoverError::InvalidCover(format!(
                    "block {b} has diameter {} > delta {}",
                    self.diameters[b], self.delta
                )));
            }
            for &i in block {
                if i >= self.n_points {
                    return Err(CoverError::InvalidCover(format!("index {i} out of range")));
                }
                covered[i] = true;
            }
        }
        if let Some(missing) = covered.iter().position(|c| !c) {
            return Err(CoverError::InvalidCover(format!("point {missing} is not covered")));
        }
        Ok(())
    }

    /// `sum over blocks of diam^s`.
    pub fn diameter_power_sum(&self, s: f64) -> f64 {
        self.diameters.iter().map(|d| d.powf(s)).sum()
    }
}

/// One rung of a canonical family: `count` blocks of equal `diameter`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelCover {
    pub level: u32,
    pub count: u64,
    pub euclidean_diameter: f64,
    pub diameter: f64,
}

impl LevelCover {
    /// Diameter-power sum of the whole level.
    pub fn sum(&self, s: f64) -> f64 {
        self.count as f64 * self.diameter.powf(s)
    }
}

/// Upper bound for the premeasure at exponent `s` and mesh `delta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub s: f64,
    pub delta: f64,
    pub value: f64,
    pub cover_id: String,
    pub blocks: u64,
    /// Always true: the value is a diameter-power sum of one exhibited
    /// cover, never a certified infimum.
    pub is_upper_bound: bool,
}

/// Box-counting dimension estimate from a log-log fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub dim: f64,
    pub r_squared: f64,
    pub scales: Vec<ScaleEntry>,
    /// False when `r_squared < 0.99`.
    pub reliable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleEntry {
    pub level: u32,
    pub delta: f64,
    pub count: u64,
}

impl DimensionEstimate {
    /// Scale table as CSV with header `level,delta,count`.
    pub fn scales_csv(&self) -> String {
        let mut out = String::from("level,delta,count\n");
        for e in &self.scales {
            out.push_str(&format!("{},{:.16e},{}\n", e.level, e.delta, e.count));
        }
        out
    }
}

/// Deepest canonical level supported for a shape (block-count and
/// arithmetic limits).
pub fn max_canonical_level(shape: &ShapeSpec) -> Result<u32, CoverError> {
    match shape {
        ShapeSpec::Cantor { .. } => Ok(40),
        ShapeSpec::Grid { bounds, .. } => Ok((52 / bounds.len().max(1)) as u32),
        ShapeSpec::BallGrid { dim, .. } => match dim {
            1 => Ok(40),
            2 => Ok(22),
            _ => Err(CoverError::BallDimension(*dim)),
        },
        ShapeSpec::Explicit { .. } => Err(CoverError::UnsupportedShape(shape.descriptor())),
    }
}

/// Canonical level data (block count and transported diameter) for a
/// shape at refinement level `k`, without materializing blocks.
pub fn canonical_level(
    shape: &ShapeSpec,
    metric: &MetricSpec,
    k: u32,
) -> Result<LevelCover, CoverError> {
    let max = max_canonical_level(shape)?;
    if k > max {
        return Err(CoverError::LevelTooDeep { level: k, max });
    }
    let (count, eucl) = match shape {
        ShapeSpec::Cantor { .. } => (1u64 << k, cantor_interval_length(k)),
        ShapeSpec::Grid { bounds, .. } => {
            let n = bounds.len() as u32;
            let widths2: f64 = bounds.iter().map(|b| (b[1] - b[0]) * (b[1] - b[0])).sum();
            (1u64 << (n * k), widths2.sqrt() * 2f64.powi(-(k as i32)))
        }
        ShapeSpec::BallGrid { radius, dim, .. } => {
            let side = 2.0 * radius;
            let diag = side * (*dim as f64).sqrt() * 2f64.powi(-(k as i32));
            (count_ball_cells(*dim, *radius, k)?, diag)
        }
        ShapeSpec::Explicit { .. } => {
            return Err(CoverError::UnsupportedShape(shape.descriptor()))
        }
    };
    let diameter = transported_diameter(metric, eucl)
        .map_err(|_| CoverError::UnsupportedMetric(metric.kind_name()))?;
    Ok(LevelCover { level: k, count, euclidean_diameter: eucl, diameter })
}

/// Number of dyadic level-`k` cells of `[-r, r]^dim` that intersect the
/// closed ball of radius `r`.
fn count_ball_cells(dim: usize, r: f64, k: u32) -> Result<u64, CoverError> {
    let cells = 1u64 << k;
    match dim {
        1 => Ok(cells),
        2 => {
            let h = 2.0 * r / cells as f64;
            // axis distance from the origin to cell index i along one axis
            let axis_gap = |i: u64| -> f64 {
                let lo = i as f64 * h - r;
                let hi = lo + h;
                if lo > 0.0 {
                    lo
                } else if hi < 0.0 {
                    -hi
                } else {
                    0.0
                }
            };
            let r2 = r * r;
            let half = cells / 2;
            let mut total = 0u64;
            for row in 0..half {
                let dy = axis_gap(row);
                let dy2 = dy * dy;
                if dy2 > r2 {
                    continue;
                }
                // columns intersecting the disk form a centered symmetric
                // range; find its left edge by bisection on the exact
                // inclusion predicate
                let hit = |col: u64| -> bool {
                    let dx = axis_gap(col);
                    dx * dx + dy2 <= r2
                };
                let mut lo = 0u64;
                let mut hi = half; // hit(half) is true: gap 0 on that column
                if hit(0) {
                    hi = 0;
                } else {
                    // invariant: !hit(lo), hit(hi)
                    while hi - lo > 1 {
                        let mid = lo + (hi - lo) / 2;
                        if hit(mid) {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                }
                total += cells - 2 * hi;
            }
            Ok(total * 2)
        }
        d => Err(CoverError::BallDimension(d)),
    }
}

/// Materializes the canonical cover of `shape` at level `k`: blocks as
/// index sets into `build_point_set(shape)`, diameters transported
/// through `metric`, `delta` set to the max diameter.
pub fn canonical_covers(
    shape: &ShapeSpec,
    k: u32,
    metric: &MetricSpec,
) -> Result<Cover, CoverError> {
    let lc = canonical_level(shape, metric, k)?;
    if lc.count > MAX_MATERIALIZED_BLOCKS {
        return Err(CoverError::LevelTooDeep { level: k, max: 20 });
    }
    let cloud = build_point_set(shape)?;
    let blocks = match shape {
        ShapeSpec::Cantor { level } => {
            if k > *level {
                return Err(CoverError::RefinementExceedsShape { level: k, shape_level: *level });
            }
            // endpoints are enumerated in increasing order, so each level-k
            // interval holds a consecutive run of 2^(level-k) indices
            let run = 1usize << (level - k);
            (0..lc.count as usize).map(|b| (b * run..(b + 1) * run).collect()).collect()
        }
        ShapeSpec::Grid { bounds, .. } => {
            let n = bounds.len();
            let cells_per_axis = 1u64 << k;
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); lc.count as usize];
            for (i, p) in cloud.iter_points().enumerate() {
                let mut cell = 0u64;
                for a in 0..n {
                    let w = bounds[a][1] - bounds[a][0];
                    let frac = (p[a] - bounds[a][0]) / w;
                    let ca = ((frac * cells_per_axis as f64) as u64).min(cells_per_axis - 1);
                    cell = cell * cells_per_axis + ca;
                }
                blocks[cell as usize].push(i);
            }
            blocks
        }
        ShapeSpec::BallGrid { radius, dim, .. } => {
            let cells_per_axis = 1u64 << k;
            let h = 2.0 * radius / cells_per_axis as f64;
            let r2 = radius * radius;
            // enumerate cells intersecting the ball, in lexicographic order
            let mut cell_index = std::collections::HashMap::new();
            let mut kept = 0usize;
            let total = cells_per_axis.pow(*dim as u32);
            for flat in 0..total {
                let mut idx = flat;
                let mut gap2 = 0.0;
                for _ in 0..*dim {
                    let c = idx % cells_per_axis;
                    idx /= cells_per_axis;
                    let lo = c as f64 * h - radius;
                    let hi = lo + h;
                    let g = if lo > 0.0 {
                        lo
                    } else if hi < 0.0 {
                        -hi
                    } else {
                        0.0
                    };
                    gap2 += g * g;
                }
                if gap2 <= r2 {
                    cell_index.insert(flat, kept);
                    kept += 1;
                }
            }
            let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); kept];
            for (i, p) in cloud.iter_points().enumerate() {
                let mut flat = 0u64;
                // axes in reverse so `flat` matches the enumeration above
                for a in (0..*dim).rev() {
                    let frac = (p[a] + radius) / (2.0 * radius);
                    let ca = ((frac * cells_per_axis as f64) as u64).min(cells_per_axis - 1);
                    flat = flat * cells_per_axis + ca;
                }
                let b = cell_index
                    .get(&flat)
                    .copied()
                    .ok_or_else(|| CoverError::InvalidCover(format!("point {i} in excluded cell")))?;
                blocks[b].push(i);
            }
            blocks
        }
        ShapeSpec::Explicit { .. } => {
            return Err(CoverError::UnsupportedShape(shape.descriptor()))
        }
    };
    let diameters = vec![lc.diameter; blocks.len()];
    let cover = Cover {
        blocks,
        diameters,
        delta: lc.diameter,
        metric: metric.clone(),
        n_points: cloud.len(),
        id: format!("{}:level={}", shape.descriptor(), k),
    };
    cover.validate()?;
    Ok(cover)
}

/// Coarsest canonical level whose mesh is at most `delta`.
pub fn first_admissible_level(
    shape: &ShapeSpec,
    metric: &MetricSpec,
    delta: f64,
) -> Result<u32, CoverError> {
    let max = max_canonical_level(shape)?;
    let mut finest = f64::INFINITY;
    for k in 0..=max {
        // avoid counting ball cells while probing: the diameter does not
        // depend on the count
        let eucl = match shape {
            ShapeSpec::Cantor { .. } => cantor_interval_length(k),
            ShapeSpec::Grid { bounds, .. } => {
                let widths2: f64 = bounds.iter().map(|b| (b[1] - b[0]) * (b[1] - b[0])).sum();
                widths2.sqrt() * 2f64.powi(-(k as i32))
            }
            ShapeSpec::BallGrid { radius, dim, .. } => {
                2.0 * radius * (*dim as f64).sqrt() * 2f64.powi(-(k as i32))
            }
            ShapeSpec::Explicit { .. } => {
                return Err(CoverError::UnsupportedShape(shape.descriptor()))
            }
        };
        let d = transported_diameter(metric, eucl)
            .map_err(|_| CoverError::UnsupportedMetric(metric.kind_name()))?;
        if d <= delta {
            return Ok(k);
        }
        finest = d;
    }
    Err(CoverError::MeshUnachievable { delta, max_level: max, finest })
}

/// Upper bound for the premeasure at exponent `s` and mesh `delta`,
/// using the coarsest canonical cover whose mesh meets the bound (or a
/// greedy metric-ball cover for explicit clouds).
pub fn premeasure_upper(
    shape: &ShapeSpec,
    metric: &MetricSpec,
    s: f64,
    delta: f64,
) -> Result<MeasureEstimate, CoverError> {
    if !(s >= 0.0) {
        return Err(CoverError::NegativeExponent { got: s });
    }
    if !(delta > 0.0) {
        return Err(CoverError::BadDelta { got: delta });
    }
    if let ShapeSpec::Explicit { .. } = shape {
        return greedy_premeasure(shape, metric, s, delta);
    }
    let k = first_admissible_level(shape, metric, delta)?;
    let lc = canonical_level(shape, metric, k)?;
    Ok(MeasureEstimate {
        s,
        delta,
        value: lc.sum(s),
        cover_id: format!("{}:level={} (canonical family)", shape.descriptor(), k),
        blocks: lc.count,
        is_upper_bound: true,
    })
}

/// Constrained infimum over the canonical family: the minimum
/// diameter-power sum over levels from the coarsest admissible one up to
/// `max_level`. With a fixed `max_level` this is nondecreasing as
/// `delta` shrinks, mirroring the infimum over a shrinking cover family.
pub fn premeasure_best_upper(
    shape: &ShapeSpec,
    metric: &MetricSpec,
    s: f64,
    delta: f64,
    max_level: u32,
) -> Result<MeasureEstimate, CoverError> {
    if !(s >= 0.0) {
        return Err(CoverError::NegativeExponent { got: s });
    }
    if !(delta > 0.0) {
        return Err(CoverError::BadDelta { got: delta });
    }
    let k0 = first_admissible_level(shape, metric, delta)?;
    let cap = max_canonical_level(shape)?.min(max_level);
    if k0 > cap {
        return Err(CoverError::LevelTooDeep { level: k0, max: cap });
    }
    let mut best: Option<(u32, u64, f64)> = None;
    for k in k0..=cap {
        let lc = canonical_level(shape, metric, k)?;
        let v = lc.sum(s);
        if best.is_none_or(|(_, _, bv)| v < bv) {
            best = Some((k, lc.count, v));
        }
    }
    let (k, blocks, value) = best.expect("k0 <= cap guarantees at least one level");
    Ok(MeasureEstimate {
        s,
        delta,
        value,
        cover_id: format!(
            "{}:level={} (best of canonical levels {}..={})",
            shape.descriptor(),
            k,
            k0,
            cap
        ),
        blocks,
        is_upper_bound: true,
    })
}

/// Greedy metric-ball cover of an explicit cloud: walk points in index
/// order, opening a block of all still-uncovered points within `delta/2`
/// of the current point. Diameters are exact max pairwise distances.
fn greedy_premeasure(
    shape: &ShapeSpec,
    metric: &MetricSpec,
    s: f64,
    delta: f64,
) -> Result<MeasureEstimate, CoverError> {
    let cloud = build_point_set(shape)?;
    if cloud.is_empty() {
        return Ok(MeasureEstimate {
            s,
            delta,
            value: 0.0,
            cover_id: "greedy-ball:empty".to_string(),
            blocks: 0,
            is_upper_bound: true,
        });
    }
    let bound = metric.bind(&cloud)?;
    let m = cloud.len();
    let mut assigned = vec![false; m];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for center in 0..m {
        if assigned[center] {
            continue;
        }
        let mut block = Vec::new();
        for j in 0..m {
            if !assigned[j] && bound.dist(center, j) <= delta / 2.0 {
                assigned[j] = true;
                block.push(j);
            }
        }
        blocks.push(block);
    }
    let diameters: Vec<f64> = blocks
        .iter()
        .map(|block| {
            let mut d: f64 = 0.0;
            for (a, &i) in block.iter().enumerate() {
                for &j in &block[a + 1..] {
                    d = d.max(bound.dist(i, j));
                }
            }
            d
        })
        .collect();
    let max_diam = diameters.iter().cloned().fold(0.0, f64::max);
    let cover = Cover {
        blocks,
        diameters,
        delta: max_diam.max(0.0),
        metric: metric.clone(),
        n_points: m,
        id: format!("greedy-ball:delta={delta}"),
    };
    cover.validate()?;
    if cover.delta > delta {
        return Err(CoverError::InvalidCover(format!(
            "greedy block diameter {} exceeds requested mesh {delta} (triangle inequality violated?)",
            cover.delta
        )));
    }
    Ok(MeasureEstimate {
        s,
        delta,
        value: cover.diameter_power_sum(s),
        cover_id: cover.id.clone(),
        blocks: cover.blocks.len() as u64,
        is_upper_bound: true,
    })
}

/// Box-counting dimension: fits `log N(delta)` against `log(1/delta)`
/// over canonical levels `k_lo..=k_hi` by unweighted least squares.
pub fn box_counting_dimension(
    shape: &ShapeSpec,
    metric: &MetricSpec,
    k_lo: u32,
    k_hi: u32,
) -> Result<DimensionEstimate, CoverError> {
    if k_hi < k_lo || k_hi - k_lo + 1 < 3 {
        return Err(CoverError::RangeTooShort);
    }
    let mut scales = Vec::with_capacity((k_hi - k_lo + 1) as usize);
    for k in k_lo..=k_hi {
        let lc = canonical_level(shape, metric, k)?;
        scales.push(ScaleEntry { level: k, delta: lc.diameter, count: lc.count });
    }
    let xs: Vec<f64> = scales.iter().map(|e| (1.0 / e.delta).ln()).collect();
    let ys: Vec<f64> = scales.iter().map(|e| (e.count as f64).ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    if sxx <= 0.0 {
        return Err(CoverError::DegenerateFit);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y) * (y - mean_y)).sum();
    let ss_res: f64 =
        xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DimensionEstimate { dim: slope, r_squared, reliable: r_squared >= 0.99, scales })
}
