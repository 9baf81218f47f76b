//! End-to-end pipelines: the positivity replay on a ball window, the
//! Cantor-pullback collapse, and the snowflake dimension report.
//!
//! The replay corroborates, on a finite discretization, the chain that
//! rules out a vanishing n-dimensional measure for metrics compatible
//! with the Euclidean topology: regularize the identity's coordinates
//! into equi-Lipschitz envelopes, certify their sup deviation, follow
//! the degree along the homotopy from the identity, corroborate
//! surjectivity onto the half-radius ball by preimage search, and track
//! premeasure upper bounds for the window. Finite computation can
//! corroborate but not prove, so the pipeline reports consistency
//! rather than asserting impossibility.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::{build_point_set, CloudError, PointCloud, ShapeSpec};
use crate::covers::{
    box_counting_dimension, canonical_level, first_admissible_level, premeasure_best_upper,
    premeasure_upper, Cover, CoverError, DimensionEstimate, MeasureEstimate,
};
use crate::degree::{homotopy_scan, homotopy_scan_1d, find_preimage, DegreeError, HomotopyStep};
use crate::envelope::{
    coordinate_field, find_eps_hat, inf_conv_at, inf_convolution_with, uniform_deviation,
    DeviationProbe, EnvelopeError, ScalarField, VectorEnvelope,
};
use crate::metric::{validate_metric, MetricError, MetricReport, MetricSpec};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("ambient dimension must be 1 or 2, got {got}")]
    BadDimension { got: usize },
    #[error("grid resolution must be >= 2, got {got}")]
    BadResolution { got: usize },
    #[error("window radius must be positive, got {got}")]
    BadRadius { got: f64 },
    #[error("target {target:?} must lie strictly inside the half-radius ball (|y| < {limit})")]
    TargetOutsideHalfWindow { target: Vec<f64>, limit: f64 },
    #[error("target has dimension {got}, expected {expected}")]
    TargetDimension { got: usize, expected: usize },
    #[error("metric kind {0} cannot be evaluated off the sample; the replay needs an analytic metric")]
    NonAnalyticMetric(&'static str),
    #[error("metric axioms fail on the window sample: symmetry {}, triangle {}, identity {}", .0.symmetry_violation, .0.triangle_violation, .0.identity_violation)]
    MetricAxiomsFailed(Box<MetricReport>),
    #[error("counterexample dimension must be >= 1")]
    BadCounterexampleDimension,
    #[error("max level must be in 1..={max}, got {got}")]
    BadMaxLevel { got: u32, max: u32 },
    #[error("snowflake exponent must lie in (0, 1], got {got}")]
    BadAlpha { got: f64 },
    #[error(transparent)]
    Cloud(#[from] CloudError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Degree(#[from] DegreeError),
}

/// Configuration for the positivity replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremConfig {
    pub metric: MetricSpec,
    pub dim: usize,
    pub grid_res: usize,
    /// Defaults to five deterministic points in the half-radius ball.
    pub targets: Option<Vec<Vec<f64>>>,
    /// Window radius; the construction is window-agnostic and every
    /// internal bound scales with it.
    pub radius: f64,
    pub boundary_samples: usize,
    pub homotopy_steps: usize,
    pub metric_tolerance: f64,
}

impl TheoremConfig {
    pub fn new(metric: MetricSpec, dim: usize, grid_res: usize) -> Self {
        TheoremConfig {
            metric,
            dim,
            grid_res,
            targets: None,
            radius: 1.0,
            boundary_samples: 128,
            homotopy_steps: 11,
            metric_tolerance: 1e-9,
        }
    }
}

/// Five deterministic targets in the half-radius ball: the origin plus
/// four points at 0.3 radius (on the axes for dim 2; at two depths on
/// the line for dim 1).
pub fn default_targets(dim: usize, radius: f64) -> Vec<Vec<f64>> {
    let r = 0.3 * radius;
    match dim {
        1 => vec![vec![0.0], vec![r], vec![-r], vec![0.5 * r], vec![-0.5 * r]],
        _ => vec![
            vec![0.0, 0.0],
            vec![r, 0.0],
            vec![-r, 0.0],
            vec![0.0, r],
            vec![0.0, -r],
        ],
    }
}

/// Degree record for one target along the identity-to-envelope homotopy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetDegree {
    pub target: Vec<f64>,
    pub degree: Option<i32>,
    pub invariant: bool,
    pub steps: Vec<HomotopyStep>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreimageRecord {
    pub target: Vec<f64>,
    pub witness: Option<Vec<f64>>,
    pub residual: f64,
    pub tolerance: f64,
    pub found: bool,
}

/// Full report of the positivity replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremReport {
    pub metric: MetricSpec,
    pub n: usize,
    pub radius: f64,
    pub grid_res: usize,
    pub mesh: f64,
    pub cloud_points: usize,
    pub metric_report: MetricReport,
    pub eps_hat: f64,
    pub eps_hat_deviation: f64,
    pub deviation_target: f64,
    pub deviation_curve: Vec<DeviationProbe>,
    pub degrees: Vec<TargetDegree>,
    pub preimages: Vec<PreimageRecord>,
    pub measure_rho: Vec<MeasureEstimate>,
    /// Euclidean Lipschitz constant of the envelope map: sqrt(n)/eps_hat.
    pub lipschitz_constant: f64,
    /// `lipschitz_constant^n` times the final premeasure bound: the
    /// image-measure bound the contradiction argument rests on.
    pub lipschitz_image_bound: f64,
    pub verdict: String,
    pub consistent: bool,
}

impl TheoremReport {
    /// Ladder CSV with header `delta,value`.
    pub fn ladder_csv(&self) -> String {
        measure_csv(&self.measure_rho)
    }

    /// Deviation curve CSV with header `eps,sup_deviation`.
    pub fn deviation_csv(&self) -> String {
        crate::envelope::curve_csv(&self.deviation_curve)
    }
}

pub fn measure_csv(ladder: &[MeasureEstimate]) -> String {
    let mut out = String::from("delta,value\n");
    for e in ladder {
        out.push_str(&format!("{:.16e},{:.16e}\n", e.delta, e.value));
    }
    out
}

/// Memoized off-sample evaluator for the envelope vector map.
struct EnvelopeExtension<'a> {
    cloud: &'a PointCloud,
    metric: &'a MetricSpec,
    eps: f64,
    fields: &'a [ScalarField],
    cache: RefCell<HashMap<Vec<u64>, Vec<f64>>>,
}

impl<'a> EnvelopeExtension<'a> {
    fn new(
        cloud: &'a PointCloud,
        metric: &'a MetricSpec,
        eps: f64,
        fields: &'a [ScalarField],
    ) -> Self {
        EnvelopeExtension { cloud, metric, eps, fields, cache: RefCell::new(HashMap::new()) }
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let key: Vec<u64> = x.iter().map(|c| c.to_bits()).collect();
        if let Some(v) = self.cache.borrow().get(&key) {
            return v.clone();
        }
        let v: Vec<f64> = self
            .fields
            .iter()
            .map(|f| {
                inf_conv_at(f, self.cloud, self.metric, self.eps, x)
                    .expect("analytic metric checked at pipeline entry")
            })
            .collect();
        self.cache.borrow_mut().insert(key, v.clone());
        v
    }
}

/// Runs the positivity replay and assembles the report.
pub fn verify_theorem(cfg: &TheoremConfig) -> Result<TheoremReport, PipelineError> {
    if cfg.dim == 0 || cfg.dim > 2 {
        return Err(PipelineError::BadDimension { got: cfg.dim });
    }
    if cfg.grid_res < 2 {
        return Err(PipelineError::BadResolution { got: cfg.grid_res });
    }
    if !(cfg.radius > 0.0) {
        return Err(PipelineError::BadRadius { got: cfg.radius });
    }
    if !cfg.metric.is_analytic() {
        return Err(PipelineError::NonAnalyticMetric(cfg.metric.kind_name()));
    }
    let limit = cfg.radius / 2.0;
    let targets = cfg.targets.clone().unwrap_or_else(|| default_targets(cfg.dim, cfg.radius));
    for t in &targets {
        if t.len() != cfg.dim {
            return Err(PipelineError::TargetDimension { got: t.len(), expected: cfg.dim });
        }
        let norm = t.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm < limit) {
            return Err(PipelineError::TargetOutsideHalfWindow { target: t.clone(), limit });
        }
    }

    let shape = ShapeSpec::BallGrid {
        radius: cfg.radius,
        points_per_axis: cfg.grid_res,
        dim: cfg.dim,
    };
    let cloud = build_point_set(&shape)?;
    let mesh = 2.0 * cfg.radius / (cfg.grid_res - 1) as f64;

    let metric_report = validate_metric(&cfg.metric, &cloud, cfg.metric_tolerance)?;
    if !metric_report.pass {
        return Err(PipelineError::MetricAxiomsFailed(Box::new(metric_report)));
    }

    let fields: Vec<ScalarField> = (0..cfg.dim)
        .map(|axis| coordinate_field(&cloud, axis))
        .collect::<Result<_, _>>()?;

    // certify the sup-deviation bound: largest probed eps staying within
    // half the window radius
    let eps = find_eps_hat(&fields, &cloud, &cfg.metric, limit)?;

    let dists = cfg.metric.bind(&cloud)?.matrix();
    let components = fields
        .iter()
        .map(|f| inf_convolution_with(f, &dists, &cfg.metric, eps.eps_hat))
        .collect::<Result<Vec<_>, _>>()?;
    let venv = VectorEnvelope::new(components)?;
    let on_cloud_deviation = uniform_deviation(&venv, &fields)?;
    debug_assert_eq!(on_cloud_deviation, eps.deviation);

    let extension = EnvelopeExtension::new(&cloud, &cfg.metric, eps.eps_hat, &fields);
    let t_grid: Vec<f64> =
        (0..cfg.homotopy_steps).map(|i| i as f64 / (cfg.homotopy_steps - 1) as f64).collect();

    let mut degrees = Vec::with_capacity(targets.len());
    for target in &targets {
        let scan = if cfg.dim == 2 {
            let param = crate::degree::circle_param([0.0, 0.0], cfg.radius);
            let family = |t: f64, x: [f64; 2]| {
                let fx = extension.eval(&x);
                [(1.0 - t) * x[0] + t * fx[0], (1.0 - t) * x[1] + t * fx[1]]
            };
            homotopy_scan(&param, &family, cfg.boundary_samples, [target[0], target[1]], &t_grid)
        } else {
            let family = |t: f64, x: f64| {
                let fx = extension.eval(&[x]);
                (1.0 - t) * x + t * fx[0]
            };
            homotopy_scan_1d(&family, -cfg.radius, cfg.radius, target[0], &t_grid)
        };
        let degree = match scan.verdict {
            crate::degree::HomotopyVerdict::Invariant { degree } => Some(degree),
            _ => scan.steps.last().and_then(|s| s.degree),
        };
        degrees.push(TargetDegree {
            target: target.clone(),
            degree,
            invariant: scan.is_invariant(),
            steps: scan.steps,
        });
    }

    let images: Vec<Vec<f64>> = (0..cloud.len())
        .map(|i| venv.components.iter().map(|c| c.values[i]).collect())
        .collect();
    let preimage_tol = 2.0 * mesh;
    let preimages = targets
        .iter()
        .map(|target| {
            let res = find_preimage(&images, &cloud, target, preimage_tol)?;
            Ok(PreimageRecord {
                target: target.clone(),
                found: res.found(),
                witness: res.witness,
                residual: res.residual,
                tolerance: res.tolerance,
            })
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;

    // premeasure ladder for the window at exponent n, mesh 2r * 2^-j:
    // each rung takes the best canonical cover between its first
    // admissible level and the ladder's finest level, so the sequence is
    // nondecreasing by construction
    let deltas: Vec<f64> = (2..=8).map(|j| 2.0 * cfg.radius * 2f64.powi(-j)).collect();
    let finest = first_admissible_level(&shape, &cfg.metric, *deltas.last().unwrap())?;
    let measure_rho = deltas
        .iter()
        .map(|&d| premeasure_best_upper(&shape, &cfg.metric, cfg.dim as f64, d, finest))
        .collect::<Result<Vec<_>, _>>()?;

    let lipschitz_constant = (cfg.dim as f64).sqrt() / eps.eps_hat;
    let lipschitz_image_bound =
        lipschitz_constant.powi(cfg.dim as i32) * measure_rho.last().map_or(0.0, |e| e.value);

    let mut reasons: Vec<String> = Vec::new();
    for d in &degrees {
        if !d.invariant || d.degree != Some(1) {
            reasons.push(format!("degree at {:?} is {:?} (invariant: {})", d.target, d.degree, d.invariant));
        }
    }
    for p in &preimages {
        if !p.found {
            reasons.push(format!("no preimage within {} of {:?} (residual {})", p.tolerance, p.target, p.residual));
        }
    }
    for w in measure_rho.windows(2) {
        if w[1].value < w[0].value {
            reasons.push(format!("measure ladder decreases: {} -> {}", w[0].value, w[1].value));
        }
    }
    if measure_rho.iter().any(|e| !(e.value > 0.0)) {
        reasons.push("measure ladder collapses to zero".to_string());
    }
    let consistent = reasons.is_empty();
    let verdict = if consistent {
        "consistent: degree 1 at every target, preimages found, positive nondecreasing measure ladder".to_string()
    } else {
        format!("inconsistent: {}", reasons.join("; "))
    };

    Ok(TheoremReport {
        metric: cfg.metric.clone(),
        n: cfg.dim,
        radius: cfg.radius,
        grid_res: cfg.grid_res,
        mesh,
        cloud_points: cloud.len(),
        metric_report,
        eps_hat: eps.eps_hat,
        eps_hat_deviation: eps.deviation,
        deviation_target: eps.target,
        deviation_curve: eps.curve,
        degrees,
        preimages,
        measure_rho,
        lipschitz_constant,
        lipschitz_image_bound,
        verdict,
        consistent,
    })
}

/// Report of the Cantor-pullback collapse: premeasure upper bounds for
/// an n-dimensional window under the pulled-back Cantor geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub levels: Vec<u32>,
    pub upper_bounds: Vec<f64>,
    /// Exact one-step decay factor of the bounds, `2 * 3^-n`.
    pub decay_ratio: f64,
    pub pairing: String,
    pub window_points: usize,
    pub cantor_level: u32,
}

impl CounterexampleReport {
    /// CSV with header `level,upper_bound`.
    pub fn bounds_csv(&self) -> String {
        let mut out = String::from("level,upper_bound\n");
        for (k, b) in self.levels.iter().zip(&self.upper_bounds) {
            out.push_str(&format!("{},{:.16e}\n", k, b));
        }
        out
    }
}

/// For k = 0..=max_level, covers the level-`max_level` Cantor sample by
/// its level-k intervals, transports diameters through the rank pairing
/// onto a window of R^n points, and records the diameter-power sums
/// `2^k * 3^(-k n)` that collapse to zero.
pub fn cantor_counterexample(
    n: usize,
    max_level: u32,
) -> Result<CounterexampleReport, PipelineError> {
    if n == 0 {
        return Err(PipelineError::BadCounterexampleDimension);
    }
    const MAX: u32 = 20;
    if max_level == 0 || max_level > MAX {
        return Err(PipelineError::BadMaxLevel { got: max_level, max: MAX });
    }
    let level = max_level;
    let count = 1usize << level;

    // window cloud: the first 2^level points of a grid over [0,1]^n,
    // paired with Cantor endpoints by rank
    let mut ppa = (2f64.powf(level as f64 / n as f64)).ceil() as usize;
    ppa = ppa.max(2);
    while ppa.pow(n as u32) < count {
        ppa += 1;
    }
    let full_grid = build_point_set(&ShapeSpec::Grid {
        bounds: vec![[0.0, 1.0]; n],
        points_per_axis: ppa,
    })?;
    let window_points: Vec<Vec<f64>> =
        full_grid.iter_points().take(count).map(|p| p.to_vec()).collect();
    let window = PointCloud::new(n, "window", window_points)?;

    let metric = MetricSpec::CantorPullback { level };
    let mut levels = Vec::with_capacity(level as usize + 1);
    let mut upper_bounds = Vec::with_capacity(level as usize + 1);
    for k in 0..=level {
        // consecutive rank runs: the image under the pairing of the 2^k
        // level-k intervals; each inherits the interval's diameter 3^-k
        let run = 1usize << (level - k);
        let blocks: Vec<Vec<usize>> =
            (0..1usize << k).map(|b| (b * run..(b + 1) * run).collect()).collect();
        let diameter = crate::cantor::cantor_interval_length(k);
        let cover = Cover {
            diameters: vec![diameter; blocks.len()],
            blocks,
            delta: diameter,
            metric: metric.clone(),
            n_points: window.len(),
            id: format!("cantor-pullback:level={k}"),
        };
        cover.validate()?;
        levels.push(k);
        upper_bounds.push(cover.diameter_power_sum(n as f64));
    }

    Ok(CounterexampleReport {
        n,
        levels,
        upper_bounds,
        decay_ratio: 2.0 * 3f64.powi(-(n as i32)),
        pairing: format!(
            "rank-order injection: i-th level-{level} Cantor endpoint <-> i-th window grid point ({count} points)"
        ),
        window_points: window.len(),
        cantor_level: level,
    })
}

/// One exact transport check between the Euclidean and snowflake
/// premeasure queries on the same canonical cover.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransportCheck {
    pub s: f64,
    pub delta: f64,
    pub euclidean_value: f64,
    pub snowflake_value: f64,
    pub rel_err: f64,
}

/// Dimension doubling report for a snowflake metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnowflakeReport {
    pub alpha: f64,
    pub shape: String,
    pub euclidean: DimensionEstimate,
    pub snowflake: DimensionEstimate,
    pub dim_ratio: f64,
    pub expected_ratio: f64,
    pub transport_checks: Vec<TransportCheck>,
    pub max_transport_rel_err: f64,
    pub consistent: bool,
}

/// Estimates the box-counting dimension of `shape` under the Euclidean
/// metric and under its alpha-snowflake, checks the ratio against
/// 1/alpha, and verifies the finite-cover transport identity
/// `premeasure(snowflake(a), s/a, delta^a) = premeasure(euclidean, s, delta)`
/// on the canonical covers of the scanned levels.
pub fn snowflake_dimension_report(
    alpha: f64,
    shape: &ShapeSpec,
    k_lo: u32,
    k_hi: u32,
) -> Result<SnowflakeReport, PipelineError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(PipelineError::BadAlpha { got: alpha });
    }
    let snow = MetricSpec::Snowflake { alpha };
    let euclidean = box_counting_dimension(shape, &MetricSpec::Euclidean, k_lo, k_hi)?;
    let snowflake = box_counting_dimension(shape, &snow, k_lo, k_hi)?;
    let dim_ratio = snowflake.dim / euclidean.dim;
    let expected_ratio = 1.0 / alpha;

    let mut transport_checks = Vec::new();
    let mut max_rel: f64 = 0.0;
    const LN2_OVER_LN3: f64 = 0.630_929_753_571_457_4;
    for k in [k_lo, (k_lo + k_hi) / 2, k_hi] {
        let delta = canonical_level(shape, &MetricSpec::Euclidean, k)?.diameter;
        for s in [0.5, LN2_OVER_LN3, 1.0] {
            let e = premeasure_upper(shape, &MetricSpec::Euclidean, s, delta)?;
            let f = premeasure_upper(shape, &snow, s / alpha, delta.powf(alpha))?;
            let rel = (e.value - f.value).abs() / e.value.abs().max(f64::MIN_POSITIVE);
            max_rel = max_rel.max(rel);
            transport_checks.push(TransportCheck {
                s,
                delta,
                euclidean_value: e.value,
                snowflake_value: f.value,
                rel_err: rel,
            });
        }
    }

    let ratio_ok = (dim_ratio - expected_ratio).abs() <= 0.05 * expected_ratio;
    let consistent = ratio_ok && max_rel <= 1e-12 && euclidean.reliable && snowflake.reliable;
    Ok(SnowflakeReport {
        alpha,
        shape: shape.descriptor(),
        euclidean,
        snowflake,
        dim_ratio,
        expected_ratio,
        transport_checks,
        max_transport_rel_err: max_rel,
        consistent,
    })
}
