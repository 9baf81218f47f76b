//! Inf-convolution Lipschitz regularization on finite clouds.
//!
//! The envelope of a field `f` at penalty `eps` is
//! `f_eps(x) = min over z of [f(z) + rho(x, z) / eps]`,
//! the largest `(1/eps)`-Lipschitz function below `f` on the sampled
//! set. Minima run over the whole cloud (brute force, O(m^2) per
//! field), with argmin witnesses recorded and ties broken by lowest
//! point index so results are identical across runs and platforms.
//!
//! Key order facts used throughout (and re-checked by the callers'
//! tests rather than assumed): the envelope never exceeds the field,
//! shrinking `eps` raises the envelope pointwise, and a field that is
//! already `L`-Lipschitz with `1/eps >= L` is a fixed point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::PointCloud;
use crate::metric::{MetricError, MetricSpec, PairwiseDistances};

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("eps must be positive, got {got}")]
    NonPositiveEps { got: f64 },
    #[error("target must be positive, got {got}")]
    NonPositiveTarget { got: f64 },
    #[error("field has {field} values but cloud has {cloud} points")]
    FieldSizeMismatch { field: usize, cloud: usize },
    #[error("field contains a non-finite value at {index}")]
    NonFiniteField { index: usize },
    #[error("cloud is empty")]
    EmptyCloud,
    #[error("envelopes disagree on {what}")]
    Mismatch { what: &'static str },
    #[error("eps values are not nested: {a} >= {b}")]
    EpsNotNested { a: f64, b: f64 },
    #[error("vector envelope needs {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("no probed eps meets the deviation target {target}; smallest probe reached {best}")]
    NoFeasibleEps { target: f64, best: f64, curve: Vec<DeviationProbe> },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// One real value per cloud point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub cloud_id: String,
    pub name: String,
}

impl ScalarField {
    pub fn new(cloud: &PointCloud, name: &str, values: Vec<f64>) -> Result<Self, EnvelopeError> {
        if values.len() != cloud.len() {
            return Err(EnvelopeError::FieldSizeMismatch { field: values.len(), cloud: cloud.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(EnvelopeError::NonFiniteField { index });
        }
        Ok(ScalarField { values, cloud_id: cloud.id(), name: name.to_string() })
    }
}

/// The `axis`-th coordinate projection as a field on `cloud`.
pub fn coordinate_field(cloud: &PointCloud, axis: usize) -> Result<ScalarField, EnvelopeError> {
    let values = cloud.iter_points().map(|p| p[axis]).collect();
    ScalarField::new(cloud, &format!("coord_{axis}"), values)
}

/// Envelope values with argmin witnesses.
///
/// Invariants by construction: `values[i] <= f[i]` (taking `z = i` is
/// always admissible) and `values[i]` is bitwise the winning candidate
/// `f[witness[i]] + dist(i, witness[i]) / eps`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub eps: f64,
    pub values: Vec<f64>,
    pub witnesses: Vec<usize>,
    pub lipschitz_bound: f64,
    pub metric: MetricSpec,
    pub field_name: String,
    pub cloud_id: String,
}

/// Vector of component envelopes sharing one `eps`, metric, and cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorEnvelope {
    pub components: Vec<EnvelopeResult>,
}

impl VectorEnvelope {
    pub fn new(components: Vec<EnvelopeResult>) -> Result<Self, EnvelopeError> {
        if components.is_empty() {
            return Err(EnvelopeError::ComponentCount { expected: 1, got: 0 });
        }
        let first = &components[0];
        for c in &components[1..] {
            if c.eps != first.eps {
                return Err(EnvelopeError::Mismatch { what: "eps" });
            }
            if c.metric != first.metric {
                return Err(EnvelopeError::Mismatch { what: "metric" });
            }
            if c.cloud_id != first.cloud_id {
                return Err(EnvelopeError::Mismatch { what: "cloud" });
            }
            if c.values.len() != first.values.len() {
                return Err(EnvelopeError::Mismatch { what: "length" });
            }
        }
        Ok(VectorEnvelope { components })
    }

    pub fn eps(&self) -> f64 {
        self.components[0].eps
    }

    /// Euclidean Lipschitz constant of the vector map w.r.t. the metric:
    /// each component is (1/eps)-Lipschitz, so the vector map is
    /// sqrt(n)/eps-Lipschitz.
    pub fn lipschitz_bound(&self) -> f64 {
        (self.components.len() as f64).sqrt() / self.eps()
    }
}

/// Envelope of `f` over `cloud` under `metric` at penalty `eps`.
pub fn inf_convolution(
    f: &ScalarField,
    cloud: &PointCloud,
    metric: &MetricSpec,
    eps: f64,
) -> Result<EnvelopeResult, EnvelopeError> {
    let dists = metric.bind(cloud)?.matrix();
    inf_convolution_with(f, &dists, metric, eps)
}

/// Envelope against a precomputed distance matrix (the reference path).
pub fn inf_convolution_with(
    f: &ScalarField,
    dists: &PairwiseDistances,
    metric: &MetricSpec,
    eps: f64,
) -> Result<EnvelopeResult, EnvelopeError> {
    envelope_scan(f, dists, metric, eps, false)
}

/// Pruned scan: skips candidates whose field value alone cannot beat the
/// current best. Must produce bitwise-identical results to the reference
/// path (pruned candidates satisfy `f[z] + d/eps >= f[z] >= best`, and
/// ties never displace an earlier witness).
pub fn inf_convolution_pruned(
    f: &ScalarField,
    dists: &PairwiseDistances,
    metric: &MetricSpec,
    eps: f64,
) -> Result<EnvelopeResult, EnvelopeError> {
    envelope_scan(f, dists, metric, eps, true)
}

fn envelope_scan(
    f: &ScalarField,
    dists: &PairwiseDistances,
    metric: &MetricSpec,
    eps: f64,
    prune: bool,
) -> Result<EnvelopeResult, EnvelopeError> {
    if !(eps > 0.0) {
        return Err(EnvelopeError::NonPositiveEps { got: eps });
    }
    let m = f.values.len();
    if m == 0 {
        return Err(EnvelopeError::EmptyCloud);
    }
    if m != dists.n() {
        return Err(EnvelopeError::FieldSizeMismatch { field: m, cloud: dists.n() });
    }
    let mut values = Vec::with_capacity(m);
    let mut witnesses = Vec::with_capacity(m);
    for i in 0..m {
        let mut best = f.values[0] + dists.get(i, 0) / eps;
        let mut witness = 0usize;
        for z in 1..m {
            if prune && f.values[z] >= best {
                continue;
            }
            let candidate = f.values[z] + dists.get(i, z) / eps;
            if candidate < best {
                best = candidate;
                witness = z;
            }
        }
        values.push(best);
        witnesses.push(witness);
    }
    Ok(EnvelopeResult {
        eps,
        values,
        witnesses,
        lipschitz_bound: 1.0 / eps,
        metric: metric.clone(),
        field_name: f.name.clone(),
        cloud_id: f.cloud_id.clone(),
    })
}

/// Envelope value at an arbitrary point `x` (not necessarily in the
/// cloud); requires an analytic metric kind.
pub fn inf_conv_at(
    f: &ScalarField,
    cloud: &PointCloud,
    metric: &MetricSpec,
    eps: f64,
    x: &[f64],
) -> Result<f64, EnvelopeError> {
    if !(eps > 0.0) {
        return Err(EnvelopeError::NonPositiveEps { got: eps });
    }
    if cloud.is_empty() {
        return Err(EnvelopeError::EmptyCloud);
    }
    if f.values.len() != cloud.len() {
        return Err(EnvelopeError::FieldSizeMismatch { field: f.values.len(), cloud: cloud.len() });
    }
    let mut best = f64::INFINITY;
    for (z, p) in cloud.iter_points().enumerate() {
        let candidate = f.values[z] + metric.eval(x, p)? / eps;
        if candidate < best {
            best = candidate;
        }
    }
    Ok(best)
}

/// Max over pairs of `|v[i] - v[j]| - dist(i,j)/eps`; nonpositive means
/// the certified Lipschitz bound holds on the sample.
pub fn lipschitz_check(env: &EnvelopeResult, cloud: &PointCloud) -> Result<f64, EnvelopeError> {
    lipschitz_check_against(&env.values, env.eps, cloud, &env.metric)
}

/// Same check for an arbitrary value vector against bound `1/eps`.
pub fn lipschitz_check_against(
    values: &[f64],
    eps: f64,
    cloud: &PointCloud,
    metric: &MetricSpec,
) -> Result<f64, EnvelopeError> {
    if values.len() != cloud.len() {
        return Err(EnvelopeError::FieldSizeMismatch { field: values.len(), cloud: cloud.len() });
    }
    let bound = metric.bind(cloud)?;
    let m = values.len();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..m {
        for j in (i + 1)..m {
            let violation = (values[i] - values[j]).abs() - bound.dist(i, j) / eps;
            worst = worst.max(violation);
        }
    }
    Ok(if m < 2 { 0.0 } else { worst })
}

/// Max over points of `env_b.values - env_a.values` for nested
/// penalties `env_a.eps < env_b.eps`; nonpositive means the envelope is
/// nonincreasing in eps, as the penalty-ordering argument demands.
pub fn monotonicity_check(
    env_a: &EnvelopeResult,
    env_b: &EnvelopeResult,
) -> Result<f64, EnvelopeError> {
    if !(env_a.eps < env_b.eps) {
        return Err(EnvelopeError::EpsNotNested { a: env_a.eps, b: env_b.eps });
    }
    if env_a.cloud_id != env_b.cloud_id {
        return Err(EnvelopeError::Mismatch { what: "cloud" });
    }
    if env_a.field_name != env_b.field_name {
        return Err(EnvelopeError::Mismatch { what: "field" });
    }
    if env_a.metric != env_b.metric {
        return Err(EnvelopeError::Mismatch { what: "metric" });
    }
    if env_a.values.len() != env_b.values.len() {
        return Err(EnvelopeError::Mismatch { what: "length" });
    }
    let worst = env_a
        .values
        .iter()
        .zip(&env_b.values)
        .map(|(a, b)| b - a)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(worst)
}

/// Sup over cloud points of the Euclidean distance between the envelope
/// vector and a reference field vector.
pub fn uniform_deviation(
    env: &VectorEnvelope,
    reference: &[ScalarField],
) -> Result<f64, EnvelopeError> {
    if reference.len() != env.components.len() {
        return Err(EnvelopeError::ComponentCount {
            expected: env.components.len(),
            got: reference.len(),
        });
    }
    let m = env.components[0].values.len();
    for r in reference {
        if r.values.len() != m {
            return Err(EnvelopeError::Mismatch { what: "length" });
        }
    }
    let mut sup: f64 = 0.0;
    for i in 0..m {
        let mut dist2 = 0.0;
        for (c, r) in env.components.iter().zip(reference) {
            let d = c.values[i] - r.values[i];
            dist2 += d * d;
        }
        sup = sup.max(dist2.sqrt());
    }
    Ok(sup)
}

/// One probe of the deviation curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationProbe {
    pub eps: f64,
    pub sup_deviation: f64,
}

/// Certified penalty search result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsHatResult {
    pub eps_hat: f64,
    pub deviation: f64,
    pub target: f64,
    pub curve: Vec<DeviationProbe>,
}

impl EpsHatResult {
    /// Deviation curve as CSV with header `eps,sup_deviation`.
    pub fn curve_csv(&self) -> String {
        curve_csv(&self.curve)
    }
}

pub fn curve_csv(curve: &[DeviationProbe]) -> String {
    let mut out = String::from("eps,sup_deviation\n");
    for p in curve {
        out.push_str(&format!("{:.16e},{:.16e}\n", p.eps, p.sup_deviation));
    }
    out
}

/// Probe grid for the penalty search: powers of two from 2 down to 2^-20.
pub fn eps_probe_grid() -> Vec<f64> {
    (-20..=1).rev().map(|k| 2f64.powi(k)).collect()
}

/// Largest probed eps whose vector-envelope deviation from the input
/// fields is at most `target`. Every smaller probe is evaluated and
/// verified against the target (not assumed from monotonicity); the full
/// curve is returned for reporting.
pub fn find_eps_hat(
    fields: &[ScalarField],
    cloud: &PointCloud,
    metric: &MetricSpec,
    target: f64,
) -> Result<EpsHatResult, EnvelopeError> {
    if !(target > 0.0) {
        return Err(EnvelopeError::NonPositiveTarget { got: target });
    }
    if fields.is_empty() {
        return Err(EnvelopeError::ComponentCount { expected: 1, got: 0 });
    }
    let dists = metric.bind(cloud)?.matrix();
    let mut curve = Vec::new();
    let mut eps_hat: Option<(f64, f64)> = None;
    let mut best = f64::INFINITY;
    for eps in eps_probe_grid() {
        let components = fields
            .iter()
            .map(|f| inf_convolution_with(f, &dists, metric, eps))
            .collect::<Result<Vec<_>, _>>()?;
        let env = VectorEnvelope::new(components)?;
        let dev = uniform_deviation(&env, fields)?;
        curve.push(DeviationProbe { eps, sup_deviation: dev });
        best = best.min(dev);
        match eps_hat {
            None if dev <= target => eps_hat = Some((eps, dev)),
            Some(_) if dev > target => {
                // a smaller probe violating the target would contradict
                // monotonicity of the envelope in eps; report rather than
                // certify a broken bound
                return Err(EnvelopeError::NoFeasibleEps { target, best: dev, curve });
            }
            _ => {}
        }
    }
    match eps_hat {
        Some((eps, deviation)) => Ok(EpsHatResult { eps_hat: eps, deviation, target, curve }),
        None => Err(EnvelopeError::NoFeasibleEps { target, best, curve }),
    }
}
