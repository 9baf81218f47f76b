//! Numerics for Hausdorff premeasures, Lipschitz regularization, and
//! planar topological degree under pluggable metrics.
//!
//! The crate turns a measure-geometric construction into executable,
//! testable pieces:
//!
//! - [`cloud`] / [`cantor`]: deterministic finite point sets (grids,
//!   ball grids, Cantor endpoint enumerations).
//! - [`metric`]: declarative metric specs (Euclidean, scaled, snowflake
//!   powers, Cantor pullbacks, explicit tables), evaluation, and
//!   exhaustive metric-axiom validation.
//! - [`covers`]: canonical covers, premeasure upper bounds
//!   `sum diam^s`, and box-counting dimension estimates.
//! - [`envelope`]: inf-convolution envelopes
//!   `f_eps(x) = min_z [f(z) + rho(x,z)/eps]` with certified Lipschitz
//!   bounds, monotonicity checks, and the deviation-certified penalty
//!   search.
//! - [`degree`]: 1D endpoint degree and 2D winding degree with adaptive
//!   boundary refinement, homotopy scans, and preimage search.
//! - [`pipelines`]: end-to-end reports combining the above.
//!
//! Everything is deterministic: identical inputs produce identical
//! outputs, including argmin witnesses and sampled validation scans.

pub mod cantor;
pub mod cloud;
pub mod covers;
pub mod degree;
pub mod envelope;
pub mod metric;
pub mod pipelines;

pub use cloud::{build_point_set, PointCloud, ShapeSpec};
pub use covers::{
    box_counting_dimension, canonical_covers, premeasure_upper, Cover, DimensionEstimate,
    MeasureEstimate,
};
pub use degree::{degree_1d, winding_degree_2d, BoundaryLoop, DegreeResult};
pub use envelope::{find_eps_hat, inf_convolution, EnvelopeResult, ScalarField, VectorEnvelope};
pub use metric::{eval_metric, validate_metric, MetricReport, MetricSpec};
pub use pipelines::{
    cantor_counterexample, snowflake_dimension_report, verify_theorem, CounterexampleReport,
    SnowflakeReport, TheoremConfig, TheoremReport,
};
