//! Numerical Brouwer degree in ambient dimensions 1 and 2.
//!
//! In 1D the degree over an interval reduces to the endpoint sign
//! formula. In 2D it is the winding number of the boundary image around
//! the target: signed angle increments are summed along the sampled
//! loop, and any arc whose increment reaches pi/2 is adaptively bisected
//! by requesting fresh samples from the map, up to a depth cap. An arc
//! budget of pi/2 rules out winding ambiguity between consecutive
//! samples of a continuous map, so a fully refined sum is certified and
//! must land within 1e-6 of an integer.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::PointCloud;

/// Below this distance from the target, angle increments are
/// numerically meaningless and the degree precondition is violated.
pub const TARGET_GAP_TOL: f64 = 1e-9;
/// Per-arc certification threshold.
const CERT_ANGLE: f64 = std::f64::consts::FRAC_PI_2;
/// Bisection depth cap per original arc.
const MAX_DEPTH: u32 = 24;
/// Winding sums further than this from an integer are rejected.
const INTEGER_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DegreeError {
    #[error("target is within {gap} of a boundary image (tolerance {TARGET_GAP_TOL})")]
    TargetOnBoundary { gap: f64 },
    #[error("refinement depth exhausted with an uncertified arc near t = {t}")]
    RefinementExhausted { t: f64 },
    #[error("arc at t = {t} needs refinement but no map callback was provided")]
    NeedsRefinement { t: f64 },
    #[error("winding sum {winding} is not within {INTEGER_TOL} of an integer")]
    NonIntegerWinding { winding: f64 },
    #[error("boundary loop needs at least {expected} samples, got {got}")]
    TooFewSamples { expected: usize, got: usize },
    #[error("loop parameters must be strictly increasing in [0, 1)")]
    BadParameters,
    #[error("loop contains a non-finite sample")]
    NonFiniteSample,
    #[error("sample has dimension {got}, expected {expected}")]
    SampleDimension { got: usize, expected: usize },
    #[error("domain is empty")]
    EmptyDomain,
}

/// One boundary sample: parameter, domain point, image point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Ordered samples of a map restricted to a domain boundary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryLoop {
    pub samples: Vec<LoopSample>,
    pub closed: bool,
    pub domain: String,
}

impl BoundaryLoop {
    pub fn new(samples: Vec<LoopSample>, closed: bool, domain: &str) -> Result<Self, DegreeError> {
        let min = if closed { 3 } else { 2 };
        if samples.len() < min {
            return Err(DegreeError::TooFewSamples { expected: min, got: samples.len() });
        }
        for w in samples.windows(2) {
            if !(w[0].t < w[1].t) {
                return Err(DegreeError::BadParameters);
            }
        }
        if samples[0].t < 0.0 || samples.last().unwrap().t >= 1.0 {
            return Err(DegreeError::BadParameters);
        }
        for s in &samples {
            if s.x.iter().chain(&s.y).any(|v| !v.is_finite()) {
                return Err(DegreeError::NonFiniteSample);
            }
        }
        Ok(BoundaryLoop { samples, closed, domain: domain.to_string() })
    }

    /// Samples a closed 2D boundary curve: `param` maps t in [0,1) to a
    /// domain point, `map` sends domain points to image points.
    pub fn sample(
        param: &dyn Fn(f64) -> [f64; 2],
        map: &dyn Fn([f64; 2]) -> [f64; 2],
        n_samples: usize,
        domain: &str,
    ) -> Result<Self, DegreeError> {
        let samples = (0..n_samples)
            .map(|i| {
                let t = i as f64 / n_samples as f64;
                let x = param(t);
                let y = map(x);
                LoopSample { t, x: x.to_vec(), y: y.to_vec() }
            })
            .collect();
        BoundaryLoop::new(samples, true, domain)
    }

    /// CSV with header `t,x1,x2,f1,f2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2,f1,f2\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                s.t, s.x[0], s.x[1], s.y[0], s.y[1]
            ));
        }
        out
    }
}

/// Counterclockwise parameterization of a circle boundary.
pub fn circle_param(center: [f64; 2], radius: f64) -> impl Fn(f64) -> [f64; 2] {
    move |t: f64| {
        let theta = 2.0 * std::f64::consts::PI * t;
        [center[0] + radius * theta.cos(), center[1] + radius * theta.sin()]
    }
}

/// Counterclockwise arc-length parameterization of a box boundary,
/// starting at the lower-left corner.
pub fn box_param(lo: [f64; 2], hi: [f64; 2]) -> impl Fn(f64) -> [f64; 2] {
    let w = hi[0] - lo[0];
    let h = hi[1] - lo[1];
    let per = 2.0 * (w + h);
    move |t: f64| {
        let s = t.rem_euclid(1.0) * per;
        if s < w {
            [lo[0] + s, lo[1]]
        } else if s < w + h {
            [hi[0], lo[1] + (s - w)]
        } else if s < 2.0 * w + h {
            [hi[0] - (s - w - h), hi[1]]
        } else {
            [lo[0], hi[1] - (s - 2.0 * w - h)]
        }
    }
}

/// Boundary sampling callback: parameter t to (domain point, image point).
pub type RefineFn<'a> = &'a dyn Fn(f64) -> ([f64; 2], [f64; 2]);

/// Integer degree with certification diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeResult {
    pub degree: i32,
    pub target: Vec<f64>,
    pub min_boundary_gap: f64,
    pub refinements: u32,
    pub certified: bool,
    /// Pre-rounding winding sum (total angle / 2 pi).
    pub winding: f64,
}

/// 1D degree from endpoint images: `(sign(f(b)-z) - sign(f(a)-z)) / 2`.
pub fn degree_1d(f_a: f64, f_b: f64, z: f64) -> Result<i32, DegreeError> {
    let ga = f_a - z;
    let gb = f_b - z;
    let gap = ga.abs().min(gb.abs());
    if gap <= TARGET_GAP_TOL {
        return Err(DegreeError::TargetOnBoundary { gap });
    }
    let sign = |v: f64| if v > 0.0 { 1i32 } else { -1i32 };
    Ok((sign(gb) - sign(ga)) / 2)
}

/// Winding-number degree of a sampled boundary loop around `z`.
///
/// With a `refine` callback, arcs whose angle increment reaches pi/2 are
/// bisected (the callback receives the parameter and returns the domain
/// and image points there) until certified or the depth cap trips.
/// Without a callback the raw sum is returned and `certified` reports
/// whether every arc stayed below the threshold.
pub fn winding_degree_2d(
    boundary: &BoundaryLoop,
    refine: Option<RefineFn<'_>>,
    z: [f64; 2],
) -> Result<DegreeResult, DegreeError> {
    for s in &boundary.samples {
        if s.y.len() != 2 || s.x.len() != 2 {
            return Err(DegreeError::SampleDimension { got: s.y.len(), expected: 2 });
        }
    }
    let mut min_gap = f64::INFINITY;
    let mut offsets = Vec::with_capacity(boundary.samples.len());
    for s in &boundary.samples {
        let u = [s.y[0] - z[0], s.y[1] - z[1]];
        let gap = (u[0] * u[0] + u[1] * u[1]).sqrt();
        min_gap = min_gap.min(gap);
        if gap <= TARGET_GAP_TOL {
            return Err(DegreeError::TargetOnBoundary { gap });
        }
        offsets.push((s.t, u));
    }

    let mut total = 0.0;
    let mut refinements = 0u32;
    let mut certified = true;
    let n = offsets.len();
    for i in 0..n {
        let (t0, u0) = offsets[i];
        let (t1, u1) = if i + 1 < n {
            offsets[i + 1]
        } else {
            // wrap: parameter continues past 1 to close the loop
            (offsets[0].0 + 1.0, offsets[0].1)
        };
        total += arc_angle(t0, u0, t1, u1, 0, refine, z, &mut refinements, &mut min_gap, &mut certified)?;
    }

    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if certified && (winding - rounded).abs() > INTEGER_TOL {
        return Err(DegreeError::NonIntegerWinding { winding });
    }
    Ok(DegreeResult {
        degree: rounded as i32,
        target: z.to_vec(),
        min_boundary_gap: min_gap,
        refinements,
        certified,
        winding,
    })
}

#[allow(clippy::too_many_arguments)]
fn arc_angle(
    t0: f64,
    u0: [f64; 2],
    t1: f64,
    u1: [f64; 2],
    depth: u32,
    refine: Option<RefineFn<'_>>,
    z: [f64; 2],
    refinements: &mut u32,
    min_gap: &mut f64,
    certified: &mut bool,
) -> Result<f64, DegreeError> {
    let cross = u0[0] * u1[1] - u0[1] * u1[0];
    let dot = u0[0] * u1[0] + u0[1] * u1[1];
    let dtheta = cross.atan2(dot);
    if dtheta.abs() < CERT_ANGLE {
        return Ok(dtheta);
    }
    let Some(callback) = refine else {
        *certified = false;
        return Ok(dtheta);
    };
    if depth >= MAX_DEPTH {
        return Err(DegreeError::RefinementExhausted { t: t0 });
    }
    let tm = 0.5 * (t0 + t1);
    let (_, ym) = callback(tm.rem_euclid(1.0));
    let um = [ym[0] - z[0], ym[1] - z[1]];
    let gap = (um[0] * um[0] + um[1] * um[1]).sqrt();
    *min_gap = min_gap.min(gap);
    if gap <= TARGET_GAP_TOL {
        return Err(DegreeError::TargetOnBoundary { gap });
    }
    *refinements += 1;
    let left = arc_angle(t0, u0, tm, um, depth + 1, refine, z, refinements, min_gap, certified)?;
    let right = arc_angle(tm, um, t1, u1, depth + 1, refine, z, refinements, min_gap, certified)?;
    Ok(left + right)
}

/// Outcome of one homotopy step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomotopyStep {
    pub t: f64,
    pub degree: Option<i32>,
    pub min_gap: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum HomotopyVerdict {
    Invariant { degree: i32 },
    DegreeChanged,
    Inadmissible { t: f64 },
}

/// Degrees along a family of maps, with an invariance verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomotopyScan {
    pub steps: Vec<HomotopyStep>,
    pub verdict: HomotopyVerdict,
}

impl HomotopyScan {
    pub fn is_invariant(&self) -> bool {
        matches!(self.verdict, HomotopyVerdict::Invariant { .. })
    }

    fn from_steps(steps: Vec<HomotopyStep>) -> Self {
        let verdict = if let Some(bad) = steps.iter().find(|s| s.degree.is_none()) {
            HomotopyVerdict::Inadmissible { t: bad.t }
        } else {
            let degrees: Vec<i32> = steps.iter().filter_map(|s| s.degree).collect();
            if degrees.windows(2).all(|w| w[0] == w[1]) {
                HomotopyVerdict::Invariant { degree: degrees[0] }
            } else {
                HomotopyVerdict::DegreeChanged
            }
        };
        HomotopyScan { steps, verdict }
    }
}

/// 2D homotopy scan: for each `t` in `t_grid` the map `family(t, .)` is
/// sampled along `param` and its degree at `z` computed with adaptive
/// refinement. Per-step failures are collected, not thrown.
pub fn homotopy_scan(
    param: &dyn Fn(f64) -> [f64; 2],
    family: &dyn Fn(f64, [f64; 2]) -> [f64; 2],
    n_samples: usize,
    z: [f64; 2],
    t_grid: &[f64],
) -> HomotopyScan {
    let steps = t_grid
        .iter()
        .map(|&t| {
            let map = |x: [f64; 2]| family(t, x);
            let step = BoundaryLoop::sample(param, &map, n_samples, "homotopy")
                .and_then(|bl| {
                    let refine = |s: f64| {
                        let x = param(s);
                        (x, family(t, x))
                    };
                    winding_degree_2d(&bl, Some(&refine), z)
                });
            match step {
                Ok(res) => HomotopyStep {
                    t,
                    degree: Some(res.degree),
                    min_gap: Some(res.min_boundary_gap),
                    error: None,
                },
                Err(e) => HomotopyStep {
                    t,
                    degree: None,
                    min_gap: None,
                    error: Some(format!("homotopy leaves admissible class at t = {t}: {e}")),
                },
            }
        })
        .collect();
    HomotopyScan::from_steps(steps)
}

/// 1D homotopy scan over interval endpoint images.
pub fn homotopy_scan_1d(
    family: &dyn Fn(f64, f64) -> f64,
    a: f64,
    b: f64,
    z: f64,
    t_grid: &[f64],
) -> HomotopyScan {
    let steps = t_grid
        .iter()
        .map(|&t| {
            let fa = family(t, a);
            let fb = family(t, b);
            match degree_1d(fa, fb, z) {
                Ok(degree) => HomotopyStep {
                    t,
                    degree: Some(degree),
                    min_gap: Some((fa - z).abs().min((fb - z).abs())),
                    error: None,
                },
                Err(e) => HomotopyStep {
                    t,
                    degree: None,
                    min_gap: None,
                    error: Some(format!("homotopy leaves admissible class at t = {t}: {e}")),
                },
            }
        })
        .collect();
    HomotopyScan::from_steps(steps)
}

/// Result of a grid search for a preimage of `z`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PreimageSearch {
    pub witness_index: Option<usize>,
    pub witness: Option<Vec<f64>>,
    pub residual: f64,
    pub tolerance: f64,
}

impl PreimageSearch {
    pub fn found(&self) -> bool {
        self.witness.is_some()
    }
}

/// Scans precomputed images of the domain samples for the point closest
/// to `z` (ties to the lowest index); a witness is reported only when
/// the residual is within `tol`.
pub fn find_preimage(
    images: &[Vec<f64>],
    domain: &PointCloud,
    z: &[f64],
    tol: f64,
) -> Result<PreimageSearch, DegreeError> {
    if domain.is_empty() || images.is_empty() {
        return Err(DegreeError::EmptyDomain);
    }
    let mut best = f64::INFINITY;
    let mut best_idx = 0usize;
    for (i, image) in images.iter().enumerate() {
        if image.len() != z.len() {
            return Err(DegreeError::SampleDimension { got: image.len(), expected: z.len() });
        }
        let r2: f64 = image.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
        let r = r2.sqrt();
        if r < best {
            best = r;
            best_idx = i;
        }
    }
    Ok(if best <= tol {
        PreimageSearch {
            witness_index: Some(best_idx),
            witness: Some(domain.point(best_idx).to_vec()),
            residual: best,
            tolerance: tol,
        }
    } else {
        PreimageSearch { witness_index: None, witness: None, residual: best, tolerance: tol }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk_loop(map: impl Fn([f64; 2]) -> [f64; 2], n: usize) -> BoundaryLoop {
        let param = circle_param([0.0, 0.0], 1.0);
        BoundaryLoop::sample(&param, &|x| map(x), n, "disk").unwrap()
    }

    #[test]
    fn identity_interval_degree_one() {
        assert_eq!(degree_1d(-1.0, 1.0, 0.0).unwrap(), 1);
    }

    #[test]
    fn cubic_endpoint_signs() {
        // x^3 - x on [-2, 2]: f(-2) = -6, f(2) = 6
        assert_eq!(degree_1d(-6.0, 6.0, 0.0).unwrap(), 1);
    }

    #[test]
    fn even_multiplicity_invisible() {
        // x^2 on [-1, 1]: both endpoint images are 1
        assert_eq!(degree_1d(1.0, 1.0, 0.0).unwrap(), 0);
    }

    #[test]
    fn endpoint_hit_is_an_error() {
        assert!(matches!(degree_1d(0.0, 1.0, 0.0), Err(DegreeError::TargetOnBoundary { .. })));
    }

    #[test]
    fn identity_disk_degree_one() {
        let bl = disk_loop(|x| x, 64);
        let res = winding_degree_2d(&bl, None, [0.0, 0.0]).unwrap();
        assert_eq!(res.degree, 1);
        assert!(res.certified);
        assert!((res.winding - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn complex_square_degree_two() {
        let sq = |x: [f64; 2]| [x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]];
        let bl = disk_loop(sq, 64);
        let res = winding_degree_2d(&bl, None, [0.1, 0.0]).unwrap();
        assert_eq!(res.degree, 2);
        assert!(res.certified);
    }

    #[test]
    fn translation_outside_degree_zero() {
        let bl = disk_loop(|x| [x[0] + 3.0, x[1]], 64);
        let res = winding_degree_2d(&bl, None, [0.0, 0.0]).unwrap();
        assert_eq!(res.degree, 0);
        assert!((res.min_boundary_gap - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn antipodal_degree_one() {
        let bl = disk_loop(|x| [-x[0], -x[1]], 64);
        let res = winding_degree_2d(&bl, None, [0.0, 0.0]).unwrap();
        assert_eq!(res.degree, 1, "a planar rotation by pi still winds once");
    }

    #[test]
    fn refinement_certifies_coarse_loop() {
        // 3 samples of the identity circle leave arcs of 2pi/3 >= pi/2;
        // the callback must be consulted to certify
        let param = circle_param([0.0, 0.0], 1.0);
        let bl = BoundaryLoop::sample(&param, &|x| x, 3, "disk").unwrap();
        let refine = |t: f64| {
            let x = param(t);
            (x, x)
        };
        let res = winding_degree_2d(&bl, Some(&refine), [0.0, 0.0]).unwrap();
        assert_eq!(res.degree, 1);
        assert!(res.refinements > 0);
        assert!(res.certified);
    }

    #[test]
    fn uncallbacked_coarse_loop_is_uncertified() {
        let param = circle_param([0.0, 0.0], 1.0);
        let bl = BoundaryLoop::sample(&param, &|x| x, 3, "disk").unwrap();
        let res = winding_degree_2d(&bl, None, [0.0, 0.0]).unwrap();
        assert!(!res.certified);
    }

    #[test]
    fn target_near_boundary_rejected() {
        let bl = disk_loop(|x| x, 64);
        let err = winding_degree_2d(&bl, None, [1.0, 0.0]);
        assert!(matches!(err, Err(DegreeError::TargetOnBoundary { .. })));
    }

    #[test]
    fn translation_family_is_invariant() {
        let param = circle_param([0.0, 0.0], 1.0);
        let family = |t: f64, x: [f64; 2]| [x[0] + 0.1 * t, x[1]];
        let t_grid: Vec<f64> = (0..=4).map(|i| i as f64 / 4.0).collect();
        let scan = homotopy_scan(&param, &family, 64, [0.0, 0.0], &t_grid);
        assert_eq!(scan.verdict, HomotopyVerdict::Invariant { degree: 1 });
    }

    #[test]
    fn crossing_family_reports_inadmissible_step() {
        // x - t*(2, 0): at t = 0.5 the boundary image passes through 0
        let param = circle_param([0.0, 0.0], 1.0);
        let family = |t: f64, x: [f64; 2]| [x[0] - 2.0 * t, x[1]];
        let t_grid = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let scan = homotopy_scan(&param, &family, 64, [0.0, 0.0], &t_grid);
        match scan.verdict {
            HomotopyVerdict::Inadmissible { t } => assert!((t - 0.5).abs() <= 0.26),
            other => panic!("expected inadmissible verdict, got {other:?}"),
        }
        let bad = scan.steps.iter().find(|s| s.error.is_some()).unwrap();
        assert!(bad.error.as_ref().unwrap().contains("leaves admissible class"));
    }

    #[test]
    fn interval_homotopy_scan_detects_crossing() {
        // x - 2t on [-1, 1] at z = 0: the right endpoint image crosses
        // the target at t = 0.5
        let family = |t: f64, x: f64| x - 2.0 * t;
        let t_grid = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let scan = homotopy_scan_1d(&family, -1.0, 1.0, 0.0, &t_grid);
        assert_eq!(scan.verdict, HomotopyVerdict::Inadmissible { t: 0.5 });
    }

    #[test]
    fn interval_homotopy_scan_invariant_for_small_shift() {
        let family = |t: f64, x: f64| x + 0.1 * t;
        let t_grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let scan = homotopy_scan_1d(&family, -1.0, 1.0, 0.0, &t_grid);
        assert_eq!(scan.verdict, HomotopyVerdict::Invariant { degree: 1 });
    }

    #[test]
    fn box_param_walks_perimeter() {
        let param = box_param([0.0, 0.0], [2.0, 1.0]);
        assert_eq!(param(0.0), [0.0, 0.0]);
        // perimeter 6: t = 1/3 is distance 2 along, the lower-right corner
        let p = param(2.0 / 6.0);
        assert!((p[0] - 2.0).abs() <= 1e-12 && p[1].abs() <= 1e-12);
    }

    #[test]
    fn preimage_identity_grid() {
        let cloud = crate::cloud::build_point_set(&crate::cloud::ShapeSpec::Grid {
            bounds: vec![[-1.0, 1.0], [-1.0, 1.0]],
            points_per_axis: 41,
        })
        .unwrap();
        let images: Vec<Vec<f64>> = cloud.iter_points().map(|p| p.to_vec()).collect();
        let res = find_preimage(&images, &cloud, &[0.3, 0.2], 0.05).unwrap();
        assert!(res.found());
        assert!(res.residual <= 0.05);
        let w = res.witness.unwrap();
        assert!((w[0] - 0.3).abs() <= 0.05 && (w[1] - 0.2).abs() <= 0.05);
    }

    #[test]
    fn preimage_not_found_reports_residual() {
        let cloud = crate::cloud::build_point_set(&crate::cloud::ShapeSpec::BallGrid {
            radius: 1.0,
            points_per_axis: 21,
            dim: 2,
        })
        .unwrap();
        let images: Vec<Vec<f64>> = cloud.iter_points().map(|p| vec![p[0] + 3.0, p[1]]).collect();
        let res = find_preimage(&images, &cloud, &[0.0, 0.0], 0.1).unwrap();
        assert!(!res.found());
        assert!((res.residual - 2.0).abs() <= 0.01, "distance from 0 to the translated ball");
    }
}
