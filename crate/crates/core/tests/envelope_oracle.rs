//! Oracle checks for the envelope machinery: closed forms and an
//! independent brute-force minimizer written out in this file.

use hausmet_core::cloud::{build_point_set, PointCloud, ShapeSpec};
use hausmet_core::envelope::{
    coordinate_field, find_eps_hat, inf_convolution, lipschitz_check, uniform_deviation,
    ScalarField, VectorEnvelope,
};
use hausmet_core::metric::MetricSpec;

/// Test-local distance: deliberately not routed through MetricSpec.
fn oracle_dist(metric: &MetricSpec, x: &[f64], y: &[f64]) -> f64 {
    let eucl: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    match metric {
        MetricSpec::Euclidean => eucl,
        MetricSpec::Scaled { c } => c * eucl,
        MetricSpec::Snowflake { alpha } => eucl.powf(*alpha),
        _ => unreachable!("oracle covers analytic kinds only"),
    }
}

/// Test-local envelope: direct minimization, no pruning, no shared code
/// beyond arithmetic.
fn oracle_envelope(cloud: &PointCloud, f: &[f64], metric: &MetricSpec, eps: f64) -> Vec<f64> {
    (0..cloud.len())
        .map(|i| {
            let mut best = f64::INFINITY;
            for j in 0..cloud.len() {
                let cand = f[j] + oracle_dist(metric, cloud.point(i), cloud.point(j)) / eps;
                if cand < best {
                    best = cand;
                }
            }
            best
        })
        .collect()
}

fn grid(n: usize) -> PointCloud {
    build_point_set(&ShapeSpec::Grid { bounds: vec![[-1.0, 1.0]], points_per_axis: n }).unwrap()
}

#[test]
fn fixed_point_matches_brute_force() {
    let cloud = grid(101);
    let f = coordinate_field(&cloud, 0).unwrap();
    let env = inf_convolution(&f, &cloud, &MetricSpec::Euclidean, 0.5).unwrap();
    let oracle = oracle_envelope(&cloud, &f.values, &MetricSpec::Euclidean, 0.5);
    assert_eq!(env.values, oracle);
    assert_eq!(env.values, f.values, "1/eps = 2 >= Lip(f) = 1: McShane fixed point");
}

#[test]
fn large_eps_closed_form_and_brute_force_agree() {
    let cloud = grid(101);
    let f = coordinate_field(&cloud, 0).unwrap();
    let env = inf_convolution(&f, &cloud, &MetricSpec::Euclidean, 10.0).unwrap();
    let oracle = oracle_envelope(&cloud, &f.values, &MetricSpec::Euclidean, 10.0);
    assert_eq!(env.values, oracle);
    for (i, p) in cloud.iter_points().enumerate() {
        let closed_form = -1.0 + (p[0] + 1.0) / 10.0;
        assert!((env.values[i] - closed_form).abs() <= 1e-15);
    }
}

#[test]
fn snowflake_deviation_curve_from_oracle() {
    // deviation at each eps equals the oracle's, and decreases strictly
    // while positive as eps shrinks
    let cloud = grid(101);
    let f = coordinate_field(&cloud, 0).unwrap();
    let metric = MetricSpec::Snowflake { alpha: 0.5 };
    let eps_grid = [2.0, 1.5, 1.0, 0.8, 0.707, 0.5, 0.25, 0.05];
    let mut last = f64::INFINITY;
    for eps in eps_grid {
        let env = inf_convolution(&f, &cloud, &metric, eps).unwrap();
        let venv = VectorEnvelope::new(vec![env]).unwrap();
        let dev = uniform_deviation(&venv, std::slice::from_ref(&f)).unwrap();

        let oracle_vals = oracle_envelope(&cloud, &f.values, &metric, eps);
        let oracle_dev = oracle_vals
            .iter()
            .zip(&f.values)
            .map(|(v, fv)| (fv - v).abs())
            .fold(0.0f64, f64::max);
        assert!((dev - oracle_dev).abs() <= 1e-15, "eps={eps}: {dev} vs oracle {oracle_dev}");

        assert!(dev <= last, "deviation must not increase as eps shrinks");
        if dev > 0.0 && last > dev && last.is_finite() {
            assert!(dev < last, "strict decrease while positive");
        }
        last = dev;
    }
    // small eps reaches exactness on the finite sample
    assert_eq!(last, 0.0);
}

#[test]
fn sandwich_for_coordinate_projections_on_ball() {
    let cloud = build_point_set(&ShapeSpec::BallGrid { radius: 1.0, points_per_axis: 17, dim: 2 })
        .unwrap();
    for axis in 0..2 {
        let f = coordinate_field(&cloud, axis).unwrap();
        for metric in [
            MetricSpec::Euclidean,
            MetricSpec::Scaled { c: 2.0 },
            MetricSpec::Snowflake { alpha: 0.5 },
        ] {
            for eps in [0.25, 1.0, 4.0] {
                let env = inf_convolution(&f, &cloud, &metric, eps).unwrap();
                for (i, v) in env.values.iter().enumerate() {
                    assert!(*v <= f.values[i], "envelope below the field");
                    assert!(*v >= -1.0 && f.values[i] <= 1.0, "1 >= f >= f_eps >= -1");
                }
            }
        }
    }
}

#[test]
fn lipschitz_bound_certified_across_metrics_and_fields() {
    let cloud = grid(61);
    let coord = coordinate_field(&cloud, 0).unwrap();
    let bumpy = ScalarField::new(
        &cloud,
        "bumpy",
        cloud.iter_points().map(|p| (4.0 * p[0]).sin() + 0.5 * p[0]).collect(),
    )
    .unwrap();
    for f in [&coord, &bumpy] {
        for metric in [
            MetricSpec::Euclidean,
            MetricSpec::Scaled { c: 2.0 },
            MetricSpec::Snowflake { alpha: 0.5 },
        ] {
            for eps in [0.1, 0.5, 2.0] {
                let env = inf_convolution(f, &cloud, &metric, eps).unwrap();
                let v = lipschitz_check(&env, &cloud).unwrap();
                assert!(v <= 1e-12, "{} under {:?} at eps {eps}: violation {v}", f.name, metric);
            }
        }
    }
}

#[test]
fn scaled_metric_halves_the_effective_slope() {
    // under rho = 2 * euclidean the coordinate is (1/2)-Lipschitz, so the
    // envelope fixes it up to eps = 2
    let cloud = grid(33);
    let f = coordinate_field(&cloud, 0).unwrap();
    let metric = MetricSpec::Scaled { c: 2.0 };
    let res = find_eps_hat(std::slice::from_ref(&f), &cloud, &metric, 0.5).unwrap();
    assert_eq!(res.eps_hat, 2.0);
    assert_eq!(res.deviation, 0.0, "dyadic grid keeps the fixed point exact");
}

#[test]
fn snowflake_ball_eps_hat_exists_with_certified_deviation() {
    let cloud = build_point_set(&ShapeSpec::BallGrid { radius: 1.0, points_per_axis: 17, dim: 2 })
        .unwrap();
    let fields: Vec<ScalarField> =
        (0..2).map(|a| coordinate_field(&cloud, a).unwrap()).collect();
    let res = find_eps_hat(&fields, &cloud, &MetricSpec::Snowflake { alpha: 0.5 }, 0.5).unwrap();
    assert!(res.eps_hat > 0.0);
    assert!(res.deviation <= 0.5);
    // every probe below eps_hat stays within the target
    for p in res.curve.iter().filter(|p| p.eps <= res.eps_hat) {
        assert!(p.sup_deviation <= 0.5);
    }
}
