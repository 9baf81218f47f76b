//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Every tolerance is pinned here, in code. Runtime limits are asserted
//! with wall-clock measurements around the relevant computation.

use std::process::Command;
use std::time::Instant;

use hausmet_core::cloud::{build_point_set, PointCloud, ShapeSpec};
use hausmet_core::covers::{box_counting_dimension, canonical_level, premeasure_upper};
use hausmet_core::degree::{
    circle_param, box_param, homotopy_scan, winding_degree_2d, BoundaryLoop, HomotopyVerdict,
};
use hausmet_core::envelope::{
    coordinate_field, find_eps_hat, inf_convolution, inf_conv_at, lipschitz_check,
    monotonicity_check, uniform_deviation, ScalarField, VectorEnvelope,
};
use hausmet_core::metric::MetricSpec;
use hausmet_core::pipelines::cantor_counterexample;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hausmet"))
}

#[test]
fn criterion_cantor_dimension() {
    let start = Instant::now();
    let shape = ShapeSpec::Cantor { level: 12 };
    let est = box_counting_dimension(&shape, &MetricSpec::Euclidean, 4, 12).unwrap();
    assert!(
        est.dim >= 0.62 && est.dim <= 0.642,
        "cantor dimension {} outside [0.62, 0.642]",
        est.dim
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "PASS: cantor box-counting dimension {} in [0.62, 0.642] ({} ms)",
        est.dim,
        elapsed.as_millis()
    );
}

#[test]
fn criterion_snowflake_doubling() {
    let start = Instant::now();
    let interval = ShapeSpec::Grid { bounds: vec![[0.0, 1.0]], points_per_axis: 3 };
    let snow = MetricSpec::Snowflake { alpha: 0.5 };
    let interval_dim = box_counting_dimension(&interval, &snow, 4, 12).unwrap().dim;
    assert!(
        interval_dim >= 1.95 && interval_dim <= 2.05,
        "snowflake interval dimension {interval_dim} outside [1.95, 2.05]"
    );
    let cantor = ShapeSpec::Cantor { level: 12 };
    let cantor_dim = box_counting_dimension(&cantor, &snow, 4, 12).unwrap().dim;
    assert!(
        cantor_dim >= 1.24 && cantor_dim <= 1.285,
        "snowflake cantor dimension {cantor_dim} outside [1.24, 1.285]"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "PASS: snowflake(0.5) doubles dimensions: [0,1] -> {interval_dim}, cantor -> {cantor_dim} ({} ms)",
        elapsed.as_millis()
    );
}

#[test]
fn criterion_transport_identity() {
    let snow = MetricSpec::Snowflake { alpha: 0.5 };
    let shapes = [
        ShapeSpec::Grid { bounds: vec![[0.0, 1.0]], points_per_axis: 3 },
        ShapeSpec::Cantor { level: 12 },
    ];
    let mut worst: f64 = 0.0;
    for shape in &shapes {
        for k in 1..=10u32 {
            let delta = canonical_level(shape, &MetricSpec::Euclidean, k).unwrap().diameter;
            for s in [0.5, 0.63093, 1.0] {
                let e = premeasure_upper(shape, &MetricSpec::Euclidean, s, delta).unwrap();
                let f = premeasure_upper(shape, &snow, 2.0 * s, delta.sqrt()).unwrap();
                let rel = (e.value - f.value).abs() / e.value.abs();
                worst = worst.max(rel);
                assert!(
                    rel <= 1e-12,
                    "{} k={k} s={s}: euclidean {} vs snowflake {} (rel {rel})",
                    shape.descriptor(),
                    e.value,
                    f.value
                );
            }
        }
    }
    println!("PASS: transport identity on [0,1] and cantor covers, worst relative error {worst:e}");
}

#[test]
fn criterion_counterexample_decay() {
    for (n, base) in [(1usize, 2.0f64 / 3.0), (2, 2.0 / 9.0)] {
        let report = cantor_counterexample(n, 12).unwrap();
        assert_eq!(report.levels, (0..=12).collect::<Vec<_>>());
        for (k, bound) in report.levels.iter().zip(&report.upper_bounds) {
            let expected = base.powi(*k as i32);
            let rel = (bound - expected).abs() / expected;
            assert!(rel <= 1e-12, "n={n} k={k}: {bound} vs {expected} (rel {rel})");
        }
        for w in report.upper_bounds.windows(2) {
            assert!(w[1] < w[0], "n={n}: bounds must strictly decrease");
        }
    }
    println!("PASS: counterexample bounds equal (2/3)^k and (2/9)^k to 1e-12, strictly decreasing");
}

#[test]
fn criterion_envelope_laws() {
    let cloud = build_point_set(&ShapeSpec::Grid {
        bounds: vec![[-1.0, 1.0]],
        points_per_axis: 65,
    })
    .unwrap();
    let metrics = [
        MetricSpec::Euclidean,
        MetricSpec::Scaled { c: 2.0 },
        MetricSpec::Snowflake { alpha: 0.5 },
    ];
    let coord = coordinate_field(&cloud, 0).unwrap();
    let affine = ScalarField::new(
        &cloud,
        "affine",
        cloud.iter_points().map(|p| 0.5 * p[0] - 0.25).collect(),
    )
    .unwrap();
    let fields = [&coord, &affine];

    for metric in &metrics {
        let bound = metric.bind(&cloud).unwrap();
        for field in fields {
            // certified Lipschitz bound
            for eps in [0.25, 1.0, 4.0] {
                let env = inf_convolution(field, &cloud, metric, eps).unwrap();
                let v = lipschitz_check(&env, &cloud).unwrap();
                assert!(v <= 1e-12, "{:?}/{}: lipschitz violation {v}", metric, field.name);
            }

            // envelope nonincreasing in eps across 5 nested power-of-two pairs
            let ladder = [0.0625, 0.125, 0.25, 0.5, 1.0, 2.0];
            let envs: Vec<_> = ladder
                .iter()
                .map(|&eps| inf_convolution(field, &cloud, metric, eps).unwrap())
                .collect();
            for pair in envs.windows(2) {
                let v = monotonicity_check(&pair[0], &pair[1]).unwrap();
                assert!(v <= 0.0, "{:?}/{}: monotonicity violation {v}", metric, field.name);
            }

            // McShane fixed point, exact, at 1/eps = 2 * Lip(f)
            let mut lip: f64 = 0.0;
            for i in 0..cloud.len() {
                for j in (i + 1)..cloud.len() {
                    lip = lip.max((field.values[i] - field.values[j]).abs() / bound.dist(i, j));
                }
            }
            let eps = 0.5 / lip;
            let env = inf_convolution(field, &cloud, metric, eps).unwrap();
            let max_diff = env
                .values
                .iter()
                .zip(&field.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert_eq!(
                max_diff, 0.0,
                "{:?}/{}: fixed point must be exact at eps {eps}",
                metric, field.name
            );
        }

        // deviation curve nonincreasing over eps = 2^0 .. 2^-10
        let refs = [coord.clone()];
        let mut last = f64::INFINITY;
        for k in 0..=10 {
            let eps = 2f64.powi(-k);
            let env = inf_convolution(&coord, &cloud, metric, eps).unwrap();
            let venv = VectorEnvelope::new(vec![env]).unwrap();
            let dev = uniform_deviation(&venv, &refs).unwrap();
            assert!(dev <= last, "{metric:?}: deviation rose from {last} to {dev} at eps {eps}");
            last = dev;
        }
    }
    println!("PASS: envelope laws (lipschitz <= 1e-12, monotone in eps, exact fixed point, monotone deviation) on 3 metrics x 2 fields");
}

#[test]
fn criterion_degree_axioms() {
    let start = Instant::now();
    let param = circle_param([0.0, 0.0], 1.0);
    let on_disk = |map: &dyn Fn([f64; 2]) -> [f64; 2], z: [f64; 2]| {
        let bl = BoundaryLoop::sample(&param, map, 64, "disk").unwrap();
        let refine = |t: f64| {
            let x = param(t);
            (x, map(x))
        };
        winding_degree_2d(&bl, Some(&refine), z).unwrap()
    };
    let mut windings: Vec<f64> = Vec::new();

    let id = on_disk(&|x| x, [0.0, 0.0]);
    assert_eq!(id.degree, 1);
    windings.push(id.winding);

    let square = on_disk(
        &|x| [x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]],
        [0.1, 0.0],
    );
    assert_eq!(square.degree, 2);
    windings.push(square.winding);

    let outside = on_disk(&|x| [x[0] + 3.0, x[1]], [0.0, 0.0]);
    assert_eq!(outside.degree, 0);
    windings.push(outside.winding);

    let antipodal = on_disk(&|x| [-x[0], -x[1]], [0.0, 0.0]);
    assert_eq!(antipodal.degree, 1);
    windings.push(antipodal.winding);

    // additivity across a split box
    let sq = |x: [f64; 2]| [x[0] * x[0] - x[1] * x[1], 2.0 * x[0] * x[1]];
    let on_box = |lo: [f64; 2], hi: [f64; 2]| {
        let p = box_param(lo, hi);
        let bl = BoundaryLoop::sample(&p, &sq, 128, "box").unwrap();
        let refine = |t: f64| {
            let x = p(t);
            (x, sq(x))
        };
        winding_degree_2d(&bl, Some(&refine), [0.1, 0.0]).unwrap()
    };
    let whole = on_box([-1.0, -1.0], [1.0, 1.0]);
    let left = on_box([-1.0, -1.0], [0.0, 1.0]);
    let right = on_box([0.0, -1.0], [1.0, 1.0]);
    assert_eq!(whole.degree, left.degree + right.degree, "additivity must hold exactly");
    assert_eq!(whole.degree, 2);
    windings.extend([whole.winding, left.winding, right.winding]);

    // homotopy invariance over 11 steps: translation family
    let t_grid: Vec<f64> = (0..11).map(|i| i as f64 / 10.0).collect();
    let translation = |t: f64, x: [f64; 2]| [x[0] + 0.1 * t, x[1]];
    let scan = homotopy_scan(&param, &translation, 64, [0.0, 0.0], &t_grid);
    assert_eq!(scan.verdict, HomotopyVerdict::Invariant { degree: 1 });

    // homotopy invariance: identity to the snowflake envelope map
    let cloud =
        build_point_set(&ShapeSpec::BallGrid { radius: 1.0, points_per_axis: 33, dim: 2 })
            .unwrap();
    let snow = MetricSpec::Snowflake { alpha: 0.5 };
    let fields: Vec<ScalarField> =
        (0..2).map(|a| coordinate_field(&cloud, a).unwrap()).collect();
    let eps = find_eps_hat(&fields, &cloud, &snow, 0.5).unwrap();
    let envelope_map = |x: [f64; 2]| {
        [
            inf_conv_at(&fields[0], &cloud, &snow, eps.eps_hat, &x).unwrap(),
            inf_conv_at(&fields[1], &cloud, &snow, eps.eps_hat, &x).unwrap(),
        ]
    };
    let interpolation = |t: f64, x: [f64; 2]| {
        let fx = envelope_map(x);
        [(1.0 - t) * x[0] + t * fx[0], (1.0 - t) * x[1] + t * fx[1]]
    };
    let scan = homotopy_scan(&param, &interpolation, 128, [0.1, 0.0], &t_grid);
    assert_eq!(
        scan.verdict,
        HomotopyVerdict::Invariant { degree: 1 },
        "identity-to-envelope interpolation must keep degree 1"
    );

    for w in &windings {
        assert!((w - w.round()).abs() <= 1e-6, "winding {w} strays from an integer");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "PASS: degree axioms (normalization, square -> 2, outside -> 0, antipodal -> 1, additivity, 2 invariant homotopies, integer windings) ({} ms)",
        elapsed.as_millis()
    );
}

#[test]
fn criterion_theorem_replay() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = bin()
        .args([
            "verify-theorem",
            "--metric",
            "snowflake:0.5",
            "--n",
            "2",
            "--grid",
            "33",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success(), "verify-theorem must exit 0");

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let report = &doc["report"];
    let mesh = report["mesh"].as_f64().unwrap();
    assert!(report["eps_hat"].as_f64().unwrap() > 0.0);
    assert!(report["eps_hat_deviation"].as_f64().unwrap() <= 0.5, "eps_hat certifies deviation <= 1/2");
    let degrees = report["degrees"].as_array().unwrap();
    assert_eq!(degrees.len(), 5);
    for d in degrees {
        assert_eq!(d["degree"].as_i64(), Some(1));
        assert_eq!(d["invariant"].as_bool(), Some(true));
    }
    let preimages = report["preimages"].as_array().unwrap();
    assert_eq!(preimages.len(), 5);
    for p in preimages {
        assert_eq!(p["found"].as_bool(), Some(true));
        assert!(p["residual"].as_f64().unwrap() <= 2.0 * mesh);
    }
    let ladder: Vec<f64> = report["measure_rho"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["value"].as_f64().unwrap())
        .collect();
    assert!(!ladder.is_empty());
    for w in ladder.windows(2) {
        assert!(w[1] >= w[0], "ladder must be nondecreasing");
    }
    assert_eq!(report["consistent"].as_bool(), Some(true));
    // side files written next to the report
    assert!(dir.path().join("report.deviation.csv").exists());
    assert!(dir.path().join("report.ladder.csv").exists());

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "PASS: theorem replay (snowflake:0.5, n=2, grid 33) exits 0 with certified eps_hat, degrees 1, residuals <= 2*mesh, nondecreasing ladder ({} ms)",
        elapsed.as_millis()
    );
}

#[test]
fn criterion_determinism() {
    let dir = tempfile::tempdir().unwrap();

    // stdout-mode examples
    let stdout_examples: Vec<Vec<&str>> = vec![
        vec![
            "measure", "--shape", "cantor:10", "--metric", "euclidean", "--s", "0.63093",
            "--delta", "1.7e-5", "--no-meta",
        ],
        vec!["degree", "--map", "square", "--domain", "disk", "--target", "0.1,0", "--no-meta"],
        vec![
            "dimension", "--shape", "cantor:12", "--metric", "euclidean", "--levels", "4..12",
            "--no-meta",
        ],
        vec!["counterexample", "--n", "1", "--level", "10", "--no-meta"],
        vec![
            "snowflake", "--alpha", "0.5", "--shape", "cantor:10", "--levels", "4..10",
            "--no-meta",
        ],
        vec![
            "validate", "--metric", "snowflake:0.5", "--shape", "grid:-1,1:20", "--no-meta",
        ],
        vec![
            "envelope", "--shape", "grid:-1,1:101", "--metric", "euclidean", "--eps", "10",
            "--field", "coord:0", "--no-meta",
        ],
    ];
    for args in &stdout_examples {
        let a = bin().args(args).output().unwrap();
        let b = bin().args(args).output().unwrap();
        assert!(a.status.success(), "{:?} failed: {}", args, String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{args:?} not byte-identical across runs");
        assert!(!a.stdout.is_empty());
    }

    // file-mode example: the theorem replay
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for out in [&out1, &out2] {
        let status = bin()
            .args([
                "verify-theorem", "--metric", "snowflake:0.5", "--n", "2", "--grid", "33",
                "--no-meta", "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(
        std::fs::read(&out1).unwrap(),
        std::fs::read(&out2).unwrap(),
        "theorem reports not byte-identical"
    );
    println!("PASS: every CLI example is byte-identical across runs under --no-meta");
}

/// Extra guard used by the determinism criterion: the cloud builder is
/// deterministic too (same shape, same enumeration order).
#[test]
fn cloud_enumeration_is_stable() {
    let shape = ShapeSpec::BallGrid { radius: 1.0, points_per_axis: 17, dim: 2 };
    let a: PointCloud = build_point_set(&shape).unwrap();
    let b: PointCloud = build_point_set(&shape).unwrap();
    assert_eq!(a, b);
}
