mod common;

use rand::Rng;
use tukey_levelsets::bounds::{AssumptionParams, ExponentVariant};
use tukey_levelsets::depth::{classify, levelset_exact_2d, levelset_sampled, Emptiness};
use tukey_levelsets::distr::{sample, DistributionSpec, ReferenceDistribution};
use tukey_levelsets::experiments::{
    run_rate_experiment, run_tail_experiment, write_rate_outputs, write_tail_outputs, DirectionsRule,
    HausdorffMeasure, RateExperimentConfig,
};
use tukey_levelsets::geom::{deterministic_net, uniform_directions};
use tukey_levelsets::io::{read_point_cloud, read_polytope, write_point_cloud, write_polytope};
use tukey_levelsets::linprog::{support_function, SupportEvaluator};
use tukey_levelsets::metric::hausdorff_support;
use tukey_levelsets::{HPolytope, LevelSpec, PointCloud};

use common::*;

fn small_cfg(seed: u64) -> RateExperimentConfig {
    RateExperimentConfig {
        dist: ReferenceDistribution::standard_gaussian(2).unwrap(),
        alpha: LevelSpec::new(0.2).unwrap(),
        n_grid: vec![100, 400],
        reps: 4,
        directions_rule: DirectionsRule::Fixed { m: 200 },
        net_delta: 0.05,
        base_seed: seed,
    }
}

#[test]
fn io_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = sample(&ReferenceDistribution::standard_gaussian(3).unwrap(), 50, 1).unwrap();
    let path = dir.path().join("cloud.csv");
    write_point_cloud(&path, &cloud).unwrap();
    assert_eq!(read_point_cloud(&path, false).unwrap(), cloud);

    let set = levelset_exact_2d(
        &sample(&ReferenceDistribution::standard_gaussian(2).unwrap(), 30, 2).unwrap(),
        LevelSpec::new(0.25).unwrap(),
    )
    .unwrap();
    let ppath = dir.path().join("set.csv");
    write_polytope(&ppath, &set.polytope).unwrap();
    let back = read_polytope(&ppath).unwrap();
    let u = tukey_levelsets::Direction::new(vec![0.3, -1.0]).unwrap();
    let a = support_function(&set.polytope, &u).unwrap().finite().unwrap();
    let b = support_function(&back, &u).unwrap().finite().unwrap();
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn sampled_set_contains_exact_set_in_2d() {
    // fewer directions means fewer constraints, so a superset
    let mut r = rng(3);
    for k in 0..10 {
        let rows: Vec<[f64; 2]> = (0..25).map(|_| [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)]).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let level = LevelSpec::new(0.3).unwrap();
        let exact = levelset_exact_2d(&cloud, level).unwrap();
        if exact.emptiness != Emptiness::Nonempty {
            continue;
        }
        let sampled = levelset_sampled(&cloud, level, &uniform_directions(2, 300, k).unwrap()).unwrap();
        let mut ev = SupportEvaluator::new(&sampled.polytope).unwrap();
        for v in vertices_by_enumeration(&exact.polytope) {
            for u in &deterministic_net(2, 0.2).unwrap().directions {
                let h = ev.support(u).unwrap().finite().unwrap();
                assert!(u.dot(&v) <= h + 1e-9);
            }
        }
    }
}

#[test]
fn measured_distance_is_bounded_by_truncation_radius() {
    let cfg = small_cfg(9);
    let hm = HausdorffMeasure::new(&cfg).unwrap();
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let m = hm.measure(n, 100 + i as u64).unwrap();
        let cap = (n as f64).ln() + hm.oracle_radius() + m.certified_error;
        assert!(m.hausdorff >= 0.0 && m.hausdorff <= cap, "{} > {cap}", m.hausdorff);
    }
}

#[test]
fn rate_outputs_are_deterministic_and_written() {
    let cfg = small_cfg(42);
    let a = run_rate_experiment(&cfg).unwrap();
    let b = run_rate_experiment(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.rows.len(), 8);
    let dir = tempfile::tempdir().unwrap();
    write_rate_outputs(dir.path(), &cfg, &a).unwrap();
    let raw = std::fs::read_to_string(dir.path().join("rate_raw.csv")).unwrap();
    assert_eq!(raw.lines().count(), 9);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rate_summary.json")).unwrap()).unwrap();
    assert!(summary["slope"].is_number());
    assert_eq!(summary["config"]["reps"], 4);
}

#[test]
fn tail_rows_respect_trivial_bound() {
    let mut cfg = small_cfg(5);
    cfg.n_grid = vec![200];
    cfg.reps = 6;
    let params = AssumptionParams::new(0.5, 0.1, 1.0, 1.2, vec![0.0, 0.0], None).unwrap();
    let rows = run_tail_experiment(&cfg, &params, &[1.0, 5.0, 20.0], ExponentVariant::Lemma).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.satisfied()));
    assert!(rows.iter().all(|r| r.in_domain == r.bound.is_some()));
    let dir = tempfile::tempdir().unwrap();
    write_tail_outputs(dir.path(), &rows).unwrap();
}

#[test]
fn spec_roundtrip_and_polytope_sampling() {
    let spec: DistributionSpec = serde_json::from_str(
        r#"{"kind":"uniform-polytope","dim":2,"params":{"a":[[-1,0],[0,-1],[1,1]],"b":[0,0,1]}}"#,
    )
    .unwrap();
    let dist = spec.build().unwrap();
    let pts = sample(&dist, 2000, 4).unwrap();
    assert!(pts.points().all(|p| p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0));
    let again = dist.to_spec().build().unwrap();
    assert_eq!(sample(&again, 2000, 4).unwrap(), pts);
}

#[test]
fn hausdorff_of_translates_is_shift_length() {
    let mut r = rng(8);
    let net = deterministic_net(2, 0.01).unwrap();
    for _ in 0..10 {
        let p = random_polygon(&mut r);
        let v = [r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)];
        let q = p.translated(&v);
        let est = hausdorff_support(&p, &q, &net).unwrap();
        let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
        assert!(est.value <= len + 1e-9 && len <= est.value + est.certified_error + 1e-9);
    }
}

#[test]
fn cube_levelset_in_three_dimensions() {
    let cloud = sample(&ReferenceDistribution::uniform_polytope(HPolytope::cube(3, -1.0, 1.0).unwrap()).unwrap(), 400, 6)
        .unwrap();
    let set = levelset_sampled(&cloud, LevelSpec::new(0.25).unwrap(), &uniform_directions(3, 500, 7).unwrap()).unwrap();
    assert_eq!(classify(&set.polytope).unwrap(), Emptiness::Nonempty);
    let u = tukey_levelsets::Direction::axis(3, 0, true).unwrap();
    let h = support_function(&set.polytope, &u).unwrap().finite().unwrap();
    // population value 0.5 for the uniform cube
    assert!((h - 0.5).abs() < 0.2, "{h}");
}
