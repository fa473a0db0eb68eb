mod common;

use nsreg::grid::*;
use nsreg::regularity::*;
use proptest::prelude::*;

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

fn swirl_field() -> Field {
    generate_field(&common::swirl_blowup(common::cube(-1.0, 1.0, 32, 0.92, 0.99, 16), 0.5)).unwrap()
}

#[test]
fn zero_and_constant_fields_flag_nothing_under_bq() {
    let grid = common::cube(-1.0, 1.0, 16, 0.0, 1.0, 4);
    let cfg = RegularityConfig::default();
    for kind in [FieldKind::Zero, FieldKind::Constant { value: [1.0, 2.0, -1.0] }] {
        let v = generate_field(&FieldSpec::new(kind, grid)).unwrap();
        let report = epsilon_scan(&v, &BasePoints::Grid(3), &cfg).unwrap();
        assert_eq!(report.profiles.len(), 27);
        assert!(report.candidates.is_empty());
        assert!(report.profiles.iter().all(|p| p.sup == 0.0));
    }
}

#[test]
fn a_scan_on_constant_field_follows_closed_form() {
    // A = (4 pi / 3) |c|^2 r^2 is largest at the top rung.
    let grid = common::cube(-1.0, 1.0, 32, 0.0, 1.0, 8);
    let v = generate_field(&FieldSpec::new(FieldKind::Constant { value: [1.0, 0.0, 0.0] }, grid)).unwrap();
    let top = |r_max: f64| RegularityConfig {
        ladder: Some(RadiusLadder { r_max, factor: 0.5, count: 4 }),
        ..RegularityConfig::default()
    };
    let small = a_scan(&v, &BasePoints::Grid(2), &top(0.125)).unwrap();
    assert!(small.candidates.is_empty());
    let large = a_scan(&v, &BasePoints::Grid(2), &top(0.25)).unwrap();
    assert_eq!(large.candidates.len(), 8);
    for p in &large.candidates.points {
        assert_eq!(p.argmax_r, 0.25);
        assert!(common::rel_err(p.sup, 4.0 / 3.0 * std::f64::consts::PI * 0.0625) < 0.01);
    }
}

#[test]
fn raising_the_threshold_never_adds_candidates() {
    let v = swirl_field();
    let mut last: Option<Vec<[f64; 3]>> = None;
    for eps in [0.005, 0.02, 0.05, 0.2, 1.0] {
        let cfg = RegularityConfig { epsilon_q: eps, ..RegularityConfig::default() };
        let report = epsilon_scan(&v, &BasePoints::Grid(3), &cfg).unwrap();
        let pts: Vec<[f64; 3]> = report.candidates.points.iter().map(|p| p.x).collect();
        if let Some(prev) = &last {
            assert!(pts.iter().all(|p| prev.contains(p)));
        }
        last = Some(pts);
    }
}

#[test]
fn extending_the_ladder_never_lowers_the_sup() {
    let v = swirl_field();
    let base = RegularityConfig {
        ladder: Some(RadiusLadder { r_max: 0.2, factor: 0.5, count: 2 }),
        ..RegularityConfig::default()
    };
    let longer = RegularityConfig {
        ladder: Some(RadiusLadder { r_max: 0.2, factor: 0.5, count: 4 }),
        ..base
    };
    let a = epsilon_scan(&v, &BasePoints::Grid(3), &base).unwrap();
    let b = epsilon_scan(&v, &BasePoints::Grid(3), &longer).unwrap();
    for (pa, pb) in a.profiles.iter().zip(&b.profiles) {
        assert_eq!(pa.x, pb.x);
        assert!(pb.sup >= pa.sup);
    }
}

#[test]
fn scan_is_independent_of_worker_count() {
    let v = swirl_field();
    let cfg = RegularityConfig::default();
    let run = |n| {
        pool(n).install(|| serde_json::to_string(&epsilon_scan(&v, &BasePoints::Grid(3), &cfg).unwrap()).unwrap())
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn candidate_sets_roundtrip_through_json() {
    let v = swirl_field();
    let cfg = RegularityConfig { epsilon_q: 0.02, ..RegularityConfig::default() };
    let report = epsilon_scan(&v, &BasePoints::List(vec![[0.0; 3], [0.5, 0.5, 0.5]]), &cfg).unwrap();
    assert_eq!(report.candidates.len(), 1);
    assert_eq!(report.candidates.points[0].x, [0.0; 3]);
    let text = serde_json::to_string(&report.candidates).unwrap();
    let back: CandidateSet = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report.candidates);
}

#[test]
fn base_point_parsing() {
    assert_eq!(BasePoints::parse_grid("grid"), Some(BasePoints::Grid(9)));
    assert_eq!(BasePoints::parse_grid("grid:4"), Some(BasePoints::Grid(4)));
    assert_eq!(BasePoints::parse_grid("grid:x"), None);
    assert_eq!(BasePoints::parse_grid("points.json"), None);
    let grid = common::cube(-1.0, 1.0, 8, 0.0, 1.0, 2);
    assert!(BasePoints::Grid(3).resolve(&grid, 0.9).is_err());
}

#[test]
fn invalid_configs_are_refused() {
    let v = swirl_field();
    let bad_q = RegularityConfig { q: 3.5, ..RegularityConfig::default() };
    assert!(epsilon_scan(&v, &BasePoints::Grid(2), &bad_q).is_err());
    let bad_ladder = RegularityConfig {
        ladder: Some(RadiusLadder { r_max: 0.2, factor: 1.5, count: 3 }),
        ..RegularityConfig::default()
    };
    assert!(epsilon_scan(&v, &BasePoints::Grid(2), &bad_ladder).is_err());
}

fn iteration_strategy() -> impl Strategy<Value = (IterationConfig, f64, usize)> {
    (0.01f64..=0.5, 0.01f64..0.99, 0.0f64..0.99, 0.0f64..100.0, 0usize..=50, 2.05f64..2.95).prop_map(
        |(theta, frac, epsilon, e0, k, q)| {
            let cfg = IterationConfig {
                theta_decay: theta,
                delta_aux: frac * 0.5 * theta * theta,
                epsilon,
                c11: 1.0,
                q,
            };
            (cfg, e0, k)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn decay_matches_closed_form((cfg, e0, k) in iteration_strategy()) {
        prop_assume!(cfg.g_term().is_finite());
        let report = iterate_decay(e0, &cfg, k).unwrap();
        prop_assert_eq!(report.sequence.len(), k + 1);
        for (a, b) in report.sequence.iter().zip(&report.closed_form) {
            let err = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
            prop_assert!(err < 1e-12, "{} vs {}", a, b);
        }
        prop_assert!(*report.sequence.last().unwrap() <= report.iterated_bound * (1.0 + 1e-12));
    }
}

#[test]
fn decay_constraints_are_checked() {
    let ok = IterationConfig { theta_decay: 0.4, delta_aux: 0.01, epsilon: 0.1, c11: 1.0, q: 2.6 };
    assert!(iterate_decay(1.0, &ok, 5).is_ok());
    assert!(iterate_decay(1.0, &IterationConfig { theta_decay: 0.6, ..ok }, 5).is_err());
    assert!(iterate_decay(1.0, &IterationConfig { delta_aux: 0.1, ..ok }, 5).is_err());
    assert!(iterate_decay(1.0, &IterationConfig { c11: 2.0, ..ok }, 5).is_err());
    assert!(iterate_decay(-1.0, &ok, 5).is_err());
    let overflow = IterationConfig { theta_decay: 0.01, delta_aux: 1e-6, q: 2.05, ..ok };
    assert!(iterate_decay(1.0, &overflow, 5).is_err());
    let zero = iterate_decay(2.0, &IterationConfig { epsilon: 0.0, ..ok }, 3).unwrap();
    assert_eq!(zero.g, 0.0);
    assert!((zero.sequence[3] - 2.0 * 0.4f64.powi(6)).abs() < 1e-15);
}

fn harness_cfg() -> HarnessConfig {
    HarnessConfig { q: 2.6, pairs: vec![(0.25, 0.5), (0.5, 0.5)], centers: None }
}

#[test]
fn harness_on_constant_fields_reports_zero_oscillation_ratio() {
    let grid = common::cube(-1.0, 1.0, 16, 0.0, 0.5, 4);
    let specs = [
        FieldSpec::new(FieldKind::Constant { value: [1.0, 0.0, 0.0] }, grid),
        FieldSpec::new(FieldKind::Zero, grid),
    ];
    let report = lemma_ratio_harness_specs(&specs, &harness_cfg()).unwrap();
    assert_eq!(report.members, 2);
    let osc = &report.constants[0];
    assert_eq!(osc.inequality, "oscillation_bound");
    assert_eq!(osc.sup_ratio, 0.0);
    assert!(report.constants.iter().all(|c| c.finite));
}

#[test]
fn harness_is_reproducible_across_worker_counts() {
    let grid = common::cube(-1.0, 1.0, 12, 0.0, 0.5, 4);
    let specs = band_limited_ensemble(grid, 42, 6);
    let run = |n| pool(n).install(|| serde_json::to_vec(&lemma_ratio_harness_specs(&specs, &harness_cfg()).unwrap()).unwrap());
    let one = run(1);
    assert_eq!(one, run(3));
    let report: serde_json::Value = serde_json::from_slice(&one).unwrap();
    assert_eq!(report["constants"].as_array().unwrap().len(), HARNESS_INEQUALITIES.len());
}

#[test]
fn harness_accepts_prebuilt_fields() {
    let grid = common::cube(-1.0, 1.0, 12, 0.0, 0.5, 4);
    let spec = band_limited_ensemble(grid, 1, 1)[0];
    let ensemble = vec![(generate_field(&spec).unwrap(), None)];
    let report = lemma_ratio_harness(&ensemble, &harness_cfg()).unwrap();
    // no pressure, so the pressure inequality has nothing to evaluate
    assert_eq!(report.constants[3].evaluations, 0);
    assert!(report.constants[..3].iter().all(|c| c.evaluations > 0 && c.finite));
    assert!(lemma_ratio_harness(&[], &harness_cfg()).is_err());
    let bad = HarnessConfig { pairs: vec![(0.5, 0.25)], ..harness_cfg() };
    assert!(lemma_ratio_harness(&ensemble, &bad).is_err());
}
