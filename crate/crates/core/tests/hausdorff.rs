mod common;

use nsreg::grid::*;
use nsreg::hausdorff::*;
use nsreg::localq::box_bq_integral;
use nsreg::regularity::*;
use nsreg::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn lambda_grid() -> Vec<f64> {
    (1..=150).map(|i| i as f64 / 100.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn greedy_selection_is_disjoint_and_covers(seed in any::<u64>()) {
        let family = common::random_family(&mut ChaCha8Rng::seed_from_u64(seed));
        let selected = vitali_select(&family);
        let check = check_selection(&family, &selected);
        prop_assert!(check.disjoint && check.covered);
        // selection is ordered by decreasing radius
        let radii: Vec<f64> = selected.iter().map(|&i| family.balls[i].radius).collect();
        prop_assert!(radii.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn premeasure_estimate_is_monotone(level in 3u32..7, l1 in 0.2f64..1.5, dl in 0.0f64..0.5) {
        let sample = PointSample::cantor(level);
        let h = CubeHierarchy::build(&sample, &PremeasureConfig::triadic()).unwrap();
        let ladder: Vec<f64> = (1..level as i32).map(|j| SQRT3 * 3f64.powi(-j)).collect();
        for w in ladder.windows(2) {
            // finer covers can only be counted at smaller epsilon
            prop_assert!(h.estimate(l1, w[1]) >= h.estimate(l1, w[0]) * (1.0 - 1e-12));
        }
        // diameters below one decrease with lambda
        for &e in &ladder {
            prop_assert!(h.estimate(l1 + dl, e) <= h.estimate(l1, e) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn segment_brackets_one() {
    let sample = PointSample::unit_segment(4097);
    let ladder: Vec<f64> = (2..=10).map(|j| SQRT3 * 2f64.powi(-j)).collect();
    let b = dimension_bracket(&sample, &lambda_grid(), &ladder, &PremeasureConfig::default()).unwrap();
    assert!(b.inconclusive.is_none(), "{:?}", b.inconclusive);
    let (lo, hi) = (b.lambda_low.unwrap(), b.lambda_high.unwrap());
    assert!(lo < hi && (lo - 1.0).abs() <= 0.05 && (hi - 1.0).abs() <= 0.05, "[{lo}, {hi}]");
}

#[test]
fn cantor_brackets_its_dimension() {
    let sample = PointSample::cantor(8);
    let ladder: Vec<f64> = (1..=7).map(|j| SQRT3 * 3f64.powi(-j)).collect();
    let b = dimension_bracket(&sample, &lambda_grid(), &ladder, &PremeasureConfig::triadic()).unwrap();
    let dim = 2f64.ln() / 3f64.ln();
    let (lo, hi) = (b.lambda_low.unwrap(), b.lambda_high.unwrap());
    // the growth tolerance can place the upper end just below the dimension
    assert!(lo < hi && (lo - dim).abs() <= 0.05 && (hi - dim).abs() <= 0.05, "[{lo}, {hi}]");
    // exactly one at the similarity dimension on triadic levels
    let h = CubeHierarchy::build(&sample, &PremeasureConfig::triadic()).unwrap();
    let est = h.estimate(dim, SQRT3 / 27.0);
    assert!((est - 1.0).abs() < 1e-9 * 8.0, "{est}");
}

#[test]
fn degenerate_samples() {
    let empty = PointSample::new(vec![], 0.1).unwrap();
    assert_eq!(hausdorff_premeasure(&empty, 0.5, 0.1, &PremeasureConfig::default()).unwrap(), 0.0);
    let point = PointSample::new(vec![[0.3, 0.1, 0.0]], 1e-3).unwrap();
    let b = dimension_bracket(&point, &lambda_grid(), &[0.1, 0.01, 0.001], &PremeasureConfig::default()).unwrap();
    assert_eq!(b.lambda_low, None);
    assert_eq!(b.lambda_high, Some(0.01));
    assert!(dimension_bracket(&point, &[0.5, 0.4], &[0.1], &PremeasureConfig::default()).is_err());
    assert!(PointSample::new(vec![[f64::NAN, 0.0, 0.0]], 0.1).is_err());
}

fn taylor_field() -> Field {
    generate_field(&common::taylor(common::cube(-1.0, 1.0, 24, 0.0, 1.0, 11))).unwrap()
}

#[test]
fn empty_candidate_set_has_zero_combinatorial_sum() {
    let v = taylor_field();
    let sigma = CandidateSet::empty(ScanMode::Bq, 0.05, 2.6);
    let rep = singular_measure_bound(&v, &sigma, 0.2, 0.05, 0.5).unwrap();
    assert_eq!(rep.comb_sum, 0.0);
    assert_eq!(rep.witness_bound, 0.0);
    assert!(rep.integral_bound > 0.0 && rep.ok);
}

#[test]
fn stationary_slab_integral_scales_with_thickness() {
    let v = taylor_field();
    let t = v.grid.final_time();
    let mut last = None;
    for eps_hat in [0.8, 0.4, 0.2] {
        let slab = box_bq_integral(&v, t - eps_hat * eps_hat, t, 2.6).unwrap();
        if let Some(prev) = last {
            assert!(common::rel_err(prev / slab, 4.0) < 1e-9);
        }
        last = Some(slab);
    }
}

#[test]
fn covering_rejects_mismatched_inputs() {
    let v = taylor_field();
    let sigma = CandidateSet::empty(ScanMode::A, 0.1, 2.6);
    assert!(matches!(singular_measure_bound(&v, &sigma, 0.2, 0.05, 0.5), Err(Error::Config(_))));
    let sigma = CandidateSet::empty(ScanMode::Bq, 0.05, 2.6);
    assert!(singular_measure_bound(&v, &sigma, 0.6, 0.05, 0.5).is_err());
    let bad = SweepConfig { eps_hat_max: 0.5, factor: 1.2, count: 3 };
    assert!(covering_sweep(&v, &sigma, 0.2, 0.05, &bad).is_err());
}

fn cluster_candidates() -> (Field, CandidateSet) {
    let grid = common::cube(-1.0, 1.0, 32, 0.7, 0.99, 30);
    let v = generate_field(&common::swirl_blowup(grid, 3.0)).unwrap();
    let offsets = [-0.05, 0.0, 0.05];
    let mut pts = Vec::new();
    for &x in &offsets {
        for &y in &offsets {
            for &z in &offsets {
                pts.push([x, y, z]);
            }
        }
    }
    let cfg = RegularityConfig {
        ladder: Some(RadiusLadder { r_max: 0.25, factor: 0.8, count: 12 }),
        ..RegularityConfig::default()
    };
    let sigma = epsilon_scan(&v, &BasePoints::List(pts), &cfg).unwrap().candidates;
    (v, sigma)
}

#[test]
fn chain_holds_along_the_sweep() {
    let (v, sigma) = cluster_candidates();
    assert_eq!(sigma.len(), 27);
    let report = covering_sweep(&v, &sigma, 0.2, 0.05, &SweepConfig { eps_hat_max: 0.5, factor: 0.8, count: 5 }).unwrap();
    for row in &report.sweep {
        assert!(row.ok, "{row:?}");
        assert!(row.selected >= 1 && row.comb_sum > 0.0);
    }
}

#[test]
fn unresolvable_scale_reports_missing_witness() {
    let (v, sigma) = cluster_candidates();
    let err = singular_measure_bound(&v, &sigma, 0.2, 0.05, 0.01).unwrap_err();
    assert!(matches!(err, Error::WitnessMissing { index: 0, .. }));
}
