mod common;

use nsreg::exponents::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn admissible_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    any::<u64>().prop_filter_map("empty branch", |seed| {
        common::sample_admissible(&mut ChaCha8Rng::seed_from_u64(seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn sampled_tuples_are_admissible_and_chain_closes((p, r, delta, gamma) in admissible_strategy()) {
        let t = check_admissible(p, r, delta, gamma);
        prop_assert!(t.is_admissible(), "{:?}", t.verdict);
        let t = select_theta(&t).unwrap();
        let theta = t.theta.unwrap();
        prop_assert!(theta >= 0.5);
        let chain = holder_chain(p, r, delta, theta).unwrap();
        prop_assert!(chain.all_pass());
        for c in theta_checks(p, r, delta, gamma, theta) {
            prop_assert!(c.pass, "{} slack {}", c.name, c.slack);
        }
        prop_assert_eq!(t.lambda, Some(chain.lambda));
    }

    #[test]
    fn broken_relation_is_rejected((p, r, delta, gamma) in admissible_strategy(), bump in 1e-6f64..0.5) {
        let t = check_admissible(p, r * (1.0 + bump), delta, gamma);
        match t.verdict {
            Verdict::Rejected(v) => prop_assert!(v.iter().any(|v| v.constraint == "scaling_relation")),
            Verdict::Admissible(_) => prop_assert!(false, "accepted an off-relation tuple"),
        }
    }

    #[test]
    fn paths_land_on_the_shifted_relation(family in 0u32..3, seed in any::<u64>(), delta in 0.01f64..0.49) {
        let (r, s) = common::sample_path_pair(&mut ChaCha8Rng::seed_from_u64(seed), family);
        let path = interpolation_path(r, s, delta).unwrap();
        prop_assert!(path.admissible);
        prop_assert!(path.gamma > 0.0 && path.gamma < path.gamma_bound);
        let residual = 2.0 / path.r1 + 3.0 / path.s1 - 2.0 - path.gamma;
        prop_assert!(residual.abs() < 1e-12, "residual {}", residual);
    }
}

#[test]
fn case_i3_tuple_recorded_values() {
    let p = 3.0 / (2.1 - 2.0 / 3.0);
    let t = select_theta(&check_admissible(p, 3.0, 0.3, 0.1)).unwrap();
    assert_eq!(t.case(), Some(CaseLabel::I3));
    assert!((t.q - 2.4).abs() < 1e-15);
    assert!(t.theta.unwrap() > 0.5);
}

#[test]
fn every_case_is_reachable() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..50_000 {
        if let Some((p, r, delta, gamma)) = common::sample_admissible(&mut rng) {
            if let Some(c) = check_admissible(p, r, delta, gamma).case() {
                seen.insert(c);
            }
        }
    }
    for c in [CaseLabel::I1, CaseLabel::I2, CaseLabel::I3, CaseLabel::II1, CaseLabel::II2, CaseLabel::II3] {
        assert!(seen.contains(&c), "case {c} never sampled");
    }
}

#[test]
fn out_of_range_inputs_list_every_violation() {
    let t = check_admissible(1.0, 0.5, 0.6, 0.7);
    let Verdict::Rejected(ref v) = t.verdict else { panic!("accepted") };
    let names: Vec<_> = v.iter().map(|v| v.constraint).collect();
    for want in ["gamma_range", "r_range", "delta_range"] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    assert!(select_theta(&t).is_err());
}

#[test]
fn region_map_rows_respect_gamma_window() {
    let grid = RegionGrid::from_exponent_ranges(1.2, 10.0, 1.05, f64::INFINITY, 41, 8).unwrap();
    let rows = region_map(&grid).unwrap();
    assert_eq!(rows.len(), 41 * 41);
    assert!(rows.iter().any(|r| r.admissible));
    for row in rows.iter().filter(|r| r.admissible) {
        assert!(row.gamma > 0.0 && row.gamma < 0.5);
        assert!(row.case.is_some() && row.best_delta.is_some());
    }
    let csv = region_csv(&rows);
    assert_eq!(csv.lines().count(), rows.len() + 1);
    assert_eq!(csv.lines().next().unwrap(), REGION_CSV_HEADER);
}
