use grouprep_core::generate::{random_facility_instance, random_instance};
use grouprep_core::evaluation::oracle::facility_objective;
use grouprep_core::rounding::dependent::{plan_dependent, round_with_plan};
use grouprep_core::rounding::{round_dependent, DependentOptions};
use grouprep_core::rounding::{round_facility_faithful, DEFAULT_THETA};
use grouprep_core::*;
use proptest::prelude::*;

fn line(xs: &[f64], labels: &[&str]) -> Dataset {
    build_dataset(xs.iter().map(|&x| vec![x]).collect(), labels.iter().map(|s| s.to_string()).collect()).unwrap()
}

#[test]
fn every_point_a_center_costs_nothing() {
    let d = random_instance(7, 3, 2, 2).unwrap();
    let m = build_metric(&d, DistanceMode::Euclidean);
    let s = IntegralSolution::nearest((0..7).collect(), &m).unwrap();
    let r = group_costs(&d, &s, CostKind::Abs, None).unwrap();
    assert!(r.groups.iter().all(|g| g.average == 0.0));
    assert_eq!(fair_objective(&r).unwrap(), 0.0);
}

#[test]
fn facility_oracle_small_cases() {
    let one = FacilityInstance::new(line(&[1.0], &["a"]), vec![vec![1.0]], vec![5.0], None).unwrap();
    let c = one.costs(DistanceMode::Euclidean);
    assert_eq!(brute_force_facility_opt(&one, &c, Fairness::PerGroup).unwrap().0, 5.0);

    let pts = [0.0, 2.0, 7.0];
    let free = FacilityInstance::new(
        line(&pts, &["a", "b", "a"]),
        pts.iter().map(|&x| vec![x]).collect(),
        vec![0.0; 3],
        None,
    )
    .unwrap();
    let c = free.costs(DistanceMode::Euclidean);
    let (v, open) = brute_force_facility_opt(&free, &c, Fairness::PerGroup).unwrap();
    assert_eq!(v, 0.0);
    assert_eq!(open, vec![0, 1, 2]);
}

#[test]
fn integral_probe_has_no_spread() {
    let d = random_instance(10, 2, 2, 6).unwrap();
    let m = build_metric(&d, DistanceMode::Euclidean);
    let fixed = IntegralSolution::nearest(vec![2, 7], &m).unwrap();
    let rep = faithfulness_probe(&d, 100, 1, |_| Ok(fixed.clone())).unwrap();
    for (u, p) in rep.points.iter().enumerate() {
        assert!((p.mean - fixed.connection[u]).abs() < 1e-12);
        assert!(p.se.abs() < 1e-12);
    }
    assert_eq!(rep.centers.mean, 2.0);
    assert!(faithfulness_probe(&d, 99, 1, |_| Ok(fixed.clone())).is_err());
}

#[test]
fn dependent_rounding_is_faithful_in_expectation() {
    let d = random_instance(25, 2, 2, 31).unwrap();
    let m = build_metric(&d, DistanceMode::Euclidean);
    let frac = solve_model(&build_kmedian_lp(KMedianVariant::FairAbs, &d, &m, 3, None, None).unwrap()).unwrap();
    let radii = frac.radii(&m);
    let rep = faithfulness_probe(&d, 2000, 9, |s| round_dependent(&frac, &m, 3, s, DependentOptions::default())).unwrap();
    for (u, p) in rep.points.iter().enumerate() {
        assert!(p.mean <= 4.0 * radii[u] + 3.0 * p.se + 1e-12, "point {u}: {} vs R {}", p.mean, radii[u]);
    }
    for g in &rep.groups {
        assert!(g.mean <= 4.0 * frac.lambda + 3.0 * g.se + 1e-12);
    }
}

#[test]
fn probe_is_deterministic() {
    let d = random_instance(15, 2, 2, 3).unwrap();
    let m = build_metric(&d, DistanceMode::Euclidean);
    let frac = solve_model(&build_kmedian_lp(KMedianVariant::FairAbs, &d, &m, 2, None, None).unwrap()).unwrap();
    let run = || faithfulness_probe(&d, 300, 4, |s| round_dependent(&frac, &m, 2, s, DependentOptions::default())).unwrap();
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kmedian_sandwich(seed in 0u64..10_000, n in 5usize..=10, k in 1usize..=3) {
        let d = random_instance(n, 2, 2, seed).unwrap();
        let m = build_metric(&d, DistanceMode::Euclidean);
        let frac = solve_model(&build_kmedian_lp(KMedianVariant::FairAbs, &d, &m, k, None, None).unwrap()).unwrap();
        let (opt, centers) = brute_force_fair_opt(&d, &m, k, CostKind::Abs, None, None).unwrap();
        prop_assert!(frac.lambda <= opt + 1e-7);
        let plan = plan_dependent(&frac, &m).unwrap();
        let opts = DependentOptions { exact_k: true, ..Default::default() };
        let s = round_with_plan(&plan, &frac, &m, k, seed, opts).unwrap();
        let rounded = fair_objective(&group_costs(&d, &s, CostKind::Abs, None).unwrap()).unwrap();
        prop_assert!(opt <= rounded + 1e-12);
        let witness = IntegralSolution::nearest(centers, &m).unwrap();
        let wr = group_costs(&d, &witness, CostKind::Abs, None).unwrap();
        prop_assert!((fair_objective(&wr).unwrap() - opt).abs() < 1e-12);
        // Max average times the largest group covers the mean group total.
        let largest = d.groups().iter().map(Vec::len).max().unwrap() as f64;
        prop_assert!(wr.max_average * largest >= witness.total_connection() / d.num_groups() as f64 - 1e-12);
    }

    #[test]
    fn facility_sandwich(seed in 0u64..10_000, n in 5usize..=20, l in 2usize..=10) {
        let inst = random_facility_instance(n, l, 2, 0.5, None, seed).unwrap();
        let costs = inst.costs(DistanceMode::Euclidean);
        let frac = solve_model(&build_facility_lp(&inst, &costs, Fairness::PerGroup, false).unwrap()).unwrap();
        let (opt, _) = brute_force_facility_opt(&inst, &costs, Fairness::PerGroup).unwrap();
        prop_assert!(frac.objective <= opt + 1e-7);
        let s = round_facility_faithful(&frac, &inst, &costs, DEFAULT_THETA).unwrap();
        let rounded = facility_objective(&inst, Fairness::PerGroup, &s.centers, &s.connection);
        prop_assert!(opt <= rounded + 1e-12);
        prop_assert!(rounded <= 4.0 * frac.objective + 1e-9);
    }
}
