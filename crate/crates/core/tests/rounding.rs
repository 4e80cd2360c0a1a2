use grouprep_core::generate::{gap_instance, random_facility_instance, random_instance};
use grouprep_core::rounding::dependent::{pair_probabilities, plan_dependent, round_with_plan};
use grouprep_core::rounding::*;
use grouprep_core::seed::{derive_indexed, rng};
use grouprep_core::*;
use proptest::prelude::*;
use rand::Rng;

fn line(xs: &[f64], labels: &[&str]) -> Dataset {
    build_dataset(xs.iter().map(|&x| vec![x]).collect(), labels.iter().map(|s| s.to_string()).collect()).unwrap()
}

fn fair_lp(d: &Dataset, metric: &MetricCache, k: usize) -> FractionalClustering {
    solve_model(&build_kmedian_lp(KMedianVariant::FairAbs, d, metric, k, None, None).unwrap()).unwrap()
}

/// Minimum total distance over every assignment respecting `cap`.
fn enumerate_assignments(opened: &[usize], cap: usize, costs: &CostMatrix) -> Option<f64> {
    let n = costs.rows();
    let mut best: Option<f64> = None;
    let mut choice = vec![0usize; n];
    loop {
        let mut load = vec![0usize; opened.len()];
        choice.iter().for_each(|&c| load[c] += 1);
        if load.iter().all(|&l| l <= cap) {
            let total: f64 = choice.iter().enumerate().map(|(u, &c)| costs.get(u, opened[c])).sum();
            best = Some(best.map_or(total, |b: f64| b.min(total)));
        }
        let Some(i) = (0..n).find(|&i| choice[i] + 1 < opened.len()) else {
            return best;
        };
        choice[i] += 1;
        choice[..i].iter_mut().for_each(|c| *c = 0);
    }
}

#[test]
fn gap_instance_filters_to_one_member() {
    let d = gap_instance(3, 1.0).unwrap();
    let metric = build_metric(&d, DistanceMode::Euclidean);
    let frac = fair_lp(&d, &metric, 2);
    let f = filter_points(&frac, &metric, 4.0);
    assert!(f.radii.iter().all(|r| (r - 1.0 / 3.0).abs() < 1e-7));
    assert_eq!(f.members.len(), 1);
}

#[test]
fn coincident_points_filter_to_one() {
    let d = line(&[1.0, 1.0, 1.0], &["a", "b", "a"]);
    let metric = build_metric(&d, DistanceMode::Euclidean);
    let f = filter_by_radii(vec![0.0; 3], &metric, 4.0);
    assert_eq!(f.members, vec![0]);
}

#[test]
fn bicriteria_on_gap_instance() {
    let d = gap_instance(3, 1.0).unwrap();
    let metric = build_metric(&d, DistanceMode::Euclidean);
    let frac = fair_lp(&d, &metric, 2);
    let s = round_bicriteria(&frac, &metric, 0.5).unwrap();
    assert_eq!(s.centers.len(), 1);
    let report = group_costs(&d, &s, CostKind::Abs, None).unwrap();
    let obj = fair_objective(&report).unwrap();
    assert!((obj - 1.0).abs() < 1e-12);
    assert!(obj <= 2.0 * frac.lambda / 0.5 + 1e-9);
}

#[test]
fn integral_input_is_a_fixed_point() {
    let d = random_instance(8, 2, 2, 4).unwrap();
    let metric = build_metric(&d, DistanceMode::Euclidean);
    let open = [1, 5];
    let sol = IntegralSolution::nearest(open.to_vec(), &metric).unwrap();
    let frac = FractionalClustering::from_integral(8, (0..8).collect(), &open, &sol.assignment);
    assert_eq!(round_bicriteria(&frac, &metric, 0.5).unwrap().centers, vec![1, 5]);
    for seed in 0..20 {
        let r = round_dependent(&frac, &metric, 2, seed, DependentOptions::default()).unwrap();
        assert_eq!(r.centers, vec![1, 5]);
    }
}

#[test]
fn pair_law_holds_in_simulation() {
    let [both, first, second] = pair_probabilities(0.6, 0.7).unwrap();
    let mut r = rng(17);
    let draws = 100_000;
    let (mut a, mut b) = (0usize, 0usize);
    for _ in 0..draws {
        let x: f64 = r.random();
        let (oa, ob) = if x < both {
            (true, true)
        } else if x < both + first {
            (true, false)
        } else {
            (false, true)
        };
        assert!(oa || ob);
        a += usize::from(oa);
        b += usize::from(ob);
    }
    assert!((second - 0.4).abs() < 1e-12);
    // 3 SE at p(1-p) <= 1/4 is under 0.005.
    assert!((a as f64 / draws as f64 - 0.6).abs() < 0.005);
    assert!((b as f64 / draws as f64 - 0.7).abs() < 0.005);
}

#[test]
fn bundle_frequencies_match_volumes() {
    let d = random_instance(25, 2, 2, 31).unwrap();
    let metric = build_metric(&d, DistanceMode::Euclidean);
    let frac = fair_lp(&d, &metric, 3);
    let plan = plan_dependent(&frac, &metric).unwrap();
    let mut seen = vec![0usize; plan.bundles.len()];
    let mut count = 0usize;
    for s in 0..2000 {
        let draw = plan.sample(&mut rng(derive_indexed(5, s)), false).unwrap();
        for &(a, b) in &plan.pairs {
            assert!(draw.bundle_open[a] || draw.bundle_open[b]);
        }
        draw.bundle_open.iter().enumerate().filter(|x| *x.1).for_each(|(i, _)| seen[i] += 1);
        count += draw.columns.len();
    }
    for (b, &c) in plan.bundles.iter().zip(&seen) {
        assert!((0.5 - 1e-9..=1.0 + 1e-9).contains(&b.volume));
        assert!((c as f64 / 2000.0 - b.volume).abs() <= 0.05, "bundle {} volume {}", b.anchor, b.volume);
    }
    assert!((count as f64 / 2000.0 - 3.0).abs() <= 0.2);
    let mut all: Vec<usize> = plan.bundles.iter().flat_map(|b| b.facilities.clone()).collect();
    let len = all.len();
    all.sort_unstable();
    all.dedup();
    assert_eq!(all.len(), len, "bundles share a facility");
}

#[test]
fn exact_k_repair_opens_k() {
    let d = random_instance(20, 2, 2, 8).unwrap();
    let metric = build_metric(&d, DistanceMode::Euclidean);
    let frac = fair_lp(&d, &metric, 3);
    let plan = plan_dependent(&frac, &metric).unwrap();
    let opts = DependentOptions { exact_k: true, ..Default::default() };
    for s in 0..50 {
        assert_eq!(round_with_plan(&plan, &frac, &metric, 3, s, opts).unwrap().centers.len(), 3);
    }
}

#[test]
fn faithful_opens_the_cheaper_colocated_location() {
    let clients = line(&[0.0], &["a"]);
    let inst = FacilityInstance::new(clients, vec![vec![0.0], vec![0.0]], vec![1.0, 9.0], None).unwrap();
    let costs = inst.costs(DistanceMode::Euclidean);
    let frac = FractionalClustering {
        n: 1,
        t: 2,
        z: vec![0.5, 0.5],
        y: vec![0.5, 0.5],
        lambda: 0.0,
        objective: 0.0,
        site_ids: vec![0, 1],
        integral: false,
    };
    let s = round_facility_faithful(&frac, &inst, &costs, DEFAULT_THETA).unwrap();
    assert_eq!(s.centers, vec![0]);
    let single = FacilityInstance::new(line(&[3.0], &["a"]), vec![vec![1.0]], vec![2.0], None).unwrap();
    let c1 = single.costs(DistanceMode::Euclidean);
    let f1 = FractionalClustering::from_integral(1, vec![0], &[0], &[0]);
    assert_eq!(round_facility_faithful(&f1, &single, &c1, DEFAULT_THETA).unwrap().assignment, vec![0]);
}

#[test]
fn ffl_hand_trace_on_two_colocated_facilities() {
    let clients = line(&[0.0], &["a"]);
    let inst = FacilityInstance::new(clients, vec![vec![0.0], vec![0.0]], vec![1.0, 1.0], Some(1)).unwrap();
    let costs = inst.costs(DistanceMode::Euclidean);
    let frac = FractionalClustering {
        n: 1,
        t: 2,
        z: vec![0.3, 0.7],
        y: vec![0.3, 0.7],
        lambda: 0.0,
        objective: 0.0,
        site_ids: vec![0, 1],
        integral: false,
    };
    let (s, trace) = ffl_round(&frac, &inst, &costs, 0.1, 0.1).unwrap();
    assert_eq!(trace.promoted, vec![1]);
    assert_eq!(trace.iterations.len(), 1);
    assert_eq!(trace.iterations[0].client, 0);
    assert_eq!(trace.iterations[0].r, 1);
    assert_eq!(trace.iterations[0].opened, vec![0]);
    assert_eq!(s.centers, vec![0, 1]);
    assert_eq!(s.assignment.len(), 1);
}

#[test]
fn ffl_keeps_an_integral_solution() {
    let clients = line(&[0.0, 0.1, 5.0, 5.1], &["a", "b", "a", "b"]);
    let inst = FacilityInstance::new(clients, vec![vec![0.0], vec![5.0]], vec![1.0, 1.0], Some(2)).unwrap();
    let costs = inst.costs(DistanceMode::Euclidean);
    let frac = FractionalClustering::from_integral(2, vec![0, 1], &[0, 1], &[0, 0, 1, 1]);
    let (s, trace) = ffl_round(&frac, &inst, &costs, 0.1, 0.1).unwrap();
    assert_eq!(s.centers, vec![0, 1]);
    assert_eq!(s.assignment, vec![0, 0, 1, 1]);
    assert!(trace.iterations.is_empty());
}

#[test]
fn transportation_on_a_line_matches_enumeration() {
    let costs = CostMatrix::between(
        DistanceMode::Euclidean,
        &[vec![0.0], vec![1.0], vec![2.0]],
        &[vec![0.0], vec![3.0]],
    );
    let (assignment, total) = transportation_assign(&[0, 1], 2, &costs).unwrap();
    assert_eq!(Some(total), enumerate_assignments(&[0, 1], 2, &costs));
    assert_eq!(assignment, vec![0, 0, 1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn filtered_members_are_separated(seed in 0u64..10_000, n in 4usize..=20, factor in 0.5f64..6.0) {
        let d = random_instance(n, 2, 2, seed).unwrap();
        let metric = build_metric(&d, DistanceMode::Euclidean);
        let frac = fair_lp(&d, &metric, 2);
        let f = filter_points(&frac, &metric, factor);
        for (i, &u) in f.members.iter().enumerate() {
            for &v in &f.members[i + 1..] {
                prop_assert!(metric.d(u, v) > factor * f.radii[u].max(f.radii[v]) - 1e-12);
            }
        }
        for (v, by) in f.removed_by.iter().enumerate() {
            if let Some(u) = *by {
                prop_assert!(f.contains(u));
                prop_assert!(metric.d(u, v) <= factor * f.radii[v] + 1e-12);
            } else {
                prop_assert!(f.contains(v));
            }
        }
    }

    #[test]
    fn bicriteria_bounds(seed in 0u64..10_000, n in 6usize..=40, k in 1usize..=5, eps in prop::sample::select(vec![0.3, 0.5])) {
        let d = random_instance(n, 2, 2, seed).unwrap();
        let metric = build_metric(&d, DistanceMode::Euclidean);
        let frac = fair_lp(&d, &metric, k);
        let s = round_bicriteria(&frac, &metric, eps).unwrap();
        prop_assert!(s.centers.len() <= (k as f64 / (1.0 - eps) - 1e-9).ceil() as usize);
        let radii = frac.radii(&metric);
        for u in 0..n {
            prop_assert!(s.connection[u] <= 2.0 / eps * radii[u] + 1e-9);
        }
        let report = group_costs(&d, &s, CostKind::Abs, None).unwrap();
        prop_assert!(report.max_average <= 2.0 / eps * frac.lambda + 1e-9);
    }

    #[test]
    fn faithful_facility_bounds(seed in 0u64..10_000, n in 5usize..=30, l in 2usize..=12) {
        let inst = random_facility_instance(n, l, 2, 0.5, None, seed).unwrap();
        let costs = inst.costs(DistanceMode::Euclidean);
        let frac = solve_model(&build_facility_lp(&inst, &costs, Fairness::PerGroup, false).unwrap()).unwrap();
        let s = round_facility_faithful(&frac, &inst, &costs, DEFAULT_THETA).unwrap();
        let radii = frac.radii(&costs);
        for u in 0..n {
            prop_assert!(s.connection[u] <= 4.0 * radii[u] + 1e-9);
        }
        let frac_open: f64 = frac.y.iter().zip(inst.opening_costs()).map(|(y, f)| y * f).sum();
        prop_assert!(inst.opening_cost_of(&s.centers) <= 4.0 * frac_open + 1e-9);
    }

    #[test]
    fn ffl_bounds(seed in 0u64..10_000, n in 5usize..=25, l in 3usize..=10) {
        let cap = (2 * n).div_ceil(l);
        let inst = random_facility_instance(n, l, 2, 0.5, Some(cap), seed).unwrap();
        let costs = inst.costs(DistanceMode::Euclidean);
        let frac = solve_model(&build_facility_lp(&inst, &costs, Fairness::PerGroup, true).unwrap()).unwrap();
        let (theta, delta) = (0.1, 0.1);
        let (s, trace) = ffl_round(&frac, &inst, &costs, theta, delta).unwrap();
        prop_assert!(s.max_load() <= ((1.0 + 3.0 * theta) * cap as f64 - 1e-9).ceil() as usize);
        prop_assert_eq!(s.max_load() <= trace.load_cap, true);
        let report = group_costs(inst.clients(), &s, CostKind::Abs, None).unwrap();
        prop_assert!(report.max_average <= 3.0 / (theta * (1.0 - delta)) * frac.lambda + 1e-9);
        let frac_open: f64 = frac.y.iter().zip(inst.opening_costs()).map(|(y, f)| y * f).sum();
        prop_assert!(inst.opening_cost_of(&s.centers) <= 2.0 / ((1.0 - theta) * delta) * frac_open + 1e-9);
    }

    #[test]
    fn transportation_matches_enumeration(seed in 0u64..10_000, n in 1usize..=8, f in 1usize..=3, slack in 0usize..=2) {
        let mut r = rng(seed);
        let clients: Vec<Vec<f64>> = (0..n).map(|_| vec![r.random::<f64>(), r.random::<f64>()]).collect();
        let sites: Vec<Vec<f64>> = (0..f).map(|_| vec![r.random::<f64>(), r.random::<f64>()]).collect();
        let costs = CostMatrix::between(DistanceMode::Euclidean, &clients, &sites);
        let cap = n.div_ceil(f) + slack;
        let opened: Vec<usize> = (0..f).collect();
        let (assignment, total) = transportation_assign(&opened, cap, &costs).unwrap();
        let oracle = enumerate_assignments(&opened, cap, &costs).unwrap();
        prop_assert!((total - oracle).abs() < 1e-9, "flow {} oracle {}", total, oracle);
        let recomputed: f64 = assignment.iter().enumerate().map(|(u, &v)| costs.get(u, v)).sum();
        prop_assert!((recomputed - total).abs() < 1e-9);
    }
}
