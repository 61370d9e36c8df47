use langevin_gauss::sde::NoiseStream;
use langevin_gauss::transport::{solve_assignment, w_p_assignment, w_p_sorted_1d, PointCloud};
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force(cost: &[f64], n: usize) -> f64 {
    permutations(n)
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn cloud(d: usize, n: usize) -> impl Strategy<Value = PointCloud> {
    prop::collection::vec(-5.0f64..5.0, n * d).prop_map(move |v| PointCloud::new(d, v).unwrap())
}

fn pair(d: usize, max_n: usize) -> impl Strategy<Value = (PointCloud, PointCloud)> {
    (1..=max_n).prop_flat_map(move |n| (cloud(d, n), cloud(d, n)))
}

#[test]
fn assignment_matches_brute_force_on_200_instances() {
    let mut s = NoiseStream::new(2024, 0);
    for inst in 0..200 {
        let n = 1 + inst % 8;
        let cost: Vec<f64> = (0..n * n).map(|_| (s.uniform() * 50.0).floor()).collect();
        let perm = solve_assignment(&cost, n);
        let got: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
        assert_eq!(got, brute_force(&cost, n), "instance {inst}, n = {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn assignment_is_optimal_on_real_costs(n in 1usize..=7, seed in any::<u64>()) {
        let mut s = NoiseStream::new(seed, 1);
        let cost: Vec<f64> = (0..n * n).map(|_| s.normal().abs()).collect();
        let perm = solve_assignment(&cost, n);
        let got: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
        let best = brute_force(&cost, n);
        prop_assert!((got - best).abs() <= 1e-12 * best.max(1.0), "{got} vs {best}");
    }

    #[test]
    fn plan_is_a_bijection_and_recomputes((a, b) in pair(3, 40), p in prop_oneof![Just(1.0), Just(1.5), Just(2.0)]) {
        let (est, plan) = w_p_assignment(&a, &b, p).unwrap();
        prop_assert!(plan.is_bijection());
        prop_assert!((plan.recompute(&a, &b, p) - est.value).abs() <= 1e-12 * est.value.max(1.0));
    }

    #[test]
    fn sorted_equals_assignment_in_1d(
        (a, b) in pair(1, 60),
        p in prop_oneof![Just(1.0), Just(1.25), Just(2.0)],
    ) {
        let sorted = w_p_sorted_1d(a.as_slice(), b.as_slice(), p).unwrap().value;
        let assign = w_p_assignment(&a, &b, p).unwrap().0.value;
        prop_assert!((sorted - assign).abs() <= 1e-12 * sorted.max(1.0), "{sorted} vs {assign}");
    }

    #[test]
    fn distance_is_a_metric_on_clouds((a, b) in pair(2, 30), seed in any::<u64>()) {
        let n = a.n();
        let mut s = NoiseStream::new(seed, 2);
        let c = PointCloud::new(2, (0..2 * n).map(|_| s.normal()).collect()).unwrap();
        let w = |x: &PointCloud, y: &PointCloud| w_p_assignment(x, y, 2.0).unwrap().0.value;
        prop_assert!(w(&a, &a) <= 1e-12);
        prop_assert!((w(&a, &b) - w(&b, &a)).abs() <= 1e-12 * w(&a, &b).max(1.0));
        prop_assert!(w(&a, &c) <= w(&a, &b) + w(&b, &c) + 1e-12);
    }

    #[test]
    fn scaling_and_translation((a, b) in pair(2, 30), c in -4.0f64..4.0, p in prop_oneof![Just(1.0), Just(2.0)]) {
        let base = w_p_assignment(&a, &b, p).unwrap().0.value;
        let scaled = w_p_assignment(&a.scaled(c), &b.scaled(c), p).unwrap().0.value;
        prop_assert!((scaled - c.abs() * base).abs() <= 1e-12 * scaled.max(1.0), "{scaled} vs {}", c.abs() * base);
        let shift = [c, -0.5 * c];
        let moved = w_p_assignment(&a.translated(&shift), &b.translated(&shift), p).unwrap().0.value;
        prop_assert!((moved - base).abs() <= 1e-10 * base.max(1.0));
    }

    #[test]
    fn wp_is_nondecreasing_in_p((a, b) in pair(2, 25)) {
        let w1 = w_p_assignment(&a, &b, 1.0).unwrap().0.value;
        let w15 = w_p_assignment(&a, &b, 1.5).unwrap().0.value;
        let w2 = w_p_assignment(&a, &b, 2.0).unwrap().0.value;
        prop_assert!(w1 <= w15 * (1.0 + 1e-12) + 1e-14);
        prop_assert!(w15 <= w2 * (1.0 + 1e-12) + 1e-14);
    }
}
