use layered_hill::{
    geometric_constants, missing_count, remove_top_extremes, sample_cloud, Constraint,
    GeometricConstants, RadialFamily, RadialModel, SeededRng,
};
use proptest::prelude::*;

#[test]
fn power_law_survival() {
    let model = RadialModel::<f64>::power_law(2.5, 2).unwrap();
    let n = 100_000;
    let cloud = sample_cloud(&model, n, &SeededRng::new(2024, 0), false).unwrap();
    for r in [2.0f64, 4.0, 8.0] {
        let p = r.powf(2.0 - 2.5);
        let emp = cloud.norms().iter().filter(|&&x| x > r).count() as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((emp - p).abs() <= 3.0 * se, "r = {r}: {emp} vs {p}");
    }
}

#[test]
fn norms_at_least_one() {
    for (alpha, d) in [(1.5, 1), (2.5, 2), (4.0, 3)] {
        let model = RadialModel::<f64>::power_law(alpha, d).unwrap();
        let cloud = sample_cloud(&model, 20_000, &SeededRng::new(7, d as u64), false).unwrap();
        assert!(cloud.norms().iter().all(|&r| r >= 1.0));
    }
}

#[test]
fn directions_are_isotropic() {
    let n = 50_000;
    for family in [RadialFamily::PowerLaw, RadialFamily::IsotropicStable, RadialFamily::FrechetRadial] {
        let alpha = if family == RadialFamily::PowerLaw { 3.5 } else { 1.2 };
        for d in [2usize, 3] {
            let model = RadialModel::<f64>::new(family, alpha, d).unwrap();
            let cloud = sample_cloud(&model, n, &SeededRng::new(31, d as u64), false).unwrap();
            let mut mean = vec![0.0; d];
            for (p, &r) in cloud.points().zip(cloud.norms()) {
                for (m, x) in mean.iter_mut().zip(p) {
                    *m += x / r;
                }
            }
            let len = mean.iter().map(|m| (m / n as f64).powi(2)).sum::<f64>().sqrt();
            assert!(len <= 4.0 / (n as f64).sqrt(), "{family:?} d = {d}: {len}");
        }
    }
}

#[test]
fn frechet_radial_law() {
    let model = RadialModel::<f64>::new(RadialFamily::FrechetRadial, 1.5, 2).unwrap();
    let n = 100_000;
    let cloud = sample_cloud(&model, n, &SeededRng::new(3, 3), false).unwrap();
    for r in [0.5f64, 1.0, 3.0] {
        let p = (-r.powf(-1.5)).exp();
        let emp = cloud.norms().iter().filter(|&&x| x <= r).count() as f64 / n as f64;
        assert!((emp - p).abs() <= 3.0 * (p * (1.0 - p) / n as f64).sqrt() + 1e-9);
    }
}

#[test]
fn seeds_reproduce_across_families() {
    for family in [RadialFamily::PowerLaw, RadialFamily::IsotropicStable, RadialFamily::FrechetRadial] {
        let model = RadialModel::<f64>::new(family, 1.5, 1).unwrap();
        let a = sample_cloud(&model, 500, &SeededRng::new(1, 1), true).unwrap();
        let b = sample_cloud(&model, 500, &SeededRng::new(1, 1), true).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn monte_carlo_pair_constant() {
    // C_2 for pair_distance(1) in the plane is sqrt(κ_2 · s_1 / 2) = π
    let c = Constraint::<f64>::pair_distance(1.0).unwrap();
    let gc: GeometricConstants<f64> = geometric_constants(&c, 2, Some(1_000_000)).unwrap();
    let pi = std::f64::consts::PI;
    assert!((gc.ck - pi).abs() / pi < 0.01, "C_2 = {}", gc.ck);
    let exact = GeometricConstants::closed_form(&c, 2).unwrap();
    assert!((exact.ck - pi).abs() < 1e-12);
    for l in 1..=2 {
        let rel = (gc.dkl(l).unwrap() - exact.dkl(l).unwrap()).abs() / exact.dkl(l).unwrap();
        assert!(rel < 0.02, "D_2{l}: {rel}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn removal_invariants(n in 1usize..300, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let model = RadialModel::<f64>::power_law(2.5, 2).unwrap();
        let cloud = sample_cloud(&model, n, &SeededRng::new(seed, 0), false).unwrap();
        let remove = ((n as f64) * frac) as usize;
        let out = remove_top_extremes(&cloud, remove).unwrap();
        prop_assert_eq!(out.len(), n - remove);

        let mut sorted = cloud.norms().to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if remove > 0 && remove < n {
            let max_left = out.norms().iter().cloned().fold(f64::MIN, f64::max);
            prop_assert!(max_left <= sorted[remove - 1]);
            prop_assert_eq!(max_left, sorted[remove]);
        }
        // survivors appear in their original relative order
        let mut it = cloud.points();
        for p in out.points() {
            prop_assert!(it.any(|q| q == p));
        }
    }

    #[test]
    fn nested_removal_composes(seed in any::<u64>(), a in 0usize..20, b in 0usize..20) {
        let model = RadialModel::<f64>::power_law(3.0, 2).unwrap();
        let cloud = sample_cloud(&model, 100, &SeededRng::new(seed, 9), false).unwrap();
        let once = remove_top_extremes(&cloud, a + b).unwrap();
        let twice = remove_top_extremes(&remove_top_extremes(&cloud, a).unwrap(), b).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn missing_count_rounds(delta in 0.0f64..2.0, m in 1usize..10_000) {
        let c = missing_count(delta, m).unwrap();
        prop_assert!((c as f64 - delta * m as f64).abs() <= 0.5 + 1e-9);
    }
}
