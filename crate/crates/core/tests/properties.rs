use proptest::prelude::*;
use proptest::sample::subsequence;

use rankdepth::aggregation::{borda_detailed, kemeny_bruteforce, BordaConfig};
use rankdepth::depth::{depth_empirical, depth_exact, depth_kendall_from_pairwise, sample_depths};
use rankdepth::inference::{dd_plot, wilcoxon_rank_sum};
use rankdepth::io::{emit_rankings, parse_rankings, CsvOptions, RankingFormat};
use rankdepth::models::ExplicitDistribution;
use rankdepth::pairwise::empirical_pairwise;
use rankdepth::perm::{distance, max_distance, Metric, Permutation};
use rankdepth::sample::RankingSample;
use rankdepth::trimming::{trim_to_sst, TrimConfig};

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|r| Permutation::new(r).unwrap())
}

fn sample(n: usize, max: usize) -> impl Strategy<Value = RankingSample> {
    prop::collection::vec(perm(n), 1..=max).prop_map(|v| RankingSample::new(v).unwrap())
}

fn sized_sample() -> impl Strategy<Value = RankingSample> {
    (1usize..=6).prop_flat_map(|n| sample(n, 30))
}

fn metric() -> impl Strategy<Value = Metric> {
    prop::sample::select(Metric::ALL.to_vec())
}

fn values(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![(0u32..6).prop_map(f64::from), -50.0f64..50.0], 1..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn depth_is_right_invariant(s in sample(4, 12), sigma in perm(4), pi in perm(4), m in metric()) {
        let p = ExplicitDistribution::from_sample(&s).unwrap();
        let moved = p.right_translate(&pi).unwrap();
        let a = depth_exact(&p, &sigma, m).unwrap();
        let b = depth_exact(&moved, &sigma.compose(&pi).unwrap(), m).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn depth_lies_in_range(s in sized_sample(), m in metric()) {
        let n = s.rankings()[0].len();
        for d in sample_depths(&s, m).unwrap() {
            prop_assert!(d >= -1e-9 && d <= max_distance(m, n) + 1e-9);
        }
    }

    #[test]
    fn kendall_pairwise_path_agrees(s in sized_sample()) {
        let pw = empirical_pairwise(&s).unwrap();
        for sigma in s.iter() {
            let a = depth_kendall_from_pairwise(&pw, sigma).unwrap();
            let b = depth_empirical(&s, sigma, Metric::KendallTau).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn metrics_are_symmetric_with_zero_diagonal(a in perm(6), b in perm(6), m in metric()) {
        prop_assert_eq!(distance(&a, &b, m).unwrap(), distance(&b, &a, m).unwrap());
        prop_assert_eq!(distance(&a, &a, m).unwrap(), 0.0);
    }

    #[test]
    fn csv_round_trips(s in sized_sample(), ordering in any::<bool>(), one_based in any::<bool>()) {
        let opts = CsvOptions {
            format: if ordering { RankingFormat::Ordering } else { RankingFormat::Ranks },
            one_based,
        };
        prop_assert_eq!(parse_rankings(&emit_rankings(&s, opts), opts).unwrap(), s);
    }

    #[test]
    fn wilcoxon_is_symmetric(x in values(15), y in values(15)) {
        let a = wilcoxon_rank_sum(&x, &y).unwrap();
        let b = wilcoxon_rank_sum(&y, &x).unwrap();
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.p_value));
    }

    #[test]
    fn wilcoxon_ignores_monotone_transforms(x in values(15), y in values(15), scale in 0.05f64..10.0, shift in -5.0f64..5.0) {
        // Increasing and gap preserving, so the tie tolerance sees the same ties.
        let f = |v: &f64| {
            let t = v * scale + shift;
            t + t.powi(3) / 100.0
        };
        let a = wilcoxon_rank_sum(&x, &y).unwrap();
        let b = wilcoxon_rank_sum(&x.iter().map(f).collect::<Vec<_>>(), &y.iter().map(f).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a.statistic, b.statistic);
        prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
    }

    #[test]
    fn dd_plot_swaps_axes(a in sample(5, 15), b in sample(5, 15), normalized in any::<bool>()) {
        let ab = dd_plot(&a, &b, Metric::KendallTau, normalized).unwrap();
        let ba = dd_plot(&b, &a, Metric::KendallTau, normalized).unwrap();
        prop_assert_eq!(ab.points.len(), a.len() + b.len());
        // Points are pooled first sample first, so rotate `ba` to line up.
        let rotated = ba.points[b.len()..].iter().chain(&ba.points[..b.len()]);
        for (p, q) in ab.points.iter().zip(rotated) {
            prop_assert_eq!(&p.ranking, &q.ranking);
            prop_assert!((p.depth1 - q.depth2).abs() < 1e-9 && (p.depth2 - q.depth1).abs() < 1e-9);
        }
    }

    #[test]
    fn trimming_is_idempotent(s in (3usize..=5).prop_flat_map(|n| sample(n, 25))) {
        let cfg = TrimConfig::default();
        let once = trim_to_sst(&s, &cfg).unwrap();
        if !once.stalled {
            let pw = empirical_pairwise(&once.trimmed).unwrap();
            prop_assert!(pw.require_sst().is_ok());
            let twice = trim_to_sst(&once.trimmed, &cfg).unwrap();
            prop_assert_eq!(twice.trimmed, once.trimmed);
            prop_assert_eq!(twice.trace.iterations(), 0);
        }
    }

    #[test]
    fn trimming_keeps_a_subsample(s in (3usize..=5).prop_flat_map(|n| sample(n, 25))) {
        let res = trim_to_sst(&s, &TrimConfig::default()).unwrap();
        prop_assert!(!res.trimmed.is_empty());
        prop_assert_eq!(res.trimmed.len(), res.kept.len());
        for (k, &i) in res.kept.iter().enumerate() {
            prop_assert_eq!(&res.trimmed.rankings()[k], &s.rankings()[i]);
        }
    }

    #[test]
    fn borda_ignores_duplication(s in sized_sample(), copies in 2usize..4) {
        let doubled = RankingSample::new(s.rankings().iter().flat_map(|r| std::iter::repeat_n(r.clone(), copies)).collect()).unwrap();
        let a = borda_detailed(&s, &BordaConfig::uniform()).unwrap();
        let b = borda_detailed(&doubled, &BordaConfig::uniform()).unwrap();
        prop_assert_eq!(a.ranking, b.ranking);
        for (x, y) in a.scores.iter().zip(&b.scores) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn kemeny_median_is_deepest(s in (2usize..=5).prop_flat_map(|n| sample(n, 20)), m in metric()) {
        let res = kemeny_bruteforce(&s, m).unwrap();
        let best = depth_empirical(&s, &res.medians[0], m).unwrap();
        for sigma in Permutation::all(s.rankings()[0].len()) {
            prop_assert!(depth_empirical(&s, &sigma, m).unwrap() <= best + 1e-9);
        }
    }

    #[test]
    fn depth_of_subsample_is_finite(s in sample(4, 20), keep in subsequence((0..20).collect::<Vec<usize>>(), 1..20)) {
        let idx: Vec<usize> = keep.into_iter().filter(|&i| i < s.len()).collect();
        prop_assume!(!idx.is_empty());
        let sub = s.select(&idx).unwrap();
        prop_assert!(sample_depths(&sub, Metric::SpearmanRho).unwrap().iter().all(|d| d.is_finite()));
    }
}
