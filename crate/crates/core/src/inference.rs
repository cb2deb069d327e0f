//! Depth-based inference: DD-plot data, the Wilcoxon rank-sum test, a
//! two-sample homogeneity test on depths and threshold outlier detection.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::depth::{depths_of, mid_quantile, sample_depths};
use crate::error::{check_same_size, Error, Result};
use crate::models::{stream_rng, RankingModel};
use crate::perm::{max_distance, Metric, Permutation};
use crate::sample::{RankingDistribution, RankingSample};

/// Largest pooled size accepted by [`wilcoxon_exact`].
pub const MAX_EXACT_POOLED: usize = 24;
/// Pooled size up to which [`wilcoxon_rank_sum`] enumerates.
pub const EXACT_CUTOFF: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DDPoint {
    pub ranking: Permutation,
    pub depth1: f64,
    pub depth2: f64,
    /// 1 or 2: the sample the ranking came from.
    pub origin: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DDPlotData {
    pub points: Vec<DDPoint>,
    pub metric: Metric,
    pub normalized: bool,
}

impl DDPlotData {
    /// Columns `ranking,depth1,depth2,origin`; rankings as one-based ranks.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ranking,depth1,depth2,origin\n");
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.ranking, p.depth1, p.depth2, p.origin).unwrap();
        }
        out
    }
}

/// Depth of every ranking of the pooled multiset under both empirical distributions.
pub fn dd_plot(s1: &RankingSample, s2: &RankingSample, m: Metric, normalized: bool) -> Result<DDPlotData> {
    check_same_size(s1.n_items(), s2.n_items())?;
    let pooled: Vec<Permutation> = s1.iter().chain(s2.iter()).cloned().collect();
    let d1 = depths_of(s1, &pooled, m)?;
    let d2 = depths_of(s2, &pooled, m)?;
    let d_max = max_distance(m, s1.n_items());
    let scale = if normalized && d_max > 0.0 { d_max } else { 1.0 };
    let points = pooled
        .into_iter()
        .enumerate()
        .map(|(k, ranking)| DDPoint {
            ranking,
            depth1: d1[k] / scale,
            depth2: d2[k] / scale,
            origin: if k < s1.len() { 1 } else { 2 },
        })
        .collect();
    Ok(DDPlotData { points, metric: m, normalized })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sides {
    #[default]
    TwoSided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Rank sum of the first group.
    pub statistic: f64,
    /// Continuity-corrected standardized statistic.
    pub z: f64,
    pub p_value: f64,
    pub sides: Sides,
    pub n1: usize,
    pub n2: usize,
    /// The p-value comes from full enumeration.
    pub exact: bool,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// Midranks (1-based) of the pooled values and the tie sizes.
fn midranks(values: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = Vec::new();
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && close(values[idx[end]], values[idx[start]]) {
            end += 1;
        }
        let mid = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = mid;
        }
        ties.push(end - start);
        start = end;
    }
    (ranks, ties)
}

fn check_groups(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    if let Some(v) = x.iter().chain(y).find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("test values must be finite, got {v}")));
    }
    Ok(())
}

struct RankSum {
    w: f64,
    mean: f64,
    z: f64,
    ranks: Vec<f64>,
}

fn rank_sum(x: &[f64], y: &[f64]) -> RankSum {
    let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let n = n1 + n2;
    let w: f64 = ranks[..x.len()].iter().sum();
    let mean = n1 * (n + 1.0) / 2.0;
    let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    let var = n1 * n2 / 12.0 * ((n + 1.0) - if n > 1.0 { tie_term / (n * (n - 1.0)) } else { 0.0 });
    let dev = w - mean;
    let z = if var <= 0.0 || dev.abs() <= 0.5 {
        0.0
    } else {
        dev.signum() * (dev.abs() - 0.5) / var.sqrt()
    };
    RankSum { w, mean, z, ranks }
}

/// Two-sided normal approximation with tie-corrected variance and a 0.5
/// continuity correction.
pub fn wilcoxon_normal(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_groups(x, y)?;
    let rs = rank_sum(x, y);
    let p = erfc(rs.z.abs() / std::f64::consts::SQRT_2).min(1.0);
    Ok(TestResult {
        statistic: rs.w,
        z: rs.z,
        p_value: p,
        sides: Sides::TwoSided,
        n1: x.len(),
        n2: y.len(),
        exact: false,
    })
}

/// Two-sided p-value `P(|W − E W| >= |w − E W|)` by enumerating every split
/// of the pooled midranks.
pub fn wilcoxon_exact(x: &[f64], y: &[f64]) -> Result<TestResult> {
    check_groups(x, y)?;
    let total = x.len() + y.len();
    if total > MAX_EXACT_POOLED {
        return Err(Error::TooLarge { what: "exact rank-sum enumeration", n: total, max: MAX_EXACT_POOLED });
    }
    let rs = rank_sum(x, y);
    let observed = (rs.w - rs.mean).abs();
    let (mut extreme, mut count) = (0u64, 0u64);
    let k = x.len();
    // Walk all k-subsets of {0..total} in lexicographic order.
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        let s: f64 = pick.iter().map(|&i| rs.ranks[i]).sum();
        count += 1;
        if (s - rs.mean).abs() >= observed - 1e-9 {
            extreme += 1;
        }
        let mut i = k;
        while i > 0 && pick[i - 1] == total - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        pick[i - 1] += 1;
        for j in i..k {
            pick[j] = pick[j - 1] + 1;
        }
    }
    Ok(TestResult {
        statistic: rs.w,
        z: rs.z,
        p_value: (extreme as f64 / count as f64).min(1.0),
        sides: Sides::TwoSided,
        n1: x.len(),
        n2: y.len(),
        exact: true,
    })
}

/// Exact enumeration when `n1 + n2 <= 12`, normal approximation otherwise.
pub fn wilcoxon_rank_sum(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.len() + y.len() <= EXACT_CUTOFF {
        wilcoxon_exact(x, y)
    } else {
        wilcoxon_normal(x, y)
    }
}

/// Rank-sum test on the depths of `s1` and `s2` relative to a held-out reference sample.
pub fn homogeneity_test(
    reference: &RankingSample,
    s1: &RankingSample,
    s2: &RankingSample,
    m: Metric,
) -> Result<TestResult> {
    check_same_size(reference.n_items(), s1.n_items())?;
    check_same_size(reference.n_items(), s2.n_items())?;
    let d1 = depths_of(reference, s1.rankings(), m)?;
    let d2 = depths_of(reference, s2.rankings(), m)?;
    wilcoxon_rank_sum(&d1, &d2)
}

/// Repeated homogeneity tests: each repetition draws a fresh reference and
/// first tested sample from `reference_model` and a second tested sample from
/// `alternative_model`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityExperiment {
    pub reference_model: RankingModel,
    pub alternative_model: RankingModel,
    pub reference_size: usize,
    pub test_size: usize,
    pub reps: usize,
    pub seed: u64,
    pub metric: Metric,
}

pub fn homogeneity_monte_carlo(exp: &HomogeneityExperiment) -> Result<Vec<TestResult>> {
    check_same_size(exp.reference_model.n(), exp.alternative_model.n())?;
    (0..exp.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream_rng(exp.seed, rep as u64);
            let reference = exp.reference_model.sample_with(exp.reference_size, &mut rng)?;
            let s1 = exp.reference_model.sample_with(exp.test_size, &mut rng)?;
            let s2 = exp.alternative_model.sample_with(exp.test_size, &mut rng)?;
            homogeneity_test(&reference, &s1, &s2, exp.metric)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Threshold {
    /// Depth divided by its maximum, in `[0, 1]`.
    NormalizedLevel(f64),
    /// Unnormalized depth.
    Raw(f64),
    /// Mid-distribution quantile of the sample depths at this level.
    Quantile(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    /// Sample indices whose depth lies strictly below the threshold.
    pub outliers: Vec<usize>,
    /// Threshold in the units of `depths`.
    pub threshold_used: f64,
    pub normalized: bool,
    pub depths: Vec<f64>,
}

pub fn detect_outliers(sample: &RankingSample, m: Metric, threshold: Threshold) -> Result<OutlierReport> {
    let raw = sample_depths(sample, m)?;
    let d_max = max_distance(m, sample.n_items());
    let (depths, u, normalized) = match threshold {
        Threshold::NormalizedLevel(u) => {
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::Domain(format!("normalized level must lie in [0, 1], got {u}")));
            }
            let scale = if d_max > 0.0 { d_max } else { 1.0 };
            (raw.iter().map(|d| d / scale).collect::<Vec<f64>>(), u, true)
        }
        Threshold::Raw(u) => {
            if !u.is_finite() {
                return Err(Error::Domain(format!("threshold must be finite, got {u}")));
            }
            (raw, u, false)
        }
        Threshold::Quantile(alpha) => {
            let pts: Vec<(f64, f64)> = raw.iter().enumerate().map(|(i, &d)| (d, sample.weight(i))).collect();
            let u = mid_quantile(&pts, alpha)?;
            (raw, u, false)
        }
    };
    let outliers = (0..depths.len()).filter(|&i| depths[i] < u).collect();
    Ok(OutlierReport { outliers, threshold_used: u, normalized, depths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample_mallows, MallowsParams};

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn exact_small_case() {
        let r = wilcoxon_exact(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert!((r.p_value - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.statistic, 3.0);
        assert!(wilcoxon_rank_sum(&[1.0, 2.0], &[3.0, 4.0]).unwrap().exact);
    }

    #[test]
    fn identical_groups() {
        let x = [0.3, 1.0, 2.5, 2.5, 7.0];
        for r in [wilcoxon_normal(&x, &x).unwrap(), wilcoxon_exact(&x, &x).unwrap()] {
            assert_eq!(r.z, 0.0);
            assert_eq!(r.p_value, 1.0);
        }
    }

    #[test]
    fn all_tied_is_not_significant() {
        let r = wilcoxon_normal(&[1.0; 4], &[1.0; 9]).unwrap();
        assert_eq!((r.z, r.p_value), (0.0, 1.0));
    }

    #[test]
    fn enumeration_counts_every_split() {
        // Fully separated groups: only the two extreme splits are as extreme.
        let x: Vec<f64> = (0..5).map(f64::from).collect();
        let y: Vec<f64> = (5..11).map(f64::from).collect();
        let r = wilcoxon_exact(&x, &y).unwrap();
        assert!((r.p_value - 2.0 / binom(11, 5) as f64).abs() < 1e-15);
    }

    #[test]
    fn symmetric_in_groups() {
        let x = [0.1, 0.7, 0.7, 3.0];
        let y = [0.2, 0.5, 1.5, 2.0, 2.2, 9.0];
        assert_eq!(wilcoxon_normal(&x, &y).unwrap().p_value, wilcoxon_normal(&y, &x).unwrap().p_value);
        assert_eq!(wilcoxon_exact(&x, &y).unwrap().p_value, wilcoxon_exact(&y, &x).unwrap().p_value);
    }

    #[test]
    fn normal_matches_known_value() {
        // W = 15, E = 27.5, var = 5·5·11/12 = 22.916..., z = −12/4.787...
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [6.0, 7.0, 8.0, 9.0, 10.0];
        let r = wilcoxon_normal(&x, &y).unwrap();
        let z = -12.0 / (25.0 * 11.0 / 12.0f64).sqrt();
        assert!((r.z - z).abs() < 1e-12);
        assert!((r.p_value - 0.012185).abs() < 1e-5);
    }

    #[test]
    fn rejects_empty_and_large() {
        assert!(wilcoxon_rank_sum(&[], &[1.0]).is_err());
        assert!(wilcoxon_exact(&[0.0; 13], &[1.0; 13]).is_err());
    }

    #[test]
    fn ddplot_shapes() {
        let m = MallowsParams::new(Permutation::identity(5), 0.5).unwrap();
        let a = sample_mallows(&m, 20, 1).unwrap();
        let b = sample_mallows(&m, 13, 2).unwrap();
        let same = dd_plot(&a, &a, Metric::KendallTau, false).unwrap();
        assert!(same.points.iter().all(|p| p.depth1 == p.depth2));
        let ab = dd_plot(&a, &b, Metric::SpearmanFootrule, true).unwrap();
        let ba = dd_plot(&b, &a, Metric::SpearmanFootrule, true).unwrap();
        assert_eq!(ab.points.len(), 33);
        assert_eq!(ab.points.iter().filter(|p| p.origin == 2).count(), 13);
        for p in &ab.points {
            let q = ba.points.iter().find(|q| q.ranking == p.ranking).unwrap();
            assert_eq!((p.depth1, p.depth2), (q.depth2, q.depth1));
            assert!((0.0..=1.0).contains(&p.depth1));
        }
        assert_eq!(ab.to_csv().lines().count(), 34);
        let small = RankingSample::new(vec![Permutation::identity(4)]).unwrap();
        assert!(dd_plot(&a, &small, Metric::KendallTau, false).is_err());
    }

    #[test]
    fn homogeneity_same_sample() {
        let m = MallowsParams::new(Permutation::identity(5), 0.6).unwrap();
        let r = sample_mallows(&m, 50, 4).unwrap();
        let s = sample_mallows(&m, 20, 5).unwrap();
        assert_eq!(homogeneity_test(&r, &s, &s, Metric::KendallTau).unwrap().p_value, 1.0);
    }

    #[test]
    fn outlier_thresholds() {
        let m = MallowsParams::new(Permutation::identity(5), 0.5).unwrap();
        let s = sample_mallows(&m, 40, 9).unwrap();
        let none = detect_outliers(&s, Metric::KendallTau, Threshold::Raw(-1.0)).unwrap();
        assert!(none.outliers.is_empty());
        let all = detect_outliers(&s, Metric::KendallTau, Threshold::Raw(11.0)).unwrap();
        assert_eq!(all.outliers.len(), 40);
        let lvl = detect_outliers(&s, Metric::KendallTau, Threshold::NormalizedLevel(1.0)).unwrap();
        assert_eq!(lvl.outliers.len(), 40);
        assert!(detect_outliers(&s, Metric::KendallTau, Threshold::NormalizedLevel(1.5)).is_err());
        let q = detect_outliers(&s, Metric::KendallTau, Threshold::Quantile(0.25)).unwrap();
        assert!(q.outliers.len() <= 20);
    }
}
