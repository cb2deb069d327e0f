//! Metric-based ranking depth `D_P(σ) = ‖d‖∞ − E_P[d(σ, Σ)]` and the
//! machinery derived from it: Kendall closed forms, depth regions, survivor
//! functions, smoothed and mid-distribution quantiles, and the uniform
//! deviation bound for the empirical depth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{check_same_size, Error, Result};
use crate::models::{ExplicitDistribution, MAX_EXPLICIT_N};
use crate::pairwise::{empirical_pairwise, PairwiseMatrix};
use crate::perm::{distance_unchecked, max_distance, Metric, Permutation};
use crate::sample::{RankingDistribution, RankingSample};

/// Depth values closer than this are treated as equal (contours, argmin/argmax sets).
pub const DEPTH_TOL: f64 = 1e-12;

fn depth_against<D: RankingDistribution + ?Sized>(dist: &D, sigma: &Permutation, m: Metric) -> Result<f64> {
    check_same_size(dist.n_items(), sigma.len())?;
    let risk: f64 = dist.atoms().map(|(nu, p)| p * distance_unchecked(sigma, nu, m)).sum();
    Ok(max_distance(m, sigma.len()) - risk)
}

/// `D_P(σ)` for a dense distribution.
pub fn depth_exact(dist: &ExplicitDistribution, sigma: &Permutation, m: Metric) -> Result<f64> {
    depth_against(dist, sigma, m)
}

/// `D̂_N(σ)`: depth relative to the empirical distribution of `sample`.
pub fn depth_empirical(sample: &RankingSample, sigma: &Permutation, m: Metric) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    depth_against(sample, sigma, m)
}

/// Ranking risk `L_P(σ) = E_P[d(Σ, σ)]`.
pub fn risk<D: RankingDistribution + ?Sized>(dist: &D, sigma: &Permutation, m: Metric) -> Result<f64> {
    Ok(max_distance(m, sigma.len()) - depth_against(dist, sigma, m)?)
}

/// Kendall depth from pairwise probabilities in `O(n²)`:
/// `C(n,2) − Σ_{i<j} p_ij·1{σ(i)>σ(j)} − Σ_{i<j} (1−p_ij)·1{σ(i)<σ(j)}`.
pub fn depth_kendall_from_pairwise(m: &PairwiseMatrix, sigma: &Permutation) -> Result<f64> {
    check_same_size(m.n(), sigma.len())?;
    let n = m.n();
    let mut loss = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let p = m.get(i, j);
            loss += if sigma.rank(i) > sigma.rank(j) { p } else { 1.0 - p };
        }
    }
    Ok(max_distance(Metric::KendallTau, n) - loss)
}

/// Depths of `points` relative to `dist`, using the pairwise shortcut for Kendall.
pub fn depths_of<D: RankingDistribution + Sync + ?Sized>(
    dist: &D,
    points: &[Permutation],
    m: Metric,
) -> Result<Vec<f64>> {
    for s in points {
        check_same_size(dist.n_items(), s.len())?;
    }
    if m == Metric::KendallTau {
        let pw = PairwiseMatrix::from_distribution(dist);
        points.par_iter().map(|s| depth_kendall_from_pairwise(&pw, s)).collect()
    } else {
        points.par_iter().map(|s| depth_against(dist, s, m)).collect()
    }
}

/// Depth of every ranking of `sample` relative to the sample itself, in sample order.
pub fn sample_depths(sample: &RankingSample, m: Metric) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    depths_of(sample, sample.rankings(), m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthExtremes {
    /// Largest attainable Kendall depth.
    pub d_star: f64,
    /// Smallest attainable Kendall depth.
    pub d_floor: f64,
}

/// Closed-form extreme Kendall depths of a stochastically transitive matrix.
pub fn depth_extremes(m: &PairwiseMatrix) -> Result<DepthExtremes> {
    m.require_st()?;
    let n = m.n();
    let margin: f64 = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (m.get(i, j) - 0.5).abs())
        .sum();
    let half = max_distance(Metric::KendallTau, n) / 2.0;
    Ok(DepthExtremes { d_star: half + margin, d_floor: half - margin })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepestPair {
    pub deepest: Permutation,
    pub least_deep: Permutation,
}

/// Unique Kendall median of an SST matrix and its reversal:
/// `σ*(i) = #{j ≠ i : p_ij < 1/2}` (zero-based).
pub fn deepest_and_least_deep(m: &PairwiseMatrix) -> Result<DeepestPair> {
    m.require_sst()?;
    let n = m.n();
    let ranks: Vec<usize> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i && m.get(i, j) < 0.5).count())
        .collect();
    let deepest = Permutation::new(ranks).expect("SST matrices induce a total order");
    let least_deep = deepest.reversed();
    Ok(DeepestPair { deepest, least_deep })
}

/// `D* − D(σ) = 2 Σ_{i<j} |p_ij − 1/2| · 1{(σ(j) − σ(i))(p_ij − 1/2) < 0}`.
pub fn depth_gap(m: &PairwiseMatrix, sigma: &Permutation) -> Result<f64> {
    m.require_sst()?;
    check_same_size(m.n(), sigma.len())?;
    let n = m.n();
    let mut gap = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = m.get(i, j) - 0.5;
            let order = sigma.rank(j) as f64 - sigma.rank(i) as f64;
            if order * d < 0.0 {
                gap += 2.0 * d.abs();
            }
        }
    }
    Ok(gap)
}

/// Depth values for a set of rankings under one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthProfile {
    pub metric: Metric,
    pub n: usize,
    pub d_max: f64,
    entries: Vec<(Permutation, f64)>,
}

impl DepthProfile {
    /// Depth of every permutation of `S_n` (`n <= 8`), in lexicographic order.
    pub fn exhaustive<D: RankingDistribution + Sync + ?Sized>(dist: &D, m: Metric) -> Result<Self> {
        let n = dist.n_items();
        if n > MAX_EXPLICIT_N {
            return Err(Error::TooLarge { what: "exhaustive depth profile", n, max: MAX_EXPLICIT_N });
        }
        let perms: Vec<Permutation> = Permutation::all(n).collect();
        DepthProfile::over(dist, perms, m)
    }

    pub fn over<D: RankingDistribution + Sync + ?Sized>(
        dist: &D,
        points: Vec<Permutation>,
        m: Metric,
    ) -> Result<Self> {
        let depths = depths_of(dist, &points, m)?;
        let n = dist.n_items();
        Ok(DepthProfile {
            metric: m,
            n,
            d_max: max_distance(m, n),
            entries: points.into_iter().zip(depths).collect(),
        })
    }

    /// Per-index depths of a sample relative to itself (duplicates kept).
    pub fn of_sample(sample: &RankingSample, m: Metric) -> Result<Self> {
        if sample.is_empty() {
            return Err(Error::EmptySample);
        }
        DepthProfile::over(sample, sample.rankings().to_vec(), m)
    }

    pub fn entries(&self) -> &[(Permutation, f64)] {
        &self.entries
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, d)| *d).collect()
    }

    /// Depths divided by `‖d‖∞` (left as-is when `‖d‖∞ = 0`).
    pub fn normalized_values(&self) -> Vec<f64> {
        let scale = if self.d_max > 0.0 { self.d_max } else { 1.0 };
        self.entries.iter().map(|(_, d)| d / scale).collect()
    }

    pub fn depth_of(&self, sigma: &Permutation) -> Option<f64> {
        self.entries.iter().find(|(s, _)| s == sigma).map(|(_, d)| *d)
    }

    /// `{σ : D(σ) >= u}`.
    pub fn region(&self, u: f64) -> Vec<&Permutation> {
        self.entries.iter().filter(|(_, d)| *d >= u - DEPTH_TOL).map(|(s, _)| s).collect()
    }

    /// `{σ : D(σ) = u}` up to [`DEPTH_TOL`].
    pub fn contour(&self, u: f64) -> Vec<&Permutation> {
        self.entries.iter().filter(|(_, d)| (d - u).abs() <= DEPTH_TOL).map(|(s, _)| s).collect()
    }

    /// Region whose level is the smoothed quantile `S̃⁻¹(α)`.
    pub fn quantile_region(&self, survivor: &SurvivorEstimate, alpha: f64) -> Result<Vec<&Permutation>> {
        Ok(self.region(survivor.inverse(alpha)?))
    }

    pub fn max_depth(&self) -> f64 {
        self.entries.iter().map(|(_, d)| *d).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_depth(&self) -> f64 {
        self.entries.iter().map(|(_, d)| *d).fold(f64::INFINITY, f64::min)
    }

    /// All rankings tied for the largest depth, deduplicated and sorted.
    pub fn deepest(&self) -> Vec<Permutation> {
        self.sorted_unique(self.contour(self.max_depth()))
    }

    pub fn least_deep(&self) -> Vec<Permutation> {
        self.sorted_unique(self.contour(self.min_depth()))
    }

    fn sorted_unique(&self, v: Vec<&Permutation>) -> Vec<Permutation> {
        let mut out: Vec<Permutation> = v.into_iter().cloned().collect();
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurvivorKind {
    Plain,
    TwoSplit,
    Smoothed,
}

/// Depth survivor function `S(u) = P{D(Σ) >= u}` of a discrete depth law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivorEstimate {
    pub kind: SurvivorKind,
    /// Distinct depth values, increasing.
    pub jumps: Vec<f64>,
    pub masses: Vec<f64>,
    pub bandwidth: Option<f64>,
    /// Number of observations behind the estimate.
    pub n_obs: usize,
}

impl SurvivorEstimate {
    fn from_weighted(mut pairs: Vec<(f64, f64)>, kind: SurvivorKind) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        let n_obs = pairs.len();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pairs.iter().map(|(_, w)| w).sum();
        let mut jumps: Vec<f64> = Vec::new();
        let mut masses: Vec<f64> = Vec::new();
        for (d, w) in pairs {
            match jumps.last() {
                Some(&last) if (d - last).abs() <= DEPTH_TOL => *masses.last_mut().unwrap() += w / total,
                _ => {
                    jumps.push(d);
                    masses.push(w / total);
                }
            }
        }
        Ok(SurvivorEstimate { kind, jumps, masses, bandwidth: None, n_obs })
    }

    pub fn value(&self, u: f64) -> f64 {
        match self.bandwidth {
            Some(h) if self.kind == SurvivorKind::Smoothed => self
                .jumps
                .iter()
                .zip(&self.masses)
                .map(|(&d, &p)| p * (1.0 - std_normal_cdf((u - d) / h)))
                .sum(),
            _ => self
                .jumps
                .iter()
                .zip(&self.masses)
                .filter(|(&d, _)| d >= u)
                .map(|(_, &p)| p)
                .sum(),
        }
    }

    /// `S⁻¹(α) = inf{u : S(u) <= 1 − α}`; bisection to 1e-10 for the smoothed kind.
    pub fn inverse(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0, 1), got {alpha}")));
        }
        let target = 1.0 - alpha;
        match self.bandwidth {
            Some(h) if self.kind == SurvivorKind::Smoothed => {
                let mut lo = self.jumps[0] - 40.0 * h;
                let mut hi = self.jumps[self.jumps.len() - 1] + 40.0 * h;
                while hi - lo > 1e-10 {
                    let mid = 0.5 * (lo + hi);
                    if self.value(mid) <= target {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
            _ => {
                // S is constant on (δ_k, δ_{k+1}] with value Σ_{i>k} p_i.
                let mut tail: f64 = 1.0;
                for (k, &p) in self.masses.iter().enumerate() {
                    tail -= p;
                    if tail <= target + 1e-15 {
                        return Ok(self.jumps[k]);
                    }
                }
                Ok(*self.jumps.last().unwrap())
            }
        }
    }

    /// Mid-distribution quantile of the depth law.
    pub fn mid_quantile(&self, alpha: f64) -> Result<f64> {
        let pts: Vec<(f64, f64)> = self.jumps.iter().copied().zip(self.masses.iter().copied()).collect();
        mid_quantile(&pts, alpha)
    }

    /// Lower quantile `min{δ_k : P(D <= δ_k) >= t}`.
    fn lower_quantile(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (&d, &p) in self.jumps.iter().zip(&self.masses) {
            acc += p;
            if acc >= t - 1e-15 {
                return d;
            }
        }
        *self.jumps.last().unwrap()
    }
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Survivor function of `D(Σ)` for `Σ ~ dist`, depths taken relative to `dist` itself.
pub fn survivor<D: RankingDistribution + Sync + ?Sized>(dist: &D, m: Metric) -> Result<SurvivorEstimate> {
    let atoms: Vec<(Permutation, f64)> = dist.atoms().map(|(s, p)| (s.clone(), p)).collect();
    let points: Vec<Permutation> = atoms.iter().map(|(s, _)| s.clone()).collect();
    let depths = depths_of(dist, &points, m)?;
    SurvivorEstimate::from_weighted(
        depths.into_iter().zip(atoms.iter().map(|(_, p)| *p)).collect(),
        SurvivorKind::Plain,
    )
}

/// 2-split estimator: the second half of the sample, with depths taken
/// relative to the empirical distribution of the first `⌊N/2⌋` rankings.
pub fn two_split_survivor(sample: &RankingSample, m: Metric) -> Result<SurvivorEstimate> {
    let n_total = sample.len();
    if n_total < 2 {
        return Err(Error::Domain(format!("two-split survivor needs N >= 2, got {n_total}")));
    }
    let half = n_total / 2;
    let first = sample.select(&(0..half).collect::<Vec<_>>())?;
    let second: Vec<usize> = (half..n_total).collect();
    let points: Vec<Permutation> = second.iter().map(|&i| sample.rankings()[i].clone()).collect();
    let depths = depths_of(&first, &points, m)?;
    SurvivorEstimate::from_weighted(
        depths.into_iter().zip(second.iter().map(|&i| sample.weight(i))).collect(),
        SurvivorKind::TwoSplit,
    )
}

/// Gaussian kernel smoothing of a survivor function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub bandwidth: f64,
}

impl SmoothingConfig {
    pub fn new(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::Domain(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(SmoothingConfig { bandwidth })
    }

    /// `h = max(1e-6, 0.5 · IQR · N^{-1/5})`.
    pub fn default_for(s: &SurvivorEstimate) -> Self {
        let iqr = s.lower_quantile(0.75) - s.lower_quantile(0.25);
        let h = 0.5 * iqr * (s.n_obs.max(1) as f64).powf(-0.2);
        SmoothingConfig { bandwidth: h.max(1e-6) }
    }
}

/// `S̃(u) = Σ_k p_k (1 − Φ((u − δ_k)/h))`, the exact convolution with a Gaussian kernel.
pub fn smoothed_survivor(s: &SurvivorEstimate, cfg: SmoothingConfig) -> SurvivorEstimate {
    SurvivorEstimate {
        kind: SurvivorKind::Smoothed,
        jumps: s.jumps.clone(),
        masses: s.masses.clone(),
        bandwidth: Some(cfg.bandwidth),
        n_obs: s.n_obs,
    }
}

/// Quantile of a discrete law through the mid-distribution function
/// `F_mid(x) = P(X <= x) − P(X = x)/2`, linearly interpolated between the
/// points `(π_k, δ_k)`, `π_k = Σ_{i<k} p_i + p_k/2`.
pub fn mid_quantile(points: &[(f64, f64)], alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Domain(format!("quantile level must lie in [0, 1], got {alpha}")));
    }
    let s = SurvivorEstimate::from_weighted(points.to_vec(), SurvivorKind::Plain)?;
    let mut before = 0.0;
    let pi: Vec<f64> = s
        .masses
        .iter()
        .map(|&p| {
            let v = before + p / 2.0;
            before += p;
            v
        })
        .collect();
    let d = s.jumps.len();
    if alpha <= pi[0] {
        return Ok(s.jumps[0]);
    }
    if alpha >= pi[d - 1] {
        return Ok(s.jumps[d - 1]);
    }
    let k = pi.partition_point(|&v| v <= alpha) - 1;
    let lambda = (pi[k + 1] - alpha) / (pi[k + 1] - pi[k]);
    Ok(lambda * s.jumps[k] + (1.0 - lambda) * s.jumps[k + 1])
}

/// `‖d‖∞ · sqrt(log(2 n!/δ) / (2N))`: with probability at least `1 − δ` the
/// empirical depth is uniformly within this distance of the true depth.
pub fn deviation_bound(sample_size: usize, delta: f64, m: Metric, n: usize) -> Result<f64> {
    if sample_size == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("confidence level must lie in (0, 1), got {delta}")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    let log_term = std::f64::consts::LN_2 + ln_fact - delta.ln();
    Ok(max_distance(m, n) * (log_term / (2.0 * sample_size as f64)).sqrt())
}

/// Kendall depth of `σ` relative to a sample via its pairwise matrix.
pub fn depth_kendall_empirical(sample: &RankingSample, sigma: &Permutation) -> Result<f64> {
    depth_kendall_from_pairwise(&empirical_pairwise(sample)?, sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{mallows_pairwise, MallowsParams};

    fn perm(r: &[usize]) -> Permutation {
        Permutation::new(r.to_vec()).unwrap()
    }

    fn three(p01: f64, p02: f64, p12: f64) -> PairwiseMatrix {
        PairwiseMatrix::from_upper(3, |i, j| match (i, j) {
            (0, 1) => p01,
            (0, 2) => p02,
            _ => p12,
        })
        .unwrap()
    }

    #[test]
    fn dirac_depth_is_closeness() {
        let c = perm(&[2, 0, 1, 3]);
        let d = ExplicitDistribution::dirac(&c).unwrap();
        for m in Metric::ALL {
            for s in Permutation::all(4) {
                let want = max_distance(m, 4) - distance_unchecked(&c, &s, m);
                assert!((depth_exact(&d, &s, m).unwrap() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn uniform_depth_is_constant() {
        let u = ExplicitDistribution::uniform(3).unwrap();
        for s in Permutation::all(3) {
            assert!((depth_exact(&u, &s, Metric::KendallTau).unwrap() - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn mallows_exact_matches_pairwise_path() {
        let m = MallowsParams::new(perm(&[1, 3, 0, 2]), 0.5).unwrap();
        let d = ExplicitDistribution::from_mallows(&m).unwrap();
        let pw = mallows_pairwise(&m);
        for s in Permutation::all(4) {
            let a = depth_exact(&d, &s, Metric::KendallTau).unwrap();
            let b = depth_kendall_from_pairwise(&pw, &s).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn empirical_examples() {
        let c = perm(&[1, 0, 2]);
        let s = RankingSample::new(vec![c.clone(); 5]).unwrap();
        assert_eq!(depth_empirical(&s, &c, Metric::KendallTau).unwrap(), 3.0);
        let s = RankingSample::new(vec![Permutation::identity(2), Permutation::reversal(2)]).unwrap();
        for t in Permutation::all(2) {
            assert_eq!(depth_empirical(&s, &t, Metric::KendallTau).unwrap(), 0.5);
        }
        assert!(depth_empirical(&s, &Permutation::identity(3), Metric::KendallTau).is_err());
    }

    #[test]
    fn pairwise_depth_examples() {
        let flat = PairwiseMatrix::uniform(5);
        for s in Permutation::all(5) {
            assert!((depth_kendall_from_pairwise(&flat, &s).unwrap() - 5.0).abs() < 1e-12);
        }
        let c = perm(&[3, 1, 0, 2]);
        let dirac = PairwiseMatrix::dirac(&c);
        assert_eq!(depth_kendall_from_pairwise(&dirac, &c).unwrap(), 6.0);
        assert_eq!(depth_kendall_from_pairwise(&dirac, &c.reversed()).unwrap(), 0.0);
    }

    #[test]
    fn extremes_examples() {
        let e = depth_extremes(&PairwiseMatrix::uniform(4)).unwrap();
        assert_eq!((e.d_star, e.d_floor), (3.0, 3.0));
        let e = depth_extremes(&PairwiseMatrix::dirac(&perm(&[2, 1, 0, 3]))).unwrap();
        assert_eq!((e.d_star, e.d_floor), (6.0, 0.0));
        assert!(depth_extremes(&three(0.6, 0.4, 0.6)).is_err());
    }

    #[test]
    fn deepest_examples() {
        let m = three(0.6, 0.7, 0.55);
        let dp = deepest_and_least_deep(&m).unwrap();
        assert_eq!(dp.deepest, Permutation::identity(3));
        assert_eq!(dp.least_deep, Permutation::reversal(3));
        // Exhaustive check of the same claim.
        let best = Permutation::all(3)
            .max_by(|a, b| {
                depth_kendall_from_pairwise(&m, a)
                    .unwrap()
                    .total_cmp(&depth_kendall_from_pairwise(&m, b).unwrap())
            })
            .unwrap();
        assert_eq!(best, Permutation::identity(3));

        let c = perm(&[4, 0, 3, 1, 2]);
        assert_eq!(deepest_and_least_deep(&PairwiseMatrix::dirac(&c)).unwrap().deepest, c);
        let mm = MallowsParams::new(c.clone(), 0.8).unwrap();
        assert_eq!(deepest_and_least_deep(&mallows_pairwise(&mm)).unwrap().deepest, c);
        assert!(deepest_and_least_deep(&PairwiseMatrix::uniform(3)).is_err());
    }

    #[test]
    fn gap_examples() {
        let m = mallows_pairwise(&MallowsParams::new(perm(&[1, 0, 4, 2, 3]), 0.6).unwrap());
        let dp = deepest_and_least_deep(&m).unwrap();
        let ext = depth_extremes(&m).unwrap();
        assert!(depth_gap(&m, &dp.deepest).unwrap().abs() < 1e-15);
        let total: f64 = (0..5)
            .flat_map(|i| (i + 1..5).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * (m.get(i, j) - 0.5).abs())
            .sum();
        assert!((depth_gap(&m, &dp.least_deep).unwrap() - total).abs() < 1e-12);
        for s in Permutation::all(5) {
            let direct = ext.d_star - depth_kendall_from_pairwise(&m, &s).unwrap();
            assert!((depth_gap(&m, &s).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn regions_and_contours() {
        let m = MallowsParams::new(Permutation::identity(4), 0.5).unwrap();
        let d = ExplicitDistribution::from_mallows(&m).unwrap();
        let prof = DepthProfile::exhaustive(&d, Metric::KendallTau).unwrap();
        assert_eq!(prof.region(0.0).len(), 24);
        let star = depth_extremes(&mallows_pairwise(&m)).unwrap().d_star;
        assert_eq!(prof.contour(star), vec![&Permutation::identity(4)]);

        let mut vals = prof.values();
        vals.sort_by(f64::total_cmp);
        let u = vals[12];
        let brute: Vec<&Permutation> = prof.entries().iter().filter(|(_, v)| *v >= u - 1e-12).map(|(s, _)| s).collect();
        assert_eq!(prof.region(u), brute);
        for w in vals.windows(2) {
            let (big, small) = (prof.region(w[0]), prof.region(w[1]));
            assert!(small.iter().all(|s| big.contains(s)));
        }
    }

    #[test]
    fn survivor_examples() {
        let c = perm(&[0, 2, 1]);
        let s = survivor(&RankingSample::new(vec![c; 4]).unwrap(), Metric::KendallTau).unwrap();
        assert_eq!((s.jumps.clone(), s.masses.clone()), (vec![3.0], vec![1.0]));

        let id = Permutation::identity(2);
        let sw = Permutation::reversal(2);
        let sample = RankingSample::new(vec![id.clone(), id, sw.clone(), sw]).unwrap();
        let t = two_split_survivor(&sample, Metric::KendallTau).unwrap();
        assert_eq!((t.jumps.clone(), t.masses.clone()), (vec![0.0], vec![1.0]));
        assert_eq!(t.value(0.0), 1.0);
        assert_eq!(t.value(-1.0), 1.0);
        assert_eq!(t.value(0.1), 0.0);

        let u = survivor(&ExplicitDistribution::uniform(3).unwrap(), Metric::KendallTau).unwrap();
        assert_eq!(u.jumps.len(), 1);
        assert!((u.jumps[0] - 1.5).abs() < 1e-12);
        assert!((u.masses[0] - 1.0).abs() < 1e-12);

        let one = RankingSample::new(vec![Permutation::identity(3)]).unwrap();
        assert!(two_split_survivor(&one, Metric::KendallTau).is_err());
    }

    fn two_jump() -> SurvivorEstimate {
        SurvivorEstimate::from_weighted(vec![(1.0, 0.5), (3.0, 0.5)], SurvivorKind::Plain).unwrap()
    }

    #[test]
    fn smoothing_examples() {
        let single = SurvivorEstimate::from_weighted(vec![(2.5, 1.0)], SurvivorKind::Plain).unwrap();
        for h in [0.1, 1.0, 7.0] {
            let sm = smoothed_survivor(&single, SmoothingConfig::new(h).unwrap());
            assert!((sm.value(2.5) - 0.5).abs() < 1e-15);
        }
        let sm = smoothed_survivor(&two_jump(), SmoothingConfig::new(0.5).unwrap());
        assert!((sm.value(2.0) - 0.5).abs() < 1e-15);

        let tiny = smoothed_survivor(&two_jump(), SmoothingConfig::new(1e-6).unwrap());
        for u in [0.0, 0.5, 1.5, 2.0, 2.9, 3.5, 10.0] {
            assert!((tiny.value(u) - two_jump().value(u)).abs() < 1e-12, "u={u}");
        }
        assert!(SmoothingConfig::new(0.0).is_err());
    }

    #[test]
    fn smoothed_inverse_solves_level() {
        let sm = smoothed_survivor(&two_jump(), SmoothingConfig::new(0.5).unwrap());
        for alpha in [0.05, 0.3, 0.5, 0.9] {
            let u = sm.inverse(alpha).unwrap();
            assert!((sm.value(u) - (1.0 - alpha)).abs() < 1e-8);
        }
        assert!((sm.inverse(0.5).unwrap() - 2.0).abs() < 1e-9);
        assert!(sm.inverse(0.0).is_err());
        assert!(sm.inverse(1.0).is_err());
    }

    #[test]
    fn plain_inverse_steps() {
        let s = two_jump();
        assert_eq!(s.inverse(0.2).unwrap(), 1.0);
        assert_eq!(s.inverse(0.5).unwrap(), 1.0);
        assert_eq!(s.inverse(0.7).unwrap(), 3.0);
    }

    #[test]
    fn mid_quantile_examples() {
        for a in [0.0, 0.3, 1.0] {
            assert_eq!(mid_quantile(&[(4.0, 1.0)], a).unwrap(), 4.0);
        }
        let pts = [(1.0, 0.5), (3.0, 0.5)];
        assert!((mid_quantile(&pts, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(mid_quantile(&pts, 0.0).unwrap(), 1.0);
        assert_eq!(mid_quantile(&pts, 1.0).unwrap(), 3.0);
        assert_eq!(mid_quantile(&pts, 0.2).unwrap(), 1.0);
        assert!(mid_quantile(&pts, 1.5).is_err());
    }

    #[test]
    fn deviation_bound_examples() {
        let b = deviation_bound(100, 0.1, Metric::KendallTau, 3).unwrap();
        let want = 3.0 * (120f64.ln() / 200.0).sqrt();
        assert!((b - want).abs() < 1e-12);
        assert!((b - 0.4643).abs() < 1e-3);
        let b2 = deviation_bound(200, 0.1, Metric::KendallTau, 3).unwrap();
        assert!((b / b2 - 2f64.sqrt()).abs() < 1e-12);
        let mut last = 0.0;
        for n in 2..10 {
            let v = deviation_bound(100, 0.1, Metric::KendallTau, n).unwrap();
            assert!(v > last);
            last = v;
        }
        assert!(deviation_bound(0, 0.1, Metric::KendallTau, 3).is_err());
        assert!(deviation_bound(10, 1.0, Metric::KendallTau, 3).is_err());
    }

    #[test]
    fn default_bandwidth_is_positive() {
        let s = survivor(&RankingSample::new(vec![Permutation::identity(3); 3]).unwrap(), Metric::KendallTau).unwrap();
        assert_eq!(SmoothingConfig::default_for(&s).bandwidth, 1e-6);
    }
}
