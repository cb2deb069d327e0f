//! Consensus rankings: exhaustive Kemeny, the closed-form Kemeny median of
//! SST matrices, Borda and its depth-based variants, plus the breakdown
//! harness that pits Borda against an adversarial ranking.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{depths_of, sample_depths, deepest_and_least_deep};
use crate::error::{Error, Result};
use crate::models::{rng_from_seed, RankingModel, MAX_EXPLICIT_N};
use crate::pairwise::{empirical_pairwise, PairwiseMatrix};
use crate::perm::{kendall_tau, max_distance, Metric, Permutation};
use crate::sample::{RankingDistribution, RankingSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConsensusMethod {
    #[serde(rename = "kemeny-bf")]
    KemenyBruteforce,
    #[serde(rename = "kemeny-sst")]
    KemenySst,
    #[serde(rename = "borda")]
    Borda,
    #[serde(rename = "dt-borda")]
    DepthTrimmedBorda,
    #[serde(rename = "dw-borda")]
    DepthWeightedBorda,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusResult {
    /// Every minimizer found, in lexicographic order.
    pub medians: Vec<Permutation>,
    /// Risk of the medians under the chosen metric.
    pub risk: f64,
    pub metric: Metric,
    pub method: ConsensusMethod,
}

/// Exhaustive risk minimization over `S_n` (`n <= 8`); returns all minimizers
/// within 1e-12 of the minimum.
pub fn kemeny_bruteforce<D: RankingDistribution + Sync + ?Sized>(dist: &D, m: Metric) -> Result<ConsensusResult> {
    let n = dist.n_items();
    if n > MAX_EXPLICIT_N {
        return Err(Error::TooLarge { what: "exhaustive consensus search", n, max: MAX_EXPLICIT_N });
    }
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let d_max = max_distance(m, n);
    let risks: Vec<f64> = depths_of(dist, &perms, m)?.into_iter().map(|d| d_max - d).collect();
    let best = risks.iter().copied().fold(f64::INFINITY, f64::min);
    let medians = perms
        .into_iter()
        .zip(&risks)
        .filter(|(_, &r)| r <= best + 1e-12)
        .map(|(p, _)| p)
        .collect();
    Ok(ConsensusResult { medians, risk: best, metric: m, method: ConsensusMethod::KemenyBruteforce })
}

/// Kendall median of an SST matrix: `σ*(i) = #{j : p_ij < 1/2}`.
pub fn kemeny_sst(m: &PairwiseMatrix) -> Result<Permutation> {
    Ok(deepest_and_least_deep(m)?.deepest)
}

/// [`kemeny_sst`] applied to a sample, packaged with its empirical risk.
pub fn kemeny_sst_consensus(sample: &RankingSample) -> Result<ConsensusResult> {
    let pw = empirical_pairwise(sample)?;
    let median = kemeny_sst(&pw)?;
    let risk = kendall_risk(&pw, &median);
    Ok(ConsensusResult {
        medians: vec![median],
        risk,
        metric: Metric::KendallTau,
        method: ConsensusMethod::KemenySst,
    })
}

fn kendall_risk(pw: &PairwiseMatrix, sigma: &Permutation) -> f64 {
    let n = pw.n();
    let mut r = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            r += if sigma.rank(i) < sigma.rank(j) { pw.get(j, i) } else { pw.get(i, j) };
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum BordaWeights {
    #[default]
    Uniform,
    /// Keep rankings whose empirical depth exceeds `mu`.
    DepthTrimmed { mu: f64 },
    /// Weight `max(0, intercept + slope · depth)`.
    DepthWeighted { intercept: f64, slope: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BordaConfig {
    pub weights: BordaWeights,
    /// Metric of the depth used by the depth-based modes.
    pub metric: Metric,
}

impl BordaConfig {
    pub fn uniform() -> Self {
        BordaConfig::default()
    }

    pub fn trimmed(mu: f64) -> Self {
        BordaConfig { weights: BordaWeights::DepthTrimmed { mu }, metric: Metric::KendallTau }
    }

    fn method(&self) -> ConsensusMethod {
        match self.weights {
            BordaWeights::Uniform => ConsensusMethod::Borda,
            BordaWeights::DepthTrimmed { .. } => ConsensusMethod::DepthTrimmedBorda,
            BordaWeights::DepthWeighted { .. } => ConsensusMethod::DepthWeightedBorda,
        }
    }
}

/// Borda output together with its scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BordaOutcome {
    pub ranking: Permutation,
    /// Weighted mean rank of every item (zero-based ranks).
    pub scores: Vec<f64>,
    /// Whether two items received the same score.
    pub tie: bool,
}

pub fn borda_detailed(sample: &RankingSample, cfg: &BordaConfig) -> Result<BordaOutcome> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mode = match cfg.weights {
        BordaWeights::Uniform => vec![1.0; sample.len()],
        BordaWeights::DepthTrimmed { mu } => {
            if !mu.is_finite() {
                return Err(Error::Domain(format!("trimming level must be finite, got {mu}")));
            }
            sample_depths(sample, cfg.metric)?.into_iter().map(|d| if d > mu { 1.0 } else { 0.0 }).collect()
        }
        BordaWeights::DepthWeighted { intercept, slope } => {
            if !(intercept.is_finite() && slope.is_finite()) {
                return Err(Error::Domain("depth weight coefficients must be finite".into()));
            }
            sample_depths(sample, cfg.metric)?.into_iter().map(|d| (intercept + slope * d).max(0.0)).collect()
        }
    };
    let n = sample.n_items();
    let mut scores = vec![0.0; n];
    let mut total = 0.0;
    for (k, sigma) in sample.rankings().iter().enumerate() {
        let w = mode[k] * sample.weight(k);
        if w == 0.0 {
            continue;
        }
        total += w;
        for (s, &r) in scores.iter_mut().zip(sigma.ranks()) {
            *s += w * r as f64;
        }
    }
    if total == 0.0 {
        return Err(Error::Domain("every ranking was given zero weight".into()));
    }
    for s in &mut scores {
        *s /= total;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    let tie = order.windows(2).any(|w| scores[w[0]] == scores[w[1]]);
    let ranking = Permutation::from_ordering(&order).expect("sorted item indices");
    Ok(BordaOutcome { ranking, scores, tie })
}

/// Items sorted by ascending weighted mean rank, ties broken by item index.
pub fn borda(sample: &RankingSample, cfg: &BordaConfig) -> Result<Permutation> {
    Ok(borda_detailed(sample, cfg)?.ranking)
}

pub fn borda_consensus(sample: &RankingSample, cfg: &BordaConfig) -> Result<ConsensusResult> {
    let ranking = borda(sample, cfg)?;
    let risk = kendall_risk(&empirical_pairwise(sample)?, &ranking);
    Ok(ConsensusResult { medians: vec![ranking], risk, metric: Metric::KendallTau, method: cfg.method() })
}

/// `⌈N · [R̄]_(δ)⌉`: the δ-th smallest ratio `(r̄_N(j) − r̄_N(i)) / (a(i) − a(j))`
/// over pairs where numerator and denominator are both positive, times `N`.
/// `None` when fewer than `δ` pairs qualify.
pub fn borda_break_count_formula(sample: &RankingSample, adversary: &Permutation, delta: usize) -> Result<Option<usize>> {
    crate::error::check_same_size(sample.n_items(), adversary.len())?;
    if delta == 0 {
        return Err(Error::Domain("break distance must be at least 1".into()));
    }
    let scores = borda_detailed(sample, &BordaConfig::uniform())?.scores;
    let n = scores.len();
    let mut ratios = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let num = scores[j] - scores[i];
            let den = adversary.rank(i) as f64 - adversary.rank(j) as f64;
            if num > 0.0 && den > 0.0 {
                ratios.push(num / den);
            }
        }
    }
    if ratios.len() < delta {
        return Ok(None);
    }
    ratios.sort_by(f64::total_cmp);
    Ok(Some((sample.total_weight() * ratios[delta - 1] - 1e-9).ceil().max(0.0) as usize))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownConfig {
    pub model: RankingModel,
    /// Clean sample size `N`.
    pub sample_size: usize,
    /// Kendall distance the adversary must move the estimate.
    pub delta: usize,
    /// Depth threshold of the trimmed Borda estimator.
    pub mu: f64,
    pub seeds: Vec<u64>,
    /// Largest number of adversarial copies tried; defaults to `64 N`.
    pub max_copies: Option<usize>,
}

/// Smallest breaking adversarial count for one estimator on one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakSearch {
    /// `None` when no count up to the cap breaks the estimator.
    pub copies: Option<usize>,
    pub fraction: Option<f64>,
    /// Some Borda score tie occurred at `copies − 1` or `copies`.
    pub tie_at_threshold: bool,
    /// `copies − 1` also broke the estimator, contradicting monotonicity.
    pub non_monotone: bool,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedBreakdown {
    pub seed: u64,
    pub plain: BreakSearch,
    pub trimmed: BreakSearch,
    /// Count predicted by [`borda_break_count_formula`] for plain Borda.
    pub formula_copies: Option<usize>,
    pub mean_depth: f64,
    pub adversary_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub delta: usize,
    pub mu: f64,
    pub sample_size: usize,
    pub estimators: [ConsensusMethod; 2],
    pub seeds: Vec<SeedBreakdown>,
    /// Mean breaking fraction over seeds where a break was found.
    pub mean_fraction_plain: f64,
    pub mean_fraction_trimmed: f64,
    /// `mean_fraction_plain / mean_fraction_trimmed`.
    pub ratio: f64,
    pub cap_failures_plain: usize,
    pub cap_failures_trimmed: usize,
    /// Seeds where the trimmed fraction exceeds the plain fraction.
    pub trimmed_wins: usize,
}

impl BreakdownReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "seed,copies_plain,fraction_plain,tie_plain,copies_trimmed,fraction_trimmed,tie_trimmed,formula_copies,mean_depth,adversary_depth\n",
        );
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let optf = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for s in &self.seeds {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                s.seed,
                opt(s.plain.copies),
                optf(s.plain.fraction),
                s.plain.tie_at_threshold,
                opt(s.trimmed.copies),
                optf(s.trimmed.fraction),
                s.trimmed.tie_at_threshold,
                opt(s.formula_copies),
                s.mean_depth,
                s.adversary_depth
            ));
        }
        out
    }
}

/// Exponential then binary search for the smallest `k` with `broken(k)`.
fn search_break(
    cap: usize,
    sample_size: usize,
    mut eval: impl FnMut(usize) -> Result<(bool, bool)>,
) -> Result<BreakSearch> {
    let mut evaluations = 0;
    let mut call = |k: usize, evaluations: &mut usize| {
        *evaluations += 1;
        eval(k)
    };
    let mut lo = 0; // known not to break (no adversary)
    let mut hi = 1;
    loop {
        if hi > cap {
            hi = cap;
            if hi <= lo || !call(hi, &mut evaluations)?.0 {
                return Ok(BreakSearch { copies: None, fraction: None, tie_at_threshold: false, non_monotone: false, evaluations });
            }
            break;
        }
        if call(hi, &mut evaluations)?.0 {
            break;
        }
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if call(mid, &mut evaluations)?.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (at, tie_at) = call(hi, &mut evaluations)?;
    let (below, tie_below) = call(hi - 1, &mut evaluations)?;
    debug_assert!(at);
    Ok(BreakSearch {
        copies: Some(hi),
        fraction: Some(hi as f64 / (hi + sample_size) as f64),
        tie_at_threshold: tie_at || tie_below,
        non_monotone: below,
        evaluations,
    })
}

fn break_one_seed(cfg: &BreakdownConfig, seed: u64) -> Result<SeedBreakdown> {
    let mut rng = rng_from_seed(seed);
    let clean = cfg.model.sample_with(cfg.sample_size, &mut rng)?;
    let plain_cfg = BordaConfig::uniform();
    let trim_cfg = BordaConfig::trimmed(cfg.mu);
    let plain_clean = borda(&clean, &plain_cfg)?;
    let adversary = plain_clean.reversed();
    let cap = cfg.max_copies.unwrap_or(64 * cfg.sample_size).max(1);

    let run = |est: &BordaConfig| -> Result<BreakSearch> {
        let reference = borda(&clean, est)?;
        search_break(cap, cfg.sample_size, |k| {
            let pooled = if k == 0 { clean.clone() } else { clean.with_extra(&adversary, k as f64)? };
            match borda_detailed(&pooled, est) {
                Ok(out) => Ok((kendall_tau(&reference, &out.ranking) >= cfg.delta, out.tie)),
                Err(Error::Domain(_)) => Ok((false, false)),
                Err(e) => Err(e),
            }
        })
    };
    let plain = run(&plain_cfg)?;
    let trimmed = run(&trim_cfg)?;
    let depths = sample_depths(&clean, Metric::KendallTau)?;
    let mean_depth = depths.iter().sum::<f64>() / depths.len() as f64;
    let adversary_depth = depths_of(&clean, std::slice::from_ref(&adversary), Metric::KendallTau)?[0];
    Ok(SeedBreakdown {
        seed,
        plain,
        trimmed,
        formula_copies: borda_break_count_formula(&clean, &adversary, cfg.delta)?,
        mean_depth,
        adversary_depth,
    })
}

/// Per seed: draw a clean sample, take the reversal of its Borda ranking as
/// adversary and search the smallest number of adversarial copies moving
/// plain and depth-trimmed Borda by at least `delta`.
pub fn breakdown_experiment(cfg: &BreakdownConfig) -> Result<BreakdownReport> {
    if cfg.delta == 0 {
        return Err(Error::Domain("break distance must be at least 1".into()));
    }
    let n = cfg.model.n();
    let pairs = n * n.saturating_sub(1) / 2;
    if cfg.delta > pairs {
        return Err(Error::Domain(format!("break distance {} exceeds the {pairs} item pairs", cfg.delta)));
    }
    if cfg.sample_size == 0 {
        return Err(Error::EmptySample);
    }
    if cfg.seeds.is_empty() {
        return Err(Error::Domain("at least one seed is required".into()));
    }
    cfg.model.pairwise().require_sst()?;
    let seeds: Vec<SeedBreakdown> = cfg.seeds.par_iter().map(|&s| break_one_seed(cfg, s)).collect::<Result<_>>()?;

    let mean = |f: &dyn Fn(&SeedBreakdown) -> Option<f64>| {
        let v: Vec<f64> = seeds.iter().filter_map(f).collect();
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let mean_fraction_plain = mean(&|s| s.plain.fraction);
    let mean_fraction_trimmed = mean(&|s| s.trimmed.fraction);
    let trimmed_wins = seeds
        .iter()
        .filter(|s| match (s.plain.fraction, s.trimmed.fraction) {
            (Some(p), Some(t)) => t > p,
            (Some(_), None) => true,
            _ => false,
        })
        .count();
    Ok(BreakdownReport {
        delta: cfg.delta,
        mu: cfg.mu,
        sample_size: cfg.sample_size,
        estimators: [ConsensusMethod::Borda, ConsensusMethod::DepthTrimmedBorda],
        cap_failures_plain: seeds.iter().filter(|s| s.plain.copies.is_none()).count(),
        cap_failures_trimmed: seeds.iter().filter(|s| s.trimmed.copies.is_none()).count(),
        ratio: mean_fraction_plain / mean_fraction_trimmed,
        mean_fraction_plain,
        mean_fraction_trimmed,
        trimmed_wins,
        seeds,
    })
}
