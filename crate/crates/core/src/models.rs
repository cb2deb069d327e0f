//! Mallows (Kendall) and Plackett–Luce ranking models, plus dense
//! distributions over all of `S_n` for small `n`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_same_size, Error, Result};
use crate::pairwise::PairwiseMatrix;
use crate::perm::{kendall_tau, Permutation};
use crate::sample::{RankingDistribution, RankingSample};

/// Largest `n` for which dense distributions over `S_n` are materialized.
pub const MAX_EXPLICIT_N: usize = 8;

/// Deterministic generator for a seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent generator stream `stream` derived from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MallowsParams {
    center: Permutation,
    phi: f64,
}

impl MallowsParams {
    pub fn new(center: Permutation, phi: f64) -> Result<Self> {
        if !(phi > 0.0 && phi <= 1.0) {
            return Err(Error::Domain(format!("Mallows dispersion must lie in (0, 1], got {phi}")));
        }
        Ok(MallowsParams { center, phi })
    }

    pub fn center(&self) -> &Permutation {
        &self.center
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn n(&self) -> usize {
        self.center.len()
    }
}

/// `Z(φ) = Π_{i=1}^{n-1} Σ_{j=0}^{i} φ^j`, equal to `n!` at `φ = 1`.
pub fn mallows_normalizer(n: usize, phi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::Domain(format!("Mallows dispersion must lie in (0, 1], got {phi}")));
    }
    Ok((1..n)
        .map(|i| (0..=i).map(|j| phi.powi(j as i32)).sum::<f64>())
        .product())
}

pub fn mallows_pmf(params: &MallowsParams, sigma: &Permutation) -> Result<f64> {
    check_same_size(params.n(), sigma.len())?;
    let d = kendall_tau(&params.center, sigma);
    Ok(params.phi.powi(d as i32) / mallows_normalizer(params.n(), params.phi)?)
}

/// `h(k, φ) = k / (1 - φ^k)`.
fn h(k: usize, phi: f64) -> f64 {
    let kf = k as f64;
    kf / -(kf * phi.ln()).exp_m1()
}

/// Probability that an item `k` places ahead in the center stays ahead:
/// `H(k, φ) = h(k+1, φ) - h(k, φ)` for `k >= 1`, `H(-k) = 1 - H(k)`.
pub fn mallows_pair_probability(center_gap: isize, phi: f64) -> f64 {
    if center_gap == 0 {
        return 0.5;
    }
    if phi >= 1.0 {
        return 0.5;
    }
    let k = center_gap.unsigned_abs();
    let ahead = h(k + 1, phi) - h(k, phi);
    if center_gap > 0 {
        ahead
    } else {
        1.0 - ahead
    }
}

/// Closed-form pairwise matrix: `p_ij = H(σ0(j) - σ0(i), φ)`.
pub fn mallows_pairwise(params: &MallowsParams) -> PairwiseMatrix {
    let c = &params.center;
    PairwiseMatrix::from_upper(params.n(), |i, j| {
        let gap = c.rank(j) as isize - c.rank(i) as isize;
        mallows_pair_probability(gap, params.phi).clamp(0.0, 1.0)
    })
    .expect("probabilities clamped to [0, 1]")
}

pub fn sample_mallows(params: &MallowsParams, count: usize, seed: u64) -> Result<RankingSample> {
    sample_mallows_with(params, count, &mut rng_from_seed(seed))
}

/// Exact inverse-CDF draws over the dense pmf for `n <= 8`; repeated insertion beyond.
pub fn sample_mallows_with<R: Rng + ?Sized>(
    params: &MallowsParams,
    count: usize,
    rng: &mut R,
) -> Result<RankingSample> {
    if count == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let rankings = if params.n() <= MAX_EXPLICIT_N {
        let table = CdfTable::new(&ExplicitDistribution::from_mallows(params)?);
        (0..count).map(|_| table.draw(rng)).collect()
    } else {
        (0..count).map(|_| repeated_insertion(params, rng)).collect()
    };
    RankingSample::new(rankings)
}

/// One Mallows draw by inserting center positions one at a time; inserting
/// `v` places before the end creates `v` inversions, with weight `φ^v`.
fn repeated_insertion<R: Rng + ?Sized>(params: &MallowsParams, rng: &mut R) -> Permutation {
    let n = params.n();
    let phi = params.phi;
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for t in 0..n {
        weights.clear();
        weights.extend((0..=t).map(|v| phi.powi(v as i32)));
        let v = draw_index(&weights, rng);
        order.insert(t - v, t);
    }
    let center_order = params.center.ordering();
    let items: Vec<usize> = order.into_iter().map(|pos| center_order[pos]).collect();
    Permutation::from_ordering(&items).expect("insertion yields an ordering")
}

fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlackettLuceParams {
    weights: Vec<f64>,
}

impl PlackettLuceParams {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("Plackett-Luce needs at least one item".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!("Plackett-Luce weights must be positive, got {w}")));
        }
        Ok(PlackettLuceParams { weights })
    }

    /// `v_i = exp(scale * (n - 1 - i))`: item 0 strongest.
    pub fn geometric(n: usize, scale: f64) -> Result<Self> {
        PlackettLuceParams::new((0..n).map(|i| (scale * (n - 1 - i) as f64).exp()).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }
}

/// Stagewise probability: each stage picks an item proportionally to its weight among those left.
pub fn plackett_luce_pmf(params: &PlackettLuceParams, sigma: &Permutation) -> Result<f64> {
    check_same_size(params.n(), sigma.len())?;
    let order = sigma.ordering();
    let mut remaining: f64 = params.weights.iter().sum();
    let mut prob = 1.0;
    for &item in &order {
        let w = params.weights[item];
        prob *= w / remaining;
        remaining -= w;
    }
    Ok(prob)
}

/// `p_ij = v_i / (v_i + v_j)`.
pub fn plackett_luce_pairwise(params: &PlackettLuceParams) -> PairwiseMatrix {
    let v = &params.weights;
    PairwiseMatrix::from_upper(params.n(), |i, j| v[i] / (v[i] + v[j])).expect("ratios in [0, 1]")
}

pub fn sample_plackett_luce(params: &PlackettLuceParams, count: usize, seed: u64) -> Result<RankingSample> {
    sample_plackett_luce_with(params, count, &mut rng_from_seed(seed))
}

pub fn sample_plackett_luce_with<R: Rng + ?Sized>(
    params: &PlackettLuceParams,
    count: usize,
    rng: &mut R,
) -> Result<RankingSample> {
    if count == 0 {
        return Err(Error::Domain("sample size must be at least 1".into()));
    }
    let n = params.n();
    let rankings = (0..count)
        .map(|_| {
            let mut left: Vec<usize> = (0..n).collect();
            let mut order = Vec::with_capacity(n);
            while !left.is_empty() {
                let w: Vec<f64> = left.iter().map(|&i| params.weights[i]).collect();
                order.push(left.remove(draw_index(&w, rng)));
            }
            Permutation::from_ordering(&order).expect("stagewise order")
        })
        .collect();
    RankingSample::new(rankings)
}

/// A ranking model that can be sampled and has a closed-form pairwise matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum RankingModel {
    Mallows(MallowsParams),
    PlackettLuce(PlackettLuceParams),
}

impl RankingModel {
    pub fn n(&self) -> usize {
        match self {
            RankingModel::Mallows(m) => m.n(),
            RankingModel::PlackettLuce(p) => p.n(),
        }
    }

    pub fn pairwise(&self) -> PairwiseMatrix {
        match self {
            RankingModel::Mallows(m) => mallows_pairwise(m),
            RankingModel::PlackettLuce(p) => plackett_luce_pairwise(p),
        }
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<RankingSample> {
        match self {
            RankingModel::Mallows(m) => sample_mallows_with(m, count, rng),
            RankingModel::PlackettLuce(p) => sample_plackett_luce_with(p, count, rng),
        }
    }

    pub fn pmf(&self, sigma: &Permutation) -> Result<f64> {
        match self {
            RankingModel::Mallows(m) => mallows_pmf(m, sigma),
            RankingModel::PlackettLuce(p) => plackett_luce_pmf(p, sigma),
        }
    }
}

/// Dense probability table over rankings, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplicitDistribution {
    n: usize,
    entries: Vec<(Permutation, f64)>,
}

impl ExplicitDistribution {
    /// Zero-probability entries are dropped; duplicates are merged.
    pub fn from_entries(n: usize, entries: Vec<(Permutation, f64)>) -> Result<Self> {
        if n > MAX_EXPLICIT_N {
            return Err(Error::TooLarge { what: "explicit distribution", n, max: MAX_EXPLICIT_N });
        }
        let mut merged: Vec<(Permutation, f64)> = Vec::with_capacity(entries.len());
        let mut sorted = entries;
        for (s, p) in &sorted {
            check_same_size(n, s.len())?;
            if !(*p >= 0.0 && p.is_finite()) {
                return Err(Error::Domain(format!("negative probability {p} for {s}")));
            }
        }
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        for (s, p) in sorted {
            match merged.last_mut() {
                Some((last, q)) if *last == s => *q += p,
                _ => merged.push((s, p)),
            }
        }
        merged.retain(|(_, p)| *p > 0.0);
        let total: f64 = merged.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 * (merged.len().max(1) as f64).sqrt().max(1.0) {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        if merged.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(ExplicitDistribution { n, entries: merged })
    }

    fn from_weights(n: usize, mut weight: impl FnMut(&Permutation) -> f64) -> Result<Self> {
        if n > MAX_EXPLICIT_N {
            return Err(Error::TooLarge { what: "explicit distribution", n, max: MAX_EXPLICIT_N });
        }
        let raw: Vec<(Permutation, f64)> = Permutation::all(n).map(|s| {
            let w = weight(&s);
            (s, w)
        }).collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        ExplicitDistribution::from_entries(n, raw.into_iter().map(|(s, w)| (s, w / total)).collect())
    }

    pub fn from_mallows(params: &MallowsParams) -> Result<Self> {
        let c = params.center.clone();
        let phi = params.phi;
        ExplicitDistribution::from_weights(params.n(), |s| phi.powi(kendall_tau(&c, s) as i32))
    }

    pub fn from_plackett_luce(params: &PlackettLuceParams) -> Result<Self> {
        ExplicitDistribution::from_weights(params.n(), |s| {
            plackett_luce_pmf(params, s).expect("sizes match")
        })
    }

    pub fn from_model(model: &RankingModel) -> Result<Self> {
        match model {
            RankingModel::Mallows(m) => ExplicitDistribution::from_mallows(m),
            RankingModel::PlackettLuce(p) => ExplicitDistribution::from_plackett_luce(p),
        }
    }

    pub fn from_sample(sample: &RankingSample) -> Result<Self> {
        let n = sample.n_items();
        let entries = sample.atoms().map(|(s, p)| (s.clone(), p)).collect();
        ExplicitDistribution::from_entries(n, entries)
    }

    pub fn dirac(sigma: &Permutation) -> Result<Self> {
        ExplicitDistribution::from_entries(sigma.len(), vec![(sigma.clone(), 1.0)])
    }

    pub fn uniform(n: usize) -> Result<Self> {
        ExplicitDistribution::from_weights(n, |_| 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(Permutation, f64)] {
        &self.entries
    }

    pub fn prob(&self, sigma: &Permutation) -> f64 {
        self.entries
            .binary_search_by(|(s, _)| s.cmp(sigma))
            .map_or(0.0, |i| self.entries[i].1)
    }

    /// The relabelled distribution `(πP)(σ) = P(σπ⁻¹)`: each support point `ν` moves to `νπ`.
    pub fn right_translate(&self, pi: &Permutation) -> Result<Self> {
        check_same_size(self.n, pi.len())?;
        let entries = self
            .entries
            .iter()
            .map(|(s, p)| Ok((s.compose(pi)?, *p)))
            .collect::<Result<Vec<_>>>()?;
        ExplicitDistribution::from_entries(self.n, entries)
    }

    pub fn pairwise(&self) -> PairwiseMatrix {
        PairwiseMatrix::from_distribution(self)
    }
}

impl RankingDistribution for ExplicitDistribution {
    fn n_items(&self) -> usize {
        self.n
    }

    fn atoms(&self) -> impl Iterator<Item = (&Permutation, f64)> {
        self.entries.iter().map(|(s, p)| (s, *p))
    }
}

struct CdfTable {
    perms: Vec<Permutation>,
    cumulative: Vec<f64>,
}

impl CdfTable {
    fn new(dist: &ExplicitDistribution) -> Self {
        let mut acc = 0.0;
        let mut perms = Vec::with_capacity(dist.entries.len());
        let mut cumulative = Vec::with_capacity(dist.entries.len());
        for (s, p) in &dist.entries {
            acc += p;
            perms.push(s.clone());
            cumulative.push(acc);
        }
        CdfTable { perms, cumulative }
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        let total = *self.cumulative.last().expect("non-empty table");
        let u = rng.gen::<f64>() * total;
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.perms.len() - 1);
        self.perms[idx].clone()
    }
}
