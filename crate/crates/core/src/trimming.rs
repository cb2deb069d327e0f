//! Depth trimming: repeatedly drop the least deep rankings of a sample until
//! its pairwise matrix is (strictly) stochastically transitive.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::depth::{sample_depths, DEPTH_TOL};
use crate::error::{Error, Result};
use crate::pairwise::{empirical_pairwise, TransitivityStatus};
use crate::perm::{distance_unchecked, Metric, Permutation};
use crate::sample::{RankingDistribution, RankingSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TrimTarget {
    #[serde(rename = "ST")]
    St,
    #[default]
    #[serde(rename = "SST")]
    Sst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepthMode {
    /// Depths relative to the original sample, computed once.
    FixedInitial,
    /// Depths relative to the current sample, recomputed every iteration.
    #[default]
    RecomputeEachIteration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimConfig {
    pub target: TrimTarget,
    pub depth_mode: DepthMode,
    pub metric: Metric,
    /// Pairwise probabilities within this distance of 1/2 count as ties.
    pub sst_tolerance: f64,
    pub reference_center: Option<Permutation>,
}

impl Default for TrimConfig {
    fn default() -> Self {
        TrimConfig {
            target: TrimTarget::Sst,
            depth_mode: DepthMode::RecomputeEachIteration,
            metric: Metric::KendallTau,
            sst_tolerance: 0.0,
            reference_center: None,
        }
    }
}

impl TrimConfig {
    fn satisfied(&self, status: TransitivityStatus) -> bool {
        match self.target {
            TrimTarget::St => status.is_transitive(),
            TrimTarget::Sst => status == TransitivityStatus::Sst,
        }
    }
}

/// State of the sample after one iteration (iteration 0 is the input).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimRecord {
    pub iteration: usize,
    /// Indices into the original sample removed at this iteration.
    pub removed: Vec<usize>,
    pub removed_rankings: Vec<Permutation>,
    pub remaining: usize,
    pub cycles: usize,
    pub status: TransitivityStatus,
    /// Deepest remaining ranking (smallest in lexicographic order among ties).
    pub candidate: Permutation,
    pub candidate_distance: Option<f64>,
    pub median_depth: f64,
    /// Mean distance of the remaining rankings to the candidate.
    pub dispersion: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrimTrace {
    pub records: Vec<TrimRecord>,
}

impl TrimTrace {
    /// Number of removal iterations (the initial record excluded).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> &TrimRecord {
        self.records.last().expect("trace always holds the initial state")
    }

    /// One row per record; indices zero-based, rankings as one-based ranks.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "iteration,removed_count,removed_indices,remaining,cycles,status,candidate,candidate_distance,median_depth,dispersion\n",
        );
        for r in &self.records {
            let idx: Vec<String> = r.removed.iter().map(|i| i.to_string()).collect();
            let dist = r.candidate_distance.map(|d| d.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.iteration,
                r.removed.len(),
                idx.join(" "),
                r.remaining,
                r.cycles,
                r.status,
                r.candidate,
                dist,
                r.median_depth,
                r.dispersion
            )
            .unwrap();
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrimResult {
    pub trimmed: RankingSample,
    /// Indices into the input sample that survived.
    pub kept: Vec<usize>,
    pub trace: TrimTrace,
    /// Set when every remaining ranking tied for the minimum depth before the
    /// target was reached; the tied set is kept rather than emptying the sample.
    pub stalled: bool,
}

fn snapshot(
    current: &RankingSample,
    depths: &[f64],
    cfg: &TrimConfig,
    iteration: usize,
    removed: Vec<usize>,
    removed_rankings: Vec<Permutation>,
) -> Result<TrimRecord> {
    let pw = empirical_pairwise(current)?;
    let best = depths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let candidate = current
        .rankings()
        .iter()
        .zip(depths)
        .filter(|(_, &d)| d >= best - DEPTH_TOL)
        .map(|(s, _)| s)
        .min()
        .expect("non-empty sample")
        .clone();
    let total = current.total_weight();
    let dispersion = current
        .rankings()
        .iter()
        .enumerate()
        .map(|(i, s)| current.weight(i) * distance_unchecked(s, &candidate, cfg.metric))
        .sum::<f64>()
        / total;
    let candidate_distance = cfg
        .reference_center
        .as_ref()
        .map(|c| distance_unchecked(&candidate, c, cfg.metric));
    Ok(TrimRecord {
        iteration,
        removed,
        removed_rankings,
        remaining: current.len(),
        cycles: pw.count_cycles_eps(cfg.sst_tolerance),
        status: pw.transitivity_status_eps(cfg.sst_tolerance),
        candidate,
        candidate_distance,
        median_depth: best,
        dispersion,
    })
}

/// Removes the whole set of least deep rankings per iteration until the
/// empirical pairwise matrix reaches the target transitivity status.
pub fn trim_to_sst(sample: &RankingSample, cfg: &TrimConfig) -> Result<TrimResult> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(cfg.sst_tolerance >= 0.0 && cfg.sst_tolerance.is_finite()) {
        return Err(Error::Domain(format!("tolerance must be non-negative, got {}", cfg.sst_tolerance)));
    }
    if let Some(c) = &cfg.reference_center {
        crate::error::check_same_size(sample.n_items(), c.len())?;
    }
    let initial = sample_depths(sample, cfg.metric)?;
    let mut kept: Vec<usize> = (0..sample.len()).collect();
    let mut current = sample.clone();
    let mut depths = initial.clone();
    let mut trace = TrimTrace::default();
    let mut stalled = false;
    trace.records.push(snapshot(&current, &depths, cfg, 0, Vec::new(), Vec::new())?);

    while !cfg.satisfied(trace.last().status) {
        let scores: Vec<f64> = match cfg.depth_mode {
            DepthMode::RecomputeEachIteration => depths.clone(),
            DepthMode::FixedInitial => kept.iter().map(|&i| initial[i]).collect(),
        };
        let low = scores.iter().copied().fold(f64::INFINITY, f64::min);
        let drop: Vec<bool> = scores.iter().map(|&d| d <= low + DEPTH_TOL).collect();
        if drop.iter().all(|&x| x) {
            stalled = true;
            break;
        }
        let removed: Vec<usize> = kept.iter().zip(&drop).filter(|(_, &x)| x).map(|(&i, _)| i).collect();
        let removed_rankings = removed.iter().map(|&i| sample.rankings()[i].clone()).collect();
        let local: Vec<usize> = (0..kept.len()).filter(|&j| !drop[j]).collect();
        kept = local.iter().map(|&j| kept[j]).collect();
        current = sample.select(&kept)?;
        depths = sample_depths(&current, cfg.metric)?;
        let it = trace.records.len();
        trace.records.push(snapshot(&current, &depths, cfg, it, removed, removed_rankings)?);
    }
    Ok(TrimResult { trimmed: current, kept, trace, stalled })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(o: &[usize]) -> Permutation {
        Permutation::from_ordering(o).unwrap()
    }

    #[test]
    fn already_sst_is_untouched() {
        let s = RankingSample::new(vec![ord(&[0, 1, 2]), ord(&[0, 1, 2]), ord(&[1, 0, 2])]).unwrap();
        let r = trim_to_sst(&s, &TrimConfig::default()).unwrap();
        assert_eq!(r.trimmed, s);
        assert_eq!(r.trace.iterations(), 0);
        assert!(!r.stalled);
    }

    /// Majority 3-cycle whose least deep ranking (two copies of one ordering)
    /// is the only thing standing between the sample and SST.
    fn cyclic_fixture() -> RankingSample {
        let counts: [(&[usize], usize); 4] = [(&[0, 2, 1], 1), (&[1, 0, 2], 3), (&[2, 0, 1], 2), (&[2, 1, 0], 1)];
        let v = counts.iter().flat_map(|(o, c)| std::iter::repeat_n(ord(o), *c)).collect();
        RankingSample::new(v).unwrap()
    }

    #[test]
    fn removes_unique_least_deep_carrier_of_a_cycle() {
        let s = cyclic_fixture();
        let pw = empirical_pairwise(&s).unwrap();
        assert_eq!(pw.count_cycles(), 1);
        let depths = sample_depths(&s, Metric::KendallTau).unwrap();
        let low = depths.iter().copied().fold(f64::INFINITY, f64::min);
        let lows: Vec<usize> = (0..depths.len()).filter(|&i| depths[i] <= low + 1e-12).collect();
        assert!(lows.iter().all(|&i| s.rankings()[i] == ord(&[2, 0, 1])));

        let r = trim_to_sst(&s, &TrimConfig::default()).unwrap();
        assert_eq!(r.trace.iterations(), 1);
        assert_eq!(r.trace.records[1].removed, lows);
        assert_eq!(
            empirical_pairwise(&r.trimmed).unwrap().transitivity_status(),
            TransitivityStatus::Sst
        );
        assert_eq!(r.trace.last().cycles, 0);
    }

    #[test]
    fn idempotent() {
        let s = cyclic_fixture();
        let r = trim_to_sst(&s, &TrimConfig::default()).unwrap();
        let again = trim_to_sst(&r.trimmed, &TrimConfig::default()).unwrap();
        assert_eq!(again.trimmed, r.trimmed);
        assert_eq!(again.trace.iterations(), 0);
    }

    #[test]
    fn symmetric_cycle_stalls_instead_of_emptying() {
        let s = RankingSample::new(vec![ord(&[0, 1, 2]), ord(&[1, 2, 0]), ord(&[2, 0, 1])]).unwrap();
        let r = trim_to_sst(&s, &TrimConfig::default()).unwrap();
        assert!(r.stalled);
        assert_eq!(r.trimmed.len(), 3);
    }

    #[test]
    fn fixed_mode_uses_initial_depths() {
        let s = cyclic_fixture();
        let cfg = TrimConfig { depth_mode: DepthMode::FixedInitial, ..TrimConfig::default() };
        let r = trim_to_sst(&s, &cfg).unwrap();
        assert_eq!(
            empirical_pairwise(&r.trimmed).unwrap().transitivity_status(),
            TransitivityStatus::Sst
        );
    }

    #[test]
    fn trace_csv_has_one_row_per_record() {
        let cfg = TrimConfig { reference_center: Some(Permutation::identity(3)), ..TrimConfig::default() };
        let r = trim_to_sst(&cyclic_fixture(), &cfg).unwrap();
        let csv = r.trace.to_csv();
        assert_eq!(csv.lines().count(), r.trace.records.len() + 1);
        assert!(csv.lines().next().unwrap().starts_with("iteration,"));
        assert!(r.trace.records.iter().all(|x| x.candidate_distance.is_some()));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = TrimConfig { sst_tolerance: -1.0, ..TrimConfig::default() };
        assert!(trim_to_sst(&cyclic_fixture(), &cfg).is_err());
        let cfg = TrimConfig { reference_center: Some(Permutation::identity(4)), ..TrimConfig::default() };
        assert!(trim_to_sst(&cyclic_fixture(), &cfg).is_err());
    }
}
