use serde::{Deserialize, Serialize};

use crate::error::{check_same_size, Error, Result};
use crate::perm::Permutation;

/// Anything that can be read as a finite probability distribution over rankings.
pub trait RankingDistribution {
    fn n_items(&self) -> usize;

    /// Support points with probabilities summing to one.
    fn atoms(&self) -> impl Iterator<Item = (&Permutation, f64)>;
}

/// A multiset of rankings on the same items: the empirical distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSample {
    n: usize,
    rankings: Vec<Permutation>,
    weights: Option<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl RankingSample {
    pub fn new(rankings: Vec<Permutation>) -> Result<Self> {
        let first = rankings.first().ok_or(Error::EmptySample)?;
        let n = first.len();
        for r in &rankings {
            check_same_size(n, r.len())?;
        }
        Ok(RankingSample { n, rankings, weights: None, labels: None })
    }

    pub fn weighted(rankings: Vec<Permutation>, weights: Vec<f64>) -> Result<Self> {
        check_same_size(rankings.len(), weights.len())?;
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Domain(format!("sample weight must be positive, got {w}")));
        }
        let mut s = RankingSample::new(rankings)?;
        s.weights = Some(weights);
        Ok(s)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        check_same_size(self.n, labels.len())?;
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn rankings(&self) -> &[Permutation] {
        &self.rankings
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn total_weight(&self) -> f64 {
        match &self.weights {
            Some(w) => w.iter().sum(),
            None => self.rankings.len() as f64,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Permutation> {
        self.rankings.iter()
    }

    /// Sub-sample keeping the given indices (in the given order).
    pub fn select(&self, indices: &[usize]) -> Result<RankingSample> {
        let rankings = indices.iter().map(|&i| self.rankings[i].clone()).collect();
        let mut out = RankingSample::new(rankings)?;
        out.weights = self.weights.as_ref().map(|w| indices.iter().map(|&i| w[i]).collect());
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Pools two samples; weights default to one where absent.
    pub fn concat(&self, other: &RankingSample) -> Result<RankingSample> {
        check_same_size(self.n, other.n)?;
        let mut rankings = self.rankings.clone();
        rankings.extend(other.rankings.iter().cloned());
        let weights = if self.weights.is_none() && other.weights.is_none() {
            None
        } else {
            Some(
                (0..self.len())
                    .map(|i| self.weight(i))
                    .chain((0..other.len()).map(|i| other.weight(i)))
                    .collect(),
            )
        };
        Ok(RankingSample { n: self.n, rankings, weights, labels: self.labels.clone() })
    }

    /// This sample plus one extra ranking carrying weight `weight`.
    pub fn with_extra(&self, ranking: &Permutation, weight: f64) -> Result<RankingSample> {
        let extra = RankingSample::weighted(vec![ranking.clone()], vec![weight])?;
        self.concat(&extra)
    }
}

impl RankingDistribution for RankingSample {
    fn n_items(&self) -> usize {
        self.n
    }

    fn atoms(&self) -> impl Iterator<Item = (&Permutation, f64)> {
        let total = self.total_weight();
        self.rankings.iter().enumerate().map(move |(i, r)| (r, self.weight(i) / total))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert_eq!(RankingSample::new(vec![]), Err(Error::EmptySample));
        let mixed = vec![Permutation::identity(2), Permutation::identity(3)];
        assert!(matches!(RankingSample::new(mixed), Err(Error::SizeMismatch { .. })));
        let id = vec![Permutation::identity(2)];
        assert!(RankingSample::weighted(id.clone(), vec![0.0]).is_err());
        assert!(RankingSample::weighted(id, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn atoms_are_normalized() {
        let s = RankingSample::weighted(
            vec![Permutation::identity(3), Permutation::reversal(3)],
            vec![1.0, 3.0],
        )
        .unwrap();
        let probs: Vec<f64> = s.atoms().map(|(_, p)| p).collect();
        assert_eq!(probs, vec![0.25, 0.75]);
    }

    #[test]
    fn concat_mixes_weighted_and_unweighted() {
        let a = RankingSample::new(vec![Permutation::identity(3)]).unwrap();
        let b = a.with_extra(&Permutation::reversal(3), 4.0).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.weights(), Some(&[1.0, 4.0][..]));
        assert_eq!(b.total_weight(), 5.0);
    }
}
