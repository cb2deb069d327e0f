//! Permutations of `n` items and the right-invariant metrics on them.
//!
//! A [`Permutation`] stores ranks: `rank(i)` is the position of item `i`,
//! smaller meaning more preferred. Ranks are zero-based in memory.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_size, Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    ranks: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from zero-based ranks, checking it is a bijection.
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        let n = ranks.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("no items".into()));
        }
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r >= n {
                return Err(Error::InvalidPermutation(format!(
                    "rank {r} out of range for {n} items"
                )));
            }
            if std::mem::replace(&mut seen[r], true) {
                return Err(Error::InvalidPermutation(format!("rank {r} repeated")));
            }
        }
        Ok(Permutation { ranks })
    }

    pub fn from_one_based(ranks: &[usize]) -> Result<Self> {
        let zero = ranks
            .iter()
            .map(|&r| {
                r.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("rank 0 in one-based input".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(zero)
    }

    /// Builds a permutation from an ordering: `order[k]` is the item placed at rank `k`.
    pub fn from_ordering(order: &[usize]) -> Result<Self> {
        Ok(Permutation::new(order.to_vec())?.inverse())
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutation needs at least one item");
        Permutation { ranks: (0..n).collect() }
    }

    /// The ranking that reverses the identity.
    pub fn reversal(n: usize) -> Self {
        assert!(n >= 1, "permutation needs at least one item");
        Permutation { ranks: (0..n).rev().collect() }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rank(&self, item: usize) -> usize {
        self.ranks[item]
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.ranks.iter().map(|r| r + 1).collect()
    }

    /// Items listed from most to least preferred.
    pub fn ordering(&self) -> Vec<usize> {
        let mut order = vec![0; self.len()];
        for (item, &r) in self.ranks.iter().enumerate() {
            order[r] = item;
        }
        order
    }

    /// `result(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        check_same_size(self.len(), other.len())?;
        Ok(Permutation {
            ranks: other.ranks.iter().map(|&j| self.ranks[j]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        Permutation { ranks: self.ordering() }
    }

    /// `i -> n - 1 - self(i)`: the same preferences read backwards.
    pub fn reversed(&self) -> Permutation {
        let n = self.len();
        Permutation {
            ranks: self.ranks.iter().map(|&r| n - 1 - r).collect(),
        }
    }

    /// Exchanges the ranks of items `a` and `b` (right composition with the transposition `(a b)`).
    pub fn swap_items(&self, a: usize, b: usize) -> Permutation {
        let mut ranks = self.ranks.clone();
        ranks.swap(a, b);
        Permutation { ranks }
    }

    /// A deterministic ranking at Kendall distance `k` from the identity.
    ///
    /// Items are pushed back greedily from the front, so the result is the
    /// lexicographically smallest ordering with `k` inversions.
    pub fn with_inversions(n: usize, k: usize) -> Result<Permutation> {
        let max = n * (n - 1) / 2;
        if k > max {
            return Err(Error::Domain(format!(
                "{k} inversions impossible for {n} items (max {max})"
            )));
        }
        // Lehmer code filled from the last position backwards.
        let mut remaining = k;
        let mut code = vec![0usize; n];
        for pos in (0..n).rev() {
            let take = remaining.min(n - 1 - pos);
            code[pos] = take;
            remaining -= take;
        }
        let mut pool: Vec<usize> = (0..n).collect();
        let order: Vec<usize> = code.iter().map(|&c| pool.remove(c)).collect();
        Permutation::from_ordering(&order)
    }

    /// Iterates over all `n!` permutations in lexicographic order of their ranks.
    pub fn all(n: usize) -> AllPermutations {
        AllPermutations { next: Some((0..n).collect()) }
    }

    /// Index of this permutation in the lexicographic order used by [`Permutation::all`].
    pub fn lex_index(&self) -> usize {
        let n = self.len();
        let mut idx = 0;
        let mut fact = vec![1usize; n];
        for k in 1..n {
            fact[k] = fact[k - 1] * k;
        }
        for i in 0..n {
            let smaller = self.ranks[i + 1..].iter().filter(|&&r| r < self.ranks[i]).count();
            idx += smaller * fact[n - 1 - i];
        }
        idx
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.ranks)
    }
}

/// Space-separated one-based ranks.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, r) in self.ranks.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", r + 1)?;
        }
        Ok(())
    }
}

/// Parses space- or comma-separated one-based ranks.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ranks = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("not a rank: {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_one_based(&ranks)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.ranks
    }
}

pub struct AllPermutations {
    next: Option<Vec<usize>>,
}

impl Iterator for AllPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        if current.is_empty() {
            return None;
        }
        let mut succ = current.clone();
        if next_lexicographic(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { ranks: current })
    }
}

fn next_lexicographic(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    KendallTau,
    SpearmanRho,
    SpearmanFootrule,
    Hamming,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::KendallTau,
        Metric::SpearmanRho,
        Metric::SpearmanFootrule,
        Metric::Hamming,
    ];

    pub fn distance(self, a: &Permutation, b: &Permutation) -> Result<f64> {
        distance(a, b, self)
    }

    /// `max d(σ, σ')` over all pairs. Attained at (identity, reversal), except Hamming for odd n.
    pub fn max_distance(self, n: usize) -> f64 {
        max_distance(self, n)
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::KendallTau => "kendall",
            Metric::SpearmanRho => "rho",
            Metric::SpearmanFootrule => "footrule",
            Metric::Hamming => "hamming",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kendall" | "kendall_tau" | "tau" => Ok(Metric::KendallTau),
            "rho" | "spearman" | "spearman_rho" => Ok(Metric::SpearmanRho),
            "footrule" | "spearman_footrule" => Ok(Metric::SpearmanFootrule),
            "hamming" => Ok(Metric::Hamming),
            other => Err(Error::Domain(format!("unknown metric {other:?}"))),
        }
    }
}

pub fn distance(a: &Permutation, b: &Permutation, m: Metric) -> Result<f64> {
    check_same_size(a.len(), b.len())?;
    Ok(distance_unchecked(a, b, m))
}

pub(crate) fn distance_unchecked(a: &Permutation, b: &Permutation, m: Metric) -> f64 {
    let (x, y) = (a.ranks(), b.ranks());
    match m {
        Metric::KendallTau => kendall_tau(a, b) as f64,
        Metric::SpearmanRho => x
            .iter()
            .zip(y)
            .map(|(&p, &q)| {
                let d = p as f64 - q as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt(),
        Metric::SpearmanFootrule => x.iter().zip(y).map(|(&p, &q)| p.abs_diff(q)).sum::<usize>() as f64,
        Metric::Hamming => x.iter().zip(y).filter(|(p, q)| p != q).count() as f64,
    }
}

/// Number of discordant item pairs, by merge-sort inversion counting.
pub fn kendall_tau(a: &Permutation, b: &Permutation) -> usize {
    debug_assert_eq!(a.len(), b.len());
    // Read a's ranks in b's preference order; discordant pairs are inversions.
    let mut seq: Vec<usize> = b.ordering().into_iter().map(|item| a.rank(item)).collect();
    let mut buf = vec![0; seq.len()];
    count_inversions(&mut seq, &mut buf)
}

fn count_inversions(v: &mut [usize], buf: &mut [usize]) -> usize {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(l, bl) + count_inversions(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[i] <= v[j] {
            buf[k] = v[i];
            i += 1;
        } else {
            buf[k] = v[j];
            inv += mid - i;
            j += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    inv
}

pub fn max_distance(m: Metric, n: usize) -> f64 {
    match m {
        Metric::KendallTau => (n * n.saturating_sub(1) / 2) as f64,
        Metric::Hamming => {
            if n <= 1 {
                0.0
            } else {
                n as f64
            }
        }
        Metric::SpearmanFootrule => (n * n / 2) as f64,
        Metric::SpearmanRho => (0..n)
            .map(|i| {
                let d = n as f64 - 1.0 - 2.0 * i as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: &[usize]) -> Permutation {
        Permutation::new(r.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![0, 0, 2]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
    }

    #[test]
    fn compose_and_inverse() {
        let s = p(&[1, 2, 0]);
        assert_eq!(s.compose(&Permutation::identity(3)).unwrap(), s);
        assert_eq!(s.compose(&s.inverse()).unwrap(), Permutation::identity(3));
        assert_eq!(p(&[1, 2, 0]).compose(&p(&[2, 0, 1])).unwrap(), Permutation::identity(3));
        assert_eq!(p(&[1, 2, 0]).inverse(), p(&[2, 0, 1]));
        assert_eq!(Permutation::identity(5).inverse(), Permutation::identity(5));
        assert_eq!(s.inverse().inverse(), s);
        assert!(s.compose(&Permutation::identity(4)).is_err());
    }

    #[test]
    fn metric_examples() {
        let id4 = Permutation::identity(4);
        let rev4 = Permutation::reversal(4);
        assert_eq!(distance(&id4, &rev4, Metric::KendallTau).unwrap(), 6.0);
        assert_eq!(distance(&rev4, &rev4, Metric::Hamming).unwrap(), 0.0);
        assert_eq!(distance(&p(&[0, 1, 2]), &p(&[1, 0, 2]), Metric::SpearmanFootrule).unwrap(), 2.0);
        let d2 = distance(&Permutation::identity(3), &p(&[1, 0, 2]), Metric::SpearmanRho).unwrap();
        assert!((d2 - 2f64.sqrt()).abs() < 1e-15);
        assert!(distance(&id4, &Permutation::identity(3), Metric::Hamming).is_err());
    }

    #[test]
    fn max_distance_values() {
        assert_eq!(max_distance(Metric::KendallTau, 12), 66.0);
        assert_eq!(max_distance(Metric::Hamming, 1), 0.0);
        assert_eq!(max_distance(Metric::SpearmanFootrule, 4), 8.0);
    }

    #[test]
    fn max_distance_matches_brute_force() {
        for n in 1..=6 {
            let perms: Vec<_> = Permutation::all(n).collect();
            for m in Metric::ALL {
                let mut best = 0.0f64;
                for a in &perms {
                    for b in &perms {
                        best = best.max(distance(a, b, m).unwrap());
                    }
                }
                assert!((best - max_distance(m, n)).abs() < 1e-12, "{m} n={n}");
                if m != Metric::Hamming || n % 2 == 0 {
                    let at_ends = distance(&Permutation::identity(n), &Permutation::reversal(n), m).unwrap();
                    assert!((at_ends - best).abs() < 1e-12, "{m} n={n} not attained at reversal");
                }
            }
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let all: Vec<_> = Permutation::all(4).collect();
        assert_eq!(all.len(), 24);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for (i, s) in all.iter().enumerate() {
            assert_eq!(s.lex_index(), i);
        }
        assert_eq!(Permutation::all(1).count(), 1);
    }

    #[test]
    fn ordering_round_trip() {
        let s = p(&[2, 0, 3, 1]);
        assert_eq!(s.ordering(), vec![1, 3, 0, 2]);
        assert_eq!(Permutation::from_ordering(&s.ordering()).unwrap(), s);
    }

    #[test]
    fn with_inversions_hits_requested_distance() {
        for n in 1..=10 {
            for k in 0..=n * (n - 1) / 2 {
                let s = Permutation::with_inversions(n, k).unwrap();
                assert_eq!(kendall_tau(&Permutation::identity(n), &s), k);
            }
        }
        assert!(Permutation::with_inversions(3, 4).is_err());
    }

    #[test]
    fn display_and_parse() {
        let s = p(&[2, 0, 1]);
        assert_eq!(s.to_string(), "3 1 2");
        assert_eq!("3 1 2".parse::<Permutation>().unwrap(), s);
        assert_eq!("3,1,2".parse::<Permutation>().unwrap(), s);
        assert!("0 1 2".parse::<Permutation>().is_err());
    }

    #[test]
    fn metric_names() {
        for m in Metric::ALL {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("cayley".parse::<Metric>().is_err());
    }
}
