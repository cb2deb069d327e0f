//! Pairwise preference probabilities `p_ij = P{Σ(i) < Σ(j)}` and the
//! transitivity conditions built on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_same_size, Error, Result};
use crate::perm::Permutation;
use crate::sample::{RankingDistribution, RankingSample};

const COMPLEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    n: usize,
    p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransitivityStatus {
    /// Strictly stochastically transitive.
    #[serde(rename = "SST")]
    Sst,
    /// Transitive, but some pair sits exactly at one half.
    #[serde(rename = "ST_with_ties")]
    StWithTies,
    #[serde(rename = "NotST")]
    NotSt,
}

impl TransitivityStatus {
    pub fn is_transitive(self) -> bool {
        self != TransitivityStatus::NotSt
    }
}

impl fmt::Display for TransitivityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitivityStatus::Sst => "SST",
            TransitivityStatus::StWithTies => "ST_with_ties",
            TransitivityStatus::NotSt => "NotST",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalMonotonicity {
    pub holds: bool,
    /// Smallest margin `|p_ij - 1/2|` over `i < j`.
    pub h: f64,
    /// Largest spread `|p_ij - p_kl|` over distinct pairs `i < j`, `k < l`.
    pub s: f64,
    /// `h / s`, infinite when `s = 0`.
    pub bound: f64,
}

impl PairwiseMatrix {
    /// Builds a matrix from its strict upper triangle; `p_ji = 1 - p_ij`, diagonal 1/2.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut p = vec![0.5; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = upper(i, j);
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Domain(format!("p[{i}][{j}] = {v} outside [0, 1]")));
                }
                p[i * n + j] = v;
                p[j * n + i] = 1.0 - v;
            }
        }
        Ok(PairwiseMatrix { n, p })
    }

    /// Builds a matrix from full rows, checking `p_ij + p_ji = 1`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            check_same_size(n, r.len())?;
        }
        for i in 0..n {
            for j in i + 1..n {
                if (rows[i][j] + rows[j][i] - 1.0).abs() > COMPLEMENT_TOL {
                    return Err(Error::Domain(format!(
                        "p[{i}][{j}] + p[{j}][{i}] = {} != 1",
                        rows[i][j] + rows[j][i]
                    )));
                }
            }
        }
        PairwiseMatrix::from_upper(n, |i, j| rows[i][j])
    }

    /// Pairwise marginals of a distribution.
    pub fn from_distribution<D: RankingDistribution + ?Sized>(dist: &D) -> Self {
        let n = dist.n_items();
        let mut upper = vec![0.0; n * n];
        let mut total = 0.0;
        for (sigma, w) in dist.atoms() {
            total += w;
            let r = sigma.ranks();
            for i in 0..n {
                for j in i + 1..n {
                    if r[i] < r[j] {
                        upper[i * n + j] += w;
                    }
                }
            }
        }
        PairwiseMatrix::from_upper(n, |i, j| (upper[i * n + j] / total).clamp(0.0, 1.0))
            .expect("clamped probabilities")
    }

    /// The 0/1 matrix induced by a single ranking.
    pub fn dirac(sigma: &Permutation) -> Self {
        PairwiseMatrix::from_upper(sigma.len(), |i, j| {
            if sigma.rank(i) < sigma.rank(j) {
                1.0
            } else {
                0.0
            }
        })
        .expect("0/1 entries")
    }

    pub fn uniform(n: usize) -> Self {
        PairwiseMatrix { n, p: vec![0.5; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.p.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    /// -1, 0 or +1 according to whether item `i` loses, ties or wins against `j`.
    fn side(&self, i: usize, j: usize, eps: f64) -> i8 {
        let d = self.get(i, j) - 0.5;
        if d.abs() <= eps {
            0
        } else if d > 0.0 {
            1
        } else {
            -1
        }
    }

    /// First triple `(i, j, k)` with `p_ij >= 1/2`, `p_jk >= 1/2` and `p_ik < 1/2`.
    pub fn transitivity_violation(&self, eps: f64) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                if j == i || self.side(i, j, eps) < 0 {
                    continue;
                }
                for k in 0..n {
                    if k == i || k == j {
                        continue;
                    }
                    if self.side(j, k, eps) >= 0 && self.side(i, k, eps) < 0 {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// First pair `i < j` with `p_ij` within `eps` of one half.
    pub fn first_tie(&self, eps: f64) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .find(|&(i, j)| self.side(i, j, eps) == 0)
    }

    /// Exact comparison against one half.
    pub fn transitivity_status(&self) -> TransitivityStatus {
        self.transitivity_status_eps(0.0)
    }

    /// Entries within `eps` of one half are treated as ties.
    pub fn transitivity_status_eps(&self, eps: f64) -> TransitivityStatus {
        if self.transitivity_violation(eps).is_some() {
            TransitivityStatus::NotSt
        } else if self.first_tie(eps).is_some() {
            TransitivityStatus::StWithTies
        } else {
            TransitivityStatus::Sst
        }
    }

    pub fn require_st(&self) -> Result<()> {
        match self.transitivity_violation(0.0) {
            Some((i, j, k)) => Err(Error::NotTransitive(i, j, k)),
            None => Ok(()),
        }
    }

    pub fn require_sst(&self) -> Result<()> {
        self.require_st()?;
        match self.first_tie(0.0) {
            Some((i, j)) => Err(Error::NotStrict(i, j)),
            None => Ok(()),
        }
    }

    /// Number of item triples whose strict-majority tournament is a directed 3-cycle.
    /// Triples containing a tie are not counted.
    pub fn count_cycles(&self) -> usize {
        self.count_cycles_eps(0.0)
    }

    pub fn count_cycles_eps(&self, eps: f64) -> usize {
        let n = self.n;
        let mut cycles = 0;
        for i in 0..n {
            for j in i + 1..n {
                let ij = self.side(i, j, eps);
                if ij == 0 {
                    continue;
                }
                for k in j + 1..n {
                    let jk = self.side(j, k, eps);
                    let ki = self.side(k, i, eps);
                    if jk != 0 && ij == jk && jk == ki {
                        cycles += 1;
                    }
                }
            }
        }
        cycles
    }

    /// Checks the sufficient condition `C(n,2) < h/s` for global monotonicity of Kendall depth.
    pub fn global_monotonicity_condition(&self) -> Result<GlobalMonotonicity> {
        self.require_sst()?;
        let n = self.n;
        let upper: Vec<f64> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        let h = upper.iter().map(|p| (p - 0.5).abs()).fold(f64::INFINITY, f64::min);
        let (lo, hi) = upper
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
        let s = if upper.len() < 2 { 0.0 } else { hi - lo };
        let pairs = (n * n.saturating_sub(1) / 2) as f64;
        if s == 0.0 {
            return Ok(GlobalMonotonicity { holds: true, h, s, bound: f64::INFINITY });
        }
        let bound = h / s;
        Ok(GlobalMonotonicity { holds: pairs < bound, h, s, bound })
    }

    /// `n` on the first line, then `n` comma-separated rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse { row: 1, message: "empty matrix file".into() })?;
        let n: usize = header.trim().parse().map_err(|_| Error::Parse {
            row: 1,
            message: format!("expected item count, got {header:?}"),
        })?;
        let mut rows = Vec::with_capacity(n);
        for (idx, line) in lines {
            let row = line
                .split(',')
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| Error::Parse {
                        row: idx + 1,
                        message: format!("not a probability: {c:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != n {
                return Err(Error::Parse {
                    row: idx + 1,
                    message: format!("expected {n} columns, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.len() != n {
            return Err(Error::Parse {
                row: rows.len() + 2,
                message: format!("expected {n} rows, found {}", rows.len()),
            });
        }
        PairwiseMatrix::from_rows(&rows)
    }
}

/// Empirical pairwise probabilities of a sample (weighted when the sample carries weights).
pub fn empirical_pairwise(sample: &RankingSample) -> Result<PairwiseMatrix> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(PairwiseMatrix::from_distribution(sample))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three(p01: f64, p02: f64, p12: f64) -> PairwiseMatrix {
        PairwiseMatrix::from_upper(3, |i, j| match (i, j) {
            (0, 1) => p01,
            (0, 2) => p02,
            _ => p12,
        })
        .unwrap()
    }

    #[test]
    fn empirical_examples() {
        let id2 = Permutation::identity(2);
        let swap = Permutation::reversal(2);
        let m = empirical_pairwise(&RankingSample::new(vec![id2.clone()]).unwrap()).unwrap();
        assert_eq!(m.get(0, 1), 1.0);
        let m = empirical_pairwise(&RankingSample::new(vec![id2, swap]).unwrap()).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        let all = RankingSample::new(Permutation::all(3).collect()).unwrap();
        let m = empirical_pairwise(&all).unwrap();
        assert!(m.p.iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn weighted_sample_uses_weights() {
        let s = RankingSample::weighted(
            vec![Permutation::identity(2), Permutation::reversal(2)],
            vec![3.0, 1.0],
        )
        .unwrap();
        assert_eq!(empirical_pairwise(&s).unwrap().get(0, 1), 0.75);
    }

    #[test]
    fn copies_of_one_ranking_give_dirac() {
        let s = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        let sample = RankingSample::new(vec![s.clone(); 7]).unwrap();
        assert_eq!(empirical_pairwise(&sample).unwrap(), PairwiseMatrix::dirac(&s));
    }

    #[test]
    fn status_examples() {
        let dirac = PairwiseMatrix::dirac(&Permutation::new(vec![1, 2, 0]).unwrap());
        assert_eq!(dirac.transitivity_status(), TransitivityStatus::Sst);
        assert_eq!(dirac.count_cycles(), 0);

        // p01 = p12 = p20 = 0.6
        let cyc = three(0.6, 0.4, 0.6);
        assert_eq!(cyc.transitivity_status(), TransitivityStatus::NotSt);
        assert_eq!(cyc.count_cycles(), 1);

        let flat = PairwiseMatrix::uniform(4);
        assert_eq!(flat.transitivity_status(), TransitivityStatus::StWithTies);
        assert_eq!(flat.count_cycles(), 0);
    }

    #[test]
    fn tolerance_treats_near_half_as_tie() {
        let m = three(0.5 + 1e-9, 0.7, 0.8);
        assert_eq!(m.transitivity_status(), TransitivityStatus::Sst);
        assert_eq!(m.transitivity_status_eps(1e-6), TransitivityStatus::StWithTies);
    }

    #[test]
    fn global_monotonicity_examples() {
        let g = three(0.8, 0.8, 0.8).global_monotonicity_condition().unwrap();
        assert!(g.holds && g.s == 0.0 && g.bound.is_infinite());

        let g = three(0.9, 0.8, 0.7).global_monotonicity_condition().unwrap();
        assert!((g.h - 0.2).abs() < 1e-12 && (g.s - 0.2).abs() < 1e-12);
        assert!((g.bound - 1.0).abs() < 1e-9);
        assert!(!g.holds);

        let g = three(0.51, 0.509, 0.508).global_monotonicity_condition().unwrap();
        assert!((g.h - 0.008).abs() < 1e-12 && (g.s - 0.002).abs() < 1e-12);
        assert!((g.bound - 4.0).abs() < 1e-9);
        assert!(g.holds);

        assert!(three(0.6, 0.4, 0.6).global_monotonicity_condition().is_err());
        assert!(PairwiseMatrix::uniform(3).global_monotonicity_condition().is_err());
    }

    #[test]
    fn ties_hide_cycles_from_the_count() {
        // p01 = 1/2, p12 = 3/4, p20 = 3/4: not transitive, yet no strict
        // 3-cycle exists because (0, 1) is tied.
        let orderings: [&[usize]; 4] = [&[1, 2, 0], &[1, 2, 0], &[0, 1, 2], &[2, 0, 1]];
        let sample = RankingSample::new(
            orderings.iter().map(|o| Permutation::from_ordering(o).unwrap()).collect(),
        )
        .unwrap();
        let m = empirical_pairwise(&sample).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.transitivity_status(), TransitivityStatus::NotSt);
        assert_eq!(m.count_cycles(), 0);
    }

    #[test]
    fn violation_names_the_triple() {
        let cyc = three(0.6, 0.4, 0.6);
        let (i, j, k) = cyc.transitivity_violation(0.0).unwrap();
        assert!(cyc.get(i, j) >= 0.5 && cyc.get(j, k) >= 0.5 && cyc.get(i, k) < 0.5);
        assert_eq!(cyc.require_sst(), Err(Error::NotTransitive(i, j, k)));
        assert_eq!(PairwiseMatrix::uniform(3).require_sst(), Err(Error::NotStrict(0, 1)));
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let m = three(0.61, 0.123456789, 0.9);
        assert_eq!(PairwiseMatrix::from_csv(&m.to_csv()).unwrap(), m);
        assert!(PairwiseMatrix::from_csv("2\n0.5,0.7\n0.7,0.5\n").is_err());
        assert!(PairwiseMatrix::from_csv("2\n0.5,0.7\n").is_err());
        assert!(PairwiseMatrix::from_csv("").is_err());
    }
}
