use serde::{Deserialize, Serialize};

use crate::market::Market;
use crate::topology::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub pu: usize,
    pub su: usize,
    pub xi: f64,
    pub beta: f64,
}

/// Matching matrix `M` with price and time-slot allocations `G` and `B`.
/// Entries of `G` and `B` are zero wherever `M` is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingOutcome {
    pub m: Vec<Vec<u8>>,
    pub g: Matrix,
    pub b: Matrix,
    /// Matched pairs ordered by PU index.
    pub pairs: Vec<MatchedPair>,
}

impl MatchingOutcome {
    pub fn empty(l_pu: usize, l_su: usize) -> Self {
        Self {
            m: vec![vec![0; l_su]; l_pu],
            g: vec![vec![0.0; l_su]; l_pu],
            b: vec![vec![0.0; l_su]; l_pu],
            pairs: Vec::new(),
        }
    }

    /// # Panics
    /// If a PU or SU appears in more than one pair.
    pub fn from_pairs(l_pu: usize, l_su: usize, pairs: impl IntoIterator<Item = MatchedPair>) -> Self {
        let mut out = Self::empty(l_pu, l_su);
        for p in pairs {
            assert!(
                out.m[p.pu].iter().all(|&x| x == 0) && out.m.iter().all(|row| row[p.su] == 0),
                "pair ({}, {}) breaks injectivity",
                p.pu,
                p.su
            );
            out.m[p.pu][p.su] = 1;
            out.g[p.pu][p.su] = p.xi;
            out.b[p.pu][p.su] = p.beta;
            out.pairs.push(p);
        }
        out.pairs.sort_by_key(|p| p.pu);
        out
    }

    pub fn l_pu(&self) -> usize {
        self.m.len()
    }

    pub fn l_su(&self) -> usize {
        self.m.first().map_or(0, Vec::len)
    }

    pub fn pair_of_pu(&self, l: usize) -> Option<&MatchedPair> {
        self.pairs.iter().find(|p| p.pu == l)
    }

    pub fn pair_of_su(&self, q: usize) -> Option<&MatchedPair> {
        self.pairs.iter().find(|p| p.su == q)
    }

    pub fn matched_count(&self) -> usize {
        self.pairs.len()
    }

    /// Utility of PU `ℓ` under the market's knowledge model, zero if unmatched.
    pub fn pu_utility(&self, market: &Market, l: usize) -> f64 {
        self.pair_of_pu(l)
            .map_or(0.0, |p| market.utility_pu(p.pu, p.su, p.xi, p.beta))
    }

    pub fn su_utility(&self, market: &Market, q: usize) -> f64 {
        self.pair_of_su(q)
            .map_or(0.0, |p| market.utility_su(p.su, p.pu, p.xi, p.beta))
    }

    pub fn sum_utility_pu(&self, market: &Market) -> f64 {
        self.pairs
            .iter()
            .map(|p| market.utility_pu(p.pu, p.su, p.xi, p.beta))
            .sum()
    }

    pub fn realized_sum_utility_pu(&self, market: &Market) -> f64 {
        self.pairs
            .iter()
            .map(|p| market.realized_utility_pu(p.pu, p.su, p.xi, p.beta))
            .sum()
    }

    pub fn realized_sum_rate_pu(&self, market: &Market) -> f64 {
        self.pairs
            .iter()
            .map(|p| market.realized_rate_pu(p.pu, p.su, p.beta))
            .sum()
    }

    pub fn sum_rate_su(&self, market: &Market) -> f64 {
        self.pairs
            .iter()
            .map(|p| market.rate_su(p.su, p.pu, p.beta))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_zero_outside_matching() {
        let o = MatchingOutcome::from_pairs(
            2,
            3,
            [MatchedPair { pu: 1, su: 2, xi: 0.4, beta: 0.8 }],
        );
        assert_eq!(o.m, vec![vec![0, 0, 0], vec![0, 0, 1]]);
        assert_eq!(o.g[1][2], 0.4);
        assert_eq!(o.b[0], vec![0.0; 3]);
        assert!(o.pair_of_pu(0).is_none());
        assert_eq!(o.pair_of_su(2).unwrap().pu, 1);
    }

    #[test]
    #[should_panic(expected = "injectivity")]
    fn duplicate_su_panics() {
        MatchingOutcome::from_pairs(
            2,
            2,
            [
                MatchedPair { pu: 0, su: 1, xi: 0.1, beta: 0.5 },
                MatchedPair { pu: 1, su: 1, xi: 0.1, beta: 0.5 },
            ],
        );
    }
}
