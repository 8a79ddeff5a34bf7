//! Preference lists of primary and secondary pairs.
//!
//! A PU ranks the SUs that can lift it to its rate requirement at the
//! allocation it would offer them; an SU ranks the PUs whose latest offer
//! meets its own rate requirement with non-negative utility. Both orders are
//! by descending utility, ties to the lower index.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::market::Market;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PuPreferenceList {
    pub owner: usize,
    pub members: Vec<usize>,
    /// `(ξ, β)` each member was evaluated at, in list order.
    pub basis: Vec<(f64, f64)>,
}

impl PuPreferenceList {
    pub fn first(&self) -> Option<usize> {
        self.members.first().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn rank_of(&self, q: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == q)
    }
}

fn by_utility_then_index(a: (usize, f64), b: (usize, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// PU list with one common allocation offered to every SU.
pub fn build_pulist(market: &Market, l: usize, xi: f64, beta: f64) -> PuPreferenceList {
    build_pulist_with(market, l, |_| (xi, beta))
}

/// PU list where SU `q` is evaluated at `offer_to(q)`.
pub fn build_pulist_with(
    market: &Market,
    l: usize,
    offer_to: impl Fn(usize) -> (f64, f64),
) -> PuPreferenceList {
    let mut scored: Vec<(usize, f64)> = (0..market.l_su())
        .filter(|&q| market.pu_accepts(l, q, offer_to(q).1))
        .map(|q| {
            let (xi, beta) = offer_to(q);
            (q, market.utility_pu(l, q, xi, beta))
        })
        .collect();
    scored.sort_by(|a, b| by_utility_then_index(*a, *b));
    let members: Vec<usize> = scored.into_iter().map(|(q, _)| q).collect();
    let basis = members.iter().map(|&q| offer_to(q)).collect();
    PuPreferenceList {
        owner: l,
        members,
        basis,
    }
}

/// Latest `(ξ, β)` each SU has received from each PU.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfferBook {
    /// `[q][ℓ]`
    pub offers: Vec<Vec<(f64, f64)>>,
}

impl OfferBook {
    pub fn new(l_pu: usize, l_su: usize, init: (f64, f64)) -> Self {
        Self {
            offers: vec![vec![init; l_pu]; l_su],
        }
    }

    pub fn record(&mut self, q: usize, l: usize, xi: f64, beta: f64) {
        self.offers[q][l] = (xi, beta);
    }

    pub fn get(&self, q: usize, l: usize) -> (f64, f64) {
        self.offers[q][l]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuPreferenceList {
    pub owner: usize,
    pub members: Vec<usize>,
    /// `[ℓ]` offer each PU is evaluated at.
    pub evaluation: Vec<(f64, f64)>,
}

impl SuPreferenceList {
    pub fn rank_of(&self, l: usize) -> Option<usize> {
        self.members.iter().position(|&m| m == l)
    }
}

pub fn build_sulist(market: &Market, q: usize, book: &OfferBook) -> SuPreferenceList {
    let evaluation = book.offers[q].clone();
    let mut scored: Vec<(usize, f64)> = evaluation
        .iter()
        .enumerate()
        .filter(|&(l, &(xi, beta))| market.su_accepts(q, l, xi, beta))
        .map(|(l, &(xi, beta))| (l, market.utility_su(q, l, xi, beta)))
        .collect();
    scored.sort_by(|a, b| by_utility_then_index(*a, *b));
    SuPreferenceList {
        owner: q,
        members: scored.into_iter().map(|(l, _)| l).collect(),
        evaluation,
    }
}

/// An offer as seen by the SU: who made it and at what allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    pub pu: usize,
    pub xi: f64,
    pub beta: f64,
}

/// Whether SU `q` drops `incumbent` for `challenger`. Equal utilities keep
/// the incumbent.
pub fn su_prefers(market: &Market, q: usize, challenger: Bid, incumbent: Bid) -> bool {
    market.su_accepts(q, challenger.pu, challenger.xi, challenger.beta)
        && market.utility_su(q, challenger.pu, challenger.xi, challenger.beta)
            > market.utility_su(q, incumbent.pu, incumbent.xi, incumbent.beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Requirements;
    use crate::params::ScenarioParams;

    fn market(pu_rate: Vec<Vec<f64>>, su_rate: Vec<Vec<f64>>, pu_req: Vec<f64>) -> Market {
        let l_su = su_rate.len();
        Market::from_rates(
            &ScenarioParams::default(),
            pu_rate,
            su_rate,
            Requirements {
                pu: pu_req,
                su: vec![0.1; l_su],
            },
        )
    }

    #[test]
    fn pulist_empty_below_every_beta_min() {
        let m = market(vec![vec![0.5, 0.4]], vec![vec![12.0], vec![12.0]], vec![0.3]);
        // beta_min = 0.6 and 0.75
        assert!(build_pulist(&m, 0, 0.5, 0.55).is_empty());
        assert_eq!(build_pulist(&m, 0, 0.5, 0.7).members, vec![0]);
    }

    #[test]
    fn pulist_orders_by_relay_quality() {
        let m = market(vec![vec![0.3, 0.9]], vec![vec![12.0], vec![12.0]], vec![0.1]);
        let list = build_pulist(&m, 0, 0.9, 0.9);
        assert_eq!(list.members, vec![1, 0]);
        assert_eq!(list.rank_of(0), Some(1));
        assert_eq!(list.basis, vec![(0.9, 0.9); 2]);
    }

    #[test]
    fn sulist_membership_and_order() {
        let m = market(
            vec![vec![1.0], vec![1.0], vec![1.0]],
            vec![vec![20.0, 20.0, 5.0]],
            vec![0.1; 3],
        );
        let mut book = OfferBook::new(3, 1, (0.99, 0.99));
        assert!(build_sulist(&m, 0, &book).members.is_empty());
        book.record(0, 0, 0.5, 0.9); // 2.0 - 0.5
        book.record(0, 1, 0.2, 0.9); // 2.0 - 0.2
        book.record(0, 2, 0.0, 0.99); // rate 0.05 < 0.1
        let list = build_sulist(&m, 0, &book);
        assert_eq!(list.members, vec![1, 0]);
        assert_eq!(build_sulist(&m, 0, &book), list);
    }

    #[test]
    fn incumbent_wins_ties() {
        let m = market(vec![vec![1.0], vec![1.0]], vec![vec![20.0, 20.0]], vec![0.1; 2]);
        let a = Bid { pu: 0, xi: 0.5, beta: 0.8 };
        let b = Bid { pu: 1, xi: 0.5, beta: 0.8 };
        assert!(!su_prefers(&m, 0, b, a));
        let cheaper = Bid { pu: 1, xi: 0.4, beta: 0.8 };
        assert!(su_prefers(&m, 0, cheaper, a));
        let infeasible = Bid { pu: 1, xi: 0.0, beta: 0.999 };
        assert!(!su_prefers(&m, 0, infeasible, a));
    }
}
