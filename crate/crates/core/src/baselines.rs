//! Centralized and random-matching reference algorithms.
//!
//! The centralized PU-optimal solver decomposes over the matching: for a
//! fixed pair the best allocation can be computed in isolation, and the
//! matching is then an assignment problem over those per-pair values.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dda::{concede, ConcessionBranch, Event, EventKind, EngineTrace, Steps};
use crate::error::{Error, Result};
use crate::market::Market;
use crate::outcome::{MatchedPair, MatchingOutcome};

/// Best allocation for one pair considered on its own.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairValue {
    pub pu: usize,
    pub su: usize,
    pub feasible: bool,
    pub xi: f64,
    pub beta: f64,
    /// PU utility at the optimum; `-inf` when infeasible.
    pub value: f64,
    pub su_rate: f64,
}

impl PairValue {
    fn infeasible(pu: usize, su: usize) -> Self {
        Self {
            pu,
            su,
            feasible: false,
            xi: 0.0,
            beta: 0.0,
            value: f64::NEG_INFINITY,
            su_rate: 0.0,
        }
    }

    fn at(market: &Market, pu: usize, su: usize, xi: f64, beta: f64) -> Self {
        Self {
            pu,
            su,
            feasible: true,
            xi,
            beta,
            value: market.utility_pu(pu, su, xi, beta),
            su_rate: market.rate_su(su, pu, beta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationDomain {
    Continuous,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssignmentSolver {
    /// Enumerate every injective partial matching (size-guarded).
    #[default]
    Exhaustive,
    /// Hungarian method on the zero-padded square value matrix.
    Hungarian,
}

/// Optimal `(ξ, β)` for pair `(ℓ, q)` over `β ∈ [β_min, β_max]`,
/// `ξ ∈ [0, min(1, R_SU(β)/(k̄C))]`.
///
/// Price enters the PU utility with a positive weight, so `ξ` sits at its
/// cap and the reduced objective is concave piecewise linear in `β`; its
/// maximum is at an end of the window or at the kink where the cap leaves 1.
pub fn pair_optimum_continuous(market: &Market, l: usize, q: usize) -> PairValue {
    let th = market.thresholds(l, q);
    if !th.feasible {
        return PairValue::infeasible(l, q);
    }
    let lo = th.beta_min.max(0.0);
    let hi = th.beta_max.min(1.0);
    let k_c = market.k_bar * market.capital_c;
    let s = market.su_frame_rate[q][l];
    let mut candidates = vec![lo, hi];
    if k_c > 0.0 && s > 0.0 {
        let kink = 1.0 - k_c / s;
        if kink > lo && kink < hi {
            candidates.push(kink);
        }
    }
    candidates.sort_by(f64::total_cmp);
    let mut best = PairValue::infeasible(l, q);
    for beta in candidates {
        let xi = th.xi_cap(beta).max(0.0);
        let v = PairValue::at(market, l, q, xi, beta);
        if v.value > best.value {
            best = v;
        }
    }
    best
}

/// Exhaustive scan of the market's allocation grid for pair `(ℓ, q)`.
pub fn pair_optimum_discrete(market: &Market, l: usize, q: usize) -> PairValue {
    let grid = market.grid;
    let mut best = PairValue::infeasible(l, q);
    let mut betas: Vec<f64> = grid.beta_points().map(|(_, b)| b).collect();
    let mut xis: Vec<f64> = grid.xi_points().map(|(_, x)| x).collect();
    betas.reverse();
    xis.reverse();
    for &beta in &betas {
        for &xi in &xis {
            if market.pair_feasible(l, q, xi, beta) {
                let v = PairValue::at(market, l, q, xi, beta);
                if v.value > best.value {
                    best = v;
                }
            }
        }
    }
    best
}

pub fn pair_optimum(market: &Market, l: usize, q: usize, domain: AllocationDomain) -> PairValue {
    match domain {
        AllocationDomain::Continuous => pair_optimum_continuous(market, l, q),
        AllocationDomain::Discrete => pair_optimum_discrete(market, l, q),
    }
}

/// Number of injective partial matchings between `a` and `b` users.
pub fn partial_matching_count(a: usize, b: usize) -> f64 {
    let (a, b) = (a.min(b), a.max(b));
    let mut total = 0.0;
    for k in 0..=a {
        let choose: f64 = (0..k).map(|i| (a - i) as f64 / (i + 1) as f64).product();
        let arrange: f64 = (0..k).map(|i| (b - i) as f64).product();
        total += choose * arrange;
    }
    total
}

/// Largest instance the exhaustive assignment accepts.
pub const EXHAUSTIVE_LIMIT: (usize, usize) = (8, 8);

fn exhaustive_guard(l_pu: usize, l_su: usize) -> Result<()> {
    let limit = partial_matching_count(EXHAUSTIVE_LIMIT.0, EXHAUSTIVE_LIMIT.1);
    if partial_matching_count(l_pu, l_su) > limit {
        return Err(Error::Guard {
            what: "exhaustive assignment",
            detail: format!(
                "{l_pu}x{l_su} exceeds the {}x{} enumeration limit; use the hungarian solver",
                EXHAUSTIVE_LIMIT.0, EXHAUSTIVE_LIMIT.1
            ),
        });
    }
    Ok(())
}

/// Visits every injective partial matching as `assignment[ℓ] = Option<q>`,
/// in lexicographic order with "unmatched" before any SU.
pub fn for_each_matching(l_pu: usize, l_su: usize, mut visit: impl FnMut(&[Option<usize>])) {
    fn rec(
        l: usize,
        l_su: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<Option<usize>>,
        visit: &mut dyn FnMut(&[Option<usize>]),
    ) {
        if l == cur.len() {
            visit(cur);
            return;
        }
        cur[l] = None;
        rec(l + 1, l_su, used, cur, visit);
        for q in 0..l_su {
            if !used[q] {
                used[q] = true;
                cur[l] = Some(q);
                rec(l + 1, l_su, used, cur, visit);
                used[q] = false;
            }
        }
        cur[l] = None;
    }
    let mut used = vec![false; l_su];
    let mut cur = vec![None; l_pu];
    rec(0, l_su, &mut used, &mut cur, &mut visit);
}

/// Maximum-weight injective partial matching; only positive entries may be
/// matched. Returns `assignment[ℓ]` and the total.
pub fn max_weight_matching(
    weights: &[Vec<f64>],
    l_su: usize,
    solver: AssignmentSolver,
) -> Result<(Vec<Option<usize>>, f64)> {
    let l_pu = weights.len();
    match solver {
        AssignmentSolver::Exhaustive => {
            exhaustive_guard(l_pu, l_su)?;
            let mut best = (vec![None; l_pu], 0.0);
            for_each_matching(l_pu, l_su, |a| {
                let mut total = 0.0;
                for (l, q) in a.iter().enumerate() {
                    if let Some(q) = *q {
                        let w = weights[l][q];
                        if !(w > 0.0) {
                            return;
                        }
                        total += w;
                    }
                }
                if total > best.1 {
                    best = (a.to_vec(), total);
                }
            });
            Ok(best)
        }
        AssignmentSolver::Hungarian => {
            let n = l_pu.max(l_su);
            let cost: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let w = if i < l_pu && j < l_su { weights[i][j] } else { 0.0 };
                            if w > 0.0 { -w } else { 0.0 }
                        })
                        .collect()
                })
                .collect();
            let col_of_row = hungarian_min(&cost);
            let mut assignment = vec![None; l_pu];
            let mut total = 0.0;
            for l in 0..l_pu {
                let q = col_of_row[l];
                if q < l_su && weights[l][q] > 0.0 {
                    assignment[l] = Some(q);
                    total += weights[l][q];
                }
            }
            Ok((assignment, total))
        }
    }
}

/// Minimum-cost perfect assignment on a square matrix (potentials
/// formulation, O(n³)). Returns the column assigned to each row.
fn hungarian_min(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // p[j]: row matched to column j (1-based, 0 = none)
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of_row = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            col_of_row[p[j] - 1] = j - 1;
        }
    }
    col_of_row
}

fn assemble(market: &Market, values: &[Vec<PairValue>], assignment: &[Option<usize>]) -> MatchingOutcome {
    MatchingOutcome::from_pairs(
        market.l_pu(),
        market.l_su(),
        assignment.iter().enumerate().filter_map(|(l, q)| {
            q.map(|q| {
                let v = values[l][q];
                MatchedPair {
                    pu: l,
                    su: q,
                    xi: v.xi,
                    beta: v.beta,
                }
            })
        }),
    )
}

/// Maximizes the sum of PU utilities over matchings and allocations.
pub fn centralized_pu_optimal(
    market: &Market,
    domain: AllocationDomain,
    solver: AssignmentSolver,
) -> Result<MatchingOutcome> {
    let values: Vec<Vec<PairValue>> = (0..market.l_pu())
        .map(|l| (0..market.l_su()).map(|q| pair_optimum(market, l, q, domain)).collect())
        .collect();
    let weights: Vec<Vec<f64>> = values
        .iter()
        .map(|row| row.iter().map(|v| if v.feasible { v.value } else { f64::NEG_INFINITY }).collect())
        .collect();
    let (assignment, _) = max_weight_matching(&weights, market.l_su(), solver)?;
    Ok(assemble(market, &values, &assignment))
}

/// SU-rate-maximizing allocation for one pair: `β = β_min`, `ξ = 0`.
pub fn pair_su_rate_optimum(market: &Market, l: usize, q: usize) -> PairValue {
    let th = market.thresholds(l, q);
    if !th.feasible {
        return PairValue::infeasible(l, q);
    }
    let beta = th.beta_min.max(0.0);
    let mut v = PairValue::at(market, l, q, 0.0, beta);
    v.value = v.su_rate;
    v
}

/// Maximizes the sum of SU rates subject to every pair's requirements.
pub fn centralized_su_rate(market: &Market, solver: AssignmentSolver) -> Result<MatchingOutcome> {
    let values: Vec<Vec<PairValue>> = (0..market.l_pu())
        .map(|l| (0..market.l_su()).map(|q| pair_su_rate_optimum(market, l, q)).collect())
        .collect();
    // a feasible pair with zero SU rate still counts
    let weights: Vec<Vec<f64>> = values
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| if v.feasible { v.value + TIE_NUDGE } else { f64::NEG_INFINITY })
                .collect()
        })
        .collect();
    let (assignment, _) = max_weight_matching(&weights, market.l_su(), solver)?;
    Ok(assemble(market, &values, &assignment))
}

/// Nudge that lets zero-valued feasible pairs enter a max-weight matching.
const TIE_NUDGE: f64 = 1e-12;

/// Outcome of one bilateral negotiation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bargain {
    pub agreed: Option<(f64, f64)>,
    pub offers: u64,
    pub concessions: u64,
}

/// PU `ℓ` and SU `q` alone: the PU offers, the SU accepts when its rate and
/// utility conditions hold, otherwise the PU concedes and tries again until
/// it can no longer meet its own requirement.
pub fn bilateral_negotiation(market: &Market, l: usize, q: usize) -> (Bargain, Vec<Event>) {
    let grid = market.grid;
    let mut at = Steps::default();
    let mut bargain = Bargain {
        agreed: None,
        offers: 0,
        concessions: 0,
    };
    let mut events = Vec::new();
    loop {
        let (xi, beta) = (grid.xi(at.xi), grid.beta(at.beta));
        if !market.pu_accepts(l, q, beta) {
            events.push(Event { kind: EventKind::Exit, pu: l, su: None, xi, beta, iteration: bargain.offers });
            break;
        }
        bargain.offers += 1;
        events.push(Event { kind: EventKind::Offer, pu: l, su: Some(q), xi, beta, iteration: bargain.offers });
        if market.su_accepts(q, l, xi, beta) {
            events.push(Event { kind: EventKind::Accept, pu: l, su: Some(q), xi, beta, iteration: bargain.offers });
            bargain.agreed = Some((xi, beta));
            break;
        }
        events.push(Event { kind: EventKind::Reject, pu: l, su: Some(q), xi, beta, iteration: bargain.offers });
        let (next, branch) = concede(market, l, q, at);
        bargain.concessions += 1;
        let (nxi, nbeta) = (grid.xi(next.xi), grid.beta(next.beta));
        events.push(Event { kind: EventKind::Puu, pu: l, su: Some(q), xi: nxi, beta: nbeta, iteration: bargain.offers });
        if branch == ConcessionBranch::Stuck {
            events.push(Event { kind: EventKind::Exit, pu: l, su: None, xi: nxi, beta: nbeta, iteration: bargain.offers });
            break;
        }
        at = next;
    }
    (bargain, events)
}

/// Random matching with basic negotiation: a uniformly random injective
/// matching of the smaller side into the larger, then one bilateral
/// negotiation per matched pair.
pub fn rmbn<R: Rng + ?Sized>(market: &Market, rng: &mut R) -> (MatchingOutcome, EngineTrace) {
    let (l_pu, l_su) = (market.l_pu(), market.l_su());
    let mut pus: Vec<usize> = (0..l_pu).collect();
    let mut sus: Vec<usize> = (0..l_su).collect();
    pus.shuffle(rng);
    sus.shuffle(rng);
    let mut trace = EngineTrace {
        puu_count: vec![0; l_pu],
        ..Default::default()
    };
    let mut pairs = Vec::new();
    let mut iteration = 0;
    for (&l, &q) in pus.iter().zip(&sus) {
        let (bargain, events) = bilateral_negotiation(market, l, q);
        trace.offers += bargain.offers;
        trace.responses += bargain.offers;
        trace.puu_count[l] += bargain.concessions;
        trace.events.extend(events.into_iter().map(|mut e| {
            e.iteration += iteration;
            e
        }));
        iteration += bargain.offers;
        if let Some((xi, beta)) = bargain.agreed {
            pairs.push(MatchedPair { pu: l, su: q, xi, beta });
        }
    }
    trace.iterations = iteration;
    (MatchingOutcome::from_pairs(l_pu, l_su, pairs), trace)
}
