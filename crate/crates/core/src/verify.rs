//! Stability, weak Pareto optimality and overhead bounds.

use serde::{Deserialize, Serialize};

use crate::baselines::{for_each_matching, pair_optimum_discrete, partial_matching_count};
use crate::error::{Error, Result};
use crate::grid::OfferGrid;
use crate::market::Market;
use crate::outcome::{MatchedPair, MatchingOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Pu,
    Su,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockReason {
    /// PU rate below its requirement.
    PuRate,
    /// SU rate below its requirement.
    SuRate,
    /// SU utility negative.
    SuUtility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockedIndividual {
    pub side: Side,
    pub index: usize,
    pub reason: BlockReason,
}

/// A pair outside the matching together with a feasible grid allocation
/// that both would strictly prefer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockingPair {
    pub pu: usize,
    pub su: usize,
    pub xi: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub blocked_individuals: Vec<BlockedIndividual>,
    pub blocking_pairs: Vec<BlockingPair>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.blocked_individuals.is_empty() && self.blocking_pairs.is_empty()
    }
}

fn check_on_grid(grid: &OfferGrid, p: &MatchedPair) -> Result<()> {
    if grid.xi_step_of(p.xi).is_none() || grid.beta_step_of(p.beta).is_none() {
        return Err(Error::OffGrid {
            pu: p.pu,
            su: p.su,
            xi: p.xi,
            beta: p.beta,
        });
    }
    Ok(())
}

fn individual_blocks(market: &Market, outcome: &MatchingOutcome) -> Vec<BlockedIndividual> {
    let mut out = Vec::new();
    for p in &outcome.pairs {
        if !market.pu_accepts(p.pu, p.su, p.beta) {
            out.push(BlockedIndividual { side: Side::Pu, index: p.pu, reason: BlockReason::PuRate });
        }
        if market.rate_su(p.su, p.pu, p.beta) < market.req.su[p.su] {
            out.push(BlockedIndividual { side: Side::Su, index: p.su, reason: BlockReason::SuRate });
        } else if market.utility_su(p.su, p.pu, p.xi, p.beta) < 0.0 {
            out.push(BlockedIndividual { side: Side::Su, index: p.su, reason: BlockReason::SuUtility });
        }
    }
    out
}

/// First grid allocation (largest β, then largest ξ) at which `(ℓ, q)` is
/// feasible and both strictly beat the given utilities.
pub fn blocking_witness(
    market: &Market,
    grid: &OfferGrid,
    l: usize,
    q: usize,
    pu_now: f64,
    su_now: f64,
) -> Option<(f64, f64)> {
    for (_, beta) in grid.beta_points() {
        if !market.pu_accepts(l, q, beta) {
            // rate grows with β, so every smaller β fails too
            break;
        }
        for (_, xi) in grid.xi_points() {
            if market.pair_feasible(l, q, xi, beta)
                && market.utility_pu(l, q, xi, beta) > pu_now
                && market.utility_su(q, l, xi, beta) > su_now
            {
                return Some((xi, beta));
            }
        }
    }
    None
}

/// Checks individual rationality and the absence of blocking pairs with
/// witnesses drawn from the market's grid. Unmatched users hold utility 0.
///
/// # Errors
/// [`Error::OffGrid`] if a matched allocation is not a grid point.
pub fn is_stable(market: &Market, outcome: &MatchingOutcome) -> Result<StabilityReport> {
    is_stable_on(market, outcome, &market.grid)
}

pub fn is_stable_on(market: &Market, outcome: &MatchingOutcome, grid: &OfferGrid) -> Result<StabilityReport> {
    for p in &outcome.pairs {
        check_on_grid(grid, p)?;
    }
    let blocked_individuals = individual_blocks(market, outcome);
    let mut blocking_pairs = Vec::new();
    for l in 0..market.l_pu() {
        let pu_now = outcome.pu_utility(market, l);
        for q in 0..market.l_su() {
            if outcome.pair_of_pu(l).is_some_and(|p| p.su == q) {
                continue;
            }
            let su_now = outcome.su_utility(market, q);
            if let Some((xi, beta)) = blocking_witness(market, grid, l, q, pu_now, su_now) {
                blocking_pairs.push(BlockingPair { pu: l, su: q, xi, beta });
            }
        }
    }
    Ok(StabilityReport {
        blocked_individuals,
        blocking_pairs,
    })
}

/// Bound on instance size for exhaustive stable-matching enumeration.
pub const ENUMERATION_LIMIT: usize = 3;
pub const ENUMERATION_GRID_LIMIT: usize = 6;

/// Every grid-valued matching that passes [`is_stable_on`]. Only for tiny
/// instances (at most 3 users per side, at most 6 points per grid axis).
pub fn enumerate_stable_matchings(market: &Market, grid: &OfferGrid) -> Result<Vec<MatchingOutcome>> {
    let (l_pu, l_su) = (market.l_pu(), market.l_su());
    let (nx, nb) = grid.size();
    if l_pu > ENUMERATION_LIMIT || l_su > ENUMERATION_LIMIT || nx > ENUMERATION_GRID_LIMIT || nb > ENUMERATION_GRID_LIMIT {
        return Err(Error::Guard {
            what: "stable matching enumeration",
            detail: format!(
                "{l_pu}x{l_su} users on a {nx}x{nb} grid exceeds {ENUMERATION_LIMIT} users per side \
                 and {ENUMERATION_GRID_LIMIT} points per axis"
            ),
        });
    }
    let points: Vec<(f64, f64)> = grid
        .beta_points()
        .flat_map(|(_, b)| grid.xi_points().map(move |(_, x)| (x, b)))
        .collect();
    let mut stable = Vec::new();
    let mut failure = None;
    for_each_matching(l_pu, l_su, |assignment| {
        if failure.is_some() {
            return;
        }
        let matched: Vec<(usize, usize)> = assignment
            .iter()
            .enumerate()
            .filter_map(|(l, q)| q.map(|q| (l, q)))
            .collect();
        let options: Vec<Vec<(f64, f64)>> = matched
            .iter()
            .map(|&(l, q)| points.iter().copied().filter(|&(x, b)| market.pair_feasible(l, q, x, b)).collect())
            .collect();
        if options.iter().any(Vec::is_empty) {
            return;
        }
        let mut idx = vec![0usize; matched.len()];
        loop {
            let outcome = MatchingOutcome::from_pairs(
                l_pu,
                l_su,
                matched.iter().zip(&idx).enumerate().map(|(k, (&(pu, su), &i))| {
                    let (xi, beta) = options[k][i];
                    MatchedPair { pu, su, xi, beta }
                }),
            );
            match is_stable_on(market, &outcome, grid) {
                Ok(r) if r.is_stable() => stable.push(outcome),
                Ok(_) => {}
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
            // odometer over the allocation choices
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return;
                }
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(stable),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoReport {
    /// No alternative makes every matched PU strictly better off.
    pub holds: bool,
    /// An alternative that does, if one exists.
    pub witness: Option<MatchingOutcome>,
}

/// Weak Pareto optimality for the PUs matched in `outcome`: searches every
/// matching and grid allocation for one that strictly improves all of them.
/// Allocations are chosen per pair, so the search is over matchings only.
pub fn check_weak_pareto(market: &Market, outcome: &MatchingOutcome) -> Result<ParetoReport> {
    let (l_pu, l_su) = (market.l_pu(), market.l_su());
    let limit = partial_matching_count(8, 8);
    if partial_matching_count(l_pu, l_su) > limit {
        return Err(Error::Guard {
            what: "weak pareto search",
            detail: format!("{l_pu}x{l_su} exceeds the 8x8 enumeration limit"),
        });
    }
    let targets: Vec<(usize, f64)> = outcome
        .pairs
        .iter()
        .map(|p| (p.pu, market.utility_pu(p.pu, p.su, p.xi, p.beta)))
        .collect();
    if targets.is_empty() {
        return Ok(ParetoReport { holds: true, witness: None });
    }
    let best: Vec<Vec<_>> = (0..l_pu)
        .map(|l| (0..l_su).map(|q| pair_optimum_discrete(market, l, q)).collect())
        .collect();
    let mut witness = None;
    for_each_matching(l_pu, l_su, |a| {
        if witness.is_some() {
            return;
        }
        let improves = targets.iter().all(|&(l, u)| {
            a[l].is_some_and(|q| best[l][q].feasible && best[l][q].value > u)
        });
        if improves {
            witness = Some(MatchingOutcome::from_pairs(
                l_pu,
                l_su,
                targets.iter().map(|&(l, _)| {
                    let v = best[l][a[l].expect("checked above")];
                    MatchedPair { pu: l, su: v.su, xi: v.xi, beta: v.beta }
                }),
            ));
        }
    });
    Ok(ParetoReport {
        holds: witness.is_none(),
        witness,
    })
}

/// Smallest `β_min` over all pairs, clamped to `[0, β_init]`.
pub fn beta_min_floor(market: &Market) -> f64 {
    (0..market.l_pu())
        .map(|l| beta_min_of_pu(market, l))
        .fold(market.grid.beta_init, f64::min)
}

/// Smallest `β_min` over PU `ℓ`'s pairs, clamped to `[0, β_init]`.
pub fn beta_min_of_pu(market: &Market, l: usize) -> f64 {
    let b = (0..market.l_su())
        .map(|q| market.thresholds(l, q).beta_min)
        .fold(f64::INFINITY, f64::min);
    b.clamp(0.0, market.grid.beta_init)
}

/// `ξ_init/δ + (β_init − β^MIN)/ϵ`: the most concessions any one PU can make.
pub fn iteration_bound(market: &Market) -> f64 {
    let g = market.grid;
    g.xi_init / g.delta + (g.beta_init - beta_min_floor(market)) / g.epsilon
}

/// Per-PU concession budget, rounded up, plus the final exit.
pub fn puu_bound(market: &Market, l: usize) -> u64 {
    let g = market.grid;
    let b = g.xi_init / g.delta + (g.beta_init - beta_min_of_pu(market, l)) / g.epsilon;
    (b - 1e-9).ceil().max(0.0) as u64 + 1
}

/// `(L_PU + max(L_PU, L_SU)) · I_max`.
pub fn packet_bound(market: &Market) -> f64 {
    let (a, b) = (market.l_pu() as f64, market.l_su() as f64);
    (a + a.max(b)) * iteration_bound(market)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexityEstimates {
    pub centralized: f64,
    pub proposed: f64,
    pub rmbn: f64,
}

/// Scaling indicators: `n!/(n−k)! · 2^{2L_SU+L_PU}` with `n ≥ k` the larger
/// and smaller side for the centralized search, `L_PU·L_SU` for the
/// negotiation and `L_PU` for the random matching.
pub fn complexity_estimates(l_pu: usize, l_su: usize) -> ComplexityEstimates {
    let (a, b) = (l_pu as f64, l_su as f64);
    let (n, k) = (l_pu.max(l_su), l_pu.min(l_su));
    let arrangements: f64 = (n - k + 1..=n).map(|i| i as f64).product();
    ComplexityEstimates {
        centralized: arrangements * 2f64.powf(2.0 * b + a),
        proposed: a * b,
        rmbn: a,
    }
}

/// Property checks for one negotiation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAudit {
    pub stability: StabilityReport,
    /// `(ℓ, count, bound)` for each PU whose concession count exceeds its bound.
    pub puu_overruns: Vec<(usize, u64, u64)>,
    pub iterations: u64,
    pub iteration_limit: f64,
    pub packets: u64,
    pub packet_bound: f64,
}

impl RunAudit {
    pub fn stable(&self) -> bool {
        self.stability.is_stable()
    }

    pub fn within_puu_bound(&self) -> bool {
        self.puu_overruns.is_empty()
    }

    pub fn within_iteration_limit(&self) -> bool {
        self.iterations as f64 <= self.iteration_limit
    }

    pub fn within_packet_bound(&self) -> bool {
        self.packets as f64 <= self.packet_bound
    }

    pub fn passed(&self) -> bool {
        self.stable() && self.within_puu_bound() && self.within_iteration_limit() && self.within_packet_bound()
    }
}

/// Checks a finished run against stability and the overhead bounds.
pub fn audit_run(market: &Market, outcome: &MatchingOutcome, trace: &crate::dda::EngineTrace) -> Result<RunAudit> {
    let stability = is_stable(market, outcome)?;
    let puu_overruns = (0..market.l_pu())
        .filter_map(|l| {
            let bound = puu_bound(market, l);
            let count = trace.puu_count[l];
            (count > bound).then_some((l, count, bound))
        })
        .collect();
    Ok(RunAudit {
        stability,
        puu_overruns,
        iterations: trace.iterations,
        iteration_limit: market.l_pu() as f64 * (iteration_bound(market) + 1.0),
        packets: trace.packets(),
        packet_bound: packet_bound(market),
    })
}

/// Enumeration-based checks on a tiny instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleAudit {
    pub stable_matchings: usize,
    /// `(ℓ, negotiated utility, better utility in some stable matching)`.
    pub pu_optimality_violations: Vec<(usize, f64, f64)>,
    pub weak_pareto: ParetoReport,
}

impl OracleAudit {
    pub fn passed(&self) -> bool {
        self.pu_optimality_violations.is_empty() && self.weak_pareto.holds
    }
}

/// Compares a negotiated outcome with every stable matching on the grid and
/// with every alternative matching.
pub fn audit_against_enumeration(market: &Market, outcome: &MatchingOutcome) -> Result<OracleAudit> {
    let stable = enumerate_stable_matchings(market, &market.grid)?;
    let mut violations = Vec::new();
    for p in &outcome.pairs {
        let mine = outcome.pu_utility(market, p.pu);
        let best = stable
            .iter()
            .map(|s| s.pu_utility(market, p.pu))
            .fold(f64::NEG_INFINITY, f64::max);
        if best > mine + 1e-9 {
            violations.push((p.pu, mine, best));
        }
    }
    Ok(OracleAudit {
        stable_matchings: stable.len(),
        pu_optimality_violations: violations,
        weak_pareto: check_weak_pareto(market, outcome)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::Requirements;
    use crate::params::ScenarioParams;

    fn market(pu: Vec<Vec<f64>>, su: Vec<Vec<f64>>, pu_req: Vec<f64>) -> Market {
        let n = su.len();
        Market::from_rates(&ScenarioParams::default(), pu, su, Requirements { pu: pu_req, su: vec![0.1; n] })
    }

    #[test]
    fn complexity_values() {
        assert_eq!(complexity_estimates(2, 2).centralized, 128.0);
        assert_eq!(complexity_estimates(2, 3).centralized, 1536.0);
        assert_eq!(complexity_estimates(3, 2).centralized, 6.0 * 128.0);
        assert_eq!(complexity_estimates(4, 7).proposed, 28.0);
        assert_eq!(complexity_estimates(2, 3).rmbn, 2.0);
    }

    #[test]
    fn iteration_bound_reference() {
        // req / rate = 0.4608
        let m = market(vec![vec![1.0, 2.0]], vec![vec![10.0], vec![10.0]], vec![0.9216]);
        assert!((iteration_bound(&m) - 30.384).abs() < 1e-9);
        assert_eq!(puu_bound(&m, 0), 32);
        assert!((packet_bound(&m) - 3.0 * 30.384).abs() < 1e-9);
    }

    #[test]
    fn empty_outcome_has_blocking_pairs() {
        let m = market(vec![vec![0.6]], vec![vec![20.0]], vec![0.3]);
        let r = is_stable(&m, &MatchingOutcome::empty(1, 1)).unwrap();
        assert!(!r.is_stable());
        assert_eq!(r.blocking_pairs.len(), 1);
    }

    #[test]
    fn off_grid_outcome_is_an_error() {
        let m = market(vec![vec![0.6]], vec![vec![20.0]], vec![0.3]);
        let o = MatchingOutcome::from_pairs(1, 1, [MatchedPair { pu: 0, su: 0, xi: 0.333, beta: 0.9 }]);
        assert!(matches!(is_stable(&m, &o), Err(Error::OffGrid { .. })));
    }

    #[test]
    fn individual_violations_are_reported() {
        let m = market(vec![vec![0.6]], vec![vec![20.0]], vec![0.3]);
        let o = MatchingOutcome::from_pairs(1, 1, [MatchedPair { pu: 0, su: 0, xi: 0.99, beta: 0.14 }]);
        let r = is_stable(&m, &o).unwrap();
        assert!(r.blocked_individuals.iter().any(|b| b.reason == BlockReason::PuRate));
    }

    #[test]
    fn enumeration_guard() {
        let m = market(vec![vec![0.6]], vec![vec![20.0]], vec![0.3]);
        assert!(matches!(enumerate_stable_matchings(&m, &m.grid), Err(Error::Guard { .. })));
        let small = OfferGrid::new(1.0, 0.25, 1.0, 0.25);
        let s = enumerate_stable_matchings(&m, &small).unwrap();
        assert!(!s.is_empty());
    }
}
