//! Distributed dynamic negotiation between primary and secondary pairs.
//!
//! Unmatched primary transmitters sit in a FIFO queue. The head of the
//! queue offers its current `(ξ, β)` to the first SU on its preference list.
//! The SU holds the best acceptable offer seen so far and rejects the rest.
//! Every rejected or displaced PU runs the proposal update unit: it concedes
//! one step on price or on time, rebuilds its list (pruning SUs that can no
//! longer meet its rate requirement) and rejoins the tail of the queue. A PU
//! whose list empties leaves the negotiation unmatched.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::Market;
use crate::outcome::{MatchedPair, MatchingOutcome};
use crate::params::ConcessionScope;
use crate::prefs::{self, Bid, OfferBook, PuPreferenceList};

/// Position on the allocation grid, as step counts from `(ξ_init, β_init)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Steps {
    pub xi: u32,
    pub beta: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Offer {
    pub pu: usize,
    pub su: usize,
    pub steps: Steps,
    pub xi: f64,
    pub beta: f64,
}

impl Offer {
    fn bid(&self) -> Bid {
        Bid {
            pu: self.pu,
            xi: self.xi,
            beta: self.beta,
        }
    }
}

/// Which rule of the proposal update unit fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcessionBranch {
    /// Price cannot drop further; time drops (floored at zero).
    PriceExhausted,
    /// Dropping time would break the rate requirement; price drops.
    RateFloor,
    /// Dropping time costs less utility than dropping price.
    CheaperTime,
    /// Dropping price costs no more than dropping time.
    CheaperPrice,
    /// Both coordinates are at their floor.
    Stuck,
}

/// One application of the concession rule to PU `ℓ` after SU `q` turned
/// it down.
pub fn concede(market: &Market, l: usize, q: usize, at: Steps) -> (Steps, ConcessionBranch) {
    let grid = &market.grid;
    let (xi, beta) = (grid.xi(at.xi), grid.beta(at.beta));
    let lower_beta = Steps { beta: at.beta + 1, ..at };
    let lower_xi = Steps { xi: at.xi + 1, ..at };
    let beta_down = grid.beta(at.beta + 1);
    if !grid.xi_can_drop(at.xi) {
        if beta <= 0.0 {
            (at, ConcessionBranch::Stuck)
        } else {
            (lower_beta, ConcessionBranch::PriceExhausted)
        }
    } else if market.rate_pu(l, q, beta_down) <= market.req.pu[l] {
        (lower_xi, ConcessionBranch::RateFloor)
    } else if market.utility_pu(l, q, grid.xi(at.xi + 1), beta) < market.utility_pu(l, q, xi, beta_down) {
        (lower_beta, ConcessionBranch::CheaperTime)
    } else {
        (lower_xi, ConcessionBranch::CheaperPrice)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Offer,
    Accept,
    Reject,
    Displace,
    Puu,
    Exit,
}

/// One record of the event log; `xi`/`beta` are the allocation the event
/// refers to (the offer, or the post-concession values for `puu`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub pu: usize,
    pub su: Option<usize>,
    pub xi: f64,
    pub beta: f64,
    pub iteration: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EngineTrace {
    pub events: Vec<Event>,
    pub offers: u64,
    pub responses: u64,
    pub iterations: u64,
    pub puu_count: Vec<u64>,
}

impl EngineTrace {
    /// One packet per offer plus one per accept/reject answer.
    pub fn packets(&self) -> u64 {
        self.offers + self.responses
    }

    /// Writes one JSON object per event, newline-terminated.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n").map_err(|e| Error::io("<trace>", e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineState {
    /// Unmatched PUs still negotiating, head first.
    pub queue: VecDeque<usize>,
    /// `[q]` offer currently held by each SU.
    pub held: Vec<Option<Offer>>,
    /// `[ℓ][q]` concession state; rows are uniform under per-PU scope.
    pub concession: Vec<Vec<Steps>>,
    pub pulists: Vec<PuPreferenceList>,
    pub book: OfferBook,
    pub trace: EngineTrace,
}

impl EngineState {
    pub fn is_terminal(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn partner_of_pu(&self, l: usize) -> Option<usize> {
        self.held.iter().position(|h| h.is_some_and(|o| o.pu == l))
    }
}

pub struct Engine<'a> {
    market: &'a Market,
    scope: ConcessionScope,
    state: EngineState,
}

impl<'a> Engine<'a> {
    pub fn new(market: &'a Market, scope: ConcessionScope) -> Self {
        let (l_pu, l_su) = (market.l_pu(), market.l_su());
        let grid = market.grid;
        let init = (grid.xi(0), grid.beta(0));
        let pulists: Vec<PuPreferenceList> = (0..l_pu)
            .map(|l| prefs::build_pulist(market, l, init.0, init.1))
            .collect();
        let mut state = EngineState {
            queue: VecDeque::with_capacity(l_pu),
            held: vec![None; l_su],
            concession: vec![vec![Steps::default(); l_su]; l_pu],
            pulists,
            book: OfferBook::new(l_pu, l_su, init),
            trace: EngineTrace {
                puu_count: vec![0; l_pu],
                ..Default::default()
            },
        };
        for l in 0..l_pu {
            if state.pulists[l].is_empty() {
                state.trace.events.push(Event {
                    kind: EventKind::Exit,
                    pu: l,
                    su: None,
                    xi: init.0,
                    beta: init.1,
                    iteration: 0,
                });
            } else {
                state.queue.push_back(l);
            }
        }
        Self {
            market,
            scope,
            state,
        }
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn into_state(self) -> EngineState {
        self.state
    }

    fn values(&self, s: Steps) -> (f64, f64) {
        (self.market.grid.xi(s.xi), self.market.grid.beta(s.beta))
    }

    fn log(&mut self, kind: EventKind, pu: usize, su: Option<usize>, xi: f64, beta: f64) {
        let iteration = self.state.trace.iterations;
        self.state.trace.events.push(Event {
            kind,
            pu,
            su,
            xi,
            beta,
            iteration,
        });
    }

    /// Processes one offer. Returns `false` (and leaves the state untouched)
    /// once the queue is empty.
    pub fn step(&mut self) -> bool {
        let Some(&l) = self.state.queue.front() else {
            return false;
        };
        let q = self.state.pulists[l]
            .first()
            .expect("queued PU has a non-empty list");
        let steps = self.state.concession[l][q];
        let (xi, beta) = self.values(steps);
        let offer = Offer {
            pu: l,
            su: q,
            steps,
            xi,
            beta,
        };

        self.state.trace.iterations += 1;
        self.state.trace.offers += 1;
        self.log(EventKind::Offer, l, Some(q), xi, beta);
        self.state.book.record(q, l, xi, beta);
        self.state.trace.responses += 1;

        let acceptable = self.market.su_accepts(q, l, xi, beta);
        match (acceptable, self.state.held[q]) {
            (true, None) => {
                self.accept(offer);
            }
            (true, Some(incumbent)) if prefs::su_prefers(self.market, q, offer.bid(), incumbent.bid()) => {
                self.accept(offer);
                self.log(EventKind::Displace, incumbent.pu, Some(q), incumbent.xi, incumbent.beta);
                self.update_proposal(incumbent.pu, q);
            }
            _ => {
                self.log(EventKind::Reject, l, Some(q), xi, beta);
                self.state.queue.pop_front();
                self.update_proposal(l, q);
            }
        }
        true
    }

    fn accept(&mut self, offer: Offer) {
        self.log(EventKind::Accept, offer.pu, Some(offer.su), offer.xi, offer.beta);
        self.state.held[offer.su] = Some(offer);
        let popped = self.state.queue.pop_front();
        debug_assert_eq!(popped, Some(offer.pu));
    }

    /// Proposal update unit for PU `ℓ` turned down (or displaced) by SU `q`.
    /// The caller has already taken `ℓ` out of the queue.
    fn update_proposal(&mut self, l: usize, q: usize) {
        let old = self.state.concession[l][q];
        let (new, branch) = concede(self.market, l, q, old);
        self.state.trace.puu_count[l] += 1;
        match self.scope {
            ConcessionScope::PerPu => self.state.concession[l].fill(new),
            ConcessionScope::PerPair => self.state.concession[l][q] = new,
        }
        let (xi, beta) = self.values(new);
        self.log(EventKind::Puu, l, Some(q), xi, beta);

        if branch == ConcessionBranch::Stuck {
            self.state.pulists[l] = PuPreferenceList {
                owner: l,
                members: Vec::new(),
                basis: Vec::new(),
            };
        } else {
            let row = &self.state.concession[l];
            let grid = self.market.grid;
            self.state.pulists[l] =
                prefs::build_pulist_with(self.market, l, |s| (grid.xi(row[s].xi), grid.beta(row[s].beta)));
        }

        if self.state.pulists[l].is_empty() {
            self.log(EventKind::Exit, l, None, xi, beta);
        } else {
            self.state.queue.push_back(l);
        }
    }

    pub fn run(mut self) -> (MatchingOutcome, EngineTrace) {
        while self.step() {}
        let outcome = outcome_of(self.market, &self.state);
        (outcome, self.state.trace)
    }
}

pub fn outcome_of(market: &Market, state: &EngineState) -> MatchingOutcome {
    MatchingOutcome::from_pairs(
        market.l_pu(),
        market.l_su(),
        state.held.iter().flatten().map(|o| MatchedPair {
            pu: o.pu,
            su: o.su,
            xi: o.xi,
            beta: o.beta,
        }),
    )
}

/// Runs the negotiation to completion.
pub fn run(market: &Market, scope: ConcessionScope) -> (MatchingOutcome, EngineTrace) {
    Engine::new(market, scope).run()
}
