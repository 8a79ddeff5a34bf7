use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;

use common::random_market;
use relay_match::dda::{self, ConcessionBranch, Engine, EventKind, Steps};
use relay_match::{ConcessionScope, Market, Requirements, ScenarioParams};

const SCOPES: [ConcessionScope; 2] = [ConcessionScope::PerPair, ConcessionScope::PerPu];

fn market_for(seed: u64, l_pu: usize, l_su: usize) -> Market {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_market(&mut rng, l_pu, l_su, &ScenarioParams::default())
}

#[test]
fn hand_traced_single_pair() {
    // time is cheaper to give up (0.05·0.6 < 0.05), so β falls first; the SU
    // can pay 0.99 once (1 − β)·12 ≥ 0.99, i.e. from β = 0.89 on
    let params = ScenarioParams::default();
    let m = Market::from_rates(
        &params,
        vec![vec![0.6]],
        vec![vec![12.0]],
        Requirements { pu: vec![0.3], su: vec![0.1] },
    );
    let (out, trace) = dda::run(&m, ConcessionScope::PerPair);
    let kinds: Vec<EventKind> = trace.events.iter().map(|e| e.kind).collect();
    use EventKind::*;
    assert_eq!(kinds, vec![Offer, Reject, Puu, Offer, Reject, Puu, Offer, Accept]);
    let betas: Vec<f64> = trace.events.iter().filter(|e| e.kind == Offer).map(|e| e.beta).collect();
    for (b, want) in betas.iter().zip([0.99, 0.94, 0.89]) {
        assert!((b - want).abs() < 1e-12);
    }
    let p = out.pairs[0];
    assert!((p.xi - 0.99).abs() < 1e-12 && (p.beta - 0.89).abs() < 1e-12);
    assert_eq!(trace.packets(), 6);
    assert_eq!(trace.puu_count, vec![2]);
}

#[test]
fn concession_rule_reference_cases() {
    let params = ScenarioParams::default();
    let m = Market::from_rates(
        &params,
        vec![vec![1.0]],
        vec![vec![10.0]],
        Requirements { pu: vec![0.3], su: vec![0.1] },
    );
    let g = m.grid;
    // ξ = 0.04 cannot give up another 0.05
    let (s, b) = dda::concede(&m, 0, 0, Steps { xi: 19, beta: 9 });
    assert_eq!(b, ConcessionBranch::PriceExhausted);
    assert!((g.beta(s.beta) - 0.49).abs() < 1e-12 && s.xi == 19);
    // nothing left to give
    let (s, b) = dda::concede(&m, 0, 0, Steps { xi: 19, beta: 20 });
    assert_eq!((s, b), (Steps { xi: 19, beta: 20 }, ConcessionBranch::Stuck));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stepping_reproduces_run(seed in any::<u64>(), l_pu in 1usize..4, l_su in 1usize..6) {
        let m = market_for(seed, l_pu, l_su);
        for scope in SCOPES {
            let (out, trace) = dda::run(&m, scope);
            let mut e = Engine::new(&m, scope);
            let mut steps = 0;
            loop {
                let before = e.state().trace.offers;
                if !e.step() {
                    break;
                }
                steps += 1;
                prop_assert_eq!(e.state().trace.offers, before + 1);
            }
            let state = e.into_state();
            prop_assert_eq!(&state.trace, &trace);
            prop_assert_eq!(dda::outcome_of(&m, &state), out);
            prop_assert_eq!(steps, trace.offers);
            prop_assert_eq!(trace.iterations, trace.offers);
            prop_assert_eq!(trace.packets(), 2 * trace.offers);
        }
    }

    #[test]
    fn concessions_only_go_down(seed in any::<u64>(), l_pu in 1usize..4, l_su in 1usize..6) {
        let m = market_for(seed, l_pu, l_su);
        for scope in SCOPES {
            let mut e = Engine::new(&m, scope);
            let mut prev = e.state().concession.clone();
            while e.step() {
                let now = &e.state().concession;
                for (a, b) in prev.iter().flatten().zip(now.iter().flatten()) {
                    prop_assert!(b.xi >= a.xi && b.beta >= a.beta);
                }
                prev = now.clone();
            }
        }
    }

    #[test]
    fn held_offers_only_improve_for_sus(seed in any::<u64>(), l_pu in 1usize..4, l_su in 1usize..6) {
        let m = market_for(seed, l_pu, l_su);
        for scope in SCOPES {
            let mut e = Engine::new(&m, scope);
            let mut best = vec![f64::NEG_INFINITY; l_su];
            while e.step() {
                for (q, held) in e.state().held.iter().enumerate() {
                    if let Some(o) = held {
                        let u = m.utility_su(q, o.pu, o.xi, o.beta);
                        prop_assert!(u >= best[q]);
                        best[q] = u;
                    } else {
                        prop_assert!(best[q] == f64::NEG_INFINITY);
                    }
                }
            }
        }
    }

    #[test]
    fn outcomes_are_feasible_grid_points(seed in any::<u64>(), l_pu in 1usize..4, l_su in 1usize..6) {
        let m = market_for(seed, l_pu, l_su);
        for scope in SCOPES {
            let (out, trace) = dda::run(&m, scope);
            for p in &out.pairs {
                prop_assert!(m.grid.xi_step_of(p.xi).is_some());
                prop_assert!(m.grid.beta_step_of(p.beta).is_some());
                prop_assert!(m.pair_feasible(p.pu, p.su, p.xi, p.beta));
            }
            prop_assert!(out.matched_count() <= l_pu.min(l_su));
            let exits = trace.events.iter().filter(|e| e.kind == EventKind::Exit).count();
            prop_assert_eq!(exits + out.matched_count(), l_pu);
        }
    }
}
