//! The same realization negotiated with exact ST-PR channel knowledge and
//! with only its average, comparing estimated and realized PU rates.

use relay_match::{dda, topology, Market, ScenarioParams, SnrKnowledge};

fn main() -> relay_match::Result<()> {
    let params = ScenarioParams { l_su: 4, seed: 9, ..Default::default() };
    let r = topology::realize(&params, params.seed)?;
    let complete = Market::with_knowledge(&params, &r, SnrKnowledge::Complete)?;
    let partial = Market::with_knowledge(&params, &r, SnrKnowledge::Partial)?;

    println!(" pair  realized rate/beta  expected rate/beta");
    for l in 0..params.l_pu {
        for q in 0..params.l_su {
            println!(
                " ({l},{q})  {:18.4}  {:18.4}",
                complete.pu_rate_per_beta[l][q], partial.pu_rate_per_beta[l][q]
            );
        }
    }

    for (name, market) in [("complete", &complete), ("partial", &partial)] {
        let (outcome, trace) = dda::run(market, params.concession_scope);
        let pairs: Vec<String> = outcome
            .pairs
            .iter()
            .map(|p| format!("PU{}-SU{} ({:.2}, {:.2})", p.pu, p.su, p.xi, p.beta))
            .collect();
        println!(
            "{name:>8}: [{}]  realized sum U_PU {:.4}, believed {:.4}, {} offers",
            pairs.join(", "),
            outcome.realized_sum_utility_pu(market),
            outcome.sum_utility_pu(market),
            trace.offers
        );
    }
    Ok(())
}
