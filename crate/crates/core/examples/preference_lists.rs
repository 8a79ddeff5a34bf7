//! Build the initial PU and SU preference lists for one realization.

use relay_match::prefs::{build_pulist, build_sulist, OfferBook};
use relay_match::{topology, Market, ScenarioParams};

fn main() -> relay_match::Result<()> {
    let params = ScenarioParams { l_pu: 3, l_su: 4, seed: 42, ..Default::default() };
    let market = Market::new(&params, &topology::realize(&params, params.seed)?)?;
    let (xi, beta) = (params.xi_init, params.beta_init);

    for l in 0..params.l_pu {
        let list = build_pulist(&market, l, xi, beta);
        let scored: Vec<String> = list
            .members
            .iter()
            .map(|&q| format!("SU{q} ({:.3})", market.utility_pu(l, q, xi, beta)))
            .collect();
        println!("PU {l} at (xi, beta) = ({xi}, {beta}): [{}]", scored.join(", "));
    }

    // opening offers leave the SUs almost no time, so nobody accepts them
    let mut book = OfferBook::new(params.l_pu, params.l_su, (xi, beta));
    for q in 0..params.l_su {
        println!("SU {q} at the opening offer accepts: {:?}", build_sulist(&market, q, &book).members);
    }
    // after some concessions, PU ℓ has come down to β = 0.8 − 0.1ℓ
    for q in 0..params.l_su {
        for l in 0..params.l_pu {
            book.record(q, l, 0.9, 0.8 - 0.1 * l as f64);
        }
        let list = build_sulist(&market, q, &book);
        let scored: Vec<String> = list
            .members
            .iter()
            .map(|&l| {
                let (xi, beta) = book.get(q, l);
                format!("PU{l} ({:.3})", market.utility_su(q, l, xi, beta))
            })
            .collect();
        println!("SU {q} after concessions, best first: [{}]", scored.join(", "));
    }
    Ok(())
}
