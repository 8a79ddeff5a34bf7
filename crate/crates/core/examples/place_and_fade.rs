//! Draw one realization and print geometry, fading-driven SNRs and the
//! per-pair rate thresholds that follow from them.
//!
//! cargo run --example place_and_fade -- [seed]

use relay_match::radio::{self, relay_snr};
use relay_match::{topology, AfFormula, Market, ScenarioParams};

fn main() -> relay_match::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let params = ScenarioParams { l_su: 3, ..Default::default() };
    let r = topology::realize(&params, seed)?;

    for (l, (pt, pr)) in r.placement.pt_pos.iter().zip(&r.placement.pr_pos).enumerate() {
        println!(
            "PU {l}: PT ({:6.3},{:6.3}) -> PR ({:6.3},{:6.3})  d = {:.3}  direct SNR = {:.3}",
            pt.x, pt.y, pr.x, pr.y, r.distances.pt_pr[l], r.snr.gamma_dir[l]
        );
    }
    for (q, st) in r.placement.st_pos.iter().enumerate() {
        println!("SU {q}: ST ({:6.3},{:6.3})  ST-SR d = {:.3}", st.x, st.y, r.distances.st_sr[q]);
    }

    let market = Market::new(&params, &r)?;
    println!("\n pair  relay(paper)  relay(standard)  rate/beta  beta_min  beta_max");
    for l in 0..params.l_pu {
        for q in 0..params.l_su {
            let (g1, g2) = (r.snr.gamma_pt_st[l][q], r.snr.gamma_st_pr[l][q]);
            let t = market.thresholds(l, q);
            println!(
                " ({l},{q})  {:12.4}  {:15.4}  {:9.4}  {:8.4}  {:8.4}{}",
                relay_snr(g1, g2, AfFormula::Paper),
                relay_snr(g1, g2, AfFormula::Standard),
                market.pu_rate_per_beta[l][q],
                t.beta_min,
                t.beta_max,
                if t.feasible { "" } else { "  infeasible" }
            );
        }
    }
    for l in 0..params.l_pu {
        println!("PU {l} must keep its direct rate {:.4}", radio::direct_rate(&r.snr, &params, l));
    }
    Ok(())
}
