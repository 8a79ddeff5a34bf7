//! Iteration and packet bounds next to measured counts, plus the
//! complexity estimates of the three schemes.

use relay_match::{bench, dda, topology, verify, Market, ScenarioParams};

fn main() -> relay_match::Result<()> {
    println!("{:>4} {:>4} {:>14} {:>9} {:>6}", "L_PU", "L_SU", "centralized", "proposed", "rmbn");
    for (a, b) in [(2, 2), (2, 3), (2, 6), (4, 8)] {
        let c = verify::complexity_estimates(a, b);
        println!("{a:>4} {b:>4} {:>14} {:>9} {:>6}", c.centralized, c.proposed, c.rmbn);
    }

    println!("\n seed  offers  I_max   packets  bound   concessions per PU (bound)");
    let params = ScenarioParams::default();
    for i in 0..8 {
        let seed = bench::trial_seed(params.seed, i);
        let market = Market::new(&params, &topology::realize(&params, seed)?)?;
        let (outcome, trace) = dda::run(&market, params.concession_scope);
        let audit = verify::audit_run(&market, &outcome, &trace)?;
        let per_pu: Vec<String> = (0..params.l_pu)
            .map(|l| format!("{} ({})", trace.puu_count[l], verify::puu_bound(&market, l)))
            .collect();
        println!(
            "{i:>5} {:>7} {:>6.2} {:>8} {:>7.1}   {}",
            trace.offers,
            verify::iteration_bound(&market),
            audit.packets,
            audit.packet_bound,
            per_pu.join(", ")
        );
    }
    Ok(())
}
