//! Audit negotiated outcomes: blocking pairs, enumeration of all stable
//! matchings on a small grid, and the weak Pareto check.

use relay_match::{bench, dda, topology, verify, Market, ScenarioParams};

fn main() -> relay_match::Result<()> {
    let params = ScenarioParams { l_su: 4, ..Default::default() };
    let mut unstable = 0;
    for i in 0..200 {
        let seed = bench::trial_seed(params.seed, i);
        let market = Market::new(&params, &topology::realize(&params, seed)?)?;
        let (outcome, _) = dda::run(&market, params.concession_scope);
        let report = verify::is_stable(&market, &outcome)?;
        if !report.is_stable() {
            unstable += 1;
            println!("seed {seed}: {:?}", report.blocking_pairs.first());
        }
    }
    println!("default grid: {unstable} of 200 outcomes have a blocking pair\n");

    // coarse grid and two users per side, small enough to list every stable matching
    let tiny = ScenarioParams {
        l_pu: 2,
        l_su: 2,
        xi_init: 1.0,
        beta_init: 1.0,
        delta: 0.25,
        epsilon: 0.25,
        ..Default::default()
    };
    for i in 0..5 {
        let market = Market::new(&tiny, &topology::realize(&tiny, bench::trial_seed(7, i))?)?;
        let (outcome, _) = dda::run(&market, tiny.concession_scope);
        let audit = verify::audit_against_enumeration(&market, &outcome)?;
        let mine: Vec<String> = (0..2).map(|l| format!("{:.3}", outcome.pu_utility(&market, l))).collect();
        println!(
            "tiny #{i}: {} stable matchings, negotiated PU utilities [{}], PU-optimal: {}, weak Pareto: {}",
            audit.stable_matchings,
            mine.join(", "),
            audit.pu_optimality_violations.is_empty(),
            audit.weak_pareto.holds
        );
    }
    Ok(())
}
