//! Compare the negotiation with the centralized assignments and the
//! random-matching baseline over a batch of trials.

use relay_match::baselines::AssignmentSolver;
use relay_match::bench::{self, Algo};
use relay_match::ScenarioParams;

fn main() -> relay_match::Result<()> {
    let params = ScenarioParams { l_su: 10, epsilon: 0.1, delta: 0.1, ..Default::default() };
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let aggs = bench::run_trials(&params, &Algo::ALL, n, AssignmentSolver::Hungarian)?;
    let reference = aggs.iter().find(|a| a.algo == Algo::Centralized).map(|a| a.mean_sum_utility_pu);

    println!("{n} trials, L_PU = {}, L_SU = {}", params.l_pu, params.l_su);
    println!("{:<22} {:>10} {:>8} {:>10} {:>10} {:>8}", "algorithm", "sum U_PU", "se", "R_PU", "R_SU", "match %");
    for a in &aggs {
        println!(
            "{:<22} {:>10.4} {:>8.4} {:>10.4} {:>10.4} {:>8.2}",
            a.algo.tag(),
            a.mean_sum_utility_pu,
            a.se_sum_utility_pu,
            a.mean_sum_rate_pu,
            a.mean_sum_rate_su,
            a.match_pct
        );
    }
    if let Some(c) = reference {
        for a in &aggs {
            println!("{:<22} {:>7.2}% of centralized", a.algo.tag(), 100.0 * a.mean_sum_utility_pu / c);
        }
    }
    Ok(())
}
