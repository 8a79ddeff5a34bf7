//! Sweep one parameter and write the table as CSV, then read it back.
//!
//! cargo run --release --example sweep_csv -- [out.csv]

use relay_match::baselines::AssignmentSolver;
use relay_match::bench::{self, Algo, SweepAxis};
use relay_match::ScenarioParams;

fn main() -> relay_match::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "gamma_su_sweep.csv".into());
    let params = ScenarioParams { l_su: 2, ..Default::default() };
    let rows = bench::sweep(
        &params,
        SweepAxis::GammaSuDb,
        &[5.0, 10.0, 15.0, 20.0, 25.0],
        &[Algo::DdaComplete, Algo::DdaPartial, Algo::Rmbn],
        400,
        AssignmentSolver::Exhaustive,
    )?;
    bench::emit_csv(&rows, &out)?;
    for r in bench::read_csv_file(&out)? {
        println!(
            "{} {:<13} gamma_su={:>4} dB  matched {:6.2}%  p90 packets {}",
            r.scenario_id,
            r.algo.tag(),
            r.axis_value.unwrap_or_default(),
            r.match_pct,
            r.p90_packets
        );
    }
    println!("wrote {out}");
    Ok(())
}
