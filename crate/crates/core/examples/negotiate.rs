//! Step the negotiation engine offer by offer and print the event log,
//! then write it as JSON lines.
//!
//! cargo run --example negotiate -- [seed] [trace.jsonl]

use std::fs::File;
use std::io::BufWriter;

use relay_match::dda::{Engine, EventKind};
use relay_match::{topology, Market, ScenarioParams};

fn main() -> relay_match::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let params = ScenarioParams { l_su: 3, seed, ..Default::default() };
    let market = Market::new(&params, &topology::realize(&params, seed)?)?;

    let mut engine = Engine::new(&market, params.concession_scope);
    let mut shown = 0;
    while engine.step() {
        let events = &engine.state().trace.events;
        for e in &events[shown..] {
            let who = e.su.map(|q| format!("SU{q}")).unwrap_or_else(|| "-".into());
            let tag = match e.kind {
                EventKind::Puu => "concede",
                _ => "",
            };
            let kind = format!("{:?}", e.kind);
            println!("#{:<3} PU{} {kind:<9} {who:<4} xi={:.2} beta={:.2} {tag}", e.iteration, e.pu, e.xi, e.beta);
        }
        shown = events.len();
    }
    let (outcome, trace) = engine.run();
    println!("\n{} offers, {} packets", trace.offers, trace.packets());
    for p in &outcome.pairs {
        println!(
            "PU{} - SU{} at xi={:.2} beta={:.2}: U_PU={:.4} U_SU={:.4}",
            p.pu,
            p.su,
            p.xi,
            p.beta,
            market.utility_pu(p.pu, p.su, p.xi, p.beta),
            market.utility_su(p.su, p.pu, p.xi, p.beta)
        );
    }
    if let Some(path) = args.next() {
        trace.write_jsonl(BufWriter::new(File::create(&path).map_err(|e| relay_match::Error::io(&path, e))?))?;
        println!("trace written to {path}");
    }
    Ok(())
}
