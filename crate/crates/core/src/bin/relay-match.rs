use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relay_match::baselines::AssignmentSolver;
use relay_match::bench::{self, Algo, SweepAxis, TableRow};
use relay_match::verify;
use relay_match::{dda, topology, AfFormula, Error, Market, ScenarioParams};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_GUARD: u8 = 3;

#[derive(Parser)]
#[command(name = "relay-match", version, about = "Spectrum-leasing negotiation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run Monte Carlo trials for one scenario and write a CSV table.
    Run {
        #[command(flatten)]
        common: Common,
        /// Write the negotiation event log of the first trial as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Vary one parameter and write one CSV row per value and algorithm.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long)]
        values: String,
    },
    /// Check stability and overhead bounds of the negotiation on random instances.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Compare the negotiation with brute-force enumeration on tiny instances.
    Oracle {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON scenario file; defaults apply to missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated algorithm tags.
    #[arg(long, default_value = "dda-complete,dda-partial,centralized,rmbn")]
    algo: String,
    #[arg(long, value_parser = ["paper", "standard"])]
    af_formula: Option<String>,
    /// Use the Hungarian solver instead of enumeration for centralized baselines.
    #[arg(long)]
    hungarian: bool,
}

impl Common {
    fn params(&self) -> relay_match::Result<ScenarioParams> {
        let mut p = match &self.config {
            Some(path) => ScenarioParams::from_json_file(path)?,
            None => ScenarioParams::default(),
        };
        if let Some(seed) = self.seed {
            p.seed = seed;
        }
        match self.af_formula.as_deref() {
            Some("paper") => p.af_formula = AfFormula::Paper,
            Some("standard") => p.af_formula = AfFormula::Standard,
            _ => {}
        }
        p.validate()?;
        Ok(p)
    }

    fn solver(&self) -> AssignmentSolver {
        if self.hungarian {
            AssignmentSolver::Hungarian
        } else {
            AssignmentSolver::Exhaustive
        }
    }

    fn output(&self) -> relay_match::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?)),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn io_err(path: &Path, source: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_values(s: &str) -> relay_match::Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| Error::Usage(format!("`{v}` is not a number"))))
        .collect()
}

fn write_table(common: &Common, rows: &[TableRow]) -> relay_match::Result<()> {
    match &common.out {
        Some(path) => bench::emit_csv(rows, path),
        None => bench::write_csv(rows, io::stdout().lock()),
    }
}

fn run(common: &Common, trace: Option<&Path>) -> relay_match::Result<()> {
    let params = common.params()?;
    let algos = Algo::parse_list(&common.algo)?;
    let aggregates = bench::run_trials(&params, &algos, common.trials, common.solver())?;
    write_table(common, &bench::table_for_run(&params, aggregates))?;
    if let Some(path) = trace {
        let realization = topology::realize(&params, bench::trial_seed(params.seed, 0))?;
        let market = Market::new(&params, &realization)?;
        let (_, events) = dda::run(&market, params.concession_scope);
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        events.write_jsonl(BufWriter::new(file))?;
    }
    Ok(())
}

fn sweep(common: &Common, axis: &str, values: &str) -> relay_match::Result<()> {
    let params = common.params()?;
    let axis: SweepAxis = axis.parse()?;
    let values = parse_values(values)?;
    let algos = Algo::parse_list(&common.algo)?;
    let rows = bench::sweep(&params, axis, &values, &algos, common.trials, common.solver())?;
    write_table(common, &rows)
}

/// Returns whether every instance passed.
fn verify_runs(common: &Common) -> relay_match::Result<bool> {
    let params = common.params()?;
    let mut out = common.output()?;
    let w = |e: io::Error| Error::Io {
        path: PathBuf::from("<report>"),
        source: e,
    };
    let mut failures = 0;
    for i in 0..common.trials as u64 {
        let seed = bench::trial_seed(params.seed, i);
        let realization = topology::realize(&params, seed)?;
        let market = Market::new(&params, &realization)?;
        let (outcome, trace) = dda::run(&market, params.concession_scope);
        let audit = verify::audit_run(&market, &outcome, &trace)?;
        if !audit.passed() {
            failures += 1;
            writeln!(
                out,
                "FAIL trial={i} seed={seed} blocking_pairs={} blocked_individuals={} puu_overruns={} \
                 iterations={}/{:.2} packets={}/{:.2}",
                audit.stability.blocking_pairs.len(),
                audit.stability.blocked_individuals.len(),
                audit.puu_overruns.len(),
                audit.iterations,
                audit.iteration_limit,
                audit.packets,
                audit.packet_bound,
            )
            .map_err(w)?;
        }
    }
    writeln!(out, "verified {} instances: {} passed, {failures} failed", common.trials, common.trials - failures)
        .map_err(w)?;
    Ok(failures == 0)
}

fn oracle(common: &Common) -> relay_match::Result<bool> {
    let mut params = match &common.config {
        Some(_) => common.params()?,
        None => ScenarioParams {
            l_pu: 2,
            l_su: 2,
            xi_init: 1.0,
            beta_init: 1.0,
            delta: 0.25,
            epsilon: 0.25,
            ..Default::default()
        },
    };
    if common.config.is_none() {
        if let Some(seed) = common.seed {
            params.seed = seed;
        }
        if let Some(f) = common.af_formula.as_deref() {
            params.af_formula = if f == "standard" { AfFormula::Standard } else { AfFormula::Paper };
        }
    }
    let mut out = common.output()?;
    let w = |e: io::Error| Error::Io {
        path: PathBuf::from("<report>"),
        source: e,
    };
    let mut failures = 0;
    for i in 0..common.trials as u64 {
        let seed = bench::trial_seed(params.seed, i);
        let realization = topology::realize(&params, seed)?;
        let market = Market::new(&params, &realization)?;
        let (outcome, _) = dda::run(&market, params.concession_scope);
        let audit = verify::audit_against_enumeration(&market, &outcome)?;
        let exhaustive = relay_match::baselines::centralized_pu_optimal(
            &market,
            relay_match::baselines::AllocationDomain::Discrete,
            AssignmentSolver::Exhaustive,
        )?;
        let hungarian = relay_match::baselines::centralized_pu_optimal(
            &market,
            relay_match::baselines::AllocationDomain::Discrete,
            AssignmentSolver::Hungarian,
        )?;
        let solvers_agree = (exhaustive.sum_utility_pu(&market) - hungarian.sum_utility_pu(&market)).abs() <= 1e-9;
        let dominated = exhaustive.sum_utility_pu(&market) + 1e-9 >= outcome.sum_utility_pu(&market);
        if !(audit.passed() && solvers_agree && dominated) {
            failures += 1;
            writeln!(
                out,
                "FAIL trial={i} seed={seed} stable_matchings={} pu_optimality_violations={} weak_pareto={} \
                 solvers_agree={solvers_agree} centralized_dominates={dominated}",
                audit.stable_matchings,
                audit.pu_optimality_violations.len(),
                audit.weak_pareto.holds,
            )
            .map_err(w)?;
        }
    }
    writeln!(out, "oracle checked {} instances: {} passed, {failures} failed", common.trials, common.trials - failures)
        .map_err(w)?;
    Ok(failures == 0)
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Guard { .. } => EXIT_GUARD,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { common, trace } => run(common, trace.as_deref()).map(|()| true),
        Command::Sweep { common, axis, values } => sweep(common, axis, values).map(|()| true),
        Command::Verify { common } => verify_runs(common),
        Command::Oracle { common } => oracle(common),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERIFY),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
