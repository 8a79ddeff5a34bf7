//! Monte Carlo trials, aggregation, parameter sweeps and CSV tables.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{self, AllocationDomain, AssignmentSolver};
use crate::dda;
use crate::error::{Error, Result};
use crate::market::Market;
use crate::outcome::MatchingOutcome;
use crate::params::{ScenarioParams, SnrKnowledge};
use crate::topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    DdaComplete,
    DdaPartial,
    /// PU-optimal centralized assignment, continuous allocations.
    Centralized,
    /// PU-optimal centralized assignment on the negotiation grid.
    CentralizedDiscrete,
    CentralizedSu,
    Rmbn,
}

impl Algo {
    pub const ALL: [Algo; 6] = [
        Algo::DdaComplete,
        Algo::DdaPartial,
        Algo::Centralized,
        Algo::CentralizedDiscrete,
        Algo::CentralizedSu,
        Algo::Rmbn,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Algo::DdaComplete => "dda-complete",
            Algo::DdaPartial => "dda-partial",
            Algo::Centralized => "centralized",
            Algo::CentralizedDiscrete => "centralized-discrete",
            Algo::CentralizedSu => "centralized-su",
            Algo::Rmbn => "rmbn",
        }
    }

    /// Parses a comma-separated list of tags.
    pub fn parse_list(s: &str) -> Result<Vec<Algo>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| Error::Usage(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub algo: Algo,
    pub seed: u64,
    pub sum_utility_pu: f64,
    pub sum_rate_pu: f64,
    pub sum_rate_su: f64,
    pub matched_pu_count: usize,
    pub packets: u64,
    pub iterations: u64,
}

impl TrialMetrics {
    fn from_outcome(algo: Algo, seed: u64, market: &Market, outcome: &MatchingOutcome, packets: u64, iterations: u64) -> Self {
        Self {
            algo,
            seed,
            sum_utility_pu: outcome.realized_sum_utility_pu(market),
            sum_rate_pu: outcome.realized_sum_rate_pu(market),
            sum_rate_su: outcome.sum_rate_su(market),
            matched_pu_count: outcome.matched_count(),
            packets,
            iterations,
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under master seed `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ index)
}

/// Stream used for the random matching, kept apart from the channel draws.
const RMBN_STREAM: u64 = 0x726d_626e;

/// Runs every requested algorithm on the realization drawn from `seed`.
pub fn run_trial(
    params: &ScenarioParams,
    algos: &[Algo],
    seed: u64,
    solver: AssignmentSolver,
) -> Result<Vec<TrialMetrics>> {
    let realization = topology::realize(params, seed)?;
    let mut complete = None;
    let mut complete_market = || -> Result<Market> {
        if complete.is_none() {
            complete = Some(Market::with_knowledge(params, &realization, SnrKnowledge::Complete)?);
        }
        Ok(complete.clone().expect("just set"))
    };
    let mut out = Vec::with_capacity(algos.len());
    for &algo in algos {
        let metrics = match algo {
            Algo::DdaComplete | Algo::DdaPartial => {
                let market = if algo == Algo::DdaComplete {
                    complete_market()?
                } else {
                    Market::with_knowledge(params, &realization, SnrKnowledge::Partial)?
                };
                let (outcome, trace) = dda::run(&market, params.concession_scope);
                TrialMetrics::from_outcome(algo, seed, &market, &outcome, trace.packets(), trace.iterations)
            }
            Algo::Centralized | Algo::CentralizedDiscrete => {
                let market = complete_market()?;
                let domain = if algo == Algo::Centralized {
                    AllocationDomain::Continuous
                } else {
                    AllocationDomain::Discrete
                };
                let outcome = baselines::centralized_pu_optimal(&market, domain, solver)?;
                TrialMetrics::from_outcome(algo, seed, &market, &outcome, 0, 0)
            }
            Algo::CentralizedSu => {
                let market = complete_market()?;
                let outcome = baselines::centralized_su_rate(&market, solver)?;
                TrialMetrics::from_outcome(algo, seed, &market, &outcome, 0, 0)
            }
            Algo::Rmbn => {
                let market = Market::new(params, &realization)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(RMBN_STREAM);
                let (outcome, trace) = baselines::rmbn(&market, &mut rng);
                TrialMetrics::from_outcome(algo, seed, &market, &outcome, trace.packets(), trace.iterations)
            }
        };
        out.push(metrics);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    pub algo: Algo,
    pub n_trials: usize,
    pub mean_sum_utility_pu: f64,
    pub se_sum_utility_pu: f64,
    pub mean_sum_rate_pu: f64,
    pub se_sum_rate_pu: f64,
    pub mean_sum_rate_su: f64,
    pub se_sum_rate_su: f64,
    pub mean_matched: f64,
    /// Matched PUs as a percentage of `L_PU`.
    pub match_pct: f64,
    pub se_match_pct: f64,
    pub mean_packets: f64,
    pub se_packets: f64,
    /// `⌈0.9 n⌉`-th smallest packet count.
    pub p90_packets: u64,
    pub mean_iterations: f64,
    /// Empirical CDF of packet counts: `(y, P(Y ≤ y))` at each distinct `y`.
    pub packet_cdf: Vec<(u64, f64)>,
}

/// Sample mean and standard error (`s/√n`, zero for a single sample).
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// `⌈q·n⌉`-th order statistic (1-based) of `sorted`.
pub fn quantile_order_stat(sorted: &[u64], q: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let k = ((q * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[k.min(sorted.len()) - 1]
}

pub fn empirical_cdf(sorted: &[u64]) -> Vec<(u64, f64)> {
    let n = sorted.len() as f64;
    let mut cdf: Vec<(u64, f64)> = Vec::new();
    for (i, &y) in sorted.iter().enumerate() {
        let p = (i + 1) as f64 / n;
        match cdf.last_mut() {
            Some(last) if last.0 == y => last.1 = p,
            _ => cdf.push((y, p)),
        }
    }
    cdf
}

/// Aggregates one algorithm's trials. Input order does not matter: trials
/// are sorted by seed before any floating-point reduction.
pub fn aggregate(algo: Algo, l_pu: usize, trials: &[TrialMetrics]) -> AggregateMetrics {
    let mut ts: Vec<&TrialMetrics> = trials.iter().filter(|t| t.algo == algo).collect();
    ts.sort_by_key(|t| t.seed);
    fn column(ts: &[&TrialMetrics], f: impl Fn(&TrialMetrics) -> f64) -> Vec<f64> {
        ts.iter().map(|t| f(t)).collect()
    }
    let col = |f: &dyn Fn(&TrialMetrics) -> f64| column(&ts, f);
    let (mean_sum_utility_pu, se_sum_utility_pu) = mean_se(&col(&|t| t.sum_utility_pu));
    let (mean_sum_rate_pu, se_sum_rate_pu) = mean_se(&col(&|t| t.sum_rate_pu));
    let (mean_sum_rate_su, se_sum_rate_su) = mean_se(&col(&|t| t.sum_rate_su));
    let (mean_matched, _) = mean_se(&col(&|t| t.matched_pu_count as f64));
    let (match_pct, se_match_pct) = mean_se(&col(&|t| 100.0 * t.matched_pu_count as f64 / l_pu as f64));
    let (mean_packets, se_packets) = mean_se(&col(&|t| t.packets as f64));
    let (mean_iterations, _) = mean_se(&col(&|t| t.iterations as f64));
    let mut packets: Vec<u64> = ts.iter().map(|t| t.packets).collect();
    packets.sort_unstable();
    AggregateMetrics {
        algo,
        n_trials: ts.len(),
        mean_sum_utility_pu,
        se_sum_utility_pu,
        mean_sum_rate_pu,
        se_sum_rate_pu,
        mean_sum_rate_su,
        se_sum_rate_su,
        mean_matched,
        match_pct,
        se_match_pct,
        mean_packets,
        se_packets,
        p90_packets: quantile_order_stat(&packets, 0.9),
        mean_iterations,
        packet_cdf: empirical_cdf(&packets),
    }
}

/// Raw per-trial metrics for `n_trials` trials, in trial order.
pub fn collect_trials(
    params: &ScenarioParams,
    algos: &[Algo],
    n_trials: usize,
    solver: AssignmentSolver,
) -> Result<Vec<TrialMetrics>> {
    params.validate()?;
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "need at least one trial"));
    }
    if algos.is_empty() {
        return Err(Error::Usage("no algorithms requested".into()));
    }
    let per_trial: Vec<Vec<TrialMetrics>> = (0..n_trials as u64)
        .into_par_iter()
        .map(|i| run_trial(params, algos, trial_seed(params.seed, i), solver))
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// One aggregate per requested algorithm, in request order.
pub fn run_trials(
    params: &ScenarioParams,
    algos: &[Algo],
    n_trials: usize,
    solver: AssignmentSolver,
) -> Result<Vec<AggregateMetrics>> {
    let trials = collect_trials(params, algos, n_trials, solver)?;
    Ok(algos.iter().map(|&a| aggregate(a, params.l_pu, &trials)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Time-slot step; the price step follows it.
    Epsilon,
    CBar,
    GammaSuDb,
    LSu,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::CBar => "c_bar",
            SweepAxis::GammaSuDb => "gamma_su_db",
            SweepAxis::LSu => "l_su",
        }
    }

    /// `params` with this axis set to `value`.
    pub fn apply(self, params: &ScenarioParams, value: f64) -> Result<ScenarioParams> {
        let mut p = params.clone();
        match self {
            SweepAxis::Epsilon => {
                p.epsilon = value;
                p.delta = value;
            }
            SweepAxis::CBar => p.c_bar = value,
            SweepAxis::GammaSuDb => p.gamma_su_db = value,
            SweepAxis::LSu => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::invalid("l_su", format!("{value} is not a positive integer")));
                }
                p.l_su = value as usize;
            }
        }
        p.validate()?;
        Ok(p)
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepAxis::Epsilon, SweepAxis::CBar, SweepAxis::GammaSuDb, SweepAxis::LSu]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown sweep axis `{s}`")))
    }
}

/// Short fingerprint of a parameter set.
pub fn scenario_id(params: &ScenarioParams) -> String {
    let json = serde_json::to_vec(params).expect("parameters serialize");
    let digest = Sha256::digest(&json);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scenario_id: String,
    pub axis_name: Option<String>,
    pub axis_value: Option<f64>,
    pub metrics: AggregateMetrics,
}

pub fn table_for_run(params: &ScenarioParams, aggregates: Vec<AggregateMetrics>) -> Vec<TableRow> {
    let id = scenario_id(params);
    aggregates
        .into_iter()
        .map(|metrics| TableRow {
            scenario_id: id.clone(),
            axis_name: None,
            axis_value: None,
            metrics,
        })
        .collect()
}

/// One row per (axis value, algorithm), values in the given order.
pub fn sweep(
    params: &ScenarioParams,
    axis: SweepAxis,
    values: &[f64],
    algos: &[Algo],
    n_trials: usize,
    solver: AssignmentSolver,
) -> Result<Vec<TableRow>> {
    if values.is_empty() {
        return Err(Error::Usage(format!("no values given for sweep axis `{}`", axis.name())));
    }
    let mut rows = Vec::new();
    for &v in values {
        let p = axis.apply(params, v)?;
        let id = scenario_id(&p);
        for metrics in run_trials(&p, algos, n_trials, solver)? {
            rows.push(TableRow {
                scenario_id: id.clone(),
                axis_name: Some(axis.name().to_string()),
                axis_value: Some(v),
                metrics,
            });
        }
    }
    Ok(rows)
}

pub const CSV_COLUMNS: [&str; 13] = [
    "scenario_id",
    "algo",
    "axis_name",
    "axis_value",
    "n_trials",
    "mean_sum_utility_pu",
    "se_sum_utility_pu",
    "mean_sum_rate_pu",
    "mean_sum_rate_su",
    "match_pct",
    "mean_packets",
    "p90_packets",
    "mean_iterations",
];

/// Decimal rendering with `digits` significant digits.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // the exponent after rounding to `digits` places decides the decimals
    let sci = format!("{x:.prec$e}", prec = digits.saturating_sub(1));
    let exp: i64 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (digits as i64 - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Flat CSV record, as read back from a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub scenario_id: String,
    pub algo: Algo,
    pub axis_name: String,
    pub axis_value: Option<f64>,
    pub n_trials: usize,
    pub mean_sum_utility_pu: f64,
    pub se_sum_utility_pu: f64,
    pub mean_sum_rate_pu: f64,
    pub mean_sum_rate_su: f64,
    pub match_pct: f64,
    pub mean_packets: f64,
    pub p90_packets: u64,
    pub mean_iterations: f64,
}

pub fn write_csv<W: Write>(rows: &[TableRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    let f = |x: f64| format_sig(x, 9);
    for r in rows {
        let m = &r.metrics;
        w.write_record([
            r.scenario_id.clone(),
            m.algo.tag().to_string(),
            r.axis_name.clone().unwrap_or_default(),
            r.axis_value.map(f).unwrap_or_default(),
            m.n_trials.to_string(),
            f(m.mean_sum_utility_pu),
            f(m.se_sum_utility_pu),
            f(m.mean_sum_rate_pu),
            f(m.mean_sum_rate_su),
            f(m.match_pct),
            f(m.mean_packets),
            m.p90_packets.to_string(),
            f(m.mean_iterations),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn emit_csv(rows: &[TableRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Vec<CsvRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}
