//! Command-line front end. Everything is computed in memory first and written
//! at the end, so a failing command never leaves partial files behind.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::aggregation::{
    borda_consensus, breakdown_experiment, kemeny_bruteforce, kemeny_sst_consensus, BordaConfig, BordaWeights,
    BreakdownConfig, ConsensusResult,
};
use crate::depth::{depths_of, DepthProfile};
use crate::error::{Error, Result};
use crate::inference::{
    dd_plot, detect_outliers, homogeneity_monte_carlo, homogeneity_test, HomogeneityExperiment, Threshold,
};
use crate::io::{emit_rankings, parse_rankings, CsvOptions, RankingFormat};
use crate::models::{rng_from_seed, MallowsParams, PlackettLuceParams, RankingModel};
use crate::pairwise::empirical_pairwise;
use crate::perm::{max_distance, Metric, Permutation};
use crate::sample::RankingSample;
use crate::trimming::{trim_to_sst, DepthMode, TrimConfig, TrimTarget};

#[derive(Debug, Parser)]
#[command(name = "rankdepth", version, about = "Statistical depth for rankings")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// kendall, rho, footrule or hamming
    #[arg(long, global = true, default_value = "kendall", value_parser = parse_metric)]
    metric: Metric,
    /// Seed for every stochastic command
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Divide depths by the largest possible distance
    #[arg(long, global = true)]
    normalize: bool,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Output file (standard output when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args, Clone)]
struct InputOpts {
    /// Layout of ranking files
    #[arg(long = "input-format", value_enum, default_value_t = InputFormat::Ranks)]
    input_format: InputFormat,
    /// Ranking files hold 0-based values
    #[arg(long)]
    zero_based: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Ranks,
    Ordering,
}

impl InputOpts {
    fn csv(&self) -> CsvOptions {
        CsvOptions {
            format: match self.input_format {
                InputFormat::Ranks => RankingFormat::Ranks,
                InputFormat::Ordering => RankingFormat::Ordering,
            },
            one_based: !self.zero_based,
        }
    }

    fn read(&self, path: &Path) -> Result<RankingSample> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        parse_rankings(&text, self.csv()).map_err(|e| match e {
            Error::Parse { row, message } => Error::Parse { row, message: format!("{}: {message}", path.display()) },
            other => other,
        })
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Depth of every ranking in a file
    Depth {
        input: PathBuf,
        /// Depths relative to this sample instead of the input itself
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Depth of every permutation of the items (n <= 8) instead of the input rankings
        #[arg(long)]
        exhaustive: bool,
        #[command(flatten)]
        io: InputOpts,
    },
    /// Pairwise preference matrix, transitivity status and 3-cycle count
    Pairwise {
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
        #[command(flatten)]
        io: InputOpts,
    },
    /// Remove least deep rankings until the sample is stochastically transitive
    Trim {
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = TargetArg::Sst)]
        target: TargetArg,
        #[arg(long = "depth-mode", value_enum, default_value_t = ModeArg::Recompute)]
        depth_mode: ModeArg,
        #[arg(long, default_value_t = 0.0)]
        tolerance: f64,
        /// Reference ranking (one-based ranks) for the trace distances
        #[arg(long, value_parser = parse_perm)]
        center: Option<Permutation>,
        /// Where to write the per-iteration trace
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        io: InputOpts,
    },
    /// Consensus ranking
    Aggregate {
        input: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Depth threshold for dt-borda
        #[arg(long)]
        mu: Option<f64>,
        #[command(flatten)]
        io: InputOpts,
    },
    /// Depth-versus-depth plot data for two samples
    Ddplot {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        io: InputOpts,
    },
    /// Rank-sum test on depths relative to a reference sample
    Htest(HtestArgs),
    /// Rankings whose depth falls below a threshold
    Outliers {
        input: PathBuf,
        /// Threshold on normalized depth, in [0, 1]
        #[arg(long, group = "threshold")]
        level: Option<f64>,
        /// Threshold on raw depth
        #[arg(long, group = "threshold")]
        raw: Option<f64>,
        /// Threshold at this mid-quantile of the sample depths
        #[arg(long, group = "threshold")]
        quantile: Option<f64>,
        #[command(flatten)]
        io: InputOpts,
    },
    /// Draw rankings from a model
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        count: usize,
        /// Mixture: number of rankings from the second component
        #[arg(long, default_value_t = 0)]
        count2: usize,
        #[command(flatten)]
        io: InputOpts,
    },
    /// Smallest adversarial fraction breaking Borda and depth-trimmed Borda
    Breakdown {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "sample-size")]
        sample_size: usize,
        #[arg(long)]
        delta: usize,
        #[arg(long)]
        mu: f64,
        /// Number of seeds, starting at --seed
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long = "max-copies")]
        max_copies: Option<usize>,
    },
    /// Regenerate the desk-scale experiment bundles as CSV files
    Repro {
        #[arg(value_enum)]
        experiment: ReproArg,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        /// Monte Carlo repetitions or seeds (experiment default when absent)
        #[arg(long)]
        reps: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct HtestArgs {
    /// Reference, first and second sample files
    #[arg(num_args = 3, value_names = ["REFERENCE", "FIRST", "SECOND"])]
    files: Vec<PathBuf>,
    /// Monte Carlo mode: repetitions drawn from --model (first sample) and the alternative
    #[arg(long, conflicts_with = "files")]
    reps: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
    /// Plackett-Luce alternative: log-weights multiplied by this factor
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long = "reference-size", default_value_t = 500)]
    reference_size: usize,
    #[arg(long = "test-size", default_value_t = 50)]
    test_size: usize,
    #[command(flatten)]
    io: InputOpts,
}

#[derive(Debug, Args, Clone)]
struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Mallows)]
    model: ModelArg,
    /// Number of items
    #[arg(long)]
    n: Option<usize>,
    /// Mallows dispersion in (0, 1]
    #[arg(long)]
    phi: Option<f64>,
    /// Mallows center as one-based ranks (identity when absent)
    #[arg(long, value_parser = parse_perm)]
    center: Option<Permutation>,
    /// Second mixture component or Mallows alternative: dispersion
    #[arg(long)]
    phi2: Option<f64>,
    /// Second mixture component center (reversal of the first when absent)
    #[arg(long, value_parser = parse_perm)]
    center2: Option<Permutation>,
    /// Plackett-Luce weights, comma separated
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Plackett-Luce weights exp(scale * (n - 1 - i)) when --weights is absent
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Mallows,
    Pl,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    St,
    Sst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Fixed,
    Recompute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    KemenyBf,
    KemenySst,
    Borda,
    DtBorda,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReproArg {
    Fig1,
    Ddplot,
    Htest,
    Breakdown,
}

fn parse_metric(s: &str) -> std::result::Result<Metric, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_perm(s: &str) -> std::result::Result<Permutation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A usage problem detected after argument parsing.
#[derive(Debug)]
struct Usage(String);

enum Failure {
    Usage(Usage),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Failure::Usage(u)
    }
}

type Run<T> = std::result::Result<T, Failure>;

/// Files to write once the command has succeeded; `None` is standard output.
#[derive(Default)]
struct Outputs {
    files: Vec<(Option<PathBuf>, String)>,
    notes: Vec<String>,
}

impl Outputs {
    fn main(&mut self, global: &Global, body: String) {
        self.files.push((global.out.clone(), body));
    }

    fn file(&mut self, path: PathBuf, body: String) {
        self.files.push((Some(path), body));
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn require_seed(global: &Global) -> Run<u64> {
    global.seed.ok_or_else(|| Failure::Usage(Usage("this command is stochastic and needs --seed".into())))
}

impl ModelArgs {
    fn n(&self) -> Run<usize> {
        if let Some(w) = &self.weights {
            return Ok(w.len());
        }
        if let Some(c) = &self.center {
            return Ok(c.len());
        }
        self.n.ok_or_else(|| Failure::Usage(Usage("--n is required".into())))
    }

    fn center(&self, n: usize) -> Run<Permutation> {
        let c = self.center.clone().unwrap_or_else(|| Permutation::identity(n));
        if c.len() != n {
            return Err(Error::SizeMismatch { expected: n, found: c.len() }.into());
        }
        Ok(c)
    }

    fn mallows(&self) -> Run<MallowsParams> {
        let n = self.n()?;
        let phi = self.phi.ok_or_else(|| Failure::Usage(Usage("--phi is required for Mallows models".into())))?;
        Ok(MallowsParams::new(self.center(n)?, phi)?)
    }

    fn second_mallows(&self) -> Run<MallowsParams> {
        let first = self.mallows()?;
        let center = self.center2.clone().unwrap_or_else(|| first.center().reversed());
        Ok(MallowsParams::new(center, self.phi2.unwrap_or(first.phi()))?)
    }

    fn plackett_luce(&self, scale_factor: f64) -> Run<PlackettLuceParams> {
        match &self.weights {
            Some(w) => Ok(PlackettLuceParams::new(w.iter().map(|v| v.powf(scale_factor)).collect())?),
            None => Ok(PlackettLuceParams::geometric(self.n()?, self.scale * scale_factor)?),
        }
    }

    fn model(&self) -> Run<RankingModel> {
        match self.model {
            ModelArg::Mallows => Ok(RankingModel::Mallows(self.mallows()?)),
            ModelArg::Pl => Ok(RankingModel::PlackettLuce(self.plackett_luce(1.0)?)),
            ModelArg::Mixture => Err(Usage("a mixture is not a single model; use mallows or pl".into()).into()),
        }
    }
}

fn depth_rows(out: &mut String, rankings: &[Permutation], depths: &[f64]) {
    out.push_str("index,ranking,depth\n");
    for (k, (r, d)) in rankings.iter().zip(depths).enumerate() {
        out.push_str(&format!("{k},{r},{d}\n"));
    }
}

#[derive(Serialize)]
struct DepthOutput<'a> {
    metric: Metric,
    normalized: bool,
    d_max: f64,
    rankings: Vec<Vec<usize>>,
    depths: &'a [f64],
}

fn execute(cli: Cli) -> Run<Outputs> {
    let g = &cli.global;
    let mut out = Outputs::default();
    match &cli.command {
        Command::Depth { input, reference, exhaustive, io } => {
            let sample = io.read(input)?;
            let reference = match reference {
                Some(p) => io.read(p)?,
                None => sample.clone(),
            };
            let profile = if *exhaustive {
                DepthProfile::exhaustive(&reference, g.metric)?
            } else {
                DepthProfile::over(&reference, sample.rankings().to_vec(), g.metric)?
            };
            let depths = if g.normalize { profile.normalized_values() } else { profile.values() };
            let rankings: Vec<Permutation> = profile.entries().iter().map(|(p, _)| p.clone()).collect();
            let body = match g.format {
                OutputFormat::Csv => {
                    let mut s = String::new();
                    depth_rows(&mut s, &rankings, &depths);
                    s
                }
                OutputFormat::Json => json(&DepthOutput {
                    metric: g.metric,
                    normalized: g.normalize,
                    d_max: profile.d_max,
                    rankings: rankings.iter().map(Permutation::one_based).collect(),
                    depths: &depths,
                }),
            };
            out.main(g, body);
        }
        Command::Pairwise { input, tolerance, io } => {
            let sample = io.read(input)?;
            let pw = empirical_pairwise(&sample)?;
            let status = pw.transitivity_status_eps(*tolerance);
            let cycles = pw.count_cycles_eps(*tolerance);
            match g.format {
                OutputFormat::Csv => {
                    out.main(g, pw.to_csv());
                    out.notes.push(format!("status: {status}"));
                    out.notes.push(format!("cycles: {cycles}"));
                    if let Some((i, j, k)) = pw.transitivity_violation(*tolerance) {
                        out.notes.push(format!("violating triple: ({}, {}, {})", i + 1, j + 1, k + 1));
                    }
                }
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct P {
                        n: usize,
                        matrix: Vec<Vec<f64>>,
                        status: crate::pairwise::TransitivityStatus,
                        cycles: usize,
                    }
                    out.main(g, json(&P { n: pw.n(), matrix: pw.rows(), status, cycles }));
                }
            }
        }
        Command::Trim { input, target, depth_mode, tolerance, center, trace, io } => {
            let sample = io.read(input)?;
            let cfg = TrimConfig {
                target: match target {
                    TargetArg::St => TrimTarget::St,
                    TargetArg::Sst => TrimTarget::Sst,
                },
                depth_mode: match depth_mode {
                    ModeArg::Fixed => DepthMode::FixedInitial,
                    ModeArg::Recompute => DepthMode::RecomputeEachIteration,
                },
                metric: g.metric,
                sst_tolerance: *tolerance,
                reference_center: center.clone(),
            };
            let res = trim_to_sst(&sample, &cfg)?;
            out.main(g, emit_rankings(&res.trimmed, io.csv()));
            if let Some(path) = trace {
                out.file(path.clone(), res.trace.to_csv());
            }
            out.notes.push(format!(
                "removed {} of {} rankings in {} iterations",
                sample.len() - res.trimmed.len(),
                sample.len(),
                res.trace.iterations()
            ));
            if res.stalled {
                out.notes.push("warning: all remaining rankings tie in depth; target status not reached".into());
            }
        }
        Command::Aggregate { input, method, mu, io } => {
            let sample = io.read(input)?;
            let result: ConsensusResult = match method {
                MethodArg::KemenyBf => kemeny_bruteforce(&sample, g.metric)?,
                MethodArg::KemenySst => kemeny_sst_consensus(&sample).map_err(|e| match e {
                    Error::NotTransitive(i, j, k) => Error::Domain(format!(
                        "sample is not stochastically transitive: items ({}, {}, {}) violate transitivity",
                        i + 1,
                        j + 1,
                        k + 1
                    )),
                    Error::NotStrict(i, j) => Error::Domain(format!(
                        "sample is not strictly stochastically transitive: items ({}, {}) are tied",
                        i + 1,
                        j + 1
                    )),
                    other => other,
                })?,
                MethodArg::Borda => borda_consensus(&sample, &BordaConfig { weights: BordaWeights::Uniform, metric: g.metric })?,
                MethodArg::DtBorda => {
                    let mu = mu.ok_or_else(|| Failure::Usage(Usage("dt-borda needs --mu".into())))?;
                    borda_consensus(&sample, &BordaConfig { weights: BordaWeights::DepthTrimmed { mu }, metric: g.metric })?
                }
            };
            let body = match g.format {
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct A<'a> {
                        medians: Vec<Vec<usize>>,
                        risk: f64,
                        metric: Metric,
                        method: &'a crate::aggregation::ConsensusMethod,
                    }
                    json(&A {
                        medians: result.medians.iter().map(Permutation::one_based).collect(),
                        risk: result.risk,
                        metric: result.metric,
                        method: &result.method,
                    })
                }
                OutputFormat::Csv => {
                    let medians = RankingSample::new(result.medians.clone())?;
                    emit_rankings(&medians, io.csv())
                }
            };
            out.main(g, body);
        }
        Command::Ddplot { first, second, io } => {
            let a = io.read(first)?;
            let b = io.read(second)?;
            let dd = dd_plot(&a, &b, g.metric, g.normalize)?;
            let body = match g.format {
                OutputFormat::Csv => dd.to_csv(),
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct Point {
                        ranking: Vec<usize>,
                        depth1: f64,
                        depth2: f64,
                        origin: u8,
                    }
                    let points: Vec<Point> = dd
                        .points
                        .iter()
                        .map(|p| Point { ranking: p.ranking.one_based(), depth1: p.depth1, depth2: p.depth2, origin: p.origin })
                        .collect();
                    json(&serde_json::json!({ "metric": dd.metric, "normalized": dd.normalized, "points": points }))
                }
            };
            out.main(g, body);
        }
        Command::Htest(h) => htest(g, h, &mut out)?,
        Command::Outliers { input, level, raw, quantile, io } => {
            let sample = io.read(input)?;
            let threshold = match (level, raw, quantile) {
                (Some(u), _, _) => Threshold::NormalizedLevel(*u),
                (_, Some(u), _) => Threshold::Raw(*u),
                (_, _, Some(a)) => Threshold::Quantile(*a),
                _ => return Err(Usage("one of --level, --raw or --quantile is required".into()).into()),
            };
            let rep = detect_outliers(&sample, g.metric, threshold)?;
            let body = match g.format {
                OutputFormat::Json => json(&rep),
                OutputFormat::Csv => {
                    let mut s = String::from("index,depth\n");
                    for &i in &rep.outliers {
                        s.push_str(&format!("{i},{}\n", rep.depths[i]));
                    }
                    s
                }
            };
            out.notes.push(format!("threshold: {}", rep.threshold_used));
            out.main(g, body);
        }
        Command::Sample { model, count, count2, io } => {
            let seed = require_seed(g)?;
            let mut rng = rng_from_seed(seed);
            let sample = match model.model {
                ModelArg::Mixture => {
                    let a = RankingModel::Mallows(model.mallows()?).sample_with(*count, &mut rng)?;
                    if *count2 == 0 {
                        a
                    } else {
                        a.concat(&RankingModel::Mallows(model.second_mallows()?).sample_with(*count2, &mut rng)?)?
                    }
                }
                _ => model.model()?.sample_with(*count, &mut rng)?,
            };
            out.main(g, emit_rankings(&sample, io.csv()));
        }
        Command::Breakdown { model, sample_size, delta, mu, seeds, max_copies } => {
            let seed = require_seed(g)?;
            let cfg = BreakdownConfig {
                model: model.model()?,
                sample_size: *sample_size,
                delta: *delta,
                mu: *mu,
                seeds: (seed..seed.saturating_add(*seeds)).collect(),
                max_copies: *max_copies,
            };
            let report = breakdown_experiment(&cfg)?;
            out.main(g, if g.format == OutputFormat::Json { json(&report) } else { report.to_csv() });
            out.notes.push(format!(
                "mean fraction borda {:.4}, dt-borda {:.4}, ratio {:.4}",
                report.mean_fraction_plain, report.mean_fraction_trimmed, report.ratio
            ));
        }
        Command::Repro { experiment, out_dir, reps } => {
            let seed = require_seed(g)?;
            for (name, body) in repro(*experiment, seed, *reps)? {
                out.file(out_dir.join(name), body);
            }
        }
    }
    Ok(out)
}

fn htest(g: &Global, h: &HtestArgs, out: &mut Outputs) -> Run<()> {
    match h.reps {
        None => {
            if h.files.len() != 3 {
                return Err(Usage("htest needs REFERENCE FIRST SECOND files or --reps".into()).into());
            }
            let r = h.io.read(&h.files[0])?;
            let a = h.io.read(&h.files[1])?;
            let b = h.io.read(&h.files[2])?;
            let res = homogeneity_test(&r, &a, &b, g.metric)?;
            out.main(g, json(&res));
        }
        Some(reps) => {
            let seed = require_seed(g)?;
            let (reference_model, alternative_model) = match h.model.model {
                ModelArg::Pl => (
                    RankingModel::PlackettLuce(h.model.plackett_luce(1.0)?),
                    RankingModel::PlackettLuce(h.model.plackett_luce(h.gamma)?),
                ),
                ModelArg::Mallows | ModelArg::Mixture => {
                    let first = h.model.mallows()?;
                    let second = MallowsParams::new(
                        h.model.center2.clone().unwrap_or_else(|| first.center().clone()),
                        h.model.phi2.unwrap_or(first.phi()),
                    )?;
                    (RankingModel::Mallows(first), RankingModel::Mallows(second))
                }
            };
            let exp = HomogeneityExperiment {
                reference_model,
                alternative_model,
                reference_size: h.reference_size,
                test_size: h.test_size,
                reps,
                seed,
                metric: g.metric,
            };
            let results = homogeneity_monte_carlo(&exp)?;
            let mean = results.iter().map(|r| r.p_value).sum::<f64>() / results.len().max(1) as f64;
            let body = match g.format {
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct Mc<'a> {
                        reps: usize,
                        mean_p_value: f64,
                        p_values: Vec<f64>,
                        results: &'a [crate::inference::TestResult],
                    }
                    json(&Mc { reps, mean_p_value: mean, p_values: results.iter().map(|r| r.p_value).collect(), results: &results })
                }
                OutputFormat::Csv => {
                    let mut s = String::from("rep,statistic,z,p_value\n");
                    for (k, r) in results.iter().enumerate() {
                        s.push_str(&format!("{k},{},{},{}\n", r.statistic, r.z, r.p_value));
                    }
                    s
                }
            };
            out.notes.push(format!("mean p-value: {mean}"));
            out.main(g, body);
        }
    }
    Ok(())
}

fn repro(which: ReproArg, seed: u64, reps: Option<usize>) -> Result<Vec<(String, String)>> {
    let mut files = Vec::new();
    let mut rng = rng_from_seed(seed);
    match which {
        ReproArg::Fig1 => {
            let n = 8;
            let center = Permutation::identity(n);
            let clean = MallowsParams::new(center.clone(), 0.9)?;
            let adv = MallowsParams::new(center.reversed(), 0.4)?;
            let a = RankingModel::Mallows(clean).sample_with(2000, &mut rng)?;
            let b = RankingModel::Mallows(adv).sample_with(400, &mut rng)?;
            let pooled = a.concat(&b)?;
            let origin = |i: usize| if i < a.len() { "clean" } else { "adversarial" };
            let d_max = max_distance(Metric::KendallTau, n);
            let before = depths_of(&pooled, pooled.rankings(), Metric::KendallTau)?;
            let cfg = TrimConfig { reference_center: Some(center.clone()), ..TrimConfig::default() };
            let res = trim_to_sst(&pooled, &cfg)?;
            let after = depths_of(&res.trimmed, res.trimmed.rankings(), Metric::KendallTau)?;
            let mut s = String::from("index,origin,depth\n");
            for (i, d) in before.iter().enumerate() {
                s.push_str(&format!("{i},{},{}\n", origin(i), d / d_max));
            }
            files.push(("depth_before.csv".to_string(), s));
            let mut s = String::from("index,origin,depth\n");
            for (k, &i) in res.kept.iter().enumerate() {
                s.push_str(&format!("{i},{},{}\n", origin(i), after[k] / d_max));
            }
            files.push(("depth_after.csv".to_string(), s));
            files.push(("trace.csv".to_string(), res.trace.to_csv()));
        }
        ReproArg::Ddplot => {
            let n = 10;
            let far = Permutation::with_inversions(n, 15)?;
            let e = |x: f64| (-x).exp();
            let regimes = [("a", far.clone(), e(1.0), e(1.0), 250, 250), ("b", Permutation::identity(n), e(0.5), e(2.0), 250, 250), ("c", far.clone(), e(0.5), e(2.0), 250, 250), ("d", far, e(0.5), e(2.0), 400, 100)];
            for (tag, c2, phi1, phi2, n1, n2) in regimes {
                let s1 = RankingModel::Mallows(MallowsParams::new(Permutation::identity(n), phi1)?).sample_with(n1, &mut rng)?;
                let s2 = RankingModel::Mallows(MallowsParams::new(c2, phi2)?).sample_with(n2, &mut rng)?;
                files.push((format!("ddplot_{tag}.csv"), dd_plot(&s1, &s2, Metric::KendallTau, true)?.to_csv()));
            }
        }
        ReproArg::Htest => {
            let reps = reps.unwrap_or(100);
            let base = PlackettLuceParams::geometric(10, 1.0)?;
            let mut all = String::from("gamma,rep,p_value\n");
            let mut summary = String::from("gamma,mean_p_value\n");
            for step in 0..=5 {
                let gamma = 0.5 + 0.1 * step as f64;
                let exp = HomogeneityExperiment {
                    reference_model: RankingModel::PlackettLuce(base.clone()),
                    alternative_model: RankingModel::PlackettLuce(PlackettLuceParams::geometric(10, gamma)?),
                    reference_size: 500,
                    test_size: 50,
                    reps,
                    seed: seed.wrapping_add(step),
                    metric: Metric::KendallTau,
                };
                let res = homogeneity_monte_carlo(&exp)?;
                for (k, r) in res.iter().enumerate() {
                    all.push_str(&format!("{gamma:.1},{k},{}\n", r.p_value));
                }
                let mean = res.iter().map(|r| r.p_value).sum::<f64>() / res.len().max(1) as f64;
                summary.push_str(&format!("{gamma:.1},{mean}\n"));
            }
            files.push(("pvalues.csv".to_string(), all));
            files.push(("summary.csv".to_string(), summary));
        }
        ReproArg::Breakdown => {
            let k = reps.unwrap_or(20) as u64;
            let cfg = BreakdownConfig {
                model: RankingModel::Mallows(MallowsParams::new(Permutation::identity(6), 0.7)?),
                sample_size: 500,
                delta: 3,
                mu: 0.6 * max_distance(Metric::KendallTau, 6),
                seeds: (seed..seed + k).collect(),
                max_copies: None,
            };
            let report = breakdown_experiment(&cfg)?;
            files.push(("breakdown.csv".to_string(), report.to_csv()));
            files.push(("breakdown.json".to_string(), json(&report)));
        }
    }
    Ok(files)
}

fn write_all(outputs: &Outputs, stdout: &mut dyn Write) -> std::io::Result<()> {
    // Write every file to a sibling temporary first, then rename into place.
    let mut staged = Vec::new();
    for (path, body) in &outputs.files {
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                let tmp = p.with_extension("partial");
                std::fs::write(&tmp, body)?;
                staged.push((tmp, p.clone()));
            }
            None => stdout.write_all(body.as_bytes())?,
        }
    }
    for (tmp, p) in staged {
        std::fs::rename(tmp, p)?;
    }
    Ok(())
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 on usage errors, 2 on data errors.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            if code == 0 {
                let _ = stdout.write_all(text.as_bytes());
            } else {
                let _ = stderr.write_all(text.as_bytes());
            }
            return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 1 } else { code };
        }
    };
    match execute(cli) {
        Ok(outputs) => {
            if let Err(e) = write_all(&outputs, stdout) {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            for note in &outputs.notes {
                let _ = writeln!(stderr, "{note}");
            }
            0
        }
        Err(Failure::Usage(Usage(msg))) => {
            let _ = writeln!(stderr, "usage error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
