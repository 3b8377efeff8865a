use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dcor_chisq::distance::MetricSpec;
use dcor_chisq::simulation::ScenarioKind;
use dcor_chisq::Method;

use crate::error::{usage, CliResult};

#[derive(Debug, Parser)]
#[command(name = "dcor-chisq", version, about = "Distance correlation independence tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test independence of two samples.
    Test(TestArgs),
    /// Test whether several samples share one distribution.
    Ksample(KsampleArgs),
    /// Test conditional independence of X and Y given Z.
    Partial(PartialArgs),
    /// Estimate rejection rates on a synthetic scenario.
    Power(PowerArgs),
    /// Sample the limiting null law of a data set or scenario.
    Nullsim(NullsimArgs),
    /// Time the fast path over a doubling ladder of sample sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Chisq,
    Perm,
    Ttest,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Chisq => Method::ChiSquare,
            MethodArg::Perm => Method::Permutation,
            MethodArg::Ttest => Method::TTest,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct MetricOpts {
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    pub metric: MetricArg,
    /// Gaussian kernel bandwidth; the median pairwise distance if omitted.
    #[arg(long)]
    pub bandwidth: Option<f64>,
}

impl MetricOpts {
    pub fn spec(&self) -> CliResult<MetricSpec> {
        match (self.metric, self.bandwidth) {
            (MetricArg::Euclidean, Some(_)) => Err(usage("--bandwidth requires --metric gaussian")),
            (MetricArg::Euclidean, None) => Ok(MetricSpec::EUCLIDEAN),
            (MetricArg::Gaussian, bw) => MetricSpec::gaussian(bw).map_err(|e| usage(e.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.metric {
            MetricArg::Euclidean => "euclidean",
            MetricArg::Gaussian => "gaussian",
        }
    }
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1), got {a}"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunOpts {
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for Monte Carlo work; all cores if omitted.
    #[arg(long, value_parser = parse_positive)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[command(flatten)]
    pub metric: MetricOpts,
    #[arg(long, value_enum, default_value_t = MethodArg::Chisq)]
    pub method: MethodArg,
    /// Permutations (permutation test only).
    #[arg(long, value_parser = parse_positive)]
    pub reps: Option<usize>,
    /// Use the O(n log n) path (one-dimensional Euclidean data).
    #[arg(long)]
    pub fast: bool,
    #[command(flatten)]
    pub run: RunOpts,
}

#[derive(Debug, Clone, Args)]
pub struct KsampleArgs {
    /// One CSV file per group.
    #[arg(long, num_args = 1.., required = true)]
    pub files: Vec<PathBuf>,
    #[command(flatten)]
    pub metric: MetricOpts,
    #[arg(long, value_enum, default_value_t = MethodArg::Chisq)]
    pub method: MethodArg,
    #[arg(long, value_parser = parse_positive)]
    pub reps: Option<usize>,
    #[command(flatten)]
    pub run: RunOpts,
}

#[derive(Debug, Clone, Args)]
pub struct PartialArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long)]
    pub z: PathBuf,
    #[command(flatten)]
    pub metric: MetricOpts,
    #[command(flatten)]
    pub run: RunOpts,
}

fn parse_scenario(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: dcor_chisq::Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioOpts {
    #[arg(long, value_parser = parse_scenario)]
    pub scenario: Option<ScenarioKind>,
    #[arg(long, value_parser = parse_positive)]
    pub n: Option<usize>,
    #[arg(long, value_parser = parse_positive)]
    pub p: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct PowerArgs {
    #[command(flatten)]
    pub scenario: ScenarioOpts,
    /// Test to evaluate; all three on shared replicates if omitted.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Outer Monte Carlo replicates.
    #[arg(long, default_value_t = 1000, value_parser = parse_positive)]
    pub reps: usize,
    #[command(flatten)]
    pub metric: MetricOpts,
    #[command(flatten)]
    pub run: RunOpts,
    /// Write the power table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NullsimArgs {
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[arg(long)]
    pub y: Option<PathBuf>,
    #[command(flatten)]
    pub scenario: ScenarioOpts,
    /// Draws from the null law.
    #[arg(long, default_value_t = 100_000, value_parser = parse_positive)]
    pub reps: usize,
    #[command(flatten)]
    pub metric: MetricOpts,
    #[command(flatten)]
    pub run: RunOpts,
    /// Write the quantile table as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Largest sample size of the ladder.
    #[arg(long, default_value_t = 1 << 20, value_parser = parse_positive)]
    pub n: usize,
    /// Timed runs per size; the fastest is reported.
    #[arg(long, default_value_t = 3, value_parser = parse_positive)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the timings as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
