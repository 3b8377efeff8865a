use std::time::Instant;

use dcor_chisq::dist::{centered_chisq_cdf, centered_chisq_quantile, normal2_quantile};
use dcor_chisq::distance::{MetricSpec, SampleMatrix};
use dcor_chisq::fast::fast_dcor;
use dcor_chisq::hypothesis::{
    chisq_test, dcor_permutation_test, ksample_encode, pdcor_test, ttest, ttest_pvalue,
    PermutationOptions, PermutationStatistic, PrecomputedDcor,
};
use dcor_chisq::simulation::{generate, power_study, PowerConfig, Scenario, ScenarioKind};
use dcor_chisq::spectrum::{simulate_null, spectrum};
use dcor_chisq::{Method, TestResult};
use serde::Serialize;

use crate::args::{
    BenchArgs, KsampleArgs, MethodArg, NullsimArgs, PartialArgs, PowerArgs, RunOpts, ScenarioOpts,
    TestArgs,
};
use crate::error::{usage, CliError, CliResult};
use crate::io::{read_matrix, write_table};

const NULL_QUANTILES: [f64; 6] = [0.5, 0.9, 0.95, 0.99, 0.995, 0.999];

fn to_json<T: Serialize>(record: &T) -> CliResult<String> {
    serde_json::to_string(record).map_err(|e| CliError::Data(format!("cannot encode output: {e}")))
}

/// Runs `f` on a pool of `threads` workers, or the global pool.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| usage(format!("cannot start {k} threads: {e}"))),
    }
}

fn paired(x: &SampleMatrix, y: &SampleMatrix, what: &str) -> CliResult<()> {
    if x.n() != y.n() {
        return Err(CliError::Data(format!(
            "{what} have different numbers of rows: {} and {}",
            x.n(),
            y.n()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct TestRecord {
    command: &'static str,
    method: &'static str,
    metric: &'static str,
    bandwidth: Option<f64>,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    groups: Option<Vec<usize>>,
    statistic: f64,
    pvalue: f64,
    alpha: f64,
    reject: bool,
    reps: Option<usize>,
    seed: Option<u64>,
    fast: bool,
    degenerate: bool,
}

impl TestRecord {
    fn new(command: &'static str, r: &TestResult, metric: &crate::args::MetricOpts, alpha: f64) -> Self {
        TestRecord {
            command,
            method: r.method.as_str(),
            metric: metric.name(),
            bandwidth: metric.bandwidth,
            n: r.n,
            groups: None,
            statistic: r.statistic,
            pvalue: r.pvalue,
            alpha,
            reject: r.pvalue < alpha,
            reps: r.reps,
            seed: r.seed,
            fast: false,
            degenerate: r.degenerate,
        }
    }
}

fn check_reps(method: MethodArg, reps: Option<usize>) -> CliResult<PermutationOptions> {
    if reps.is_some() && method != MethodArg::Perm {
        return Err(usage("--reps only applies to --method perm"));
    }
    Ok(PermutationOptions::new(
        reps.unwrap_or(PermutationOptions::DEFAULT_REPS),
        0,
    ))
}

pub fn test(args: &TestArgs) -> CliResult<String> {
    let metric = args.metric.spec()?;
    let mut options = check_reps(args.method, args.reps)?;
    options.seed = args.run.seed;
    if args.fast {
        if args.method == MethodArg::Perm {
            return Err(usage("--fast applies to --method chisq and ttest"));
        }
        if !metric.is_euclidean() {
            return Err(usage("--fast requires --metric euclidean"));
        }
    }
    let x = read_matrix(&args.x)?;
    let y = read_matrix(&args.y)?;
    paired(&x, &y, "--x and --y")?;
    let n = x.n();
    let result = with_threads(args.run.threads, || -> CliResult<TestResult> {
        Ok(match (args.method, args.fast) {
            (MethodArg::Chisq, fast) => chisq_test(&x, &y, &metric, fast)?,
            (MethodArg::Ttest, false) => ttest(&x, &y, &metric)?,
            (MethodArg::Ttest, true) => {
                let v = fast_dcor(&x, &y)?;
                TestResult {
                    statistic: v.dcor,
                    pvalue: ttest_pvalue(v.dcor, n)?,
                    n,
                    method: Method::TTest,
                    reps: None,
                    seed: None,
                    degenerate: v.degenerate,
                }
            }
            (MethodArg::Perm, _) => {
                dcor_permutation_test(&x, &y, &metric, PermutationStatistic::Dcor, options)?
            }
        })
    })??;
    let mut record = TestRecord::new("test", &result, &args.metric, args.run.alpha);
    record.fast = args.fast;
    to_json(&record)
}

pub fn ksample(args: &KsampleArgs) -> CliResult<String> {
    let metric = args.metric.spec()?;
    let mut options = check_reps(args.method, args.reps)?;
    options.seed = args.run.seed;
    if args.files.len() < 2 {
        return Err(usage("--files needs at least two groups"));
    }
    let groups = args
        .files
        .iter()
        .map(|p| read_matrix(p))
        .collect::<CliResult<Vec<_>>>()?;
    let sizes: Vec<usize> = groups.iter().map(SampleMatrix::n).collect();
    let (x, labels) = ksample_encode(&groups)?;
    let result = with_threads(args.run.threads, || -> CliResult<TestResult> {
        let pre = PrecomputedDcor::new_with(&x, &labels, &metric, &MetricSpec::EUCLIDEAN)?;
        Ok(match args.method {
            MethodArg::Chisq => pre.chisq(),
            MethodArg::Ttest => pre.ttest()?,
            MethodArg::Perm => pre.permutation(PermutationStatistic::Dcor, options)?,
        })
    })??;
    let mut record = TestRecord::new("ksample", &result, &args.metric, args.run.alpha);
    record.groups = Some(sizes);
    to_json(&record)
}

pub fn partial(args: &PartialArgs) -> CliResult<String> {
    let metric = args.metric.spec()?;
    let x = read_matrix(&args.x)?;
    let y = read_matrix(&args.y)?;
    let z = read_matrix(&args.z)?;
    paired(&x, &y, "--x and --y")?;
    paired(&x, &z, "--x and --z")?;
    let result = with_threads(args.run.threads, || pdcor_test(&x, &y, &z, &metric))??;
    to_json(&TestRecord::new("partial", &result, &args.metric, args.run.alpha))
}

fn scenario(opts: &ScenarioOpts, kind: ScenarioKind) -> CliResult<Scenario> {
    Scenario::new(
        kind,
        opts.n.unwrap_or(kind.default_n()),
        opts.p.unwrap_or(kind.default_p()),
    )
    .map_err(|e| usage(e.to_string()))
}

#[derive(Serialize)]
struct PowerRow {
    method: &'static str,
    power: f64,
    stderr: f64,
}

#[derive(Serialize)]
struct PowerRecord {
    command: &'static str,
    scenario: &'static str,
    n: usize,
    p: usize,
    noise: f64,
    metric: &'static str,
    alpha: f64,
    reps: usize,
    permutations: usize,
    seed: u64,
    results: Vec<PowerRow>,
}

pub fn power(args: &PowerArgs) -> CliResult<String> {
    let metric = args.metric.spec()?;
    let kind = args
        .scenario
        .scenario
        .ok_or_else(|| usage("power needs --scenario"))?;
    let sc = scenario(&args.scenario, kind)?;
    if sc.n < 4 {
        return Err(usage("power needs --n of at least 4"));
    }
    let methods: Vec<Method> = match args.method {
        Some(m) => vec![m.into()],
        None => vec![Method::ChiSquare, Method::Permutation, Method::TTest],
    };
    let config = PowerConfig {
        alpha: dcor_chisq::hypothesis::AlphaLevel::new(args.run.alpha)?,
        reps: args.reps,
        seed: args.run.seed,
        metric,
        ..PowerConfig::default()
    };
    let results = with_threads(args.run.threads, || power_study(&sc, &methods, &config))??;
    if let Some(out) = &args.out {
        let rows: Vec<Vec<String>> = results
            .iter()
            .map(|r| {
                vec![
                    kind.name().to_string(),
                    sc.n.to_string(),
                    sc.p.to_string(),
                    r.method.as_str().to_string(),
                    r.alpha.to_string(),
                    r.reps.to_string(),
                    r.power.to_string(),
                    r.stderr.to_string(),
                ]
            })
            .collect();
        write_table(out, &["scenario", "n", "p", "method", "alpha", "reps", "power", "stderr"], &rows)?;
    }
    to_json(&PowerRecord {
        command: "power",
        scenario: kind.name(),
        n: sc.n,
        p: sc.p,
        noise: sc.noise,
        metric: args.metric.name(),
        alpha: args.run.alpha,
        reps: args.reps,
        permutations: config.permutations,
        seed: args.run.seed,
        results: results
            .iter()
            .map(|r| PowerRow {
                method: r.method.as_str(),
                power: r.power,
                stderr: r.stderr,
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct QuantileRow {
    prob: f64,
    simulated: f64,
    chisq: f64,
    normal: f64,
}

#[derive(Serialize)]
struct NullsimRecord {
    command: &'static str,
    source: String,
    n: usize,
    metric: &'static str,
    reps: usize,
    seed: u64,
    rank_x: usize,
    rank_y: usize,
    weights_used: usize,
    mean: f64,
    variance: f64,
    ks_chisq: f64,
    quantiles: Vec<QuantileRow>,
}

fn nullsim_data(args: &NullsimArgs) -> CliResult<(String, SampleMatrix, SampleMatrix)> {
    match (&args.x, &args.y, args.scenario.scenario) {
        (Some(x), Some(y), None) => {
            if args.scenario.n.is_some() || args.scenario.p.is_some() {
                return Err(usage("--n and --p only apply with --scenario"));
            }
            let (xm, ym) = (read_matrix(x)?, read_matrix(y)?);
            paired(&xm, &ym, "--x and --y")?;
            Ok(("data".into(), xm, ym))
        }
        (None, None, Some(kind)) => {
            let sc = scenario(&args.scenario, kind)?;
            let (x, y) = generate(&sc, args.run.seed)?;
            Ok((kind.name().into(), x, y))
        }
        _ => Err(usage("nullsim needs either --x and --y or --scenario")),
    }
}

pub fn nullsim(args: &NullsimArgs) -> CliResult<String> {
    let metric = args.metric.spec()?;
    let (source, x, y) = nullsim_data(args)?;
    let run: &RunOpts = &args.run;
    let (spec, sample) = with_threads(run.threads, || -> CliResult<_> {
        let spec = spectrum(&x, &y, &metric)?;
        let sample = simulate_null(&spec, args.reps, run.seed)?;
        Ok((spec, sample))
    })??;
    let simulated = sample.quantiles(&NULL_QUANTILES);
    let quantiles: Vec<QuantileRow> = NULL_QUANTILES
        .iter()
        .zip(&simulated)
        .map(|(&prob, &s)| QuantileRow {
            prob,
            simulated: s,
            chisq: centered_chisq_quantile(prob, 1),
            normal: normal2_quantile(prob),
        })
        .collect();
    if let Some(out) = &args.out {
        let rows: Vec<Vec<String>> = quantiles
            .iter()
            .map(|q| vec![q.prob.to_string(), q.simulated.to_string(), q.chisq.to_string(), q.normal.to_string()])
            .collect();
        write_table(out, &["prob", "simulated", "chisq", "normal"], &rows)?;
    }
    to_json(&NullsimRecord {
        command: "nullsim",
        source,
        n: x.n(),
        metric: args.metric.name(),
        reps: args.reps,
        seed: run.seed,
        rank_x: spec.rank_x(),
        rank_y: spec.rank_y(),
        weights_used: spec.sampling_weights().len(),
        mean: sample.mean(),
        variance: sample.variance(),
        ks_chisq: sample.ks_distance(|v| centered_chisq_cdf(v, 1)),
        quantiles,
    })
}

#[derive(Serialize)]
struct BenchRow {
    n: usize,
    seconds: f64,
    ratio: Option<f64>,
    statistic: f64,
}

#[derive(Serialize)]
struct BenchRecord {
    command: &'static str,
    reps: usize,
    seed: u64,
    rows: Vec<BenchRow>,
    max_ratio: Option<f64>,
}

/// Powers of two from 2¹⁰ up to `max`, or just `max` when it is smaller.
fn ladder(max: usize) -> Vec<usize> {
    if max < 1024 {
        return vec![max];
    }
    std::iter::successors(Some(1024usize), |&n| n.checked_mul(2))
        .take_while(|&n| n <= max)
        .collect()
}

pub fn bench(args: &BenchArgs) -> CliResult<String> {
    if args.n < 4 {
        return Err(usage("bench needs --n of at least 4"));
    }
    let mut rows: Vec<BenchRow> = Vec::new();
    for n in ladder(args.n) {
        let sc = Scenario::new(ScenarioKind::Linear, n, 1)?;
        let (x, y) = generate(&sc, args.seed)?;
        let mut best = f64::INFINITY;
        let mut statistic = 0.0;
        for _ in 0..args.reps {
            let start = Instant::now();
            statistic = chisq_test(&x, &y, &MetricSpec::EUCLIDEAN, true)?.statistic;
            best = best.min(start.elapsed().as_secs_f64());
        }
        let ratio = rows.last().map(|r| best / r.seconds);
        rows.push(BenchRow {
            n,
            seconds: best,
            ratio,
            statistic,
        });
    }
    if let Some(out) = &args.out {
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    r.seconds.to_string(),
                    r.ratio.map_or(String::new(), |v| v.to_string()),
                ]
            })
            .collect();
        write_table(out, &["n", "seconds", "ratio"], &table)?;
    }
    let max_ratio = rows.iter().filter_map(|r| r.ratio).reduce(f64::max);
    to_json(&BenchRecord {
        command: "bench",
        reps: args.reps,
        seed: args.seed,
        rows,
        max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_doubles() {
        assert_eq!(ladder(100), vec![100]);
        assert_eq!(ladder(5000), vec![1024, 2048, 4096]);
    }

    #[test]
    fn reps_only_with_permutations() {
        assert!(check_reps(MethodArg::Chisq, Some(10)).is_err());
        assert_eq!(check_reps(MethodArg::Perm, Some(10)).unwrap().reps, 10);
        assert_eq!(check_reps(MethodArg::Perm, None).unwrap().reps, 500);
    }
}
