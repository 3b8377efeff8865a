//! Synthetic dependence scenarios and Monte Carlo power estimates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::distance::{MetricSpec, SampleMatrix};
use crate::error::{invalid, Result};
use crate::hypothesis::{AlphaLevel, Method, PermutationOptions, PermutationStatistic, PrecomputedDcor};
use crate::rng;
use crate::spectrum::NullSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// `X[d] ~ U(−3, 1)`, `Y = exp(X) + 0.2·ε` per coordinate with Cauchy
    /// `ε`; `q = p`.
    Exponential,
    /// `X ~ U(−1, 1)`, `Y = X + ε`.
    Linear,
    /// `X ~ U(−1, 1)`, `Y = X² + 0.5·ε`.
    Quadratic,
    /// `Z ~ N(0, 5)`, `X = Z cos(πZ)`, `Y = Z sin(πZ) + 0.4·ε`.
    Spiral,
    /// Two independent normal mixtures `Z/3 + 2B − 1`, `B ~ Bernoulli(½)`.
    Independent,
    /// `X[d] ~ U(−1, 1)`, `Y = X[1]`.
    EqualVariance,
    /// Like [`EqualVariance`](Self::EqualVariance) but coordinates past the
    /// 20th are scaled by `1/p`.
    MinimalVariance,
    /// `X[d] = 0.5·X[d−1] + U(−½, ½)`, `Y = Σ X[d]²`.
    DependentCoordinate,
    /// `X[d] ~ N(d, d)`, `Y = X[1]`.
    VaryingMarginal,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 9] = [
        ScenarioKind::Exponential,
        ScenarioKind::Linear,
        ScenarioKind::Quadratic,
        ScenarioKind::Spiral,
        ScenarioKind::Independent,
        ScenarioKind::EqualVariance,
        ScenarioKind::MinimalVariance,
        ScenarioKind::DependentCoordinate,
        ScenarioKind::VaryingMarginal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Exponential => "exponential",
            ScenarioKind::Linear => "linear",
            ScenarioKind::Quadratic => "quadratic",
            ScenarioKind::Spiral => "spiral",
            ScenarioKind::Independent => "independent",
            ScenarioKind::EqualVariance => "equal-variance",
            ScenarioKind::MinimalVariance => "minimal-variance",
            ScenarioKind::DependentCoordinate => "dependent-coordinate",
            ScenarioKind::VaryingMarginal => "varying-marginal",
        }
    }

    /// Whether `X` must be one-dimensional.
    pub fn is_univariate(&self) -> bool {
        matches!(
            self,
            ScenarioKind::Linear | ScenarioKind::Quadratic | ScenarioKind::Spiral | ScenarioKind::Independent
        )
    }

    /// Coefficient of the noise term in `Y`.
    pub fn default_noise(&self) -> f64 {
        match self {
            ScenarioKind::Exponential => 0.2,
            ScenarioKind::Linear => 1.0,
            ScenarioKind::Quadratic => 0.5,
            ScenarioKind::Spiral => 0.4,
            _ => 0.0,
        }
    }

    pub fn default_n(&self) -> usize {
        match self {
            ScenarioKind::EqualVariance => 20,
            ScenarioKind::DependentCoordinate => 50,
            _ => 100,
        }
    }

    pub fn default_p(&self) -> usize {
        match self {
            ScenarioKind::EqualVariance | ScenarioKind::MinimalVariance => 100,
            ScenarioKind::DependentCoordinate | ScenarioKind::VaryingMarginal => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| invalid(format!("unknown scenario `{s}`")))
    }
}

/// A scenario with its sample size, dimension of `X`, noise coefficient and
/// whether `Y` is replaced by an independent copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub n: usize,
    pub p: usize,
    pub noise: f64,
    /// Draw `Y` from a second, independent run of the generator.
    pub null: bool,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, n: usize, p: usize) -> Result<Self> {
        let s = Scenario {
            kind,
            n,
            p,
            noise: kind.default_noise(),
            null: false,
        };
        s.validate()?;
        Ok(s)
    }

    /// The scenario with its default `n` and `p`.
    pub fn default_for(kind: ScenarioKind) -> Self {
        Scenario::new(kind, kind.default_n(), kind.default_p()).expect("defaults are valid")
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_null(mut self, null: bool) -> Self {
        self.null = null;
        self
    }

    /// Dimension of `Y`.
    pub fn q(&self) -> usize {
        if self.kind == ScenarioKind::Exponential {
            self.p
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(invalid("scenario needs n ≥ 1 and p ≥ 1"));
        }
        if self.kind.is_univariate() && self.p != 1 {
            return Err(invalid(format!("scenario `{}` is one-dimensional, got p = {}", self.kind, self.p)));
        }
        if !self.noise.is_finite() {
            return Err(invalid("noise coefficient must be finite"));
        }
        Ok(())
    }

    /// Whether `X` and `Y` are independent by construction.
    pub fn is_null(&self) -> bool {
        self.null || self.kind == ScenarioKind::Independent
    }
}

fn uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    r.random_range(lo..hi)
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

fn cauchy(r: &mut ChaCha8Rng) -> f64 {
    normal(r) / normal(r)
}

fn mixture(r: &mut ChaCha8Rng) -> f64 {
    let bit = if r.random_bool(0.5) { 1.0 } else { 0.0 };
    normal(r) / 3.0 + 2.0 * bit - 1.0
}

/// One draw of `(X, Y)` as row-major buffers.
fn draw(s: &Scenario, r: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let (n, p) = (s.n, s.p);
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n * s.q());
    for _ in 0..n {
        match s.kind {
            ScenarioKind::Exponential => {
                for _ in 0..p {
                    let v = uniform(r, -3.0, 1.0);
                    x.push(v);
                    y.push(v.exp() + s.noise * cauchy(r));
                }
            }
            ScenarioKind::Linear => {
                let v = uniform(r, -1.0, 1.0);
                x.push(v);
                y.push(v + s.noise * normal(r));
            }
            ScenarioKind::Quadratic => {
                let v = uniform(r, -1.0, 1.0);
                x.push(v);
                y.push(v * v + s.noise * normal(r));
            }
            ScenarioKind::Spiral => {
                let z = 5f64.sqrt() * normal(r);
                let t = std::f64::consts::PI * z;
                x.push(z * t.cos());
                y.push(z * t.sin() + s.noise * normal(r));
            }
            ScenarioKind::Independent => {
                x.push(mixture(r));
                y.push(mixture(r) + s.noise * normal(r));
            }
            ScenarioKind::EqualVariance | ScenarioKind::MinimalVariance => {
                let row = x.len();
                for d in 0..p {
                    let v = uniform(r, -1.0, 1.0);
                    let scale = if s.kind == ScenarioKind::MinimalVariance && d >= 20 {
                        1.0 / p as f64
                    } else {
                        1.0
                    };
                    x.push(scale * v);
                }
                y.push(x[row] + s.noise * normal(r));
            }
            ScenarioKind::DependentCoordinate => {
                let mut prev = uniform(r, -1.0, 1.0);
                x.push(prev);
                let mut sq = prev * prev;
                for _ in 1..p {
                    prev = 0.5 * prev + uniform(r, -0.5, 0.5);
                    x.push(prev);
                    sq += prev * prev;
                }
                y.push(sq + s.noise * normal(r));
            }
            ScenarioKind::VaryingMarginal => {
                let row = x.len();
                for d in 1..=p {
                    let d = d as f64;
                    x.push(d + d.sqrt() * normal(r));
                }
                y.push(x[row] + s.noise * normal(r));
            }
        }
    }
    (x, y)
}

fn generate_from(s: &Scenario, r: &mut ChaCha8Rng) -> Result<(SampleMatrix, SampleMatrix)> {
    s.validate()?;
    let (x, mut y) = draw(s, r);
    if s.null {
        y = draw(s, r).1;
    }
    Ok((SampleMatrix::new(s.n, s.p, x)?, SampleMatrix::new(s.n, s.q(), y)?))
}

/// One sample from the scenario. The same seed always gives the same data.
pub fn generate(scenario: &Scenario, seed: u64) -> Result<(SampleMatrix, SampleMatrix)> {
    generate_from(scenario, &mut rng::stream(seed, 0))
}

/// Data and permutation seeds for outer replicate `index`.
fn replicate_streams(seed: u64, index: usize) -> (ChaCha8Rng, u64) {
    let i = 2 * index as u64;
    (rng::stream(seed, i), rng::derive_seed(seed, i + 1))
}

/// Rejection rate of one test over Monte Carlo replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub scenario: Scenario,
    pub method: Method,
    pub alpha: f64,
    pub reps: usize,
    pub power: f64,
    /// `√(power·(1 − power)/reps)`.
    pub stderr: f64,
}

impl PowerResult {
    fn from_count(scenario: Scenario, method: Method, alpha: f64, reps: usize, rejections: usize) -> Self {
        let power = rejections as f64 / reps as f64;
        PowerResult {
            scenario,
            method,
            alpha,
            reps,
            power,
            stderr: (power * (1.0 - power) / reps as f64).sqrt(),
        }
    }
}

/// Settings shared by all methods of a power study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    pub alpha: AlphaLevel,
    pub reps: usize,
    /// Permutations per replicate for the permutation test.
    pub permutations: usize,
    pub seed: u64,
    pub metric: MetricSpec,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            alpha: AlphaLevel::default(),
            reps: 1000,
            permutations: PermutationOptions::DEFAULT_REPS,
            seed: 0,
            metric: MetricSpec::EUCLIDEAN,
        }
    }
}

/// Power of several tests on shared replicates: every method sees the same
/// data sets, so their differences carry less Monte Carlo noise.
pub fn power_study(scenario: &Scenario, methods: &[Method], config: &PowerConfig) -> Result<Vec<PowerResult>> {
    scenario.validate()?;
    if config.reps == 0 {
        return Err(invalid("need at least one replicate"));
    }
    if scenario.n < 4 {
        return Err(crate::Error::SmallSample { n: scenario.n, min: 4 });
    }
    let alpha = config.alpha;
    let rejections: Vec<Vec<bool>> = (0..config.reps)
        .into_par_iter()
        .map(|s| {
            let (mut r, perm_seed) = replicate_streams(config.seed, s);
            let (x, y) = generate_from(scenario, &mut r)?;
            let pre = PrecomputedDcor::new(&x, &y, &config.metric)?;
            methods
                .iter()
                .map(|m| {
                    let result = match m {
                        Method::ChiSquare => pre.chisq(),
                        Method::TTest => pre.ttest()?,
                        Method::Permutation => pre.permutation(
                            PermutationStatistic::Dcor,
                            PermutationOptions::new(config.permutations, perm_seed),
                        )?,
                    };
                    Ok(result.rejects(alpha))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(methods
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let count = rejections.iter().filter(|r| r[k]).count();
            PowerResult::from_count(*scenario, m, alpha.value(), config.reps, count)
        })
        .collect())
}

/// Power of one test with default permutation count and Euclidean metric.
pub fn power_estimate(
    scenario: &Scenario,
    method: Method,
    alpha: f64,
    reps: usize,
    seed: u64,
) -> Result<PowerResult> {
    let config = PowerConfig {
        alpha: AlphaLevel::new(alpha)?,
        reps,
        seed,
        ..PowerConfig::default()
    };
    Ok(power_study(scenario, &[method], &config)?.remove(0))
}

/// Draws of `n·C` under the scenario's null version (`Y` independent of
/// `X`), for comparing the finite-sample null with reference laws.
pub fn empirical_null(scenario: &Scenario, reps: usize, seed: u64, metric: &MetricSpec) -> Result<NullSample> {
    if reps == 0 {
        return Err(invalid("need at least one replicate"));
    }
    let null = scenario.with_null(true);
    let n = scenario.n as f64;
    let values = (0..reps)
        .into_par_iter()
        .map(|s| {
            let (x, y) = generate_from(&null, &mut rng::stream(seed, s as u64))?;
            Ok(n * crate::dcor::dcor_unbiased(&x, &y, metric)?.dcor)
        })
        .collect::<Result<_>>()?;
    Ok(NullSample { values, reps, seed })
}
