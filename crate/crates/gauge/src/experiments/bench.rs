use std::time::Instant;

use gauge_core::bcg::{solve, SolveStatus, SolverConfig};
use gauge_core::separation::CertificateMode;
use gauge_core::{Error, Result, Shape};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{als_baseline, generate_truth, naive_model, nmse, sample_observations, AlsConfig, Rank1};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Gauge,
    Als,
    Naive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gauge => "gauge",
            Method::Als => "als",
            Method::Naive => "naive",
        }
    }
}

/// Serializable subset of [`SolverConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub lambda: f64,
    pub epsilon: f64,
    pub k: f64,
    pub max_iterations: usize,
    pub am_restarts: usize,
    pub am_pass_cap: usize,
    pub node_budget: Option<u64>,
    /// `"optimum"` or `"threshold"`.
    pub certificate: String,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let c = SolverConfig::new(1.0);
        SolverSpec {
            lambda: c.lambda,
            epsilon: c.epsilon,
            k: c.accuracy,
            max_iterations: c.max_iterations,
            am_restarts: c.am_restarts,
            am_pass_cap: c.am_pass_cap,
            node_budget: c.bnb_node_budget,
            certificate: "optimum".into(),
        }
    }
}

impl SolverSpec {
    pub fn to_config(&self, seed: u64) -> Result<SolverConfig> {
        let certificate = match self.certificate.as_str() {
            "optimum" => CertificateMode::Optimum,
            "threshold" => CertificateMode::Threshold,
            other => return Err(Error::InvalidParameter(format!("unknown certificate mode {other:?}"))),
        };
        let cfg = SolverConfig {
            lambda: self.lambda,
            epsilon: self.epsilon,
            accuracy: self.k,
            max_iterations: self.max_iterations,
            am_restarts: self.am_restarts,
            am_pass_cap: self.am_pass_cap,
            bnb_node_budget: self.node_budget,
            seed,
            certificate,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A replicated synthetic experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    pub shape: Vec<usize>,
    #[serde(default = "default_terms")]
    pub terms: usize,
    pub n: usize,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    /// Explicit per-replicate seeds; otherwise `base_seed + i`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub als: AlsConfig,
}

fn default_terms() -> usize {
    10
}

fn default_replicates() -> usize {
    10
}

fn default_methods() -> Vec<Method> {
    vec![Method::Gauge, Method::Als, Method::Naive]
}

impl BenchSpec {
    pub fn new(shape: Vec<usize>, terms: usize, n: usize) -> Self {
        BenchSpec {
            shape,
            terms,
            n,
            noise_std: 0.0,
            replicates: default_replicates(),
            seeds: None,
            base_seed: 0,
            methods: default_methods(),
            solver: SolverSpec::default(),
            als: AlsConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<Shape> {
        let shape = Shape::new(self.shape.clone())?;
        if self.terms == 0 {
            return Err(Error::InvalidParameter("terms must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if let Some(seeds) = &self.seeds {
            if seeds.len() != self.replicates {
                return Err(Error::InvalidParameter(format!(
                    "{} seeds given for {} replicates",
                    seeds.len(),
                    self.replicates
                )));
            }
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods selected".into()));
        }
        self.solver.to_config(0)?;
        Ok(shape)
    }

    pub fn trial_seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.replicates as u64).map(|i| self.base_seed.wrapping_add(i)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchOptions {
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Record wall time. Off, every `seconds` field is 0 and the output
    /// depends only on the spec.
    pub timing: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions { threads: None, timing: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub nmse: Option<f64>,
    pub seconds: f64,
    pub iterations: usize,
    pub oracle_calls: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: Method,
    /// Trials with an NMSE value.
    pub trials: usize,
    pub failures: usize,
    pub nmse_mean: f64,
    pub nmse_median: f64,
    /// Sample standard deviation (0 for a single trial).
    pub nmse_std: f64,
    pub seconds_mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub trials: Vec<TrialRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Runs every method on every replicate. Trials are independent and run
/// in parallel; rows come back in (trial, method) order regardless of
/// scheduling.
pub fn run_benchmark(spec: &BenchSpec, opts: &BenchOptions) -> Result<BenchReport> {
    let shape = spec.validate()?;
    let seeds = spec.trial_seeds();
    let run = || -> Vec<TrialRow> {
        seeds
            .par_iter()
            .enumerate()
            .map(|(trial, &seed)| run_trial(spec, &shape, trial, seed, opts.timing))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let trials = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let aggregates = aggregate(&spec.methods, &trials);
    Ok(BenchReport { trials, aggregates })
}

fn run_trial(spec: &BenchSpec, shape: &Shape, trial: usize, seed: u64, timing: bool) -> Vec<TrialRow> {
    let fail = |method: Method, e: String| TrialRow {
        trial,
        seed,
        method,
        nmse: None,
        seconds: 0.0,
        iterations: 0,
        oracle_calls: 0,
        error: Some(e),
    };
    let data = generate_truth(shape, spec.terms, seed)
        .and_then(|t| sample_observations(&t, spec.n, spec.noise_std, stream(seed, 1)).map(|s| (t, s)));
    let (truth, samples) = match data {
        Ok(d) => d,
        Err(e) => return spec.methods.iter().map(|&m| fail(m, e.to_string())).collect(),
    };
    spec.methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let row = |nmse: Result<f64>, iterations, oracle_calls, error: Option<String>| {
                let seconds = if timing { start.elapsed().as_secs_f64() } else { 0.0 };
                match nmse {
                    Ok(v) => TrialRow { trial, seed, method, nmse: Some(v), seconds, iterations, oracle_calls, error },
                    Err(e) => TrialRow { seconds, iterations, oracle_calls, ..fail(method, e.to_string()) },
                }
            };
            match method {
                Method::Gauge => {
                    let out = spec.solver.to_config(stream(seed, 2)).and_then(|cfg| solve(&samples, &cfg));
                    match out {
                        Ok(out) => {
                            let d = &out.diagnostics;
                            match out.status {
                                SolveStatus::Converged => row(nmse(&out.model, &truth), d.iterations, d.oracle_calls, None),
                                SolveStatus::MaxIterations => row(
                                    nmse(&out.model, &truth),
                                    d.iterations,
                                    d.oracle_calls,
                                    Some("not converged: iteration limit".into()),
                                ),
                                SolveStatus::Aborted => row(
                                    Err(Error::OracleInconclusive { nodes: d.bnb_nodes }),
                                    d.iterations,
                                    d.oracle_calls,
                                    None,
                                ),
                            }
                        }
                        Err(e) => row(Err(e), 0, 0, None),
                    }
                }
                Method::Als => {
                    let out = als_baseline(&samples, &spec.als, stream(seed, 3))
                        .and_then(|cp| Rank1::nmse(&cp.to_rank1(), &truth));
                    row(out, spec.als.iterations, 0, None)
                }
                Method::Naive => row(nmse(&naive_model(&samples), &truth), 0, 0, None),
            }
        })
        .collect()
}

/// Independent seed for one consumer of a trial's randomness.
pub(crate) fn stream(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-method summaries over the rows that carry an NMSE.
pub fn aggregate(methods: &[Method], rows: &[TrialRow]) -> Vec<AggregateRow> {
    methods
        .iter()
        .map(|&method| {
            let mine: Vec<&TrialRow> = rows.iter().filter(|r| r.method == method).collect();
            let mut values: Vec<f64> = mine.iter().filter_map(|r| r.nmse).collect();
            let failures = mine.iter().filter(|r| r.error.is_some()).count();
            let k = values.len();
            let mean = if k == 0 { f64::NAN } else { values.iter().sum::<f64>() / k as f64 };
            let std = if k < 2 {
                0.0
            } else {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1) as f64).sqrt()
            };
            values.sort_by(f64::total_cmp);
            let median = match k {
                0 => f64::NAN,
                _ if k % 2 == 1 => values[k / 2],
                _ => (values[k / 2 - 1] + values[k / 2]) / 2.0,
            };
            let seconds_mean = if mine.is_empty() {
                0.0
            } else {
                mine.iter().map(|r| r.seconds).sum::<f64>() / mine.len() as f64
            };
            AggregateRow { method, trials: k, failures, nmse_mean: mean, nmse_median: median, nmse_std: std, seconds_mean }
        })
        .collect()
}
