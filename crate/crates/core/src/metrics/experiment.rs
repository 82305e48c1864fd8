use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::angular::{ks_angular2, l1_angular, pickands_sup2};
use super::divergence::{hellinger_mc, kl_mc, DensityModel};
use crate::angular::AngularBp;
use crate::error::{Error, Result};
use crate::inference::{posterior_mean_angular, run_mcmc, Predictive, SamplerConfig};
use crate::maxstable::{MarginFamily, MarginSpec, ModelSpec};
use crate::priors::{EbConfig, EbEstimator, PriorConfig, Priors};
use crate::simulation::{block_maxima, gen_example, sample_many, BlockConfig, ExampleName, ExampleParams, LogisticBivariate, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Angular cdf sup-distance of the posterior mean measure (d = 2).
    KsAngular,
    /// L1 distance of the posterior mean angular measure.
    L1Angular,
    /// Pickands sup-distance of the posterior mean measure (d = 2).
    PickandsSup,
    /// Squared Hellinger distance of the predictive density.
    Hellinger,
    /// KL divergence of the predictive density from the truth.
    Kl,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::KsAngular => "ks-angular",
            Self::L1Angular => "l1-angular",
            Self::PickandsSup => "pickands-sup",
            Self::Hellinger => "hellinger",
            Self::Kl => "kl",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Config(format!("unknown metric {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    /// Data drawn from the model itself.
    WithinModel { model: ModelSpec<f64> },
    /// A named law in the domain of attraction; the data are block maxima.
    Example {
        name: ExampleName,
        #[serde(default)]
        params: ExampleParams,
    },
}

fn default_mc() -> usize {
    2000
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::KsAngular, Metric::Hellinger]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: Generator,
    pub n_grid: Vec<usize>,
    /// Block sizes; required for example generators, ignored otherwise.
    #[serde(default)]
    pub m_grid: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub prior: PriorConfig,
    /// Margin family fitted; defaults to the truth's family, or Fréchet for
    /// example generators.
    #[serde(default)]
    pub family: Option<MarginFamily>,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    /// Monte Carlo draws per direction for Hellinger and KL.
    #[serde(default = "default_mc")]
    pub mc_samples: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("experiment config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("n_grid must not be empty".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::Config("sample sizes must be positive".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("no metrics requested".into()));
        }
        match &self.generator {
            Generator::WithinModel { model } => model.validate()?,
            Generator::Example { .. } => {
                if self.m_grid.is_empty() || self.m_grid.iter().any(|&m| m < 2) {
                    return Err(Error::Config("example generators need block sizes m >= 2 in m_grid".into()));
                }
            }
        }
        self.sampler.validate()
    }

    fn family(&self) -> MarginFamily {
        match (&self.family, &self.generator) {
            (Some(f), _) => *f,
            (None, Generator::WithinModel { model }) => model.margins.family,
            (None, Generator::Example { .. }) => MarginFamily::Frechet,
        }
    }

    fn d(&self) -> usize {
        match &self.generator {
            Generator::WithinModel { model } => model.d(),
            Generator::Example { .. } => 2,
        }
    }
}

/// Value of one metric in one cell, or the reason it is missing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub m: Option<usize>,
    pub seed: u64,
    pub metric: Metric,
    pub value: Option<f64>,
    pub se: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub metric: Metric,
    /// Grid value (n, or m for block-maxima experiments) and median.
    pub points: Vec<(usize, f64)>,
    pub strictly_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Which grid the trajectories run along: "n" or "m".
    pub axis: String,
    pub cells: Vec<CellResult>,
    pub trajectories: Vec<Trajectory>,
}

impl MetricReport {
    pub fn trajectory(&self, metric: Metric) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.metric == metric)
    }

    /// `metric,grid,median` rows.
    pub fn to_csv(&self) -> String {
        let mut s = format!("metric,{},median\n", self.axis);
        for t in &self.trajectories {
            for (g, v) in &t.points {
                s.push_str(&format!("{},{g},{v}\n", t.metric));
            }
        }
        s
    }
}

/// Reference model of a cell and its angular measure when it has one.
struct Truth {
    density: Box<dyn DensityModel>,
    angular: Option<AngularBp<f64>>,
}

/// Analytic norming for the example generators: Pareto margins scale by
/// `(m-1)^{1/ρ}`, exponential margins shift by `ln(m-1)`.
pub fn example_truth_margins(name: ExampleName, params: &ExampleParams, m: usize) -> MarginSpec<f64> {
    let mm = (m - 1) as f64;
    match name {
        ExampleName::ExpPareto | ExampleName::JoeB5Pareto => {
            MarginSpec::frechet(params.rho.to_vec(), params.rho.iter().map(|r| mm.powf(1.0 / r)).collect())
        }
        ExampleName::BivExponential => MarginSpec::gumbel(vec![1.0, 1.0], vec![mm.ln(); 2]),
    }
}

fn example_truth(name: ExampleName, params: &ExampleParams, m: usize) -> Result<Truth> {
    let margins = example_truth_margins(name, params, m);
    Ok(match name {
        ExampleName::ExpPareto | ExampleName::BivExponential => {
            // the limit has a uniform angular density
            let h = AngularBp::from_interior(2, 2, vec![1.0])?;
            Truth { density: Box::new(ModelSpec::new(h.clone(), margins)?), angular: Some(h) }
        }
        ExampleName::JoeB5Pareto => {
            Truth { density: Box::new(LogisticBivariate::new(params.theta, margins)?), angular: None }
        }
    })
}

/// Seeds a cell's streams from the experiment seed and the grid point.
fn cell_seed(seed: u64, n: usize, m: Option<usize>) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (n as u64).wrapping_mul(1_000_003) ^ (m.unwrap_or(0) as u64).wrapping_mul(7919)
}

const DATA_STREAM: u64 = 0xDA7A;
const METRIC_STREAM: u64 = 0x3E7C;

fn run_cell(cfg: &ExperimentConfig, n: usize, m: Option<usize>, seed: u64) -> Vec<CellResult> {
    let fail = |e: Error| {
        cfg.metrics
            .iter()
            .map(|&metric| CellResult { n, m, seed, metric, value: None, se: None, error: Some(e.to_string()) })
            .collect()
    };
    match cell_values(cfg, n, m, seed) {
        Ok(v) => v,
        Err(e) => fail(e),
    }
}

fn cell_values(cfg: &ExperimentConfig, n: usize, m: Option<usize>, seed: u64) -> Result<Vec<CellResult>> {
    let cs = cell_seed(seed, n, m);
    let mut data_rng = SeededRng::new(cs, DATA_STREAM);
    let d = cfg.d();
    let family = cfg.family();
    let (data, raw, truth) = match &cfg.generator {
        Generator::WithinModel { model } => {
            let x = sample_many(model, n, &mut data_rng)?;
            let t = Truth { density: Box::new(model.clone()), angular: Some(model.angular.clone()) };
            (x, None, t)
        }
        Generator::Example { name, params } => {
            let m = m.expect("example cells carry a block size");
            let raw = gen_example(*name, params, n * m, &mut data_rng)?;
            let x = block_maxima(&raw, BlockConfig::fill(raw.len(), m))?;
            (x, Some(raw), example_truth(*name, params, m)?)
        }
    };
    let mut prior = cfg.prior;
    if let (Some(eb), Some(m)) = (prior.eb.as_mut(), m) {
        eb.m = m;
    }
    if raw.is_some() && prior.eb.is_none() && family == MarginFamily::Frechet {
        prior.eb = Some(EbConfig { estimator: EbEstimator::FrechetScale, m: m.unwrap_or(2) });
    }
    let est = match &raw {
        Some(r) => prior.eb_estimates(r)?,
        None => None,
    };
    let priors = Priors::new(d, family, &prior, est.as_ref())?;
    let sampler = SamplerConfig { seed: cs, ..cfg.sampler };
    let chain = run_mcmc(&data, &priors, &sampler)?;
    let mean_h = posterior_mean_angular(&chain)?;
    let predictive = Predictive::new(&chain)?;
    let mut metric_rng = SeededRng::new(cs, METRIC_STREAM);
    let mut out = Vec::new();
    for &metric in &cfg.metrics {
        let value: Result<(f64, Option<f64>)> = match metric {
            Metric::KsAngular | Metric::L1Angular | Metric::PickandsSup => match &truth.angular {
                None => Err(Error::Unsupported("the truth has no Bernstein-polynomial angular measure".into())),
                Some(h0) => match metric {
                    Metric::KsAngular => ks_angular2(&mean_h, h0).map(|v| (v, None)),
                    Metric::L1Angular => l1_angular(&mean_h, h0).map(|v| (v, None)),
                    _ => pickands_sup2(&mean_h, h0, 1000).map(|v| (v, None)),
                },
            },
            Metric::Hellinger => hellinger_mc(&predictive, truth.density.as_ref(), cfg.mc_samples, &mut metric_rng)
                .map(|e| (e.value, Some(e.se))),
            Metric::Kl => {
                kl_mc(truth.density.as_ref(), &predictive, cfg.mc_samples, &mut metric_rng).map(|e| (e.value, Some(e.se)))
            }
        };
        out.push(match value {
            Ok((v, se)) => CellResult { n, m, seed, metric, value: Some(v), se, error: None },
            Err(e) => CellResult { n, m, seed, metric, value: None, se: None, error: Some(e.to_string()) },
        });
    }
    Ok(out)
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs every (grid point, seed) cell, concurrently, and reduces in grid
/// order. Cell failures are recorded, not raised.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricReport> {
    cfg.validate()?;
    let by_m = matches!(cfg.generator, Generator::Example { .. });
    let mut jobs = Vec::new();
    for &n in &cfg.n_grid {
        if by_m {
            for &m in &cfg.m_grid {
                for &s in &cfg.seeds {
                    jobs.push((n, Some(m), s));
                }
            }
        } else {
            for &s in &cfg.seeds {
                jobs.push((n, None, s));
            }
        }
    }
    let cells: Vec<CellResult> =
        jobs.par_iter().map(|&(n, m, s)| run_cell(cfg, n, m, s)).collect::<Vec<_>>().into_iter().flatten().collect();
    let axis: Vec<usize> = if by_m { cfg.m_grid.clone() } else { cfg.n_grid.clone() };
    let mut trajectories = Vec::new();
    if !cfg.seeds.is_empty() {
        for &metric in &cfg.metrics {
            let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for c in cells.iter().filter(|c| c.metric == metric) {
                if let Some(v) = c.value {
                    groups.entry(if by_m { c.m.unwrap_or(0) } else { c.n }).or_default().push(v);
                }
            }
            let points: Vec<(usize, f64)> = axis
                .iter()
                .filter_map(|g| groups.get_mut(g).map(|v| (*g, median(v))))
                .collect();
            let strictly_decreasing =
                points.len() == axis.len() && points.windows(2).all(|w| w[1].1 < w[0].1);
            trajectories.push(Trajectory { metric, points, strictly_decreasing });
        }
    }
    Ok(MetricReport { axis: if by_m { "m" } else { "n" }.into(), cells, trajectories })
}
