use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::Chain;
use crate::angular::{AngularBp, AngularBpJson};
use crate::error::{Error, Result};
use crate::maxstable::{log_density, ModelSpec};
use crate::simulation::sample_maxstable;
use crate::special::log_sum_exp;

/// Posterior predictive density `ĝ_n(x) = N⁻¹ Σ_s g(x | s)` over the
/// retained states.
#[derive(Debug, Clone)]
pub struct Predictive {
    models: Vec<ModelSpec<f64>>,
}

impl Predictive {
    pub fn new(chain: &Chain) -> Result<Self> {
        if chain.is_empty() {
            return Err(Error::Domain("predictive density of an empty chain".into()));
        }
        let models = chain.states.iter().map(|s| s.model(chain.d)).collect::<Result<Vec<_>>>()?;
        Ok(Self { models })
    }

    pub fn d(&self) -> usize {
        self.models[0].d()
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn models(&self) -> &[ModelSpec<f64>] {
        &self.models
    }

    /// States for which `x` is outside the support contribute zero.
    pub fn log_density(&self, x: &[f64]) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.models.len());
        for m in &self.models {
            match log_density(m, x) {
                Ok(v) => terms.push(v),
                Err(Error::Domain(_)) => terms.push(f64::NEG_INFINITY),
                Err(e) => return Err(e),
            }
        }
        Ok(log_sum_exp(&terms) - (self.models.len() as f64).ln())
    }

    /// Draws a state uniformly, then an observation from it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let i = rng.random_range(0..self.models.len());
        sample_maxstable(&self.models[i], rng)
    }
}

pub fn predictive_density(chain: &Chain, x: &[f64]) -> Result<f64> {
    Ok(Predictive::new(chain)?.log_density(x)?.exp())
}

/// Posterior mean angular measure: every state elevated to the largest
/// degree in the chain, weights averaged.
pub fn posterior_mean_angular(chain: &Chain) -> Result<AngularBp<f64>> {
    if chain.is_empty() {
        return Err(Error::Domain("posterior mean of an empty chain".into()));
    }
    let k_max = chain.states.iter().map(|s| s.k).max().unwrap_or(0);
    let n = chain.len() as f64;
    let mut vertex = vec![0.0; chain.d];
    let mut interior: Vec<f64> = Vec::new();
    for s in &chain.states {
        let m = s.angular(chain.d)?.elevate_to(k_max)?;
        if interior.is_empty() {
            interior = vec![0.0; m.interior().len()];
        }
        for (a, b) in interior.iter_mut().zip(m.interior()) {
            *a += b / n;
        }
        for (a, b) in vertex.iter_mut().zip(m.vertex_mass()) {
            *a += b / n;
        }
    }
    AngularBp::new(chain.d, k_max, vertex, interior)
}

/// Evaluation points for summaries: each is a point `t` of dimension
/// `d - 1` in the open region `{t > 0, Σ t < 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryGrid {
    pub points: Vec<Vec<f64>>,
}

impl SummaryGrid {
    /// Lattice with spacing `1/m` strictly inside the region.
    pub fn lattice(d: usize, m: usize) -> Self {
        let mut points = Vec::new();
        let mut cur = vec![1usize; d - 1];
        loop {
            if cur.iter().sum::<usize>() < m {
                points.push(cur.iter().map(|&i| i as f64 / m as f64).collect());
            }
            // odometer over 1..m-1
            let mut j = 0;
            loop {
                if j == cur.len() {
                    return Self { points };
                }
                cur[j] += 1;
                if cur[j] < m {
                    break;
                }
                cur[j] = 1;
                j += 1;
            }
        }
    }

    pub fn default_for(d: usize) -> Self {
        match d {
            2 => Self::lattice(2, 100),
            3 => Self::lattice(3, 20),
            _ => Self::lattice(d, 6),
        }
    }
}

/// Pointwise mean and equal-tailed 90% band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Band {
    fn from_columns(cols: Vec<Vec<f64>>) -> Self {
        let mut b = Band { mean: Vec::new(), lower: Vec::new(), upper: Vec::new() };
        for mut c in cols {
            b.mean.push(c.iter().sum::<f64>() / c.len() as f64);
            c.sort_by(f64::total_cmp);
            b.lower.push(quantile_sorted(&c, 0.05));
            b.upper.push(quantile_sorted(&c, 0.95));
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamQuantiles {
    pub name: String,
    pub mean: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub states: usize,
    pub grid: SummaryGrid,
    pub angular_density: Band,
    pub pickands: Band,
    /// Posterior probability of each degree.
    pub degree_pmf: BTreeMap<usize, f64>,
    pub margins: Vec<ParamQuantiles>,
    pub mean_angular: AngularBpJson,
}

/// Linear interpolation between order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn posterior_summary(chain: &Chain, grid: &SummaryGrid) -> Result<PosteriorSummary> {
    if chain.is_empty() {
        return Err(Error::Domain("summary of an empty chain".into()));
    }
    let d = chain.d;
    let models: Vec<AngularBp<f64>> = chain.states.iter().map(|s| s.angular(d)).collect::<Result<_>>()?;
    let mut dens = vec![Vec::with_capacity(models.len()); grid.points.len()];
    let mut pick = vec![Vec::with_capacity(models.len()); grid.points.len()];
    for m in &models {
        for (i, t) in grid.points.iter().enumerate() {
            dens[i].push(m.density(t)?);
            pick[i].push(m.pickands(t)?);
        }
    }
    let n = chain.len() as f64;
    let mut degree_pmf = BTreeMap::new();
    for s in &chain.states {
        *degree_pmf.entry(s.k).or_insert(0.0) += 1.0 / n;
    }
    let mut margins = Vec::new();
    let first = &chain.states[0].theta;
    for (label, get) in [
        ("shape", (|t: &crate::maxstable::MarginSpec<f64>| t.shape.clone()) as fn(&_) -> Vec<f64>),
        ("scale", |t| t.scale.clone()),
        ("loc", |t| t.loc.clone()),
    ] {
        for j in 0..get(first).len() {
            let mut v: Vec<f64> = chain.states.iter().map(|s| get(&s.theta)[j]).collect();
            let mean = v.iter().sum::<f64>() / n;
            v.sort_by(f64::total_cmp);
            margins.push(ParamQuantiles {
                name: format!("{label}[{}]", j + 1),
                mean,
                q05: quantile_sorted(&v, 0.05),
                q50: quantile_sorted(&v, 0.5),
                q95: quantile_sorted(&v, 0.95),
            });
        }
    }
    Ok(PosteriorSummary {
        states: chain.len(),
        grid: grid.clone(),
        angular_density: Band::from_columns(dens),
        pickands: Band::from_columns(pick),
        degree_pmf,
        margins,
        mean_angular: AngularBpJson::from(&posterior_mean_angular(chain)?),
    })
}
