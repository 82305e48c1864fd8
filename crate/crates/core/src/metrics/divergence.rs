use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::Predictive;
use crate::maxstable::{log_density, ModelSpec};
use crate::simulation::{sample_maxstable, LogisticBivariate, SeededRng};

/// Anything that can be evaluated and sampled for Monte Carlo divergences.
pub trait DensityModel: Send + Sync {
    fn d(&self) -> usize;
    /// `-∞` outside the support.
    fn log_density(&self, x: &[f64]) -> Result<f64>;
    fn sample(&self, rng: &mut SeededRng) -> Result<Vec<f64>>;
}

impl DensityModel for ModelSpec<f64> {
    fn d(&self) -> usize {
        ModelSpec::d(self)
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        match log_density(self, x) {
            Err(Error::Domain(_)) => Ok(f64::NEG_INFINITY),
            r => r,
        }
    }

    fn sample(&self, rng: &mut SeededRng) -> Result<Vec<f64>> {
        sample_maxstable(self, rng)
    }
}

impl DensityModel for Predictive {
    fn d(&self) -> usize {
        Predictive::d(self)
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        Predictive::log_density(self, x)
    }

    fn sample(&self, rng: &mut SeededRng) -> Result<Vec<f64>> {
        Predictive::sample(self, rng)
    }
}

impl DensityModel for LogisticBivariate {
    fn d(&self) -> usize {
        2
    }

    fn log_density(&self, x: &[f64]) -> Result<f64> {
        Ok(LogisticBivariate::log_density(self, x))
    }

    fn sample(&self, rng: &mut SeededRng) -> Result<Vec<f64>> {
        Ok(LogisticBivariate::sample(self, rng))
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub se: f64,
    pub n: usize,
    /// Fraction of draws where either density was zero or not finite.
    pub infinite_fraction: f64,
    /// Set when `infinite_fraction` exceeds 1%: the supports differ.
    pub support_mismatch: bool,
}

const MISMATCH: f64 = 0.01;

/// Draws `n` points from `a` and evaluates both log-densities on them,
/// in parallel but in draw order.
fn paired_logs(
    a: &dyn DensityModel,
    b: &dyn DensityModel,
    n: usize,
    rng: &mut SeededRng,
) -> Result<Vec<(f64, f64)>> {
    if a.d() != b.d() {
        return Err(Error::Structure(format!("dimensions differ: {} vs {}", a.d(), b.d())));
    }
    if n < 2 {
        return Err(Error::Domain("need at least two Monte Carlo draws".into()));
    }
    let xs = (0..n).map(|_| a.sample(rng)).collect::<Result<Vec<_>>>()?;
    xs.par_iter().map(|x| Ok((a.log_density(x)?, b.log_density(x)?))).collect()
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn infinite_fraction(logs: &[(f64, f64)]) -> f64 {
    logs.iter().filter(|(a, b)| !a.is_finite() || !b.is_finite()).count() as f64 / logs.len() as f64
}

/// One direction: `2 (1 - E_a √(g_b / g_a))`.
fn hellinger_one(a: &dyn DensityModel, b: &dyn DensityModel, n: usize, rng: &mut SeededRng) -> Result<McEstimate> {
    let logs = paired_logs(a, b, n, rng)?;
    let r: Vec<f64> = logs
        .iter()
        .map(|&(la, lb)| if la.is_finite() { (0.5 * (lb - la)).exp() } else { 0.0 })
        .map(|v| if v.is_finite() { v } else { 0.0 })
        .collect();
    let (m, se) = mean_se(&r);
    let frac = infinite_fraction(&logs);
    Ok(McEstimate { value: 2.0 * (1.0 - m), se: 2.0 * se, n, infinite_fraction: frac, support_mismatch: frac > MISMATCH })
}

/// Squared Hellinger distance `∫ (√g_a - √g_b)²`, averaged over sampling
/// from each model in turn.
pub fn hellinger_mc(a: &dyn DensityModel, b: &dyn DensityModel, n: usize, rng: &mut SeededRng) -> Result<McEstimate> {
    let ab = hellinger_one(a, b, n, rng)?;
    let ba = hellinger_one(b, a, n, rng)?;
    let frac = 0.5 * (ab.infinite_fraction + ba.infinite_fraction);
    Ok(McEstimate {
        value: 0.5 * (ab.value + ba.value),
        se: 0.5 * (ab.se * ab.se + ba.se * ba.se).sqrt(),
        n: 2 * n,
        infinite_fraction: frac,
        support_mismatch: ab.support_mismatch || ba.support_mismatch,
    })
}

/// `E_a[ln g_a - ln g_b]`; infinite when `b` misses mass of `a`.
pub fn kl_mc(a: &dyn DensityModel, b: &dyn DensityModel, n: usize, rng: &mut SeededRng) -> Result<McEstimate> {
    let logs = paired_logs(a, b, n, rng)?;
    let frac = infinite_fraction(&logs);
    let diffs: Vec<f64> = logs.iter().map(|&(la, lb)| la - lb).collect();
    let (m, se) = if diffs.iter().all(|v| v.is_finite()) { mean_se(&diffs) } else { (f64::INFINITY, f64::NAN) };
    Ok(McEstimate { value: m, se, n, infinite_fraction: frac, support_mismatch: frac > MISMATCH })
}

/// Total variation `½ ∫ |g_a - g_b|`, sampling from the equal mixture so that
/// the integrand `|g_a - g_b| / (g_a + g_b)` stays bounded.
pub fn total_variation_mc(
    a: &dyn DensityModel,
    b: &dyn DensityModel,
    n: usize,
    rng: &mut SeededRng,
) -> Result<McEstimate> {
    use rand::Rng;
    if a.d() != b.d() {
        return Err(Error::Structure(format!("dimensions differ: {} vs {}", a.d(), b.d())));
    }
    let xs = (0..n)
        .map(|_| if rng.random::<bool>() { a.sample(rng) } else { b.sample(rng) })
        .collect::<Result<Vec<_>>>()?;
    let logs: Vec<(f64, f64)> = xs.par_iter().map(|x| Ok((a.log_density(x)?, b.log_density(x)?))).collect::<Result<_>>()?;
    let v: Vec<f64> = logs
        .iter()
        .map(|&(la, lb)| {
            let m = la.max(lb);
            let (ea, eb) = ((la - m).exp(), (lb - m).exp());
            (ea - eb).abs() / (ea + eb)
        })
        .collect();
    let (m, se) = mean_se(&v);
    let frac = infinite_fraction(&logs);
    Ok(McEstimate { value: m, se, n, infinite_fraction: frac, support_mismatch: false })
}
