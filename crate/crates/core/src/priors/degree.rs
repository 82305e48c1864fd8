use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated discrete-Weibull prior on the degree `k`:
/// `λ(k) ∝ r^{(k-k_min)^{d-1}} - r^{(k-k_min+1)^{d-1}}`, `r = e^{-q}`,
/// renormalized on `[k_min, k_cap]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreePrior {
    d: usize,
    k_min: usize,
    k_cap: usize,
    q: f64,
    log_pmf: Vec<f64>,
    cdf: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreePriorConfig {
    #[serde(default = "default_q")]
    pub q: f64,
    #[serde(default)]
    pub k_cap: Option<usize>,
    #[serde(default)]
    pub k_min: Option<usize>,
}

fn default_q() -> f64 {
    0.2
}

impl Default for DegreePriorConfig {
    fn default() -> Self {
        Self { q: default_q(), k_cap: None, k_min: None }
    }
}

pub fn default_k_cap(d: usize) -> usize {
    match d {
        2 => 40,
        3 => 15,
        _ => d + 8,
    }
}

impl DegreePrior {
    pub fn new(d: usize, q: f64, k_min: usize, k_cap: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Config(format!("dimension must be at least 2, got {d}")));
        }
        if !(q > 0.0) || !q.is_finite() {
            return Err(Error::Config(format!("tail rate q must be positive, got {q}")));
        }
        if k_min < d || k_cap < k_min {
            return Err(Error::Config(format!("invalid degree range [{k_min}, {k_cap}] for d = {d}")));
        }
        let shape = (d - 1) as i32;
        let raw: Vec<f64> = (k_min..=k_cap)
            .map(|k| {
                let a = q * ((k - k_min) as f64).powi(shape);
                let b = q * ((k - k_min + 1) as f64).powi(shape);
                // ln(e^{-a} - e^{-b})
                -a + (-(-(b - a)).exp_m1()).ln()
            })
            .collect();
        let norm = crate::special::log_sum_exp(&raw);
        let log_pmf: Vec<f64> = raw.iter().map(|v| v - norm).collect();
        let mut acc = 0.0;
        let cdf = log_pmf
            .iter()
            .map(|l| {
                acc += l.exp();
                acc
            })
            .collect();
        Ok(Self { d, k_min, k_cap, q, log_pmf, cdf })
    }

    /// `k_min = d + 1` and the default cap for `d`.
    pub fn with_defaults(d: usize, q: f64) -> Result<Self> {
        Self::new(d, q, d + 1, default_k_cap(d))
    }

    pub fn from_config(d: usize, cfg: &DegreePriorConfig) -> Result<Self> {
        Self::new(d, cfg.q, cfg.k_min.unwrap_or(d + 1), cfg.k_cap.unwrap_or_else(|| default_k_cap(d)))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k_min(&self) -> usize {
        self.k_min
    }

    pub fn k_cap(&self) -> usize {
        self.k_cap
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.k_min..=self.k_cap).contains(&k)
    }

    pub fn log_pmf(&self, k: usize) -> Result<f64> {
        if !self.contains(k) {
            return Err(Error::Domain(format!("degree {k} outside [{}, {}]", self.k_min, self.k_cap)));
        }
        Ok(self.log_pmf[k - self.k_min])
    }

    /// Inverse-cdf draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.cdf.last().unwrap();
        let i = self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1);
        self.k_min + i
    }

    /// `Σ_{i ≥ k} λ(i)`.
    pub fn tail(&self, k: usize) -> f64 {
        if k <= self.k_min {
            return 1.0;
        }
        if k > self.k_cap {
            return 0.0;
        }
        self.log_pmf[k - self.k_min..].iter().map(|l| l.exp()).sum()
    }
}

pub fn degree_log_pmf(prior: &DegreePrior, k: usize) -> Result<f64> {
    prior.log_pmf(k)
}

pub fn degree_sample<R: Rng + ?Sized>(prior: &DegreePrior, rng: &mut R) -> usize {
    prior.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::SeededRng;

    #[test]
    fn bivariate_prior_is_geometric() {
        let p = DegreePrior::new(2, 0.3, 3, 40).unwrap();
        for k in 3..40 {
            let ratio = (p.log_pmf(k + 1).unwrap() - p.log_pmf(k).unwrap()).exp();
            assert!((ratio - (-0.3f64).exp()).abs() < 1e-12);
        }
        let total: f64 = (3..=40).map(|k| p.log_pmf(k).unwrap().exp()).sum();
        assert!((total - 1.0).abs() < 1e-14);
        assert!(p.log_pmf(2).is_err());
        assert!(p.log_pmf(41).is_err());
    }

    #[test]
    fn tail_bound_for_d3() {
        // Σ_{i≥k} λ(i) ≤ 2 exp(-q (k - k_min)²)
        for &q in &[0.1, 0.2] {
            let p = DegreePrior::new(3, q, 4, 15).unwrap();
            for k in 4..=15 {
                let bound = 2.0 * (-q * ((k - 4) as f64).powi(2)).exp();
                assert!(p.tail(k) <= bound, "q={q} k={k}");
            }
        }
    }

    #[test]
    fn sampler_matches_pmf() {
        let p = DegreePrior::new(2, 0.5, 3, 12).unwrap();
        let mut rng = SeededRng::new(3, 0);
        let n = 200_000;
        let mut counts = vec![0usize; 13];
        for _ in 0..n {
            counts[p.sample(&mut rng)] += 1;
        }
        for k in 3..=12 {
            let pk = p.log_pmf(k).unwrap().exp();
            let se = (pk * (1.0 - pk) / n as f64).sqrt();
            assert!((counts[k] as f64 / n as f64 - pk).abs() < 4.0 * se + 1e-12, "k={k}");
        }
    }
}
