//! Priors on margin parameters, optionally centred by empirical-Bayes
//! estimates of the norming constants.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::eb::EbEstimates;
use crate::error::{Error, Result};
use crate::maxstable::{MarginFamily, MarginSpec};
use crate::special::ln_gamma;

/// Prior on each shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ShapePrior {
    Gamma { shape: f64, rate: f64 },
    Uniform { lower: f64, upper: f64 },
}

impl ShapePrior {
    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Self::Gamma { shape, rate } => {
                if x > 0.0 {
                    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
                } else {
                    f64::NEG_INFINITY
                }
            }
            Self::Uniform { lower, upper } => {
                if x >= lower && x <= upper {
                    -(upper - lower).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    pub fn support_contains(&self, x: f64) -> bool {
        self.log_density(x).is_finite()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gamma { shape, rate } => gamma_draw(shape, rate, rng),
            Self::Uniform { lower, upper } => lower + (upper - lower) * rng.random::<f64>(),
        }
    }

    /// A point in the support, used to initialize samplers.
    pub fn center(&self) -> f64 {
        match *self {
            Self::Gamma { shape, rate } => shape / rate,
            Self::Uniform { lower, upper } => 0.5 * (lower + upper),
        }
    }
}

/// Kernel `π_sc` for the standardized scale `σ/σ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScaleKernel {
    /// `rate^shape x^{shape-1} e^{-rate x} / Γ(shape)`; the default is
    /// shape 2, rate 2.
    Gamma { shape: f64, rate: f64 },
}

impl Default for ScaleKernel {
    fn default() -> Self {
        Self::Gamma { shape: 2.0, rate: 2.0 }
    }
}

impl ScaleKernel {
    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Self::Gamma { shape, rate } => ShapePrior::Gamma { shape, rate }.log_density(x),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gamma { shape, rate } => gamma_draw(shape, rate, rng),
        }
    }
}

fn gamma_draw<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0 / rate).map(|g| g.sample(rng)).unwrap_or(shape / rate)
}

/// Kernel `π_loc` for the standardized location `(μ - μ̂)/σ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LocKernel {
    /// Standard logistic density.
    Logistic { scale: f64 },
    Normal { sd: f64 },
}

impl Default for LocKernel {
    fn default() -> Self {
        Self::Logistic { scale: 1.0 }
    }
}

impl LocKernel {
    pub fn log_density(&self, z: f64) -> f64 {
        match *self {
            Self::Logistic { scale } => {
                let u = z / scale;
                // -u - 2 ln(1 + e^{-u}), written stably
                -u.abs() - 2.0 * (-u.abs()).exp().ln_1p() - scale.ln()
            }
            Self::Normal { sd } => {
                -0.5 * (z / sd).powi(2) - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Logistic { scale } => {
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                scale * (u / (1.0 - u)).ln()
            }
            Self::Normal { sd } => sd * rng.sample::<f64, _>(StandardNormal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Kernels {
    #[serde(default)]
    pub shape: Option<ShapePrior>,
    #[serde(default)]
    pub scale: ScaleKernel,
    #[serde(default)]
    pub loc: LocKernel,
}

/// Margin prior `Ψ_n`: a shape prior, the scale and location kernels, and
/// the centring estimates (unit scale and zero location when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct MarginPriorConfig {
    pub family: MarginFamily,
    pub d: usize,
    pub shape: Option<ShapePrior>,
    pub scale: ScaleKernel,
    pub loc: LocKernel,
    pub sigma_hat: Vec<f64>,
    pub mu_hat: Vec<f64>,
}

impl MarginPriorConfig {
    /// Builds and checks the configuration. Weibull shapes need a compact
    /// uniform prior inside `(1, ∞)`.
    pub fn new(family: MarginFamily, d: usize, kernels: Kernels, eb: Option<&EbEstimates>) -> Result<Self> {
        let shape = if family.has_shape() {
            let s = match (family, kernels.shape) {
                (MarginFamily::Weibull, Some(s @ ShapePrior::Uniform { lower, upper })) => {
                    if !(lower > 1.0 && upper > lower && upper.is_finite()) {
                        return Err(Error::Config(format!(
                            "Weibull shape prior must be a compact interval inside (1, inf), got [{lower}, {upper}]"
                        )));
                    }
                    s
                }
                (MarginFamily::Weibull, _) => {
                    return Err(Error::Config(
                        "Weibull margins need a compact uniform shape prior {\"kind\":\"uniform\",\"lower\":L,\"upper\":U} with 1 < L < U"
                            .into(),
                    ))
                }
                (_, Some(s)) => s,
                (_, None) => ShapePrior::Gamma { shape: 2.0, rate: 1.0 },
            };
            Some(s)
        } else {
            None
        };
        let (sigma_hat, mu_hat) = match eb {
            Some(e) => {
                if e.sigma_hat.len() != d {
                    return Err(Error::Config(format!("expected {d} scale estimates, got {}", e.sigma_hat.len())));
                }
                if let Some(j) = e.sigma_hat.iter().position(|&s| !(s > 0.0)) {
                    return Err(Error::Config(format!(
                        "scale estimate for coordinate {} is {}, must be positive",
                        j + 1,
                        e.sigma_hat[j]
                    )));
                }
                let mu = if family.has_loc() {
                    if e.mu_hat.len() != d {
                        return Err(Error::Config(format!("{family} margins need {d} location estimates")));
                    }
                    e.mu_hat.clone()
                } else {
                    vec![0.0; d]
                };
                (e.sigma_hat.clone(), mu)
            }
            None => (vec![1.0; d], vec![0.0; d]),
        };
        Ok(Self { family, d, shape, scale: kernels.scale, loc: kernels.loc, sigma_hat, mu_hat })
    }

    /// An initial parameter value at the prior centre.
    pub fn initial(&self) -> MarginSpec<f64> {
        let d = self.d;
        let shape = self.shape.map(|s| vec![s.center(); d]).unwrap_or_default();
        // the Gamma(2, 2) kernel has mean 1
        let scale = self.sigma_hat.clone();
        let loc = self.mu_hat.clone();
        match self.family {
            MarginFamily::Simple => MarginSpec::simple(),
            MarginFamily::Frechet => MarginSpec::frechet(shape, scale),
            MarginFamily::Weibull => MarginSpec::weibull(shape, scale, loc),
            MarginFamily::Gumbel => MarginSpec::gumbel(scale, loc),
        }
    }
}

impl MarginPriorConfig {
    /// A draw from the prior, used when the centre is outside the support of
    /// the data.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> MarginSpec<f64> {
        let d = self.d;
        let shape: Vec<f64> = match &self.shape {
            Some(s) => (0..d).map(|_| s.sample(rng)).collect(),
            None => Vec::new(),
        };
        let scale: Vec<f64> = self.sigma_hat.iter().map(|&s| s * self.scale.sample(rng)).collect();
        let loc: Vec<f64> = (0..d).map(|j| self.mu_hat[j] + self.sigma_hat[j] * self.loc.sample(rng)).collect();
        match self.family {
            MarginFamily::Simple => MarginSpec::simple(),
            MarginFamily::Frechet => MarginSpec::frechet(shape, scale),
            MarginFamily::Weibull => MarginSpec::weibull(shape, scale, loc),
            MarginFamily::Gumbel => MarginSpec::gumbel(scale, loc),
        }
    }
}

/// `ln dΨ_n(ϑ)`.
pub fn data_prior_log_density(cfg: &MarginPriorConfig, theta: &MarginSpec<f64>) -> Result<f64> {
    if theta.family != cfg.family {
        return Err(Error::Config(format!("prior is for {} margins, got {}", cfg.family, theta.family)));
    }
    let mut acc = 0.0;
    if let Some(s) = &cfg.shape {
        acc += theta.shape.iter().map(|&x| s.log_density(x)).sum::<f64>();
    }
    if cfg.family.has_scale() {
        for j in 0..cfg.d {
            let sh = cfg.sigma_hat[j];
            if !(sh > 0.0) {
                return Err(Error::Config(format!("scale estimate {sh} must be positive")));
            }
            acc += cfg.scale.log_density(theta.scale[j] / sh) - sh.ln();
            if cfg.family.has_loc() {
                acc += cfg.loc.log_density((theta.loc[j] - cfg.mu_hat[j]) / sh) - sh.ln();
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::eb::EbEstimator;

    fn eb(sigma: Vec<f64>, mu: Vec<f64>) -> EbEstimates {
        EbEstimates { sigma_hat: sigma, mu_hat: mu, estimator: EbEstimator::Gumbel, block_size: 10, degenerate: vec![] }
    }

    #[test]
    fn unit_estimates_reduce_to_plain_prior() {
        let k = Kernels::default();
        let a = MarginPriorConfig::new(MarginFamily::Gumbel, 2, k, Some(&eb(vec![1.0, 1.0], vec![0.0, 0.0]))).unwrap();
        let b = MarginPriorConfig::new(MarginFamily::Gumbel, 2, k, None).unwrap();
        let th = MarginSpec::gumbel(vec![0.7, 1.3], vec![-0.2, 0.4]);
        assert_eq!(data_prior_log_density(&a, &th).unwrap(), data_prior_log_density(&b, &th).unwrap());
    }

    #[test]
    fn scale_change_of_variables() {
        let k = Kernels::default();
        let c = 3.5;
        let base = MarginPriorConfig::new(MarginFamily::Frechet, 2, k, None).unwrap();
        let e = EbEstimates { estimator: EbEstimator::FrechetScale, ..eb(vec![c, c], vec![]) };
        let scaled = MarginPriorConfig::new(MarginFamily::Frechet, 2, k, Some(&e)).unwrap();
        let t0 = MarginSpec::frechet(vec![1.5, 2.0], vec![0.8, 1.6]);
        let t1 = MarginSpec::frechet(vec![1.5, 2.0], vec![0.8 * c, 1.6 * c]);
        let lhs = data_prior_log_density(&scaled, &t1).unwrap();
        let rhs = data_prior_log_density(&base, &t0).unwrap() - 2.0 * c.ln();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn scale_kernel_positive_near_one() {
        let k = ScaleKernel::default();
        for i in 1..100 {
            let x = 0.5 + i as f64 / 100.0;
            assert!(k.log_density(x).is_finite());
        }
        // 4 x e^{-2x}
        assert!((k.log_density(0.75) - (3.0f64 * (-1.5f64).exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn logistic_kernel_normalized() {
        let k = LocKernel::default();
        let r = crate::quad::integrate(|z| k.log_density(z).exp(), -40.0, 40.0, 1e-12, 1e-12);
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!((k.log_density(0.0) - 0.25f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn weibull_requires_compact_shape_support() {
        let k = Kernels::default();
        assert!(matches!(MarginPriorConfig::new(MarginFamily::Weibull, 2, k, None), Err(Error::Config(_))));
        let bad = Kernels { shape: Some(ShapePrior::Uniform { lower: 0.5, upper: 3.0 }), ..k };
        assert!(MarginPriorConfig::new(MarginFamily::Weibull, 2, bad, None).is_err());
        let ok = Kernels { shape: Some(ShapePrior::Uniform { lower: 1.2, upper: 4.0 }), ..k };
        let cfg = MarginPriorConfig::new(MarginFamily::Weibull, 2, ok, None).unwrap();
        assert!(data_prior_log_density(&cfg, &cfg.initial()).unwrap().is_finite());
    }

    #[test]
    fn nonpositive_estimate_is_a_config_error() {
        let k = Kernels::default();
        let e = eb(vec![1.0, 0.0], vec![0.0, 0.0]);
        assert!(matches!(MarginPriorConfig::new(MarginFamily::Gumbel, 2, k, Some(&e)), Err(Error::Config(_))));
    }
}
