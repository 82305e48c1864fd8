//! Priors on the degree, the interior weights and the margin parameters,
//! including data-dependent priors centred by empirical-Bayes estimates.

mod degree;
mod eb;
mod margin;
mod weights;

pub use degree::{default_k_cap, degree_log_pmf, degree_sample, DegreePrior, DegreePriorConfig};
pub use eb::{
    eb_frechet_scale, eb_gumbel_loc_scale, eb_weibull_loc_scale, gumbel_functionals, EbEstimates, EbEstimator,
    Empirical, LogSpacingMoments, StandardExponential, TailFunctionals,
};
pub use margin::{data_prior_log_density, Kernels, LocKernel, MarginPriorConfig, ScaleKernel, ShapePrior};
pub use weights::{is_feasible, log_normalizer, weights_log_density, weights_sample, weights_sample_model};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxstable::MarginFamily;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MarginsConfig {
    #[serde(default)]
    pub family: Option<MarginFamily>,
    #[serde(default)]
    pub kernels: Kernels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EbConfig {
    pub estimator: EbEstimator,
    pub m: usize,
}

/// The prior configuration document:
/// `{"degree": {...}, "margins": {"family": ..., "kernels": {...}}, "eb": {"estimator": ..., "m": ...}}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    #[serde(default)]
    pub degree: DegreePriorConfig,
    #[serde(default)]
    pub margins: MarginsConfig,
    #[serde(default)]
    pub eb: Option<EbConfig>,
}

impl PriorConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("prior config: {e}")))
    }

    /// Computes the estimates requested by the `eb` block on raw
    /// (pre-blocking) data.
    pub fn eb_estimates(&self, raw: &[Vec<f64>]) -> Result<Option<EbEstimates>> {
        let Some(eb) = self.eb else { return Ok(None) };
        let est = match eb.estimator {
            EbEstimator::FrechetScale => eb_frechet_scale(raw, eb.m)?,
            EbEstimator::Gumbel => eb_gumbel_loc_scale(raw, eb.m)?,
            EbEstimator::Weibull => eb_weibull_loc_scale(raw, eb.m, None)?,
        };
        Ok(Some(est))
    }
}

/// Everything the sampler needs to evaluate the prior.
#[derive(Debug, Clone)]
pub struct Priors {
    pub degree: DegreePrior,
    pub margins: MarginPriorConfig,
}

impl Priors {
    pub fn new(d: usize, family: MarginFamily, cfg: &PriorConfig, eb: Option<&EbEstimates>) -> Result<Self> {
        if let Some(f) = cfg.margins.family {
            if f != family {
                return Err(Error::Config(format!("prior config is for {f} margins but {family} was requested")));
            }
        }
        Ok(Self {
            degree: DegreePrior::from_config(d, &cfg.degree)?,
            margins: MarginPriorConfig::new(family, d, cfg.margins.kernels, eb)?,
        })
    }

    pub fn d(&self) -> usize {
        self.degree.d()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_document() {
        let text = r#"{"degree": {"q": 0.3, "k_cap": 12},
            "margins": {"family": "weibull", "kernels": {"shape": {"kind": "uniform", "lower": 1.5, "upper": 5}}},
            "eb": {"estimator": "frechet-scale", "m": 50}}"#;
        let c = PriorConfig::from_json(text).unwrap();
        assert_eq!(c.degree.q, 0.3);
        assert_eq!(c.degree.k_cap, Some(12));
        assert_eq!(c.margins.family, Some(MarginFamily::Weibull));
        assert_eq!(c.eb.unwrap().m, 50);
        assert!(Priors::new(2, MarginFamily::Weibull, &c, None).is_ok());
    }

    #[test]
    fn empty_document_uses_defaults() {
        let c = PriorConfig::from_json("{}").unwrap();
        let p = Priors::new(2, MarginFamily::Frechet, &c, None).unwrap();
        assert_eq!(p.degree.k_min(), 3);
        assert_eq!(p.degree.k_cap(), 40);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(PriorConfig::from_json(r#"{"degre": {}}"#), Err(Error::Config(_))));
    }
}
