//! Data-dependent estimates of the norming constants used to centre the
//! margin priors for block-maxima inference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EbEstimator {
    FrechetScale,
    Gumbel,
    Weibull,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbEstimates {
    pub sigma_hat: Vec<f64>,
    #[serde(default)]
    pub mu_hat: Vec<f64>,
    pub estimator: EbEstimator,
    pub block_size: usize,
    /// Coordinates whose scale estimate is zero.
    #[serde(default)]
    pub degenerate: Vec<usize>,
}

/// A univariate distribution seen through the two functionals the
/// estimators need.
pub trait TailFunctionals {
    /// Left generalized inverse `F^←(1 - 1/m)`.
    fn upper_quantile(&self, m: usize) -> f64;
    /// `∫_x^∞ (1 - F(t)) dt`.
    fn excess_integral(&self, x: f64) -> f64;
}

/// Empirical distribution of one sorted column.
pub struct Empirical<'a> {
    sorted: &'a [f64],
}

impl<'a> Empirical<'a> {
    pub fn new(sorted: &'a [f64]) -> Self {
        Self { sorted }
    }
}

impl TailFunctionals for Empirical<'_> {
    /// `inf{x : F̂(x) >= 1 - 1/m}` is the order statistic of rank
    /// `N - ⌊N/m⌋` (1-based).
    fn upper_quantile(&self, m: usize) -> f64 {
        let n = self.sorted.len();
        self.sorted[n - n / m - 1]
    }

    /// The empirical survival integrates to `Σ (x_i - x)_+ / N`.
    fn excess_integral(&self, x: f64) -> f64 {
        self.sorted.iter().map(|&v| (v - x).max(0.0)).sum::<f64>() / self.sorted.len() as f64
    }
}

/// Standard exponential distribution with analytic functionals.
pub struct StandardExponential;

impl TailFunctionals for StandardExponential {
    fn upper_quantile(&self, m: usize) -> f64 {
        (m as f64).ln()
    }

    fn excess_integral(&self, x: f64) -> f64 {
        (-x).exp()
    }
}

/// `(μ̂, σ̂) = (F^←(1-1/m), m ∫_{μ̂}^∞ (1 - F))`.
pub fn gumbel_functionals<F: TailFunctionals + ?Sized>(dist: &F, m: usize) -> (f64, f64) {
    let mu = dist.upper_quantile(m);
    (mu, m as f64 * dist.excess_integral(mu))
}

fn columns(data: &[Vec<f64>], m: usize, min_m: usize) -> Result<Vec<Vec<f64>>> {
    if m < min_m {
        return Err(Error::Domain(format!("block size must be at least {min_m}, got {m}")));
    }
    let n = data.len();
    if n < m {
        return Err(Error::Domain(format!("need at least m = {m} rows, got {n}")));
    }
    let d = data[0].len();
    if let Some(i) = data.iter().position(|r| r.len() != d) {
        return Err(Error::Structure(format!("row {} has {} columns, expected {d}", i + 1, data[i].len())));
    }
    Ok((0..d)
        .map(|j| {
            let mut c: Vec<f64> = data.iter().map(|r| r[j]).collect();
            c.sort_by(f64::total_cmp);
            c
        })
        .collect())
}

/// `σ̂_j = F̂_j^←(1 - 1/m)` on the raw sample.
pub fn eb_frechet_scale(raw: &[Vec<f64>], m: usize) -> Result<EbEstimates> {
    let cols = columns(raw, m, 2)?;
    if let Some(j) = cols.iter().position(|c| c[0] <= 0.0) {
        return Err(Error::Domain(format!("column {} has nonpositive values", j + 1)));
    }
    Ok(EbEstimates {
        sigma_hat: cols.iter().map(|c| Empirical::new(c).upper_quantile(m)).collect(),
        mu_hat: vec![],
        estimator: EbEstimator::FrechetScale,
        block_size: m,
        degenerate: vec![],
    })
}

/// `μ̂_j = F̂_j^←(1 - 1/m)`, `σ̂_j = m Σ_i (x_ij - μ̂_j)_+ / N`.
pub fn eb_gumbel_loc_scale(raw: &[Vec<f64>], m: usize) -> Result<EbEstimates> {
    let cols = columns(raw, m, 2)?;
    let mut est = EbEstimates {
        sigma_hat: vec![],
        mu_hat: vec![],
        estimator: EbEstimator::Gumbel,
        block_size: m,
        degenerate: vec![],
    };
    for (j, c) in cols.iter().enumerate() {
        let (mu, sigma) = gumbel_functionals(&Empirical::new(c), m);
        if sigma <= 0.0 {
            est.degenerate.push(j);
        }
        est.mu_hat.push(mu);
        est.sigma_hat.push(sigma);
    }
    Ok(est)
}

/// Log-spacing moments of the top order statistics of one sorted column
/// with `N = n m` entries: reference `Z_{N-n}` and
/// `ξ_l = (1/n) Σ_{i=1}^{n-1} (ln Z_{N-i} - ln Z_{N-n})^l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSpacingMoments {
    pub reference: f64,
    pub xi1: f64,
    pub xi2: f64,
}

impl LogSpacingMoments {
    pub fn from_sorted(sorted: &[f64], n: usize) -> Result<Self> {
        let big_n = sorted.len();
        if n < 2 || n >= big_n {
            return Err(Error::Domain(format!("need 2 <= n < N, got n = {n}, N = {big_n}")));
        }
        // 1-based Z_{s} is sorted[s - 1]
        let reference = sorted[big_n - n - 1];
        if !(reference > 0.0) {
            return Err(Error::Domain(format!("reference order statistic {reference} must be positive")));
        }
        let lr = reference.ln();
        let (mut xi1, mut xi2) = (0.0, 0.0);
        for i in 1..n {
            let l = sorted[big_n - i - 1].ln() - lr;
            xi1 += l;
            xi2 += l * l;
        }
        Ok(Self { reference, xi1: xi1 / n as f64, xi2: xi2 / n as f64 })
    }

    /// `γ̂⁻ = (ξ_2 - 2ξ_1²) / (2(ξ_2 - ξ_1²))`.
    pub fn gamma_minus(&self) -> Result<f64> {
        let den = self.xi2 - self.xi1 * self.xi1;
        if den == 0.0 || !den.is_finite() {
            return Err(Error::Degenerate("log-spacings have zero variance; tail index undefined".into()));
        }
        Ok((self.xi2 - 2.0 * self.xi1 * self.xi1) / (2.0 * den))
    }
}

/// `σ̂ = Z_{N-n} ξ_1 (1 - γ̂⁻)/(-γ̂)`, `μ̂ = Z_{N-n} + σ̂`, with `γ̂ = γ̂⁻`
/// unless supplied.
pub fn eb_weibull_loc_scale(raw: &[Vec<f64>], m: usize, gamma_hat: Option<&[f64]>) -> Result<EbEstimates> {
    let cols = columns(raw, m, 1)?;
    let big_n = raw.len();
    if big_n % m != 0 {
        return Err(Error::Domain(format!("sample size {big_n} is not a multiple of m = {m}")));
    }
    let n = big_n / m;
    if let Some(g) = gamma_hat {
        if g.len() != cols.len() {
            return Err(Error::Structure(format!("expected {} tail indices, got {}", cols.len(), g.len())));
        }
    }
    let mut est = EbEstimates {
        sigma_hat: vec![],
        mu_hat: vec![],
        estimator: EbEstimator::Weibull,
        block_size: m,
        degenerate: vec![],
    };
    for (j, c) in cols.iter().enumerate() {
        let mom = LogSpacingMoments::from_sorted(c, n)?;
        let gm = mom.gamma_minus()?;
        let g = gamma_hat.map_or(gm, |g| g[j]);
        if !(g < 0.0) {
            return Err(Error::Degenerate(format!(
                "column {}: tail index estimate {g} is not negative, so the data do not look short-tailed",
                j + 1
            )));
        }
        let sigma = mom.reference * mom.xi1 * (1.0 - gm) / (-g);
        est.sigma_hat.push(sigma);
        est.mu_hat.push(mom.reference + sigma);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::SeededRng;
    use rand::Rng;

    fn column(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn frechet_examples() {
        let e = eb_frechet_scale(&column(&[3.5; 20]), 5).unwrap();
        assert_eq!(e.sigma_hat, vec![3.5]);
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(eb_frechet_scale(&column(&v), 10).unwrap().sigma_hat, vec![90.0]);
        assert!(eb_frechet_scale(&column(&v), 1).is_err());
    }

    #[test]
    fn frechet_pareto_median_ratio() {
        // Pareto(ρ) column: F^←(1 - 1/m) = m^{1/ρ}
        let rho = 2.0;
        let m = 100;
        let mut ratios: Vec<f64> = (0..11)
            .map(|s| {
                let mut rng = SeededRng::new(100 + s, 0);
                let v: Vec<f64> = (0..50_000).map(|_| (1.0 - rng.random::<f64>()).powf(-1.0 / rho)).collect();
                eb_frechet_scale(&column(&v), m).unwrap().sigma_hat[0] / (m as f64).powf(1.0 / rho)
            })
            .collect();
        ratios.sort_by(f64::total_cmp);
        assert!((ratios[5] - 1.0).abs() < 0.02, "{}", ratios[5]);
    }

    #[test]
    fn gumbel_analytic_exponential() {
        for &m in &[2usize, 10, 20, 50, 100] {
            let (mu, sigma) = gumbel_functionals(&StandardExponential, m);
            assert_eq!(mu, (m as f64).ln());
            assert!((sigma - 1.0).abs() <= 8.0 * f64::EPSILON, "m={m}");
        }
        for m in 2..2000 {
            let (_, sigma) = gumbel_functionals(&StandardExponential, m);
            assert!((sigma - 1.0).abs() <= 8.0 * f64::EPSILON, "m={m}");
        }
    }

    #[test]
    fn gumbel_examples() {
        let e = eb_gumbel_loc_scale(&column(&[2.0; 10]), 5).unwrap();
        assert_eq!(e.sigma_hat, vec![0.0]);
        assert_eq!(e.degenerate, vec![0]);
        let v: Vec<f64> = (0..200).map(|i| ((i * 37) % 200) as f64 * 0.1).collect();
        let a = eb_gumbel_loc_scale(&column(&v), 20).unwrap();
        let shifted: Vec<f64> = v.iter().map(|x| x + 7.0).collect();
        let b = eb_gumbel_loc_scale(&column(&shifted), 20).unwrap();
        assert!((b.mu_hat[0] - a.mu_hat[0] - 7.0).abs() < 1e-12);
        assert!((b.sigma_hat[0] - a.sigma_hat[0]).abs() < 1e-12);
        let mut perm = v.clone();
        perm.reverse();
        assert_eq!(eb_gumbel_loc_scale(&column(&perm), 20).unwrap(), a);
    }

    #[test]
    fn weibull_hand_sample() {
        // Z = (1,2,3,4), n = 2, m = 2: reference Z_2 = 2, one spacing ln(3/2)
        let mom = LogSpacingMoments::from_sorted(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        let l = 1.5f64.ln();
        assert_eq!(mom.reference, 2.0);
        assert!((mom.xi1 - l / 2.0).abs() < 1e-15);
        assert!((mom.xi2 - l * l / 2.0).abs() < 1e-15);
        // ξ_2 = 2ξ_1² exactly, so γ̂⁻ = 0 and the default γ̂ is not negative
        assert!(mom.gamma_minus().unwrap().abs() < 1e-15);
        assert!(matches!(eb_weibull_loc_scale(&column(&[1.0, 2.0, 3.0, 4.0]), 2, None), Err(Error::Degenerate(_))));
        let e = eb_weibull_loc_scale(&column(&[1.0, 2.0, 3.0, 4.0]), 2, Some(&[-0.5])).unwrap();
        let gm = mom.gamma_minus().unwrap();
        let sigma = 2.0 * (l / 2.0) * (1.0 - gm) / 0.5;
        assert!((e.sigma_hat[0] - sigma).abs() < 1e-14);
        assert!((e.mu_hat[0] - (2.0 + sigma)).abs() < 1e-14);
        assert!(matches!(
            LogSpacingMoments::from_sorted(&[1.0, 1.0, 1.0, 1.0], 2).unwrap().gamma_minus(),
            Err(Error::Degenerate(_))
        ));
    }

    fn reverse_weibull_sample(seed: u64, big_n: usize, omega: f64, mu: f64) -> Vec<f64> {
        // F(x) = 1 - (mu - x)^omega on [mu - 1, mu]
        let mut rng = SeededRng::new(seed, 0);
        (0..big_n).map(|_| mu - (1.0 - rng.random::<f64>()).powf(1.0 / omega)).collect()
    }

    #[test]
    fn weibull_scale_equivariance() {
        let v = reverse_weibull_sample(1, 4000, 2.0, 5.0);
        let a = eb_weibull_loc_scale(&column(&v), 20, Some(&[-0.5])).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| 3.0 * x).collect();
        let b = eb_weibull_loc_scale(&column(&scaled), 20, Some(&[-0.5])).unwrap();
        assert!((b.sigma_hat[0] - 3.0 * a.sigma_hat[0]).abs() < 1e-10 * a.sigma_hat[0]);
    }

    #[test]
    fn weibull_location_targets_endpoint() {
        // F(x) = 1 - (μ - x)^ω near the endpoint: b_m = μ, a_m = m^{-1/ω}
        let (omega, mu, m) = (2.0, 5.0, 50);
        let mut errs: Vec<f64> = (0..11)
            .map(|s| {
                let v = reverse_weibull_sample(200 + s, 500 * m, omega, mu);
                let e = eb_weibull_loc_scale(&column(&v), m, None).unwrap();
                (e.mu_hat[0] - mu) / (m as f64).powf(-1.0 / omega)
            })
            .collect();
        errs.sort_by(f64::total_cmp);
        assert!(errs[5].abs() < 0.5, "{}", errs[5]);
    }
}
