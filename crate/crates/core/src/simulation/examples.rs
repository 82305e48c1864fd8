//! Generators for bivariate laws in the max-domain of attraction of a
//! max-stable model, used as misspecified truths.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxstable::MarginSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExampleName {
    /// `F(x) = 1 - x_1^{-ρ_1} - x_2^{-ρ_2} + (x_1^{ρ_1} + x_2^{ρ_2} - 1)^{-1}` on `[1, ∞)²`.
    #[serde(rename = "exp-pareto")]
    ExpPareto,
    /// Joe (B5) copula with Pareto(ρ_j) margins.
    #[serde(rename = "joe-b5-pareto")]
    JoeB5Pareto,
    /// `F(x) = 1 - e^{-x_1} - e^{-x_2} + (e^{x_1} + e^{x_2} - 1)^{-1}` on `[0, ∞)²`.
    #[serde(rename = "biv-exponential")]
    BivExponential,
}

impl ExampleName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::ExpPareto => "exp-pareto",
            Self::JoeB5Pareto => "joe-b5-pareto",
            Self::BivExponential => "biv-exponential",
        }
    }
}

impl fmt::Display for ExampleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExampleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp-pareto" => Ok(Self::ExpPareto),
            "joe-b5-pareto" => Ok(Self::JoeB5Pareto),
            "biv-exponential" => Ok(Self::BivExponential),
            other => Err(Error::Config(format!(
                "unknown example '{other}' (expected exp-pareto, joe-b5-pareto or biv-exponential)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleParams {
    /// Pareto tail indices `ρ_0`.
    #[serde(default = "default_rho")]
    pub rho: Vec<f64>,
    /// Joe copula parameter.
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_rho() -> Vec<f64> {
    vec![1.0, 1.0]
}

fn default_theta() -> f64 {
    3.0
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self { rho: default_rho(), theta: default_theta() }
    }
}

/// Uniform on `(0, 1]`.
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Bisection for the decreasing-in-`x` root of `f(x) = target` on `[lo, hi]`
/// where `f(lo) >= target >= f(hi)`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Draws on the Pareto(1) scale from the survival copula
/// `P(U_1 > u_1, U_2 > u_2) = 1/(u_1 + u_2 - 1)`; the conditional
/// survival of `U_2` given `U_1 = u_1` is `(u_1/(u_1 + u_2 - 1))²`, which
/// inverts in closed form.
fn pareto_pair<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let u1 = 1.0 / open_uniform(rng);
    let v = open_uniform(rng);
    (u1, 1.0 - u1 + u1 / v.sqrt())
}

/// Joe copula on survival coordinates `(a, b)`: draws `a` uniform and
/// inverts `∂C/∂u` for `b` by bisection on `ln b`.
fn joe_pair<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> (f64, f64) {
    let a = open_uniform(rng);
    let target = rng.random::<f64>();
    let at = a.powf(theta);
    let cond = |lb: f64| {
        let bt = (theta * lb).exp();
        (at + bt - at * bt).powf(1.0 / theta - 1.0) * a.powf(theta - 1.0) * (1.0 - bt)
    };
    let lb = bisect_decreasing(cond, target, -745.0, 0.0, 1e-12);
    (a, lb.exp())
}

/// `n` iid rows from the named generator.
pub fn gen_example<R: Rng + ?Sized>(name: ExampleName, params: &ExampleParams, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::Domain("number of rows must be at least 1".into()));
    }
    let rho = &params.rho;
    if matches!(name, ExampleName::ExpPareto | ExampleName::JoeB5Pareto)
        && (rho.len() != 2 || rho.iter().any(|r| !(*r > 0.0)))
    {
        return Err(Error::Config(format!("rho must be two positive numbers, got {rho:?}")));
    }
    if name == ExampleName::JoeB5Pareto && !(params.theta >= 1.0) {
        return Err(Error::Config(format!("Joe copula needs theta >= 1, got {}", params.theta)));
    }
    Ok((0..n)
        .map(|_| match name {
            ExampleName::ExpPareto => {
                let (u1, u2) = pareto_pair(rng);
                vec![u1.powf(1.0 / rho[0]), u2.powf(1.0 / rho[1])]
            }
            ExampleName::BivExponential => {
                let (u1, u2) = pareto_pair(rng);
                vec![u1.ln(), u2.ln()]
            }
            ExampleName::JoeB5Pareto => {
                let (a, b) = joe_pair(params.theta, rng);
                vec![a.powf(-1.0 / rho[0]), b.powf(-1.0 / rho[1])]
            }
        })
        .collect())
}

/// Bivariate logistic max-stable law `V(y) = (y_1^{-θ} + y_2^{-θ})^{1/θ}`
/// with arbitrary margins: the extreme-value limit of the Joe copula.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticBivariate {
    pub theta: f64,
    pub margins: MarginSpec<f64>,
}

impl LogisticBivariate {
    pub fn new(theta: f64, margins: MarginSpec<f64>) -> Result<Self> {
        if !(theta >= 1.0) {
            return Err(Error::Config(format!("logistic dependence needs theta >= 1, got {theta}")));
        }
        margins.validate(2)?;
        Ok(Self { theta, margins })
    }

    fn parts(&self, y1: f64, y2: f64) -> (f64, f64, f64, f64) {
        let th = self.theta;
        let a = y1.powf(-th);
        let b = y2.powf(-th);
        let s = a + b;
        let v = s.powf(1.0 / th);
        let v1 = s.powf(1.0 / th - 1.0) * a / y1;
        let v2 = s.powf(1.0 / th - 1.0) * b / y2;
        let v12 = (th - 1.0) * s.powf(1.0 / th - 2.0) * a / y1 * b / y2;
        (v, v1, v2, v12)
    }

    pub fn log_density_simple(&self, y: &[f64]) -> f64 {
        if !(y[0] > 0.0 && y[1] > 0.0) {
            return f64::NEG_INFINITY;
        }
        let (v, v1, v2, v12) = self.parts(y[0], y[1]);
        (v1 * v2 + v12).ln() - v
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        match crate::maxstable::margin_transform(&self.margins, x) {
            Ok((u, lj)) => self.log_density_simple(&u) + lj,
            Err(_) => f64::NEG_INFINITY,
        }
    }

    /// `V(y)` on the unit-Fréchet scale.
    pub fn exponent(&self, y: &[f64]) -> f64 {
        self.parts(y[0], y[1]).0
    }

    /// Conditional inversion: unit-Fréchet `Y_1`, then `Y_2 | Y_1` by bisection
    /// on `ln y_2`.
    pub fn sample_simple<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let y1 = -1.0 / open_uniform(rng).ln();
        let target = rng.random::<f64>();
        let marg = 1.0 / (y1 * y1) * (-1.0 / y1).exp();
        let cond = |ly2: f64| {
            let (v, v1, _, _) = self.parts(y1, ly2.exp());
            (-v).exp() * v1 / marg
        };
        // conditional cdf increases in y_2; bisect on its complement
        let ly2 = bisect_decreasing(|l| 1.0 - cond(l), 1.0 - target, -40.0, 40.0, 1e-12);
        vec![y1, ly2.exp()]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let y = self.sample_simple(rng);
        y.iter().enumerate().map(|(j, &u)| self.margins.inverse_coordinate(j, u)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::SeededRng;

    fn ks<F: Fn(f64) -> f64>(mut xs: Vec<f64>, cdf: F) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let c = cdf(x);
                ((i + 1) as f64 / n - c).abs().max((c - i as f64 / n).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn exp_pareto_margins() {
        let p = ExampleParams { rho: vec![1.0, 2.0], theta: 3.0 };
        let mut rng = SeededRng::new(1, 0);
        let x = gen_example(ExampleName::ExpPareto, &p, 100_000, &mut rng).unwrap();
        for j in 0..2 {
            let r = p.rho[j];
            let d = ks(x.iter().map(|r| r[j]).collect(), |v| 1.0 - v.powf(-r));
            assert!(d <= 0.006, "margin {j}: {d}");
        }
        // joint cdf at one point against the closed form, 3 s.e.
        let (a, b) = (2.0f64, 1.5f64);
        let f = 1.0 - a.powf(-1.0) - b.powf(-2.0) + 1.0 / (a + b * b - 1.0);
        let emp = x.iter().filter(|r| r[0] <= a && r[1] <= b).count() as f64 / x.len() as f64;
        assert!((emp - f).abs() < 3.0 * (f * (1.0 - f) / x.len() as f64).sqrt(), "{emp} {f}");
    }

    #[test]
    fn biv_exponential_margins() {
        let mut rng = SeededRng::new(2, 0);
        let x = gen_example(ExampleName::BivExponential, &ExampleParams::default(), 100_000, &mut rng).unwrap();
        for j in 0..2 {
            let d = ks(x.iter().map(|r| r[j]).collect(), |v| 1.0 - (-v).exp());
            assert!(d <= 0.006, "margin {j}: {d}");
        }
    }

    #[test]
    fn joe_margins_and_copula() {
        let p = ExampleParams { rho: vec![1.0, 2.0], theta: 3.0 };
        let mut rng = SeededRng::new(3, 0);
        let x = gen_example(ExampleName::JoeB5Pareto, &p, 100_000, &mut rng).unwrap();
        for j in 0..2 {
            let r = p.rho[j];
            let d = ks(x.iter().map(|r| r[j]).collect(), |v| 1.0 - v.powf(-r));
            assert!(d <= 0.006, "margin {j}: {d}");
        }
        // C(u, v) at u = v = 0.7 on the cdf scale
        let th = 3.0f64;
        let (u, v) = (0.7f64, 0.7f64);
        let (a, b) = ((1.0 - u).powf(th), (1.0 - v).powf(th));
        let c = 1.0 - (a + b - a * b).powf(1.0 / th);
        let xu = (1.0 - u).powf(-1.0);
        let xv = (1.0 - v).powf(-0.5);
        let emp = x.iter().filter(|r| r[0] <= xu && r[1] <= xv).count() as f64 / x.len() as f64;
        assert!((emp - c).abs() < 3.0 * (c * (1.0 - c) / x.len() as f64).sqrt(), "{emp} {c}");
    }

    #[test]
    fn reproducible_and_named() {
        let p = ExampleParams::default();
        let a = gen_example(ExampleName::BivExponential, &p, 50, &mut SeededRng::new(7, 0)).unwrap();
        let b = gen_example(ExampleName::BivExponential, &p, 50, &mut SeededRng::new(7, 0)).unwrap();
        assert_eq!(a, b);
        assert!("nope".parse::<ExampleName>().is_err());
        assert_eq!("joe-b5-pareto".parse::<ExampleName>().unwrap(), ExampleName::JoeB5Pareto);
    }

    #[test]
    fn logistic_sampler_and_density() {
        let m = LogisticBivariate::new(3.0, MarginSpec::simple()).unwrap();
        let mut rng = SeededRng::new(4, 0);
        let ys: Vec<Vec<f64>> = (0..50_000).map(|_| m.sample_simple(&mut rng)).collect();
        let d = ks(ys.iter().map(|r| r[1]).collect(), |v| (-1.0 / v).exp());
        assert!(d <= 0.01, "{d}");
        let g = (-m.exponent(&[1.0, 2.0])).exp();
        let emp = ys.iter().filter(|r| r[0] <= 1.0 && r[1] <= 2.0).count() as f64 / ys.len() as f64;
        assert!((emp - g).abs() < 3.0 * (g * (1.0 - g) / ys.len() as f64).sqrt());
        // density integrates to one on a log grid
        let n = 400;
        let mut total = 0.0;
        let h = 24.0 / n as f64;
        for i in 0..n {
            for j in 0..n {
                let a = -12.0 + (i as f64 + 0.5) * h;
                let b = -12.0 + (j as f64 + 0.5) * h;
                total += (m.log_density_simple(&[a.exp(), b.exp()]) + a + b).exp() * h * h;
            }
        }
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }
}
