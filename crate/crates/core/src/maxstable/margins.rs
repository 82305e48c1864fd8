//! Margin families and the transform to unit-Fréchet scale.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginFamily {
    /// Unit-Fréchet margins; no parameters.
    Simple,
    Frechet,
    Weibull,
    Gumbel,
}

impl MarginFamily {
    pub fn has_shape(self) -> bool {
        matches!(self, Self::Frechet | Self::Weibull)
    }

    pub fn has_scale(self) -> bool {
        !matches!(self, Self::Simple)
    }

    pub fn has_loc(self) -> bool {
        matches!(self, Self::Weibull | Self::Gumbel)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Simple => "simple",
            Self::Frechet => "frechet",
            Self::Weibull => "weibull",
            Self::Gumbel => "gumbel",
        }
    }
}

impl fmt::Display for MarginFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MarginFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(Self::Simple),
            "frechet" | "fréchet" => Ok(Self::Frechet),
            "weibull" => Ok(Self::Weibull),
            "gumbel" => Ok(Self::Gumbel),
            other => Err(Error::Config(format!("unknown margin family '{other}'"))),
        }
    }
}

/// Per-coordinate margin parameters. Unused parameter vectors are empty:
/// Fréchet uses (shape ρ, scale σ), Weibull (shape ω, scale σ, loc μ),
/// Gumbel (scale σ, loc μ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct MarginSpec<T> {
    pub family: MarginFamily,
    #[serde(default)]
    pub shape: Vec<T>,
    #[serde(default)]
    pub scale: Vec<T>,
    #[serde(default)]
    pub loc: Vec<T>,
}

impl<T: Real> MarginSpec<T> {
    pub fn simple() -> Self {
        Self { family: MarginFamily::Simple, shape: vec![], scale: vec![], loc: vec![] }
    }

    pub fn frechet(shape: Vec<T>, scale: Vec<T>) -> Self {
        Self { family: MarginFamily::Frechet, shape, scale, loc: vec![] }
    }

    pub fn weibull(shape: Vec<T>, scale: Vec<T>, loc: Vec<T>) -> Self {
        Self { family: MarginFamily::Weibull, shape, scale, loc }
    }

    pub fn gumbel(scale: Vec<T>, loc: Vec<T>) -> Self {
        Self { family: MarginFamily::Gumbel, shape: vec![], scale, loc }
    }

    /// Checks vector lengths against `d` and positivity of shapes and scales.
    pub fn validate(&self, d: usize) -> Result<()> {
        let f = self.family;
        let want = |has: bool| if has { d } else { 0 };
        for (name, v, has) in [
            ("shape", &self.shape, f.has_shape()),
            ("scale", &self.scale, f.has_scale()),
            ("loc", &self.loc, f.has_loc()),
        ] {
            if v.len() != want(has) {
                return Err(Error::Structure(format!(
                    "{f} margins need {} {name} parameters, got {}",
                    want(has),
                    v.len()
                )));
            }
            if name != "loc" {
                if let Some(j) = v.iter().position(|x| !(*x > T::zero()) || !x.is_finite()) {
                    return Err(Error::Config(format!("{name} parameter {} must be positive, got {}", j + 1, v[j])));
                }
            } else if let Some(j) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::Config(format!("loc parameter {} must be finite", j + 1)));
            }
        }
        Ok(())
    }

    /// `U_ϑ(x_j)` and `ln U'_ϑ(x_j)` for one coordinate; `None` outside the
    /// support.
    pub fn transform_coordinate(&self, j: usize, x: T) -> Option<(T, T)> {
        match self.family {
            MarginFamily::Simple => (x > T::zero() && x.is_finite()).then_some((x, T::zero())),
            MarginFamily::Frechet => {
                if !(x > T::zero()) || !x.is_finite() {
                    return None;
                }
                let (rho, sigma) = (self.shape[j], self.scale[j]);
                let z = x / sigma;
                Some((z.powf(rho), (rho / sigma).ln() + (rho - T::one()) * z.ln()))
            }
            MarginFamily::Weibull => {
                let (omega, sigma, mu) = (self.shape[j], self.scale[j], self.loc[j]);
                if !(x < mu) || !x.is_finite() {
                    return None;
                }
                let z = (mu - x) / sigma;
                Some((z.powf(-omega), (omega / sigma).ln() - (omega + T::one()) * z.ln()))
            }
            MarginFamily::Gumbel => {
                if !x.is_finite() {
                    return None;
                }
                let z = (x - self.loc[j]) / self.scale[j];
                Some((z.exp(), z - self.scale[j].ln()))
            }
        }
    }

    /// Inverse transform from the unit-Fréchet scale.
    pub fn inverse_coordinate(&self, j: usize, u: T) -> T {
        match self.family {
            MarginFamily::Simple => u,
            MarginFamily::Frechet => self.scale[j] * u.powf(self.shape[j].recip()),
            MarginFamily::Weibull => self.loc[j] - self.scale[j] * u.powf(-self.shape[j].recip()),
            MarginFamily::Gumbel => self.loc[j] + self.scale[j] * u.ln(),
        }
    }

    /// Marginal cdf of coordinate `j`: `exp(-1/U_ϑ(x))`.
    pub fn cdf_coordinate(&self, j: usize, x: T) -> T {
        match self.transform_coordinate(j, x) {
            Some((u, _)) => (-u.recip()).exp(),
            None => match self.family {
                MarginFamily::Weibull if x >= self.loc[j] => T::one(),
                _ => T::zero(),
            },
        }
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> MarginSpec<U> {
        MarginSpec {
            family: self.family,
            shape: self.shape.iter().map(|&x| f(x)).collect(),
            scale: self.scale.iter().map(|&x| f(x)).collect(),
            loc: self.loc.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// Maps `x` to the unit-Fréchet scale, returning `(u, Σ_j ln U'_j(x_j))`.
pub fn margin_transform<T: Real>(margins: &MarginSpec<T>, x: &[T]) -> Result<(Vec<T>, T)> {
    let mut u = Vec::with_capacity(x.len());
    let mut log_jac = T::zero();
    for (j, &xj) in x.iter().enumerate() {
        let (uj, lj) = margins.transform_coordinate(j, xj).ok_or_else(|| {
            Error::Domain(format!("coordinate {} (x = {xj}) lies outside the {} support", j + 1, margins.family))
        })?;
        u.push(uj);
        log_jac = log_jac + lj;
    }
    Ok((u, log_jac))
}
