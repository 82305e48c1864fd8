//! Max-stable densities, likelihoods and partition probabilities.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exponent::{design_row2, neg_v_coefficients, neg_v_table};
use super::margins::{margin_transform, MarginSpec};
use super::partition::{enumerate_partitions, Partition, D_MAX};
use crate::angular::{AngularBp, MultiIndexGrid};
use crate::error::{Error, Result};
use crate::quad::integrate_region;
use crate::scalar::Real;
use crate::special::{ln_gamma, log_sum_exp};

/// An angular measure together with its margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "AngularBp<T>: Serialize, T: Serialize",
    deserialize = "AngularBp<T>: Deserialize<'de>, T: Deserialize<'de>"
))]
pub struct ModelSpec<T> {
    pub angular: AngularBp<T>,
    pub margins: MarginSpec<T>,
}

impl<T: Real> ModelSpec<T> {
    pub fn new(angular: AngularBp<T>, margins: MarginSpec<T>) -> Result<Self> {
        margins.validate(angular.d())?;
        Ok(Self { angular, margins })
    }

    pub fn simple(angular: AngularBp<T>) -> Self {
        Self { angular, margins: MarginSpec::simple() }
    }

    pub fn d(&self) -> usize {
        self.angular.d()
    }

    /// Checks the angular constraints and the margin parameters.
    pub fn validate(&self) -> Result<()> {
        self.angular.validate().into_result()?;
        self.margins.validate(self.angular.d())
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d > D_MAX {
        return Err(Error::Capability(format!("densities are limited to d <= {D_MAX}, got d = {d}")));
    }
    Ok(())
}

/// `ln g_1` from the exponent and the table of `-V_I` values (indexed by mask).
fn log_density_from_table<T: Real>(d: usize, y: &[T], table: &[T]) -> Result<T> {
    let v = (0..d).fold(T::zero(), |a, j| a + y[j] * table[1 << j]);
    let sum = if d == 2 {
        (table[1] * table[2] + table[3]).ln()
    } else {
        let parts = enumerate_partitions(d)?;
        let terms: Vec<T> = parts
            .iter()
            .map(|p| p.masks().iter().fold(T::zero(), |a, &m| a + table[m].ln()))
            .collect();
        log_sum_exp(&terms)
    };
    Ok(sum - v)
}

/// `ln g_1(y | H)` for a simple max-stable density.
pub fn log_density_simple<T: Real>(model: &AngularBp<T>, y: &[T]) -> Result<T> {
    check_dimension(model.d())?;
    let table = neg_v_table(model, y)?;
    log_density_from_table(model.d(), y, &table)
}

/// `ln g_ϑ(x | H) = ln g_1(U_ϑ(x)) + Σ ln U'_j(x_j)`.
pub fn log_density<T: Real>(model: &ModelSpec<T>, x: &[T]) -> Result<T> {
    if x.len() != model.d() {
        return Err(Error::Structure(format!("expected {} coordinates, got {}", model.d(), x.len())));
    }
    let (u, log_jac) = margin_transform(&model.margins, x)?;
    Ok(log_density_simple(&model.angular, &u)? + log_jac)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood<T> {
    pub value: T,
    /// First row (0-based) outside the margin support, if any; `value` is
    /// then `-∞`.
    pub outside_support: Option<usize>,
}

/// Sum of row log-densities. Rows are evaluated in parallel and reduced in
/// row order.
pub fn log_likelihood<T: Real>(model: &ModelSpec<T>, data: &[Vec<T>]) -> Result<LogLikelihood<T>> {
    if data.is_empty() {
        return Err(Error::Domain("log-likelihood of an empty sample".into()));
    }
    check_dimension(model.d())?;
    let rows: Vec<std::result::Result<T, Error>> = data.par_iter().map(|x| log_density(model, x)).collect();
    let mut value = T::zero();
    for (i, r) in rows.into_iter().enumerate() {
        match r {
            Ok(v) => value = value + v,
            Err(Error::Domain(_)) => return Ok(LogLikelihood { value: T::neg_infinity(), outside_support: Some(i) }),
            Err(e) => return Err(e),
        }
    }
    Ok(LogLikelihood { value, outside_support: None })
}

/// Per-row linear coefficients of `V` and every `-V_I` in the full weight
/// vector (interior weights, then vertex masses) at fixed points on the
/// unit-Fréchet scale. Once built for a degree, the simple log-likelihood of
/// any weight vector costs one pass over the coefficients.
#[derive(Debug, Clone)]
pub struct LinearDesign<T> {
    d: usize,
    k: usize,
    width: usize,
    rows: usize,
    // [row][mask][weight], mask 0 holds the coefficients of V
    coef: Vec<T>,
}

impl<T: Real> LinearDesign<T> {
    pub fn new(d: usize, k: usize, points: &[Vec<T>]) -> Result<Self> {
        check_dimension(d)?;
        let grid = MultiIndexGrid::shared(d, k)?;
        let width = grid.len() + d;
        let masks = 1usize << d;
        for (i, y) in points.iter().enumerate() {
            if y.len() != d || y.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
                return Err(Error::Domain(format!("row {} is not a finite positive point", i + 1)));
            }
        }
        let blocks: Vec<Vec<T>> = points
            .par_iter()
            .map(|y| {
                let mut block = vec![T::zero(); masks * width];
                if d == 2 {
                    let rows = design_row2(k, y);
                    for m in 1..4 {
                        block[m * width..(m + 1) * width].copy_from_slice(&rows[m - 1]);
                    }
                } else {
                    for m in 1..masks {
                        let c = neg_v_coefficients(&grid, y, m);
                        block[m * width..(m + 1) * width].copy_from_slice(&c);
                    }
                }
                for j in 0..d {
                    for w in 0..width {
                        block[w] = block[w] + y[j] * block[(1 << j) * width + w];
                    }
                }
                block
            })
            .collect();
        Ok(Self { d, k, width, rows: points.len(), coef: blocks.concat() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// `Σ_i ln g_1(y_i)` for the given full weight vector.
    pub fn log_likelihood(&self, full_weights: &[T]) -> Result<T> {
        if full_weights.len() != self.width {
            return Err(Error::Structure(format!("expected {} weights, got {}", self.width, full_weights.len())));
        }
        let masks = 1usize << self.d;
        let block = masks * self.width;
        let nonzero: Vec<usize> = (0..self.width).filter(|&w| full_weights[w] != T::zero()).collect();
        let parts = if self.d > 2 { Some(enumerate_partitions(self.d)?) } else { None };
        let per_row: Vec<T> = self
            .coef
            .par_chunks(block)
            .map(|c| {
                let mut table = vec![T::zero(); masks];
                for (m, t) in table.iter_mut().enumerate() {
                    let row = &c[m * self.width..(m + 1) * self.width];
                    *t = nonzero.iter().fold(T::zero(), |a, &w| a + row[w] * full_weights[w]);
                }
                let sum = match &parts {
                    None => (table[1] * table[2] + table[3]).ln(),
                    Some(ps) => {
                        let terms: Vec<T> =
                            ps.iter().map(|p| p.masks().iter().fold(T::zero(), |a, &m| a + table[m].ln())).collect();
                        log_sum_exp(&terms)
                    }
                };
                sum - table[0]
            })
            .collect();
        Ok(per_row.into_iter().fold(T::zero(), |a, v| a + v))
    }
}

/// Probability that the maximizing points of the spectral representation
/// induce partition `p`:
/// `∫_R Γ(m) Π_I (-V_I(v, 1-|v|)) / V(v, 1-|v|)^m dv`.
pub fn partition_probability<T: Real>(model: &AngularBp<T>, p: &Partition) -> Result<f64> {
    let d = model.d();
    check_dimension(d)?;
    let m64 = model.map(|x| x.to_f64_lossy());
    let masks = p.masks();
    if masks.iter().fold(0, |a, m| a | m) != (1 << d) - 1 {
        return Err(Error::Structure(format!("partition {p} does not cover {{1..{d}}}")));
    }
    let m = masks.len();
    let ln_gm = ln_gamma(m as f64);
    let tol = if d == 2 { 1e-10 } else { 1e-8 };
    let mut y = vec![0.0; d];
    let r = integrate_region(
        d,
        |v| {
            let last = 1.0 - v.iter().sum::<f64>();
            if last <= 0.0 || v.iter().any(|&x| x <= 0.0) {
                return 0.0;
            }
            y[..d - 1].copy_from_slice(v);
            y[d - 1] = last;
            let Ok(table) = neg_v_table(&m64, &y) else { return 0.0 };
            let big_v: f64 = (0..d).map(|j| y[j] * table[1 << j]).sum();
            let mut ln = ln_gm - m as f64 * big_v.ln();
            for &mk in &masks {
                if table[mk] <= 0.0 {
                    return 0.0;
                }
                ln += table[mk].ln();
            }
            ln.exp()
        },
        tol,
    );
    Ok(r.value.clamp(0.0, 1.0))
}
