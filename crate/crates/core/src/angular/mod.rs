//! Angular probability measures on the unit simplex in Bernstein-polynomial
//! form: `d` vertex atoms plus a mixture of Dirichlet densities with integer
//! parameter vectors summing to `k`.

mod bivariate;
mod grid;
mod serde_impl;

use std::sync::Arc;

pub use bivariate::{
    bp_pickands_to_weights2, bs_to_pickands2, dependence_summaries2, pickands_bs_to_hist2, weights_to_pickands2, AngularHist2,
    DependenceSummary, PickandsBp2, PickandsBs2, PickandsFunction,
};
pub use grid::{binomial, MultiIndexGrid};
pub use serde_impl::{AngularBpJson, InteriorEntry};

use crate::error::{Error, Result};
use crate::maxstable::exponent;
use crate::scalar::{Real, Scalar};
use crate::special::{ln_gamma, log_sum_exp};

/// One violated constraint and the size of its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation<T> {
    pub constraint: String,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T: Scalar> ValidationReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Converts a failed report into a [`Error::Constraint`] naming every
    /// violated constraint.
    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        let msg = self
            .violations
            .iter()
            .map(|v| format!("{} (residual {})", v.constraint, v.residual))
            .collect::<Vec<_>>()
            .join(", ");
        Err(Error::Constraint(msg))
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, residual: T, tol: &T) {
        if residual.abs() > *tol {
            self.violations.push(Violation { constraint: name.into(), residual });
        }
    }
}

impl<T> Default for ValidationReport<T> {
    fn default() -> Self {
        Self { violations: Vec::new() }
    }
}

/// Angular measure `H_k`: vertex masses `φ_{κ_j}` and interior weights `φ_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularBp<T> {
    grid: Arc<MultiIndexGrid>,
    vertex_mass: Vec<T>,
    interior: Vec<T>,
}

impl<T: Scalar> AngularBp<T> {
    /// Builds a model without checking (R1)-(R2); only shapes are verified.
    pub fn new(d: usize, k: usize, vertex_mass: Vec<T>, interior: Vec<T>) -> Result<Self> {
        let grid = MultiIndexGrid::shared(d, k)?;
        if vertex_mass.len() != d {
            return Err(Error::Structure(format!("expected {d} vertex masses, got {}", vertex_mass.len())));
        }
        if interior.len() != grid.len() {
            return Err(Error::Structure(format!(
                "expected {} interior weights for d={d}, k={k}, got {}",
                grid.len(),
                interior.len()
            )));
        }
        Ok(Self { grid, vertex_mass, interior })
    }

    /// Completes the vertex masses from the interior weights via (R2):
    /// `φ_{κ_j} = 1/d - Σ_l (l/k) Σ_{α_j = l} φ_α`.
    pub fn from_interior(d: usize, k: usize, interior: Vec<T>) -> Result<Self> {
        let vertex = complete_vertex_masses(&interior, k, d)?;
        Self::new(d, k, vertex, interior)
    }

    /// All mass on the vertices: the independence model.
    pub fn independence(d: usize, k: usize) -> Result<Self> {
        let grid = MultiIndexGrid::shared(d, k)?;
        Ok(Self {
            vertex_mass: vec![T::ratio(1, d); d],
            interior: vec![T::zero(); grid.len()],
            grid,
        })
    }

    pub fn d(&self) -> usize {
        self.grid.d()
    }

    pub fn k(&self) -> usize {
        self.grid.k()
    }

    pub fn grid(&self) -> &MultiIndexGrid {
        &self.grid
    }

    pub fn vertex_mass(&self) -> &[T] {
        &self.vertex_mass
    }

    pub fn interior(&self) -> &[T] {
        &self.interior
    }

    /// Interior weights followed by vertex masses.
    pub fn full_weights(&self) -> Vec<T> {
        self.interior.iter().chain(&self.vertex_mass).cloned().collect()
    }

    pub fn interior_mass(&self) -> T {
        self.interior.iter().fold(T::zero(), |a, w| a + w.clone())
    }

    /// Checks nonnegativity, (R1) and (R2) at the scalar's linear tolerance.
    pub fn validate(&self) -> ValidationReport<T> {
        self.validate_with(&T::linear_tolerance())
    }

    pub fn validate_with(&self, tol: &T) -> ValidationReport<T> {
        let mut report = ValidationReport::default();
        for (i, w) in self.interior.iter().enumerate() {
            if *w < T::zero() && w.abs() > *tol {
                report.violations.push(Violation {
                    constraint: format!("nonnegativity of interior weight {:?}", self.grid.get(i)),
                    residual: w.clone(),
                });
            }
        }
        for (j, p) in self.vertex_mass.iter().enumerate() {
            if *p < T::zero() && p.abs() > *tol {
                report
                    .violations
                    .push(Violation { constraint: format!("nonnegativity of vertex mass {}", j + 1), residual: p.clone() });
            }
        }
        let total = self.interior_mass()
            + self.vertex_mass.iter().fold(T::zero(), |a, w| a + w.clone());
        report.check("R1", total - T::one(), tol);
        let means = coordinate_moments(&self.grid, &self.interior);
        for (j, m) in means.into_iter().enumerate() {
            let residual = m + self.vertex_mass[j].clone() - T::ratio(1, self.d());
            report.check(format!("R2[{}]", j + 1), residual, tol);
        }
        report
    }

    /// Represents the same measure at degree `k + 1` using the identity
    /// `Dir(t; α) = Σ_j (α_j / k) Dir(t; α + e_j)`.
    pub fn degree_elevate(&self) -> Self {
        let d = self.d();
        let k = self.k();
        let up = MultiIndexGrid::shared(d, k + 1).expect("k + 1 is admissible");
        let mut interior = vec![T::zero(); up.len()];
        for (i, alpha) in self.grid.indices().iter().enumerate() {
            let w = &self.interior[i];
            if w.is_zero() {
                continue;
            }
            let mut beta = alpha.clone();
            for j in 0..d {
                beta[j] += 1;
                let pos = up.position(&beta).expect("elevated index in grid");
                interior[pos] = interior[pos].clone() + w.clone() * T::ratio(alpha[j], k);
                beta[j] -= 1;
            }
        }
        Self { grid: up, vertex_mass: self.vertex_mass.clone(), interior }
    }

    /// Elevates repeatedly up to degree `target`.
    pub fn elevate_to(&self, target: usize) -> Result<Self> {
        if target < self.k() {
            return Err(Error::Domain(format!("cannot elevate from k={} down to {target}", self.k())));
        }
        let mut m = self.clone();
        while m.k() < target {
            m = m.degree_elevate();
        }
        Ok(m)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> AngularBp<U> {
        AngularBp {
            grid: self.grid.clone(),
            vertex_mass: self.vertex_mass.iter().map(&f).collect(),
            interior: self.interior.iter().map(&f).collect(),
        }
    }
}

/// `Σ_α (α_j / k) φ_α` for each coordinate `j`.
fn coordinate_moments<T: Scalar>(grid: &MultiIndexGrid, interior: &[T]) -> Vec<T> {
    let k = grid.k();
    let mut out = vec![T::zero(); grid.d()];
    for (alpha, w) in grid.indices().iter().zip(interior) {
        for (j, &a) in alpha.iter().enumerate() {
            out[j] = out[j].clone() + w.clone() * T::ratio(a, k);
        }
    }
    out
}

/// Vertex masses implied by the interior weights through (R2). Fails when a
/// completed mass falls below `-tol`, i.e. the interior weights are
/// infeasible.
pub fn complete_vertex_masses<T: Scalar>(interior: &[T], k: usize, d: usize) -> Result<Vec<T>> {
    let grid = MultiIndexGrid::shared(d, k)?;
    if interior.len() != grid.len() {
        return Err(Error::Structure(format!("expected {} interior weights, got {}", grid.len(), interior.len())));
    }
    if let Some(w) = interior.iter().find(|w| **w < T::zero()) {
        return Err(Error::Infeasible(format!("negative interior weight {w}")));
    }
    let tol = T::linear_tolerance();
    let means = coordinate_moments(&grid, interior);
    let mut out = Vec::with_capacity(d);
    for (j, m) in means.into_iter().enumerate() {
        let p = T::ratio(1, d) - m;
        if p < -tol.clone() {
            return Err(Error::Infeasible(format!("vertex mass {} would be {p}", j + 1)));
        }
        out.push(if p < T::zero() { T::zero() } else { p });
    }
    Ok(out)
}

impl<T: Real> AngularBp<T> {
    /// `ln Dir(t; α)` for every interior index, or `None` for an empty slot.
    fn ln_dirichlet_terms(&self, t: &[T], last: T) -> Vec<T> {
        let k = self.k();
        let lnk = ln_gamma(T::c(k as f64));
        let logs: Vec<T> = t.iter().copied().chain(std::iter::once(last)).map(|x| x.ln()).collect();
        self.grid
            .indices()
            .iter()
            .zip(&self.interior)
            .map(|(alpha, w)| {
                if *w <= T::zero() {
                    return T::neg_infinity();
                }
                let mut acc = w.ln() + lnk;
                for (a, l) in alpha.iter().zip(&logs) {
                    let a = T::c(*a as f64);
                    acc = acc + (a - T::one()) * *l - ln_gamma(a);
                }
                acc
            })
            .collect()
    }

    /// Interior angular density `h_{k-d}(t) = Σ_α φ_α Dir(t; α)` at a point of
    /// the open region `{t > 0, Σ t < 1}` of dimension `d - 1`.
    pub fn density(&self, t: &[T]) -> Result<T> {
        Ok(self.log_density(t)?.exp())
    }

    pub fn log_density(&self, t: &[T]) -> Result<T> {
        let last = check_interior(t, self.d())?;
        Ok(log_sum_exp(&self.ln_dirichlet_terms(t, last)))
    }

    /// Pickands dependence function `A(t)` on `{t ∈ [0,1]^{d-1}: Σ t ≤ 1}`.
    pub fn pickands(&self, t: &[T]) -> Result<T> {
        let d = self.d();
        if t.len() != d - 1 {
            return Err(Error::Structure(format!("expected {} coordinates, got {}", d - 1, t.len())));
        }
        let sum = t.iter().fold(T::zero(), |a, &x| a + x);
        let eps = T::c(1e-12);
        if t.iter().any(|&x| x < -eps || x.is_nan()) || sum > T::one() + eps {
            return Err(Error::Domain(format!("t={t:?} lies outside the region")));
        }
        let first = (T::one() - sum).max(T::zero());
        let lower = t.iter().copied().fold(first, T::max);
        let value = if d == 2 {
            self.pickands2(t[0].max(T::zero()).min(T::one()))
        } else {
            // A(t) = V(1/(1-Σt), 1/t_1, …, 1/t_{d-1})
            let y: Vec<T> = std::iter::once(first)
                .chain(t.iter().map(|&x| x.max(T::zero())))
                .map(|x| if x > T::zero() { T::one() / x } else { T::infinity() })
                .collect();
            exponent::exponent_v(self, &y)?
        };
        Ok(value.max(lower).min(T::one()))
    }

    /// Closed form for `d = 2`:
    /// `A(t) = 2 E[max{(1-t) W_1, t W_2}]` with Beta-distributed `W_1`.
    fn pickands2(&self, t: T) -> T {
        use crate::special::{beta_inc, beta_inc_upper};
        let one = T::one();
        let two = T::c(2.0);
        let k = T::c(self.k() as f64);
        let mut acc = self.vertex_mass[0] * (one - t) + self.vertex_mass[1] * t;
        for (alpha, &w) in self.grid.indices().iter().zip(&self.interior) {
            if w == T::zero() {
                continue;
            }
            let a = T::c(alpha[0] as f64);
            let b = T::c(alpha[1] as f64);
            let upper = (one - t) * (a / k) * beta_inc_upper(a + one, b, t);
            let lower = t * (b / k) * beta_inc(a, b + one, t);
            acc = acc + w * (upper + lower);
        }
        two * acc
    }

    /// Bivariate angular cdf `H(t) = p_0 + Σ φ_α BetaCdf(t; α)` for `t < 1`
    /// (`p_0` is the mass at `e_2`, where `w_1 = 0`), and `1` at `t = 1`.
    pub fn angular_cdf2(&self, t: T) -> Result<T> {
        if self.d() != 2 {
            return Err(Error::Unsupported("angular cdf is only defined here for d = 2".into()));
        }
        if t < T::zero() {
            return Ok(T::zero());
        }
        if t >= T::one() {
            return Ok(T::one());
        }
        let mut acc = self.vertex_mass[1];
        for (alpha, &w) in self.grid.indices().iter().zip(&self.interior) {
            if w != T::zero() {
                acc = acc + w * crate::special::beta_inc(T::c(alpha[0] as f64), T::c(alpha[1] as f64), t);
            }
        }
        Ok(acc)
    }
}

/// Verifies `t` is strictly inside the region and returns `1 - Σ t`.
pub(crate) fn check_interior<T: Real>(t: &[T], d: usize) -> Result<T> {
    if t.len() != d - 1 {
        return Err(Error::Structure(format!("expected {} coordinates, got {}", d - 1, t.len())));
    }
    let last = T::one() - t.iter().fold(T::zero(), |a, &x| a + x);
    if t.iter().any(|&x| !(x > T::zero())) || !(last > T::zero()) {
        return Err(Error::Domain(format!("t={t:?} is not in the open simplex interior")));
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn uniform() -> AngularBp<f64> {
        AngularBp::new(2, 2, vec![0.0, 0.0], vec![1.0]).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn validate_examples() {
        assert!(uniform().validate().passed());
        let indep = AngularBp::new(2, 2, vec![0.5, 0.5], vec![0.0]).unwrap();
        assert!(indep.validate().passed());
        let bad = AngularBp::new(2, 2, vec![0.1, 0.0], vec![1.0]).unwrap();
        let r = bad.validate();
        let names: Vec<_> = r.violations.iter().map(|v| v.constraint.as_str()).collect();
        assert!(names.contains(&"R1"));
        assert!(names.iter().any(|n| n.starts_with("R2")));
        let err = r.into_result().unwrap_err();
        assert!(err.to_string().contains("R2"));
    }

    #[test]
    fn structural_mismatch_is_an_error() {
        assert!(matches!(AngularBp::new(2, 3, vec![0.5, 0.5], vec![0.0]), Err(Error::Structure(_))));
        assert!(matches!(AngularBp::new(3, 4, vec![0.5, 0.5], vec![0.0; 3]), Err(Error::Structure(_))));
    }

    #[test]
    fn completion_examples() {
        assert_eq!(complete_vertex_masses(&[1.0], 2, 2).unwrap(), vec![0.0, 0.0]);
        assert_eq!(complete_vertex_masses(&[0.0], 2, 2).unwrap(), vec![0.5, 0.5]);
        // Σ (l/3) φ = (1/3 + 2/3) 3/4 = 3/4 > 1/2
        assert!(matches!(complete_vertex_masses(&[0.75, 0.75], 3, 2), Err(Error::Infeasible(_))));
    }

    #[test]
    fn completion_is_exact_in_rationals() {
        let w = vec![q(1, 7), q(2, 7), q(1, 11), q(1, 13)];
        let m = AngularBp::from_interior(2, 5, w).unwrap();
        assert!(m.validate_with(&q(0, 1)).passed());
        let total = m.full_weights().into_iter().fold(q(0, 1), |a, b| a + b);
        assert_eq!(total, q(1, 1));
    }

    #[test]
    fn density_examples() {
        assert!((uniform().density(&[0.3]).unwrap() - 1.0).abs() < 1e-14);
        let indep = AngularBp::<f64>::independence(2, 2).unwrap();
        assert_eq!(indep.density(&[0.3]).unwrap(), 0.0);
        let grid = MultiIndexGrid::new(3, 4).unwrap();
        let mut w = vec![0.0; grid.len()];
        w[grid.position(&[1, 1, 2]).unwrap()] = 1.0;
        // interior-only model (its vertex completion is infeasible)
        let m = AngularBp::<f64>::new(3, 4, vec![0.0; 3], w).unwrap();
        assert!((m.density(&[0.2, 0.3]).unwrap() - 3.0).abs() < 1e-13);
        assert!(matches!(m.density(&[0.5, 0.5]), Err(Error::Domain(_))));
        assert!(matches!(uniform().density(&[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn pickands_examples() {
        let indep = AngularBp::<f64>::independence(2, 4).unwrap();
        for &t in &[0.0, 0.2, 0.5, 1.0] {
            assert!((indep.pickands(&[t]).unwrap() - 1.0).abs() < 1e-15);
        }
        let u = uniform();
        assert!((u.pickands(&[0.5]).unwrap() - 0.75).abs() < 1e-15);
        assert!((u.pickands(&[0.0]).unwrap() - 1.0).abs() < 1e-15);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!((u.pickands(&[t]).unwrap() - (1.0 - t + t * t)).abs() < 1e-14);
        }
        assert!(matches!(u.pickands(&[1.2]), Err(Error::Domain(_))));
    }

    #[test]
    fn degree_elevation_examples() {
        let up = uniform().degree_elevate();
        assert_eq!(up.k(), 3);
        assert_eq!(up.interior(), &[0.5, 0.5]);
        let indep = AngularBp::<f64>::independence(3, 4).unwrap().degree_elevate();
        assert!(indep.interior().iter().all(|&w| w == 0.0));
        assert_eq!(indep.vertex_mass(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn dirichlet_degree_raising_identity() {
        // Dir(t; α) = Σ_j (α_j/k) Dir(t; α + e_j), checked pointwise
        let grid = MultiIndexGrid::new(3, 5).unwrap();
        for i in 0..grid.len() {
            let mut w = vec![0.0f64; grid.len()];
            w[i] = 1.0;
            let m = AngularBp::new(3, 5, vec![0.0; 3], w).unwrap();
            let e = m.degree_elevate();
            for t in [[0.2, 0.3], [0.05, 0.9], [0.6, 0.01]] {
                let a = m.density(&t).unwrap();
                let b = e.density(&t).unwrap();
                assert!((a - b).abs() < 1e-12 * a.max(1.0), "{a} {b}");
            }
        }
    }

    #[test]
    fn elevation_is_exact_in_rationals() {
        let m = AngularBp::from_interior(3, 5, (1..=6).map(|i| q(i, 60)).collect()).unwrap();
        let e = m.degree_elevate().degree_elevate();
        assert!(e.validate_with(&q(0, 1)).passed());
        assert_eq!(e.interior_mass(), m.interior_mass());
    }

    #[test]
    fn angular_cdf_jumps() {
        let m = AngularBp::<f64>::new(2, 2, vec![0.25, 0.25], vec![0.5]).unwrap();
        assert_eq!(m.angular_cdf2(0.0).unwrap(), 0.25);
        assert!((m.angular_cdf2(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(m.angular_cdf2(1.0).unwrap(), 1.0);
    }
}
