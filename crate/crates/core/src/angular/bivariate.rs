//! Bivariate Pickands dependence functions in Bernstein (BP) and quadratic
//! B-spline (BS) form, the piecewise-linear angular cdf paired with the BS
//! form, and the coefficient maps between them.

use super::{AngularBp, ValidationReport, Violation};
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::scalar::{Real, Scalar};
use crate::special::bernstein_basis_generic;

fn push_if_negative<T: Scalar>(report: &mut ValidationReport<T>, name: String, value: T, tol: &T) {
    if value < T::zero() && value.abs() > *tol {
        report.violations.push(Violation { constraint: name, residual: value });
    }
}

/// Evaluates a bivariate Pickands dependence function on `[0, 1]`.
pub trait PickandsFunction {
    fn pickands_at(&self, t: f64) -> f64;
}

/// `A_k(t) = Σ_j β_j b_{j,k}(t)` with the degree-`k` Bernstein basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PickandsBp2<T> {
    beta: Vec<T>,
}

impl<T: Scalar> PickandsBp2<T> {
    pub fn new(beta: Vec<T>) -> Result<Self> {
        if beta.len() < 3 {
            return Err(Error::Structure(format!("need at least 3 coefficients, got {}", beta.len())));
        }
        Ok(Self { beta })
    }

    pub fn k(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    /// Mass at `w_1 = 0` implied by the left slope: `p_0 = (kβ_1 - k + 1)/2`.
    pub fn p0(&self) -> T {
        let k = self.k();
        (T::from_usize_exact(k) * self.beta[1].clone() - T::from_usize_exact(k - 1)) * T::ratio(1, 2)
    }

    /// Mass at `w_1 = 1`: `p_1 = (kβ_{k-1} - k + 1)/2`.
    pub fn p1(&self) -> T {
        let k = self.k();
        (T::from_usize_exact(k) * self.beta[k - 1].clone() - T::from_usize_exact(k - 1)) * T::ratio(1, 2)
    }

    /// Checks (R5) endpoint and upper bounds, (R6) as `p_0, p_1 ∈ [0, 1/2]`
    /// and (R7) convexity of the control polygon.
    pub fn validate(&self) -> ValidationReport<T> {
        let tol = T::linear_tolerance();
        let k = self.k();
        let mut r = ValidationReport::default();
        r.check("R5 (beta_0 = 1)", self.beta[0].clone() - T::one(), &tol);
        r.check("R5 (beta_k = 1)", self.beta[k].clone() - T::one(), &tol);
        for j in 1..k {
            push_if_negative(&mut r, format!("R5 (beta_{j} <= 1)"), T::one() - self.beta[j].clone(), &tol);
        }
        let half = T::ratio(1, 2);
        for (name, p) in [("p_0", self.p0()), ("p_1", self.p1())] {
            push_if_negative(&mut r, format!("R6 ({name} >= 0)"), p.clone(), &tol);
            push_if_negative(&mut r, format!("R6 ({name} <= 1/2)"), half.clone() - p, &tol);
        }
        for j in 0..k - 1 {
            let second = self.beta[j + 2].clone() - self.beta[j + 1].clone() * T::from_usize_exact(2) + self.beta[j].clone();
            push_if_negative(&mut r, format!("R7 (j = {j})"), second, &tol);
        }
        r
    }

    /// `φ_{κ_2} = p_0`, `φ_{κ_1} = p_1`, `φ_{(j,k-j)} = (k/2) Δ²β_{j-1}`.
    pub fn to_weights(&self) -> Result<AngularBp<T>> {
        self.validate().into_result()?;
        let k = self.k();
        let half_k = T::ratio(k, 2);
        let interior = (1..k)
            .map(|j| {
                half_k.clone()
                    * (self.beta[j + 1].clone() - self.beta[j].clone() * T::from_usize_exact(2) + self.beta[j - 1].clone())
            })
            .collect();
        AngularBp::new(2, k, vec![self.p1(), self.p0()], interior)
    }
}

impl<T: Real> PickandsBp2<T> {
    pub fn eval(&self, t: T) -> T {
        let basis = bernstein_basis_generic(self.k(), t.max(T::zero()).min(T::one()));
        basis.iter().zip(&self.beta).fold(T::zero(), |a, (&b, &c)| a + b * c)
    }
}

/// Converts BP-form coefficients to angular-measure weights at the same
/// degree.
pub fn bp_pickands_to_weights2<T: Scalar>(p: &PickandsBp2<T>) -> Result<AngularBp<T>> {
    p.to_weights()
}

/// Inverse of [`bp_pickands_to_weights2`]: `β_0 = 1`, `β_1 = (k-1+2p_0)/k`,
/// `β_{j+1} = 2β_j - β_{j-1} + (2/k) φ_{(j,k-j)}`.
pub fn weights_to_pickands2<T: Scalar>(model: &AngularBp<T>) -> Result<PickandsBp2<T>> {
    if model.d() != 2 {
        return Err(Error::Unsupported(format!("Pickands BP form needs d = 2, got d = {}", model.d())));
    }
    let k = model.k();
    let p0 = model.vertex_mass()[1].clone();
    let mut beta = Vec::with_capacity(k + 1);
    beta.push(T::one());
    beta.push((T::from_usize_exact(k - 1) + p0 * T::from_usize_exact(2)) / T::from_usize_exact(k));
    let two_over_k = T::ratio(2, k);
    for j in 1..k {
        let next = beta[j].clone() * T::from_usize_exact(2) - beta[j - 1].clone()
            + two_over_k.clone() * model.interior()[j - 1].clone();
        beta.push(next);
    }
    PickandsBp2::new(beta)
}

/// Knot spacing `τ_{j+3} - τ_{j+1}` of the quadratic spline (1-based `j`),
/// which is `h` at both ends and `2h` inside, with `h = 1/(k-2)`.
fn bs_spacing<T: Scalar>(k: usize, j: usize) -> T {
    if j == 1 || j == k - 1 {
        T::ratio(1, k - 2)
    } else {
        T::ratio(2, k - 2)
    }
}

/// Quadratic B-spline Pickands function with knots
/// `(0,0,0,1/(k-2),…,(k-3)/(k-2),1,1,1)` and coefficients `β_1..β_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PickandsBs2<T> {
    beta: Vec<T>,
}

impl<T: Scalar> PickandsBs2<T> {
    pub fn new(beta: Vec<T>) -> Result<Self> {
        if beta.len() < 4 {
            return Err(Error::Structure(format!("BS form needs k >= 4 coefficients, got {}", beta.len())));
        }
        Ok(Self { beta })
    }

    pub fn k(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn knots(&self) -> Vec<T> {
        let k = self.k();
        let mut out = vec![T::zero(); 3];
        out.extend((1..k - 2).map(|i| T::ratio(i, k - 2)));
        out.extend(vec![T::one(); 3]);
        out
    }

    /// Checks (R10), (R11) with `p_0, p_1 ∈ [0, 1/2]`, and (R12).
    pub fn validate(&self) -> ValidationReport<T> {
        let tol = T::linear_tolerance();
        let k = self.k();
        let b = |j: usize| self.beta[j - 1].clone();
        let mut r = ValidationReport::default();
        r.check("R10 (beta_1 = 1)", b(1) - T::one(), &tol);
        r.check("R10 (beta_k = 1)", b(k) - T::one(), &tol);
        for j in 2..k {
            push_if_negative(&mut r, format!("R10 (beta_{j} <= 1)"), T::one() - b(j), &tol);
        }
        let km2 = T::from_usize_exact(k - 2);
        let half = T::ratio(1, 2);
        let p0 = (b(2) - T::one()) * km2.clone() + half.clone();
        let p1 = (b(k - 1) - T::one()) * km2 + half.clone();
        for (name, p) in [("p_0", p0), ("p_1", p1)] {
            push_if_negative(&mut r, format!("R11 ({name} >= 0)"), p.clone(), &tol);
            push_if_negative(&mut r, format!("R11 ({name} <= 1/2)"), half.clone() - p, &tol);
        }
        let two = T::from_usize_exact(2);
        let three = T::from_usize_exact(3);
        push_if_negative(&mut r, "R12 (left)".into(), b(3) - three.clone() * b(2) + two.clone() * b(1), &tol);
        push_if_negative(&mut r, "R12 (right)".into(), two.clone() * b(k) - three * b(k - 1) + b(k - 2), &tol);
        for j in 4..k {
            push_if_negative(&mut r, format!("R12 (j = {j})"), b(j) - two.clone() * b(j - 1) + b(j - 2), &tol);
        }
        r
    }
}

impl<T: Real> PickandsBs2<T> {
    /// De Boor evaluation of the quadratic spline.
    pub fn eval(&self, t: T) -> T {
        let knots = self.knots();
        let k = self.k();
        let t = t.max(T::zero()).min(T::one());
        // interval index l with knots[l] <= t < knots[l+1], l in [2, k-1]
        let mut l = 2;
        while l < k - 1 && t >= knots[l + 1] {
            l += 1;
        }
        let mut c = [self.beta[l - 2], self.beta[l - 1], self.beta[l]];
        for r in 1..=2 {
            for j in (r..=2).rev() {
                let i = l + j - 2;
                let denom = knots[i + 3 - r] - knots[i];
                let a = if denom > T::zero() { (t - knots[i]) / denom } else { T::zero() };
                c[j] = (T::one() - a) * c[j - 1] + a * c[j];
            }
        }
        c[2]
    }
}

/// Piecewise-linear angular cdf with knots `(0,0,1/(k-2),…,1,1)` and
/// coefficients `η_1..η_{k-1}` (values at the nodes `0, 1/(k-2), …, 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct AngularHist2<T> {
    eta: Vec<T>,
}

impl<T: Scalar> AngularHist2<T> {
    pub fn new(eta: Vec<T>) -> Result<Self> {
        if eta.len() < 3 {
            return Err(Error::Structure(format!("BS cdf needs k >= 4, i.e. >= 3 coefficients, got {}", eta.len())));
        }
        Ok(Self { eta })
    }

    /// The spline order parameter `k` (one more than the coefficient count).
    pub fn k(&self) -> usize {
        self.eta.len() + 1
    }

    pub fn eta(&self) -> &[T] {
        &self.eta
    }

    /// Checks (R8) including `p_0, p_1 ≤ 1/2`, and (R9).
    pub fn validate(&self) -> ValidationReport<T> {
        let tol = T::linear_tolerance();
        let n = self.eta.len();
        let mut r = ValidationReport::default();
        push_if_negative(&mut r, "R8 (eta_1 >= 0)".into(), self.eta[0].clone(), &tol);
        push_if_negative(&mut r, format!("R8 (eta_{n} <= 1)"), T::one() - self.eta[n - 1].clone(), &tol);
        for j in 1..n {
            push_if_negative(
                &mut r,
                format!("R8 (eta_{} >= eta_{})", j + 1, j),
                self.eta[j].clone() - self.eta[j - 1].clone(),
                &tol,
            );
        }
        let half = T::ratio(1, 2);
        push_if_negative(&mut r, "R8 (p_0 <= 1/2)".into(), half.clone() - self.eta[0].clone(), &tol);
        push_if_negative(&mut r, "R8 (p_1 <= 1/2)".into(), self.eta[n - 1].clone() - half, &tol);
        let mid = self.eta[1..n - 1].iter().fold(T::zero(), |a, e| a + e.clone());
        let lhs = self.eta[0].clone() + mid * T::from_usize_exact(2) + self.eta[n - 1].clone();
        r.check("R9", lhs - T::from_usize_exact(self.k() - 2), &tol);
        r
    }
}

impl<T: Real> AngularHist2<T> {
    /// `H(t)`: `0` below `0`, linear interpolation of `η` on `[0,1)`, `1` from `1` on.
    pub fn cdf(&self, t: T) -> T {
        if t < T::zero() {
            return T::zero();
        }
        if t >= T::one() {
            return T::one();
        }
        let segments = self.eta.len() - 1;
        let x = t * T::c(segments as f64);
        let i = x.floor().to_usize().unwrap_or(0).min(segments - 1);
        let frac = x - T::c(i as f64);
        self.eta[i] + (self.eta[i + 1] - self.eta[i]) * frac
    }
}

/// `β_1 = 1`, `β_j = 1 + Σ_{i<j} (η_i - 1/2)(τ_{i+3} - τ_{i+1})`.
pub fn bs_to_pickands2<T: Scalar>(h: &AngularHist2<T>) -> Result<PickandsBs2<T>> {
    h.validate().into_result()?;
    let k = h.k();
    let half = T::ratio(1, 2);
    let mut beta = Vec::with_capacity(k);
    beta.push(T::one());
    for i in 1..k {
        let prev = beta[i - 1].clone();
        beta.push(prev + (h.eta[i - 1].clone() - half.clone()) * bs_spacing::<T>(k, i));
    }
    PickandsBs2::new(beta)
}

/// `η_j = 1/2 + (β_{j+1} - β_j)/(τ_{j+2} - τ_j)` with the cdf knots.
pub fn pickands_bs_to_hist2<T: Scalar>(p: &PickandsBs2<T>) -> Result<AngularHist2<T>> {
    p.validate().into_result()?;
    let k = p.k();
    let half = T::ratio(1, 2);
    let eta = (1..k)
        .map(|j| half.clone() + (p.beta[j].clone() - p.beta[j - 1].clone()) / bs_spacing::<T>(k, j))
        .collect();
    AngularHist2::new(eta)
}

impl<T: Real> PickandsFunction for AngularBp<T> {
    fn pickands_at(&self, t: f64) -> f64 {
        self.pickands(&[T::c(t)]).map(|a| a.to_f64_lossy()).unwrap_or(f64::NAN)
    }
}

impl<T: Real> PickandsFunction for PickandsBp2<T> {
    fn pickands_at(&self, t: f64) -> f64 {
        self.eval(T::c(t)).to_f64_lossy()
    }
}

impl<T: Real> PickandsFunction for PickandsBs2<T> {
    fn pickands_at(&self, t: f64) -> f64 {
        self.eval(T::c(t)).to_f64_lossy()
    }
}

impl<F: Fn(f64) -> f64> PickandsFunction for F {
    fn pickands_at(&self, t: f64) -> f64 {
        self(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DependenceSummary {
    pub extremal_coefficient: f64,
    pub upper_tail_dependence: f64,
    pub spearman_rho: f64,
}

/// Extremal coefficient `2A(1/2)`, tail dependence `2 - 2A(1/2)` and
/// Spearman's rho `12 ∫ (1 + A)^{-2} - 3`.
pub fn dependence_summaries2<P: PickandsFunction + ?Sized>(p: &P) -> DependenceSummary {
    let half = p.pickands_at(0.5);
    let integral = integrate(|t| (1.0 + p.pickands_at(t)).powi(-2), 0.0, 1.0, 1e-10, 1e-12).value;
    DependenceSummary {
        extremal_coefficient: 2.0 * half,
        upper_tail_dependence: 2.0 - 2.0 * half,
        spearman_rho: 12.0 * integral - 3.0,
    }
}
