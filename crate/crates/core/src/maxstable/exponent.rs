//! Exponent function `V` and its partial derivatives `-V_I` for angular
//! measures in Bernstein-polynomial form.
//!
//! For a Dirichlet component `α` of degree `k` the derivative with respect
//! to the coordinates in `I` reduces to a Gamma-mixture of regularized
//! lower incomplete gamma functions,
//!
//! ```text
//! -V_I^α(y) = (d/k) Π_{i∈I} y_i^{α_i-1}/Γ(α_i) · Γ(A+1)/a^{A+1}
//!             · E[Π_{j∉I} P(α_j, U y_j)],   U ~ Gamma(A+1, rate a),
//! ```
//!
//! with `A = Σ_{i∈I} α_i` and `a = Σ_{i∈I} y_i`. The expectation is a
//! finite or rapidly converging negative-binomial series; for `d = 2` it is
//! a binomial tail and the whole computation collapses to Bernstein sums.

use super::partition::subset_mask;
use crate::angular::{AngularBp, MultiIndexGrid};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{beta_inc, bernstein_basis_generic, ln_gamma};

const MAX_SERIES_TERMS: usize = 100_000;

/// `E[Π_j P(α_j, U y_j)]` for `U ~ Gamma(s, rate r)` and finite `y_j > 0`.
pub(crate) fn gamma_mixture<T: Real>(s: T, r: T, items: &[(usize, T)]) -> T {
    let Some((&(alpha, y), rest)) = items.split_last() else {
        return T::one();
    };
    let a = T::c(alpha as f64);
    let p = y / (r + y);
    if rest.is_empty() {
        return beta_inc(a, s, p);
    }
    let q = r / (r + y);
    let ln_p = p.ln();
    let ln_q = q.ln();
    let ln_gs = ln_gamma(s);
    let nb = |n: usize| {
        let nf = T::c(n as f64);
        (ln_gamma(s + nf) - ln_gs - ln_gamma(nf + T::one()) + nf * ln_p + s * ln_q).exp()
    };
    let r2 = r + y;
    if beta_inc(a, s, p) > T::c(0.5) {
        let mut acc = gamma_mixture(s, r, rest);
        for n in 0..alpha {
            acc = acc - nb(n) * gamma_mixture(s + T::c(n as f64), r2, rest);
        }
        return acc.max(T::zero());
    }
    let eps = T::epsilon() * T::c(0.5);
    let tiny = T::min_positive_value();
    let mut sum = T::zero();
    let mut pmf = nb(alpha);
    let mut n = alpha;
    while n < alpha + MAX_SERIES_TERMS {
        let nf = T::c(n as f64);
        sum = sum + pmf * gamma_mixture(s + nf, r2, rest);
        let rho = p * (s + nf) / (nf + T::one());
        if rho < T::one() {
            let remaining = pmf * rho / (T::one() - rho);
            if remaining <= eps * sum || remaining < tiny {
                break;
            }
        }
        pmf = pmf * rho;
        n += 1;
    }
    sum
}

/// Contribution of a unit-weight Dirichlet component `alpha` to `-V_I(y)`.
/// Coordinates outside `I` may be `+∞`.
pub(crate) fn interior_coefficient<T: Real>(alpha: &[usize], k: usize, y: &[T], mask: usize) -> T {
    let d = alpha.len();
    let mut ln_pre = T::c(d as f64 / k as f64).ln();
    let mut big_a = 0usize;
    let mut a = T::zero();
    let mut items = Vec::new();
    for j in 0..d {
        if mask & (1 << j) != 0 {
            let aj = T::c(alpha[j] as f64);
            ln_pre = ln_pre + (aj - T::one()) * y[j].ln() - ln_gamma(aj);
            big_a += alpha[j];
            a = a + y[j];
        } else if y[j].is_finite() {
            items.push((alpha[j], y[j]));
        }
    }
    let shape = T::c((big_a + 1) as f64);
    ln_pre = ln_pre + ln_gamma(shape) - shape * a.ln();
    let f = gamma_mixture(shape, a, &items);
    if f <= T::zero() {
        return T::zero();
    }
    (ln_pre + f.ln()).exp()
}

fn vertex_coefficient<T: Real>(d: usize, j: usize, y: &[T], mask: usize) -> T {
    if mask == 1 << j {
        T::c(d as f64) / (y[j] * y[j])
    } else {
        T::zero()
    }
}

fn check_point<T: Real>(y: &[T], d: usize) -> Result<()> {
    if y.len() != d {
        return Err(Error::Structure(format!("expected a point of dimension {d}, got {}", y.len())));
    }
    if let Some(j) = y.iter().position(|v| !(*v > T::zero())) {
        return Err(Error::Domain(format!("coordinate {} of y must be positive, got {}", j + 1, y[j])));
    }
    Ok(())
}

fn check_subset(indices: &[usize], d: usize) -> Result<usize> {
    if indices.is_empty() {
        return Err(Error::Structure("index set must be nonempty".into()));
    }
    let mut mask = 0;
    for &i in indices {
        if i >= d || mask & (1 << i) != 0 {
            return Err(Error::Structure(format!("invalid index set {indices:?} for d = {d}")));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

/// Coefficients of `-V_I(y)` as a linear function of the full weight vector
/// (interior weights in grid order followed by the `d` vertex masses).
pub fn neg_v_coefficients<T: Real>(grid: &MultiIndexGrid, y: &[T], mask: usize) -> Vec<T> {
    let mut out: Vec<T> = grid.indices().iter().map(|alpha| interior_coefficient(alpha, grid.k(), y, mask)).collect();
    out.extend((0..grid.d()).map(|j| vertex_coefficient(grid.d(), j, y, mask)));
    out
}

/// Coefficient rows for every nonempty subset `I ⊆ {1, 2}` at a finite point
/// of a bivariate model, indexed by mask (`1 = {1}`, `2 = {2}`, `3 = {1,2}`).
pub fn design_row2<T: Real>(k: usize, y: &[T]) -> [Vec<T>; 3] {
    let (y1, y2) = (y[0], y[1]);
    let s = y1 + y2;
    let p = y2 / s;
    let q = y1 / s;
    let basis = bernstein_basis_generic(k, p);
    // suffix[j] = Σ_{i≥j} b_i(p), prefix[j] = Σ_{i≤j} b_i(p)
    let mut suffix = vec![T::zero(); k + 2];
    for j in (0..=k).rev() {
        suffix[j] = suffix[j + 1] + basis[j];
    }
    let mut prefix = vec![T::zero(); k + 1];
    let mut acc = T::zero();
    for j in 0..=k {
        acc = acc + basis[j];
        prefix[j] = acc;
    }
    let low = bernstein_basis_generic(k - 2, q);
    let kf = T::c(k as f64);
    let two = T::c(2.0);
    let c1 = two / (kf * y1 * y1);
    let c2 = two / (kf * y2 * y2);
    let c12 = two * (kf - T::one()) / (s * s * s);
    let m = k - 1;
    let mut v1 = Vec::with_capacity(m + 2);
    let mut v2 = Vec::with_capacity(m + 2);
    let mut v12 = Vec::with_capacity(m + 2);
    for a1 in 1..k {
        let a2 = k - a1;
        v1.push(c1 * T::c(a1 as f64) * suffix[a2].min(T::one()));
        v2.push(c2 * T::c(a2 as f64) * prefix[a2].min(T::one()));
        v12.push(c12 * low[a1 - 1]);
    }
    v1.extend([two / (y1 * y1), T::zero()]);
    v2.extend([T::zero(), two / (y2 * y2)]);
    v12.extend([T::zero(), T::zero()]);
    [v1, v2, v12]
}

fn dot_weights<T: Real>(model: &AngularBp<T>, coef: &[T]) -> T {
    let n = model.interior().len();
    let mut acc = T::zero();
    for (w, c) in model.interior().iter().zip(coef) {
        acc = acc + *w * *c;
    }
    for (w, c) in model.vertex_mass().iter().zip(&coef[n..]) {
        acc = acc + *w * *c;
    }
    acc
}

fn neg_v_mask<T: Real>(model: &AngularBp<T>, y: &[T], mask: usize) -> T {
    let d = model.d();
    let k = model.k();
    let mut acc = T::zero();
    for (alpha, &w) in model.grid().indices().iter().zip(model.interior()) {
        if w > T::zero() {
            acc = acc + w * interior_coefficient(alpha, k, y, mask);
        }
    }
    for (j, &p) in model.vertex_mass().iter().enumerate() {
        acc = acc + p * vertex_coefficient(d, j, y, mask);
    }
    acc
}

/// `-V_I(y | H)` for a 0-based index set `I`.
pub fn neg_v_i<T: Real>(model: &AngularBp<T>, y: &[T], indices: &[usize]) -> Result<T> {
    let d = model.d();
    check_point(y, d)?;
    let mask = check_subset(indices, d)?;
    if let Some(&i) = indices.iter().find(|&&i| !y[i].is_finite()) {
        return Err(Error::Domain(format!("coordinate {} in I must be finite", i + 1)));
    }
    if d == 2 && y.iter().all(|v| v.is_finite()) {
        let rows = design_row2(model.k(), y);
        return Ok(dot_weights(model, &rows[mask - 1]));
    }
    Ok(neg_v_mask(model, y, mask))
}

/// `-V_I(y)` for every nonempty subset, indexed by bitmask (entry 0 unused).
/// Requires a finite point.
pub fn neg_v_table<T: Real>(model: &AngularBp<T>, y: &[T]) -> Result<Vec<T>> {
    let d = model.d();
    check_point(y, d)?;
    if let Some(j) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("coordinate {} of y must be finite", j + 1)));
    }
    let mut out = vec![T::zero(); 1 << d];
    if d == 2 {
        let rows = design_row2(model.k(), y);
        for m in 1..4 {
            out[m] = dot_weights(model, &rows[m - 1]);
        }
    } else {
        for (m, o) in out.iter_mut().enumerate().skip(1) {
            *o = neg_v_mask(model, y, m);
        }
    }
    Ok(out)
}

/// Exponent function via Euler's identity `V(y) = Σ_j y_j (-V_{j}(y))`;
/// coordinates equal to `+∞` contribute nothing.
pub fn exponent_v<T: Real>(model: &AngularBp<T>, y: &[T]) -> Result<T> {
    let d = model.d();
    check_point(y, d)?;
    if d == 2 && y.iter().all(|v| v.is_finite()) {
        let t = y[0] / (y[0] + y[1]);
        let a = model.pickands(&[t])?;
        return Ok(a * (y[0].recip() + y[1].recip()));
    }
    let mut acc = T::zero();
    for j in 0..d {
        if y[j].is_finite() {
            acc = acc + y[j] * neg_v_mask(model, y, subset_mask(&[j]));
        }
    }
    Ok(acc)
}
