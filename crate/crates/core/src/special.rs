//! Special functions in log space.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::c(0.5);
    if x < half {
        // reflection
        let pi = T::c(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::c(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::c(c) / (x + T::c(i as f64));
    }
    let t = x + T::c(LANCZOS_G) + half;
    T::c(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * t.ln() - t + acc.ln()
}

pub fn ln_beta<T: Real>(a: T, b: T) -> T {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// `ln C(n, j)`.
pub fn ln_binomial(n: usize, j: usize) -> f64 {
    debug_assert!(j <= n);
    LN_FACTORIALS.with(|t| {
        let t = t.borrow();
        if n < t.len() {
            t[n] - t[j] - t[n - j]
        } else {
            ln_gamma(n as f64 + 1.0) - ln_gamma(j as f64 + 1.0) - ln_gamma((n - j) as f64 + 1.0)
        }
    })
}

thread_local! {
    static LN_FACTORIALS: std::cell::RefCell<Vec<f64>> = std::cell::RefCell::new({
        let mut v = vec![0.0f64; 257];
        for i in 1..v.len() {
            v[i] = v[i - 1] + (i as f64).ln();
        }
        v
    });
}

/// Regularised incomplete beta function `I_x(a, b)`.
///
/// Continued fraction (modified Lentz) on whichever side of the mean
/// converges fastest; points outside `[0, 1]` are clamped, matching the limit
/// convention used for simplex-boundary arguments.
pub fn beta_inc<T: Real>(a: T, b: T, x: T) -> T {
    let zero = T::zero();
    let one = T::one();
    if x <= zero {
        return zero;
    }
    if x >= one {
        return one;
    }
    // the prefactor x^a (1-x)^b / (a B(a,b)) in log space
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    if x < (a + one) / (a + b + T::c(2.0)) {
        let cf = beta_cf(a, b, x);
        (ln_front.exp() * cf / a).min(one)
    } else {
        let cf = beta_cf(b, a, one - x);
        (one - ln_front.exp() * cf / b).max(zero)
    }
}

/// Upper tail `1 - I_x(a, b)` evaluated without cancellation.
pub fn beta_inc_upper<T: Real>(a: T, b: T, x: T) -> T {
    beta_inc(b, a, T::one() - x)
}

fn beta_cf<T: Real>(a: T, b: T, x: T) -> T {
    let one = T::one();
    let two = T::c(2.0);
    let tiny = T::c(1e-300).max(T::min_positive_value());
    let eps = T::epsilon();
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=1000 {
        let m = T::c(m as f64);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= eps {
            break;
        }
    }
    h
}

/// `ln Σ exp(x_i)`; returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let s = xs.iter().fold(T::zero(), |acc, &x| acc + (x - max).exp());
    max + s.ln()
}

/// Degree-`k` Bernstein basis `b_{j,k}(t)`, `j = 0..=k`, evaluated in log space
/// with `t` and `1 - t` supplied separately so neither loses precision.
pub fn bernstein_basis(k: usize, t: f64, one_minus_t: f64) -> Vec<f64> {
    let mut out = vec![0.0; k + 1];
    if t <= 0.0 {
        out[0] = 1.0;
        return out;
    }
    if one_minus_t <= 0.0 {
        out[k] = 1.0;
        return out;
    }
    let lt = t.ln();
    let lu = one_minus_t.ln();
    for (j, o) in out.iter_mut().enumerate() {
        *o = (ln_binomial(k, j) + j as f64 * lt + (k - j) as f64 * lu).exp();
    }
    out
}

/// Generic Bernstein basis (used by the scalar-generic Pickands evaluators).
pub fn bernstein_basis_generic<T: Real>(k: usize, t: T) -> Vec<T> {
    let one = T::one();
    let mut out = vec![T::zero(); k + 1];
    if t <= T::zero() {
        out[0] = one;
        return out;
    }
    if t >= one {
        out[k] = one;
        return out;
    }
    let lt = t.ln();
    let lu = (-t).ln_1p();
    for (j, o) in out.iter_mut().enumerate() {
        *o = (T::c(ln_binomial(k, j)) + T::c(j as f64) * lt + T::c((k - j) as f64) * lu).exp();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    // Binomial-tail oracle for integer parameters:
    // I_x(a, b) = P(Bin(a+b-1, x) >= a).
    fn beta_inc_integer_oracle(a: usize, b: usize, x: f64) -> f64 {
        let n = a + b - 1;
        (a..=n)
            .map(|j| (ln_binomial(n, j) + j as f64 * x.ln() + (n - j) as f64 * (1.0 - x).ln()).exp())
            .sum()
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut f = 1.0f64;
        for n in 1..30usize {
            assert!((ln_gamma(n as f64) - f.ln()).abs() < 1e-12 * f.ln().abs().max(1.0));
            f *= n as f64;
        }
        assert!((ln_gamma(0.5f64) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn beta_inc_agrees_with_binomial_tail() {
        for a in 1..12 {
            for b in 1..12 {
                for &x in &[1e-6, 0.01, 0.2, 0.5, 0.77, 0.999, 0.999_999] {
                    let got = beta_inc(a as f64, b as f64, x);
                    let want = beta_inc_integer_oracle(a, b, x);
                    let rel = (got - want).abs() / want.max(1e-300);
                    assert!(rel < 1e-12 || (got - want).abs() < 1e-300, "a={a} b={b} x={x} got={got} want={want}");
                }
            }
        }
    }

    #[test]
    fn beta_inc_boundaries_are_limits() {
        assert_eq!(beta_inc(2.0, 3.0, 0.0), 0.0);
        assert_eq!(beta_inc(2.0, 3.0, 1.0), 1.0);
        assert_eq!(beta_inc(2.0, 3.0, -1e-9), 0.0);
        assert!((beta_inc(1.0f64, 1.0, 0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn beta_inc_works_in_f32() {
        let v: f32 = beta_inc(2.0f32, 3.0, 0.4);
        let w = beta_inc(2.0f64, 3.0, 0.4);
        assert!((v as f64 - w).abs() < 1e-5);
    }

    #[test]
    fn log_sum_exp_handles_infinities() {
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 0.0]), 0.0);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn bernstein_partition_of_unity() {
        let b = bernstein_basis(17, 0.3, 0.7);
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }
}
