//! Deterministic quadrature: Gauss-Legendre, adaptive Gauss-Kronrod, nested
//! rules on the triangle and a fixed low-discrepancy rule for higher
//! dimensional simplices.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693,
    0.279_705_391_489_276_668,
    0.381_830_050_505_118_945,
    0.417_959_183_673_469_388,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive G7-K15 integration of `f` over `[a, b]` to absolute tolerance
/// `abs_tol` (or relative `rel_tol`, whichever is looser).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    let mut iter = 0;
    while err > abs_tol.max(rel_tol * total.abs()) && iter < 2000 {
        iter += 1;
        // bisect the interval with the largest error
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, iv)| if iv.3 > acc.1 { (i, iv.3) } else { acc });
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            intervals.push((lo, hi, v0, 0.0));
            err -= e0;
            continue;
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated rounding from the running updates
    let value = intervals.iter().map(|iv| iv.2).sum();
    let error = intervals.iter().map(|iv| iv.3).sum();
    Integral { value, error }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - z);
        w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Product Gauss rule on the triangle `{u, v >= 0, u + v <= 1}` through the
/// collapsed map `(u, v) = (s, (1 - s) r)`; exact for polynomials of total
/// degree `<= 2n - 2`.
pub fn triangle_gauss(n: usize) -> Vec<([f64; 2], f64)> {
    let (x, w) = gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for (s, ws) in x.iter().zip(&w) {
        for (r, wr) in x.iter().zip(&w) {
            out.push(([*s, (1.0 - s) * r], ws * wr * (1.0 - s)));
        }
    }
    out
}

/// Nested adaptive integration over the triangle `{u, v > 0, u + v < 1}`.
pub fn integrate_triangle<F: FnMut(f64, f64) -> f64>(mut f: F, abs_tol: f64) -> Integral {
    let mut inner_err = 0.0f64;
    let outer = integrate(
        |u| {
            let top = 1.0 - u;
            if top <= 0.0 {
                return 0.0;
            }
            let r = integrate(|v| f(u, v), 0.0, top, abs_tol * 0.1, 1e-12);
            inner_err = inner_err.max(r.error);
            r.value
        },
        0.0,
        1.0,
        abs_tol,
        1e-12,
    );
    Integral { value: outer.value, error: outer.error + inner_err }
}

/// Points of a fixed-shift Kronecker (R_d) sequence mapped uniformly onto the
/// open `dim`-dimensional region `{t >= 0, Σ t <= 1}`; returns the points and
/// the region volume `1 / dim!`.
pub fn simplex_qmc(dim: usize, n: usize) -> (Vec<Vec<f64>>, f64) {
    // generalised golden ratio for dimension `dim`
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
    let mut pts = Vec::with_capacity(n);
    let mut u = vec![0.0; dim];
    for i in 0..n {
        for (j, uj) in u.iter_mut().enumerate() {
            *uj = (0.5 + alpha[j] * (i as f64 + 1.0)).fract();
        }
        let mut s = u.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut t = Vec::with_capacity(dim);
        let mut prev = 0.0;
        for v in &s {
            t.push(v - prev);
            prev = *v;
        }
        pts.push(t);
    }
    let vol = 1.0 / (1..=dim).map(|j| j as f64).product::<f64>();
    (pts, vol)
}

/// Integral over `R = {t in [0,1]^{d-1}: Σ t <= 1}` with the method suited to
/// the dimension: adaptive 1-D for `d = 2`, nested adaptive for `d = 3`, and
/// the fixed `2^16`-point low-discrepancy rule beyond.
pub fn integrate_region<F: FnMut(&[f64]) -> f64>(d: usize, mut f: F, abs_tol: f64) -> Integral {
    match d {
        2 => integrate(|t| f(&[t]), 0.0, 1.0, abs_tol, 1e-12),
        3 => integrate_triangle(|u, v| f(&[u, v]), abs_tol),
        _ => {
            let (pts, vol) = simplex_qmc(d - 1, 1 << 16);
            let n = pts.len() as f64;
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for p in &pts {
                let v = f(p);
                sum += v;
                sum2 += v * v;
            }
            let mean = sum / n;
            let var = (sum2 / n - mean * mean).max(0.0);
            Integral { value: vol * mean, error: vol * (var / n).sqrt() }
        }
    }
}
