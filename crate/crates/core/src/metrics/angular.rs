use crate::angular::AngularBp;
use crate::error::{Error, Result};
use crate::quad::integrate_region;

pub const KS_GRID: usize = 10_000;

/// `sup_t |H_a(t) - H_b(t)|` over `t = 0`, `10^4` interior grid points and
/// `t = 1`.
pub fn ks_angular2(a: &AngularBp<f64>, b: &AngularBp<f64>) -> Result<f64> {
    if a.d() != 2 || b.d() != 2 {
        return Err(Error::Unsupported("angular KS distance is defined for d = 2 only".into()));
    }
    let mut best = 0.0f64;
    for i in 0..=KS_GRID + 1 {
        let t = i as f64 / (KS_GRID + 1) as f64;
        best = best.max((a.angular_cdf2(t)? - b.angular_cdf2(t)?).abs());
    }
    Ok(best)
}

/// `∫ |h_a - h_b|` over the open simplex plus `Σ |p_a,j - p_b,j|` at the
/// vertices.
pub fn l1_angular(a: &AngularBp<f64>, b: &AngularBp<f64>) -> Result<f64> {
    let d = a.d();
    if b.d() != d {
        return Err(Error::Structure(format!("dimensions differ: {d} vs {}", b.d())));
    }
    let atoms: f64 = a.vertex_mass().iter().zip(b.vertex_mass()).map(|(x, y)| (x - y).abs()).sum();
    let mut failure = None;
    let r = integrate_region(
        d,
        |t| {
            let inside = t.iter().all(|&x| x > 0.0) && t.iter().sum::<f64>() < 1.0;
            if !inside {
                return 0.0;
            }
            match (a.density(t), b.density(t)) {
                (Ok(x), Ok(y)) => (x - y).abs(),
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        1e-6,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value + atoms),
    }
}

/// `sup_t |A_a(t) - A_b(t)|` on a grid of `n + 1` points (d = 2).
pub fn pickands_sup2(a: &AngularBp<f64>, b: &AngularBp<f64>, n: usize) -> Result<f64> {
    if a.d() != 2 || b.d() != 2 {
        return Err(Error::Unsupported("Pickands sup-distance is computed for d = 2 only".into()));
    }
    let mut best = 0.0f64;
    for i in 0..=n {
        let t = i as f64 / n as f64;
        best = best.max((a.pickands(&[t])? - b.pickands(&[t])?).abs());
    }
    Ok(best)
}

/// `‖φ_a - φ_b‖₁` over the full weight vectors, after elevating both to the
/// larger degree.
pub fn weights_l1(a: &AngularBp<f64>, b: &AngularBp<f64>) -> Result<f64> {
    let k = a.k().max(b.k());
    let (a, b) = (a.elevate_to(k)?, b.elevate_to(k)?);
    Ok(a.full_weights().iter().zip(b.full_weights()).map(|(x, y)| (x - y).abs()).sum())
}
