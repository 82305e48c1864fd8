//! Truncated symmetric Dirichlet prior on the interior weights.
//!
//! The base measure is Dirichlet(1, …, 1) on the vector of interior weights
//! together with their slack `1 - Σ φ_α` (which equals the total vertex
//! mass). Draws whose completed vertex masses leave `[0, 1/d]` are rejected;
//! the normalizer of the truncated density is the feasible probability,
//! estimated once per `(d, k)` by fixed-seed Monte Carlo.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::angular::{AngularBp, MultiIndexGrid};
use crate::error::{Error, Result};
use crate::simulation::SeededRng;
use crate::special::ln_gamma;

pub const MAX_ATTEMPTS: usize = 100_000;
/// Draws used to estimate the feasible probability.
pub const NORMALIZER_DRAWS: usize = 100_000;
/// Minimum number of feasible draws for a degree to count as usable.
pub const MIN_FEASIBLE: usize = 100;
const NORMALIZER_SEED: u64 = 0x6d61_7873_7461_626c;

/// Whether interior weights complete to a valid measure.
pub fn is_feasible(grid: &MultiIndexGrid, interior: &[f64]) -> bool {
    let d = grid.d();
    let k = grid.k() as f64;
    let mut means = vec![0.0; d];
    let mut total = 0.0;
    for (alpha, &w) in grid.indices().iter().zip(interior) {
        if !(w >= 0.0) {
            return false;
        }
        total += w;
        for (m, &a) in means.iter_mut().zip(alpha) {
            *m += w * a as f64 / k;
        }
    }
    let cap = 1.0 / d as f64 + 1e-12;
    total <= 1.0 + 1e-12 && means.iter().all(|&m| m <= cap)
}

fn dirichlet_ones<R: Rng + ?Sized>(len: usize, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    let mut s = 0.0;
    for _ in 0..len {
        let e: f64 = Exp1.sample(rng);
        s += e;
        out.push(e);
    }
    for x in out.iter_mut() {
        *x /= s;
    }
}

/// `ln Z_k`, the log feasible probability of the untruncated Dirichlet, or
/// `None` when fewer than [`MIN_FEASIBLE`] of [`NORMALIZER_DRAWS`] draws are
/// feasible.
pub fn log_normalizer(d: usize, k: usize) -> Result<Option<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Option<f64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("normalizer cache poisoned").get(&(d, k)) {
        return Ok(*v);
    }
    let grid = MultiIndexGrid::shared(d, k)?;
    let mut rng = SeededRng::new(NORMALIZER_SEED, ((d as u64) << 32) | k as u64);
    let mut buf = Vec::new();
    let mut hits = 0usize;
    for _ in 0..NORMALIZER_DRAWS {
        dirichlet_ones(grid.len() + 1, &mut rng, &mut buf);
        if is_feasible(&grid, &buf[..grid.len()]) {
            hits += 1;
        }
    }
    let v = (hits >= MIN_FEASIBLE).then(|| (hits as f64 / NORMALIZER_DRAWS as f64).ln());
    cache.lock().expect("normalizer cache poisoned").insert((d, k), v);
    Ok(v)
}

/// One feasible draw of interior weights by rejection.
pub fn weights_sample<R: Rng + ?Sized>(k: usize, d: usize, rng: &mut R) -> Result<Vec<f64>> {
    let grid = MultiIndexGrid::shared(d, k)?;
    let mut buf = Vec::new();
    for _ in 0..MAX_ATTEMPTS {
        dirichlet_ones(grid.len() + 1, rng, &mut buf);
        if is_feasible(&grid, &buf[..grid.len()]) {
            buf.truncate(grid.len());
            return Ok(buf);
        }
    }
    Err(Error::Infeasible(format!(
        "no feasible weights in {MAX_ATTEMPTS} draws at d = {d}, k = {k}; use a smaller degree"
    )))
}

/// A draw completed to a full angular measure.
pub fn weights_sample_model<R: Rng + ?Sized>(k: usize, d: usize, rng: &mut R) -> Result<AngularBp<f64>> {
    AngularBp::from_interior(d, k, weights_sample(k, d, rng)?)
}

/// `ln ν_k(φ)`: the Dirichlet(1) density `Γ(|Γ_k| + 1)` divided by the
/// feasible probability, and `-∞` off the feasible set.
pub fn weights_log_density(k: usize, d: usize, interior: &[f64]) -> Result<f64> {
    let grid = MultiIndexGrid::shared(d, k)?;
    if interior.len() != grid.len() {
        return Err(Error::Structure(format!("expected {} weights, got {}", grid.len(), interior.len())));
    }
    if !is_feasible(&grid, interior) {
        return Ok(f64::NEG_INFINITY);
    }
    let Some(lz) = log_normalizer(d, k)? else {
        return Ok(f64::NEG_INFINITY);
    };
    Ok(ln_gamma((grid.len() + 1) as f64) - lz)
}
