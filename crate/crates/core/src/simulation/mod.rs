//! Exact simulation of max-stable vectors with Bernstein-polynomial angular
//! measures, the misspecified example generators and block maxima.

mod examples;
mod rng;

pub use examples::{gen_example, ExampleName, ExampleParams, LogisticBivariate};
pub use rng::SeededRng;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::angular::AngularBp;
use crate::error::{Error, Result};
use crate::maxstable::ModelSpec;

/// Iteration cap of the arrival-time construction.
pub const MAX_ARRIVALS: usize = 10_000_000;

enum Atom {
    Vertex(usize),
    Dirichlet(Vec<Gamma<f64>>),
}

/// Precomputed mixture table for repeated draws from an angular measure.
pub struct AngularSampler {
    d: usize,
    cumulative: Vec<f64>,
    atoms: Vec<Atom>,
}

impl AngularSampler {
    pub fn new(model: &AngularBp<f64>) -> Result<Self> {
        let d = model.d();
        let mut cumulative = Vec::new();
        let mut atoms = Vec::new();
        let mut acc = 0.0;
        for (j, &p) in model.vertex_mass().iter().enumerate() {
            if p > 0.0 {
                acc += p;
                cumulative.push(acc);
                atoms.push(Atom::Vertex(j));
            }
        }
        for (alpha, &w) in model.grid().indices().iter().zip(model.interior()) {
            if w > 0.0 {
                acc += w;
                cumulative.push(acc);
                let g = alpha
                    .iter()
                    .map(|&a| Gamma::new(a as f64, 1.0).map_err(|e| Error::Numerical(e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                atoms.push(Atom::Dirichlet(g));
            }
        }
        if atoms.is_empty() || !(acc > 0.0) {
            return Err(Error::Constraint("angular measure has no mass".into()));
        }
        Ok(Self { d, cumulative, atoms })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// One point of the simplex `S`, written as a length-`d` vector.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let total = *self.cumulative.last().unwrap();
        let u = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        let mut w = vec![0.0; self.d];
        match &self.atoms[i] {
            Atom::Vertex(j) => w[*j] = 1.0,
            Atom::Dirichlet(gammas) => {
                let mut s = 0.0;
                for (wj, g) in w.iter_mut().zip(gammas) {
                    *wj = g.sample(rng);
                    s += *wj;
                }
                for wj in &mut w {
                    *wj /= s;
                }
            }
        }
        w
    }

    /// Exact simple max-stable draw `Y = max_i d W_i / Γ_i` over unit-rate
    /// Poisson arrivals, stopped once `d / Γ_i` is below every coordinate.
    pub fn sample_simple<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        self.sample_simple_capped(rng, MAX_ARRIVALS)
    }

    pub fn sample_simple_capped<R: Rng + ?Sized>(&self, rng: &mut R, cap: usize) -> Result<Vec<f64>> {
        Ok(self.sample_simple_hits(rng, cap)?.0)
    }

    /// As [`Self::sample_simple_capped`], also returning for each coordinate
    /// the index of the arrival attaining its maximum. Coordinates sharing an
    /// index form one block of the hitting partition.
    pub fn sample_simple_hits<R: Rng + ?Sized>(&self, rng: &mut R, cap: usize) -> Result<(Vec<f64>, Vec<usize>)> {
        let d = self.d as f64;
        let mut y = vec![0.0f64; self.d];
        let mut hit = vec![0usize; self.d];
        let mut gamma = 0.0;
        for i in 0..cap {
            let e: f64 = Exp1.sample(rng);
            gamma += e;
            let bound = d / gamma;
            if bound < y.iter().copied().fold(f64::INFINITY, f64::min) {
                return Ok((y, hit));
            }
            let w = self.sample(rng);
            for ((yj, hj), wj) in y.iter_mut().zip(&mut hit).zip(w) {
                if bound * wj > *yj {
                    *yj = bound * wj;
                    *hj = i;
                }
            }
        }
        Err(Error::Numerical(format!("arrival-time construction did not stop within {cap} points")))
    }
}

pub fn sample_angular<R: Rng + ?Sized>(model: &AngularBp<f64>, rng: &mut R) -> Result<Vec<f64>> {
    Ok(AngularSampler::new(model)?.sample(rng))
}

pub fn sample_simple_maxstable<R: Rng + ?Sized>(model: &AngularBp<f64>, rng: &mut R) -> Result<Vec<f64>> {
    AngularSampler::new(model)?.sample_simple(rng)
}

/// Draw with the model's margins, via the inverse margin transform.
pub fn sample_maxstable<R: Rng + ?Sized>(model: &ModelSpec<f64>, rng: &mut R) -> Result<Vec<f64>> {
    let y = sample_simple_maxstable(&model.angular, rng)?;
    Ok(y.iter().enumerate().map(|(j, &u)| model.margins.inverse_coordinate(j, u)).collect())
}

/// `n` independent draws from `model`.
pub fn sample_many<R: Rng + ?Sized>(model: &ModelSpec<f64>, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    let sampler = AngularSampler::new(&model.angular)?;
    (0..n)
        .map(|_| {
            let y = sampler.sample_simple(rng)?;
            Ok(y.iter().enumerate().map(|(j, &u)| model.margins.inverse_coordinate(j, u)).collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockConfig {
    /// Block size `m`.
    pub block_size: usize,
    /// Number of blocks `n`.
    pub blocks: usize,
}

impl BlockConfig {
    /// As many full blocks of size `m` as the data allow.
    pub fn fill(rows: usize, block_size: usize) -> Self {
        Self { block_size, blocks: if block_size == 0 { 0 } else { rows / block_size } }
    }
}

/// Componentwise maxima of consecutive blocks; trailing rows are discarded.
pub fn block_maxima(data: &[Vec<f64>], cfg: BlockConfig) -> Result<Vec<Vec<f64>>> {
    if cfg.block_size == 0 {
        return Err(Error::Domain("block size must be at least 1".into()));
    }
    let need = cfg.block_size * cfg.blocks;
    if need > data.len() {
        return Err(Error::Domain(format!(
            "{} blocks of size {} need {need} rows, only {} available",
            cfg.blocks,
            cfg.block_size,
            data.len()
        )));
    }
    Ok(data[..need]
        .chunks(cfg.block_size)
        .map(|block| {
            let mut m = block[0].clone();
            for row in &block[1..] {
                for (a, &b) in m.iter_mut().zip(row) {
                    *a = a.max(b);
                }
            }
            m
        })
        .collect())
}
