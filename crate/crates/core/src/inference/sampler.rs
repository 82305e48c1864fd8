use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::state::{Acceptance, Chain, ChainState, MoveStats, ProposalScales, StateRecord};
use crate::angular::{AngularBp, MultiIndexGrid};
use crate::error::{Error, Result};
use crate::maxstable::{margin_transform, LinearDesign, MarginFamily, MarginSpec};
use crate::priors::{data_prior_log_density, is_feasible, log_normalizer, weights_log_density, Priors};
use crate::simulation::SeededRng;
use crate::special::ln_gamma;

pub const MAX_INIT_ATTEMPTS: usize = 10_000;

const TARGET_WEIGHTS: f64 = 0.234;
const TARGET_MARGINS: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub scales: ProposalScales,
    /// Probability of attempting a degree move in an iteration.
    pub trans_prob: f64,
    /// Concentration `c` of the `Dirichlet(c ψ + 1)` perturbation used by
    /// degree moves.
    pub concentration: f64,
    pub seed: u64,
    pub chains: usize,
    /// Tune the random-walk scales during burn-in.
    pub adapt: bool,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            iterations: 2000,
            burn_in: 1000,
            thin: 1,
            scales: ProposalScales::default(),
            trans_prob: 0.2,
            concentration: 200.0,
            seed: 1,
            chains: 1,
            adapt: true,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations > 0 && self.iterations <= self.burn_in {
            return Err(Error::Config(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thinning must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.trans_prob) {
            return Err(Error::Config(format!("trans_prob {} outside [0, 1]", self.trans_prob)));
        }
        if !(self.concentration > 0.0) {
            return Err(Error::Config("concentration must be positive".into()));
        }
        if self.chains == 0 {
            return Err(Error::Config("need at least one chain".into()));
        }
        let s = self.scales;
        if [s.weights, s.shape, s.scale, s.loc].iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Config("proposal scales must be positive".into()));
        }
        Ok(())
    }

    fn retained(&self, iter: usize) -> bool {
        iter > self.burn_in && (iter - self.burn_in) % self.thin == 0
    }
}

/// Data mapped to the unit-Fréchet scale under fixed margins, with the
/// per-degree designs built lazily.
struct Likelihood {
    points: Vec<Vec<f64>>,
    log_jac: f64,
    designs: HashMap<usize, LinearDesign<f64>>,
}

impl Likelihood {
    /// `None` when a row falls outside the support of the margins.
    fn new(data: &[Vec<f64>], margins: &MarginSpec<f64>) -> Option<Self> {
        let mut points = Vec::with_capacity(data.len());
        let mut log_jac = 0.0;
        for x in data {
            let (u, lj) = margin_transform(margins, x).ok()?;
            if u.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || !lj.is_finite() {
                return None;
            }
            points.push(u);
            log_jac += lj;
        }
        Some(Self { points, log_jac, designs: HashMap::new() })
    }

    fn eval(&mut self, d: usize, k: usize, full: &[f64]) -> Result<f64> {
        if !self.designs.contains_key(&k) {
            self.designs.insert(k, LinearDesign::new(d, k, &self.points)?);
        }
        let v = self.designs[&k].log_likelihood(full)? + self.log_jac;
        Ok(if v.is_nan() { f64::NEG_INFINITY } else { v })
    }
}

#[derive(Clone, Copy)]
enum Block {
    Shape,
    Scale,
    Loc,
}

/// Metropolis-within-Gibbs sampler for one chain.
pub struct Sampler<'a> {
    data: &'a [Vec<f64>],
    priors: &'a Priors,
    cfg: SamplerConfig,
    d: usize,
    chain: usize,
    rng: SeededRng,
    state: ChainState,
    like: Likelihood,
    scales: ProposalScales,
    accept: Acceptance,
    iter: usize,
    pinv: HashMap<usize, DMatrix<f64>>,
}

impl<'a> Sampler<'a> {
    pub fn new(data: &'a [Vec<f64>], priors: &'a Priors, cfg: SamplerConfig, chain: usize) -> Result<Self> {
        cfg.validate()?;
        let d = priors.d();
        if data.is_empty() {
            return Err(Error::Domain("cannot sample a posterior from an empty sample".into()));
        }
        if let Some(i) = data.iter().position(|r| r.len() != d) {
            return Err(Error::Structure(format!("row {} has {} columns, expected {d}", i + 1, data[i].len())));
        }
        let mut rng = SeededRng::new(cfg.seed, chain as u64);
        let (state, like) = initial_state(data, priors, &mut rng)?;
        Ok(Self {
            data,
            priors,
            cfg,
            d,
            chain,
            rng,
            state,
            like,
            scales: cfg.scales,
            accept: Acceptance::default(),
            iter: 0,
            pinv: HashMap::new(),
        })
    }

    /// Continues a chain from its last written line.
    pub fn resume(data: &'a [Vec<f64>], priors: &'a Priors, cfg: SamplerConfig, last: &StateRecord) -> Result<Self> {
        cfg.validate()?;
        let d = priors.d();
        if last.d != d {
            return Err(Error::Structure(format!("chain has d = {}, the prior d = {d}", last.d)));
        }
        let state = last.state();
        let mut like = Likelihood::new(data, &state.theta)
            .ok_or_else(|| Error::Structure("resumed state is outside the support of the data".into()))?;
        let full = state.angular(d)?.full_weights();
        let ll = like.eval(d, state.k, &full)?;
        if !((ll - state.loglik).abs() <= 1e-9 * ll.abs().max(1.0)) {
            return Err(Error::Structure(format!(
                "cached log-likelihood {} disagrees with recomputed {ll}",
                state.loglik
            )));
        }
        let mut rng = SeededRng::new(cfg.seed, last.chain as u64);
        rng.set_word_pos(last.word_pos()?);
        Ok(Self {
            data,
            priors,
            cfg,
            d,
            chain: last.chain,
            rng,
            state,
            like,
            scales: last.scales,
            accept: last.accept,
            iter: last.iter,
            pinv: HashMap::new(),
        })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.iter
    }

    pub fn acceptance(&self) -> Acceptance {
        self.accept
    }

    pub fn record(&self) -> StateRecord {
        let s = &self.state;
        StateRecord {
            iter: self.iter,
            chain: self.chain,
            d: self.d,
            k: s.k,
            phi: s.phi.clone(),
            theta: s.theta.clone(),
            logpost: s.logpost(),
            loglik: s.loglik,
            logprior: s.logprior,
            rng: self.rng.word_pos().to_string(),
            scales: self.scales,
            accept: self.accept,
        }
    }

    /// Runs to `cfg.iterations`, handing every retained state to `sink`.
    /// A zero-iteration run returns the initial state.
    pub fn run(self, sink: impl FnMut(&StateRecord) -> Result<()>) -> Result<Chain> {
        let stop = self.cfg.iterations;
        self.run_until(stop, sink)
    }

    /// Like [`Sampler::run`] but stops after iteration `stop` (capped at
    /// `cfg.iterations`); the chain can be resumed from the last record.
    pub fn run_until(mut self, stop: usize, mut sink: impl FnMut(&StateRecord) -> Result<()>) -> Result<Chain> {
        let stop = stop.min(self.cfg.iterations);
        let mut states = Vec::new();
        let mut iters = Vec::new();
        if self.cfg.iterations == 0 && self.iter == 0 {
            states.push(self.state.clone());
            iters.push(0);
            sink(&self.record())?;
        }
        while self.iter < stop {
            self.step()?;
            if self.cfg.retained(self.iter) {
                states.push(self.state.clone());
                iters.push(self.iter);
                sink(&self.record())?;
            }
        }
        Ok(Chain {
            d: self.d,
            family: self.priors.margins.family,
            states,
            iters,
            acceptance: self.accept,
            scales: self.scales,
        })
    }

    /// One sweep: weights, each margin block, then possibly a degree move.
    pub fn step(&mut self) -> Result<()> {
        self.iter += 1;
        let ok = self.move_weights()?;
        self.accept.weights.record(ok);
        self.adapt(ok, TARGET_WEIGHTS, |s| &mut s.weights);
        let family = self.priors.margins.family;
        if family.has_shape() {
            let ok = self.move_margins(Block::Shape)?;
            self.accept.shape.record(ok);
            self.adapt(ok, TARGET_MARGINS, |s| &mut s.shape);
        }
        if family.has_scale() {
            let ok = self.move_margins(Block::Scale)?;
            self.accept.scale.record(ok);
            self.adapt(ok, TARGET_MARGINS, |s| &mut s.scale);
        }
        if family.has_loc() {
            let ok = self.move_margins(Block::Loc)?;
            self.accept.loc.record(ok);
            self.adapt(ok, TARGET_MARGINS, |s| &mut s.loc);
        }
        if self.rng.random::<f64>() < self.cfg.trans_prob {
            if self.rng.random::<bool>() {
                let ok = self.move_up()?;
                self.accept.up.record(ok);
            } else {
                let ok = self.move_down()?;
                self.accept.down.record(ok);
            }
        }
        Ok(())
    }

    fn adapt(&mut self, accepted: bool, target: f64, field: impl Fn(&mut ProposalScales) -> &mut f64) {
        if !self.cfg.adapt || self.iter > self.cfg.burn_in {
            return;
        }
        let gain = (self.iter as f64).powf(-0.6);
        let s = field(&mut self.scales);
        *s = (*s * (gain * (accepted as u8 as f64 - target)).exp()).clamp(1e-4, 10.0);
    }

    fn log_prior(&self, k: usize, phi: &[f64], theta: &MarginSpec<f64>) -> Result<f64> {
        if !self.priors.degree.contains(k) {
            return Ok(f64::NEG_INFINITY);
        }
        let lw = weights_log_density(k, self.d, phi)?;
        if lw == f64::NEG_INFINITY {
            return Ok(lw);
        }
        Ok(self.priors.degree.log_pmf(k)? + lw + data_prior_log_density(&self.priors.margins, theta)?)
    }

    fn accept_with(&mut self, log_ratio: f64) -> bool {
        let u: f64 = self.rng.random();
        log_ratio.is_finite() && u.ln() < log_ratio || log_ratio == f64::INFINITY
    }

    /// Softmax random walk on `(φ, 1 - Σφ)`. In additive log-ratio
    /// coordinates the move is symmetric, leaving the Jacobian `Π w_i`.
    fn move_weights(&mut self) -> Result<bool> {
        let k = self.state.k;
        let w = with_slack(&self.state.phi);
        let s = self.scales.weights;
        let z: Vec<f64> = w.iter().map(|&x| x.ln() + s * self.rng.sample::<f64, _>(StandardNormal)).collect();
        let w_new = softmax(&z);
        if w.iter().chain(&w_new).any(|&x| !(x > 0.0)) {
            return Ok(false);
        }
        let phi_new = w_new[..w_new.len() - 1].to_vec();
        let grid = MultiIndexGrid::shared(self.d, k)?;
        if !is_feasible(&grid, &phi_new) {
            // still consume the uniform so the stream does not depend on
            // which branch rejected
            let _ = self.accept_with(f64::NEG_INFINITY);
            return Ok(false);
        }
        let Ok(model) = AngularBp::from_interior(self.d, k, phi_new.clone()) else {
            let _ = self.accept_with(f64::NEG_INFINITY);
            return Ok(false);
        };
        let ll = self.like.eval(self.d, k, &model.full_weights())?;
        let lp = self.log_prior(k, &phi_new, &self.state.theta)?;
        let jac: f64 = w_new.iter().map(|x| x.ln()).sum::<f64>() - w.iter().map(|x| x.ln()).sum::<f64>();
        let ratio = ll + lp - self.state.logpost() + jac;
        if self.accept_with(ratio) {
            self.state.phi = phi_new;
            self.state.loglik = ll;
            self.state.logprior = lp;
            return Ok(true);
        }
        Ok(false)
    }

    fn move_margins(&mut self, block: Block) -> Result<bool> {
        let mut theta = self.state.theta.clone();
        let mut jac = 0.0;
        match block {
            Block::Shape | Block::Scale => {
                let (v, s) = match block {
                    Block::Shape => (&mut theta.shape, self.scales.shape),
                    _ => (&mut theta.scale, self.scales.scale),
                };
                for x in v.iter_mut() {
                    let step = s * self.rng.sample::<f64, _>(StandardNormal);
                    *x *= step.exp();
                    jac += step;
                }
            }
            Block::Loc => {
                for j in 0..theta.loc.len() {
                    let step = self.scales.loc * theta.scale[j] * self.rng.sample::<f64, _>(StandardNormal);
                    theta.loc[j] += step;
                }
            }
        }
        let lp = self.log_prior(self.state.k, &self.state.phi, &theta)?;
        let like = if lp.is_finite() { Likelihood::new(self.data, &theta) } else { None };
        let Some(mut like) = like else {
            let _ = self.accept_with(f64::NEG_INFINITY);
            return Ok(false);
        };
        let full = self.state.angular(self.d)?.full_weights();
        let ll = like.eval(self.d, self.state.k, &full)?;
        let ratio = ll + lp - self.state.logpost() + jac;
        if self.accept_with(ratio) {
            self.state.theta = theta;
            self.state.loglik = ll;
            self.state.logprior = lp;
            self.like = like;
            return Ok(true);
        }
        Ok(false)
    }

    fn move_up(&mut self) -> Result<bool> {
        let k = self.state.k;
        if k + 1 > self.priors.degree.k_cap() {
            return Ok(false);
        }
        let w = with_slack(&self.state.phi);
        let psi_up = with_slack(self.state.angular(self.d)?.degree_elevate().interior());
        let c = self.cfg.concentration;
        let alpha_fwd: Vec<f64> = psi_up.iter().map(|p| c * p + 1.0).collect();
        let w_new = dirichlet_sample(&alpha_fwd, &mut self.rng);
        let phi_new = w_new[..w_new.len() - 1].to_vec();
        let psi_down = self.project_down(k + 1, &phi_new)?;
        let alpha_rev = psi_down.map(|p| p.iter().map(|x| c * x + 1.0).collect::<Vec<_>>());
        self.finish_jump(k + 1, w, w_new, &alpha_fwd, alpha_rev)
    }

    fn move_down(&mut self) -> Result<bool> {
        let k = self.state.k;
        if k == 0 || k - 1 < self.priors.degree.k_min() {
            return Ok(false);
        }
        let w = with_slack(&self.state.phi);
        let Some(psi_down) = self.project_down(k, &self.state.phi.clone())? else {
            return Ok(false);
        };
        let c = self.cfg.concentration;
        let alpha_fwd: Vec<f64> = psi_down.iter().map(|p| c * p + 1.0).collect();
        let w_new = dirichlet_sample(&alpha_fwd, &mut self.rng);
        let phi_new = w_new[..w_new.len() - 1].to_vec();
        let rev = match AngularBp::<f64>::new(
            self.d,
            k - 1,
            vec![0.0; self.d],
            phi_new.iter().map(|x| x.max(0.0)).collect(),
        ) {
            Ok(m) => Some(with_slack(m.degree_elevate().interior()).iter().map(|p| c * p + 1.0).collect()),
            Err(_) => None,
        };
        self.finish_jump(k - 1, w, w_new, &alpha_fwd, rev)
    }

    /// Shared tail of both degree moves: `w_new` at degree `k_new` was drawn
    /// from `Dirichlet(alpha_fwd)`; `alpha_rev` parametrizes the reverse
    /// proposal back to the current `w`.
    fn finish_jump(
        &mut self,
        k_new: usize,
        w: Vec<f64>,
        w_new: Vec<f64>,
        alpha_fwd: &[f64],
        alpha_rev: Option<Vec<f64>>,
    ) -> Result<bool> {
        let phi_new = &w_new[..w_new.len() - 1];
        let reject = |s: &mut Self| -> Result<bool> {
            let _ = s.accept_with(f64::NEG_INFINITY);
            Ok(false)
        };
        let Some(alpha_rev) = alpha_rev else { return reject(self) };
        if w_new.iter().any(|&x| !(x > 0.0)) {
            return reject(self);
        }
        let grid = MultiIndexGrid::shared(self.d, k_new)?;
        if !is_feasible(&grid, phi_new) {
            return reject(self);
        }
        let lp = self.log_prior(k_new, phi_new, &self.state.theta)?;
        if !lp.is_finite() {
            return reject(self);
        }
        let Ok(model) = AngularBp::from_interior(self.d, k_new, phi_new.to_vec()) else {
            return reject(self);
        };
        let ll = self.like.eval(self.d, k_new, &model.full_weights())?;
        let ratio = ll + lp - self.state.logpost() + dirichlet_ln_pdf(&alpha_rev, &w)
            - dirichlet_ln_pdf(alpha_fwd, &w_new);
        if self.accept_with(ratio) {
            self.state.k = k_new;
            self.state.phi = phi_new.to_vec();
            self.state.loglik = ll;
            self.state.logprior = lp;
            return Ok(true);
        }
        Ok(false)
    }

    /// Least-squares projection of degree-`k` interior weights onto degree
    /// `k - 1`, clipped at zero and renormalized with the slack. `None` when
    /// nothing is left after clipping.
    fn project_down(&mut self, k: usize, phi: &[f64]) -> Result<Option<Vec<f64>>> {
        let d = self.d;
        if !self.pinv.contains_key(&k) {
            let e = elevation_matrix(d, k - 1)?;
            let p = e.pseudo_inverse(1e-12).map_err(|m| Error::Numerical(m.to_string()))?;
            self.pinv.insert(k, p);
        }
        let low = &self.pinv[&k] * DVector::from_column_slice(phi);
        let mut psi: Vec<f64> = low.iter().map(|x| x.max(0.0)).collect();
        psi.push((1.0 - psi.iter().sum::<f64>()).max(0.0));
        let total: f64 = psi.iter().sum();
        if !(total > 0.0) {
            return Ok(None);
        }
        Ok(Some(psi.into_iter().map(|x| x / total).collect()))
    }
}

/// Matrix of degree elevation from `k` to `k + 1` on the interior weights.
fn elevation_matrix(d: usize, k: usize) -> Result<DMatrix<f64>> {
    let lo = MultiIndexGrid::shared(d, k)?;
    let hi = MultiIndexGrid::shared(d, k + 1)?;
    let mut e = DMatrix::zeros(hi.len(), lo.len());
    for (i, alpha) in lo.indices().iter().enumerate() {
        let mut beta = alpha.clone();
        for j in 0..d {
            beta[j] += 1;
            let r = hi.position(&beta).expect("elevated index in grid");
            e[(r, i)] += alpha[j] as f64 / k as f64;
            beta[j] -= 1;
        }
    }
    Ok(e)
}

fn with_slack(phi: &[f64]) -> Vec<f64> {
    let mut w = phi.to_vec();
    w.push(1.0 - phi.iter().sum::<f64>());
    w
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub(crate) fn dirichlet_sample<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    let g: Vec<f64> = alpha.iter().map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng)).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|x| x / s).collect()
}

pub(crate) fn dirichlet_ln_pdf(alpha: &[f64], w: &[f64]) -> f64 {
    let a0: f64 = alpha.iter().sum();
    let mut acc = ln_gamma(a0);
    for (&a, &x) in alpha.iter().zip(w) {
        acc += (a - 1.0) * x.ln() - ln_gamma(a);
    }
    acc
}

fn initial_state(data: &[Vec<f64>], priors: &Priors, rng: &mut SeededRng) -> Result<(ChainState, Likelihood)> {
    let d = priors.d();
    let mut k0 = None;
    for k in priors.degree.k_min()..=priors.degree.k_cap() {
        if log_normalizer(d, k)?.is_some() {
            k0 = Some(k);
            break;
        }
    }
    let k = k0.ok_or_else(|| Error::Infeasible("no degree in the prior range has feasible weights".into()))?;
    let n = MultiIndexGrid::shared(d, k)?.len();
    // symmetric weights with half the mass inside: always feasible
    let phi = vec![0.5 / n as f64; n];
    let full = AngularBp::from_interior(d, k, phi.clone())?.full_weights();
    let attempts = if priors.margins.family == MarginFamily::Simple { 1 } else { MAX_INIT_ATTEMPTS };
    for attempt in 0..attempts {
        let theta = if attempt == 0 { priors.margins.initial() } else { priors.margins.sample(rng) };
        let lm = data_prior_log_density(&priors.margins, &theta)?;
        if !lm.is_finite() {
            continue;
        }
        let Some(mut like) = Likelihood::new(data, &theta) else { continue };
        let ll = like.eval(d, k, &full)?;
        if !ll.is_finite() {
            continue;
        }
        let logprior = priors.degree.log_pmf(k)? + weights_log_density(k, d, &phi)? + lm;
        return Ok((ChainState { k, phi, theta, loglik: ll, logprior }, like));
    }
    Err(Error::Infeasible(format!(
        "no initial state has a finite posterior after {attempts} attempts; check that the data lie in the {} support",
        priors.margins.family
    )))
}

/// Runs chain 0.
pub fn run_mcmc(data: &[Vec<f64>], priors: &Priors, cfg: &SamplerConfig) -> Result<Chain> {
    Sampler::new(data, priors, *cfg, 0)?.run(|_| Ok(()))
}

/// Runs `cfg.chains` chains on independent streams, concurrently.
pub fn run_chains(data: &[Vec<f64>], priors: &Priors, cfg: &SamplerConfig) -> Result<Vec<Chain>> {
    (0..cfg.chains).into_par_iter().map(|c| Sampler::new(data, priors, *cfg, c)?.run(|_| Ok(()))).collect()
}

/// Acceptance rates per move type, for logging.
pub fn acceptance_rates(a: &Acceptance) -> Vec<(&'static str, MoveStats)> {
    vec![
        ("weights", a.weights),
        ("shape", a.shape),
        ("scale", a.scale),
        ("loc", a.loc),
        ("up", a.up),
        ("down", a.down),
    ]
}
