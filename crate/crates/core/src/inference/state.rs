use serde::{Deserialize, Serialize};

use crate::angular::AngularBp;
use crate::error::{Error, Result};
use crate::maxstable::{MarginFamily, MarginSpec, ModelSpec};

/// One state of the sampler with cached log-likelihood and log-prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub k: usize,
    /// Interior weights; vertex masses follow by completion.
    pub phi: Vec<f64>,
    pub theta: MarginSpec<f64>,
    pub loglik: f64,
    pub logprior: f64,
}

impl ChainState {
    pub fn logpost(&self) -> f64 {
        self.loglik + self.logprior
    }

    pub fn angular(&self, d: usize) -> Result<AngularBp<f64>> {
        AngularBp::from_interior(d, self.k, self.phi.clone())
    }

    pub fn model(&self, d: usize) -> Result<ModelSpec<f64>> {
        ModelSpec::new(self.angular(d)?, self.theta.clone())
    }
}

/// Random-walk scales per move block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalScales {
    pub weights: f64,
    pub shape: f64,
    pub scale: f64,
    pub loc: f64,
}

impl Default for ProposalScales {
    fn default() -> Self {
        Self { weights: 0.3, shape: 0.05, scale: 0.05, loc: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MoveStats {
    pub proposed: u64,
    pub accepted: u64,
}

impl MoveStats {
    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub(crate) fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }
}

/// Acceptance counts per move type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Acceptance {
    pub weights: MoveStats,
    pub shape: MoveStats,
    pub scale: MoveStats,
    pub loc: MoveStats,
    pub up: MoveStats,
    pub down: MoveStats,
}

/// One line of the chain file. Carries enough sampler state to resume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub iter: usize,
    pub chain: usize,
    pub d: usize,
    pub k: usize,
    pub phi: Vec<f64>,
    pub theta: MarginSpec<f64>,
    pub logpost: f64,
    pub loglik: f64,
    pub logprior: f64,
    /// Generator word position, decimal.
    pub rng: String,
    pub scales: ProposalScales,
    pub accept: Acceptance,
}

impl StateRecord {
    pub fn state(&self) -> ChainState {
        ChainState {
            k: self.k,
            phi: self.phi.clone(),
            theta: self.theta.clone(),
            loglik: self.loglik,
            logprior: self.logprior,
        }
    }

    pub fn word_pos(&self) -> Result<u128> {
        self.rng.parse().map_err(|_| Error::Structure(format!("bad generator position {:?}", self.rng)))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_json_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Structure(format!("chain line: {e}")))
    }
}

/// Retained states of one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub d: usize,
    pub family: MarginFamily,
    pub states: Vec<ChainState>,
    pub iters: Vec<usize>,
    pub acceptance: Acceptance,
    pub scales: ProposalScales,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn logpost_trace(&self) -> Vec<f64> {
        self.states.iter().map(ChainState::logpost).collect()
    }

    /// Concatenates the states of several chains.
    pub fn pooled(chains: &[Chain]) -> Result<Chain> {
        let first = chains.first().ok_or_else(|| Error::Domain("no chains to pool".into()))?;
        let mut out = Chain { states: Vec::new(), iters: Vec::new(), ..first.clone() };
        for c in chains {
            if c.d != first.d || c.family != first.family {
                return Err(Error::Structure("chains disagree on dimension or family".into()));
            }
            out.states.extend(c.states.iter().cloned());
            out.iters.extend(&c.iters);
        }
        Ok(out)
    }
}
