use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use maxstable::inference::{
    acceptance_rates, posterior_summary, Chain, Sampler, SamplerConfig, StateRecord, SummaryGrid,
};
use maxstable::maxstable::MarginFamily;
use maxstable::priors::{EbConfig, EbEstimator, PriorConfig, Priors};
use maxstable::simulation::{block_maxima, BlockConfig};

use crate::error::{CliResult, Failure};
use crate::io::{json_string, read_csv, read_text, write_file};
use crate::manifest::RunManifest;
use crate::FitArgs;

pub fn chain_path(dir: &Path, c: usize) -> PathBuf {
    dir.join(format!("chain-{c}.jsonl"))
}

/// Parses a chain file. A final line without a terminating newline is an
/// interrupted write and is dropped when `tolerate_tail` is set; any other
/// malformed line is a corrupt artifact.
pub fn read_chain_file(path: &Path, tolerate_tail: bool) -> CliResult<Vec<StateRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read chain {}: {e}", path.display())))?;
    let complete = text.ends_with('\n');
    let lines: Vec<&str> = text.lines().collect();
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match StateRecord::from_json_line(line) {
            Ok(r) => out.push(r),
            Err(_) if tolerate_tail && !complete && i + 1 == lines.len() => break,
            Err(e) => return Err(Failure::corrupt(format!("{} line {}: {e}", path.display(), i + 1))),
        }
    }
    Ok(out)
}

pub fn chain_from_records(records: &[StateRecord]) -> CliResult<Chain> {
    let first = records.first().ok_or_else(|| Failure::data("chain is empty"))?;
    let last = records.last().expect("nonempty");
    Ok(Chain {
        d: first.d,
        family: first.theta.family,
        states: records.iter().map(StateRecord::state).collect(),
        iters: records.iter().map(|r| r.iter).collect(),
        acceptance: last.accept,
        scales: last.scales,
    })
}

/// First row outside the fixed part of the family's support.
fn check_support(data: &[Vec<f64>], family: MarginFamily) -> CliResult<()> {
    let positive = matches!(family, MarginFamily::Simple | MarginFamily::Frechet);
    for (i, row) in data.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() || (positive && !(x > 0.0)) {
                return Err(Failure::data(format!(
                    "row {} (column {}, value {x}) is outside the {family} support",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn default_estimator(family: MarginFamily) -> CliResult<EbEstimator> {
    match family {
        MarginFamily::Frechet => Ok(EbEstimator::FrechetScale),
        MarginFamily::Gumbel => Ok(EbEstimator::Gumbel),
        MarginFamily::Weibull => Ok(EbEstimator::Weibull),
        MarginFamily::Simple => Err(Failure::config("--eb needs a margin family with parameters")),
    }
}

fn run_chain(
    data: &[Vec<f64>],
    priors: &Priors,
    cfg: SamplerConfig,
    c: usize,
    dir: &Path,
    resume: bool,
    until: usize,
) -> CliResult<()> {
    let path = chain_path(dir, c);
    let previous = if resume && path.exists() { read_chain_file(&path, true)? } else { Vec::new() };
    let sampler = match previous.last() {
        Some(last) => {
            if last.chain != c {
                return Err(Failure::corrupt(format!("{} holds chain {}, expected {c}", path.display(), last.chain)));
            }
            Sampler::resume(data, priors, cfg, last).map_err(|e| Failure::corrupt(format!("{}: {e}", path.display())))?
        }
        None => Sampler::new(data, priors, cfg, c)?,
    };
    let file = fs::File::create(&path).map_err(|e| Failure::io(&path, e))?;
    let mut w = BufWriter::new(file);
    for r in &previous {
        writeln!(w, "{}", r.to_json_line()).map_err(|e| Failure::io(&path, e))?;
    }
    sampler
        .run_until(until, |r| {
            writeln!(w, "{}", r.to_json_line())
                .and_then(|_| w.flush())
                .map_err(|e| maxstable::Error::Numerical(format!("writing {}: {e}", path.display())))
        })
        .map_err(|e| match e {
            maxstable::Error::Numerical(m) if m.starts_with("writing") => Failure { code: 1, msg: m },
            e => e.into(),
        })?;
    w.flush().map_err(|e| Failure::io(&path, e))
}

pub fn run(a: &FitArgs, args: &[String]) -> CliResult<()> {
    let family: MarginFamily = a.family.parse()?;
    let raw = read_csv(&a.data)?;
    let d = raw[0].len();
    let mut prior = match &a.prior {
        Some(p) => PriorConfig::from_json(&read_text(p, "prior")?)?,
        None => PriorConfig::default(),
    };
    if let Some(m) = a.eb {
        let estimator = match prior.eb {
            Some(e) => e.estimator,
            None => default_estimator(family)?,
        };
        prior.eb = Some(EbConfig { estimator, m });
    }
    check_support(&raw, family)?;
    let (data, est) = match prior.eb {
        Some(eb) => {
            let est = prior.eb_estimates(&raw)?;
            (block_maxima(&raw, BlockConfig::fill(raw.len(), eb.m))?, est)
        }
        None => (raw.clone(), None),
    };
    let priors = Priors::new(d, family, &prior, est.as_ref())?;
    let defaults = SamplerConfig::default();
    let cfg = SamplerConfig {
        iterations: a.iterations,
        burn_in: a.burn_in,
        thin: a.thin,
        seed: a.seed,
        chains: a.chains,
        trans_prob: a.trans_prob.unwrap_or(defaults.trans_prob),
        concentration: a.concentration.unwrap_or(defaults.concentration),
        ..defaults
    };
    cfg.validate()?;
    fs::create_dir_all(&a.out).map_err(|e| Failure::io(&a.out, e))?;
    let until = a.until.unwrap_or(cfg.iterations);
    (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(&data, &priors, cfg, c, &a.out, a.resume, until))
        .collect::<CliResult<Vec<()>>>()?;

    let mut chains = Vec::new();
    let mut per_chain = Vec::new();
    for c in 0..cfg.chains {
        let recs = read_chain_file(&chain_path(&a.out, c), false)?;
        if recs.is_empty() {
            continue;
        }
        let chain = chain_from_records(&recs)?;
        let rates: serde_json::Map<String, serde_json::Value> = acceptance_rates(&chain.acceptance)
            .into_iter()
            .map(|(k, s)| (k.to_string(), json!({ "proposed": s.proposed, "accepted": s.accepted, "rate": s.rate() })))
            .collect();
        per_chain.push(json!({ "chain": c, "states": recs.len(), "last_iter": recs.last().unwrap().iter, "acceptance": rates }));
        chains.push(chain);
    }
    let summary_path = a.out.join("summary.json");
    let summary = if chains.is_empty() {
        serde_json::Value::Null
    } else {
        let pooled = Chain::pooled(&chains)?;
        serde_json::to_value(posterior_summary(&pooled, &SummaryGrid::default_for(d))?).expect("serializable")
    };
    let doc = json!({ "family": family, "d": d, "rows": data.len(), "eb": est, "chains": per_chain, "posterior": summary });
    write_file(&summary_path, json_string(&doc).as_bytes())?;

    let config = json!({ "family": family, "prior": prior, "sampler": cfg, "until": a.until });
    let mut m = RunManifest::new(
        "fit",
        args,
        Some(cfg.seed),
        config,
        "chain c draws from ChaCha8 stream c of --seed; prior normalizing constants use fixed internal streams",
    );
    m.input(&a.data)?;
    if let Some(p) = &a.prior {
        m.input(p)?;
    }
    for c in 0..cfg.chains {
        m.output(&chain_path(&a.out, c))?;
    }
    m.output(&summary_path)?;
    m.write(&a.out.join("manifest.json"))
}
