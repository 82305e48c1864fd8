use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use maxstable::inference::{posterior_mean_angular, posterior_summary, Chain, Predictive, SummaryGrid};
use maxstable::metrics::plot::{line_chart, Series};
use maxstable::metrics::{hellinger_mc, kl_mc, ks_angular2, l1_angular, pickands_sup2};
use maxstable::simulation::SeededRng;

use super::fit::{chain_from_records, read_chain_file};
use super::read_model;
use crate::error::{CliResult, Failure};
use crate::io::{json_string, write_file};
use crate::manifest::RunManifest;
use crate::DiagnoseArgs;

/// Expands fit output directories into their chain files.
fn chain_files(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Failure::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    let name = f.file_name().and_then(|n| n.to_str()).unwrap_or("");
                    name.starts_with("chain-") && name.ends_with(".jsonl")
                })
                .collect();
            found.sort();
            if found.is_empty() {
                return Err(Failure::config(format!("no chain files in {}", p.display())));
            }
            out.extend(found);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            return Err(Failure::config(format!("chain {} does not exist", p.display())));
        }
    }
    Ok(out)
}

fn metric(v: maxstable::Result<f64>) -> Value {
    match v {
        Ok(x) => json!(x),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn pickands_svg(chain: &Chain, truth: Option<&maxstable::ModelSpec>, dir: &Path) -> CliResult<Option<PathBuf>> {
    if chain.d != 2 {
        return Ok(None);
    }
    let grid = SummaryGrid::lattice(2, 100);
    let summary = posterior_summary(chain, &grid)?;
    let xs: Vec<f64> = grid.points.iter().map(|t| t[0]).collect();
    let band = &summary.pickands;
    let mut series = vec![
        Series { label: "posterior mean", points: xs.iter().copied().zip(band.mean.iter().copied()).collect() },
        Series { label: "5%", points: xs.iter().copied().zip(band.lower.iter().copied()).collect() },
        Series { label: "95%", points: xs.iter().copied().zip(band.upper.iter().copied()).collect() },
    ];
    if let Some(t) = truth {
        let pts = xs.iter().map(|&x| Ok((x, t.angular.pickands(&[x])?))).collect::<maxstable::Result<Vec<_>>>()?;
        series.push(Series { label: "truth", points: pts });
    }
    let path = dir.join("pickands.svg");
    write_file(&path, line_chart("Pickands dependence function", "t", &series, false).as_bytes())?;
    Ok(Some(path))
}

pub fn run(a: &DiagnoseArgs, args: &[String]) -> CliResult<()> {
    let files = chain_files(&a.chain)?;
    let mut chains = Vec::new();
    for f in &files {
        let recs = read_chain_file(f, false)?;
        if recs.is_empty() {
            return Err(Failure::data(format!("chain {} has no states", f.display())));
        }
        chains.push(chain_from_records(&recs)?);
    }
    let chain = Chain::pooled(&chains)?;
    let truth = a.truth.as_deref().map(read_model).transpose()?;
    if let Some(t) = &truth {
        if t.d() != chain.d {
            return Err(Failure::config(format!("truth has dimension {}, chain has {}", t.d(), chain.d)));
        }
    }
    let summary = posterior_summary(&chain, &SummaryGrid::default_for(chain.d))?;
    let mut distances = serde_json::Map::new();
    if let Some(t) = &truth {
        let mean = posterior_mean_angular(&chain)?;
        if chain.d == 2 {
            distances.insert("ks-angular".into(), metric(ks_angular2(&mean, &t.angular)));
            distances.insert("pickands-sup".into(), metric(pickands_sup2(&mean, &t.angular, 1000)));
        }
        distances.insert("l1-angular".into(), metric(l1_angular(&mean, &t.angular)));
        let pred = Predictive::new(&chain)?;
        let mut rng = SeededRng::new(a.seed, 0x3E7C);
        for (name, est) in [
            ("hellinger", hellinger_mc(&pred, t, a.mc_samples, &mut rng)),
            ("kl", kl_mc(t, &pred, a.mc_samples, &mut rng)),
        ] {
            let v = match est {
                Ok(e) => serde_json::to_value(e).expect("serializable"),
                Err(e) => json!({ "error": e.to_string() }),
            };
            distances.insert(name.into(), v);
        }
    }
    let svg = match &a.svg {
        Some(dir) => pickands_svg(&chain, truth.as_ref(), dir)?,
        None => None,
    };
    let doc = json!({
        "chains": files.iter().map(|f| f.display().to_string()).collect::<Vec<_>>(),
        "posterior": summary,
        "distances": if truth.is_some() { Value::Object(distances) } else { Value::Null },
    });
    write_file(&a.out, json_string(&doc).as_bytes())?;

    let config = json!({ "mc_samples": a.mc_samples });
    let mut m = RunManifest::new("diagnose", args, Some(a.seed), config, "Monte Carlo draws use ChaCha8 stream 0x3E7C of --seed");
    for f in &files {
        m.input(f)?;
    }
    if let Some(t) = &a.truth {
        m.input(t)?;
    }
    m.output(&a.out)?;
    if let Some(p) = svg {
        m.output(&p)?;
    }
    m.write(&PathBuf::from(format!("{}.manifest.json", a.out.display())))
}
