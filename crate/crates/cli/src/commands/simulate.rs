use serde_json::json;

use maxstable::simulation::{gen_example, sample_many, ExampleName, ExampleParams, SeededRng};

use super::read_model;
use crate::error::{CliResult, Failure};
use crate::io::{csv_string, write_file};
use crate::manifest::RunManifest;
use crate::SimulateArgs;

pub fn run(a: &SimulateArgs, args: &[String]) -> CliResult<()> {
    let mut rng = SeededRng::new(a.seed, 0);
    let (rows, config) = match (&a.model, &a.example) {
        (Some(path), None) => {
            let model = read_model(path)?;
            let rows = sample_many(&model, a.n, &mut rng)?;
            (rows, json!({ "model": model, "n": a.n }))
        }
        (None, Some(name)) => {
            let name: ExampleName = name.parse()?;
            let mut params = ExampleParams::default();
            if let Some(r) = &a.rho {
                if r.len() != 2 || r.iter().any(|v| !(*v > 0.0)) {
                    return Err(Failure::config("--rho needs two positive values"));
                }
                params.rho = r.clone();
            }
            if let Some(t) = a.theta {
                params.theta = t;
            }
            let rows = gen_example(name, &params, a.n, &mut rng)?;
            (rows, json!({ "example": name, "params": params, "n": a.n }))
        }
        _ => return Err(Failure::config("give exactly one of --model or --example")),
    };
    write_file(&a.out, csv_string(&rows).as_bytes())?;
    let mut m = RunManifest::new("simulate", args, Some(a.seed), config, "draws use ChaCha8 stream 0 of --seed");
    if let Some(p) = &a.model {
        m.input(p)?;
    }
    m.output(&a.out)?;
    let path = a.manifest.clone().unwrap_or_else(|| format!("{}.manifest.json", a.out.display()).into());
    m.write(&path)
}
