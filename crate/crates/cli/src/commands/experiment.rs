use serde_json::json;

use maxstable::metrics::plot::report_svgs;
use maxstable::metrics::{run_experiment, ExperimentConfig};

use crate::error::CliResult;
use crate::io::{json_string, read_text, write_file};
use crate::manifest::RunManifest;
use crate::ExperimentArgs;

pub fn run(a: &ExperimentArgs, args: &[String]) -> CliResult<()> {
    let cfg = ExperimentConfig::from_json(&read_text(&a.config, "experiment config")?)?;
    cfg.validate()?;
    let report = run_experiment(&cfg)?;
    let json_path = a.out.join("report.json");
    let csv_path = a.out.join("report.csv");
    write_file(&json_path, json_string(&report).as_bytes())?;
    write_file(&csv_path, report.to_csv().as_bytes())?;
    let mut m = RunManifest::new(
        "experiment",
        args,
        None,
        json!(cfg),
        "each cell seeds ChaCha8 from (seed, n, m): data on stream 0xDA7A, metrics on stream 0x3E7C, chain 0 for the sampler",
    );
    m.input(&a.config)?;
    m.output(&json_path)?;
    m.output(&csv_path)?;
    for (name, svg) in report_svgs(&report) {
        let p = a.out.join(format!("{name}.svg"));
        write_file(&p, svg.as_bytes())?;
        m.output(&p)?;
    }
    m.write(&a.out.join("manifest.json"))
}
