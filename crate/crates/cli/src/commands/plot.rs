use maxstable::inference::PosteriorSummary;
use maxstable::metrics::plot::{line_chart, report_svgs, Series};
use maxstable::metrics::MetricReport;

use crate::error::{CliResult, Failure};
use crate::io::{read_text, write_file};
use crate::PlotArgs;

fn summary_svgs(s: &PosteriorSummary) -> CliResult<Vec<(String, String)>> {
    if s.grid.points.first().map(Vec::len) != Some(1) {
        return Err(Failure::config("summary plots need a bivariate summary"));
    }
    let xs: Vec<f64> = s.grid.points.iter().map(|t| t[0]).collect();
    let chart = |title: &str, b: &maxstable::inference::Band| {
        let zip = |v: &[f64]| xs.iter().copied().zip(v.iter().copied()).collect();
        line_chart(
            title,
            "t",
            &[
                Series { label: "mean", points: zip(&b.mean) },
                Series { label: "5%", points: zip(&b.lower) },
                Series { label: "95%", points: zip(&b.upper) },
            ],
            false,
        )
    };
    Ok(vec![
        ("pickands".into(), chart("Pickands dependence function", &s.pickands)),
        ("angular-density".into(), chart("angular density", &s.angular_density)),
    ])
}

pub fn run(a: &PlotArgs) -> CliResult<()> {
    let svgs = match (&a.report, &a.summary) {
        (Some(p), None) => {
            let r: MetricReport = serde_json::from_str(&read_text(p, "report")?)
                .map_err(|e| Failure::corrupt(format!("report {}: {e}", p.display())))?;
            report_svgs(&r)
        }
        (None, Some(p)) => {
            let v: serde_json::Value = serde_json::from_str(&read_text(p, "summary")?)
                .map_err(|e| Failure::corrupt(format!("summary {}: {e}", p.display())))?;
            // fit and diagnose both nest the summary under "posterior"
            let inner = v.get("posterior").cloned().unwrap_or(v);
            let s: PosteriorSummary = serde_json::from_value(inner)
                .map_err(|e| Failure::corrupt(format!("summary {}: {e}", p.display())))?;
            summary_svgs(&s)?
        }
        _ => return Err(Failure::config("give exactly one of --report or --summary")),
    };
    for (name, svg) in svgs {
        write_file(&a.out.join(format!("{name}.svg")), svg.as_bytes())?;
    }
    Ok(())
}
