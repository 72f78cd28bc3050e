//! Score distribution reports.

use anyhow::Result;
use serde::Serialize;
use wsd_ue::scores::{normalize_minmax, skewness, Histogram, ScoreName};

use crate::commands::read_records;
use crate::run::Run;
use crate::{InputError, ReportArgs, ReportFormat};

#[derive(Debug, Serialize)]
pub struct Distribution {
    pub source: String,
    pub score: ScoreName,
    pub n: usize,
    pub mean: f64,
    /// Undefined for fewer than three values or a constant sample.
    pub skewness: Option<f64>,
    /// Whether values were min-max scaled before binning.
    pub normalized: bool,
    pub histogram: Histogram,
}

fn distribution(source: String, score: ScoreName, values: &[f64], bins: usize) -> Result<Distribution> {
    let normalized = score.needs_normalization();
    let binned = if normalized { normalize_minmax(values)? } else { values.to_vec() };
    Ok(Distribution {
        source,
        score,
        n: values.len(),
        mean: values.iter().sum::<f64>() / values.len() as f64,
        skewness: skewness(values).ok(),
        normalized,
        histogram: Histogram::new(&binned, bins, 0.0, 1.0)?,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn markdown(dists: &[Distribution]) -> String {
    let mut out = String::from("| source | score | n | mean | skewness |\n|---|---|---:|---:|---:|\n");
    for d in dists {
        out.push_str(&format!(
            "| {} | {} | {} | {:.4} | {} |\n",
            d.source,
            d.score,
            d.n,
            d.mean,
            d.skewness.map_or_else(|| "-".into(), |s| format!("{s:.4}"))
        ));
    }
    for d in dists {
        out.push_str(&format!("\n### {} ({})\n\n| bin | count |\n|---|---:|\n", d.score, d.source));
        let h = &d.histogram;
        for (k, c) in h.counts.iter().enumerate() {
            out.push_str(&format!("| [{:.2}, {:.2}{} | {c} |\n", h.edges[k], h.edges[k + 1], if k + 1 == h.counts.len() { "]" } else { ")" }));
        }
    }
    out
}

pub fn report(a: ReportArgs) -> Result<()> {
    let mut run = Run::new("report", &a.out)?;
    let mut dists = Vec::new();
    for path in &a.records {
        run.input(path);
        let mut records = read_records(path)?;
        if a.wrong_only {
            records.retain(|r| !r.is_correct());
        }
        let Some(first) = records.first() else {
            return Err(InputError(format!("{}: no records to report", path.display())).into());
        };
        let score = first.score_name;
        if records.iter().any(|r| r.score_name != score) {
            return Err(InputError(format!("{}: mixes several scores", path.display())).into());
        }
        let values: Vec<f64> = records.iter().map(|r| r.value).collect();
        dists.push(distribution(path.display().to_string(), score, &values, a.bins)?);
    }
    match a.format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(&dists)?;
            text.push('\n');
            run.write("report.json", text.as_bytes())?;
        }
        ReportFormat::Md => {
            run.write("report.md", markdown(&dists).as_bytes())?;
        }
        ReportFormat::Csv => {
            let mut summary = csv::Writer::from_writer(Vec::new());
            summary.write_record(["source", "score", "n", "mean", "skewness", "normalized"])?;
            let mut hist = csv::Writer::from_writer(Vec::new());
            hist.write_record(["source", "score", "bin", "lo", "hi", "count"])?;
            for d in &dists {
                summary.write_record([
                    d.source.clone(),
                    d.score.to_string(),
                    d.n.to_string(),
                    d.mean.to_string(),
                    opt(d.skewness),
                    d.normalized.to_string(),
                ])?;
                let h = &d.histogram;
                for (k, c) in h.counts.iter().enumerate() {
                    hist.write_record([
                        d.source.clone(),
                        d.score.to_string(),
                        k.to_string(),
                        h.edges[k].to_string(),
                        h.edges[k + 1].to_string(),
                        c.to_string(),
                    ])?;
                }
            }
            run.write("report.csv", &summary.into_inner()?)?;
            run.write("histogram.csv", &hist.into_inner()?)?;
        }
    }
    run.finish()?;
    Ok(())
}
