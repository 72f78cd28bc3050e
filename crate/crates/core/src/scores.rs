//! Uncertainty scores over Monte-Carlo predictive samples and the
//! distribution diagnostics used to compare them.
//!
//! All four scores grow with uncertainty:
//!
//! | score | definition                                         | range          |
//! |-------|----------------------------------------------------|----------------|
//! | MP    | `1 - max_s p(s)` of a single forward pass          | `[0, 1 - 1/M]` |
//! | SMP   | `1 - max_s mean_t p_t(s)`                          | `[0, 1 - 1/M]` |
//! | PV    | class-averaged population variance over passes     | `[0, 0.25]`    |
//! | BALD  | entropy of the mean minus mean per-pass entropy    | `[0, ln M]`    |

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{validate_alignment, Corpus, PredictiveSamples, ProbMatrix, WsdInstance};
use crate::error::{Error, Result};
use crate::par::Exec;

/// Floor applied to probabilities inside logarithms.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ScoreName {
    Mp,
    Smp,
    Pv,
    Bald,
}

impl ScoreName {
    pub const ALL: [ScoreName; 4] = [ScoreName::Mp, ScoreName::Smp, ScoreName::Pv, ScoreName::Bald];

    pub fn as_str(self) -> &'static str {
        match self {
            ScoreName::Mp => "MP",
            ScoreName::Smp => "SMP",
            ScoreName::Pv => "PV",
            ScoreName::Bald => "BALD",
        }
    }

    /// Scores whose raw range is not `[0, 1]` and that are min-max normalised
    /// before plotting.
    pub fn needs_normalization(self) -> bool {
        matches!(self, ScoreName::Pv | ScoreName::Bald)
    }
}

impl fmt::Display for ScoreName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScoreName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MP" => Ok(ScoreName::Mp),
            "SMP" => Ok(ScoreName::Smp),
            "PV" => Ok(ScoreName::Pv),
            "BALD" => Ok(ScoreName::Bald),
            other => Err(Error::domain(format!(
                "unknown score `{other}` (expected MP, SMP, PV or BALD)"
            ))),
        }
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

/// `1 - max p` for a single probability vector.
pub fn mp(probs: &[f64]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::domain("MP of an empty probability vector"));
    }
    crate::corpus::check_simplex(probs).map_err(Error::Validation)?;
    Ok(1.0 - probs[argmax(probs)])
}

/// Per-class mean over the passes.
///
/// Accumulated as offsets from the first row, so a matrix of identical rows
/// has a mean that equals that row bit for bit.
pub fn column_means(m: &ProbMatrix) -> Vec<f64> {
    let first = m.row(0);
    let mut offsets = vec![0.0; m.classes()];
    for row in m.rows().skip(1) {
        for ((acc, p), p0) in offsets.iter_mut().zip(row).zip(first) {
            *acc += p - p0;
        }
    }
    let t = m.passes() as f64;
    first.iter().zip(offsets).map(|(p0, d)| p0 + d / t).collect()
}

pub fn smp(m: &ProbMatrix) -> f64 {
    smp_from_means(&column_means(m))
}

fn smp_from_means(means: &[f64]) -> f64 {
    1.0 - means[argmax(means)]
}

/// Class-averaged population variance (divisor T) across passes.
pub fn pv(m: &ProbMatrix) -> f64 {
    pv_from_means(m, &column_means(m))
}

fn pv_from_means(m: &ProbMatrix, means: &[f64]) -> f64 {
    let mut sq = vec![0.0; m.classes()];
    for row in m.rows() {
        for ((acc, p), mean) in sq.iter_mut().zip(row).zip(means) {
            let d = p - mean;
            *acc += d * d;
        }
    }
    let t = m.passes() as f64;
    sq.iter().map(|s| s / t).sum::<f64>() / m.classes() as f64
}

#[inline]
fn plogp(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * p.max(LOG_FLOOR).ln()
    }
}

/// Mutual information between predictions and parameters, in nats.
pub fn bald(m: &ProbMatrix) -> f64 {
    bald_from_means(m, &column_means(m))
}

// H(mean) - mean_t H(p_t), regrouped as mean_t sum_s [plogp(p_ts) - plogp(mean_s)]
// so that agreeing passes cancel exactly.
fn bald_from_means(m: &ProbMatrix, means: &[f64]) -> f64 {
    let mean_terms: Vec<f64> = means.iter().map(|&p| plogp(p)).collect();
    let total: f64 = m
        .rows()
        .map(|row| {
            row.iter()
                .zip(&mean_terms)
                .map(|(&p, &pm)| plogp(p) - pm)
                .sum::<f64>()
        })
        .sum();
    (total / m.passes() as f64).max(0.0)
}

/// Min-max scaling onto `[0, 1]`; a constant list maps to all zeros.
pub fn normalize_minmax(values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::domain("cannot normalise an empty list"));
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    Ok(values
        .iter()
        .map(|&v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect())
}

/// Fisher-Pearson coefficient `g1 = m3 / m2^(3/2)` with biased moments.
pub fn skewness(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 3 {
        return Err(Error::domain(format!("skewness needs at least 3 values, got {n}")));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let (m2, m3) = values.iter().fold((0.0, 0.0), |(m2, m3), &v| {
        let d = v - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let (m2, m3) = (m2 / n as f64, m3 / n as f64);
    if m2 == 0.0 {
        return Err(Error::domain("skewness of a constant sample is undefined"));
    }
    Ok(m3 / m2.powf(1.5))
}

/// Equal-width histogram over `[lo, hi]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::domain("histogram needs at least one bin and hi > lo"));
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| lo + width * k as f64).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            if !(lo..=hi).contains(&v) {
                return Err(Error::domain(format!("value {v} outside histogram range [{lo}, {hi}]")));
            }
            let k = (((v - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        Ok(Histogram { edges, counts })
    }
}

/// One scored instance: the unit every metric and analysis consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeRecord {
    pub instance_id: String,
    pub score_name: ScoreName,
    pub value: f64,
    pub predicted: String,
    pub loss: f64,
}

impl UeRecord {
    pub fn is_correct(&self) -> bool {
        self.loss == 0.0
    }
}

/// Which pass feeds MP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MpSource {
    /// The flagged deterministic row when the file has one, else row 0.
    #[default]
    Auto,
    /// Require the deterministic row.
    Deterministic,
    /// A specific sampled row.
    Row(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossMode {
    /// 0 when the prediction is a gold sense, else 1.
    #[default]
    ZeroOne,
    /// `-ln` of the probability mass on the gold senses.
    CrossEntropy,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ScoreOptions {
    pub mp_source: MpSource,
    pub loss: LossMode,
    /// Score the aligned subset instead of refusing a dirty alignment.
    pub partial: bool,
    pub exec: Exec,
}

/// Distribution and value of one score for one instance.
fn score_one(
    inst: &WsdInstance,
    s: &PredictiveSamples,
    score: ScoreName,
    opts: &ScoreOptions,
) -> Result<UeRecord> {
    let m = &s.matrix;
    let (value, dist): (f64, Vec<f64>) = match score {
        ScoreName::Mp => {
            let row: Vec<f64> = match (opts.mp_source, &s.deterministic) {
                (MpSource::Auto | MpSource::Deterministic, Some(d)) => d.clone(),
                (MpSource::Auto, None) => m.row(0).to_vec(),
                (MpSource::Deterministic, None) => {
                    return Err(Error::domain(format!(
                        "instance {}: no deterministic row for MP",
                        s.instance_id
                    )))
                }
                (MpSource::Row(t), _) if t < m.passes() => m.row(t).to_vec(),
                (MpSource::Row(t), _) => {
                    return Err(Error::domain(format!(
                        "instance {}: MP row {t} out of range (T={})",
                        s.instance_id,
                        m.passes()
                    )))
                }
            };
            (1.0 - row[argmax(&row)], row)
        }
        _ => {
            let means = column_means(m);
            let v = match score {
                ScoreName::Smp => smp_from_means(&means),
                ScoreName::Pv => pv_from_means(m, &means),
                _ => bald_from_means(m, &means),
            };
            (v, means)
        }
    };
    let predicted = inst.candidates[argmax(&dist)].clone();
    let loss = match opts.loss {
        LossMode::ZeroOne => {
            if inst.is_gold(&predicted) {
                0.0
            } else {
                1.0
            }
        }
        LossMode::CrossEntropy => {
            let mass: f64 = inst
                .candidates
                .iter()
                .zip(&dist)
                .filter(|(c, _)| inst.is_gold(c))
                .map(|(_, p)| p)
                .sum();
            -mass.max(LOG_FLOOR).ln()
        }
    };
    Ok(UeRecord {
        instance_id: inst.instance_id.clone(),
        score_name: score,
        value,
        predicted,
        loss,
    })
}

/// Scores every aligned instance. Output is ordered by instance id.
pub fn score_corpus(
    corpus: &Corpus,
    samples: &[PredictiveSamples],
    score: ScoreName,
    opts: &ScoreOptions,
) -> Result<Vec<UeRecord>> {
    let report = validate_alignment(corpus, samples);
    if !report.is_clean() && !opts.partial {
        return Err(Error::Alignment(Box::new(report)));
    }
    let bad = report.bad_ids();
    let by_id: HashMap<&str, &PredictiveSamples> =
        samples.iter().map(|s| (s.instance_id.as_str(), s)).collect();
    let mut pairs: Vec<(&WsdInstance, &PredictiveSamples)> = corpus
        .instances()
        .iter()
        .filter(|i| !bad.contains(i.instance_id.as_str()))
        .filter_map(|i| by_id.get(i.instance_id.as_str()).map(|s| (i, *s)))
        .collect();
    pairs.sort_by(|a, b| a.0.instance_id.cmp(&b.0.instance_id));
    opts.exec
        .map(&pairs, |(inst, s)| score_one(inst, s, score, opts))
        .into_iter()
        .collect()
}

pub fn mean_value(records: &[UeRecord]) -> Option<f64> {
    (!records.is_empty()).then(|| records.iter().map(|r| r.value).sum::<f64>() / records.len() as f64)
}

pub fn write_records_csv(out: impl Write, records: &[UeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Schema(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Schema(e.to_string()))
}

pub fn read_records_csv(input: impl Read, label: &std::path::Path) -> Result<Vec<UeRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize()
        .enumerate()
        .map(|(k, rec)| {
            // header is line 1
            rec.map_err(|e| Error::parse(label, k + 2, e.to_string()))
        })
        .collect()
}

pub fn write_records_jsonl(out: &mut impl Write, records: &[UeRecord]) -> std::io::Result<()> {
    for r in records {
        crate::jsonl::write_line(out, r)?;
    }
    Ok(())
}

pub fn read_records_jsonl(input: impl std::io::BufRead, label: &std::path::Path) -> Result<Vec<UeRecord>> {
    crate::jsonl::lines::<UeRecord>(input, label)
        .map(|r| r.map(|(_, rec)| rec))
        .collect()
}
