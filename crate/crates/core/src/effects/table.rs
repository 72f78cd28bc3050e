//! The effect procedure end to end: filter, aggregate, bin, test.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::levels::{bin_levels, LevelBounds};
use super::ttest::{ttest, TTestKind, ALPHA};
use super::{aggregate, filter_condition, select_records, Aggregation, Condition, Effect, LemmaKey};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::scores::UeRecord;

/// The shipped analyses, as TOML.
pub const DEFAULT_CONFIG: &str = include_str!("../../config/effects.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectSpec {
    pub effect: Effect,
    #[serde(default)]
    pub condition: Condition,
    pub aggregation: Aggregation,
    pub levels: LevelBounds,
}

impl EffectSpec {
    pub fn validate(&self) -> Result<()> {
        match (self.effect == Effect::Pos, self.levels.is_categorical()) {
            (true, false) => Err(Error::domain("POS levels must be POS categories")),
            (false, true) => Err(Error::domain(format!(
                "{} levels must be intervals, not POS categories",
                self.effect
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectConfig {
    pub analysis: Vec<EffectSpec>,
}

impl EffectConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: EffectConfig = toml::from_str(text)
            .map_err(|e| Error::Schema(format!("effect config: {e}")))?;
        for spec in &cfg.analysis {
            spec.validate()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn builtin() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("shipped effect config is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EffectOptions {
    pub test: TTestKind,
    pub lemma_key: LemmaKey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub label: String,
    pub n: usize,
    /// Absent for an empty level.
    pub mean_ue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    /// 0-based level indices, `a < b`.
    pub a: usize,
    pub b: usize,
    pub t: f64,
    pub dof: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectTable {
    pub effect: Effect,
    pub condition: String,
    pub aggregation: Aggregation,
    pub test: TTestKind,
    /// Instances passing the condition.
    pub n_instances: usize,
    pub n_groups: usize,
    pub levels: Vec<LevelSummary>,
    /// Upper-triangle tests; pairs where a level has fewer than two groups
    /// are listed in `skipped` instead.
    pub pairs: Vec<PairTest>,
    pub skipped: Vec<(usize, usize)>,
}

impl EffectTable {
    pub fn pair(&self, a: usize, b: usize) -> Option<&PairTest> {
        let (a, b) = (a.min(b), a.max(b));
        self.pairs.iter().find(|p| p.a == a && p.b == b)
    }
}

pub fn run_effect(
    corpus: &Corpus,
    records: &[UeRecord],
    spec: &EffectSpec,
    opts: EffectOptions,
) -> Result<EffectTable> {
    spec.validate()?;
    let selected = filter_condition(corpus, &spec.condition)?;
    if selected.is_empty() {
        return Err(Error::domain(format!(
            "condition `{}` selects no instances",
            spec.condition
        )));
    }
    let recs = select_records(records, &selected)?;
    let groups = aggregate(&recs, corpus, spec.aggregation, opts.lemma_key)?;
    let assignment: Vec<usize> = if spec.levels.is_categorical() {
        let mut out = Vec::with_capacity(groups.len());
        let mut offenders = Vec::new();
        for g in &groups {
            match g.pos.and_then(|p| spec.levels.assign_pos(p)) {
                Some(k) => out.push(k),
                None => offenders.push(g.key.clone()),
            }
        }
        if !offenders.is_empty() {
            return Err(Error::domain(format!(
                "{} group(s) have no single listed POS: {}",
                offenders.len(),
                offenders.iter().take(10).cloned().collect::<Vec<_>>().join(", ")
            )));
        }
        out
    } else {
        let values = groups
            .iter()
            .map(|g| {
                g.value(spec.effect).ok_or_else(|| {
                    Error::domain(format!("group {} carries no {} value", g.key, spec.effect))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        bin_levels(&values, &spec.levels)?
    };

    let k = spec.levels.len();
    let mut samples = vec![Vec::new(); k];
    for (g, &level) in groups.iter().zip(&assignment) {
        samples[level].push(g.mean_ue);
    }
    let levels = spec
        .levels
        .levels()
        .iter()
        .zip(&samples)
        .map(|(l, s)| LevelSummary {
            label: l.to_string(),
            n: s.len(),
            mean_ue: (!s.is_empty()).then(|| s.iter().sum::<f64>() / s.len() as f64),
        })
        .collect();
    let mut pairs = Vec::new();
    let mut skipped = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            if samples[a].len() < 2 || samples[b].len() < 2 {
                skipped.push((a, b));
                continue;
            }
            let r = ttest(&samples[a], &samples[b], opts.test)?;
            pairs.push(PairTest {
                a,
                b,
                t: r.t,
                dof: r.dof,
                p: r.p,
                significant: r.p <= ALPHA,
            });
        }
    }
    Ok(EffectTable {
        effect: spec.effect,
        condition: spec.condition.to_string(),
        aggregation: spec.aggregation,
        test: opts.test,
        n_instances: selected.len(),
        n_groups: groups.len(),
        levels,
        pairs,
        skipped,
    })
}

/// One row per table: level ranges, sizes and means, then `t` and `p` for
/// each level pair. Tables with fewer levels leave trailing cells empty.
pub fn write_tables_csv(out: impl Write, tables: &[EffectTable]) -> Result<()> {
    let k = tables.iter().map(|t| t.levels.len()).max().unwrap_or(0);
    let mut header: Vec<String> = ["effect", "condition", "aggregation", "test", "n_instances"]
        .map(String::from)
        .to_vec();
    for l in 1..=k {
        header.extend([format!("L{l}_range"), format!("L{l}_n"), format!("L{l}_mean")]);
    }
    let pair_ids: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
    for (a, b) in &pair_ids {
        header.extend([format!("L{}-L{}_t", a + 1, b + 1), format!("L{}-L{}_p", a + 1, b + 1)]);
    }
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Validation(format!("writing effect table: {e}"));
    w.write_record(&header).map_err(err)?;
    for t in tables {
        let mut row = vec![
            t.effect.to_string(),
            t.condition.clone(),
            t.aggregation.to_string(),
            format!("{:?}", t.test).to_lowercase(),
            t.n_instances.to_string(),
        ];
        for l in 0..k {
            match t.levels.get(l) {
                Some(s) => row.extend([
                    s.label.clone(),
                    s.n.to_string(),
                    s.mean_ue.map(|m| m.to_string()).unwrap_or_default(),
                ]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        for &(a, b) in &pair_ids {
            match t.pair(a, b) {
                Some(p) => row.extend([p.t.to_string(), p.p.to_string()]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row).map_err(err)?;
    }
    w.flush()
        .map_err(|e| Error::Validation(format!("writing effect table: {e}")))
}
