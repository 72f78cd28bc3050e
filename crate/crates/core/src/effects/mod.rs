//! Lexical effect analysis: condition filtering, aggregation into instance,
//! lemma or sense groups, level binning, pairwise t-tests and OLS regression.

mod levels;
mod ols;
mod table;
mod ttest;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, LexicalMeta, Pos, WsdInstance};
use crate::error::{Error, Result};
use crate::scores::UeRecord;

pub use levels::{bin_levels, Interval, Level, LevelBounds};
pub use ols::{ols_regression, regression_design, Coefficient, Design, OlsSummary};
pub use table::{
    run_effect, write_tables_csv, EffectConfig, EffectOptions, EffectSpec, EffectTable,
    LevelSummary, PairTest, DEFAULT_CONFIG,
};
pub use ttest::{pairwise_significance, student_ttest, ttest, welch_ttest, PairCell, TTest, TTestKind, ALPHA};

/// A lexical property of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Effect {
    Pos,
    NMorph,
    NGt,
    NPd,
    DHypo,
    DSyno,
}

impl Effect {
    pub const ALL: [Effect; 6] = [
        Effect::Pos,
        Effect::NMorph,
        Effect::NGt,
        Effect::NPd,
        Effect::DHypo,
        Effect::DSyno,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Effect::Pos => "POS",
            Effect::NMorph => "nMorph",
            Effect::NGt => "nGT",
            Effect::NPd => "nPD",
            Effect::DHypo => "dHypo",
            Effect::DSyno => "dSyno",
        }
    }

    pub fn is_numeric(self) -> bool {
        self != Effect::Pos
    }

    /// Numeric value from instance metadata; `None` when absent (or for POS).
    pub fn value(self, meta: &LexicalMeta) -> Option<f64> {
        match self {
            Effect::Pos => None,
            Effect::NMorph => meta.n_morph.map(f64::from),
            Effect::NGt => Some(f64::from(meta.n_gt)),
            Effect::NPd => Some(f64::from(meta.n_pd)),
            Effect::DHypo => meta.d_hypo.map(f64::from),
            Effect::DSyno => meta.d_syno.map(f64::from),
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Effect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Effect::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::domain(format!(
                    "unknown effect `{s}` (expected POS, nMorph, nGT, nPD, dHypo or dSyno)"
                ))
            })
    }
}

impl From<Effect> for String {
    fn from(e: Effect) -> String {
        e.as_str().into()
    }
}

impl TryFrom<String> for Effect {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Grouping manner: instance, lemma or sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Aggregation {
    Instance,
    Lemma,
    Sense,
}

impl Aggregation {
    pub fn as_str(self) -> &'static str {
        match self {
            Aggregation::Instance => "I",
            Aggregation::Lemma => "L",
            Aggregation::Sense => "S",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "instance" => Ok(Aggregation::Instance),
            "L" | "l" | "lemma" => Ok(Aggregation::Lemma),
            "S" | "s" | "sense" => Ok(Aggregation::Sense),
            other => Err(Error::domain(format!(
                "unknown aggregation manner `{other}` (expected I, L or S)"
            ))),
        }
    }
}

impl From<Aggregation> for String {
    fn from(a: Aggregation) -> String {
        a.as_str().into()
    }
}

impl TryFrom<String> for Aggregation {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// What counts as "the same lemma" for lemma aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LemmaKey {
    /// Lemma and POS, so cross-category homonyms stay apart.
    #[default]
    LemmaPos,
    LemmaOnly,
}

/// Aggregated UE over instances sharing a key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub key: String,
    pub n: usize,
    pub mean_ue: f64,
    /// Shared POS of the members, if they agree.
    pub pos: Option<Pos>,
    /// Mean of each numeric effect over the members that carry it.
    pub meta: BTreeMap<Effect, f64>,
}

impl Group {
    pub fn value(&self, effect: Effect) -> Option<f64> {
        self.meta.get(&effect).copied()
    }
}

#[derive(Default)]
struct Acc<'a> {
    ue: Vec<f64>,
    pos: Vec<Pos>,
    metas: Vec<&'a LexicalMeta>,
}

/// Groups records by instance, lemma or gold sense and averages their UE and
/// numeric metadata. A multi-gold instance joins every one of its sense
/// groups. Groups come back sorted by key.
pub fn aggregate(
    records: &[UeRecord],
    corpus: &Corpus,
    manner: Aggregation,
    lemma_key: LemmaKey,
) -> Result<Vec<Group>> {
    let mut groups: BTreeMap<String, Acc> = BTreeMap::new();
    for r in records {
        let inst = corpus.instance(&r.instance_id).ok_or_else(|| {
            Error::domain(format!("record for unknown instance {}", r.instance_id))
        })?;
        let keys: Vec<String> = match manner {
            Aggregation::Instance => vec![inst.instance_id.clone()],
            Aggregation::Lemma => vec![match lemma_key {
                LemmaKey::LemmaPos => format!("{}/{}", inst.lemma, inst.pos),
                LemmaKey::LemmaOnly => inst.lemma.clone(),
            }],
            Aggregation::Sense => inst.gold.clone(),
        };
        for key in keys {
            let acc = groups.entry(key).or_default();
            acc.ue.push(r.value);
            acc.pos.push(inst.pos);
            acc.metas.push(&inst.meta);
        }
    }
    Ok(groups
        .into_iter()
        .map(|(key, acc)| {
            let n = acc.ue.len();
            let pos = acc.pos.iter().all(|&p| p == acc.pos[0]).then_some(acc.pos[0]);
            let meta = Effect::ALL
                .into_iter()
                .filter(|e| e.is_numeric())
                .filter_map(|e| {
                    let vals: Vec<f64> = acc.metas.iter().filter_map(|m| e.value(m)).collect();
                    (!vals.is_empty()).then(|| (e, vals.iter().sum::<f64>() / vals.len() as f64))
                })
                .collect();
            Group {
                key,
                n,
                mean_ue: acc.ue.iter().sum::<f64>() / n as f64,
                pos,
                meta,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Clause {
    /// `POS=NOUN`, `POS!=VERB`
    Pos { negate: bool, pos: Pos },
    /// `nGT>1`
    Cmp { field: Effect, op: CmpOp, value: f64 },
    /// bare field name: the metadata value is present
    Present(Effect),
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Pos { negate, pos } => write!(f, "POS{}{pos}", if *negate { "!=" } else { "=" }),
            Clause::Cmp { field, op, value } => write!(f, "{field}{}{value}", op.as_str()),
            Clause::Present(field) => write!(f, "{field}"),
        }
    }
}

/// Conjunction of clauses, written `nGT=1,POS=NOUN`; `-` or an empty string
/// selects everything.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Condition {
    pub clauses: Vec<Clause>,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("-");
        }
        let parts: Vec<String> = self.clauses.iter().map(Clause::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Ok(Condition::default());
        }
        let clauses = s
            .split([',', '&'])
            .map(str::trim)
            .filter(|c| !c.is_empty())
            .map(parse_clause)
            .collect::<Result<_>>()?;
        Ok(Condition { clauses })
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for Condition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn parse_clause(text: &str) -> Result<Clause> {
    let Some(at) = text.find(['=', '!', '<', '>']) else {
        let field: Effect = text.parse()?;
        if field == Effect::Pos {
            return Err(Error::domain("POS needs a value, e.g. POS=NOUN"));
        }
        return Ok(Clause::Present(field));
    };
    let (name, rest) = text.split_at(at);
    let field: Effect = name.parse()?;
    let (op, value) = [
        ("!=", CmpOp::Ne),
        ("<=", CmpOp::Le),
        (">=", CmpOp::Ge),
        ("=", CmpOp::Eq),
        ("<", CmpOp::Lt),
        (">", CmpOp::Gt),
    ]
    .into_iter()
    .find_map(|(sym, op)| rest.strip_prefix(sym).map(|v| (op, v.trim())))
    .ok_or_else(|| Error::domain(format!("bad comparison in condition `{text}`")))?;
    if field == Effect::Pos {
        let pos: Pos = value
            .parse()
            .map_err(|_| Error::domain(format!("unknown POS `{value}` in condition `{text}`")))?;
        return match op {
            CmpOp::Eq => Ok(Clause::Pos { negate: false, pos }),
            CmpOp::Ne => Ok(Clause::Pos { negate: true, pos }),
            _ => Err(Error::domain(format!("POS only supports = and != (`{text}`)"))),
        };
    }
    let value: f64 = value
        .parse()
        .map_err(|_| Error::domain(format!("non-numeric value in condition `{text}`")))?;
    Ok(Clause::Cmp { field, op, value })
}

impl Condition {
    /// Evaluates clauses left to right, stopping at the first that fails.
    /// Comparing a field the instance does not carry is an error.
    pub fn matches(&self, inst: &WsdInstance) -> Result<bool> {
        for clause in &self.clauses {
            let ok = match *clause {
                Clause::Pos { negate, pos } => (inst.pos == pos) != negate,
                Clause::Present(field) => field.value(&inst.meta).is_some(),
                Clause::Cmp { field, op, value } => {
                    let v = field.value(&inst.meta).ok_or_else(|| {
                        Error::domain(format!(
                            "condition references {field}, which instance {} does not carry",
                            inst.instance_id
                        ))
                    })?;
                    op.holds(v, value)
                }
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Instances satisfying the condition, in corpus order.
pub fn filter_condition<'c>(corpus: &'c Corpus, condition: &Condition) -> Result<Vec<&'c WsdInstance>> {
    let mut out = Vec::new();
    for inst in corpus.instances() {
        if condition.matches(inst)? {
            out.push(inst);
        }
    }
    Ok(out)
}

/// Records of the selected instances; every selected instance must have one.
pub(crate) fn select_records(records: &[UeRecord], selected: &[&WsdInstance]) -> Result<Vec<UeRecord>> {
    let by_id: HashMap<&str, &UeRecord> = records.iter().map(|r| (r.instance_id.as_str(), r)).collect();
    selected
        .iter()
        .map(|inst| {
            by_id
                .get(inst.instance_id.as_str())
                .map(|r| (*r).clone())
                .ok_or_else(|| Error::domain(format!("no UE record for instance {}", inst.instance_id)))
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod test_support {
    use std::collections::BTreeMap;

    use super::*;
    use crate::corpus::test_support::{instance, tokens};
    use crate::scores::ScoreName;

    /// (id, lemma, pos, gold, value, nMorph)
    pub type Row<'a> = (&'a str, &'a str, Pos, &'a [&'a str], f64, Option<u32>);

    /// One sentence per instance.
    pub fn corpus_and_records(spec: &[Row]) -> (Corpus, Vec<UeRecord>) {
        let mut sentences = BTreeMap::new();
        let mut instances = Vec::new();
        let mut records = Vec::new();
        for (id, lemma, pos, gold, value, n_morph) in spec {
            let sid = format!("s-{id}");
            sentences.insert(sid.clone(), tokens(&["w"]));
            let mut cands: Vec<&str> = gold.to_vec();
            cands.push("other");
            let mut inst = instance(id, &sid, 0, &cands, gold);
            inst.lemma = (*lemma).into();
            inst.pos = *pos;
            inst.meta.n_morph = *n_morph;
            instances.push(inst);
            records.push(UeRecord {
                instance_id: (*id).into(),
                score_name: ScoreName::Smp,
                value: *value,
                predicted: gold[0].into(),
                loss: 0.0,
            });
        }
        (Corpus::new("t", sentences, BTreeMap::new(), instances).unwrap(), records)
    }
}
