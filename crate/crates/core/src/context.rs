//! Controlled-context ablations.
//!
//! Window control (WC) keeps the tokens within `L` positions of the target;
//! dependency control (DP) keeps the tokens reachable from the target through
//! at most `H` head/tail hops. Either parameter may be `whole`, meaning no
//! restriction (the full sentence for WC, the target's connected component
//! for DP).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, DependencyGraph, Pos, Token, WsdInstance};
use crate::error::{Error, Result};
use crate::metrics;
use crate::par::Exec;
use crate::scores::{ScoreName, UeRecord};

/// `L` or `H`. `Whole` sorts after every finite size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ContextParam {
    Size(usize),
    Whole,
}

impl fmt::Display for ContextParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextParam::Size(n) => write!(f, "{n}"),
            ContextParam::Whole => f.write_str("whole"),
        }
    }
}

impl FromStr for ContextParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("whole") || s == "W" {
            return Ok(ContextParam::Whole);
        }
        s.parse()
            .map(ContextParam::Size)
            .map_err(|_| Error::domain(format!("context parameter `{s}` is neither a size nor `whole`")))
    }
}

impl From<ContextParam> for String {
    fn from(p: ContextParam) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for ContextParam {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Parses a comma-separated list such as `0,1,3,whole`.
pub fn parse_params(list: &str) -> Result<Vec<ContextParam>> {
    let params: Vec<ContextParam> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if params.is_empty() {
        return Err(Error::domain("empty context parameter list"));
    }
    Ok(params)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ContextMode {
    Wc,
    Dp,
}

impl ContextMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ContextMode::Wc => "wc",
            ContextMode::Dp => "dp",
        }
    }
}

impl fmt::Display for ContextMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContextMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wc" => Ok(ContextMode::Wc),
            "dp" => Ok(ContextMode::Dp),
            _ => Err(Error::domain(format!("unknown context mode `{s}` (expected wc or dp)"))),
        }
    }
}

/// How removed tokens are handled in a derived sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Removed tokens are dropped; the kept tokens keep their relative order.
    #[default]
    Truncate,
    /// Removed tokens are replaced by [`MASK_TOKEN`]; positions are preserved.
    Mask,
}

pub const MASK_TOKEN: &str = "[MASK]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlledContext {
    pub instance_id: String,
    pub mode: ContextMode,
    pub param: ContextParam,
    /// Sorted token indices; always contains the target.
    pub kept: Vec<usize>,
}

/// Tokens `max(i-L, 0) ..= min(i+L, W-1)`.
pub fn window_context(sentence_len: usize, target: usize, param: ContextParam) -> Result<Vec<usize>> {
    if target >= sentence_len {
        return Err(Error::domain(format!(
            "target {target} outside sentence of {sentence_len} tokens"
        )));
    }
    let (lo, hi) = match param {
        ContextParam::Whole => (0, sentence_len - 1),
        ContextParam::Size(l) => (
            target.saturating_sub(l),
            target.saturating_add(l).min(sentence_len - 1),
        ),
    };
    Ok((lo..=hi).collect())
}

/// Repeatedly adds the heads and tails of the kept set, `H` times (or until
/// nothing changes). ROOT is not a token and adds nothing.
pub fn syntax_context(graph: &DependencyGraph, target: usize, param: ContextParam) -> Result<Vec<usize>> {
    let n = graph.token_count();
    if target >= n {
        return Err(Error::domain(format!(
            "target {target} not in graph of sentence {} ({n} tokens)",
            graph.sentence_id()
        )));
    }
    let adj = graph.adjacency();
    let mut kept = vec![false; n];
    kept[target] = true;
    let mut frontier = vec![target];
    let mut hops = 0usize;
    while !frontier.is_empty() {
        if let ContextParam::Size(h) = param {
            if hops == h {
                break;
            }
        }
        let mut next = Vec::new();
        for &t in &frontier {
            for &u in &adj[t] {
                if !kept[u] {
                    kept[u] = true;
                    next.push(u);
                }
            }
        }
        frontier = next;
        hops += 1;
    }
    Ok((0..n).filter(|&i| kept[i]).collect())
}

/// Kept set for one corpus instance.
pub fn controlled_context(
    corpus: &Corpus,
    inst: &WsdInstance,
    mode: ContextMode,
    param: ContextParam,
) -> Result<ControlledContext> {
    let kept = match mode {
        ContextMode::Wc => {
            let tokens = corpus.sentence(&inst.sentence_id).ok_or_else(|| {
                Error::domain(format!("unknown sentence {}", inst.sentence_id))
            })?;
            window_context(tokens.len(), inst.target_index, param)?
        }
        ContextMode::Dp => {
            let graph = corpus.graph(&inst.sentence_id).ok_or_else(|| {
                Error::domain(format!(
                    "dependency control needs a parse for sentence {} (instance {})",
                    inst.sentence_id, inst.instance_id
                ))
            })?;
            syntax_context(graph, inst.target_index, param)?
        }
    };
    Ok(ControlledContext {
        instance_id: inst.instance_id.clone(),
        mode,
        param,
        kept,
    })
}

/// Suffix appended to derived instance, sentence and corpus names, e.g. `@wc-0`.
pub fn context_suffix(mode: ContextMode, param: ContextParam) -> String {
    format!("@{mode}-{param}")
}

/// Removes a trailing `@wc-..`/`@dp-..` suffix, if any.
pub fn strip_context_suffix(id: &str) -> &str {
    match id.rfind('@') {
        Some(at) if id[at + 1..].starts_with("wc-") || id[at + 1..].starts_with("dp-") => &id[..at],
        _ => id,
    }
}

/// One derived sentence per instance, reduced to that instance's kept set.
/// Parses are not carried over.
pub fn derive_controlled_corpus(
    corpus: &Corpus,
    mode: ContextMode,
    param: ContextParam,
    reduction: Reduction,
    exec: Exec,
) -> Result<Corpus> {
    let suffix = context_suffix(mode, param);
    let derived: Vec<Result<(Vec<Token>, WsdInstance)>> = exec.map(corpus.instances(), |inst| {
        let ctx = controlled_context(corpus, inst, mode, param)?;
        let tokens = corpus
            .sentence(&inst.sentence_id)
            .expect("validated corpus");
        let (reduced, target_index) = match reduction {
            Reduction::Truncate => {
                let reduced: Vec<Token> = ctx
                    .kept
                    .iter()
                    .enumerate()
                    .map(|(index, &k)| Token { index, ..tokens[k].clone() })
                    .collect();
                let at = ctx.kept.binary_search(&inst.target_index).expect("target kept");
                (reduced, at)
            }
            Reduction::Mask => {
                let keep: BTreeSet<usize> = ctx.kept.iter().copied().collect();
                let reduced = tokens
                    .iter()
                    .map(|t| {
                        if keep.contains(&t.index) {
                            t.clone()
                        } else {
                            Token {
                                index: t.index,
                                surface: MASK_TOKEN.into(),
                                lemma: MASK_TOKEN.into(),
                                pos: Pos::Other,
                            }
                        }
                    })
                    .collect();
                (reduced, inst.target_index)
            }
        };
        let id = format!("{}{suffix}", inst.instance_id);
        let inst = WsdInstance {
            instance_id: id.clone(),
            sentence_id: id,
            target_index,
            ..inst.clone()
        };
        Ok((reduced, inst))
    });
    let mut sentences = BTreeMap::new();
    let mut instances = Vec::with_capacity(derived.len());
    for item in derived {
        let (tokens, inst) = item?;
        sentences.insert(inst.sentence_id.clone(), tokens);
        instances.push(inst);
    }
    Corpus::new(
        format!("{}{suffix}", corpus.name()),
        sentences,
        BTreeMap::new(),
        instances,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub param: ContextParam,
    pub mean_ue: f64,
    pub f1: f64,
    pub n: usize,
}

/// Mean uncertainty and F1 per context parameter, ordered with `whole` last.
/// Every run must cover the same instances (compared without context
/// suffixes) and use the same score.
pub fn ue_curve(runs: &BTreeMap<ContextParam, Vec<UeRecord>>) -> Result<Vec<CurveRow>> {
    if runs.len() < 2 {
        return Err(Error::domain(format!(
            "a context curve needs at least two parameters, got {}",
            runs.len()
        )));
    }
    let mut reference: Option<(ContextParam, BTreeSet<&str>, ScoreName)> = None;
    let mut rows = Vec::with_capacity(runs.len());
    for (&param, records) in runs {
        if records.is_empty() {
            return Err(Error::domain(format!("run for parameter {param} is empty")));
        }
        let ids: BTreeSet<&str> = records
            .iter()
            .map(|r| strip_context_suffix(&r.instance_id))
            .collect();
        if ids.len() != records.len() {
            return Err(Error::domain(format!(
                "run for parameter {param} repeats an instance"
            )));
        }
        let score = records[0].score_name;
        match &reference {
            None => reference = Some((param, ids, score)),
            Some((p0, ids0, s0)) => {
                if *s0 != score {
                    return Err(Error::domain(format!(
                        "runs {p0} and {param} use different scores ({s0} vs {score})"
                    )));
                }
                if *ids0 != ids {
                    let missing = ids0.symmetric_difference(&ids).next().expect("sets differ");
                    return Err(Error::domain(format!(
                        "runs {p0} and {param} cover different instances (e.g. {missing})"
                    )));
                }
            }
        }
        rows.push(CurveRow {
            param,
            mean_ue: records.iter().map(|r| r.value).sum::<f64>() / records.len() as f64,
            f1: metrics::f1(records)?,
            n: records.len(),
        });
    }
    Ok(rows)
}

pub fn write_curve_csv(out: impl Write, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Validation(format!("writing curve: {e}"));
    w.write_record(["param", "mean_ue", "f1", "n"]).map_err(io)?;
    for r in rows {
        w.write_record([
            r.param.to_string(),
            r.mean_ue.to_string(),
            r.f1.to_string(),
            r.n.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Validation(format!("writing curve: {e}")))
}
