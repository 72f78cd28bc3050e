//! Data model for WSD corpora and Monte-Carlo predictive samples, plus the
//! importers and exporters that move them in and out of the toolkit.
//!
//! Every constructor validates its invariants, so a value of [`Corpus`] or
//! [`PredictiveSamples`] that exists is a valid one.

mod alignment;
mod conllu;
mod framework;
mod native;
mod samples;
mod sidecar;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use alignment::{validate_alignment, AlignmentReport, MMismatch};
pub use conllu::{import_conllu, parse_conllu};
pub use framework::{import_framework_xml, parse_framework, ImportOptions};
pub use native::{export_corpus, import_corpus, read_corpus, write_corpus, SCHEMA_VERSION};
pub use samples::{
    load_samples, read_samples, write_samples, PredictiveSamples, ProbMatrix, SIMPLEX_TOLERANCE,
};
pub use sidecar::{Inventory, MetaFields, MetadataTable};
pub(crate) use samples::check_simplex;

/// Coarse part-of-speech categories. Only the first four may be WSD targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    Other,
}

impl Pos {
    pub const CONTENT: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    /// Lenient mapping used for context tokens: anything unknown is `Other`.
    pub fn from_tag(tag: &str) -> Pos {
        tag.parse().unwrap_or(Pos::Other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Other => "OTHER",
        }
    }

    pub fn is_content(self) -> bool {
        self != Pos::Other
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "NOUN" => Ok(Pos::Noun),
            "VERB" => Ok(Pos::Verb),
            "ADJ" => Ok(Pos::Adj),
            "ADV" => Ok(Pos::Adv),
            "OTHER" => Ok(Pos::Other),
            other => Err(Error::domain(format!("unknown POS tag `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos: Pos,
}

/// Head of a dependency edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<usize>", into = "Option<usize>")]
pub enum Head {
    Root,
    Token(usize),
}

impl From<Option<usize>> for Head {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Head::Root, Head::Token)
    }
}

impl From<Head> for Option<usize> {
    fn from(h: Head) -> Self {
        match h {
            Head::Root => None,
            Head::Token(i) => Some(i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub head: Head,
    pub tail: usize,
    #[serde(rename = "rel")]
    pub relation: String,
}

/// Dependency tree over one sentence; token indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    sentence_id: String,
    // sorted by tail, so edges[i].tail == i
    edges: Vec<Edge>,
}

impl DependencyGraph {
    /// Builds a graph, checking that every token is the tail of exactly one
    /// edge and that heads point at valid tokens.
    pub fn new(sentence_id: impl Into<String>, mut edges: Vec<Edge>) -> Result<Self> {
        let sentence_id = sentence_id.into();
        let n = edges.len();
        edges.sort_by_key(|e| e.tail);
        for (i, e) in edges.iter().enumerate() {
            if e.tail != i {
                return Err(Error::Integrity(format!(
                    "sentence {sentence_id}: token {} is not the tail of exactly one edge",
                    if e.tail > i { i } else { e.tail }
                )));
            }
            if let Head::Token(h) = e.head {
                if h >= n {
                    return Err(Error::Integrity(format!(
                        "sentence {sentence_id}: head {h} of token {i} is out of range (n={n})"
                    )));
                }
                if h == i {
                    return Err(Error::Integrity(format!(
                        "sentence {sentence_id}: token {i} is its own head"
                    )));
                }
            }
        }
        // every chain of heads must end at ROOT within n steps
        for start in 0..n {
            let mut cur = start;
            let mut steps = 0;
            while let Head::Token(h) = edges[cur].head {
                cur = h;
                steps += 1;
                if steps > n {
                    return Err(Error::Integrity(format!(
                        "sentence {sentence_id}: head chain from token {start} forms a cycle"
                    )));
                }
            }
        }
        Ok(DependencyGraph { sentence_id, edges })
    }

    pub fn sentence_id(&self) -> &str {
        &self.sentence_id
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn token_count(&self) -> usize {
        self.edges.len()
    }

    pub fn head_of(&self, token: usize) -> Option<Head> {
        self.edges.get(token).map(|e| e.head)
    }

    /// Undirected adjacency lists (head and tails of each token).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.edges.len()];
        for e in &self.edges {
            if let Head::Token(h) = e.head {
                adj[h].push(e.tail);
                adj[e.tail].push(h);
            }
        }
        adj
    }
}

/// Lexical properties attached to an instance. `n_pd` and `n_gt` are derived
/// from the candidate and gold lists; the rest come from a metadata sidecar.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexicalMeta {
    #[serde(rename = "nMorph", default, skip_serializing_if = "Option::is_none")]
    pub n_morph: Option<u32>,
    #[serde(rename = "nPD")]
    pub n_pd: u32,
    #[serde(rename = "nGT")]
    pub n_gt: u32,
    #[serde(rename = "dHypo", default, skip_serializing_if = "Option::is_none")]
    pub d_hypo: Option<u32>,
    #[serde(rename = "dSyno", default, skip_serializing_if = "Option::is_none")]
    pub d_syno: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WsdInstance {
    pub instance_id: String,
    pub sentence_id: String,
    pub target_index: usize,
    pub lemma: String,
    pub pos: Pos,
    /// Candidate senses, in the column order of the instance's sample matrix.
    pub candidates: Vec<String>,
    pub gold: Vec<String>,
    pub meta: LexicalMeta,
}

impl WsdInstance {
    pub fn is_gold(&self, sense: &str) -> bool {
        self.gold.iter().any(|g| g == sense)
    }

    pub fn candidate_index(&self, sense: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c == sense)
    }

    /// Hex SHA-256 over the ordered candidate list; identifies the column order.
    pub fn candidates_digest(&self) -> String {
        digest_senses(&self.candidates)
    }

    fn validate(&self, sentence_len: usize) -> Result<()> {
        let id = &self.instance_id;
        if self.target_index >= sentence_len {
            return Err(Error::Integrity(format!(
                "instance {id}: target index {} outside sentence of length {sentence_len}",
                self.target_index
            )));
        }
        if !self.pos.is_content() {
            return Err(Error::Validation(format!(
                "instance {id}: target POS must be one of NOUN, VERB, ADJ, ADV"
            )));
        }
        if self.candidates.is_empty() {
            return Err(Error::Validation(format!("instance {id}: no candidate senses")));
        }
        if self.gold.is_empty() {
            return Err(Error::Integrity(format!("instance {id}: empty gold set")));
        }
        let cand: HashSet<&str> = self.candidates.iter().map(String::as_str).collect();
        if cand.len() != self.candidates.len() {
            return Err(Error::Validation(format!("instance {id}: duplicate candidate senses")));
        }
        let gold: HashSet<&str> = self.gold.iter().map(String::as_str).collect();
        if gold.len() != self.gold.len() {
            return Err(Error::Validation(format!("instance {id}: duplicate gold senses")));
        }
        if let Some(g) = self.gold.iter().find(|g| !cand.contains(g.as_str())) {
            return Err(Error::Integrity(format!(
                "instance {id}: gold sense {g} is not a candidate"
            )));
        }
        let m = &self.meta;
        if m.n_pd as usize != self.candidates.len() || m.n_gt as usize != self.gold.len() {
            return Err(Error::Validation(format!(
                "instance {id}: nPD/nGT ({}/{}) disagree with candidate/gold counts ({}/{})",
                m.n_pd,
                m.n_gt,
                self.candidates.len(),
                self.gold.len()
            )));
        }
        validate_meta_fields(id, self.pos, m.n_morph, m.d_hypo, m.d_syno)
    }
}

pub(crate) fn validate_meta_fields(
    who: &str,
    pos: Pos,
    n_morph: Option<u32>,
    d_hypo: Option<u32>,
    d_syno: Option<u32>,
) -> Result<()> {
    for (name, v) in [("nMorph", n_morph), ("dHypo", d_hypo), ("dSyno", d_syno)] {
        if v == Some(0) {
            return Err(Error::Validation(format!(
                "{who}: {name} must be >= 1 (absent values are omitted, not 0)"
            )));
        }
    }
    if d_hypo.is_some() && pos != Pos::Noun {
        return Err(Error::Validation(format!("{who}: dHypo is only defined for nouns")));
    }
    Ok(())
}

pub(crate) fn digest_senses(senses: &[String]) -> String {
    let mut h = Sha256::new();
    for s in senses {
        h.update(s.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// A validated WSD corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    name: String,
    sentences: BTreeMap<String, Vec<Token>>,
    graphs: BTreeMap<String, DependencyGraph>,
    instances: Vec<WsdInstance>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(
        name: impl Into<String>,
        sentences: BTreeMap<String, Vec<Token>>,
        graphs: BTreeMap<String, DependencyGraph>,
        instances: Vec<WsdInstance>,
    ) -> Result<Self> {
        for (sid, tokens) in &sentences {
            if let Some((i, t)) = tokens.iter().enumerate().find(|(i, t)| t.index != *i) {
                return Err(Error::Validation(format!(
                    "sentence {sid}: token at position {i} carries index {}",
                    t.index
                )));
            }
        }
        for (sid, g) in &graphs {
            let Some(tokens) = sentences.get(sid) else {
                return Err(Error::Integrity(format!(
                    "dependency graph for unknown sentence {sid}"
                )));
            };
            if g.sentence_id() != sid {
                return Err(Error::Integrity(format!(
                    "graph keyed {sid} describes sentence {}",
                    g.sentence_id()
                )));
            }
            if g.token_count() != tokens.len() {
                return Err(Error::Integrity(format!(
                    "sentence {sid}: parse has {} tokens, corpus has {}",
                    g.token_count(),
                    tokens.len()
                )));
            }
        }
        let mut by_id = HashMap::with_capacity(instances.len());
        for (k, inst) in instances.iter().enumerate() {
            let Some(tokens) = sentences.get(&inst.sentence_id) else {
                return Err(Error::Integrity(format!(
                    "instance {} references unknown sentence {}",
                    inst.instance_id, inst.sentence_id
                )));
            };
            inst.validate(tokens.len())?;
            if by_id.insert(inst.instance_id.clone(), k).is_some() {
                return Err(Error::Integrity(format!(
                    "duplicate instance id {}",
                    inst.instance_id
                )));
            }
        }
        Ok(Corpus {
            name: name.into(),
            sentences,
            graphs,
            instances,
            by_id,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sentences(&self) -> &BTreeMap<String, Vec<Token>> {
        &self.sentences
    }

    pub fn sentence(&self, id: &str) -> Option<&[Token]> {
        self.sentences.get(id).map(Vec::as_slice)
    }

    pub fn graphs(&self) -> &BTreeMap<String, DependencyGraph> {
        &self.graphs
    }

    pub fn graph(&self, sentence_id: &str) -> Option<&DependencyGraph> {
        self.graphs.get(sentence_id)
    }

    pub fn instances(&self) -> &[WsdInstance] {
        &self.instances
    }

    pub fn instance(&self, id: &str) -> Option<&WsdInstance> {
        self.by_id.get(id).map(|&k| &self.instances[k])
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Attaches parses to their sentences. Graphs for unknown sentences or with
    /// a different token count are rejected.
    pub fn attach_graphs(self, graphs: BTreeMap<String, DependencyGraph>) -> Result<Corpus> {
        let mut merged = self.graphs;
        merged.extend(graphs);
        Corpus::new(self.name, self.sentences, merged, self.instances)
    }

    /// Fills nMorph/dHypo/dSyno from a sidecar table. Instance-keyed entries
    /// win over lemma-keyed ones; fields the table lacks keep their value.
    pub fn with_metadata(self, table: &MetadataTable) -> Result<Corpus> {
        let instances = self
            .instances
            .into_iter()
            .map(|mut inst| {
                if let Some(fields) = table.lookup(&inst.instance_id, &inst.lemma, inst.pos) {
                    fields.apply(&mut inst.meta);
                }
                inst
            })
            .collect();
        Corpus::new(self.name, self.sentences, self.graphs, instances)
    }
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    fn one_sentence() -> BTreeMap<String, Vec<Token>> {
        BTreeMap::from([("s0".to_string(), tokens(&["a", "b", "c"]))])
    }

    #[test]
    fn rejects_gold_outside_candidates() {
        let inst = instance("i0", "s0", 1, &["x", "y"], &["z"]);
        let err = Corpus::new("c", one_sentence(), BTreeMap::new(), vec![inst]).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)), "{err}");
    }

    #[test]
    fn rejects_other_pos_target() {
        let mut inst = instance("i0", "s0", 1, &["x"], &["x"]);
        inst.pos = Pos::Other;
        assert!(Corpus::new("c", one_sentence(), BTreeMap::new(), vec![inst]).is_err());
    }

    #[test]
    fn rejects_zero_dsyno_and_verb_dhypo() {
        let mut inst = instance("i0", "s0", 1, &["x"], &["x"]);
        inst.meta.d_syno = Some(0);
        assert!(Corpus::new("c", one_sentence(), BTreeMap::new(), vec![inst.clone()]).is_err());
        inst.meta.d_syno = Some(2);
        inst.pos = Pos::Verb;
        inst.meta.d_hypo = Some(4);
        assert!(Corpus::new("c", one_sentence(), BTreeMap::new(), vec![inst]).is_err());
    }

    #[test]
    fn rejects_target_out_of_range_and_duplicates() {
        let inst = instance("i0", "s0", 3, &["x"], &["x"]);
        assert!(Corpus::new("c", one_sentence(), BTreeMap::new(), vec![inst]).is_err());
        let a = instance("i0", "s0", 0, &["x"], &["x"]);
        assert!(Corpus::new("c", one_sentence(), BTreeMap::new(), vec![a.clone(), a]).is_err());
    }

    #[test]
    fn graph_requires_one_edge_per_token() {
        let e = |h: Option<usize>, t| Edge {
            head: h.into(),
            tail: t,
            relation: "dep".into(),
        };
        assert!(DependencyGraph::new("s", vec![e(None, 0), e(Some(0), 1)]).is_ok());
        assert!(DependencyGraph::new("s", vec![e(None, 0), e(Some(0), 0)]).is_err());
        assert!(DependencyGraph::new("s", vec![e(None, 0), e(Some(5), 1)]).is_err());
    }

    #[test]
    fn graph_token_count_must_match_on_attach() {
        let corpus = Corpus::new("c", one_sentence(), BTreeMap::new(), vec![]).unwrap();
        let g = DependencyGraph::new(
            "s0",
            vec![Edge {
                head: Head::Root,
                tail: 0,
                relation: "root".into(),
            }],
        )
        .unwrap();
        let err = corpus.attach_graphs(BTreeMap::from([("s0".into(), g)])).unwrap_err();
        assert!(matches!(err, Error::Integrity(_)));
    }

    #[test]
    fn pos_parsing() {
        assert_eq!("noun".parse::<Pos>().unwrap(), Pos::Noun);
        assert_eq!(Pos::from_tag("DET"), Pos::Other);
        assert!("DET".parse::<Pos>().is_err());
    }
}
