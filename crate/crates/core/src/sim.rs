//! Seeded synthetic WSD classifier.
//!
//! Produces a corpus (with random dependency trees and lexical metadata) and
//! Monte-Carlo style predictive samples whose spread is controlled by the
//! config. Every instance draws from its own ChaCha stream of the seed, so
//! output is identical whether instances are generated sequentially or in
//! parallel, and runs that share a seed share instance ids, true senses and
//! base logits.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::context::ContextParam;
use crate::corpus::{
    Corpus, DependencyGraph, Edge, Head, LexicalMeta, Pos, PredictiveSamples, ProbMatrix, Token,
    WsdInstance,
};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::scores::LOG_FLOOR;

/// The shipped configuration, as TOML.
pub const DEFAULT_CONFIG: &str = include_str!("../config/sim.toml");

const LEMMA_STREAM_BASE: u64 = 1 << 48;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_instances: usize,
    /// Inclusive range of candidate counts.
    pub m_range: [usize; 2],
    /// Sampled rows per instance (T).
    pub passes: usize,
    pub seed: u64,
    pub base_concentration: f64,
    #[serde(default = "default_boost")]
    pub true_class_boost: f64,
    pub noise_scale: f64,
    #[serde(default)]
    pub sparsity_bias: f64,
    #[serde(default)]
    pub sparsity_map: BTreeMap<ContextParam, f64>,
    #[serde(default = "default_lemma_pool")]
    pub lemma_pool: usize,
    #[serde(default = "default_sentence_len")]
    pub sentence_len: [usize; 2],
    #[serde(default)]
    pub multi_gold_rate: f64,
    #[serde(default = "one")]
    pub multi_gold_temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic_sharpen: Option<f64>,
}

fn default_boost() -> f64 {
    2.0
}

fn default_lemma_pool() -> usize {
    200
}

fn default_sentence_len() -> [usize; 2] {
    [5, 25]
}

fn one() -> f64 {
    1.0
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig::from_toml(DEFAULT_CONFIG).expect("shipped simulator config is valid")
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            toml::from_str(text).map_err(|e| Error::Schema(format!("simulator config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)
            .map_err(|e| Error::Schema(format!("simulator config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(format!("simulator config: {m}")));
        let [m_lo, m_hi] = self.m_range;
        let [w_lo, w_hi] = self.sentence_len;
        if self.n_instances == 0 {
            return bad("n_instances must be at least 1".into());
        }
        if m_lo == 0 || m_lo > m_hi {
            return bad(format!("m_range [{m_lo}, {m_hi}] must satisfy 1 <= lo <= hi"));
        }
        if self.passes == 0 {
            return bad("passes must be at least 1".into());
        }
        if !(self.base_concentration.is_finite() && self.base_concentration > 0.0) {
            return bad("base_concentration must be > 0".into());
        }
        for (name, v) in [
            ("noise_scale", self.noise_scale),
            ("true_class_boost", self.true_class_boost),
            ("sparsity_bias", self.sparsity_bias),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0"));
            }
        }
        if let Some((p, m)) = self.sparsity_map.iter().find(|(_, m)| !(m.is_finite() && **m >= 0.0)) {
            return bad(format!("sparsity multiplier for {p} must be finite and >= 0, got {m}"));
        }
        if self.lemma_pool == 0 {
            return bad("lemma_pool must be at least 1".into());
        }
        if w_lo == 0 || w_lo > w_hi {
            return bad(format!("sentence_len [{w_lo}, {w_hi}] must satisfy 1 <= lo <= hi"));
        }
        if !(0.0..=1.0).contains(&self.multi_gold_rate) {
            return bad("multi_gold_rate must lie in [0, 1]".into());
        }
        if !(self.multi_gold_temperature.is_finite() && self.multi_gold_temperature > 0.0) {
            return bad("multi_gold_temperature must be > 0".into());
        }
        if let Some(s) = self.deterministic_sharpen {
            if !(s.is_finite() && s > 0.0) {
                return bad("deterministic_sharpen must be > 0".into());
            }
        }
        Ok(())
    }
}

/// `exp(x - max x)`, normalised.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    if logits.is_empty() {
        return Err(Error::domain("softmax of an empty vector"));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("softmax input contains a non-finite logit"));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    Ok(exp.into_iter().map(|e| e / total).collect())
}

struct LemmaInfo {
    lemma: String,
    pos: Pos,
    senses: usize,
    n_morph: u32,
    d_hypo: Option<u32>,
    d_syno: Vec<u32>,
}

fn lemma_info(cfg: &SimConfig, k: usize) -> LemmaInfo {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(LEMMA_STREAM_BASE + k as u64);
    let pos = Pos::CONTENT[k % 4];
    let senses = rng.random_range(cfg.m_range[0]..=cfg.m_range[1]);
    let n_morph = rng.random_range(1..=4);
    let d_hypo = (pos == Pos::Noun).then(|| rng.random_range(2..=16));
    let d_syno = (0..senses).map(|_| rng.random_range(1..=12)).collect();
    LemmaInfo {
        lemma: format!("lemma{k:04}"),
        pos,
        senses,
        n_morph,
        d_hypo,
        d_syno,
    }
}

struct Generated {
    tokens: Vec<Token>,
    graph: Vec<Edge>,
    instance: WsdInstance,
    samples: PredictiveSamples,
}

fn instance_id(i: usize) -> String {
    format!("sim.{i:06}")
}

fn generate(cfg: &SimConfig, lemmas: &[LemmaInfo], i: usize, multiplier: f64) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(i as u64);
    let info = &lemmas[rng.random_range(0..lemmas.len())];
    let m = info.senses;
    let truth = rng.random_range(0..m);
    let gamma = Gamma::new(cfg.base_concentration, 1.0)
        .map_err(|e| Error::Validation(format!("simulator config: {e}")))?;
    let mut base: Vec<f64> = (0..m).map(|_| gamma.sample(&mut rng).max(LOG_FLOOR).ln()).collect();
    base[truth] += cfg.true_class_boost - cfg.sparsity_bias * (multiplier - 1.0);

    let multi = m >= 2 && rng.random::<f64>() < cfg.multi_gold_rate;
    let mut gold_idx = vec![truth];
    if multi {
        let other = (truth + rng.random_range(1..m)) % m;
        gold_idx.push(other);
    }
    let temperature = if multi { cfg.multi_gold_temperature } else { 1.0 };

    let len = rng.random_range(cfg.sentence_len[0]..=cfg.sentence_len[1]);
    let target = rng.random_range(0..len);
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(&mut rng);
    let mut heads = vec![Head::Root; len];
    for k in 1..len {
        heads[order[k]] = Head::Token(order[rng.random_range(0..k)]);
    }

    let scale = cfg.noise_scale * multiplier;
    let mut flat = Vec::with_capacity(cfg.passes * m);
    for _ in 0..cfg.passes {
        let logits: Vec<f64> = base
            .iter()
            .map(|b| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (b + scale * z) / temperature
            })
            .collect();
        flat.extend(softmax(&logits)?);
    }
    let matrix = ProbMatrix::from_flat(cfg.passes, m, flat)?;

    let id = instance_id(i);
    let candidates: Vec<String> = (0..m).map(|s| format!("{}%{s}", info.lemma)).collect();
    let gold: Vec<String> = gold_idx.iter().map(|&g| candidates[g].clone()).collect();
    let tokens = (0..len)
        .map(|k| {
            if k == target {
                Token { index: k, surface: info.lemma.clone(), lemma: info.lemma.clone(), pos: info.pos }
            } else {
                Token { index: k, surface: format!("w{k}"), lemma: format!("w{k}"), pos: Pos::Other }
            }
        })
        .collect();
    let graph = heads
        .iter()
        .enumerate()
        .map(|(tail, &head)| Edge { head, tail, relation: "dep".into() })
        .collect();
    let instance = WsdInstance {
        instance_id: id.clone(),
        sentence_id: id.clone(),
        target_index: target,
        lemma: info.lemma.clone(),
        pos: info.pos,
        candidates: candidates.clone(),
        gold,
        meta: LexicalMeta {
            n_morph: Some(info.n_morph),
            n_pd: m as u32,
            n_gt: gold_idx.len() as u32,
            d_hypo: info.d_hypo,
            d_syno: Some(info.d_syno[truth]),
        },
    };
    let mut samples = PredictiveSamples::new(id, matrix)
        .with_provenance(format!("wsd-ue simulator seed={} multiplier={multiplier}", cfg.seed));
    samples.candidates = Some(candidates);
    if let Some(sharpen) = cfg.deterministic_sharpen {
        let logits: Vec<f64> = base.iter().map(|b| sharpen * b / temperature).collect();
        samples = samples.with_deterministic(softmax(&logits)?)?;
    }
    Ok(Generated { tokens, graph, instance, samples })
}

fn run(cfg: &SimConfig, multiplier: f64, exec: Exec) -> Result<(Corpus, Vec<PredictiveSamples>)> {
    cfg.validate()?;
    let lemmas: Vec<LemmaInfo> = (0..cfg.lemma_pool).map(|k| lemma_info(cfg, k)).collect();
    let generated = exec.map_range(cfg.n_instances, |i| generate(cfg, &lemmas, i, multiplier));
    let mut sentences = BTreeMap::new();
    let mut graphs = BTreeMap::new();
    let mut instances = Vec::with_capacity(cfg.n_instances);
    let mut samples = Vec::with_capacity(cfg.n_instances);
    for g in generated {
        let g = g?;
        let sid = g.instance.sentence_id.clone();
        graphs.insert(sid.clone(), DependencyGraph::new(sid.clone(), g.graph)?);
        sentences.insert(sid, g.tokens);
        instances.push(g.instance);
        samples.push(g.samples);
    }
    Ok((Corpus::new("sim", sentences, graphs, instances)?, samples))
}

/// One corpus and its samples, without any context multiplier.
pub fn simulate_samples(cfg: &SimConfig) -> Result<(Corpus, Vec<PredictiveSamples>)> {
    simulate_samples_with(cfg, Exec::default())
}

pub fn simulate_samples_with(cfg: &SimConfig, exec: Exec) -> Result<(Corpus, Vec<PredictiveSamples>)> {
    run(cfg, 1.0, exec)
}

pub type ContextSeries = BTreeMap<ContextParam, (Corpus, Vec<PredictiveSamples>)>;

/// One run per context size, each using that size's sparsity multiplier.
/// A multiplier that grows with context size is logged as a warning.
pub fn simulate_context_series(cfg: &SimConfig, params: &[ContextParam]) -> Result<ContextSeries> {
    simulate_context_series_with(cfg, params, Exec::default())
}

pub fn simulate_context_series_with(
    cfg: &SimConfig,
    params: &[ContextParam],
    exec: Exec,
) -> Result<ContextSeries> {
    let mut sorted = params.to_vec();
    sorted.sort();
    sorted.dedup();
    let multipliers = sorted
        .iter()
        .map(|p| {
            cfg.sparsity_map.get(p).copied().ok_or_else(|| {
                Error::domain(format!("sparsity_map has no multiplier for context size {p}"))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    for (w, ps) in multipliers.windows(2).zip(sorted.windows(2)) {
        if w[1] > w[0] {
            log::warn!(
                "noise multiplier rises from {} ({}) to {} ({}); larger contexts usually reduce noise",
                w[0], ps[0], w[1], ps[1]
            );
        }
    }
    sorted
        .into_iter()
        .zip(multipliers)
        .map(|(p, m)| Ok((p, run(cfg, m, exec)?)))
        .collect()
}
