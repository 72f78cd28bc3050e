//! Native corpus JSONL: one header line, then `sentence` and `instance` records.
//!
//! ```text
//! {"schema_version":"1","kind":"corpus","name":"senseval2"}
//! {"record":"sentence","id":"d000.s000","tokens":[{"surface":"The","lemma":"the","pos":"OTHER"}],"graph":[...]}
//! {"record":"instance","instance_id":"d000.s000.t000",...}
//! ```

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Corpus, DependencyGraph, Edge, Pos, Token, WsdInstance};
use crate::error::{Error, Result};
use crate::jsonl;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema_version: String,
    kind: String,
    name: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NativeToken {
    surface: String,
    lemma: String,
    pos: Pos,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "lowercase", deny_unknown_fields)]
enum Record {
    Sentence {
        id: String,
        tokens: Vec<NativeToken>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        graph: Option<Vec<Edge>>,
    },
    Instance(WsdInstance),
}

pub fn write_corpus(out: &mut impl Write, corpus: &Corpus) -> std::io::Result<()> {
    jsonl::write_line(
        out,
        &Header {
            schema_version: SCHEMA_VERSION.into(),
            kind: "corpus".into(),
            name: corpus.name().into(),
        },
    )?;
    for (id, tokens) in corpus.sentences() {
        let record = Record::Sentence {
            id: id.clone(),
            tokens: tokens
                .iter()
                .map(|t| NativeToken {
                    surface: t.surface.clone(),
                    lemma: t.lemma.clone(),
                    pos: t.pos,
                })
                .collect(),
            graph: corpus.graph(id).map(|g| g.edges().to_vec()),
        };
        jsonl::write_line(out, &record)?;
    }
    for inst in corpus.instances() {
        jsonl::write_line(out, &Record::Instance(inst.clone()))?;
    }
    Ok(())
}

pub fn export_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_corpus(&mut w, corpus)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn import_corpus(path: &Path) -> Result<Corpus> {
    read_corpus(jsonl::open(path)?, path)
}

pub fn read_corpus(reader: impl BufRead, label: &Path) -> Result<Corpus> {
    let mut lines = reader.lines().enumerate();
    let header = loop {
        match lines.next() {
            None => return Err(Error::parse(label, 1, "missing corpus header line")),
            Some((_, Err(e))) => return Err(Error::io(label, e)),
            Some((_, Ok(t))) if t.trim().is_empty() => continue,
            Some((k, Ok(t))) => {
                let h: Header = serde_json::from_str(&t)
                    .map_err(|e| Error::parse(label, k + 1, format!("bad header: {e}")))?;
                if h.schema_version != SCHEMA_VERSION || h.kind != "corpus" {
                    return Err(Error::parse(
                        label,
                        k + 1,
                        format!(
                            "expected corpus schema_version {SCHEMA_VERSION:?}, found kind {:?} version {:?}",
                            h.kind, h.schema_version
                        ),
                    ));
                }
                break h;
            }
        }
    };

    let mut sentences = BTreeMap::new();
    let mut graphs = BTreeMap::new();
    let mut instances = Vec::new();
    for (k, line) in lines {
        let line_no = k + 1;
        let line = line.map_err(|e| Error::io(label, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line)
            .map_err(|e| Error::parse(label, line_no, e.to_string()))?;
        match record {
            Record::Sentence { id, tokens, graph } => {
                let tokens: Vec<Token> = tokens
                    .into_iter()
                    .enumerate()
                    .map(|(index, t)| Token {
                        index,
                        surface: t.surface,
                        lemma: t.lemma,
                        pos: t.pos,
                    })
                    .collect();
                if let Some(edges) = graph {
                    let g = DependencyGraph::new(id.clone(), edges)
                        .map_err(|e| Error::parse(label, line_no, e.to_string()))?;
                    graphs.insert(id.clone(), g);
                }
                if sentences.insert(id.clone(), tokens).is_some() {
                    return Err(Error::parse(label, line_no, format!("duplicate sentence {id}")));
                }
            }
            Record::Instance(inst) => instances.push(inst),
        }
    }
    Corpus::new(header.name, sentences, graphs, instances)
}
