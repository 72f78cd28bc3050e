//! CoNLL-U ingestion. Only ID, HEAD and DEPREL are used; multiword-token
//! ranges (`3-4`) and empty nodes (`5.1`) are skipped.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use super::{DependencyGraph, Edge, Head};
use crate::error::{Error, Result};
use crate::jsonl;

pub fn import_conllu(path: &Path) -> Result<BTreeMap<String, DependencyGraph>> {
    parse_conllu(jsonl::open(path)?, path)
}

/// Sentences without a `# sent_id = ...` comment are keyed by their 0-based
/// ordinal in the file.
pub fn parse_conllu(
    reader: impl BufRead,
    label: &Path,
) -> Result<BTreeMap<String, DependencyGraph>> {
    let mut graphs = BTreeMap::new();
    let mut block = Block::default();
    let mut ordinal = 0usize;
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| Error::io(label, e))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !block.is_empty() {
                block.finish(ordinal, label, &mut graphs)?;
                ordinal += 1;
            }
            block = Block::default();
            continue;
        }
        if block.start_line == 0 {
            block.start_line = line_no;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    block.sent_id = Some(value.trim().to_string());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::parse(
                label,
                line_no,
                format!("expected 10 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if id.contains('-') || id.contains('.') {
            continue;
        }
        let id: usize = id
            .parse()
            .map_err(|_| Error::parse(label, line_no, format!("non-integer ID `{id}`")))?;
        if id != block.edges.len() + 1 {
            return Err(Error::parse(
                label,
                line_no,
                format!("token ID {id} out of sequence (expected {})", block.edges.len() + 1),
            ));
        }
        let head: usize = cols[6].parse().map_err(|_| {
            Error::parse(label, line_no, format!("non-integer HEAD `{}`", cols[6]))
        })?;
        block.edges.push(Edge {
            head: if head == 0 {
                Head::Root
            } else {
                Head::Token(head - 1)
            },
            tail: id - 1,
            relation: cols[7].to_string(),
        });
        block.head_lines.push(line_no);
    }
    if !block.is_empty() {
        block.finish(ordinal, label, &mut graphs)?;
    }
    Ok(graphs)
}

#[derive(Default)]
struct Block {
    sent_id: Option<String>,
    edges: Vec<Edge>,
    head_lines: Vec<usize>,
    start_line: usize,
}

impl Block {
    fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn finish(
        self,
        ordinal: usize,
        label: &Path,
        graphs: &mut BTreeMap<String, DependencyGraph>,
    ) -> Result<()> {
        let n = self.edges.len();
        for (k, e) in self.edges.iter().enumerate() {
            if let Head::Token(h) = e.head {
                if h >= n {
                    return Err(Error::parse(
                        label,
                        self.head_lines[k],
                        format!("HEAD {} outside sentence of {n} tokens", h + 1),
                    ));
                }
            }
        }
        let id = self.sent_id.unwrap_or_else(|| ordinal.to_string());
        let graph = DependencyGraph::new(id.clone(), self.edges).map_err(|e| {
            Error::parse(label, self.start_line, e.to_string())
        })?;
        if graphs.insert(id.clone(), graph).is_some() {
            return Err(Error::parse(
                label,
                self.start_line,
                format!("duplicate sent_id {id}"),
            ));
        }
        Ok(())
    }
}
