//! Sidecar files that supplement the evaluation XML: the candidate-sense
//! inventory and per-instance or per-lemma lexical metadata. Both are JSONL.

use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{validate_meta_fields, LexicalMeta, Pos};
use crate::error::{Error, Result};
use crate::jsonl;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InventoryLine {
    #[serde(default)]
    schema_version: Option<String>,
    lemma: String,
    pos: Pos,
    senses: Vec<String>,
}

/// Ordered candidate senses per (lemma, POS).
#[derive(Debug, Clone, Default)]
pub struct Inventory {
    entries: HashMap<(String, Pos), Vec<String>>,
}

impl Inventory {
    pub fn load(path: &Path) -> Result<Self> {
        Self::read(jsonl::open(path)?, path)
    }

    pub fn read(reader: impl BufRead, label: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        for item in jsonl::lines::<InventoryLine>(reader, label) {
            let (line_no, line) = item?;
            jsonl::check_version(line.schema_version.as_deref(), label, line_no)?;
            if line.senses.is_empty() {
                return Err(Error::parse(label, line_no, "inventory entry with no senses"));
            }
            if entries
                .insert((line.lemma.clone(), line.pos), line.senses)
                .is_some()
            {
                return Err(Error::parse(
                    label,
                    line_no,
                    format!("duplicate inventory entry for {}/{}", line.lemma, line.pos),
                ));
            }
        }
        Ok(Inventory { entries })
    }

    pub fn insert(&mut self, lemma: impl Into<String>, pos: Pos, senses: Vec<String>) {
        self.entries.insert((lemma.into(), pos), senses);
    }

    pub fn senses(&self, lemma: &str, pos: Pos) -> Option<&[String]> {
        self.entries.get(&(lemma.to_string(), pos)).map(Vec::as_slice)
    }
}

/// Metadata values that are not derivable from the corpus itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaFields {
    #[serde(rename = "nMorph", default, skip_serializing_if = "Option::is_none")]
    pub n_morph: Option<u32>,
    #[serde(rename = "dHypo", default, skip_serializing_if = "Option::is_none")]
    pub d_hypo: Option<u32>,
    #[serde(rename = "dSyno", default, skip_serializing_if = "Option::is_none")]
    pub d_syno: Option<u32>,
}

impl MetaFields {
    pub fn apply(&self, meta: &mut LexicalMeta) {
        if self.n_morph.is_some() {
            meta.n_morph = self.n_morph;
        }
        if self.d_hypo.is_some() {
            meta.d_hypo = self.d_hypo;
        }
        if self.d_syno.is_some() {
            meta.d_syno = self.d_syno;
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaLine {
    #[serde(default)]
    schema_version: Option<String>,
    #[serde(default)]
    instance_id: Option<String>,
    #[serde(default)]
    lemma: Option<String>,
    #[serde(default)]
    pos: Option<Pos>,
    #[serde(rename = "nMorph", default)]
    n_morph: Option<u32>,
    #[serde(rename = "dHypo", default)]
    d_hypo: Option<u32>,
    #[serde(rename = "dSyno", default)]
    d_syno: Option<u32>,
}

/// Lexical metadata keyed by instance id or by (lemma, POS).
#[derive(Debug, Clone, Default)]
pub struct MetadataTable {
    by_instance: HashMap<String, MetaFields>,
    by_lemma: HashMap<(String, Pos), MetaFields>,
}

impl MetadataTable {
    pub fn load(path: &Path) -> Result<Self> {
        Self::read(jsonl::open(path)?, path)
    }

    pub fn read(reader: impl BufRead, label: &Path) -> Result<Self> {
        let mut table = MetadataTable::default();
        for item in jsonl::lines::<MetaLine>(reader, label) {
            let (line_no, line) = item?;
            jsonl::check_version(line.schema_version.as_deref(), label, line_no)?;
            let f = MetaFields {
                n_morph: line.n_morph,
                d_hypo: line.d_hypo,
                d_syno: line.d_syno,
            };
            match (line.instance_id, line.lemma, line.pos) {
                (Some(id), None, pos) => {
                    if let Some(pos) = pos {
                        validate_meta_fields(&id, pos, f.n_morph, f.d_hypo, f.d_syno)
                            .map_err(|e| Error::parse(label, line_no, e.to_string()))?;
                    }
                    table.by_instance.insert(id, f);
                }
                (None, Some(lemma), Some(pos)) => {
                    validate_meta_fields(&lemma, pos, f.n_morph, f.d_hypo, f.d_syno)
                        .map_err(|e| Error::parse(label, line_no, e.to_string()))?;
                    table.by_lemma.insert((lemma, pos), f);
                }
                _ => {
                    return Err(Error::parse(
                        label,
                        line_no,
                        "metadata line needs either instance_id or lemma+pos",
                    ))
                }
            }
        }
        Ok(table)
    }

    pub fn insert_instance(&mut self, id: impl Into<String>, fields: MetaFields) {
        self.by_instance.insert(id.into(), fields);
    }

    pub fn insert_lemma(&mut self, lemma: impl Into<String>, pos: Pos, fields: MetaFields) {
        self.by_lemma.insert((lemma.into(), pos), fields);
    }

    pub fn lookup(&self, instance_id: &str, lemma: &str, pos: Pos) -> Option<MetaFields> {
        let by_lemma = self.by_lemma.get(&(lemma.to_string(), pos)).copied();
        match (self.by_instance.get(instance_id).copied(), by_lemma) {
            (Some(mut inst), Some(lem)) => {
                inst.n_morph = inst.n_morph.or(lem.n_morph);
                inst.d_hypo = inst.d_hypo.or(lem.d_hypo);
                inst.d_syno = inst.d_syno.or(lem.d_syno);
                Some(inst)
            }
            (a, b) => a.or(b),
        }
    }
}
