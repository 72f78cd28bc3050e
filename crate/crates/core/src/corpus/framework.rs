//! Importer for the all-words evaluation XML (`corpus/text/sentence` with `wf`
//! and `instance` children) and its space-separated gold-key file.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use roxmltree::{Document, Node};

use super::{Corpus, Inventory, LexicalMeta, MetadataTable, Pos, Token, WsdInstance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct ImportOptions {
    /// Dataset label; defaults to the XML file stem.
    pub name: Option<String>,
    pub inventory: Option<Inventory>,
    pub metadata: Option<MetadataTable>,
}

pub fn import_framework_xml(
    xml_path: &Path,
    goldkey_path: &Path,
    options: &ImportOptions,
) -> Result<Corpus> {
    let xml = fs::read_to_string(xml_path).map_err(|e| Error::io(xml_path, e))?;
    let gold = fs::read_to_string(goldkey_path).map_err(|e| Error::io(goldkey_path, e))?;
    let mut options = options.clone();
    if options.name.is_none() {
        options.name = xml_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned());
    }
    parse_framework(&xml, xml_path, &gold, goldkey_path, &options)
}

struct PendingInstance {
    id: String,
    sentence_id: String,
    target_index: usize,
    lemma: String,
    pos: Pos,
    line: usize,
}

pub fn parse_framework(
    xml: &str,
    xml_label: &Path,
    gold: &str,
    gold_label: &Path,
    options: &ImportOptions,
) -> Result<Corpus> {
    let doc = Document::parse(xml)
        .map_err(|e| Error::parse(xml_label, e.pos().row as usize, e.to_string()))?;
    let line_of = |n: Node| doc.text_pos_at(n.range().start).row as usize;
    let attr = |n: Node, name: &str| -> Result<String> {
        n.attribute(name).map(str::to_string).ok_or_else(|| {
            Error::parse(
                xml_label,
                line_of(n),
                format!("<{}> lacks attribute `{name}`", n.tag_name().name()),
            )
        })
    };

    let mut sentences = BTreeMap::new();
    let mut pending = Vec::new();
    for sentence in doc.descendants().filter(|n| n.has_tag_name("sentence")) {
        let sid = attr(sentence, "id")?;
        let mut tokens = Vec::new();
        for node in sentence.children().filter(Node::is_element) {
            let tag = node.tag_name().name();
            if tag != "wf" && tag != "instance" {
                return Err(Error::parse(
                    xml_label,
                    line_of(node),
                    format!("unexpected <{tag}> inside sentence {sid}"),
                ));
            }
            let surface = node.text().unwrap_or("").trim().to_string();
            let lemma = node
                .attribute("lemma")
                .map_or_else(|| surface.to_lowercase(), str::to_string);
            let pos_tag = attr(node, "pos")?;
            let index = tokens.len();
            if tag == "instance" {
                let pos: Pos = pos_tag.parse().ok().filter(|p: &Pos| p.is_content()).ok_or_else(|| {
                    Error::parse(
                        xml_label,
                        line_of(node),
                        format!("target POS `{pos_tag}` is not one of NOUN, VERB, ADJ, ADV"),
                    )
                })?;
                pending.push(PendingInstance {
                    id: attr(node, "id")?,
                    sentence_id: sid.clone(),
                    target_index: index,
                    lemma: lemma.clone(),
                    pos,
                    line: line_of(node),
                });
            }
            tokens.push(Token {
                index,
                surface,
                lemma,
                pos: Pos::from_tag(&pos_tag),
            });
        }
        let line = line_of(sentence);
        if sentences.insert(sid.clone(), tokens).is_some() {
            return Err(Error::parse(xml_label, line, format!("duplicate sentence id {sid}")));
        }
    }

    let keys = parse_gold_keys(gold, gold_label)?;
    let known: HashSet<&str> = pending.iter().map(|p| p.id.as_str()).collect();
    if let Some((id, line)) = keys
        .iter()
        .filter(|(id, _)| !known.contains(id.as_str()))
        .map(|(id, (_, line))| (id, line))
        .min_by_key(|(_, line)| **line)
    {
        return Err(Error::Integrity(format!(
            "{}:{line}: gold key for unknown instance {id}",
            gold_label.display()
        )));
    }

    let mut instances = Vec::with_capacity(pending.len());
    for p in pending {
        let Some((gold, _)) = keys.get(&p.id) else {
            return Err(Error::Integrity(format!(
                "{}:{}: instance {} has no gold key",
                xml_label.display(),
                p.line,
                p.id
            )));
        };
        let mut candidates: Vec<String> = options
            .inventory
            .as_ref()
            .and_then(|inv| inv.senses(&p.lemma, p.pos))
            .map(<[String]>::to_vec)
            .unwrap_or_default();
        for g in gold {
            if !candidates.contains(g) {
                candidates.push(g.clone());
            }
        }
        let mut meta = LexicalMeta {
            n_pd: candidates.len() as u32,
            n_gt: gold.len() as u32,
            ..Default::default()
        };
        if let Some(fields) = options
            .metadata
            .as_ref()
            .and_then(|t| t.lookup(&p.id, &p.lemma, p.pos))
        {
            fields.apply(&mut meta);
        }
        instances.push(WsdInstance {
            instance_id: p.id,
            sentence_id: p.sentence_id,
            target_index: p.target_index,
            lemma: p.lemma,
            pos: p.pos,
            candidates,
            gold: gold.clone(),
            meta,
        });
    }

    let name = options.name.clone().unwrap_or_else(|| "corpus".into());
    Corpus::new(name, sentences, BTreeMap::new(), instances)
}

/// `instance_id key1 [key2 ...]` per line; returns keys with their line number.
fn parse_gold_keys(text: &str, label: &Path) -> Result<HashMap<String, (Vec<String>, usize)>> {
    let mut keys = HashMap::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let mut fields = line.split_whitespace();
        let Some(id) = fields.next() else { continue };
        let mut senses: Vec<String> = Vec::new();
        for f in fields {
            if !senses.iter().any(|s| s == f) {
                senses.push(f.to_string());
            }
        }
        if senses.is_empty() {
            return Err(Error::Integrity(format!(
                "{}:{line_no}: empty gold line for instance {id}",
                label.display()
            )));
        }
        if keys.insert(id.to_string(), (senses, line_no)).is_some() {
            return Err(Error::Integrity(format!(
                "{}:{line_no}: duplicate gold line for instance {id}",
                label.display()
            )));
        }
    }
    Ok(keys)
}

#[cfg(test)]
mod tests {
    use super::*;

    const XML: &str = r#"<?xml version="1.0" encoding="UTF-8" ?>
<corpus lang="en" source="test">
<text id="d000">
<sentence id="d000.s000">
<wf lemma="the" pos="DET">The</wf>
<instance id="d000.s000.t000" lemma="bank" pos="NOUN">bank</instance>
<wf lemma="be" pos="VERB">is</wf>
<wf lemma="close" pos="ADJ">closed</wf>
</sentence>
</text>
</corpus>
"#;

    fn parse(gold: &str, options: &ImportOptions) -> Result<Corpus> {
        parse_framework(XML, Path::new("t.xml"), gold, Path::new("t.gold.key.txt"), options)
    }

    #[test]
    fn minimal_single_instance() {
        let c = parse("d000.s000.t000 key_a\n", &ImportOptions::default()).unwrap();
        assert_eq!(c.len(), 1);
        let inst = &c.instances()[0];
        assert_eq!(inst.meta.n_gt, 1);
        assert_eq!(inst.target_index, 1);
        assert_eq!(inst.candidates, vec!["key_a".to_string()]);
        assert_eq!(c.sentence("d000.s000").unwrap().len(), 4);
        assert_eq!(c.sentence("d000.s000").unwrap()[0].pos, Pos::Other);
    }

    #[test]
    fn multi_gold_line() {
        let c = parse("d000.s000.t000 key_a key_b\n", &ImportOptions::default()).unwrap();
        assert_eq!(c.instances()[0].meta.n_gt, 2);
        assert_eq!(c.instances()[0].gold, vec!["key_a", "key_b"]);
    }

    #[test]
    fn unknown_instance_in_gold_is_integrity_error() {
        let err = parse("d000.s000.t000 key_a\nd999.s000.t000 key_b\n", &ImportOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Integrity(ref m) if m.contains(":2:")), "{err}");
    }

    #[test]
    fn empty_gold_line_and_missing_gold() {
        assert!(matches!(
            parse("d000.s000.t000\n", &ImportOptions::default()).unwrap_err(),
            Error::Integrity(_)
        ));
        assert!(matches!(
            parse("", &ImportOptions::default()).unwrap_err(),
            Error::Integrity(_)
        ));
    }

    #[test]
    fn inventory_order_is_kept_and_gold_appended() {
        let mut inv = Inventory::default();
        inv.insert("bank", Pos::Noun, vec!["s1".into(), "s2".into(), "key_a".into()]);
        let opts = ImportOptions {
            inventory: Some(inv),
            ..Default::default()
        };
        let c = parse("d000.s000.t000 key_a key_z\n", &opts).unwrap();
        assert_eq!(c.instances()[0].candidates, vec!["s1", "s2", "key_a", "key_z"]);
        assert_eq!(c.instances()[0].meta.n_pd, 4);
    }

    #[test]
    fn malformed_xml_has_line_number() {
        let bad = "<corpus>\n<text id=\"d\">\n<sentence id=\"s\">\n<wf pos=\"X\">a</sentence>\n</text></corpus>";
        let err = parse_framework(bad, Path::new("b.xml"), "", Path::new("g"), &ImportOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn non_content_target_is_rejected() {
        let xml = XML.replace(r#"lemma="bank" pos="NOUN""#, r#"lemma="bank" pos="DET""#);
        let err = parse_framework(&xml, Path::new("t.xml"), "d000.s000.t000 k\n", Path::new("g"), &ImportOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
    }
}
