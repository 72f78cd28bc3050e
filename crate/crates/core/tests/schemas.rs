//! The published JSON Schemas accept what the writers emit and reject what the readers reject.

use std::path::{Path, PathBuf};

use serde_json::Value;
use wsd_ue::corpus::{
    import_conllu, import_framework_xml, read_corpus, read_samples, write_corpus, write_samples, ImportOptions,
    Inventory, MetadataTable,
};
use wsd_ue::scores::{score_corpus, write_records_jsonl, ScoreName, ScoreOptions};
use wsd_ue::sim::{simulate_samples, SimConfig};

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(format!("{name}.schema.json"));
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&value).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn assert_lines_valid(validator: &jsonschema::Validator, text: &str) {
    for (k, line) in text.lines().enumerate() {
        let v: Value = serde_json::from_str(line).unwrap();
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "line {}: {errors:?}\n{line}", k + 1);
    }
}

fn sharpened_sim() -> (wsd_ue::corpus::Corpus, Vec<wsd_ue::corpus::PredictiveSamples>) {
    simulate_samples(&SimConfig { n_instances: 40, deterministic_sharpen: Some(2.0), ..SimConfig::default() }).unwrap()
}

#[test]
fn writer_output_matches_the_schemas() {
    let opts = ImportOptions {
        name: None,
        inventory: Some(Inventory::load(&fixture("mini.inventory.jsonl")).unwrap()),
        metadata: Some(MetadataTable::load(&fixture("mini.meta.jsonl")).unwrap()),
    };
    let mini = import_framework_xml(&fixture("mini.data.xml"), &fixture("mini.gold.key.txt"), &opts)
        .unwrap()
        .attach_graphs(import_conllu(&fixture("mini.conllu")).unwrap())
        .unwrap();
    let (sim, samples) = sharpened_sim();
    let corpus_schema = schema("corpus");
    for c in [&mini, &sim] {
        let mut buf = Vec::new();
        write_corpus(&mut buf, c).unwrap();
        assert_lines_valid(&corpus_schema, std::str::from_utf8(&buf).unwrap());
    }
    let mut buf = Vec::new();
    write_samples(&mut buf, &samples).unwrap();
    assert_lines_valid(&schema("samples"), std::str::from_utf8(&buf).unwrap());

    let recs = score_corpus(&sim, &samples, ScoreName::Pv, &ScoreOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_records_jsonl(&mut buf, &recs).unwrap();
    assert_lines_valid(&schema("records"), std::str::from_utf8(&buf).unwrap());
}

#[test]
fn fixtures_match_the_schemas() {
    for (file, name) in [
        ("mini.samples.jsonl", "samples"),
        ("mini.meta.jsonl", "metadata"),
        ("mini.inventory.jsonl", "inventory"),
    ] {
        assert_lines_valid(&schema(name), &std::fs::read_to_string(fixture(file)).unwrap());
    }
}

#[test]
fn schema_and_reader_agree_on_broken_lines() {
    let (sim, samples) = sharpened_sim();
    let mut buf = Vec::new();
    write_corpus(&mut buf, &sim).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let corpus_schema = schema("corpus");
    let instance_line = text.lines().find(|l| l.contains("\"record\":\"instance\"")).unwrap();
    let mut broken: Value = serde_json::from_str(instance_line).unwrap();
    broken.as_object_mut().unwrap().remove("gold");
    assert!(!corpus_schema.is_valid(&broken));
    let patched = text.replace(instance_line, &broken.to_string());
    assert!(read_corpus(patched.as_bytes(), Path::new("c.jsonl")).is_err());

    let mut extra: Value = serde_json::from_str(instance_line).unwrap();
    extra["confidence"] = Value::from(0.5);
    assert!(!corpus_schema.is_valid(&extra));
    let patched = text.replace(instance_line, &extra.to_string());
    assert!(read_corpus(patched.as_bytes(), Path::new("c.jsonl")).is_err());

    let mut buf = Vec::new();
    write_samples(&mut buf, &samples[..1]).unwrap();
    let mut line: Value = serde_json::from_slice(&buf).unwrap();
    line["matrix"][0][0] = Value::from(1.5);
    assert!(!schema("samples").is_valid(&line));
    assert!(read_samples(line.to_string().as_bytes(), Path::new("s.jsonl")).is_err());
}
