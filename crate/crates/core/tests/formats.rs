//! Importers, native round trips and scoring on the mini fixture.

use std::path::{Path, PathBuf};

use wsd_ue::context::{derive_controlled_corpus, ContextMode, ContextParam, Reduction};
use wsd_ue::corpus::{
    export_corpus, import_conllu, import_corpus, import_framework_xml, load_samples,
    read_corpus, read_samples, validate_alignment, write_corpus, write_samples, ImportOptions,
    Inventory, MetadataTable, Pos,
};
use wsd_ue::metrics::f1;
use wsd_ue::scores::{
    read_records_csv, read_records_jsonl, score_corpus, write_records_csv, write_records_jsonl,
    ScoreName, ScoreOptions,
};
use wsd_ue::sim::{simulate_samples, SimConfig};
use wsd_ue::{Error, Exec};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn mini() -> wsd_ue::corpus::Corpus {
    let opts = ImportOptions {
        name: None,
        inventory: Some(Inventory::load(&fixture("mini.inventory.jsonl")).unwrap()),
        metadata: Some(MetadataTable::load(&fixture("mini.meta.jsonl")).unwrap()),
    };
    import_framework_xml(&fixture("mini.data.xml"), &fixture("mini.gold.key.txt"), &opts)
        .unwrap()
        .attach_graphs(import_conllu(&fixture("mini.conllu")).unwrap())
        .unwrap()
}

#[test]
fn framework_import_fills_inventory_and_metadata() {
    let c = mini();
    assert_eq!(c.name(), "mini.data");
    assert_eq!(c.len(), 4);
    let bank = c.instance("d000.s000.t000").unwrap();
    assert_eq!(bank.candidates.len(), 3);
    assert_eq!((bank.meta.n_pd, bank.meta.n_gt, bank.meta.d_hypo), (3, 1, Some(8)));
    let close = c.instance("d000.s000.t001").unwrap();
    assert_eq!(close.meta.d_syno, Some(4));
    assert_eq!(close.meta.n_morph, Some(1));
    let run = c.instance("d000.s001.t000").unwrap();
    assert_eq!((run.pos, run.meta.n_gt, run.meta.n_pd), (Pos::Verb, 2, 4));
    assert_eq!(c.graphs().len(), 2);
}

#[test]
fn native_corpus_round_trip() {
    let c = mini();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mini.corpus.jsonl");
    export_corpus(&path, &c).unwrap();
    assert_eq!(import_corpus(&path).unwrap(), c);

    let (sim, _) = simulate_samples(&SimConfig { n_instances: 25, ..SimConfig::default() }).unwrap();
    let mut buf = Vec::new();
    write_corpus(&mut buf, &sim).unwrap();
    assert_eq!(read_corpus(buf.as_slice(), Path::new("sim")).unwrap(), sim);
}

#[test]
fn samples_round_trip_and_align() {
    let c = mini();
    let samples = load_samples(&fixture("mini.samples.jsonl")).unwrap();
    assert!(validate_alignment(&c, &samples).is_clean());
    let mut buf = Vec::new();
    write_samples(&mut buf, &samples).unwrap();
    assert_eq!(read_samples(buf.as_slice(), Path::new("s")).unwrap(), samples);
}

#[test]
fn mini_scores_by_hand() {
    let c = mini();
    let samples = load_samples(&fixture("mini.samples.jsonl")).unwrap();
    let opts = ScoreOptions::default();
    let smp = score_corpus(&c, &samples, ScoreName::Smp, &opts).unwrap();
    let values: Vec<f64> = smp.iter().map(|r| r.value).collect();
    let expected = [0.3, 0.4, 0.55, 0.5];
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() < 1e-12, "{values:?}");
    }
    // close is wrong; run's second gold sense counts; quickly's tie goes to the first candidate
    let losses: Vec<f64> = smp.iter().map(|r| r.loss).collect();
    assert_eq!(losses, vec![0.0, 1.0, 0.0, 0.0]);
    assert_eq!(smp[3].predicted, "quickly%4:02:00::");
    assert_eq!(f1(&smp).unwrap(), 75.0);
    let mp = score_corpus(&c, &samples, ScoreName::Mp, &opts).unwrap();
    assert!((mp[0].value - 0.1).abs() < 1e-12);
}

#[test]
fn record_files_round_trip() {
    let c = mini();
    let samples = load_samples(&fixture("mini.samples.jsonl")).unwrap();
    let recs = score_corpus(&c, &samples, ScoreName::Bald, &ScoreOptions::default()).unwrap();
    let mut csv = Vec::new();
    write_records_csv(&mut csv, &recs).unwrap();
    assert_eq!(read_records_csv(csv.as_slice(), Path::new("r.csv")).unwrap(), recs);
    let mut jsonl = Vec::new();
    write_records_jsonl(&mut jsonl, &recs).unwrap();
    assert_eq!(read_records_jsonl(jsonl.as_slice(), Path::new("r.jsonl")).unwrap(), recs);
}

#[test]
fn dependency_context_on_fixture() {
    let c = mini();
    let d1 = derive_controlled_corpus(&c, ContextMode::Dp, ContextParam::Size(1), Reduction::Truncate, Exec::Sequential).unwrap();
    let words = |d: &wsd_ue::corpus::Corpus, id: &str| -> Vec<String> {
        let inst = d.instance(id).unwrap();
        d.sentence(&inst.sentence_id).unwrap().iter().map(|t| t.surface.clone()).collect()
    };
    assert_eq!(words(&d1, "d000.s000.t000@dp-1"), vec!["The", "bank", "closed"]);
    let d2 = derive_controlled_corpus(&c, ContextMode::Dp, ContextParam::Size(2), Reduction::Truncate, Exec::Sequential).unwrap();
    assert_eq!(words(&d2, "d000.s000.t000@dp-2"), vec!["The", "bank", "is", "closed", "."]);

    // the derived corpus survives the native format
    let mut buf = Vec::new();
    write_corpus(&mut buf, &d1).unwrap();
    assert_eq!(read_corpus(buf.as_slice(), Path::new("d")).unwrap(), d1);
}

#[test]
fn missing_files_are_io_errors() {
    let err = import_corpus(Path::new("/nonexistent/x.jsonl")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.is_input_error());
}
