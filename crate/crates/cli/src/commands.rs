use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use wsd_ue::context::{derive_controlled_corpus, parse_params, ue_curve, write_curve_csv, ContextParam, Reduction};
use wsd_ue::corpus::{
    import_conllu, import_corpus, import_framework_xml, load_samples, write_corpus, write_samples, Corpus,
    ImportOptions, Inventory, MetadataTable,
};
use wsd_ue::effects::{
    ols_regression, regression_design, run_effect, write_tables_csv, EffectConfig, EffectOptions, EffectTable,
    LemmaKey, TTestKind,
};
use wsd_ue::metrics::{compare_cohorts, f1, rcc, render_table, MetricsRow};
use wsd_ue::scores::{
    mean_value, read_records_csv, read_records_jsonl, score_corpus, write_records_csv, LossMode, MpSource,
    ScoreName, ScoreOptions, UeRecord,
};
use wsd_ue::sim::{simulate_context_series_with, simulate_samples_with, SimConfig};
use wsd_ue::Exec;

use crate::run::Run;
use crate::{
    CompareArgs, ContextArgs, CurveArgs, EffectsArgs, ImportArgs, InputError, LossArg, MetricsArgs, ScoreArgs,
    SimulateArgs,
};

pub struct Ctx {
    pub exec: Exec,
    pub config_dir: Option<PathBuf>,
}

impl Ctx {
    /// `name` inside the config directory, if that file exists.
    fn config_file(&self, name: &str) -> Option<PathBuf> {
        self.config_dir.as_ref().map(|d| d.join(name)).filter(|p| p.is_file())
    }
}

pub fn parse_mp_source(s: &str) -> Result<MpSource, String> {
    match s {
        "auto" => Ok(MpSource::Auto),
        "deterministic" => Ok(MpSource::Deterministic),
        _ => s
            .strip_prefix("row:")
            .and_then(|n| n.parse().ok())
            .map(MpSource::Row)
            .ok_or_else(|| format!("expected auto, deterministic or row:N, got `{s}`")),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| InputError(format!("{}: {e}", path.display())).into())
}

pub fn read_records(path: &Path) -> Result<Vec<UeRecord>> {
    let file = open(path)?;
    let records = if path.extension().is_some_and(|e| e == "jsonl") {
        read_records_jsonl(BufReader::new(file), path)?
    } else {
        read_records_csv(file, path)?
    };
    Ok(records)
}

fn json(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn corpus_bytes(corpus: &Corpus) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_corpus(&mut buf, corpus)?;
    Ok(buf)
}

pub fn import(_ctx: &Ctx, a: ImportArgs) -> Result<()> {
    let mut run = Run::new("import", &a.out)?;
    for p in [&a.xml, &a.gold, &a.corpus, &a.inventory, &a.metadata, &a.conllu].into_iter().flatten() {
        run.input(p);
    }
    let metadata = a.metadata.as_deref().map(MetadataTable::load).transpose()?;
    let mut corpus = match (&a.corpus, &a.xml, &a.gold) {
        (Some(native), _, _) => {
            let corpus = import_corpus(native)?;
            match &metadata {
                Some(table) => corpus.with_metadata(table)?,
                None => corpus,
            }
        }
        (None, Some(xml), Some(gold)) => {
            let opts = ImportOptions {
                name: a.name.clone(),
                inventory: a.inventory.as_deref().map(Inventory::load).transpose()?,
                metadata,
            };
            import_framework_xml(xml, gold, &opts)?
        }
        _ => return Err(InputError("either --corpus or --xml with --gold is required".into()).into()),
    };
    if let Some(conllu) = &a.conllu {
        corpus = corpus.attach_graphs(import_conllu(conllu)?)?;
    }
    let name = format!("{}.corpus.jsonl", corpus.name());
    run.write(&name, &corpus_bytes(&corpus)?)?;
    run.finish()?;
    log::info!("imported {} instances into {}", corpus.len(), a.out.join(name).display());
    Ok(())
}

#[derive(Serialize)]
struct ScoreSummary {
    score: ScoreName,
    n: usize,
    mean_ue: f64,
    /// Only defined for 0/1 losses.
    f1: Option<f64>,
}

#[derive(Serialize)]
struct ScoreRunSummary {
    dataset: String,
    instances: usize,
    scores: Vec<ScoreSummary>,
}

pub fn score(ctx: &Ctx, a: ScoreArgs) -> Result<()> {
    let mut run = Run::new("score", &a.out)?;
    run.input(&a.corpus);
    run.input(&a.samples);
    let corpus = import_corpus(&a.corpus)?;
    let samples = load_samples(&a.samples)?;
    let opts = ScoreOptions {
        mp_source: a.mp_source,
        loss: match a.loss {
            LossArg::ZeroOne => LossMode::ZeroOne,
            LossArg::CrossEntropy => LossMode::CrossEntropy,
        },
        partial: a.partial,
        exec: ctx.exec,
    };
    let mut names = a.scores.clone();
    names.sort();
    names.dedup();
    let mut summary = ScoreRunSummary { dataset: corpus.name().to_string(), instances: corpus.len(), scores: Vec::new() };
    for name in names {
        let records = match score_corpus(&corpus, &samples, name, &opts) {
            Err(wsd_ue::Error::Alignment(report)) => {
                let path = run.write("alignment_report.json", &json(&report)?)?;
                run.finish()?;
                let err = anyhow::Error::new(wsd_ue::Error::Alignment(report));
                return Err(err.context(format!("see {}", path.display())));
            }
            other => other?,
        };
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &records)?;
        run.write(&format!("{}.csv", name.as_str().to_ascii_lowercase()), &buf)?;
        summary.scores.push(ScoreSummary {
            score: name,
            n: records.len(),
            mean_ue: mean_value(&records).unwrap_or(f64::NAN),
            f1: (opts.loss == LossMode::ZeroOne).then(|| f1(&records)).transpose()?,
        });
    }
    run.write("summary.json", &json(&summary)?)?;
    run.finish()?;
    Ok(())
}

fn unique_stem(path: &Path, taken: &mut BTreeMap<String, usize>) -> String {
    let stem = path.file_stem().map_or_else(|| "records".into(), |s| s.to_string_lossy().into_owned());
    let count = taken.entry(stem.clone()).or_default();
    *count += 1;
    if *count == 1 {
        stem
    } else {
        format!("{stem}-{count}")
    }
}

pub fn metrics(_ctx: &Ctx, a: MetricsArgs) -> Result<()> {
    let mut run = Run::new("metrics", &a.out)?;
    let mut rows = Vec::new();
    let mut stems = BTreeMap::new();
    for path in &a.records {
        run.input(path);
        let records = read_records(path)?;
        let row = MetricsRow::compute(&a.dataset, &records).with_context(|| path.display().to_string())?;
        let curve = rcc(&records)?.curve;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "coverage", "risk"])?;
        for p in &curve {
            w.write_record([p.k.to_string(), p.coverage.to_string(), p.risk.to_string()])?;
        }
        let name = format!("rcc_curve.{}.csv", unique_stem(path, &mut stems));
        run.write(&name, &w.into_inner()?)?;
        rows.push(row);
    }
    let mut text = String::from(MetricsRow::CSV_HEADER);
    text.push('\n');
    for r in &rows {
        text.push_str(&r.csv_line());
        text.push('\n');
    }
    run.write("metrics.csv", text.as_bytes())?;
    run.write("metrics.json", &json(&rows)?)?;
    let table = render_table(&rows);
    run.write("metrics.txt", table.as_bytes())?;
    run.finish()?;
    print!("{table}");
    Ok(())
}

pub fn context(ctx: &Ctx, a: ContextArgs) -> Result<()> {
    let params = parse_params(&a.params)?;
    let mut run = Run::new("context", &a.out)?;
    run.input(&a.corpus);
    let corpus = import_corpus(&a.corpus)?;
    let reduction = if a.mask { Reduction::Mask } else { Reduction::Truncate };
    for param in params {
        let derived = derive_controlled_corpus(&corpus, a.mode, param, reduction, ctx.exec)?;
        run.write(&format!("{}.corpus.jsonl", derived.name()), &corpus_bytes(&derived)?)?;
    }
    run.finish()?;
    Ok(())
}

fn render_effects(tables: &[EffectTable]) -> String {
    let mut out = String::new();
    for t in tables {
        out.push_str(&format!(
            "{} | condition {} | aggregation {} | {:?} | {} instances, {} groups\n",
            t.effect.as_str(),
            t.condition,
            t.aggregation.as_str(),
            t.test,
            t.n_instances,
            t.n_groups
        ));
        for (k, l) in t.levels.iter().enumerate() {
            let mean = l.mean_ue.map_or_else(|| "-".to_string(), |m| format!("{m:.4}"));
            out.push_str(&format!("  L{} {:<12} n={:<6} mean={mean}\n", k + 1, l.label, l.n));
        }
        for p in &t.pairs {
            out.push_str(&format!(
                "  L{}-L{}  t={:.3}  p={:.4}{}\n",
                p.a + 1,
                p.b + 1,
                p.t,
                p.p,
                if p.significant { "  *" } else { "" }
            ));
        }
        for (x, y) in &t.skipped {
            out.push_str(&format!("  L{}-L{}  skipped (fewer than two groups)\n", x + 1, y + 1));
        }
        out.push('\n');
    }
    out
}

pub fn effects(ctx: &Ctx, a: EffectsArgs) -> Result<()> {
    let config_path = a.config.clone().or_else(|| ctx.config_file("effects.toml"));
    let text = match &config_path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| InputError(format!("{}: {e}", p.display())))?,
        None => wsd_ue::effects::DEFAULT_CONFIG.to_string(),
    };
    let config = EffectConfig::from_toml(&text)?;
    let specs: Vec<_> = config
        .analysis
        .iter()
        .filter(|s| a.effect.is_empty() || a.effect.contains(&s.effect))
        .collect();
    if specs.is_empty() {
        return Err(InputError("no configured analysis matches the requested effects".into()).into());
    }

    let mut run = Run::new("effects", &a.out)?;
    run.config(&text);
    if let Some(p) = &config_path {
        run.input(p);
    }
    run.input(&a.corpus);
    run.input(&a.records);
    let corpus = import_corpus(&a.corpus)?;
    let records = read_records(&a.records)?;
    let opts = EffectOptions {
        test: if a.student { TTestKind::Student } else { TTestKind::Welch },
        lemma_key: if a.lemma_only { LemmaKey::LemmaOnly } else { LemmaKey::LemmaPos },
    };
    let tables = specs
        .iter()
        .map(|spec| {
            run_effect(&corpus, &records, spec, opts)
                .with_context(|| format!("effect {} ({})", spec.effect.as_str(), spec.condition))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    write_tables_csv(&mut buf, &tables)?;
    run.write("effects.csv", &buf)?;
    run.write("effects.json", &json(&tables)?)?;
    let text = render_effects(&tables);
    run.write("effects.txt", text.as_bytes())?;

    if a.regress {
        let (design, response, dropped) = regression_design(&records, &corpus, &a.regress_effects)?;
        let mut summary = ols_regression(&design, &response)?;
        summary.dropped = dropped;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["coefficient", "beta", "se", "t", "p"])?;
        for c in &summary.coefficients {
            w.write_record([c.name.clone(), c.beta.to_string(), c.se.to_string(), c.t.to_string(), c.p.to_string()])?;
        }
        run.write("regression.csv", &w.into_inner()?)?;
        run.write("regression.json", &json(&summary)?)?;
    }
    run.finish()?;
    print!("{text}");
    Ok(())
}

fn samples_bytes(samples: &[wsd_ue::corpus::PredictiveSamples]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_samples(&mut buf, samples)?;
    Ok(buf)
}

pub fn simulate(ctx: &Ctx, a: SimulateArgs) -> Result<()> {
    let config_path = a.config.clone().or_else(|| ctx.config_file("sim.toml"));
    let mut cfg = match &config_path {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(n) = a.n {
        cfg.n_instances = n;
    }
    cfg.validate()?;
    let params = a.context_series.as_deref().map(parse_params).transpose()?;

    let mut run = Run::new("simulate", &a.out)?;
    if let Some(p) = &config_path {
        run.input(p);
    }
    let effective = cfg.to_toml();
    run.config(&effective);
    run.seed(cfg.seed);
    run.write("sim_config.toml", effective.as_bytes())?;
    match params {
        None => {
            let (corpus, samples) = simulate_samples_with(&cfg, ctx.exec)?;
            run.write("corpus.jsonl", &corpus_bytes(&corpus)?)?;
            run.write("samples.jsonl", &samples_bytes(&samples)?)?;
        }
        Some(params) => {
            for (param, (corpus, samples)) in simulate_context_series_with(&cfg, &params, ctx.exec)? {
                run.write(&format!("corpus.{param}.jsonl"), &corpus_bytes(&corpus)?)?;
                run.write(&format!("samples.{param}.jsonl"), &samples_bytes(&samples)?)?;
            }
        }
    }
    run.finish()?;
    Ok(())
}

pub fn curve(a: CurveArgs) -> Result<()> {
    let mut run = Run::new("curve", &a.out)?;
    let mut runs: BTreeMap<ContextParam, Vec<UeRecord>> = BTreeMap::new();
    for spec in &a.run {
        let (param, path) = spec
            .split_once('=')
            .ok_or_else(|| InputError(format!("expected PARAM=RECORDS, got `{spec}`")))?;
        let param: ContextParam = param.parse()?;
        let path = Path::new(path);
        run.input(path);
        if runs.insert(param, read_records(path)?).is_some() {
            return Err(InputError(format!("context size {param} given twice")).into());
        }
    }
    let rows = ue_curve(&runs)?;
    let mut buf = Vec::new();
    write_curve_csv(&mut buf, &rows)?;
    run.write("curve.csv", &buf)?;
    run.write("curve.json", &json(&rows)?)?;
    run.finish()?;
    Ok(())
}

pub fn compare(a: CompareArgs) -> Result<()> {
    let mut run = Run::new("compare", &a.out)?;
    run.input(&a.a);
    run.input(&a.b);
    let report = compare_cohorts(&read_records(&a.a)?, &read_records(&a.b)?)?;
    let fmt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    let text = format!(
        "{:<10} {:>8} {:>8} {:>10} {:>10} {:>10}\n\
         {:<10} {:>8} {:>8.2} {:>10.4} {:>10} {:>10}\n\
         {:<10} {:>8} {:>8.2} {:>10.4} {:>10} {:>10}\n\
         {:<10} {:>8} {:>8.2} {:>10.4} {:>10} {:>10}\n",
        report.score_name.as_str(), "n", "F1", "UE", "UE correct", "UE wrong",
        "a", report.a.n, report.a.f1, report.a.ue_all, fmt(report.a.ue_correct), fmt(report.a.ue_wrong),
        "b", report.b.n, report.b.f1, report.b.ue_all, fmt(report.b.ue_correct), fmt(report.b.ue_wrong),
        "b - a", "", report.delta.f1, report.delta.ue_all, fmt(report.delta.ue_correct), fmt(report.delta.ue_wrong),
    );
    run.write("compare.json", &json(&report)?)?;
    run.write("compare.txt", text.as_bytes())?;
    run.finish()?;
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mp_source_spellings() {
        assert_eq!(parse_mp_source("auto"), Ok(MpSource::Auto));
        assert_eq!(parse_mp_source("deterministic"), Ok(MpSource::Deterministic));
        assert_eq!(parse_mp_source("row:3"), Ok(MpSource::Row(3)));
        assert!(parse_mp_source("row:").is_err());
        assert!(parse_mp_source("first").is_err());
    }

    #[test]
    fn repeated_stems_get_suffixes() {
        let mut taken = BTreeMap::new();
        assert_eq!(unique_stem(Path::new("a/smp.csv"), &mut taken), "smp");
        assert_eq!(unique_stem(Path::new("b/smp.csv"), &mut taken), "smp-2");
        assert_eq!(unique_stem(Path::new("b/pv.jsonl"), &mut taken), "pv");
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let err = read_records(Path::new("/nonexistent/smp.csv")).unwrap_err();
        assert!(err.downcast_ref::<InputError>().is_some());
    }
}
