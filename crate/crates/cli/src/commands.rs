use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use evtime::corpus::{
    generate_links, parse_timeml, read_links, write_links, CorpusStats, Document, EventTimeTable, LinkInstance,
    LinkKind,
};
use evtime::evaluation::{
    event_time_accuracy, krippendorff_alpha, oracle_table, oracle_test, per_sr_scores, IaaRecord, OracleMode,
    OracleResult, ScoreReport,
};
use evtime::inference::{group_clues, infer_event, InferenceRecord};
use evtime::neuralnet::{train as train_model, Model, PretrainedVectors, TrainError};
use evtime::sralgebra::{SrLabel, SrVector};
use evtime::timecore::TimeAnchor;
use serde::{Deserialize, Serialize};

use crate::config::{file_stem, LinkKinds, RunConfig};
use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::User(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::User(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization is infallible") + "\n"
}

/// Every document under the configured directories, in path order, with
/// gold event times applied.
fn load_corpus(config: &RunConfig) -> Result<Vec<Document>, CliError> {
    if config.corpus_dirs.is_empty() {
        return Err(CliError::User("corpus_dirs is empty".into()));
    }
    let mut docs = Vec::new();
    for dir in &config.corpus_dirs {
        let entries = fs::read_dir(dir).map_err(|e| CliError::User(format!("cannot list {}: {e}", dir.display())))?;
        let mut paths: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
        paths.sort();
        for path in paths {
            let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
            let parsed = match ext {
                "json" => Document::from_json(&read(&path)?),
                "tml" | "xml" => {
                    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("doc");
                    parse_timeml(&read(&path)?, stem)
                }
                _ => continue,
            };
            docs.push(parsed.map_err(|e| CliError::User(format!("{}: {e}", path.display())))?);
        }
    }
    let mut ids = std::collections::BTreeSet::new();
    for d in &docs {
        if !ids.insert(d.id.as_str()) {
            return Err(CliError::User(format!("document id {:?} appears twice", d.id)));
        }
    }
    if let Some(path) = &config.event_times {
        let table = EventTimeTable::parse(&read(path)?).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
        let mut applied = 0;
        docs = docs
            .into_iter()
            .map(|d| {
                let (d, report) = table.apply(d);
                applied += report.applied;
                d
            })
            .collect();
        let known: usize = table.len();
        if applied < known {
            log::warn!("{} of {known} event-time rows matched no event", known - applied);
        }
    }
    if docs.is_empty() {
        return Err(CliError::User("no documents found".into()));
    }
    Ok(docs)
}

fn dataset_path(dir: &Path, kind: LinkKind) -> PathBuf {
    dir.join(format!("{}.jsonl", file_stem(kind)))
}

fn load_links(path: &Path) -> Result<Vec<LinkInstance>, CliError> {
    read_links(&read(path)?).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

type Histogram = BTreeMap<String, BTreeMap<&'static str, usize>>;

fn label_histogram(links: &[LinkInstance]) -> Histogram {
    let mut h = Histogram::new();
    for i in 0..4 {
        let row = h.entry(format!("SR{}", i + 1)).or_default();
        for label in SrLabel::ALL {
            row.insert(label.as_str(), 0);
        }
        for gold in links.iter().filter_map(|l| l.gold) {
            *row.get_mut(gold.get(i).as_str()).expect("all labels present") += 1;
        }
    }
    h
}

#[derive(Serialize)]
struct InduceStats {
    corpus: CorpusStats,
    sw: usize,
    ed_links: usize,
    et_links: usize,
    avg_links_per_event: f64,
    label_histogram: BTreeMap<&'static str, Histogram>,
}

pub fn induce(config: &RunConfig) -> Result<(), CliError> {
    let docs = load_corpus(config)?;
    let mut ed = Vec::new();
    let mut et = Vec::new();
    for doc in &docs {
        for link in generate_links(doc, config.sw) {
            match link.kind {
                LinkKind::EventDct => ed.push(link),
                LinkKind::EventTimex => et.push(link),
            }
        }
    }
    let corpus = CorpusStats::of(&docs);
    let stats = InduceStats {
        sw: config.sw,
        ed_links: ed.len(),
        et_links: et.len(),
        avg_links_per_event: if corpus.events == 0 {
            0.0
        } else {
            (ed.len() + et.len()) as f64 / corpus.events as f64
        },
        label_histogram: BTreeMap::from([("E-D", label_histogram(&ed)), ("E-T", label_histogram(&et))]),
        corpus,
    };
    let out = &config.output_dir;
    write(&dataset_path(out, LinkKind::EventDct), write_links(&ed))?;
    write(&dataset_path(out, LinkKind::EventTimex), write_links(&et))?;
    write(&out.join("stats.json"), to_json(&stats))?;
    println!(
        "{} documents, {} events: {} E-D and {} E-T links (sw={}) written to {}",
        stats.corpus.documents,
        stats.corpus.events,
        stats.ed_links,
        stats.et_links,
        config.sw,
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    kind: LinkKind,
    instances: usize,
    best_epoch: usize,
    best_accuracy: f64,
    history: &'a [evtime::neuralnet::EpochRecord],
}

fn load_pretrained(config: &RunConfig, links: &[LinkInstance]) -> Result<Option<PretrainedVectors>, CliError> {
    let Some(path) = &config.embeddings else {
        return Ok(None);
    };
    let wanted: std::collections::HashSet<String> =
        links.iter().flat_map(|l| l.tokens.iter().map(|t| t.to_lowercase())).collect();
    let keep = |t: &str| wanted.contains(t);
    PretrainedVectors::parse(&read(path)?, Some(config.word_dim), Some(&keep))
        .map(Some)
        .map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

pub fn train(config: &RunConfig) -> Result<(), CliError> {
    for kind in config.link_kind.kinds() {
        let path = dataset_path(config.train_dir(), kind);
        let all = load_links(&path)?;
        let links: Vec<LinkInstance> = all.into_iter().filter(|l| l.gold.is_some()).collect();
        if links.is_empty() {
            if config.link_kind == LinkKinds::Both {
                log::warn!("{}: no labeled {kind} links; skipping", path.display());
                continue;
            }
            return Err(CliError::User(format!("{}: no labeled {kind} links", path.display())));
        }
        let pretrained = load_pretrained(config, &links)?;
        let outcome = train_model(&links, &config.model_config(kind), &config.train_config(), pretrained.as_ref())
            .map_err(|e| match e {
                TrainError::NonFinite { .. } => CliError::Internal(e.to_string()),
                other => CliError::User(other.to_string()),
            })?;
        let model_path = config.model_path(kind);
        write(&model_path, outcome.model.to_bytes())?;
        let summary = TrainSummary {
            kind,
            instances: links.len(),
            best_epoch: outcome.best_epoch,
            best_accuracy: outcome.best_accuracy,
            history: &outcome.history,
        };
        write(&config.output_dir.join(format!("train_{}.json", file_stem(kind))), to_json(&summary))?;
        println!(
            "{kind}: {} instances, best validation complete match {:.4} at epoch {}, model {}",
            links.len(),
            outcome.best_accuracy,
            outcome.best_epoch,
            model_path.display()
        );
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictionRecord {
    link: LinkInstance,
    predicted: SrVector,
    probabilities: [[f64; 4]; 4],
}

fn predictions_path(config: &RunConfig, kind: LinkKind) -> PathBuf {
    config.output_dir.join(format!("predictions_{}.jsonl", file_stem(kind)))
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::User(format!("cannot read {}: {e}", path.display())))?;
    Model::from_bytes(&bytes).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

fn score(records: &[PredictionRecord]) -> Option<ScoreReport> {
    let (golds, preds): (Vec<SrVector>, Vec<SrVector>) =
        records.iter().filter_map(|r| Some((r.link.gold?, r.predicted))).unzip();
    if golds.is_empty() {
        return None;
    }
    Some(per_sr_scores(&golds, &preds).expect("aligned by construction"))
}

pub fn predict(config: &RunConfig) -> Result<(), CliError> {
    for kind in config.link_kind.kinds() {
        let model_path = config.model_path(kind);
        // Inference needs E-D predictions; only E-T may be absent.
        if config.link_kind == LinkKinds::Both && kind == LinkKind::EventTimex && !model_path.exists() {
            log::warn!("no {kind} model at {}; skipping", model_path.display());
            continue;
        }
        let model = load_model(&model_path)?;
        if model.config.kind != kind {
            return Err(CliError::User(format!(
                "{} holds a {} model, expected {kind}",
                model_path.display(),
                model.config.kind
            )));
        }
        let links = load_links(&dataset_path(config.test_dir(), kind))?;
        let mut records = Vec::with_capacity(links.len());
        for link in links {
            let pred = model.forward(&link).map_err(|e| CliError::User(e.to_string()))?;
            records.push(PredictionRecord {
                predicted: pred.argmax(),
                probabilities: pred.probs,
                link,
            });
        }
        let lines: String = records
            .iter()
            .map(|r| serde_json::to_string(r).expect("record serialization is infallible") + "\n")
            .collect();
        write(&predictions_path(config, kind), lines)?;
        println!("{kind}: {} predictions", records.len());
        if let Some(report) = score(&records) {
            let stem = file_stem(kind);
            write(&config.output_dir.join(format!("scores_{stem}.json")), to_json(&report))?;
            write(&config.output_dir.join(format!("scores_{stem}.txt")), report.to_table())?;
            print!("{}", report.to_table());
        }
    }
    Ok(())
}

fn load_predictions(path: &Path) -> Result<Vec<PredictionRecord>, CliError> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::User(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn infer(config: &RunConfig) -> Result<(), CliError> {
    let ed_path = predictions_path(config, LinkKind::EventDct);
    if !ed_path.exists() {
        return Err(CliError::User(format!("{} not found; run predict first", ed_path.display())));
    }
    let mut records = load_predictions(&ed_path)?;
    let et_path = predictions_path(config, LinkKind::EventTimex);
    let has_et = config.link_kind != LinkKinds::EventDct && et_path.exists();
    if has_et {
        records.extend(load_predictions(&et_path)?);
    }
    let gold: BTreeMap<(String, String), TimeAnchor> = if config.corpus_dirs.is_empty() {
        BTreeMap::new()
    } else {
        load_corpus(config)?
            .into_iter()
            .flat_map(|d| {
                let id = d.id;
                d.events
                    .into_iter()
                    .filter_map(move |e| Some(((id.clone(), e.eid), e.gold_anchor?)))
            })
            .collect()
    };

    let groups = group_clues(records.iter().map(|r| (&r.link, r.predicted)));
    let mut lines = String::new();
    let mut table = EventTimeTable::default();
    let (mut scored, mut correct) = (0usize, 0usize);
    for group in &groups {
        let outcome = infer_event(&group.clues);
        let g = gold.get(&(group.doc.clone(), group.event.clone()));
        let mut record = InferenceRecord::new(group, &outcome, g);
        if !has_et {
            record.notes.push("no E-T clues".into());
        }
        if let Some(g) = g {
            scored += 1;
            correct += usize::from(g.to_string() == record.inferred);
        }
        table.insert(&group.doc, &group.event, outcome.anchor);
        lines.push_str(&record.to_json_line());
        lines.push('\n');
    }
    write(&config.output_dir.join("inference.jsonl"), lines)?;
    write(&config.output_dir.join("predicted_times.tsv"), table.to_tsv())?;
    print!("{} events inferred", groups.len());
    if scored > 0 {
        print!(", event time accuracy {:.4} ({correct}/{scored})", correct as f64 / scored as f64);
    }
    if !has_et {
        print!(" (E-D clues only)");
    }
    println!();
    Ok(())
}

pub fn oracle(config: &RunConfig) -> Result<(), CliError> {
    let docs = load_corpus(config)?;
    let gold_events: usize = docs.iter().flat_map(|d| &d.events).filter(|e| e.gold_anchor.is_some()).count();
    if gold_events == 0 {
        return Err(CliError::User("the oracle needs gold event times".into()));
    }
    let mut results: Vec<OracleResult> = vec![oracle_test(&docs, OracleMode::DctOnly)];
    results.extend((0..=config.sw).map(|sw| oracle_test(&docs, OracleMode::Window(sw))));
    write(&config.output_dir.join("oracle.json"), to_json(&results))?;
    let table = oracle_table(&results);
    write(&config.output_dir.join("oracle.txt"), &table)?;
    print!("{table}");
    Ok(())
}

#[derive(Serialize)]
struct EventTimeScore {
    events: usize,
    correct: usize,
    accuracy: f64,
}

#[derive(Serialize)]
struct IaaScore {
    annotators: usize,
    items: usize,
    alpha: f64,
}

#[derive(Serialize, Default)]
struct EvaluationReport {
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    sr_scores: BTreeMap<String, ScoreReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    event_time: Option<EventTimeScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iaa: Option<IaaScore>,
}

/// Event-time accuracy of a predicted table against the gold table; gold
/// events missing from the prediction count as wrong.
fn compare_tables(gold: &EventTimeTable, predicted: &EventTimeTable) -> EventTimeScore {
    let (golds, inferred): (Vec<TimeAnchor>, Vec<TimeAnchor>) = gold
        .iter()
        .map(|(d, e, a)| (*a, predicted.get(d, e).copied().unwrap_or(TimeAnchor::BLANK)))
        .unzip();
    let accuracy = event_time_accuracy(&golds, &inferred).expect("aligned by construction");
    EventTimeScore {
        events: golds.len(),
        correct: golds.iter().zip(&inferred).filter(|(g, i)| g.to_string() == i.to_string()).count(),
        accuracy,
    }
}

pub fn evaluate(config: &RunConfig) -> Result<(), CliError> {
    let mut report = EvaluationReport::default();
    let mut text = String::new();

    for kind in [LinkKind::EventDct, LinkKind::EventTimex] {
        let path = predictions_path(config, kind);
        if !path.exists() {
            continue;
        }
        if let Some(scores) = score(&load_predictions(&path)?) {
            let _ = writeln!(text, "== {kind} relation scores ==");
            text.push_str(&scores.to_table());
            report.sr_scores.insert(kind.to_string(), scores);
        }
    }
    if !report.sr_scores.is_empty() {
        let _ = writeln!(text, "{:<6} {:>7} {:>7} {:>7} {:>7} {:>7}", "link", "SR1", "SR2", "SR3", "SR4", "Comp.");
        for (kind, scores) in &report.sr_scores {
            let row = scores.summary_row();
            let _ = writeln!(
                text,
                "{kind:<6} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
                row[0], row[1], row[2], row[3], row[4]
            );
        }
    }

    let parse_table = |path: &Path| {
        EventTimeTable::parse(&read(path)?).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
    };
    let event_time = match (&config.predicted_times, &config.event_times) {
        (Some(pred), Some(gold)) => Some(compare_tables(&parse_table(gold)?, &parse_table(pred)?)),
        (Some(_), None) => return Err(CliError::User("predicted_times needs event_times as the gold table".into())),
        (None, _) => {
            let path = config.output_dir.join("inference.jsonl");
            if path.exists() {
                let records: Vec<InferenceRecord> = read(&path)?
                    .lines()
                    .filter(|l| !l.trim().is_empty())
                    .map(serde_json::from_str)
                    .collect::<Result<_, _>>()
                    .map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
                let scored: Vec<&InferenceRecord> = records.iter().filter(|r| r.gold.is_some()).collect();
                let correct = scored.iter().filter(|r| r.gold.as_deref() == Some(r.inferred.as_str())).count();
                (!scored.is_empty()).then(|| EventTimeScore {
                    events: scored.len(),
                    correct,
                    accuracy: correct as f64 / scored.len() as f64,
                })
            } else {
                None
            }
        }
    };
    if let Some(s) = &event_time {
        let _ = writeln!(text, "event time accuracy: {:.4} ({}/{})", s.accuracy, s.correct, s.events);
    }
    report.event_time = event_time;

    if let Some(path) = &config.iaa_table {
        let record = IaaRecord::parse_tsv(&read(path)?).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
        let alpha = krippendorff_alpha(&record).map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
        let _ = writeln!(text, "krippendorff alpha (nominal): {alpha:.4} over {} items", record.items.len());
        report.iaa = Some(IaaScore {
            annotators: record.annotators.len(),
            items: record.items.len(),
            alpha,
        });
    }

    if report.sr_scores.is_empty() && report.event_time.is_none() && report.iaa.is_none() {
        return Err(CliError::User("nothing to evaluate: no predictions, inference report or tables".into()));
    }
    write(&config.output_dir.join("evaluation.json"), to_json(&report))?;
    write(&config.output_dir.join("evaluation.txt"), &text)?;
    print!("{text}");
    Ok(())
}

pub fn corpus_stats(config: &RunConfig) -> Result<(), CliError> {
    let docs = load_corpus(config)?;
    let stats = CorpusStats::of(&docs);
    write(&config.output_dir.join("corpus_stats.json"), to_json(&stats))?;
    let rows = [
        ("documents", stats.documents),
        ("sentences", stats.sentences),
        ("tokens", stats.tokens),
        ("events", stats.events),
        ("events with gold time", stats.gold_events),
        ("timexes", stats.timexes),
        ("anchorable timexes", stats.anchorable_timexes),
        ("single-day certain", stats.single_day_certain),
        ("single-day uncertain", stats.single_day_uncertain),
        ("multi-day certain", stats.multi_day_certain),
        ("multi-day uncertain", stats.multi_day_uncertain),
    ];
    for (name, n) in rows {
        println!("{name:<24} {n:>8}");
    }
    Ok(())
}
