use std::fs;
use std::path::{Path, PathBuf};

use evtime::corpus::{generate_links, load_event_times, parse_timeml, Document, EventTimeTable, LinkKind};
use evtime::evaluation::{oracle_test, OracleMode};
use evtime::synthetic::synthetic_corpus;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn load_dir(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == ext))
        .collect();
    paths.sort();
    paths
}

/// Bundled documents plus the event-time table reproduce the generator output.
#[test]
fn synthetic_bundle_matches_generator() {
    let table = fs::read_to_string(data("synthetic/event_times.tsv")).unwrap();
    let docs: Vec<Document> = load_dir(&data("synthetic/docs"), "json")
        .iter()
        .map(|p| {
            let doc = Document::from_json(&fs::read_to_string(p).unwrap()).unwrap();
            assert!(doc.events.iter().all(|e| e.gold_anchor.is_none()), "gold leaked into {}", p.display());
            let (doc, report) = load_event_times(&table, doc).unwrap();
            assert!(report.unknown_events.is_empty());
            assert_eq!(report.applied, doc.events.len());
            doc
        })
        .collect();
    assert_eq!(docs, synthetic_corpus(2024, 12));
    assert_eq!(oracle_test(&docs, OracleMode::Window(2)).accuracy, 1.0);
}

#[test]
fn timeml_sample_loads_with_gold() {
    let table = EventTimeTable::parse(&fs::read_to_string(data("timeml-sample/event_times.tsv")).unwrap()).unwrap();
    let mut events = 0;
    for path in load_dir(&data("timeml-sample/docs"), "tml") {
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        let doc = parse_timeml(&fs::read_to_string(&path).unwrap(), &stem).unwrap();
        let (doc, _) = table.apply(doc);
        assert!(doc.events.iter().all(|e| e.gold_anchor.is_some()), "{}", doc.id);
        let links = generate_links(&doc, 1);
        assert_eq!(links.iter().filter(|l| l.kind == LinkKind::EventDct).count(), doc.events.len());
        assert!(links.iter().all(|l| l.gold.is_some()));
        events += doc.events.len();
    }
    assert_eq!(events, 11);
}
