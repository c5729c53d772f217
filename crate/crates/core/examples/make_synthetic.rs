//! Regenerates the bundled synthetic corpus.
//!
//! ```text
//! cargo run -p evtime-core --example make_synthetic -- data/synthetic
//! ```

use std::fs;
use std::path::PathBuf;

use evtime::corpus::EventTimeTable;
use evtime::synthetic::synthetic_corpus;

const SEED: u64 = 2024;
const DOCUMENTS: usize = 12;

fn main() -> std::io::Result<()> {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data/synthetic".into()));
    let docs_dir = root.join("docs");
    fs::create_dir_all(&docs_dir)?;
    let mut table = EventTimeTable::default();
    for mut doc in synthetic_corpus(SEED, DOCUMENTS) {
        for e in &mut doc.events {
            if let Some(a) = e.gold_anchor.take() {
                table.insert(&doc.id, &e.eid, a);
            }
        }
        fs::write(docs_dir.join(format!("{}.json", doc.id)), doc.to_json() + "\n")?;
    }
    fs::write(root.join("event_times.tsv"), table.to_tsv())?;
    Ok(())
}
