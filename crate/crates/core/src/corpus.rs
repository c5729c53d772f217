//! Annotated documents and classification link instances.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sralgebra::{induce_sr, SrVector};
use crate::timecore::{
    floor_to_day, normalize_timex, parse_anchor, AnchorParseError, TimeAnchor, TimexType,
};

mod timeml;

pub use timeml::parse_timeml;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("document {doc:?} has no CREATION_TIME TIMEX3")]
    MissingDct { doc: String },
    #[error("document {doc:?}: DCT value {value:?} is not a single calendar day")]
    BadDct { doc: String, value: String },
    #[error("document {doc:?}: {message}")]
    Invalid { doc: String, message: String },
    #[error("line {line}: expected 3 tab-separated fields, found {found}")]
    TsvFields { line: usize, found: usize },
    #[error("line {line}: bad anchor {text:?}: {source}")]
    TsvAnchor {
        line: usize,
        text: String,
        #[source]
        source: AnchorParseError,
    },
    #[error("line {line}: duplicate entry for {doc}/{eid}")]
    TsvDuplicate { line: usize, doc: String, eid: String },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Half-open token range `[start, end)` within one sentence (or within a
/// link's token window).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSpan {
    pub start: usize,
    pub end: usize,
}

impl TokenSpan {
    pub fn new(start: usize, end: usize) -> Self {
        TokenSpan { start, end }
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn last(&self) -> usize {
        self.end - 1
    }

    fn shifted(self, by: usize) -> TokenSpan {
        TokenSpan::new(self.start + by, self.end + by)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventMention {
    pub eid: String,
    pub sentence: usize,
    pub span: TokenSpan,
    /// Event instance ids (`eiid`) from MAKEINSTANCE tags.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub instances: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_anchor: Option<TimeAnchor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimexMention {
    pub tid: String,
    pub sentence: usize,
    pub span: TokenSpan,
    pub value: String,
    #[serde(rename = "type", default = "default_timex_type")]
    pub timex_type: TimexType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<TimeAnchor>,
}

fn default_timex_type() -> TimexType {
    TimexType::Date
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub id: String,
    pub dct: TimeAnchor,
    pub sentences: Vec<Vec<String>>,
    pub events: Vec<EventMention>,
    pub timexes: Vec<TimexMention>,
}

impl Document {
    /// Checks span bounds and the DCT shape.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |message: String| CorpusError::Invalid {
            doc: self.id.clone(),
            message,
        };
        if !(self.dct.is_certain() && self.dct.is_single_day()) {
            return Err(invalid(format!("DCT {} is not a Certain Single-Day", self.dct)));
        }
        let check = |kind: &str, id: &str, sentence: usize, span: TokenSpan| {
            let len = self
                .sentences
                .get(sentence)
                .map(Vec::len)
                .ok_or_else(|| invalid(format!("{kind} {id}: sentence {sentence} out of range")))?;
            if span.is_empty() || span.end > len {
                return Err(invalid(format!(
                    "{kind} {id}: span {}..{} invalid for sentence of {len} tokens",
                    span.start, span.end
                )));
            }
            Ok(())
        };
        for e in &self.events {
            check("event", &e.eid, e.sentence, e.span)?;
        }
        for t in &self.timexes {
            check("timex", &t.tid, t.sentence, t.span)?;
        }
        Ok(())
    }

    /// Reads the JSON document format. Timexes without an `anchor` field are
    /// normalized from their value; unresolvable values stay unanchored.
    pub fn from_json(text: &str) -> Result<Document, CorpusError> {
        let mut doc: Document = serde_json::from_str(text)?;
        doc.validate()?;
        let dct = doc.dct;
        for t in doc.timexes.iter_mut().filter(|t| t.anchor.is_none()) {
            t.anchor = normalize_timex(&t.value, t.timex_type, &dct).unwrap_or_else(|err| {
                log::warn!("{}: timex {}: {err}", doc.id, t.tid);
                None
            });
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization is infallible")
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// Normalizes a DCT value into a Certain Single-Day anchor.
pub(crate) fn dct_anchor(doc: &str, value: &str) -> Result<TimeAnchor, CorpusError> {
    floor_to_day(value.trim())
        .or_else(|| floor_to_day(value.trim().split('T').next().unwrap_or("")))
        .filter(|d| crate::timecore::DayPoint::from_date(*d).is_ok())
        .map(TimeAnchor::certain_day)
        .ok_or_else(|| CorpusError::BadDct {
            doc: doc.to_string(),
            value: value.to_string(),
        })
}

/// Gold event anchors keyed by document id and event id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventTimeTable {
    entries: BTreeMap<String, BTreeMap<String, TimeAnchor>>,
}

/// Outcome of applying an [`EventTimeTable`] to one document.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    pub applied: usize,
    pub unknown_events: Vec<String>,
}

impl EventTimeTable {
    /// Parses `doc_id<TAB>eid<TAB>anchor` lines. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<EventTimeTable, CorpusError> {
        let mut table = EventTimeTable::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 3 {
                return Err(CorpusError::TsvFields { line, found: fields.len() });
            }
            let (doc, eid, text) = (fields[0].trim(), fields[1].trim(), fields[2].trim());
            let anchor = parse_anchor(text).map_err(|source| CorpusError::TsvAnchor {
                line,
                text: text.to_string(),
                source,
            })?;
            let previous = table
                .entries
                .entry(doc.to_string())
                .or_default()
                .insert(eid.to_string(), anchor);
            if previous.is_some() {
                return Err(CorpusError::TsvDuplicate {
                    line,
                    doc: doc.to_string(),
                    eid: eid.to_string(),
                });
            }
        }
        Ok(table)
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, doc: &str, eid: &str) -> Option<&TimeAnchor> {
        self.entries.get(doc)?.get(eid)
    }

    pub fn insert(&mut self, doc: &str, eid: &str, anchor: TimeAnchor) {
        self.entries
            .entry(doc.to_string())
            .or_default()
            .insert(eid.to_string(), anchor);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &TimeAnchor)> {
        self.entries
            .iter()
            .flat_map(|(d, m)| m.iter().map(move |(e, a)| (d.as_str(), e.as_str(), a)))
    }

    /// Serializes back to the TSV form, sorted by document then event id.
    pub fn to_tsv(&self) -> String {
        self.iter()
            .map(|(d, e, a)| format!("{d}\t{e}\t{a}\n"))
            .collect()
    }

    /// Fills gold anchors of `doc` from this table. Rows naming events the
    /// document lacks are skipped and reported.
    pub fn apply(&self, mut doc: Document) -> (Document, LoadReport) {
        let mut report = LoadReport::default();
        let Some(rows) = self.entries.get(&doc.id) else {
            return (doc, report);
        };
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, e) in doc.events.iter().enumerate() {
            index.insert(e.eid.as_str(), i);
            for inst in &e.instances {
                index.entry(inst.as_str()).or_insert(i);
            }
        }
        let mut updates = Vec::new();
        for (eid, anchor) in rows {
            match index.get(eid.as_str()) {
                Some(&i) => updates.push((i, *anchor)),
                None => {
                    log::warn!("{}: event-time row for unknown event {eid}", doc.id);
                    report.unknown_events.push(eid.clone());
                }
            }
        }
        for (i, anchor) in updates {
            doc.events[i].gold_anchor = Some(anchor);
            report.applied += 1;
        }
        (doc, report)
    }
}

/// Parses `table_text` and fills the gold anchors of `doc`.
pub fn load_event_times(
    table_text: &str,
    doc: Document,
) -> Result<(Document, LoadReport), CorpusError> {
    Ok(EventTimeTable::parse(table_text)?.apply(doc))
}

/// Event-to-DCT or Event-to-Timex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LinkKind {
    #[serde(rename = "E-D")]
    EventDct,
    #[serde(rename = "E-T")]
    EventTimex,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::EventDct => "E-D",
            LinkKind::EventTimex => "E-T",
        }
    }

    /// Number of mentions carried by instances of this kind.
    pub fn mention_count(self) -> usize {
        match self {
            LinkKind::EventDct => 1,
            LinkKind::EventTimex => 2,
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "E-D" => Ok(LinkKind::EventDct),
            "E-T" => Ok(LinkKind::EventTimex),
            other => Err(format!("unknown link kind {other:?} (expected E-D or E-T)")),
        }
    }
}

/// Target id used for Event-to-DCT links.
pub const DCT_TARGET: &str = "DCT";

/// One classification example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkInstance {
    pub kind: LinkKind,
    pub doc: String,
    pub event: String,
    /// `"DCT"` or the timex id.
    pub target: String,
    /// Absolute sentence distance; 0 for E-D.
    pub sentence_distance: usize,
    /// Timex sentence minus event sentence; 0 for E-D.
    pub signed_distance: i64,
    /// Index of the timex among the document's timexes (document order).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_order: Option<usize>,
    pub tokens: Vec<String>,
    pub event_span: TokenSpan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timex_span: Option<TokenSpan>,
    pub target_anchor: TimeAnchor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<SrVector>,
}

impl LinkInstance {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("link serialization is infallible")
    }

    /// Parses one dataset line and checks that the mention spans fit the
    /// token window.
    pub fn from_json_line(line: &str) -> Result<LinkInstance, CorpusError> {
        let link: LinkInstance = serde_json::from_str(line)?;
        let invalid = |message: &str| CorpusError::Invalid {
            doc: link.doc.clone(),
            message: format!("link {}->{}: {message}", link.event, link.target),
        };
        let fits = |s: TokenSpan| !s.is_empty() && s.end <= link.tokens.len();
        if !fits(link.event_span) {
            return Err(invalid("event span outside tokens"));
        }
        match (link.kind, link.timex_span) {
            (LinkKind::EventTimex, Some(s)) if fits(s) => {}
            (LinkKind::EventTimex, _) => return Err(invalid("E-T link needs a timex span inside tokens")),
            (LinkKind::EventDct, Some(_)) => return Err(invalid("E-D link has a timex span")),
            (LinkKind::EventDct, None) => {}
        }
        if link.signed_distance.unsigned_abs() as usize != link.sentence_distance {
            return Err(invalid("signed and absolute distances disagree"));
        }
        Ok(link)
    }
}

/// Parses a line-delimited JSON dataset, skipping blank lines.
pub fn read_links(text: &str) -> Result<Vec<LinkInstance>, CorpusError> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(LinkInstance::from_json_line)
        .collect()
}

pub fn write_links(links: &[LinkInstance]) -> String {
    links.iter().map(|l| l.to_json_line() + "\n").collect()
}

/// Generates one E-D link per event plus one E-T link per anchorable timex
/// within `window` sentences of the event.
///
/// Output order: per event (document order), the E-D link first, then E-T
/// links by sentence distance and then timex document order.
pub fn generate_links(doc: &Document, window: usize) -> Vec<LinkInstance> {
    let mut links = Vec::new();
    for event in &doc.events {
        links.push(dct_link(doc, event));
        links.extend(timex_links(doc, event, Some(window)));
    }
    links
}

/// Only the E-D links of `doc`.
pub fn generate_dct_links(doc: &Document) -> Vec<LinkInstance> {
    doc.events.iter().map(|e| dct_link(doc, e)).collect()
}

fn dct_link(doc: &Document, event: &EventMention) -> LinkInstance {
    LinkInstance {
        kind: LinkKind::EventDct,
        doc: doc.id.clone(),
        event: event.eid.clone(),
        target: DCT_TARGET.to_string(),
        sentence_distance: 0,
        signed_distance: 0,
        target_order: None,
        tokens: doc.sentences[event.sentence].clone(),
        event_span: event.span,
        timex_span: None,
        target_anchor: doc.dct,
        gold: event.gold_anchor.map(|g| induce_sr(&g, &doc.dct)),
    }
}

fn timex_links(doc: &Document, event: &EventMention, window: Option<usize>) -> Vec<LinkInstance> {
    let mut candidates: Vec<(usize, usize, &TimexMention, TimeAnchor)> = doc
        .timexes
        .iter()
        .enumerate()
        .filter_map(|(order, t)| {
            let anchor = t.anchor?;
            let distance = event.sentence.abs_diff(t.sentence);
            window
                .is_none_or(|w| distance <= w)
                .then_some((distance, order, t, anchor))
        })
        .collect();
    candidates.sort_by_key(|&(distance, order, _, _)| (distance, order));
    candidates
        .into_iter()
        .map(|(distance, order, timex, anchor)| {
            let first = event.sentence.min(timex.sentence);
            let last = event.sentence.max(timex.sentence);
            let offset_of = |sentence: usize| -> usize {
                doc.sentences[first..sentence].iter().map(Vec::len).sum()
            };
            let tokens: Vec<String> = doc.sentences[first..=last].concat();
            LinkInstance {
                kind: LinkKind::EventTimex,
                doc: doc.id.clone(),
                event: event.eid.clone(),
                target: timex.tid.clone(),
                sentence_distance: distance,
                signed_distance: timex.sentence as i64 - event.sentence as i64,
                target_order: Some(order),
                tokens,
                event_span: event.span.shifted(offset_of(event.sentence)),
                timex_span: Some(timex.span.shifted(offset_of(timex.sentence))),
                target_anchor: anchor,
                gold: event.gold_anchor.map(|g| induce_sr(&g, &anchor)),
            }
        })
        .collect()
}

/// Corpus-level counts used by the stats reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub sentences: usize,
    pub tokens: usize,
    pub events: usize,
    pub gold_events: usize,
    pub timexes: usize,
    pub anchorable_timexes: usize,
    pub single_day_certain: usize,
    pub single_day_uncertain: usize,
    pub multi_day_certain: usize,
    pub multi_day_uncertain: usize,
}

impl CorpusStats {
    pub fn of(docs: &[Document]) -> CorpusStats {
        let mut s = CorpusStats {
            documents: docs.len(),
            ..CorpusStats::default()
        };
        for d in docs {
            s.sentences += d.sentences.len();
            s.tokens += d.token_count();
            s.events += d.events.len();
            s.timexes += d.timexes.len();
            s.anchorable_timexes += d.timexes.iter().filter(|t| t.anchor.is_some()).count();
            for a in d.events.iter().filter_map(|e| e.gold_anchor) {
                s.gold_events += 1;
                match (a.is_single_day(), a.is_certain()) {
                    (true, true) => s.single_day_certain += 1,
                    (true, false) => s.single_day_uncertain += 1,
                    (false, true) => s.multi_day_certain += 1,
                    (false, false) => s.multi_day_uncertain += 1,
                }
            }
        }
        s
    }
}
