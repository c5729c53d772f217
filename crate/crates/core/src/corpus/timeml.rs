//! TimeML reader.
//!
//! Sentence boundaries come from `<s>` elements when the text has any;
//! otherwise a small rule-based splitter breaks after `.`, `!` and `?` tokens
//! and at blank lines, never inside a mention.

use std::collections::HashMap;

use roxmltree::{Node, NodeType};

use super::{dct_anchor, CorpusError, Document, EventMention, TimexMention, TokenSpan};
use crate::timecore::{normalize_timex, TimeAnchor, TimexType};

const CREATION_TIME: &str = "CREATION_TIME";

const ABBREVIATIONS: &[&str] = &[
    "Mr", "Mrs", "Ms", "Dr", "Prof", "Gen", "Sen", "Rep", "Gov", "Lt", "Col", "Capt", "Sgt", "St",
    "Jr", "Sr", "Inc", "Corp", "Co", "Ltd", "vs", "etc", "No", "Jan", "Feb", "Mar", "Apr", "Jun",
    "Jul", "Aug", "Sep", "Sept", "Oct", "Nov", "Dec",
];

/// Parses a TimeML document. The id comes from `<DOCID>`, falling back to
/// `fallback_id` (typically the file stem).
pub fn parse_timeml(xml: &str, fallback_id: &str) -> Result<Document, CorpusError> {
    let tree = roxmltree::Document::parse(xml).map_err(|e| CorpusError::Xml(e.to_string()))?;
    let root = tree.root_element();

    let id = root
        .descendants()
        .find(|n| n.has_tag_name("DOCID"))
        .and_then(|n| n.text())
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .unwrap_or(fallback_id)
        .to_string();

    let dct_node = root
        .descendants()
        .find(|n| n.has_tag_name("TIMEX3") && n.attribute("functionInDocument") == Some(CREATION_TIME))
        .ok_or_else(|| CorpusError::MissingDct { doc: id.clone() })?;
    let dct = dct_anchor(&id, dct_node.attribute("value").unwrap_or(""))?;

    let mut instances: HashMap<&str, Vec<String>> = HashMap::new();
    for n in root.descendants().filter(|n| n.has_tag_name("MAKEINSTANCE")) {
        if let (Some(eid), Some(eiid)) = (n.attribute("eventID"), n.attribute("eiid")) {
            instances.entry(eid).or_default().push(eiid.to_string());
        }
    }

    let text_root = root
        .descendants()
        .find(|n| n.has_tag_name("TEXT"))
        .unwrap_or(root);
    let use_s_tags = text_root.descendants().any(|n| n.has_tag_name("s"));

    let mut builder = Builder {
        doc: &id,
        dct,
        use_s_tags,
        sentences: Vec::new(),
        current: Vec::new(),
        events: Vec::new(),
        timexes: Vec::new(),
        mention_depth: 0,
    };
    for child in text_root.children() {
        builder.visit(child);
    }
    builder.flush();

    let mut events = builder.events;
    for e in &mut events {
        if let Some(list) = instances.get(e.eid.as_str()) {
            e.instances = list.clone();
        }
    }
    let (sentences, timexes) = (builder.sentences, builder.timexes);
    let doc = Document {
        id,
        dct,
        sentences,
        events,
        timexes,
    };
    doc.validate()?;
    Ok(doc)
}

struct Builder<'a> {
    doc: &'a str,
    dct: TimeAnchor,
    use_s_tags: bool,
    sentences: Vec<Vec<String>>,
    current: Vec<String>,
    events: Vec<EventMention>,
    timexes: Vec<TimexMention>,
    mention_depth: usize,
}

impl Builder<'_> {
    fn flush(&mut self) {
        if !self.current.is_empty() {
            self.sentences.push(std::mem::take(&mut self.current));
        }
    }

    fn position(&self) -> (usize, usize) {
        (self.sentences.len(), self.current.len())
    }

    fn visit(&mut self, node: Node) {
        match node.node_type() {
            NodeType::Text => self.text(node.text().unwrap_or("")),
            NodeType::Element => match node.tag_name().name() {
                "s" => {
                    self.flush();
                    self.children(node);
                    self.flush();
                }
                "EVENT" => self.mention(node, |b, node, sentence, span| {
                    let eid = node.attribute("eid").unwrap_or_default().to_string();
                    b.events.push(EventMention {
                        eid,
                        sentence,
                        span,
                        instances: Vec::new(),
                        gold_anchor: None,
                    });
                }),
                "TIMEX3" if node.attribute("functionInDocument") == Some(CREATION_TIME) => {
                    self.children(node)
                }
                "TIMEX3" => self.mention(node, |b, node, sentence, span| {
                    let tid = node.attribute("tid").unwrap_or_default().to_string();
                    let value = node.attribute("value").unwrap_or_default().to_string();
                    let timex_type = node
                        .attribute("type")
                        .map(str::parse::<TimexType>)
                        .transpose()
                        .unwrap_or_else(|err| {
                            log::warn!("{}: timex {tid}: {err}", b.doc);
                            None
                        })
                        .unwrap_or(TimexType::Date);
                    let anchor = normalize_timex(&value, timex_type, &b.dct).unwrap_or_else(|err| {
                        log::warn!("{}: timex {tid}: {err}", b.doc);
                        None
                    });
                    b.timexes.push(TimexMention {
                        tid,
                        sentence,
                        span,
                        value,
                        timex_type,
                        anchor,
                    });
                }),
                _ => self.children(node),
            },
            _ => {}
        }
    }

    fn children(&mut self, node: Node) {
        for child in node.children() {
            self.visit(child);
        }
    }

    fn mention(&mut self, node: Node, record: impl FnOnce(&mut Self, Node, usize, TokenSpan)) {
        let (sentence, start) = self.position();
        self.mention_depth += 1;
        self.children(node);
        self.mention_depth -= 1;
        let (end_sentence, end) = self.position();
        if end_sentence != sentence || end == start {
            log::warn!("{}: skipping empty or split mention {:?}", self.doc, node.attributes().next().map(|a| a.value()));
            return;
        }
        record(self, node, sentence, TokenSpan::new(start, end));
    }

    fn text(&mut self, text: &str) {
        let paragraphs: Vec<&str> = split_paragraphs(text);
        for (i, para) in paragraphs.iter().enumerate() {
            if i > 0 && !self.use_s_tags && self.mention_depth == 0 {
                self.flush();
            }
            for token in tokenize(para) {
                let ends_sentence = matches!(token.as_str(), "." | "!" | "?");
                self.current.push(token);
                if ends_sentence && !self.use_s_tags && self.mention_depth == 0 {
                    self.flush();
                }
            }
        }
    }
}

/// Splits at blank lines (a newline, optional spaces, another newline).
fn split_paragraphs(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j] == b' ' || bytes[j] == b'\t' || bytes[j] == b'\r') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'\n' {
                parts.push(&text[start..i]);
                while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                    j += 1;
                }
                start = j;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    parts.push(&text[start..]);
    parts
}

const LEADING: &[char] = &['(', '[', '{', '"', '\'', '`'];
const TRAILING: &[char] = &[')', ']', '}', '"', '\'', ',', ';', ':', '!', '?', '.'];

/// Whitespace tokenization with punctuation split off the edges.
pub(crate) fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let mut word = chunk;
        while let Some(c) = word.chars().next().filter(|c| LEADING.contains(c)) {
            if word.len() == c.len_utf8() || word.starts_with("'s") {
                break;
            }
            out.push(c.to_string());
            word = &word[c.len_utf8()..];
        }
        let mut tail = Vec::new();
        while let Some(c) = word.chars().last().filter(|c| TRAILING.contains(c)) {
            if word.len() == c.len_utf8() {
                break;
            }
            let stem = &word[..word.len() - c.len_utf8()];
            if c == '.' && keeps_period(stem) {
                break;
            }
            tail.push(c.to_string());
            word = stem;
        }
        match word.strip_suffix("'s").filter(|s| !s.is_empty()) {
            Some(stem) => {
                out.push(stem.to_string());
                out.push("'s".to_string());
            }
            None => out.push(word.to_string()),
        }
        out.extend(tail.into_iter().rev());
    }
    out
}

fn keeps_period(stem: &str) -> bool {
    stem.contains('.')
        || ABBREVIATIONS.contains(&stem)
        || (stem.chars().count() == 1 && stem.chars().all(|c| c.is_ascii_uppercase()))
}
