//! Seeded synthetic data: small news-like documents whose event anchors are
//! fully determined by nearby timexes, and a link dataset whose relation
//! vectors are a function of a cue word.

use chrono::{Datelike, Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Document, EventMention, LinkInstance, LinkKind, TimexMention, TokenSpan, DCT_TARGET};
use crate::sralgebra::{SrLabel, SrVector};
use crate::timecore::{normalize_timex, BoundPair, DayPoint, TimeAnchor, TimexType};

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

const SUBJECTS: [&str; 8] = [
    "The committee",
    "The union",
    "Police",
    "The company",
    "Officials",
    "The minister",
    "Investors",
    "The court",
];

const VERBS: [&str; 10] = [
    "announced", "approved", "rejected", "signed", "reported", "delayed", "opened", "closed", "ruled",
    "confirmed",
];

const OBJECTS: [&str; 6] = ["the plan", "the deal", "a proposal", "the merger", "the report", "new rules"];

fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

struct DocBuilder {
    id: String,
    dct: TimeAnchor,
    sentences: Vec<Vec<String>>,
    events: Vec<EventMention>,
    timexes: Vec<TimexMention>,
}

/// A sentence under construction: plain words, one event slot and any
/// number of date slots.
enum Piece<'a> {
    Text(&'a str),
    Event(&'a str, TimeAnchor),
    Date(NaiveDate),
}

impl DocBuilder {
    fn sentence(&mut self, pieces: &[Piece]) {
        let index = self.sentences.len();
        let mut tokens: Vec<String> = Vec::new();
        for piece in pieces {
            match piece {
                Piece::Text(t) => tokens.extend(words(t)),
                Piece::Event(verb, anchor) => {
                    let start = tokens.len();
                    tokens.push(verb.to_string());
                    self.events.push(EventMention {
                        eid: format!("e{}", self.events.len() + 1),
                        sentence: index,
                        span: TokenSpan::new(start, start + 1),
                        instances: Vec::new(),
                        gold_anchor: Some(*anchor),
                    });
                }
                Piece::Date(day) => {
                    let start = tokens.len();
                    tokens.push(MONTHS[day.month0() as usize].to_string());
                    tokens.push(day.day().to_string());
                    let value = day.format("%Y-%m-%d").to_string();
                    let anchor = normalize_timex(&value, TimexType::Date, &self.dct)
                        .expect("generated dates normalize");
                    self.timexes.push(TimexMention {
                        tid: format!("t{}", self.timexes.len() + 1),
                        sentence: index,
                        span: TokenSpan::new(start, start + 2),
                        value,
                        timex_type: TimexType::Date,
                        anchor,
                    });
                }
            }
        }
        tokens.push(".".into());
        self.sentences.push(tokens);
    }
}

/// How an event's anchor is pinned.
#[derive(Clone, Copy)]
enum Scene {
    /// Same-day timex in the event's sentence.
    SameSentence,
    /// Begin in the event's sentence, end in the next.
    SpanNextSentence,
    /// Bracketed between a same-sentence and a next-sentence timex.
    Bracketed,
    /// Timex two sentences before the event.
    TwoBack,
    /// The event happens on the DCT; no timex needed.
    Today,
}

const SCENES: [Scene; 5] = [
    Scene::SameSentence,
    Scene::SpanNextSentence,
    Scene::Bracketed,
    Scene::TwoBack,
    Scene::Today,
];

/// `count` documents in which every event anchor is recoverable from gold
/// relations once the sentence window reaches 2, but not at window 0.
///
/// Every document holds one scene of each kind in a seeded order; dates are
/// distinct within a document, so no timex pins an event by accident.
pub fn synthetic_corpus(seed: u64, count: usize) -> Vec<Document> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = NaiveDate::from_ymd_opt(1998, 1, 1).expect("valid date");
    (0..count)
        .map(|d| {
            let dct_day = base + Days::new(rng.random_range(120..300));
            let dct = TimeAnchor::certain_day(dct_day);
            let mut b = DocBuilder {
                id: format!("syn{:03}", d + 1),
                dct,
                sentences: Vec::new(),
                events: Vec::new(),
                timexes: Vec::new(),
            };
            // Distinct days before the DCT.
            let mut offsets: Vec<u64> = (1..100).collect();
            let mut day = || {
                let i = rng.random_range(0..offsets.len());
                dct_day - Days::new(offsets.swap_remove(i))
            };
            let mut scenes = SCENES.to_vec();
            let mut order_rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(d as u64));
            for i in (1..scenes.len()).rev() {
                scenes.swap(i, order_rng.random_range(0..=i));
            }
            for scene in scenes {
                let subject = *SUBJECTS.choose(&mut order_rng).expect("non-empty");
                let verb = *VERBS.choose(&mut order_rng).expect("non-empty");
                let object = *OBJECTS.choose(&mut order_rng).expect("non-empty");
                match scene {
                    Scene::SameSentence => {
                        let x = day();
                        b.sentence(&[
                            Piece::Text("On"),
                            Piece::Date(x),
                            Piece::Text(","),
                            Piece::Text(subject),
                            Piece::Event(verb, TimeAnchor::certain_day(x)),
                            Piece::Text(object),
                        ]);
                    }
                    Scene::SpanNextSentence => {
                        let (x, y) = ordered(day(), day());
                        let anchor = TimeAnchor::certain_span(x, y).expect("ordered");
                        b.sentence(&[
                            Piece::Text(subject),
                            Piece::Event("began", anchor),
                            Piece::Text("a strike on"),
                            Piece::Date(x),
                        ]);
                        b.sentence(&[Piece::Text("It ended on"), Piece::Date(y)]);
                    }
                    Scene::Bracketed => {
                        let (x, y) = ordered(day(), day());
                        let pair = BoundPair::new(DayPoint::Day(x), DayPoint::Day(y)).expect("ordered");
                        b.sentence(&[
                            Piece::Text(subject),
                            Piece::Event(verb, TimeAnchor::single_day(pair)),
                            Piece::Text(object),
                            Piece::Text("some time after"),
                            Piece::Date(x),
                        ]);
                        b.sentence(&[Piece::Text("Nothing was known by"), Piece::Date(y)]);
                    }
                    Scene::TwoBack => {
                        let x = day();
                        b.sentence(&[Piece::Text("Markets were calm on"), Piece::Date(x)]);
                        b.sentence(&[Piece::Text("Trading was light")]);
                        b.sentence(&[
                            Piece::Text("That day"),
                            Piece::Text(subject),
                            Piece::Event(verb, TimeAnchor::certain_day(x)),
                            Piece::Text(object),
                        ]);
                    }
                    Scene::Today => {
                        b.sentence(&[
                            Piece::Text(subject),
                            Piece::Event(verb, dct),
                            Piece::Text(object),
                            Piece::Text("today"),
                        ]);
                    }
                }
            }
            let doc = Document {
                id: b.id,
                dct,
                sentences: b.sentences,
                events: b.events,
                timexes: b.timexes,
            };
            doc.validate().expect("generated documents are valid");
            doc
        })
        .collect()
}

fn ordered(a: NaiveDate, b: NaiveDate) -> (NaiveDate, NaiveDate) {
    (a.min(b), a.max(b))
}

/// Cue words and the relation vector each one signals.
pub const CUES: [(&str, [SrLabel; 4]); 8] = [
    ("yesterday", [SrLabel::Before; 4]),
    ("earlier", [SrLabel::Before; 4]),
    ("tomorrow", [SrLabel::After; 4]),
    ("later", [SrLabel::After; 4]),
    ("today", [SrLabel::Equal; 4]),
    ("now", [SrLabel::Equal; 4]),
    ("ongoing", [SrLabel::Before, SrLabel::Before, SrLabel::Vague, SrLabel::Vague]),
    ("continuing", [SrLabel::Before, SrLabel::Before, SrLabel::Vague, SrLabel::Vague]),
];

/// Sentence frames around `<subject> <verb>`; the cue goes right after the
/// verb or at the very end.
const FRAMES: [(&str, &str); 4] = [
    ("", "the plan"),
    ("", ", officials said"),
    ("reports say", ""),
    ("in the city", "the deal"),
];

const LINK_SUBJECTS: [&str; 6] = ["officials", "police", "the union", "the court", "investors", "the minister"];

/// E-D links whose gold vector is determined by the single cue word in each
/// sentence. Frame, subject, verb and cue placement are seeded; none of them
/// carries label information.
pub fn separable_links(seed: u64, count: usize) -> Vec<LinkInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dct = TimeAnchor::certain_day(NaiveDate::from_ymd_opt(1998, 2, 6).expect("valid date"));
    (0..count)
        .map(|i| {
            let (cue, labels) = CUES[i % CUES.len()];
            let (pre, post) = *FRAMES.choose(&mut rng).expect("non-empty");
            let mut tokens = words(pre);
            tokens.extend(words(LINK_SUBJECTS.choose(&mut rng).expect("non-empty")));
            let event_at = tokens.len();
            tokens.push(VERBS.choose(&mut rng).expect("non-empty").to_string());
            if rng.random_bool(0.5) {
                tokens.push(cue.to_string());
                tokens.extend(words(post));
            } else {
                tokens.extend(words(post));
                tokens.push(cue.to_string());
            }
            LinkInstance {
                kind: LinkKind::EventDct,
                doc: format!("sep{:03}", i / 10),
                event: format!("e{}", i + 1),
                target: DCT_TARGET.to_string(),
                sentence_distance: 0,
                signed_distance: 0,
                target_order: None,
                tokens,
                event_span: TokenSpan::new(event_at, event_at + 1),
                timex_span: None,
                target_anchor: dct,
                gold: Some(SrVector(labels)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::generate_links;

    #[test]
    fn corpus_is_seeded() {
        assert_eq!(synthetic_corpus(1, 3), synthetic_corpus(1, 3));
        assert_ne!(synthetic_corpus(1, 3), synthetic_corpus(2, 3));
    }

    #[test]
    fn every_event_has_a_gold_anchor() {
        for doc in synthetic_corpus(5, 4) {
            assert_eq!(doc.events.len(), SCENES.len());
            assert!(doc.events.iter().all(|e| e.gold_anchor.is_some()));
            assert!(doc.timexes.iter().all(|t| t.anchor.is_some()));
            let round = Document::from_json(&doc.to_json()).unwrap();
            assert_eq!(round, doc);
        }
    }

    #[test]
    fn links_have_gold() {
        let doc = &synthetic_corpus(3, 1)[0];
        let links = generate_links(doc, 2);
        assert!(links.iter().all(|l| l.gold.is_some()));
    }

    #[test]
    fn separable_cues_determine_labels() {
        let links = separable_links(4, 40);
        assert_eq!(links, separable_links(4, 40));
        for l in &links {
            let (_, labels) = CUES.iter().find(|(c, _)| l.tokens.iter().any(|t| t == c)).unwrap();
            assert_eq!(l.gold, Some(SrVector(*labels)));
            assert!(l.event_span.end <= l.tokens.len());
        }
    }
}
