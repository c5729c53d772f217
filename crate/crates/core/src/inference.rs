//! Rebuild an event's anchor from its sub-level relations to the DCT and to
//! nearby timexes.
//!
//! Clues are applied in priority order: the DCT first, then timexes by
//! sentence distance and document order. Each SR index constrains one event
//! bound pair against one target bound pair. `equal` copies the target pair,
//! `after` raises the earliest bound, `before` lowers the latest bound. An
//! `equal` against the DCT locks that SR index for the rest of the event.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{LinkInstance, LinkKind};
use crate::sralgebra::{SrLabel, SrVector};
use crate::timecore::{DayPoint, TimeAnchor};

/// Where a clue came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum ClueSource {
    Dct,
    Timex {
        tid: String,
        /// Absolute sentence distance from the event.
        distance: usize,
        /// Timex position in document order.
        order: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeClue {
    pub source: ClueSource,
    pub target_anchor: TimeAnchor,
    pub sr: SrVector,
}

impl TimeClue {
    pub fn dct(target_anchor: TimeAnchor, sr: SrVector) -> Self {
        TimeClue {
            source: ClueSource::Dct,
            target_anchor,
            sr,
        }
    }

    /// Priority rank; smaller is applied first.
    pub fn rank(&self) -> (usize, usize, usize) {
        match &self.source {
            ClueSource::Dct => (0, 0, 0),
            ClueSource::Timex { distance, order, .. } => (1, *distance, *order),
        }
    }

    /// The clue a link yields under relation vector `sr`.
    pub fn from_link(link: &LinkInstance, sr: SrVector) -> Self {
        let source = match link.kind {
            LinkKind::EventDct => ClueSource::Dct,
            LinkKind::EventTimex => ClueSource::Timex {
                tid: link.target.clone(),
                distance: link.sentence_distance,
                order: link.target_order.unwrap_or(usize::MAX),
            },
        };
        TimeClue {
            source,
            target_anchor: link.target_anchor,
            sr,
        }
    }
}

/// An update refused because it would leave an impossible quadruple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conflict {
    /// Position of the clue in priority order.
    pub clue: usize,
    /// 1-based SR index.
    pub sr: usize,
    pub label: SrLabel,
}

/// Working quadruple of one event during inference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnchorState {
    quad: [DayPoint; 4],
    locks: [bool; 4],
    conflicts: Vec<Conflict>,
    applied: usize,
}

impl Default for AnchorState {
    fn default() -> Self {
        AnchorState::new()
    }
}

/// BLANK earliest bounds are unbounded below, BLANK latest bounds above.
fn later(a: DayPoint, b: DayPoint) -> DayPoint {
    match (a, b) {
        (DayPoint::Day(x), DayPoint::Day(y)) => DayPoint::Day(x.max(y)),
        (DayPoint::Blank, other) | (other, DayPoint::Blank) => other,
    }
}

fn earlier(a: DayPoint, b: DayPoint) -> DayPoint {
    match (a, b) {
        (DayPoint::Day(x), DayPoint::Day(y)) => DayPoint::Day(x.min(y)),
        (DayPoint::Blank, other) | (other, DayPoint::Blank) => other,
    }
}

/// An event cannot end before its earliest begin nor begin after its latest
/// end, so known bounds are pulled in accordingly. BLANKs stay BLANK.
fn normalize(quad: &mut [DayPoint; 4]) {
    if let (DayPoint::Day(begin_e), DayPoint::Day(end_e)) = (quad[0], quad[2]) {
        quad[2] = DayPoint::Day(begin_e.max(end_e));
    }
    if let (DayPoint::Day(begin_l), DayPoint::Day(end_l)) = (quad[1], quad[3]) {
        quad[1] = DayPoint::Day(begin_l.min(end_l));
    }
}

/// The quadruple is well formed and some begin day can precede some end day.
fn feasible(quad: [DayPoint; 4]) -> bool {
    let ordered = match (quad[0], quad[3]) {
        (DayPoint::Day(begin_e), DayPoint::Day(end_l)) => begin_e <= end_l,
        _ => true,
    };
    ordered && TimeAnchor::from_quadruple(quad).is_ok()
}

impl AnchorState {
    pub fn new() -> Self {
        AnchorState {
            quad: [DayPoint::Blank; 4],
            locks: [false; 4],
            conflicts: Vec::new(),
            applied: 0,
        }
    }

    pub fn quadruple(&self) -> [DayPoint; 4] {
        self.quad
    }

    pub fn locks(&self) -> [bool; 4] {
        self.locks
    }

    pub fn conflicts(&self) -> &[Conflict] {
        &self.conflicts
    }

    /// Clues applied so far.
    pub fn applied(&self) -> usize {
        self.applied
    }

    pub fn anchor(&self) -> TimeAnchor {
        TimeAnchor::from_quadruple(self.quad).expect("state keeps a valid quadruple")
    }

    /// Applies the four relations of `clue`, SR1 first.
    pub fn apply(&mut self, clue: &TimeClue) {
        let target = clue.target_anchor.quadruple();
        for (i, label) in clue.sr.labels().into_iter().enumerate() {
            if self.locks[i] || label == SrLabel::Vague {
                continue;
            }
            // SR1, SR2 constrain the event begin; SR1, SR3 look at the target begin.
            let p = if i < 2 { 0 } else { 2 };
            let q = if i % 2 == 0 { 0 } else { 2 };
            let (qe, ql) = (target[q], target[q + 1]);
            let mut next = self.quad;
            match label {
                SrLabel::Equal => {
                    // A BLANK target bound carries no information to copy.
                    if !qe.is_blank() {
                        next[p] = qe;
                    }
                    if !ql.is_blank() {
                        next[p + 1] = ql;
                    }
                }
                SrLabel::After => next[p] = later(next[p], ql),
                SrLabel::Before => next[p + 1] = earlier(next[p + 1], qe),
                SrLabel::Vague => unreachable!(),
            }
            let raw = next;
            normalize(&mut next);
            let disturbs_lock = (0..4).any(|j| {
                let pair = if j < 2 { 0 } else { 2 };
                self.locks[j] && raw[pair..pair + 2] != next[pair..pair + 2]
            });
            if disturbs_lock || !feasible(next) {
                self.conflicts.push(Conflict {
                    clue: self.applied,
                    sr: i + 1,
                    label,
                });
                continue;
            }
            self.quad = next;
            if label == SrLabel::Equal && clue.source == ClueSource::Dct {
                self.locks[i] = true;
            }
        }
        self.applied += 1;
    }
}

/// Functional form of [`AnchorState::apply`].
pub fn apply_clue(mut state: AnchorState, clue: &TimeClue) -> AnchorState {
    state.apply(clue);
    state
}

/// Stable sort into priority order.
pub fn sort_clues(clues: &mut [TimeClue]) {
    clues.sort_by_key(TimeClue::rank);
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceOutcome {
    pub anchor: TimeAnchor,
    pub conflicts: Vec<Conflict>,
    pub clue_count: usize,
    pub has_dct_clue: bool,
}

/// Folds the clues, in priority order, over the all-BLANK state.
pub fn infer_event(clues: &[TimeClue]) -> InferenceOutcome {
    let mut ordered = clues.to_vec();
    sort_clues(&mut ordered);
    let state = ordered.iter().fold(AnchorState::new(), apply_clue);
    InferenceOutcome {
        anchor: state.anchor(),
        conflicts: state.conflicts,
        clue_count: ordered.len(),
        has_dct_clue: ordered.iter().any(|c| c.source == ClueSource::Dct),
    }
}

/// Clues for one event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventClues {
    pub doc: String,
    pub event: String,
    pub clues: Vec<TimeClue>,
}

/// Groups links with their relation vectors by event, keeping the order in
/// which events first appear.
pub fn group_clues<'a>(pairs: impl IntoIterator<Item = (&'a LinkInstance, SrVector)>) -> Vec<EventClues> {
    let mut index: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut groups: Vec<EventClues> = Vec::new();
    for (link, sr) in pairs {
        let key = (link.doc.clone(), link.event.clone());
        let slot = *index.entry(key).or_insert_with(|| {
            groups.push(EventClues {
                doc: link.doc.clone(),
                event: link.event.clone(),
                clues: Vec::new(),
            });
            groups.len() - 1
        });
        groups[slot].clues.push(TimeClue::from_link(link, sr));
    }
    groups
}

/// One line of the inference report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InferenceRecord {
    pub doc: String,
    pub eid: String,
    pub inferred: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
    pub clue_count: usize,
    pub conflicts: Vec<Conflict>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl InferenceRecord {
    pub fn new(group: &EventClues, outcome: &InferenceOutcome, gold: Option<&TimeAnchor>) -> Self {
        let mut notes = Vec::new();
        if !outcome.has_dct_clue {
            notes.push("no DCT clue".to_string());
        }
        InferenceRecord {
            doc: group.doc.clone(),
            eid: group.event.clone(),
            inferred: outcome.anchor.to_string(),
            gold: gold.map(TimeAnchor::to_string),
            clue_count: outcome.clue_count,
            conflicts: outcome.conflicts.clone(),
            notes,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("record serialization is infallible")
    }
}
