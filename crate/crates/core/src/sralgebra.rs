//! Sub-level relations between two time anchors.
//!
//! Rather than one interval relation, two anchors are related by four
//! endpoint-pair labels:
//!
//! * SR1: event begin pair vs target begin pair
//! * SR2: event begin pair vs target end pair
//! * SR3: event end pair vs target begin pair
//! * SR4: event end pair vs target end pair

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timecore::{compare_days, BoundPair, DayOrdering, DayPoint, TimeAnchor};

/// Label of one sub-level relation. The declaration order is also the
/// argmax tie-break order and the layout of classifier outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SrLabel {
    Equal,
    After,
    Before,
    Vague,
}

impl SrLabel {
    pub const ALL: [SrLabel; 4] = [SrLabel::Equal, SrLabel::After, SrLabel::Before, SrLabel::Vague];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<SrLabel> {
        SrLabel::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SrLabel::Equal => "equal",
            SrLabel::After => "after",
            SrLabel::Before => "before",
            SrLabel::Vague => "vague",
        }
    }

    /// after <-> before; equal and vague are their own mirror.
    pub fn mirrored(self) -> SrLabel {
        match self {
            SrLabel::After => SrLabel::Before,
            SrLabel::Before => SrLabel::After,
            other => other,
        }
    }
}

impl fmt::Display for SrLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown SR label {0:?}")]
pub struct UnknownLabel(pub String);

impl FromStr for SrLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SrLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

/// `[SR1, SR2, SR3, SR4]`; serializes as a 4-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SrVector(pub [SrLabel; 4]);

impl SrVector {
    pub const ALL_EQUAL: SrVector = SrVector([SrLabel::Equal; 4]);
    pub const ALL_VAGUE: SrVector = SrVector([SrLabel::Vague; 4]);

    pub fn labels(&self) -> [SrLabel; 4] {
        self.0
    }

    pub fn get(&self, i: usize) -> SrLabel {
        self.0[i]
    }

    /// The relation of target to event, for Certain inputs.
    pub fn transposed(&self) -> SrVector {
        let [a, b, c, d] = self.0;
        SrVector([a.mirrored(), c.mirrored(), b.mirrored(), d.mirrored()])
    }
}

impl fmt::Display for SrVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[{a}, {b}, {c}, {d}]")
    }
}

fn is(a: DayPoint, b: DayPoint, wanted: &[DayOrdering]) -> bool {
    wanted.contains(&compare_days(a, b))
}

pub(crate) fn equal_rule(e: BoundPair, t: BoundPair) -> bool {
    is(e.earliest(), t.earliest(), &[DayOrdering::Equal])
        && is(e.latest(), t.latest(), &[DayOrdering::Equal])
}

pub(crate) fn after_rule(e: BoundPair, t: BoundPair) -> bool {
    is(e.earliest(), t.latest(), &[DayOrdering::After, DayOrdering::Equal])
        && (is(e.latest(), t.latest(), &[DayOrdering::After]) || e.latest().is_blank())
}

pub(crate) fn before_rule(e: BoundPair, t: BoundPair) -> bool {
    is(e.latest(), t.earliest(), &[DayOrdering::Before, DayOrdering::Equal])
        && (is(e.earliest(), t.earliest(), &[DayOrdering::Before]) || e.earliest().is_blank())
}

/// Label one event bound pair against one target bound pair.
///
/// Rules are tried in the order equal, after, before; anything else is
/// vague. A comparison with a BLANK operand is false, except for the explicit
/// BLANK escape on the event side of after/before.
pub fn compare_pairs(e: BoundPair, t: BoundPair) -> SrLabel {
    if equal_rule(e, t) {
        SrLabel::Equal
    } else if after_rule(e, t) {
        SrLabel::After
    } else if before_rule(e, t) {
        SrLabel::Before
    } else {
        SrLabel::Vague
    }
}

/// The four sub-level relations of `event` against `target`.
pub fn induce_sr(event: &TimeAnchor, target: &TimeAnchor) -> SrVector {
    SrVector([
        compare_pairs(event.begin(), target.begin()),
        compare_pairs(event.begin(), target.end()),
        compare_pairs(event.end(), target.begin()),
        compare_pairs(event.end(), target.end()),
    ])
}

/// The 13 relations of Allen's interval algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllenRelation {
    Before,
    After,
    Meets,
    MetBy,
    Overlaps,
    OverlappedBy,
    Starts,
    StartedBy,
    During,
    Contains,
    Finishes,
    FinishedBy,
    Equals,
}

impl AllenRelation {
    pub const ALL: [AllenRelation; 13] = [
        AllenRelation::Before,
        AllenRelation::After,
        AllenRelation::Meets,
        AllenRelation::MetBy,
        AllenRelation::Overlaps,
        AllenRelation::OverlappedBy,
        AllenRelation::Starts,
        AllenRelation::StartedBy,
        AllenRelation::During,
        AllenRelation::Contains,
        AllenRelation::Finishes,
        AllenRelation::FinishedBy,
        AllenRelation::Equals,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllenError {
    #[error("anchor {0} is not Certain")]
    NotCertain(String),
    #[error("degenerate interval pair has no unique Allen relation")]
    Degenerate,
}

/// Allen relation of two Certain anchors, decided by endpoint comparisons.
///
/// Single-day intervals are accepted only where the relation stays unique
/// (two identical days are `Equals`, a day strictly inside a span is
/// `During`, and so on); touching degenerate cases are rejected.
pub fn allen_of(event: &TimeAnchor, target: &TimeAnchor) -> Result<AllenRelation, AllenError> {
    let point = |a: &TimeAnchor| -> Result<_, AllenError> {
        match (a.is_certain(), a.begin().earliest().date(), a.end().earliest().date()) {
            (true, Some(b), Some(e)) => Ok((b, e)),
            _ => Err(AllenError::NotCertain(a.to_string())),
        }
    };
    let (eb, ee) = point(event)?;
    let (tb, te) = point(target)?;
    use std::cmp::Ordering::*;
    use AllenRelation::*;
    let e_point = eb == ee;
    let t_point = tb == te;
    if e_point && t_point && eb == tb {
        return Ok(Equals);
    }
    let relation = match (eb.cmp(&tb), eb.cmp(&te), ee.cmp(&tb), ee.cmp(&te)) {
        (_, _, Less, _) => Before,
        (_, Greater, _, _) => After,
        (Less, _, Equal, Less) => Meets,
        (Greater, Equal, _, Greater) => MetBy,
        (Less, _, Greater, Less) => Overlaps,
        (Greater, Less, _, Greater) => OverlappedBy,
        (Equal, _, _, Less) => Starts,
        (Equal, _, _, Greater) => StartedBy,
        (Greater, _, _, Less) => During,
        (Less, _, _, Greater) => Contains,
        (Greater, _, _, Equal) => Finishes,
        (Less, _, _, Equal) => FinishedBy,
        (Equal, _, _, Equal) => Equals,
    };
    // A point interval touching the other interval's endpoint is ambiguous
    // (it both meets and starts, say).
    if (e_point || t_point) && (eb == te || ee == tb) {
        return Err(AllenError::Degenerate);
    }
    Ok(relation)
}
