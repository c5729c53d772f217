//! Day-granularity time anchors.
//!
//! A [`TimeAnchor`] is a quadruple `((begin_e, begin_l), (end_e, end_l))`: the
//! earliest and latest possible day of the event's first day, and the earliest
//! and latest possible day of its last day. Any of the four values may be
//! [`DayPoint::Blank`] when the bound is open.
//!
//! Anchors have a compact textual form:
//!
//! | form                                   | quadruple                          |
//! |----------------------------------------|------------------------------------|
//! | `1998-01-26`                           | `((d, d), (d, d))`                 |
//! | `after1998-01-26before1998-02-06`      | `((a, b), (a, b))`                 |
//! | `after1998-01-01`                      | `((a, ~), (a, ~))`                 |
//! | `before1998-01-31`                     | `((~, b), (~, b))`                 |
//! | `begin:1998-01-01,end:after1998-02-06` | `((a, a), (b, ~))`                 |
//! | `~`                                    | `((~, ~), (~, ~))`                 |
//!
//! `after`/`before` bounds are inclusive.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, NaiveDateTime, Weekday};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MIN_YEAR: i32 = 1;
pub const MAX_YEAR: i32 = 9999;

/// Token used for an open bound pair in anchor strings.
pub const BLANK_TOKEN: &str = "~";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("invalid calendar date {year:04}-{month:02}-{day:02}")]
    InvalidDate { year: i32, month: u32, day: u32 },
    #[error("year {0} outside supported range {MIN_YEAR}..={MAX_YEAR}")]
    YearOutOfRange(i32),
    #[error("bound pair earliest {earliest} is after latest {latest}")]
    InvertedPair { earliest: NaiveDate, latest: NaiveDate },
    #[error("anchor {which} bound of begin ({begin}) is after that of end ({end})")]
    InvertedAnchor {
        which: &'static str,
        begin: NaiveDate,
        end: NaiveDate,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnchorParseError {
    #[error("anchor syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("anchor date error at byte {offset}: {source}")]
    Date {
        offset: usize,
        #[source]
        source: TimeError,
    },
}

impl AnchorParseError {
    pub fn offset(&self) -> usize {
        match self {
            AnchorParseError::Syntax { offset, .. } | AnchorParseError::Date { offset, .. } => {
                *offset
            }
        }
    }
}

/// A calendar day, or an open (unknown) bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DayPoint {
    Blank,
    Day(NaiveDate),
}

/// Three-valued comparison of two [`DayPoint`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DayOrdering {
    Before,
    Equal,
    After,
    Unknown,
}

impl DayPoint {
    pub fn from_ymd(year: i32, month: u32, day: u32) -> Result<Self, TimeError> {
        if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
            return Err(TimeError::YearOutOfRange(year));
        }
        NaiveDate::from_ymd_opt(year, month, day)
            .map(DayPoint::Day)
            .ok_or(TimeError::InvalidDate { year, month, day })
    }

    pub fn from_date(date: NaiveDate) -> Result<Self, TimeError> {
        if !(MIN_YEAR..=MAX_YEAR).contains(&date.year()) {
            return Err(TimeError::YearOutOfRange(date.year()));
        }
        Ok(DayPoint::Day(date))
    }

    pub fn is_blank(self) -> bool {
        matches!(self, DayPoint::Blank)
    }

    pub fn date(self) -> Option<NaiveDate> {
        match self {
            DayPoint::Blank => None,
            DayPoint::Day(d) => Some(d),
        }
    }

    /// Shift by a signed number of days. Returns `None` for BLANK or when the
    /// result leaves the supported year range.
    pub fn offset_days(self, days: i64) -> Option<DayPoint> {
        let d = self.date()?;
        let shifted = if days >= 0 {
            d.checked_add_days(Days::new(days as u64))?
        } else {
            d.checked_sub_days(Days::new(days.unsigned_abs()))?
        };
        DayPoint::from_date(shifted).ok()
    }
}

impl fmt::Display for DayPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DayPoint::Blank => f.write_str(BLANK_TOKEN),
            DayPoint::Day(d) => write!(f, "{:04}-{:02}-{:02}", d.year(), d.month(), d.day()),
        }
    }
}

/// Compare two days; any comparison involving BLANK is [`DayOrdering::Unknown`].
pub fn compare_days(a: DayPoint, b: DayPoint) -> DayOrdering {
    match (a, b) {
        (DayPoint::Day(x), DayPoint::Day(y)) => match x.cmp(&y) {
            Ordering::Less => DayOrdering::Before,
            Ordering::Equal => DayOrdering::Equal,
            Ordering::Greater => DayOrdering::After,
        },
        _ => DayOrdering::Unknown,
    }
}

/// Earliest and latest possible day of one endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundPair {
    earliest: DayPoint,
    latest: DayPoint,
}

impl BoundPair {
    pub const BLANK: BoundPair = BoundPair {
        earliest: DayPoint::Blank,
        latest: DayPoint::Blank,
    };

    pub fn new(earliest: DayPoint, latest: DayPoint) -> Result<Self, TimeError> {
        if let (DayPoint::Day(e), DayPoint::Day(l)) = (earliest, latest) {
            if e > l {
                return Err(TimeError::InvertedPair {
                    earliest: e,
                    latest: l,
                });
            }
        }
        Ok(BoundPair { earliest, latest })
    }

    /// A pair pinned to one known day.
    pub fn certain(day: NaiveDate) -> Self {
        BoundPair {
            earliest: DayPoint::Day(day),
            latest: DayPoint::Day(day),
        }
    }

    pub fn earliest(&self) -> DayPoint {
        self.earliest
    }

    pub fn latest(&self) -> DayPoint {
        self.latest
    }

    /// Both bounds known and equal.
    pub fn is_certain(&self) -> bool {
        matches!((self.earliest, self.latest), (DayPoint::Day(a), DayPoint::Day(b)) if a == b)
    }
}

/// Quadruple `((begin_e, begin_l), (end_e, end_l))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimeAnchor {
    begin: BoundPair,
    end: BoundPair,
}

fn check_not_after(which: &'static str, begin: DayPoint, end: DayPoint) -> Result<(), TimeError> {
    if let (DayPoint::Day(b), DayPoint::Day(e)) = (begin, end) {
        if b > e {
            return Err(TimeError::InvertedAnchor { which, begin: b, end: e });
        }
    }
    Ok(())
}

impl TimeAnchor {
    pub const BLANK: TimeAnchor = TimeAnchor {
        begin: BoundPair::BLANK,
        end: BoundPair::BLANK,
    };

    pub fn new(begin: BoundPair, end: BoundPair) -> Result<Self, TimeError> {
        check_not_after("earliest", begin.earliest, end.earliest)?;
        check_not_after("latest", begin.latest, end.latest)?;
        Ok(TimeAnchor { begin, end })
    }

    /// Build from the four raw values, validating every invariant.
    pub fn from_quadruple(values: [DayPoint; 4]) -> Result<Self, TimeError> {
        let begin = BoundPair::new(values[0], values[1])?;
        let end = BoundPair::new(values[2], values[3])?;
        TimeAnchor::new(begin, end)
    }

    /// Single-Day anchor: begin and end share one bound pair.
    pub fn single_day(pair: BoundPair) -> Self {
        TimeAnchor {
            begin: pair,
            end: pair,
        }
    }

    pub fn certain_day(day: NaiveDate) -> Self {
        TimeAnchor::single_day(BoundPair::certain(day))
    }

    /// Certain Multi-Day span covering `first..=last`.
    pub fn certain_span(first: NaiveDate, last: NaiveDate) -> Result<Self, TimeError> {
        TimeAnchor::new(BoundPair::certain(first), BoundPair::certain(last))
    }

    pub fn begin(&self) -> BoundPair {
        self.begin
    }

    pub fn end(&self) -> BoundPair {
        self.end
    }

    pub fn quadruple(&self) -> [DayPoint; 4] {
        [
            self.begin.earliest,
            self.begin.latest,
            self.end.earliest,
            self.end.latest,
        ]
    }

    pub fn is_single_day(&self) -> bool {
        self.begin == self.end
    }

    /// No BLANK values and each pair pinned to a single day.
    pub fn is_certain(&self) -> bool {
        self.begin.is_certain() && self.end.is_certain()
    }

    pub fn has_blank(&self) -> bool {
        self.quadruple().iter().any(|d| d.is_blank())
    }
}

impl fmt::Display for TimeAnchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_single_day() {
            write_pair(f, self.begin)
        } else {
            f.write_str("begin:")?;
            write_pair(f, self.begin)?;
            f.write_str(",end:")?;
            write_pair(f, self.end)
        }
    }
}

fn write_pair(f: &mut fmt::Formatter<'_>, pair: BoundPair) -> fmt::Result {
    match (pair.earliest, pair.latest) {
        (DayPoint::Blank, DayPoint::Blank) => f.write_str(BLANK_TOKEN),
        (DayPoint::Day(e), DayPoint::Day(l)) if e == l => write!(f, "{}", pair.earliest),
        (DayPoint::Day(_), DayPoint::Blank) => write!(f, "after{}", pair.earliest),
        (DayPoint::Blank, DayPoint::Day(_)) => write!(f, "before{}", pair.latest),
        (DayPoint::Day(_), DayPoint::Day(_)) => {
            write!(f, "after{}before{}", pair.earliest, pair.latest)
        }
    }
}

/// Canonical anchor string; [`parse_anchor`] inverts it exactly.
pub fn anchor_to_string(anchor: &TimeAnchor) -> String {
    anchor.to_string()
}

/// Parse an anchor string (see the module docs for the grammar).
pub fn parse_anchor(text: &str) -> Result<TimeAnchor, AnchorParseError> {
    let mut cursor = Cursor { text, pos: 0 };
    let anchor = if cursor.rest().starts_with("begin:") {
        cursor.pos += "begin:".len();
        let begin_at = cursor.pos;
        let begin = cursor.pair()?;
        cursor.skip_separators();
        cursor.expect("end:")?;
        let end = cursor.pair()?;
        TimeAnchor::new(begin, end)
            .map_err(|source| AnchorParseError::Date { offset: begin_at, source })?
    } else {
        TimeAnchor::single_day(cursor.pair()?)
    };
    if cursor.pos != text.len() {
        return Err(cursor.syntax("unexpected trailing input"));
    }
    Ok(anchor)
}

impl FromStr for TimeAnchor {
    type Err = AnchorParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_anchor(s)
    }
}

impl Serialize for TimeAnchor {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeAnchor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_anchor(&s).map_err(serde::de::Error::custom)
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn syntax(&self, message: &str) -> AnchorParseError {
        AnchorParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, literal: &str) -> Result<(), AnchorParseError> {
        if self.rest().starts_with(literal) {
            self.pos += literal.len();
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{literal}`")))
        }
    }

    fn skip_separators(&mut self) {
        let skipped = self
            .rest()
            .bytes()
            .take_while(|b| *b == b',' || *b == b' ')
            .count();
        self.pos += skipped;
    }

    /// One single-day form: a date, `afterD`, `beforeD`, `afterDbeforeD` or `~`.
    fn pair(&mut self) -> Result<BoundPair, AnchorParseError> {
        let start = self.pos;
        if self.rest().starts_with(BLANK_TOKEN) {
            self.pos += BLANK_TOKEN.len();
            return Ok(BoundPair::BLANK);
        }
        let (earliest, latest) = if self.rest().starts_with("after") {
            self.pos += "after".len();
            let earliest = self.date()?;
            let save = self.pos;
            self.skip_separators();
            if self.rest().starts_with("before") {
                self.pos += "before".len();
                (earliest, self.date()?)
            } else {
                self.pos = save;
                (earliest, DayPoint::Blank)
            }
        } else if self.rest().starts_with("before") {
            self.pos += "before".len();
            (DayPoint::Blank, self.date()?)
        } else {
            let d = self.date()?;
            (d, d)
        };
        BoundPair::new(earliest, latest)
            .map_err(|source| AnchorParseError::Date { offset: start, source })
    }

    /// Exactly `YYYY-MM-DD`.
    fn date(&mut self) -> Result<DayPoint, AnchorParseError> {
        let start = self.pos;
        let bytes = self.rest().as_bytes();
        if bytes.len() < 10 {
            return Err(self.syntax("expected date YYYY-MM-DD"));
        }
        let digits_ok = bytes[..10]
            .iter()
            .enumerate()
            .all(|(i, b)| if i == 4 || i == 7 { *b == b'-' } else { b.is_ascii_digit() });
        if !digits_ok {
            return Err(self.syntax("expected date YYYY-MM-DD"));
        }
        let field = |r: std::ops::Range<usize>| -> u32 {
            bytes[r].iter().fold(0, |acc, b| acc * 10 + u32::from(b - b'0'))
        };
        let (y, m, d) = (field(0..4) as i32, field(5..7), field(8..10));
        self.pos += 10;
        DayPoint::from_ymd(y, m, d).map_err(|source| AnchorParseError::Date { offset: start, source })
    }
}

/// TIMEX3 `type` attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TimexType {
    Date,
    Time,
    Duration,
    Set,
}

impl FromStr for TimexType {
    type Err = NormalizeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "DATE" => Ok(TimexType::Date),
            "TIME" => Ok(TimexType::Time),
            "DURATION" => Ok(TimexType::Duration),
            "SET" => Ok(TimexType::Set),
            other => Err(NormalizeError::UnknownType(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("malformed TIMEX3 value {0:?}")]
    Malformed(String),
    #[error("TIMEX3 value {value:?} names an invalid date: {source}")]
    InvalidDate {
        value: String,
        #[source]
        source: TimeError,
    },
    #[error("unknown TIMEX3 type {0:?}")]
    UnknownType(String),
}

/// Normalize a TIMEX3 value to an anchor.
///
/// Day values and sub-day times become Certain Single-Day anchors; months,
/// years, ISO weeks, quarters, halves, decades and centuries become Certain
/// Multi-Day anchors over their calendar extent. `PRESENT_REF` copies `dct`.
/// Durations, sets, `PAST_REF`/`FUTURE_REF`, seasons and values with
/// unspecified (`X`) digits return `Ok(None)`.
pub fn normalize_timex(
    value: &str,
    timex_type: TimexType,
    dct: &TimeAnchor,
) -> Result<Option<TimeAnchor>, NormalizeError> {
    let v = value.trim();
    if v.is_empty() {
        return Err(NormalizeError::Malformed(value.to_string()));
    }
    match v {
        "PRESENT_REF" => return Ok(Some(*dct)),
        "PAST_REF" | "FUTURE_REF" => return Ok(None),
        _ => {}
    }
    if matches!(timex_type, TimexType::Duration | TimexType::Set) {
        return Ok(None);
    }
    if v.starts_with('P') || v.starts_with("T") {
        // Duration-like or bare time of day: no position on the axis.
        return if v.len() > 1 { Ok(None) } else { Err(NormalizeError::Malformed(value.to_string())) };
    }
    let malformed = || NormalizeError::Malformed(value.to_string());
    let date_err = |source: TimeError| NormalizeError::InvalidDate {
        value: value.to_string(),
        source,
    };

    // Split off a time part: YYYY-MM-DDThh:mm, YYYY-MM-DDTMO, ...
    let (date_part, time_part) = match v.find('T') {
        Some(i) => (&v[..i], Some(&v[i + 1..])),
        None => (v, None),
    };
    if let Some(t) = time_part {
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_alphanumeric() || b":.+-".contains(&b)) {
            return Err(malformed());
        }
    }
    if date_part.contains('X') || date_part.contains('x') {
        return if date_part.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-') {
            Ok(None)
        } else {
            Err(malformed())
        };
    }

    let parts: Vec<&str> = date_part.split('-').collect();
    let num = |s: &str, len: usize| -> Option<u32> {
        (s.len() == len && s.bytes().all(|b| b.is_ascii_digit())).then(|| s.parse().ok())?
    };
    let span = |first: NaiveDate, last: NaiveDate| -> Result<Option<TimeAnchor>, NormalizeError> {
        DayPoint::from_date(first).map_err(date_err)?;
        DayPoint::from_date(last).map_err(date_err)?;
        Ok(Some(TimeAnchor::certain_span(first, last).map_err(date_err)?))
    };
    let ymd = |y: i32, m: u32, d: u32| -> Result<NaiveDate, NormalizeError> {
        match DayPoint::from_ymd(y, m, d).map_err(date_err)? {
            DayPoint::Day(date) => Ok(date),
            DayPoint::Blank => unreachable!(),
        }
    };

    // Sub-day values must carry a full date.
    if time_part.is_some() && parts.len() != 3 {
        return Err(malformed());
    }

    match parts.as_slice() {
        [y] => {
            if let Some(year) = num(y, 4) {
                let year = year as i32;
                return span(ymd(year, 1, 1)?, ymd(year, 12, 31)?);
            }
            if let Some(decade) = num(y, 3) {
                let start = decade as i32 * 10;
                return span(ymd(start.max(MIN_YEAR), 1, 1)?, ymd(start + 9, 12, 31)?);
            }
            if let Some(century) = num(y, 2) {
                let start = century as i32 * 100;
                return span(ymd(start.max(MIN_YEAR), 1, 1)?, ymd(start + 99, 12, 31)?);
            }
            Err(malformed())
        }
        [y, second] => {
            let year = num(y, 4).ok_or_else(malformed)? as i32;
            if let Some(month) = num(second, 2) {
                let first = ymd(year, month, 1)?;
                return span(first, last_day_of_month(first));
            }
            if let Some(week) = second.strip_prefix('W').and_then(|w| num(w, 2)) {
                let monday = NaiveDate::from_isoywd_opt(year, week, Weekday::Mon)
                    .ok_or_else(malformed)?;
                return span(monday, monday + Days::new(6));
            }
            if let Some(q) = second.strip_prefix('Q').and_then(|q| num(q, 1)) {
                if !(1..=4).contains(&q) {
                    return Err(malformed());
                }
                let first = ymd(year, 3 * q - 2, 1)?;
                return span(first, last_day_of_month(ymd(year, 3 * q, 1)?));
            }
            if let Some(h) = second.strip_prefix('H').and_then(|h| num(h, 1)) {
                return match h {
                    1 => span(ymd(year, 1, 1)?, ymd(year, 6, 30)?),
                    2 => span(ymd(year, 7, 1)?, ymd(year, 12, 31)?),
                    _ => Err(malformed()),
                };
            }
            if matches!(*second, "SP" | "SU" | "FA" | "WI") {
                return Ok(None);
            }
            Err(malformed())
        }
        [y, w, "WE"] if w.starts_with('W') => {
            let year = num(y, 4).ok_or_else(malformed)? as i32;
            let week = num(&w[1..], 2).ok_or_else(malformed)?;
            let saturday =
                NaiveDate::from_isoywd_opt(year, week, Weekday::Sat).ok_or_else(malformed)?;
            span(saturday, saturday + Days::new(1))
        }
        [y, m, d] => {
            let year = num(y, 4).ok_or_else(malformed)? as i32;
            let month = num(m, 2).ok_or_else(malformed)?;
            let day = num(d, 2).ok_or_else(malformed)?;
            Ok(Some(TimeAnchor::certain_day(ymd(year, month, day)?)))
        }
        _ => Err(malformed()),
    }
}

fn last_day_of_month(first: NaiveDate) -> NaiveDate {
    let (y, m) = if first.month() == 12 {
        (first.year() + 1, 1)
    } else {
        (first.year(), first.month() + 1)
    };
    match NaiveDate::from_ymd_opt(y, m, 1) {
        Some(next) => next.pred_opt().unwrap_or(first),
        // December 9999: the month still ends on the 31st.
        None => NaiveDate::from_ymd_opt(first.year(), 12, 31).unwrap_or(first),
    }
}

/// Floors an ISO date-time (as found in DCT attributes) to its day.
pub fn floor_to_day(value: &str) -> Option<NaiveDate> {
    NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M:%S")
        .or_else(|_| NaiveDateTime::parse_from_str(value, "%Y-%m-%dT%H:%M"))
        .map(|dt| dt.date())
        .ok()
        .or_else(|| NaiveDate::parse_from_str(value, "%Y-%m-%d").ok())
}
