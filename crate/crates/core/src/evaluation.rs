//! Scores: per-SR precision/recall/F1, complete match, event-time accuracy,
//! Krippendorff's α and the gold-relation oracle over sentence windows.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{generate_dct_links, generate_links, Document};
use crate::inference::{group_clues, infer_event};
use crate::sralgebra::{SrLabel, SrVector};
use crate::timecore::TimeAnchor;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("{gold} gold items but {predicted} predictions")]
    LengthMismatch { gold: usize, predicted: usize },
    #[error("agreement needs at least two annotators, found {0}")]
    TooFewAnnotators(usize),
    #[error("agreement needs at least two items coded at least twice, found {0}")]
    TooFewItems(usize),
    #[error("line {line}: {message}")]
    Table { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabelScores {
    pub label: SrLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold occurrences.
    pub support: usize,
    pub predicted: usize,
    pub true_positive: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl LabelScores {
    fn new(label: SrLabel, true_positive: usize, predicted: usize, support: usize) -> Self {
        let precision = ratio(true_positive, predicted);
        let recall = ratio(true_positive, support);
        LabelScores {
            label,
            precision,
            recall,
            f1: f1(precision, recall),
            support,
            predicted,
            true_positive,
        }
    }
}

/// Scores for one SR position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SrScores {
    pub labels: [LabelScores; 4],
    /// Pooled over labels; with every instance predicted this is accuracy.
    pub micro_f1: f64,
    /// Mean over labels that occur in gold or predictions.
    pub macro_f1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompleteMatch {
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Correct over gold instances.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub instances: usize,
    pub per_sr: [SrScores; 4],
    pub complete_match: CompleteMatch,
}

/// Scores aligned gold and predicted vectors.
pub fn per_sr_scores(golds: &[SrVector], preds: &[SrVector]) -> Result<ScoreReport, EvalError> {
    if golds.len() != preds.len() {
        return Err(EvalError::LengthMismatch {
            gold: golds.len(),
            predicted: preds.len(),
        });
    }
    let preds: Vec<Option<SrVector>> = preds.iter().copied().map(Some).collect();
    let report = per_sr_scores_partial(golds, &preds)?;
    debug_assert!(
        golds.is_empty() || (report.complete_match.f1 - report.complete_match.accuracy).abs() < 1e-12
    );
    Ok(report)
}

/// Like [`per_sr_scores`], but an instance may lack a prediction; it then
/// counts against recall only.
pub fn per_sr_scores_partial(golds: &[SrVector], preds: &[Option<SrVector>]) -> Result<ScoreReport, EvalError> {
    if golds.len() != preds.len() {
        return Err(EvalError::LengthMismatch {
            gold: golds.len(),
            predicted: preds.len(),
        });
    }
    let per_sr = std::array::from_fn(|i| {
        let mut tp = [0usize; 4];
        let mut predicted = [0usize; 4];
        let mut support = [0usize; 4];
        for (g, p) in golds.iter().zip(preds) {
            let g = g.get(i).index();
            support[g] += 1;
            if let Some(p) = p {
                let p = p.get(i).index();
                predicted[p] += 1;
                if p == g {
                    tp[g] += 1;
                }
            }
        }
        let labels = std::array::from_fn(|j| LabelScores::new(SrLabel::ALL[j], tp[j], predicted[j], support[j]));
        let sum = |xs: [usize; 4]| xs.iter().sum::<usize>();
        let micro_p = ratio(sum(tp), sum(predicted));
        let micro_r = ratio(sum(tp), sum(support));
        let present: Vec<&LabelScores> = labels
            .iter()
            .filter(|l: &&LabelScores| l.support > 0 || l.predicted > 0)
            .collect();
        let macro_f1 = if present.is_empty() {
            0.0
        } else {
            present.iter().map(|l| l.f1).sum::<f64>() / present.len() as f64
        };
        SrScores {
            labels,
            micro_f1: f1(micro_p, micro_r),
            macro_f1,
        }
    });
    let predicted = preds.iter().filter(|p| p.is_some()).count();
    let correct = golds
        .iter()
        .zip(preds)
        .filter(|(g, p)| p.as_ref() == Some(*g))
        .count();
    let precision = ratio(correct, predicted);
    let recall = ratio(correct, golds.len());
    Ok(ScoreReport {
        instances: golds.len(),
        per_sr,
        complete_match: CompleteMatch {
            correct,
            predicted,
            gold: golds.len(),
            precision,
            recall,
            f1: f1(precision, recall),
            accuracy: recall,
        },
    })
}

impl ScoreReport {
    /// Aligned text table: one row per SR and label, then the aggregates.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "instances: {}", self.instances);
        let _ = writeln!(out, "{:<5} {:<7} {:>9} {:>9} {:>9} {:>8}", "SR", "label", "precision", "recall", "f1", "support");
        for (i, sr) in self.per_sr.iter().enumerate() {
            for l in &sr.labels {
                let _ = writeln!(
                    out,
                    "{:<5} {:<7} {:>9.4} {:>9.4} {:>9.4} {:>8}",
                    format!("SR{}", i + 1),
                    l.label.as_str(),
                    l.precision,
                    l.recall,
                    l.f1,
                    l.support
                );
            }
            let _ = writeln!(
                out,
                "{:<5} {:<7} {:>9} {:>9} {:>9.4} {:>8}",
                format!("SR{}", i + 1),
                "micro",
                "",
                "",
                sr.micro_f1,
                ""
            );
            let _ = writeln!(
                out,
                "{:<5} {:<7} {:>9} {:>9} {:>9.4} {:>8}",
                format!("SR{}", i + 1),
                "macro",
                "",
                "",
                sr.macro_f1,
                ""
            );
        }
        let c = &self.complete_match;
        let _ = writeln!(
            out,
            "complete match: f1 {:.4}, accuracy {:.4} ({}/{})",
            c.f1, c.accuracy, c.correct, c.gold
        );
        out
    }

    /// The compact per-SR row: micro F1 for SR1..SR4 and complete match.
    pub fn summary_row(&self) -> [f64; 5] {
        [
            self.per_sr[0].micro_f1,
            self.per_sr[1].micro_f1,
            self.per_sr[2].micro_f1,
            self.per_sr[3].micro_f1,
            self.complete_match.f1,
        ]
    }
}

/// Share of events whose inferred anchor has the same canonical form as the
/// gold anchor. Empty input scores 0.
pub fn event_time_accuracy(gold: &[TimeAnchor], inferred: &[TimeAnchor]) -> Result<f64, EvalError> {
    if gold.len() != inferred.len() {
        return Err(EvalError::LengthMismatch {
            gold: gold.len(),
            predicted: inferred.len(),
        });
    }
    let hits = gold
        .iter()
        .zip(inferred)
        .filter(|(g, i)| g.to_string() == i.to_string())
        .count();
    Ok(ratio(hits, gold.len()))
}

/// Nominal codings: one row per item, one column per annotator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IaaRecord {
    pub annotators: Vec<String>,
    pub items: Vec<IaaItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IaaItem {
    pub id: String,
    /// `None` where the annotator left the item uncoded.
    pub codings: Vec<Option<String>>,
}

/// Cell text that marks a missing coding in the tabular form.
pub const MISSING_CODING: &str = "NA";

impl IaaRecord {
    /// Tab-separated table: a header `item<TAB>annotator...` and one row per
    /// item. Empty cells and `NA` are missing codings.
    pub fn parse_tsv(text: &str) -> Result<IaaRecord, EvalError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let (_, header) = lines.next().ok_or(EvalError::Table {
            line: 1,
            message: "missing header".into(),
        })?;
        let annotators: Vec<String> = header.split('\t').skip(1).map(|s| s.trim().to_string()).collect();
        let mut items = Vec::new();
        for (i, line) in lines {
            let mut cells = line.split('\t');
            let id = cells.next().unwrap_or_default().trim().to_string();
            let codings: Vec<Option<String>> = cells
                .map(str::trim)
                .map(|c| (!c.is_empty() && c != MISSING_CODING).then(|| c.to_string()))
                .collect();
            if codings.len() > annotators.len() {
                return Err(EvalError::Table {
                    line: i + 1,
                    message: format!("{} codings for {} annotators", codings.len(), annotators.len()),
                });
            }
            let mut codings = codings;
            codings.resize(annotators.len(), None);
            items.push(IaaItem { id, codings });
        }
        Ok(IaaRecord { annotators, items })
    }
}

/// Krippendorff's α with the nominal metric, from the coincidence matrix.
///
/// Items coded fewer than twice are not pairable and are ignored. When every
/// pairable value is the same category the expected disagreement vanishes and
/// α is 1 by convention.
pub fn krippendorff_alpha(record: &IaaRecord) -> Result<f64, EvalError> {
    if record.annotators.len() < 2 {
        return Err(EvalError::TooFewAnnotators(record.annotators.len()));
    }
    let mut coincidence: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    let mut pairable_items = 0;
    for item in &record.items {
        let values: Vec<&str> = item.codings.iter().flatten().map(String::as_str).collect();
        let m = values.len();
        if m < 2 {
            continue;
        }
        pairable_items += 1;
        for (i, a) in values.iter().enumerate() {
            for (j, b) in values.iter().enumerate() {
                if i != j {
                    *coincidence.entry((a, b)).or_default() += 1.0 / (m - 1) as f64;
                }
            }
        }
    }
    if pairable_items < 2 {
        return Err(EvalError::TooFewItems(pairable_items));
    }
    let mut marginals: BTreeMap<&str, f64> = BTreeMap::new();
    for (&(c, _), &o) in &coincidence {
        *marginals.entry(c).or_default() += o;
    }
    let n: f64 = marginals.values().sum();
    let observed: f64 = coincidence.iter().filter(|((c, k), _)| c != k).map(|(_, o)| o).sum();
    let expected: f64 = marginals
        .iter()
        .flat_map(|(c, nc)| marginals.iter().filter(move |(k, _)| *k != c).map(move |(_, nk)| nc * nk))
        .sum();
    if expected == 0.0 {
        return Ok(1.0);
    }
    Ok(1.0 - (n - 1.0) * observed / expected)
}

/// Which links the oracle feeds to inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", content = "sw")]
pub enum OracleMode {
    /// E-D links only.
    DctOnly,
    /// E-D plus E-T links within this many sentences.
    Window(usize),
}

impl std::fmt::Display for OracleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleMode::DctOnly => f.write_str("E-D"),
            OracleMode::Window(sw) => write!(f, "E-D + E-T (sw={sw})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub mode: OracleMode,
    pub events: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub links: usize,
    pub avg_links: f64,
}

/// Inference from gold relations: every link of every gold-anchored event
/// gets the vector induced from the gold anchor.
pub fn oracle_test(docs: &[Document], mode: OracleMode) -> OracleResult {
    let mut events = 0;
    let mut correct = 0;
    let mut links_total = 0;
    for doc in docs {
        let links = match mode {
            OracleMode::DctOnly => generate_dct_links(doc),
            OracleMode::Window(sw) => generate_links(doc, sw),
        };
        let gold_of: BTreeMap<&str, TimeAnchor> = doc
            .events
            .iter()
            .filter_map(|e| Some((e.eid.as_str(), e.gold_anchor?)))
            .collect();
        let pairs = links.iter().filter_map(|l| Some((l, l.gold?)));
        for group in group_clues(pairs) {
            let gold = gold_of[group.event.as_str()];
            let outcome = infer_event(&group.clues);
            events += 1;
            links_total += group.clues.len();
            if outcome.anchor.to_string() == gold.to_string() {
                correct += 1;
            }
        }
    }
    OracleResult {
        mode,
        events,
        correct,
        accuracy: ratio(correct, events),
        links: links_total,
        avg_links: if events == 0 { 0.0 } else { links_total as f64 / events as f64 },
    }
}

/// Aligned text table of oracle runs.
pub fn oracle_table(results: &[OracleResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<20} {:>8} {:>8} {:>10} {:>8}", "setting", "events", "correct", "accuracy", "links");
    for r in results {
        let _ = writeln!(
            out,
            "{:<20} {:>8} {:>8} {:>10.4} {:>8.2}",
            r.mode.to_string(),
            r.events,
            r.correct,
            r.accuracy,
            r.avg_links
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use SrLabel::*;

    fn v(labels: [SrLabel; 4]) -> SrVector {
        SrVector(labels)
    }

    #[test]
    fn perfect_predictions() {
        let golds = vec![v([Equal, After, Before, Vague]), v([After; 4]), v([Before, Before, Vague, Vague])];
        let r = per_sr_scores(&golds, &golds).unwrap();
        for sr in &r.per_sr {
            assert_eq!(sr.micro_f1, 1.0);
            assert_eq!(sr.macro_f1, 1.0);
        }
        assert_eq!(r.complete_match.f1, 1.0);
        assert_eq!(r.complete_match.accuracy, 1.0);
    }

    #[test]
    fn sr4_wrong_everywhere() {
        let golds = vec![v([Equal, After, Before, Vague]), v([After; 4])];
        let preds: Vec<SrVector> = golds
            .iter()
            .map(|g| {
                let mut l = g.labels();
                l[3] = if l[3] == Equal { After } else { Equal };
                v(l)
            })
            .collect();
        let r = per_sr_scores(&golds, &preds).unwrap();
        assert_eq!(r.summary_row(), [1.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(r.complete_match.accuracy, 0.0);
    }

    #[test]
    fn counting_oracle() {
        let golds = vec![v([Equal; 4]), v([After; 4]), v([Before; 4]), v([Vague; 4])];
        let mut preds = golds.clone();
        preds[2] = v([Before, Before, Before, After]);
        let r = per_sr_scores(&golds, &preds).unwrap();
        assert_eq!(r.complete_match.accuracy, 0.75);
        assert_eq!(r.complete_match.f1, 0.75);
        // SR4: before predicted as after once.
        let after = r.per_sr[3].labels[After.index()];
        assert_eq!((after.true_positive, after.predicted, after.support), (1, 2, 1));
        assert_eq!(after.precision, 0.5);
        assert_eq!(after.recall, 1.0);
        let before = r.per_sr[3].labels[Before.index()];
        assert_eq!((before.precision, before.recall, before.f1), (0.0, 0.0, 0.0));
        for sr in &r.per_sr {
            let support: usize = sr.labels.iter().map(|l| l.support).sum();
            assert_eq!(support, 4);
        }
    }

    #[test]
    fn abstentions_lower_recall_only() {
        let golds = vec![v([Equal; 4]), v([After; 4])];
        let r = per_sr_scores_partial(&golds, &[Some(v([Equal; 4])), None]).unwrap();
        let c = r.complete_match;
        assert_eq!((c.precision, c.recall, c.accuracy), (1.0, 0.5, 0.5));
        assert!((c.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            per_sr_scores(&[SrVector::ALL_EQUAL], &[]),
            Err(EvalError::LengthMismatch { gold: 1, predicted: 0 })
        );
    }

    #[test]
    fn event_time_accuracy_uses_canonical_strings() {
        let a = |s: &str| s.parse::<TimeAnchor>().unwrap();
        let gold = vec![a("1998-02-06"), a("after1998-01-01"), a("begin:1998-01-01,end:1998-01-03")];
        assert_eq!(event_time_accuracy(&gold, &gold).unwrap(), 1.0);
        let inferred = vec![a("before1998-02-06"), a("after1998-01-01"), a("1998-01-01")];
        assert!((event_time_accuracy(&gold, &inferred).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(event_time_accuracy(&[], &[]).unwrap(), 0.0);
    }

    fn record(rows: &[&[Option<&str>]]) -> IaaRecord {
        let width = rows[0].len();
        IaaRecord {
            annotators: (0..width).map(|i| format!("a{i}")).collect(),
            items: rows
                .iter()
                .enumerate()
                .map(|(i, r)| IaaItem {
                    id: format!("e{i}"),
                    codings: r.iter().map(|c| c.map(str::to_string)).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn alpha_perfect_and_hand_fixture() {
        let rows: Vec<[Option<&str>; 2]> = (0..10).map(|i| [Some(["x", "y"][i % 2]); 2]).collect();
        let rows: Vec<&[Option<&str>]> = rows.iter().map(|r| r.as_slice()).collect();
        assert_eq!(krippendorff_alpha(&record(&rows)).unwrap(), 1.0);

        // Values A,A | A,B: n = 4, o_AB = o_BA = 1, n_A = 3, n_B = 1.
        // α = 1 − (n−1)·Σ o / Σ n_c n_k = 1 − 3·2 / 6 = 0.
        let r = record(&[&[Some("A"), Some("A")], &[Some("A"), Some("B")]]);
        assert!(krippendorff_alpha(&r).unwrap().abs() < 1e-12);
    }

    #[test]
    fn alpha_reference_example_with_missing_data() {
        // Four observers, twelve units, nominal data; published value 0.743.
        let table: [[Option<&str>; 4]; 12] = [
            [Some("1"), Some("1"), None, Some("1")],
            [Some("2"), Some("2"), Some("3"), Some("2")],
            [Some("3"), Some("3"), Some("3"), Some("3")],
            [Some("3"), Some("3"), Some("3"), Some("3")],
            [Some("2"), Some("2"), Some("2"), Some("2")],
            [Some("1"), Some("2"), Some("3"), Some("4")],
            [Some("4"), Some("4"), Some("4"), Some("4")],
            [Some("1"), Some("1"), Some("2"), Some("1")],
            [Some("2"), Some("2"), Some("2"), Some("2")],
            [None, Some("5"), Some("5"), Some("5")],
            [None, None, Some("1"), Some("1")],
            [None, Some("3"), None, None],
        ];
        let rows: Vec<&[Option<&str>]> = table.iter().map(|r| r.as_slice()).collect();
        let alpha = krippendorff_alpha(&record(&rows)).unwrap();
        assert!((alpha - 0.743).abs() < 5e-4, "{alpha}");
    }

    #[test]
    fn alpha_degenerate_inputs() {
        let r = record(&[&[Some("A"), Some("A")], &[Some("A"), Some("A")]]);
        assert_eq!(krippendorff_alpha(&r).unwrap(), 1.0);
        assert_eq!(
            krippendorff_alpha(&record(&[&[Some("A")], &[Some("B")]])),
            Err(EvalError::TooFewAnnotators(1))
        );
        assert_eq!(
            krippendorff_alpha(&record(&[&[Some("A"), Some("B")], &[Some("A"), None]])),
            Err(EvalError::TooFewItems(1))
        );
    }

    #[test]
    fn iaa_table_parsing() {
        let text = "item\tann1\tann2\ne1\t1998-02-06\t1998-02-06\ne2\tNA\tafter1998-01-01\ne3\tx\n";
        let r = IaaRecord::parse_tsv(text).unwrap();
        assert_eq!(r.annotators, ["ann1", "ann2"]);
        assert_eq!(r.items[1].codings, vec![None, Some("after1998-01-01".into())]);
        assert_eq!(r.items[2].codings, vec![Some("x".into()), None]);
        assert!(IaaRecord::parse_tsv("item\ta\ne1\tx\ty\n").is_err());
    }
}
