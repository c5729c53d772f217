//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed; exits
//! non-zero when any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::{Days, NaiveDate};

use evtime::corpus::{LinkInstance, LinkKind, TokenSpan};
use evtime::evaluation::{krippendorff_alpha, oracle_test, IaaItem, IaaRecord, OracleMode};
use evtime::inference::{infer_event, ClueSource, TimeClue};
use evtime::neuralnet::{
    complete_match_accuracy, loss, train_with_validation, MentionHead, Model, ModelConfig, SrPrediction,
    TrainConfig, Vocabulary,
};
use evtime::sralgebra::{allen_of, compare_pairs, induce_sr, AllenRelation, SrLabel, SrVector};
use evtime::synthetic::{separable_links, synthetic_corpus};
use evtime::timecore::{parse_anchor, BoundPair, DayPoint, TimeAnchor};

// Pinned tolerances and budgets.
const GRAD_EPS: f64 = 1e-5;
const GRAD_MAX_REL: f64 = 1e-4;
/// Denominator floor for the relative error, so gradients that are zero
/// analytically compare on absolute error.
const GRAD_REL_FLOOR: f64 = 1e-6;
const GRAD_SEEDS: u64 = 20;
const GRAD_BUDGET: Duration = Duration::from_secs(10);
const LOSS_TOL: f64 = 1e-9;
const LEARN_EPOCHS: usize = 30;
const LEARN_BUDGET: Duration = Duration::from_secs(30);
const ALPHA_TOL: f64 = 1e-9;
const SMOKE_BUDGET: Duration = Duration::from_secs(60);
/// Seed and size of the bundled synthetic corpus.
const SYNTHETIC_SEED: u64 = 2024;
const SYNTHETIC_DOCS: usize = 12;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn day(offset: u64) -> NaiveDate {
    NaiveDate::from_ymd_opt(1998, 1, 1).unwrap() + Days::new(offset)
}

fn ymd(y: i32, m: u32, d: u32) -> DayPoint {
    DayPoint::Day(NaiveDate::from_ymd_opt(y, m, d).unwrap())
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn table_one() -> Outcome {
    let b = DayPoint::Blank;
    let rows = [
        ("1998-01-26", [ymd(1998, 1, 26), ymd(1998, 1, 26), ymd(1998, 1, 26), ymd(1998, 1, 26)]),
        (
            "after1998-01-26before1998-02-06",
            [ymd(1998, 1, 26), ymd(1998, 2, 6), ymd(1998, 1, 26), ymd(1998, 2, 6)],
        ),
        ("begin:1998-01-01,end:1998-01-31", [ymd(1998, 1, 1), ymd(1998, 1, 1), ymd(1998, 1, 31), ymd(1998, 1, 31)]),
        ("begin:1998-01-01,end:after1998-02-06", [ymd(1998, 1, 1), ymd(1998, 1, 1), ymd(1998, 2, 6), b]),
    ];
    let mut ok = 0;
    for (text, quad) in rows {
        let anchor = parse_anchor(text).map_err(|e| format!("{text}: {e}"))?;
        check(anchor.quadruple() == quad, format!("{text} gave {:?}", anchor.quadruple()))?;
        check(anchor.to_string() == text, format!("{text} serialized as {anchor}"))?;
        ok += 1;
    }
    Ok(format!("{ok}/4 rows round-trip"))
}

/// Every bound pair over six days plus BLANK.
fn all_pairs() -> Vec<BoundPair> {
    let mut points = vec![DayPoint::Blank];
    points.extend((0..6).map(|o| DayPoint::Day(day(o))));
    let mut pairs = Vec::new();
    for &e in &points {
        for &l in &points {
            if let Ok(p) = BoundPair::new(e, l) {
                pairs.push(p);
            }
        }
    }
    pairs
}

/// The rule table written directly from its definition: `None` where an
/// operand is BLANK.
fn rule_hits(e: BoundPair, t: BoundPair) -> [bool; 3] {
    let d = |p: DayPoint| p.date();
    let (ee, el, te, tl) = (d(e.earliest()), d(e.latest()), d(t.earliest()), d(t.latest()));
    let equal = matches!((ee, el, te, tl), (Some(a), Some(b), Some(c), Some(d)) if a == c && b == d);
    let after = matches!((ee, tl), (Some(a), Some(b)) if a >= b) && (el.is_none() || el > tl);
    let before = matches!((el, te), (Some(a), Some(b)) if a <= b) && (ee.is_none() || matches!((ee, te), (Some(a), Some(b)) if a < b));
    [equal, after, before]
}

fn table_two() -> Outcome {
    let pairs = all_pairs();
    let mut inputs = 0;
    let mut certain_vague = 0;
    for &e in &pairs {
        for &t in &pairs {
            inputs += 1;
            let hits = rule_hits(e, t);
            let count = hits.iter().filter(|h| **h).count();
            check(count <= 1, format!("{e:?} vs {t:?} satisfies {count} rules"))?;
            let expected = match hits.iter().position(|h| *h) {
                Some(0) => SrLabel::Equal,
                Some(1) => SrLabel::After,
                Some(2) => SrLabel::Before,
                _ => SrLabel::Vague,
            };
            let got = compare_pairs(e, t);
            check(got == expected, format!("{e:?} vs {t:?}: {got} but table gives {expected}"))?;
            if e.is_certain() && t.is_certain() && got == SrLabel::Vague {
                certain_vague += 1;
            }
        }
    }
    check(certain_vague == 0, format!("{certain_vague} certain inputs were vague"))?;
    Ok(format!("{inputs} pair combinations, one outcome each, 0 vague on certain inputs"))
}

fn allen_injective() -> Outcome {
    let intervals: Vec<(u64, u64)> = (0..6).flat_map(|a| (a + 1..6).map(move |b| (a, b))).collect();
    let mut seen: HashMap<AllenRelation, SrVector> = HashMap::new();
    let mut pairs = 0;
    for &(eb, ee) in &intervals {
        for &(tb, te) in &intervals {
            let e = TimeAnchor::certain_span(day(eb), day(ee)).unwrap();
            let t = TimeAnchor::certain_span(day(tb), day(te)).unwrap();
            let rel = allen_of(&e, &t).map_err(|x| x.to_string())?;
            let sr = induce_sr(&e, &t);
            pairs += 1;
            if let Some(prev) = seen.insert(rel, sr) {
                check(prev == sr, format!("{rel:?} maps to both {prev} and {sr}"))?;
            }
        }
    }
    check(seen.len() == 13, format!("only {} relations occurred", seen.len()))?;
    let mut vectors: Vec<SrVector> = seen.values().copied().collect();
    vectors.sort_by_key(|v| v.labels().map(SrLabel::index));
    vectors.dedup();
    check(vectors.len() == 13, format!("{} distinct vectors for 13 relations", vectors.len()))?;
    Ok(format!("{pairs} certain pairs, 13 relations, 13 distinct vectors"))
}

fn figure_two() -> Outcome {
    let event = parse_anchor("begin:1998-01-01,end:after1998-02-01").unwrap();
    let target = parse_anchor("begin:1998-01-01,end:1998-02-06").unwrap();
    let sr = induce_sr(&event, &target);
    let want = SrVector([SrLabel::Equal, SrLabel::Before, SrLabel::After, SrLabel::Vague]);
    check(sr == want, format!("got {sr}"))?;
    Ok(format!("{sr}"))
}

fn et_link() -> LinkInstance {
    let tokens = ["Workers", "walked", "out", "on", "March", "3", "after", "talks", "failed", "."];
    LinkInstance {
        kind: LinkKind::EventTimex,
        doc: "g".into(),
        event: "e1".into(),
        target: "t1".into(),
        sentence_distance: 0,
        signed_distance: 0,
        target_order: Some(0),
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
        event_span: TokenSpan::new(1, 3),
        timex_span: Some(TokenSpan::new(4, 6)),
        target_anchor: TimeAnchor::certain_day(day(61)),
        gold: None,
    }
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(GRAD_REL_FLOOR)
}

/// Central differences over every weight, every used word row and every
/// position row, for one seeded model.
fn gradient_error(seed: u64) -> (f64, f64) {
    let mut link = et_link();
    let kind = if seed % 2 == 0 { LinkKind::EventTimex } else { LinkKind::EventDct };
    if kind == LinkKind::EventDct {
        link.kind = kind;
        link.target = "DCT".into();
        link.target_order = None;
        link.timex_span = None;
    }
    let config = ModelConfig {
        kind,
        word_dim: 6,
        position_dim: 3,
        hidden_dim: 5,
        max_offset: 12,
        attention: seed % 5 != 4,
        mention_head: if seed % 3 == 0 { MentionHead::First } else { MentionHead::Last },
    };
    let vocab = Vocabulary::build(link.tokens.iter().map(String::as_str));
    let mut model = Model::new(config, vocab, None, seed).unwrap();
    let gold = SrVector(std::array::from_fn(|i| SrLabel::ALL[((seed >> (2 * i)) as usize + i) % 4]));
    let (_, grads) = model.gradients(&link, &gold).unwrap();
    let loss_at = |m: &Model| loss(&m.forward(&link).unwrap(), &gold);
    // Worst relative error and the analytic value it occurred at.
    let mut worst = (0.0f64, 0.0f64);
    let mut note = |a: f64, n: f64| {
        let e = rel_err(a, n);
        if e > worst.0 {
            worst = (e, a);
        }
    };

    let analytic: Vec<Vec<f64>> = grads.params.tensors().iter().map(|(_, t)| t.data().to_vec()).collect();
    for (ti, values) in analytic.iter().enumerate() {
        for (i, &a) in values.iter().enumerate() {
            let orig = model.params.tensors()[ti].1.data()[i];
            model.params.tensors_mut()[ti].data_mut()[i] = orig + GRAD_EPS;
            let plus = loss_at(&model);
            model.params.tensors_mut()[ti].data_mut()[i] = orig - GRAD_EPS;
            let minus = loss_at(&model);
            model.params.tensors_mut()[ti].data_mut()[i] = orig;
            note(a, (plus - minus) / (2.0 * GRAD_EPS));
        }
    }
    for row in 0..model.embeddings.words.rows() {
        let cols = model.embeddings.words.cols();
        for c in 0..cols {
            let a = grads.words.get(&row).map_or(0.0, |g| g[c]);
            let orig = model.embeddings.words.row(row)[c];
            model.embeddings.words.row_mut(row)[c] = orig + GRAD_EPS;
            let plus = loss_at(&model);
            model.embeddings.words.row_mut(row)[c] = orig - GRAD_EPS;
            let minus = loss_at(&model);
            model.embeddings.words.row_mut(row)[c] = orig;
            note(a, (plus - minus) / (2.0 * GRAD_EPS));
        }
    }
    for i in 0..model.embeddings.positions.data().len() {
        let a = grads.positions.data()[i];
        let orig = model.embeddings.positions.data()[i];
        model.embeddings.positions.data_mut()[i] = orig + GRAD_EPS;
        let plus = loss_at(&model);
        model.embeddings.positions.data_mut()[i] = orig - GRAD_EPS;
        let minus = loss_at(&model);
        model.embeddings.positions.data_mut()[i] = orig;
        note(a, (plus - minus) / (2.0 * GRAD_EPS));
    }
    worst
}

fn gradients() -> Outcome {
    let start = Instant::now();
    let mut worst = (0.0f64, 0.0f64);
    for seed in 0..GRAD_SEEDS {
        let (e, at) = gradient_error(seed);
        check(e < GRAD_MAX_REL, format!("seed {seed}: max relative error {e:.2e} at gradient {at:.2e}"))?;
        if e > worst.0 {
            worst = (e, at);
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < GRAD_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{GRAD_SEEDS} seeds, max relative error {:.2e} (at gradient {:.2e}), {:.2}s",
        worst.0,
        worst.1,
        elapsed.as_secs_f64()
    ))
}

fn loss_closed_forms() -> Outcome {
    let gold = SrVector([SrLabel::Equal, SrLabel::After, SrLabel::Before, SrLabel::Vague]);
    let uniform = loss(&SrPrediction::from_logits(&[0.0; 16]), &gold);
    let target = 4.0 * 4f64.ln();
    check((uniform - target).abs() < LOSS_TOL, format!("uniform loss {uniform} vs {target}"))?;
    let mut probs = [[0.0; 4]; 4];
    for (i, l) in gold.labels().iter().enumerate() {
        probs[i][l.index()] = 1.0;
    }
    let perfect = loss(&SrPrediction { probs }, &gold);
    check(perfect == 0.0, format!("perfect loss {perfect}"))?;
    let perfect = perfect.abs();
    Ok(format!("uniform {uniform:.12} (4 ln 4 = {target:.12}), perfect {perfect}"))
}

fn learnability() -> Outcome {
    let start = Instant::now();
    let links = separable_links(31, 70);
    let (train_set, validation) = links.split_at(50);
    let config = ModelConfig {
        kind: LinkKind::EventDct,
        word_dim: 8,
        position_dim: 4,
        hidden_dim: 8,
        max_offset: 20,
        attention: true,
        mention_head: MentionHead::Last,
    };
    let mut tc = TrainConfig::new(5);
    tc.epochs = LEARN_EPOCHS;
    tc.patience = LEARN_EPOCHS;
    tc.batch_size = 5;
    tc.learning_rate = 0.05;
    let a = train_with_validation(train_set, validation, &config, &tc, None).map_err(|e| e.to_string())?;
    let b = train_with_validation(train_set, validation, &config, &tc, None).map_err(|e| e.to_string())?;
    check(a.model == b.model && a.history == b.history, "two runs with one seed differ")?;
    let acc = complete_match_accuracy(&a.model, validation).map_err(|e| e.to_string())?;
    check(acc == 1.0, format!("validation complete match {acc} (best epoch {})", a.best_epoch))?;
    let first = a.history.iter().find(|r| r.validation_accuracy == 1.0).map(|r| r.epoch);
    let elapsed = start.elapsed();
    check(elapsed < LEARN_BUDGET, format!("took {elapsed:?}"))?;
    Ok(format!(
        "validation complete match 1.0 first at epoch {}, deterministic, {:.2}s for two runs",
        first.unwrap_or(a.best_epoch),
        elapsed.as_secs_f64()
    ))
}

fn oracle_semantics() -> Outcome {
    let docs = synthetic_corpus(SYNTHETIC_SEED, SYNTHETIC_DOCS);
    let ed = oracle_test(&docs, OracleMode::DctOnly);
    check(ed.avg_links == 1.0, format!("E-D avg_links {}", ed.avg_links))?;
    let runs: Vec<_> = (0..3).map(|sw| oracle_test(&docs, OracleMode::Window(sw))).collect();
    for w in runs.windows(2) {
        check(w[0].accuracy <= w[1].accuracy, format!("accuracy fell: {} then {}", w[0].accuracy, w[1].accuracy))?;
    }
    check(runs[2].accuracy == 1.0, format!("sw=2 accuracy {}", runs[2].accuracy))?;
    Ok(format!(
        "E-D links 1.00, accuracy E-D {:.3}, sw0 {:.3}, sw1 {:.3}, sw2 {:.3}",
        ed.accuracy, runs[0].accuracy, runs[1].accuracy, runs[2].accuracy
    ))
}

fn lock_rule() -> Outcome {
    use SrLabel::{After, Equal, Vague};
    let dct = TimeAnchor::certain_day(NaiveDate::from_ymd_opt(1998, 2, 6).unwrap());
    let timex = |d: u32, label: SrLabel| TimeClue {
        source: ClueSource::Timex { tid: format!("t{d}"), distance: 0, order: 0 },
        target_anchor: TimeAnchor::certain_day(NaiveDate::from_ymd_opt(1998, 2, d).unwrap()),
        sr: SrVector([label, Vague, Vague, Vague]),
    };
    let locked = TimeClue::dct(dct, SrVector([Equal, Vague, Vague, Vague]));
    let begin = |clues: &[TimeClue]| {
        let q = infer_event(clues).anchor.quadruple();
        (q[0], q[1])
    };
    let pinned = (ymd(1998, 2, 6), ymd(1998, 2, 6));
    check(begin(std::slice::from_ref(&locked)) == pinned, "DCT equal did not set the begin pair")?;
    for contra in [timex(3, Equal), timex(10, After)] {
        let got = begin(&[locked.clone(), contra.clone()]);
        check(got == pinned, format!("{:?} moved the locked pair to {got:?}", contra.sr))?;
    }
    // The same equal from a timex does not lock, so a later equal lands.
    let unlocked = TimeClue { source: ClueSource::Timex { tid: "t0".into(), distance: 0, order: 0 }, ..locked };
    let mut later = timex(3, Equal);
    later.source = ClueSource::Timex { tid: "t3".into(), distance: 1, order: 1 };
    check(begin(&[unlocked, later]) == (ymd(1998, 2, 3), ymd(1998, 2, 3)), "timex equal locked the pair")?;
    Ok("contradicting equal and after clues leave index 1 unchanged".into())
}

/// Coincidence-matrix α written out from its definition.
fn alpha_oracle(units: &[Vec<&str>]) -> f64 {
    let mut o: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for u in units.iter().filter(|u| u.len() > 1) {
        let w = 1.0 / (u.len() - 1) as f64;
        for (i, a) in u.iter().enumerate() {
            for (j, b) in u.iter().enumerate() {
                if i != j {
                    *o.entry((a, b)).or_default() += w;
                }
            }
        }
    }
    let mut margins: BTreeMap<&str, f64> = BTreeMap::new();
    for ((a, _), v) in &o {
        *margins.entry(a).or_default() += v;
    }
    let n: f64 = margins.values().sum();
    let observed: f64 = o.iter().filter(|((a, b), _)| a != b).map(|(_, v)| v).sum();
    let expected: f64 = margins
        .iter()
        .flat_map(|(a, x)| margins.iter().filter(move |(b, _)| a != *b).map(move |(_, y)| x * y))
        .sum();
    1.0 - (n - 1.0) * observed / expected
}

fn record(units: &[Vec<&str>]) -> IaaRecord {
    IaaRecord {
        annotators: vec!["a".into(), "b".into()],
        items: units
            .iter()
            .enumerate()
            .map(|(i, u)| IaaItem { id: format!("e{i}"), codings: u.iter().map(|c| Some(c.to_string())).collect() })
            .collect(),
    }
}

fn alpha() -> Outcome {
    let perfect: Vec<Vec<&str>> = ["1998-01-26", "after1998-01-01", "1998-01-26", "before1998-02-06"]
        .iter()
        .map(|c| vec![*c, *c])
        .collect();
    let a = krippendorff_alpha(&record(&perfect)).map_err(|e| e.to_string())?;
    check(a == 1.0, format!("perfect agreement gave {a}"))?;

    // n = 10; o(A,B) = o(A,C) = 1 each way; margins A 4, B 3, C 3.
    // α = 1 − 9·4 / (100 − 34) = 5/11.
    let fixture: Vec<Vec<&str>> = vec![vec!["A", "A"], vec!["A", "B"], vec!["B", "B"], vec!["C", "C"], vec!["A", "C"]];
    let got = krippendorff_alpha(&record(&fixture)).map_err(|e| e.to_string())?;
    let oracle = alpha_oracle(&fixture);
    check((got - oracle).abs() < ALPHA_TOL, format!("α {got} vs oracle {oracle}"))?;
    check((got - 5.0 / 11.0).abs() < ALPHA_TOL, format!("α {got} vs hand value 5/11"))?;
    Ok(format!("perfect 1.0, fixture {got:.12} (oracle {oracle:.12})"))
}

fn evtime(root: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_evtime"))
        .current_dir(root)
        .args(args)
        .env_remove("CHRONO_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("evtime {args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)))
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn run_pipeline(root: &Path, config: &str, out: &Path, steps: &[&str]) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let out_arg = out.to_string_lossy().into_owned();
    for step in steps {
        evtime(root, &[step, "--config", config, "--out", &out_arg])?;
    }
    Ok(snapshot(out))
}

fn smoke() -> Outcome {
    let root = workspace_root();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tmp.path().join("run");
    let steps = ["induce", "train", "predict", "infer", "evaluate"];
    let start = Instant::now();
    let first = run_pipeline(&root, "data/synthetic/config.json", &out, &steps)?;
    let elapsed = start.elapsed();
    std::fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
    let second = run_pipeline(&root, "data/synthetic/config.json", &out, &steps)?;
    check(elapsed < SMOKE_BUDGET, format!("took {elapsed:?}"))?;
    for name in ["evaluation.json", "evaluation.txt", "inference.jsonl", "ed.model"] {
        check(first.contains_key(name), format!("{name} missing"))?;
    }
    let names: Vec<&String> = first.keys().collect();
    check(first.keys().eq(second.keys()), "runs wrote different files")?;
    for (name, bytes) in &first {
        check(second[name] == *bytes, format!("{name} differs between runs"))?;
    }
    Ok(format!("{} files byte-identical across two runs, {:.2}s per run", names.len(), elapsed.as_secs_f64()))
}

fn timeml_reports() -> Outcome {
    let root = workspace_root();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = tmp.path().join("run");
    let files = run_pipeline(
        &root,
        "data/timeml-sample/config.json",
        &out,
        &["induce", "train", "predict", "infer", "oracle", "evaluate"],
    )?;
    let text = |name: &str| -> Result<String, String> {
        files
            .get(name)
            .map(|b| String::from_utf8_lossy(b).into_owned())
            .ok_or_else(|| format!("{name} missing"))
    };
    // Oracle table: one E-D row, then one row per window.
    let oracle = text("oracle.txt")?;
    check(oracle.lines().any(|l| l.starts_with("E-D ")), "oracle table lacks the E-D row")?;
    for sw in 0..=1 {
        check(oracle.contains(&format!("(sw={sw})")), format!("oracle table lacks sw={sw}"))?;
    }
    // Per-SR scores with the complete-match column, per link kind.
    let evaluation = text("evaluation.txt")?;
    let header = evaluation
        .lines()
        .find(|l| l.starts_with("link"))
        .ok_or("evaluation lacks the summary table")?;
    check(
        header.split_whitespace().collect::<Vec<_>>() == ["link", "SR1", "SR2", "SR3", "SR4", "Comp."],
        format!("summary header {header:?}"),
    )?;
    for kind in ["E-D", "E-T"] {
        check(evaluation.lines().any(|l| l.starts_with(&format!("{kind} "))), format!("no {kind} row"))?;
    }
    // Event-time accuracy.
    check(evaluation.contains("event time accuracy"), "no event-time accuracy line")?;
    let json: serde_json::Value = serde_json::from_slice(&files["evaluation.json"]).map_err(|e| e.to_string())?;
    check(json["event_time"]["accuracy"].is_number(), "evaluation.json lacks event_time.accuracy")?;
    Ok("oracle, per-SR and event-time reports written".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("anchor table round trip", table_one),
        ("relation rule table", table_two),
        ("interval relations map injectively", allen_injective),
        ("worked relation example", figure_two),
        ("gradient check", gradients),
        ("loss closed forms", loss_closed_forms),
        ("learnability on separable data", learnability),
        ("oracle harness semantics", oracle_semantics),
        ("DCT lock rule", lock_rule),
        ("Krippendorff alpha", alpha),
        ("end-to-end smoke", smoke),
        ("TimeML corpus reports", timeml_reports),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
