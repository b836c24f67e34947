//! Scoring identified detections against ground truth.
//!
//! Every ground-truth box in every frame is one instance. Within a frame,
//! truth boxes and identified detections are paired greedily by decreasing
//! IoU (one-to-one, IoU at or above the threshold). A single name alignment
//! per session maps predicted names to truth names so that the number of
//! agreeing pairs is maximal.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pipeline::detections::DetectionsFile;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub ground_truth_instances: usize,
    pub matched: usize,
    pub correct: usize,
    pub wrong: usize,
    pub missed: usize,
    /// Identified detections that matched no truth box.
    pub unmatched_detections: usize,
    pub accuracy_pct: f64,
    pub missed_pct: f64,
    pub wrong_pct: f64,
    /// Predicted name to truth name.
    pub alignment: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionReport {
    pub counting: &'static str,
    pub iou_threshold: f64,
    pub scenarios: Vec<ScenarioReport>,
}

/// One matched (predicted name, truth name) pair per instance.
struct Matches {
    pairs: Vec<(String, String)>,
    missed: usize,
    unmatched: usize,
    total: usize,
}

fn match_frames(assignments: &DetectionsFile, truth: &DetectionsFile, iou: f64) -> Result<Matches> {
    if (assignments.frame_width, assignments.frame_height) != (truth.frame_width, truth.frame_height) {
        return Err(Error::FrameMismatch(format!(
            "assignments are {}x{}, ground truth {}x{}",
            assignments.frame_width, assignments.frame_height, truth.frame_width, truth.frame_height
        )));
    }
    let ai: Vec<u64> = assignments.frames.iter().map(|f| f.index).collect();
    let ti: Vec<u64> = truth.frames.iter().map(|f| f.index).collect();
    if ai != ti {
        let only_a: Vec<_> = ai.iter().filter(|i| !ti.contains(i)).take(5).collect();
        let only_t: Vec<_> = ti.iter().filter(|i| !ai.contains(i)).take(5).collect();
        return Err(Error::FrameMismatch(format!(
            "frame sets differ (only in assignments: {only_a:?}, only in truth: {only_t:?})"
        )));
    }
    truth.require_identities()?;

    let mut m = Matches { pairs: Vec::new(), missed: 0, unmatched: 0, total: 0 };
    for (fa, ft) in assignments.frames.iter().zip(&truth.frames) {
        let preds: Vec<_> = fa.detections.iter().filter(|d| d.identity.is_some()).collect();
        let mut cands = Vec::new();
        for (ti, t) in ft.detections.iter().enumerate() {
            for (pi, p) in preds.iter().enumerate() {
                let v = t.bbox.iou(&p.bbox);
                if v >= iou {
                    cands.push((v, ti, pi));
                }
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut t_used = vec![false; ft.detections.len()];
        let mut p_used = vec![false; preds.len()];
        for (_, ti, pi) in cands {
            if !t_used[ti] && !p_used[pi] {
                t_used[ti] = true;
                p_used[pi] = true;
                m.pairs.push((
                    preds[pi].identity.clone().expect("filtered"),
                    ft.detections[ti].identity.clone().expect("checked"),
                ));
            }
        }
        m.total += ft.detections.len();
        m.missed += t_used.iter().filter(|u| !**u).count();
        m.unmatched += p_used.iter().filter(|u| !**u).count();
    }
    Ok(m)
}

/// Injective map from the smaller name set into the larger one maximizing
/// the summed confusion counts. Exhaustive search; ties keep the first
/// assignment found in index order.
fn best_alignment(counts: &[Vec<usize>]) -> Vec<Option<usize>> {
    let rows = counts.len();
    let cols = counts.first().map_or(0, Vec::len);
    if rows > cols {
        // align columns to rows, then invert
        let t: Vec<Vec<usize>> = (0..cols).map(|c| (0..rows).map(|r| counts[r][c]).collect()).collect();
        let inv = best_alignment(&t);
        let mut out = vec![None; rows];
        for (c, r) in inv.into_iter().enumerate() {
            if let Some(r) = r {
                out[r] = Some(c);
            }
        }
        return out;
    }
    fn search(
        r: usize,
        counts: &[Vec<usize>],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        score: usize,
        best: &mut (usize, Vec<usize>),
    ) {
        if r == counts.len() {
            if score > best.0 || best.1.is_empty() {
                *best = (score, cur.clone());
            }
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                cur.push(c);
                search(r + 1, counts, used, cur, score + counts[r][c], best);
                cur.pop();
                used[c] = false;
            }
        }
    }
    let mut best = (0, Vec::new());
    search(0, counts, &mut vec![false; cols], &mut Vec::new(), 0, &mut best);
    best.1.into_iter().map(Some).collect()
}

/// Largest name count searched exhaustively; beyond it names are aligned
/// greedily by descending co-occurrence.
const EXHAUSTIVE_LIMIT: usize = 8;

fn greedy_alignment(counts: &[Vec<usize>]) -> Vec<Option<usize>> {
    let mut cells: Vec<(usize, usize, usize)> = counts
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &n)| (n, r, c)))
        .collect();
    cells.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![None; counts.len()];
    let mut used = vec![false; counts.first().map_or(0, Vec::len)];
    for (_, r, c) in cells {
        if out[r].is_none() && !used[c] {
            out[r] = Some(c);
            used[c] = true;
        }
    }
    out
}

pub fn evaluate(
    scenario: &str,
    assignments: &DetectionsFile,
    truth: &DetectionsFile,
    iou_threshold: f64,
) -> Result<ScenarioReport> {
    let m = match_frames(assignments, truth, iou_threshold)?;
    let mut pred: Vec<&str> = m.pairs.iter().map(|p| p.0.as_str()).collect();
    let mut real: Vec<&str> = m.pairs.iter().map(|p| p.1.as_str()).collect();
    pred.sort_unstable();
    pred.dedup();
    real.sort_unstable();
    real.dedup();
    let mut counts = vec![vec![0usize; real.len()]; pred.len()];
    for (p, t) in &m.pairs {
        let r = pred.binary_search(&p.as_str()).expect("listed");
        let c = real.binary_search(&t.as_str()).expect("listed");
        counts[r][c] += 1;
    }
    let mapping = if pred.len().min(real.len()) <= EXHAUSTIVE_LIMIT {
        best_alignment(&counts)
    } else {
        log::warn!("{} names, aligning greedily", pred.len());
        greedy_alignment(&counts)
    };
    let alignment: BTreeMap<String, String> = mapping
        .iter()
        .enumerate()
        .filter_map(|(r, c)| c.map(|c| (pred[r].to_string(), real[c].to_string())))
        .collect();
    let correct = m
        .pairs
        .iter()
        .filter(|(p, t)| alignment.get(p) == Some(t))
        .count();
    let matched = m.pairs.len();
    let wrong = matched - correct;
    let pct = |n: usize| if m.total == 0 { 0.0 } else { 100.0 * n as f64 / m.total as f64 };
    Ok(ScenarioReport {
        scenario: scenario.to_string(),
        ground_truth_instances: m.total,
        matched,
        correct,
        wrong,
        missed: m.missed,
        unmatched_detections: m.unmatched,
        accuracy_pct: pct(correct),
        missed_pct: pct(m.missed),
        wrong_pct: pct(wrong),
        alignment,
    })
}

impl SessionReport {
    pub fn new(iou_threshold: f64, scenarios: Vec<ScenarioReport>) -> Self {
        Self {
            counting: "per-frame-per-diver instances",
            iou_threshold,
            scenarios,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn table(&self) -> String {
        let head = ["Scenario", "Accuracy(%)", "Missed Identification(%)", "Wrong Identification(%)"];
        let rows: Vec<[String; 4]> = self
            .scenarios
            .iter()
            .map(|s| {
                [
                    s.scenario.clone(),
                    format!("{:.1}", s.accuracy_pct),
                    format!("{:.1}", s.missed_pct),
                    format!("{:.1}", s.wrong_pct),
                ]
            })
            .collect();
        let width: Vec<usize> = (0..4)
            .map(|c| rows.iter().map(|r| r[c].len()).chain([head[c].len()]).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let line = |out: &mut String, cells: [&str; 4]| {
            let _ = writeln!(
                out,
                "{:<w0$} | {:>w1$} | {:>w2$} | {:>w3$}",
                cells[0], cells[1], cells[2], cells[3],
                w0 = width[0], w1 = width[1], w2 = width[2], w3 = width[3]
            );
        };
        line(&mut out, head);
        let _ = writeln!(
            out,
            "{}",
            width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-|-")
        );
        for r in &rows {
            line(&mut out, [&r[0], &r[1], &r[2], &r[3]]);
        }
        out
    }
}
