//! Scoring: answer normalization, token F1, retrieval recall, navigation
//! success, and knowledge-advantage summaries.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Variant;
use crate::env::{Transcript, TranscriptStatus};
use crate::kg::EntityId;
use crate::text;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("undefined input: {0}")]
    UndefinedInput(String),
    #[error("reports are not aligned: {0}")]
    Alignment(String),
}

const ARTICLES: [&str; 3] = ["a", "an", "the"];

/// Lowercase, strip punctuation, drop articles, split on whitespace.
pub fn normalize_answer(text: &str) -> Vec<String> {
    text.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .filter(|token| !ARTICLES.contains(token))
        .map(str::to_string)
        .collect()
}

/// Token-level F1 over normalized multisets. Both empty -> 1, one empty -> 0.
pub fn token_f1(prediction: &str, gold: &str) -> f64 {
    let pred = normalize_answer(prediction);
    let gold = normalize_answer(gold);
    if pred.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if pred.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let mut gold_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for token in &gold {
        *gold_counts.entry(token).or_default() += 1;
    }
    let mut overlap = 0usize;
    for token in &pred {
        if let Some(count) = gold_counts.get_mut(token.as_str()) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / pred.len() as f64;
    let recall = overlap as f64 / gold.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// |gold ∩ first k retrieved| / |gold|.
pub fn recall_at_k(
    retrieved: &[String],
    gold: &BTreeSet<String>,
    k: usize,
) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::UndefinedInput("empty gold set for recall@k".into()));
    }
    if k == 0 {
        return Err(EvalError::UndefinedInput("k must be >= 1".into()));
    }
    let top: BTreeSet<&String> = retrieved.iter().take(k).collect();
    let hit = gold.iter().filter(|g| top.contains(g)).count();
    Ok(hit as f64 / gold.len() as f64)
}

/// Fraction of terminal transcripts with success status.
pub fn nav_success_rate(transcripts: &[Transcript]) -> Result<f64, EvalError> {
    if transcripts.is_empty() {
        return Err(EvalError::UndefinedInput("no transcripts".into()));
    }
    let wins =
        transcripts.iter().filter(|t| t.status == TranscriptStatus::Success).count();
    Ok(wins as f64 / transcripts.len() as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskScore {
    pub pair_id: String,
    pub score: f64,
}

/// Per-task scores plus the aggregate (mean score x 100).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub condition: String,
    pub variant: Variant,
    pub per_task: Vec<TaskScore>,
    pub aggregate: f64,
}

impl EvalReport {
    pub fn new(condition: &str, variant: Variant, mut per_task: Vec<TaskScore>) -> Self {
        per_task.sort_by(|a, b| a.pair_id.cmp(&b.pair_id));
        let aggregate = if per_task.is_empty() {
            0.0
        } else {
            per_task.iter().map(|t| t.score).sum::<f64>() / per_task.len() as f64 * 100.0
        };
        EvalReport { condition: condition.to_string(), variant, per_task, aggregate }
    }

    /// The aggregate must be recomputable from the per-task records.
    pub fn is_self_consistent(&self) -> bool {
        let recomputed = if self.per_task.is_empty() {
            0.0
        } else {
            self.per_task.iter().map(|t| t.score).sum::<f64>() / self.per_task.len() as f64 * 100.0
        };
        (recomputed - self.aggregate).abs() < 1e-9
    }
}

/// One knowledge-advantage measurement: KA = P_R - P_S for a condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KaPoint {
    pub condition: String,
    pub p_r: f64,
    pub p_s: f64,
    pub ka: f64,
}

pub fn knowledge_advantage(
    report_r: &EvalReport,
    report_s: &EvalReport,
) -> Result<KaPoint, EvalError> {
    if report_r.condition != report_s.condition {
        return Err(EvalError::Alignment(format!(
            "conditions differ: {} vs {}",
            report_r.condition, report_s.condition
        )));
    }
    fn ids(r: &EvalReport) -> Vec<&String> {
        r.per_task.iter().map(|t| &t.pair_id).collect()
    }
    if ids(report_r) != ids(report_s) {
        return Err(EvalError::Alignment("pair id sets differ between RM and SM".into()));
    }
    Ok(KaPoint {
        condition: report_r.condition.clone(),
        p_r: report_r.aggregate,
        p_s: report_s.aggregate,
        ka: report_r.aggregate - report_s.aggregate,
    })
}

/// KA per condition, with base-vs-augmented deltas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KaSummary {
    pub base_condition: String,
    pub ka_base: f64,
    pub ka_ext: BTreeMap<String, f64>,
    /// ka_base - ka_ext per augmented condition.
    pub delta: BTreeMap<String, f64>,
}

pub fn summarize_ka(base: &KaPoint, augmented: &[KaPoint]) -> KaSummary {
    let mut ka_ext = BTreeMap::new();
    let mut delta = BTreeMap::new();
    for point in augmented {
        ka_ext.insert(point.condition.clone(), point.ka);
        delta.insert(point.condition.clone(), base.ka - point.ka);
    }
    KaSummary { base_condition: base.condition.clone(), ka_base: base.ka, ka_ext, delta }
}

/// Aligned RM/SM/KA rows per condition, scores with one decimal.
pub fn render_table(points: &[KaPoint]) -> (String, String) {
    let mut csv = String::from("condition,p_rm,p_sm,ka\n");
    let mut txt = format!("{:<24} {:>8} {:>8} {:>8}\n", "condition", "RM", "SM", "KA");
    for p in points {
        csv.push_str(&format!("{},{:.1},{:.1},{:.1}\n", p.condition, p.p_r, p.p_s, p.ka));
        txt.push_str(&format!(
            "{:<24} {:>8.1} {:>8.1} {:>8.1}\n",
            p.condition, p.p_r, p.p_s, p.ka
        ));
    }
    (csv, txt)
}

/// Fraction of steps whose reasoning text mentions at least one corpus
/// entity label that had not appeared in any observation the episode had
/// shown so far (titles, link display texts, page content when visible, and
/// the always-shown target title).
pub fn external_mention_rate(
    transcripts: &[Transcript],
    corpus_labels: &BTreeSet<String>,
    page_labels: &BTreeMap<EntityId, BTreeSet<String>>,
) -> f64 {
    let mut steps = 0usize;
    let mut external_steps = 0usize;
    for transcript in transcripts {
        let mut observed: BTreeSet<&String> = BTreeSet::new();
        observed.insert(&transcript.target_title);
        if let Some(labels) = page_labels.get(&transcript.source) {
            observed.extend(labels.iter());
        }
        for step in &transcript.steps {
            if let Some(labels) = page_labels.get(&step.observation.page) {
                observed.extend(labels.iter());
            }
            steps += 1;
            let external = corpus_labels.iter().any(|label| {
                !observed.contains(label) && text::contains_word(&step.agent_text, label)
            });
            if external {
                external_steps += 1;
            }
        }
    }
    if steps == 0 {
        0.0
    } else {
        external_steps as f64 / steps as f64
    }
}
