//! Uniform contracts for every external text-generation capability.
//!
//! Each capability is a typed trait (name generation, page generation, fact
//! extraction, ...). The default implementation, [`PortClient`], turns typed
//! requests into [`GenerationRequest`]s and routes them through a [`Gateway`],
//! which validates template bindings, retries transport failures, and appends
//! every call to a log. The log doubles as a cassette: replayed against
//! [`replay::ReplayBackend`] it reproduces a recorded run without any backend.

pub mod http;
pub mod mock;
pub mod replay;
pub mod templates;

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::EntityId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortKind {
    NameGeneration,
    PageGeneration,
    ReferenceInsertion,
    Restoration,
    NoveltyGuess,
    FactExtraction,
    SingleHopQuestions,
    MultiHopComposition,
}

#[derive(Debug, Error)]
pub enum PortError {
    #[error("transport failure: {message}")]
    Transport { message: String },
    #[error("bad request: {message}")]
    Request { message: String },
    #[error("malformed response: {message}")]
    Malformed { message: String },
    #[error("no recorded response for request hash {hash}")]
    ReplayMiss { hash: String },
}

impl PortError {
    pub fn is_transport(&self) -> bool {
        matches!(self, PortError::Transport { .. })
    }
}

/// One call to an external capability: a template id plus bound variables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationRequest {
    pub template: String,
    pub vars: BTreeMap<String, serde_json::Value>,
    /// Number of alternatives requested, when the port supports it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Budget hint for the backend (approximate maximum response length).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<u32>,
}

impl GenerationRequest {
    pub fn new(template: &str) -> Self {
        GenerationRequest {
            template: template.to_string(),
            vars: BTreeMap::new(),
            n: None,
            max_len: None,
        }
    }

    pub fn var(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.vars.insert(key.to_string(), value.into());
        self
    }

    /// Stable content hash over (template, vars, n); the call-log key.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&(&self.template, &self.vars, &self.n))
            .expect("serialize request");
        crate::fingerprint(canonical.as_bytes())
    }
}

/// A provider able to answer generation requests: mock, live HTTP, or replay.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn complete(&self, port: PortKind, req: &GenerationRequest) -> Result<String, PortError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CallRecord {
    pub seq: u64,
    pub port: PortKind,
    pub template: String,
    pub request_hash: String,
    pub vars: BTreeMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    pub response: String,
    pub retries: u32,
    pub backend: String,
}

/// Routes every external call through one place: template validation, retry
/// on transport failure, and an append-only call log.
pub struct Gateway {
    backend: Box<dyn Backend>,
    log: Mutex<Vec<CallRecord>>,
    retry_cap: u32,
}

impl Gateway {
    pub fn new(backend: Box<dyn Backend>) -> Self {
        Gateway { backend, log: Mutex::new(Vec::new()), retry_cap: 2 }
    }

    pub fn with_retry_cap(mut self, cap: u32) -> Self {
        self.retry_cap = cap;
        self
    }

    pub fn call(&self, port: PortKind, req: &GenerationRequest) -> Result<String, PortError> {
        templates::validate_bindings(&req.template, &req.vars)?;
        let mut retries = 0u32;
        let response = loop {
            match self.backend.complete(port, req) {
                Ok(text) => break text,
                Err(err) if err.is_transport() && retries < self.retry_cap => {
                    retries += 1;
                }
                Err(err) => return Err(err),
            }
        };
        let mut log = self.log.lock().expect("call log poisoned");
        let seq = log.len() as u64 + 1;
        log.push(CallRecord {
            seq,
            port,
            template: req.template.clone(),
            request_hash: req.hash(),
            vars: req.vars.clone(),
            n: req.n,
            response: response.clone(),
            retries,
            backend: self.backend.name().to_string(),
        });
        Ok(response)
    }

    pub fn call_log(&self) -> Vec<CallRecord> {
        self.log.lock().expect("call log poisoned").clone()
    }

    /// Number of calls answered by the live HTTP backend. Zero in mock and
    /// replay runs; the hermeticity tests assert on it.
    pub fn live_calls(&self) -> usize {
        self.log
            .lock()
            .expect("call log poisoned")
            .iter()
            .filter(|r| r.backend == http::BACKEND_NAME)
            .count()
    }

    pub fn write_call_log(&self, path: &std::path::Path) -> std::io::Result<()> {
        use std::io::Write;
        let mut file = std::fs::File::create(path)?;
        for record in self.log.lock().expect("call log poisoned").iter() {
            writeln!(file, "{}", serde_json::to_string(record).expect("serialize record"))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Typed capability contracts.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NameParent {
    pub new_label: String,
    pub type_label: String,
    pub relation: String,
    /// True when the dependency parent is the subject of the connecting fact.
    pub parent_is_subject: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NameRequest {
    pub entity_type_label: String,
    pub parents: Vec<NameParent>,
    pub n_candidates: u32,
}

pub trait NameGeneration {
    fn propose(&self, req: &NameRequest) -> Result<Vec<String>, PortError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PageFact {
    pub subject: String,
    /// True when the page entity is the subject of this fact.
    pub subject_is_page_entity: bool,
    /// True when the page entity is the object of this fact.
    pub object_is_page_entity: bool,
    pub relation: String,
    pub object: String,
    pub qualifiers: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PageRequest {
    pub title: String,
    pub entity_type: String,
    pub facts: Vec<PageFact>,
    pub relation_defs: BTreeMap<String, String>,
    pub related_types: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestoreRequest {
    pub text: String,
    pub synth_title: String,
    pub real_title: String,
    /// Synthetic label -> real label.
    pub label_map: BTreeMap<String, String>,
    /// Shifted timestamp -> original timestamp.
    pub date_map: BTreeMap<String, String>,
}

pub trait TextGeneration {
    fn render_page(&self, req: &PageRequest) -> Result<String, PortError>;
    fn annotate_refs(
        &self,
        draft: &str,
        refs: &BTreeMap<EntityId, String>,
    ) -> Result<String, PortError>;
    fn restore_real(&self, req: &RestoreRequest) -> Result<String, PortError>;
}

pub trait EntityGuess {
    fn guess(&self, page_text: &str) -> Result<String, PortError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionTemplate {
    pub id: String,
    pub subject: String,
    pub relation: String,
    /// Qualifier relation label for two-slot templates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExtractionRequest {
    pub page_content: String,
    pub templates: Vec<ExtractionTemplate>,
    pub relation_defs: BTreeMap<String, String>,
}

pub trait FactExtraction {
    /// Per template id, the extracted answer rows. Simple templates produce
    /// one-element rows; qualified templates produce [answer, qualifier] rows.
    fn extract(
        &self,
        req: &ExtractionRequest,
    ) -> Result<BTreeMap<String, Vec<Vec<String>>>, PortError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HopFact {
    pub subject: String,
    pub relation: String,
    pub relation_def: String,
    pub object: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComposedHop {
    pub question: String,
    pub answer: String,
    /// Whether the answer is a bridge entity (must not leak into the
    /// composed question).
    pub bridge: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComposeRequest {
    pub hops: Vec<ComposedHop>,
    pub root_labels: Vec<String>,
    pub relation_labels: Vec<String>,
    pub leaf_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Composition {
    Question(String),
    NoComposition,
}

pub trait QuestionGeneration {
    fn single_hops(&self, facts: &[HopFact]) -> Result<Vec<String>, PortError>;
    fn compose(&self, req: &ComposeRequest) -> Result<Composition, PortError>;
}

// ---------------------------------------------------------------------------
// Gateway-backed implementation of all capability traits.
// ---------------------------------------------------------------------------

/// Implements every typed port over a [`Gateway`]: serializes the typed
/// request both as renderable template variables and as a structured
/// `payload` variable, then parses the textual response.
pub struct PortClient<'a> {
    pub gateway: &'a Gateway,
}

impl<'a> PortClient<'a> {
    pub fn new(gateway: &'a Gateway) -> Self {
        PortClient { gateway }
    }
}

fn payload_var<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("serialize payload")
}

fn strip_code_fence(text: &str) -> &str {
    let trimmed = text.trim();
    let Some(inner) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let inner = inner.strip_prefix("json").unwrap_or(inner);
    inner.strip_suffix("```").unwrap_or(inner).trim()
}

/// Final "Answer:"-style tail of a reasoning response.
fn parse_tail<'t>(text: &'t str, marker: &str) -> Option<&'t str> {
    text.rfind(marker).map(|at| text[at + marker.len()..].trim())
}

impl NameGeneration for PortClient<'_> {
    fn propose(&self, req: &NameRequest) -> Result<Vec<String>, PortError> {
        let (template, port) = if req.parents.is_empty() {
            ("generate_names", PortKind::NameGeneration)
        } else {
            ("generate_name_dependent", PortKind::NameGeneration)
        };
        let mut request = GenerationRequest::new(template)
            .var("payload", payload_var(req))
            .var("instance_of_block", format!("- {}", req.entity_type_label));
        request.n = Some(req.n_candidates);
        if req.parents.is_empty() {
            request = request.var("num_names", req.n_candidates.to_string());
        } else {
            let mut block = String::new();
            for parent in &req.parents {
                block.push_str(&format!("{} is a:\n- {}\n", parent.new_label, parent.type_label));
                if parent.parent_is_subject {
                    block.push_str(&format!(
                        "Fact: {} -> {} -> entity X\n",
                        parent.new_label, parent.relation
                    ));
                } else {
                    block.push_str(&format!(
                        "Fact: entity X -> {} -> {}\n",
                        parent.relation, parent.new_label
                    ));
                }
            }
            request = request.var("related_facts_block", block);
        }
        let response = self.gateway.call(port, &request)?;
        let names: Vec<String> = response
            .lines()
            .flat_map(|line| line.split(','))
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if names.is_empty() {
            return Err(PortError::Malformed { message: "no candidate names".into() });
        }
        Ok(names)
    }
}

fn facts_block(facts: &[PageFact]) -> String {
    let mut block = String::new();
    for fact in facts {
        block.push_str(&format!("{} -> {} -> {}\n", fact.subject, fact.relation, fact.object));
        for (q, v) in &fact.qualifiers {
            block.push_str(&format!("  - {q} -> {v}\n"));
        }
    }
    block
}

fn defs_block(defs: &BTreeMap<String, String>) -> String {
    defs.iter().map(|(k, v)| format!("- \"{k}\": {v}\n")).collect()
}

impl TextGeneration for PortClient<'_> {
    fn render_page(&self, req: &PageRequest) -> Result<String, PortError> {
        let request = GenerationRequest::new("generate_page")
            .var("payload", payload_var(req))
            .var("page_title", req.title.clone())
            .var("instance_of_block", format!("- {}", req.entity_type))
            .var("relation_defs_block", defs_block(&req.relation_defs))
            .var("related_type_defs_block", "")
            .var("facts_block", facts_block(&req.facts))
            .var("related_instance_of_block", defs_block(&req.related_types));
        self.gateway.call(PortKind::PageGeneration, &request)
    }

    fn annotate_refs(
        &self,
        draft: &str,
        refs: &BTreeMap<EntityId, String>,
    ) -> Result<String, PortError> {
        let reference_json: BTreeMap<String, String> =
            refs.iter().map(|(id, label)| (id.to_string(), label.clone())).collect();
        let request = GenerationRequest::new("insert_symbolic_refs")
            .var("payload", payload_var(&(draft, &reference_json)))
            .var("article_text", draft.to_string())
            .var(
                "entity_reference_json",
                serde_json::to_string_pretty(&reference_json).expect("serialize refs"),
            );
        self.gateway.call(PortKind::ReferenceInsertion, &request)
    }

    fn restore_real(&self, req: &RestoreRequest) -> Result<String, PortError> {
        let mut mapping: BTreeMap<&String, &String> = req.label_map.iter().collect();
        mapping.extend(req.date_map.iter());
        let request = GenerationRequest::new("restore_real_mapped")
            .var("payload", payload_var(req))
            .var("text", req.text.clone())
            .var("synth_title", req.synth_title.clone())
            .var("real_title", req.real_title.clone())
            .var(
                "restore_mapping_json",
                serde_json::to_string_pretty(&mapping).expect("serialize mapping"),
            );
        self.gateway.call(PortKind::Restoration, &request)
    }
}

impl EntityGuess for PortClient<'_> {
    fn guess(&self, page_text: &str) -> Result<String, PortError> {
        let request = GenerationRequest::new("guess_entity")
            .var("payload", payload_var(&page_text))
            .var("page_content", page_text.to_string());
        let response = self.gateway.call(PortKind::NoveltyGuess, &request)?;
        parse_tail(&response, "Answer:")
            .map(str::to_string)
            .ok_or_else(|| PortError::Malformed { message: "missing Answer: tail".into() })
    }
}

impl FactExtraction for PortClient<'_> {
    fn extract(
        &self,
        req: &ExtractionRequest,
    ) -> Result<BTreeMap<String, Vec<Vec<String>>>, PortError> {
        let templates_json: BTreeMap<String, String> = req
            .templates
            .iter()
            .map(|t| {
                let text = match &t.qualifier {
                    None => format!("{} -> {} -> <ANS>", t.subject, t.relation),
                    Some(q) => format!(
                        "{} -> {} -> <ANS1> AND <ANS1> -> {} -> <ANS2>",
                        t.subject, t.relation, q
                    ),
                };
                (t.id.clone(), text)
            })
            .collect();
        let request = GenerationRequest::new("extract_facts")
            .var("payload", payload_var(req))
            .var("page_content", req.page_content.clone())
            .var("relation_defs_block", defs_block(&req.relation_defs))
            .var(
                "templates_json",
                serde_json::to_string_pretty(&templates_json).expect("serialize templates"),
            );
        let response = self.gateway.call(PortKind::FactExtraction, &request)?;
        let parsed: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(strip_code_fence(&response))
                .map_err(|e| PortError::Malformed { message: e.to_string() })?;
        let mut out = BTreeMap::new();
        for (id, value) in parsed {
            let rows = match value {
                serde_json::Value::Array(items) => items
                    .into_iter()
                    .map(|item| match item {
                        serde_json::Value::Array(cells) => cells
                            .into_iter()
                            .map(|c| c.as_str().unwrap_or_default().to_string())
                            .collect(),
                        other => vec![other.as_str().unwrap_or_default().to_string()],
                    })
                    .collect(),
                _ => Vec::new(),
            };
            out.insert(id, rows);
        }
        Ok(out)
    }
}

impl QuestionGeneration for PortClient<'_> {
    fn single_hops(&self, facts: &[HopFact]) -> Result<Vec<String>, PortError> {
        let mut facts_text = String::new();
        let mut defs = BTreeMap::new();
        for (i, fact) in facts.iter().enumerate() {
            match &fact.qualifier {
                None => facts_text.push_str(&format!(
                    "Q{}: {} -> {} -> {} <ANS{}>\n",
                    i + 1,
                    fact.subject,
                    fact.relation,
                    fact.object,
                    i + 1
                )),
                Some((q, v)) => facts_text.push_str(&format!(
                    "Q{}: {} -> [{} -> {} -> {}] -> {} <ANS{}>\n",
                    i + 1,
                    fact.subject,
                    fact.relation,
                    fact.object,
                    q,
                    v,
                    i + 1
                )),
            }
            defs.insert(fact.relation.clone(), fact.relation_def.clone());
        }
        let structure: String =
            (1..=facts.len()).map(|i| format!("Q{i}: E{i} -> R{i} -> E{} <ANS{i}>\n", i + 1)).collect();
        let request = GenerationRequest::new("single_hop_questions")
            .var("payload", payload_var(&facts))
            .var("structure_block", structure)
            .var("question_facts_block", facts_text)
            .var("relation_defs_block", defs_block(&defs));
        let response = self.gateway.call(PortKind::SingleHopQuestions, &request)?;
        let parsed: BTreeMap<String, String> = serde_json::from_str(strip_code_fence(&response))
            .map_err(|e| PortError::Malformed { message: e.to_string() })?;
        let mut questions = Vec::new();
        for i in 1..=facts.len() {
            let q = parsed
                .get(&format!("Q{i}"))
                .ok_or_else(|| PortError::Malformed { message: format!("missing Q{i}") })?;
            questions.push(q.clone());
        }
        Ok(questions)
    }

    fn compose(&self, req: &ComposeRequest) -> Result<Composition, PortError> {
        let mut block = String::new();
        for (i, hop) in req.hops.iter().enumerate() {
            let answer = if hop.bridge {
                format!("<bridge>{}</bridge>", hop.answer)
            } else {
                hop.answer.clone()
            };
            block.push_str(&format!("- Q{}: {} -> {}\n", i + 1, hop.question, answer));
        }
        let request = GenerationRequest::new("compose_multihop")
            .var("payload", payload_var(req))
            .var("decomposed_questions_block", block);
        let response = self.gateway.call(PortKind::MultiHopComposition, &request)?;
        let tail = parse_tail(&response, "Question:")
            .ok_or_else(|| PortError::Malformed { message: "missing Question: tail".into() })?;
        if tail.eq_ignore_ascii_case("no composition") {
            Ok(Composition::NoComposition)
        } else {
            Ok(Composition::Question(tail.to_string()))
        }
    }
}
