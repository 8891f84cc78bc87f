//! Deterministic mock backend: answers every port from the request content
//! alone, so full pipeline runs are reproducible byte-for-byte and hermetic.

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{
    Backend, ComposeRequest, ExtractionRequest, GenerationRequest, NameRequest, PageFact,
    PageRequest, PortError, PortKind, RestoreRequest,
};
use crate::text;

pub const BACKEND_NAME: &str = "mock";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuessStrategy {
    /// Never guesses the underlying entity; pages survive the novelty gate.
    AlwaysWrong,
    /// Always answers the given text.
    Fixed(String),
}

impl Default for GuessStrategy {
    fn default() -> Self {
        GuessStrategy::AlwaysWrong
    }
}

/// Behavior switches for the mock backend. Responses depend only on the
/// profile and the request, never on wall-clock or external state.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MockProfile {
    #[serde(default)]
    pub guess: GuessStrategy,
    /// Backend-invocation indices (1-based) mapped to how many consecutive
    /// transport failures to inject at that invocation.
    #[serde(default)]
    pub failures: BTreeMap<u64, u32>,
    /// Every Nth composition call answers "No composition".
    #[serde(default)]
    pub no_composition_every: Option<u64>,
}

pub struct MockBackend {
    profile: MockProfile,
    state: Mutex<MockState>,
}

#[derive(Default)]
struct MockState {
    invocations: u64,
    compose_calls: u64,
    pending_failures: Option<BTreeMap<u64, u32>>,
}

impl MockBackend {
    pub fn new(profile: MockProfile) -> Self {
        MockBackend { profile, state: Mutex::new(MockState::default()) }
    }
}

fn payload<T: for<'de> Deserialize<'de>>(req: &GenerationRequest) -> Result<T, PortError> {
    let value = req
        .vars
        .get("payload")
        .ok_or_else(|| PortError::Request { message: "mock call without payload".into() })?;
    serde_json::from_value(value.clone())
        .map_err(|e| PortError::Request { message: format!("bad payload: {e}") })
}

impl Backend for MockBackend {
    fn name(&self) -> &'static str {
        BACKEND_NAME
    }

    fn complete(&self, port: PortKind, req: &GenerationRequest) -> Result<String, PortError> {
        {
            let mut state = self.state.lock().expect("mock state");
            state.invocations += 1;
            let invocation = state.invocations;
            let pending =
                state.pending_failures.get_or_insert_with(|| self.profile.failures.clone());
            if let Some(remaining) = pending.get_mut(&invocation) {
                if *remaining > 0 {
                    *remaining -= 1;
                    // Re-arm at the next invocation index so consecutive
                    // retries keep failing until the count is exhausted.
                    let carry = *remaining;
                    if carry > 0 {
                        pending.insert(invocation + 1, carry);
                    }
                    return Err(PortError::Transport {
                        message: format!("injected failure at invocation {invocation}"),
                    });
                }
            }
        }
        match port {
            PortKind::NameGeneration => Ok(mock_names(&payload::<NameRequest>(req)?)),
            PortKind::PageGeneration => Ok(render_mock_page(&payload::<PageRequest>(req)?)),
            PortKind::ReferenceInsertion => {
                let (draft, refs): (String, BTreeMap<String, String>) = payload(req)?;
                Ok(mock_annotate(&draft, &refs))
            }
            PortKind::Restoration => Ok(mock_restore(&payload::<RestoreRequest>(req)?)),
            PortKind::NoveltyGuess => {
                let answer = match &self.profile.guess {
                    GuessStrategy::AlwaysWrong => "an entirely unrecorded subject".to_string(),
                    GuessStrategy::Fixed(text) => text.clone(),
                };
                Ok(format!("Thought: pattern analysis of the page.\nAnswer: {answer}"))
            }
            PortKind::FactExtraction => {
                let request: ExtractionRequest = payload(req)?;
                let rows = mock_extract(&request);
                Ok(serde_json::to_string(&rows).expect("serialize extraction"))
            }
            PortKind::SingleHopQuestions => {
                let facts: Vec<super::HopFact> = payload(req)?;
                let questions: BTreeMap<String, String> = facts
                    .iter()
                    .enumerate()
                    .map(|(i, f)| (format!("Q{}", i + 1), mock_single_hop(f)))
                    .collect();
                Ok(serde_json::to_string(&questions).expect("serialize questions"))
            }
            PortKind::MultiHopComposition => {
                let request: ComposeRequest = payload(req)?;
                let mut state = self.state.lock().expect("mock state");
                state.compose_calls += 1;
                if let Some(every) = self.profile.no_composition_every {
                    if every > 0 && state.compose_calls % every == 0 {
                        return Ok("Thought: too awkward.\nQuestion: No composition".to_string());
                    }
                }
                Ok(format!(
                    "Thought: chain the decomposed questions.\nQuestion: {}",
                    mock_compose(&request)
                ))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Name generation
// ---------------------------------------------------------------------------

const NAME_HEADS: &[&str] = &[
    "Vor", "Zel", "Quin", "Maru", "Tess", "Hald", "Bren", "Corv", "Dalr", "Fyn", "Garn", "Jesk",
    "Kelv", "Lorn", "Nev", "Polt", "Raud", "Selv", "Tovr", "Wyn",
];
const NAME_TAILS: &[&str] = &[
    "ath", "eck", "ion", "mir", "oss", "ull", "ara", "eth", "ova", "ine", "ard", "usk", "ent",
    "och", "yra", "iel", "orn", "ask", "ez", "um",
];

fn stable_hash(parts: &[&str]) -> u64 {
    let mut joined = String::new();
    for p in parts {
        joined.push_str(p);
        joined.push('\u{1f}');
    }
    let digest = crate::fingerprint(joined.as_bytes());
    u64::from_str_radix(&digest[..16], 16).expect("hex digest")
}

fn fantasy_word(hash: u64) -> String {
    let head = NAME_HEADS[(hash % NAME_HEADS.len() as u64) as usize];
    let tail = NAME_TAILS[((hash / 31) % NAME_TAILS.len() as u64) as usize];
    format!("{head}{tail}")
}

/// Deterministic candidate names. Dependent entities embed every parent's
/// new label so name derivation stays consistent down the dependency DAG.
/// Root names are two-word so the candidate space stays large enough for
/// universes with many entities of one type.
fn mock_names(req: &NameRequest) -> String {
    let parent_text: Vec<String> = req
        .parents
        .iter()
        .map(|p| format!("{}|{}|{}", p.new_label, p.type_label, p.relation))
        .collect();
    let key = format!("{}::{}", req.entity_type_label, parent_text.join(";"));
    let mut names = Vec::new();
    for i in 0..req.n_candidates.max(1) {
        let h = stable_hash(&[&key, &i.to_string()]);
        let name = if req.parents.is_empty() {
            format!("{} {}", fantasy_word(h), fantasy_word(h / 1009 + 17))
        } else {
            let parents: Vec<&str> =
                req.parents.iter().map(|p| p.new_label.as_str()).collect();
            format!("{} {}", parents.join(" "), fantasy_word(h))
        };
        names.push(name);
    }
    names.join(", ")
}

// ---------------------------------------------------------------------------
// Page generation
// ---------------------------------------------------------------------------

/// Placeholder used for the page entity itself so that renaming it never
/// touches the body sentences.
const SELF_MARKER: &str = "the subject";

fn render_fact_sentence(fact: &PageFact) -> String {
    let subject = if fact.subject_is_page_entity { SELF_MARKER } else { fact.subject.as_str() };
    let object = if fact.object_is_page_entity { SELF_MARKER } else { fact.object.as_str() };
    let mut sentence = format!(
        "Within this body of records, it is documented that {subject} \u{2192} {} \u{2192} {object}",
        fact.relation
    );
    for (q, v) in &fact.qualifiers {
        sentence.push_str(&format!(" (with qualifier {q} \u{2192} {v})"));
    }
    sentence.push_str(", and this statement is preserved verbatim among the catalogued entries of the page.");
    sentence
}

/// One-sentence-per-fact renderer: every provided fact is expressed, in
/// order, so downstream fact extraction recalls 100% of the inputs.
pub fn render_mock_page(req: &PageRequest) -> String {
    let mut out = format!(
        "{} is the subject of this reference page, which gathers the statements recorded for it across the catalogued material of this corpus.",
        req.title
    );
    for fact in &req.facts {
        out.push('\n');
        out.push_str(&render_fact_sentence(fact));
    }
    out
}

// ---------------------------------------------------------------------------
// Symbolic reference insertion
// ---------------------------------------------------------------------------

/// Wrap the first whole-word occurrence of each mapped label in a markdown
/// link, longest labels first so nested names never produce nested links.
fn mock_annotate(draft: &str, refs: &BTreeMap<String, String>) -> String {
    let mut by_length: Vec<(&String, &String)> = refs.iter().map(|(id, l)| (id, l)).collect();
    by_length.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));

    let mut claims: Vec<(usize, usize, String)> = Vec::new();
    for (id, label) in by_length {
        if label.is_empty() {
            continue;
        }
        let mut from = 0;
        while let Some(at) = text::find_word(draft, label, from) {
            let end = at + label.len();
            if claims.iter().any(|&(s, e, _)| at < e && s < end) {
                from = end;
                continue;
            }
            claims.push((at, end, format!("[{label}](<ref:{id}>)")));
            break;
        }
    }
    claims.sort_by_key(|&(s, _, _)| s);

    let mut out = String::with_capacity(draft.len() + claims.len() * 16);
    let mut cursor = 0;
    for (start, end, link) in claims {
        out.push_str(&draft[cursor..start]);
        out.push_str(&link);
        cursor = end;
    }
    out.push_str(&draft[cursor..]);
    out
}

// ---------------------------------------------------------------------------
// Real-mapped restoration
// ---------------------------------------------------------------------------

fn mock_restore(req: &RestoreRequest) -> String {
    let mut mapping: Vec<(String, String)> =
        req.label_map.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    mapping.extend(req.date_map.iter().map(|(k, v)| (k.clone(), v.clone())));
    text::replace_words(&req.text, &mapping)
}

// ---------------------------------------------------------------------------
// Fact extraction
// ---------------------------------------------------------------------------

const TITLE_SUFFIX: &str = " is the subject of this reference page";
const FACT_PREFIX: &str = "it is documented that ";
const QUALIFIER_OPEN: &str = " (with qualifier ";
const SENTENCE_TAIL: &str = ", and this statement is preserved";

fn page_title(content: &str) -> Option<&str> {
    let first = content.lines().next()?;
    first.find(TITLE_SUFFIX).map(|at| &first[..at])
}

/// Read answers back out of the deterministic page format.
fn mock_extract(req: &ExtractionRequest) -> BTreeMap<String, Vec<Vec<String>>> {
    let title = page_title(&req.page_content).unwrap_or_default();
    let mut out: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for template in &req.templates {
        let subject_text =
            if template.subject == title { SELF_MARKER } else { template.subject.as_str() };
        let needle =
            format!("{FACT_PREFIX}{subject_text} \u{2192} {} \u{2192} ", template.relation);
        let mut rows = Vec::new();
        for line in req.page_content.lines() {
            let Some(at) = line.find(&needle) else { continue };
            let rest = &line[at + needle.len()..];
            let object_end = rest
                .find(QUALIFIER_OPEN)
                .or_else(|| rest.find(SENTENCE_TAIL))
                .unwrap_or(rest.len());
            let object = &rest[..object_end];
            let object = if object == SELF_MARKER { title } else { object };
            match &template.qualifier {
                None => rows.push(vec![object.to_string()]),
                Some(qualifier) => {
                    let qneedle = format!("{QUALIFIER_OPEN}{qualifier} \u{2192} ");
                    let Some(qat) = rest.find(&qneedle) else { continue };
                    let qrest = &rest[qat + qneedle.len()..];
                    let Some(qend) = qrest.find(')') else { continue };
                    rows.push(vec![object.to_string(), qrest[..qend].to_string()]);
                }
            }
        }
        out.insert(template.id.clone(), rows);
    }
    out
}

// ---------------------------------------------------------------------------
// Question generation
// ---------------------------------------------------------------------------

fn mock_single_hop(fact: &super::HopFact) -> String {
    match &fact.qualifier {
        Some((_, value)) => format!(
            "As of {value}, what do the records give as the {} of {}?",
            fact.relation, fact.subject
        ),
        None => format!("What do the records give as the {} of {}?", fact.relation, fact.subject),
    }
}

fn mock_compose(req: &ComposeRequest) -> String {
    let roots = req.root_labels.join(" and ");
    let relations = req.relation_labels.join(", then ");
    format!(
        "Starting from {roots} and following the relations {relations} through the linked records, what is the final value reached?"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ports::{ExtractionTemplate, NameParent};

    fn fact(subject: &str, relation: &str, object: &str, from_page: bool) -> PageFact {
        PageFact {
            subject: subject.to_string(),
            subject_is_page_entity: from_page,
            object_is_page_entity: false,
            relation: relation.to_string(),
            object: object.to_string(),
            qualifiers: vec![],
        }
    }

    fn page_request(title: &str, facts: Vec<PageFact>) -> PageRequest {
        PageRequest {
            title: title.to_string(),
            entity_type: "person".to_string(),
            facts,
            relation_defs: BTreeMap::new(),
            related_types: BTreeMap::new(),
        }
    }

    #[test]
    fn page_renders_one_sentence_per_fact() {
        let req = page_request(
            "Quor",
            vec![fact("Quor", "award received", "The Lantern", true),
                 fact("Quor", "residence", "Myrthwood", true)],
        );
        let page = render_mock_page(&req);
        assert_eq!(page.lines().count(), 3);
        assert!(page.contains("The Lantern"));
        assert!(page.contains("Myrthwood"));
    }

    #[test]
    fn qualified_fact_carries_qualifier_clause() {
        let mut f = fact("Quor", "award received", "The Lantern", true);
        f.qualifiers.push(("point in time".to_string(), "2043".to_string()));
        let page = render_mock_page(&page_request("Quor", vec![f]));
        assert!(page.contains("(with qualifier point in time \u{2192} 2043)"));
    }

    #[test]
    fn page_rendering_is_deterministic() {
        let req = page_request("Quor", vec![fact("Quor", "residence", "Myrthwood", true)]);
        assert_eq!(render_mock_page(&req), render_mock_page(&req));
    }

    #[test]
    fn extraction_recovers_every_rendered_fact() {
        let mut qualified = fact("Quor", "award received", "The Lantern", true);
        qualified.qualifiers.push(("point in time".to_string(), "2043".to_string()));
        let req = page_request(
            "Quor",
            vec![qualified, fact("Quor", "residence", "Myrthwood", true)],
        );
        let page = render_mock_page(&req);
        let extraction = mock_extract(&ExtractionRequest {
            page_content: page,
            templates: vec![
                ExtractionTemplate {
                    id: "T0".into(),
                    subject: "Quor".into(),
                    relation: "award received".into(),
                    qualifier: Some("point in time".into()),
                },
                ExtractionTemplate {
                    id: "T1".into(),
                    subject: "Quor".into(),
                    relation: "residence".into(),
                    qualifier: None,
                },
                ExtractionTemplate {
                    id: "T2".into(),
                    subject: "Quor".into(),
                    relation: "member of".into(),
                    qualifier: None,
                },
            ],
            relation_defs: BTreeMap::new(),
        });
        assert_eq!(extraction["T0"], vec![vec!["The Lantern".to_string(), "2043".to_string()]]);
        assert_eq!(extraction["T1"], vec![vec!["Myrthwood".to_string()]]);
        assert!(extraction["T2"].is_empty());
    }

    #[test]
    fn annotate_links_first_occurrence_longest_label_first() {
        let mut refs = BTreeMap::new();
        refs.insert("Q1".to_string(), "Vel Harbor".to_string());
        refs.insert("Q2".to_string(), "Vel".to_string());
        let out = mock_annotate("Vel Harbor lies beyond Vel. Vel Harbor endures.", &refs);
        assert!(out.starts_with("[Vel Harbor](<ref:Q1>) lies beyond [Vel](<ref:Q2>)."));
        assert!(out.ends_with("Vel Harbor endures."));
    }

    #[test]
    fn restore_replaces_labels_and_dates() {
        let req = RestoreRequest {
            text: "[Quor](<ref:Q7>) was born on 1974-01-15 in Myrthwood.".to_string(),
            synth_title: "Quor".to_string(),
            real_title: "Silverberg".to_string(),
            label_map: BTreeMap::from([
                ("Quor".to_string(), "Silverberg".to_string()),
                ("Myrthwood".to_string(), "Brooklyn".to_string()),
            ]),
            date_map: BTreeMap::from([("1974-01-15".to_string(), "1935-01-15".to_string())]),
        };
        let out = mock_restore(&req);
        assert_eq!(out, "[Silverberg](<ref:Q7>) was born on 1935-01-15 in Brooklyn.");
    }

    #[test]
    fn dependent_names_embed_parents() {
        let req = NameRequest {
            entity_type_label: "ice hockey team".to_string(),
            parents: vec![NameParent {
                new_label: "Metronis".to_string(),
                type_label: "city".to_string(),
                relation: "located in".to_string(),
                parent_is_subject: false,
            }],
            n_candidates: 3,
        };
        let names = mock_names(&req);
        for candidate in names.split(',') {
            assert!(candidate.contains("Metronis"));
        }
    }
}
