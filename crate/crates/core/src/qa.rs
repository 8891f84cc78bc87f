//! Multi-hop QA construction: validate which facts each page expresses,
//! build the global fact graph, sample reasoning motifs under the dataset
//! constraints, compose parallel single- and multi-hop questions, and
//! re-validate the emitted dataset independently.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, SymbolicPage, Variant};
use crate::eval::normalize_answer;
use crate::kg::{EntityId, FactObject, Relation};
use crate::perturb::{shift_timestamp_value, RenamePlan};
use crate::ports::{
    ComposeRequest, ComposedHop, Composition, ExtractionRequest, ExtractionTemplate,
    FactExtraction, HopFact, PortError, QuestionGeneration,
};
use crate::sampler::Universe;
use crate::text;

#[derive(Debug, Error)]
pub enum QaError {
    #[error("invalid motif {name}: {message}")]
    InvalidMotif { name: String, message: String },
    #[error("remap failed: no real label for {0}")]
    Unmapped(EntityId),
    #[error(transparent)]
    Port(#[from] PortError),
}

// ---------------------------------------------------------------------------
// Fact validation and the fact graph
// ---------------------------------------------------------------------------

/// Which of the page's source facts the page text actually expresses.
///
/// Builds blank-object templates (two-slot templates when a timestamp
/// qualifier is present), asks the extraction port, and keeps the facts
/// whose extracted answers match the true labels after normalization.
pub fn extract_present_facts(
    page: &SymbolicPage,
    fact_indices: &[usize],
    universe: &Universe,
    extractor: &dyn FactExtraction,
) -> Result<Vec<usize>, PortError> {
    let mut templates = Vec::new();
    for (i, &idx) in fact_indices.iter().enumerate() {
        let fact = &universe.graph.facts[idx];
        templates.push(ExtractionTemplate {
            id: format!("T{i}"),
            subject: universe.label(&fact.subject).to_string(),
            relation: fact.relation.label.clone(),
            qualifier: fact.timestamp_qualifier().map(|q| q.relation.label.clone()),
        });
    }
    let relation_defs = universe.graph.relation_defs.clone();
    let rows = extractor.extract(&ExtractionRequest {
        page_content: page.plain_text(),
        templates,
        relation_defs,
    })?;

    let mut validated = Vec::new();
    for (i, &idx) in fact_indices.iter().enumerate() {
        let fact = &universe.graph.facts[idx];
        let truth_object = match &fact.object {
            FactObject::Entity(id) => universe.label(id).to_string(),
            FactObject::Literal(literal) => literal.value.clone(),
        };
        let truth_tokens = normalize_answer(&truth_object);
        let qualifier_tokens = fact
            .timestamp_qualifier()
            .map(|q| normalize_answer(&q.value.value));
        let Some(answers) = rows.get(&format!("T{i}")) else { continue };
        let hit = answers.iter().any(|row| match (&qualifier_tokens, row.len()) {
            (None, 1) => normalize_answer(&row[0]) == truth_tokens,
            (Some(qt), 2) => {
                normalize_answer(&row[0]) == truth_tokens && &normalize_answer(&row[1]) == qt
            }
            _ => false,
        });
        if hit {
            validated.push(idx);
        }
    }
    Ok(validated)
}

/// A directed fact edge annotated with its source page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactEdge {
    pub subject: EntityId,
    pub relation: Relation,
    pub object: EntityId,
    pub page: EntityId,
    /// First timestamp qualifier (label, value in synth form), if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualifier: Option<(String, String)>,
}

impl FactEdge {
    /// Identity of the underlying fact, page excluded.
    pub fn fact_key(&self) -> (EntityId, String, EntityId) {
        (self.subject.clone(), self.relation.id.clone(), self.object.clone())
    }
}

/// Global fact graph: nodes are entities, edges are validated facts with
/// page annotations. Structure is identical for RM and SM by construction
/// because everything is id-level.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FactGraph {
    pub edges: Vec<FactEdge>,
    #[serde(skip)]
    by_subject: BTreeMap<EntityId, Vec<usize>>,
    #[serde(skip)]
    by_object: BTreeMap<EntityId, Vec<usize>>,
}

impl FactGraph {
    pub fn from_edges(edges: Vec<FactEdge>) -> Self {
        let mut graph = FactGraph { edges, ..Default::default() };
        graph.reindex();
        graph
    }

    pub fn reindex(&mut self) {
        self.by_subject.clear();
        self.by_object.clear();
        for (idx, edge) in self.edges.iter().enumerate() {
            self.by_subject.entry(edge.subject.clone()).or_default().push(idx);
            self.by_object.entry(edge.object.clone()).or_default().push(idx);
        }
    }

    pub fn nodes(&self) -> BTreeSet<EntityId> {
        self.edges
            .iter()
            .flat_map(|e| [e.subject.clone(), e.object.clone()])
            .collect()
    }
}

/// One edge per validated (fact, source page) over entity-valued facts.
pub fn build_fact_graph(
    corpus: &Corpus,
    validated: &BTreeMap<EntityId, Vec<usize>>,
    universe: &Universe,
) -> FactGraph {
    let retained = corpus.retained_ids();
    let mut edges = Vec::new();
    for (page, indices) in validated {
        if !retained.contains(page) {
            continue;
        }
        for &idx in indices {
            let fact = &universe.graph.facts[idx];
            let Some(object) = fact.object.as_entity() else { continue };
            edges.push(FactEdge {
                subject: fact.subject.clone(),
                relation: fact.relation.clone(),
                object: object.clone(),
                page: page.clone(),
                qualifier: fact
                    .timestamp_qualifier()
                    .map(|q| (q.relation.label.clone(), q.value.value.clone())),
            });
        }
    }
    edges.sort_by(|a, b| {
        (&a.page, &a.subject, &a.relation.id, &a.object).cmp(&(
            &b.page,
            &b.subject,
            &b.relation.id,
            &b.object,
        ))
    });
    FactGraph::from_edges(edges)
}

// ---------------------------------------------------------------------------
// Motifs
// ---------------------------------------------------------------------------

/// A reasoning-motif shape: directed pattern edges over node slots. Roots
/// are slots with no incoming edge; the answer leaf is the unique slot with
/// no outgoing edge; everything else is a bridge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Motif {
    pub name: String,
    pub edges: Vec<(u8, u8)>,
}

impl Motif {
    pub fn hop_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.edges
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .max()
            .map(|m| m as usize + 1)
            .unwrap_or(0)
    }

    pub fn roots(&self) -> Vec<u8> {
        let targets: BTreeSet<u8> = self.edges.iter().map(|&(_, b)| b).collect();
        (0..self.node_count() as u8).filter(|n| !targets.contains(n)).collect()
    }

    pub fn leaves(&self) -> Vec<u8> {
        let sources: BTreeSet<u8> = self.edges.iter().map(|&(a, _)| a).collect();
        (0..self.node_count() as u8).filter(|n| !sources.contains(n)).collect()
    }

    pub fn leaf(&self) -> u8 {
        self.leaves()[0]
    }

    pub fn bridges(&self) -> Vec<u8> {
        let roots: BTreeSet<u8> = self.roots().into_iter().collect();
        let leaves: BTreeSet<u8> = self.leaves().into_iter().collect();
        (0..self.node_count() as u8)
            .filter(|n| !roots.contains(n) && !leaves.contains(n))
            .collect()
    }

    pub fn validate(&self) -> Result<(), QaError> {
        let fail = |message: &str| {
            Err(QaError::InvalidMotif { name: self.name.clone(), message: message.to_string() })
        };
        if self.edges.is_empty() {
            return fail("no edges");
        }
        if self.leaves().len() != 1 {
            return fail("exactly one answer leaf required");
        }
        if self.roots().is_empty() {
            return fail("at least one root required");
        }
        // Weak connectivity over the node slots.
        let n = self.node_count();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(a, b) in &self.edges {
            adj[a as usize].insert(b as usize);
            adj[b as usize].insert(a as usize);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != n {
            return fail("pattern must be weakly connected");
        }
        Ok(())
    }
}

/// The shipped six-shape catalog: chains of 2 to 4 hops and three branched
/// shapes where two roots converge.
pub fn default_motif_catalog() -> Vec<Motif> {
    let shapes: Vec<Motif> =
        serde_json::from_str(include_str!("../assets/motifs.json")).expect("motif catalog");
    for motif in &shapes {
        motif.validate().expect("catalog motif");
    }
    shapes
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MotifInstance {
    pub motif: String,
    /// Concrete entity per pattern slot.
    pub nodes: Vec<EntityId>,
    /// Concrete edges in pattern-edge order.
    pub edges: Vec<FactEdge>,
}

impl MotifInstance {
    pub fn edge_keys(&self) -> BTreeSet<(EntityId, String, EntityId)> {
        self.edges.iter().map(|e| e.fact_key()).collect()
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MotifShortfall {
    pub requested: usize,
    pub sampled: usize,
    pub removed_as_submotif: usize,
    pub discarded_single_hop: usize,
    pub discarded_composition: usize,
    pub emitted: usize,
}

/// Per-motif cap on how often one fact or one bridge entity may recur.
pub const REUSE_CAP: usize = 5;

/// Sample concrete motif instantiations under the dataset constraints:
/// pairwise-distinct entities, every edge from a different page, one
/// instantiation per (root configuration, relation sequence), and at most
/// five uses of any fact or bridge entity within the motif's samples.
pub fn sample_motifs(
    graph: &FactGraph,
    motif: &Motif,
    budget: usize,
    rng_seed: u64,
) -> Vec<MotifInstance> {
    if graph.edges.is_empty() || budget == 0 {
        return Vec::new();
    }
    let n_slots = motif.node_count();
    let bridges = motif.bridges();
    let roots = motif.roots();

    // Order pattern edges so every edge after the first touches a bound slot.
    let mut order: Vec<usize> = Vec::new();
    let mut bound_slots: BTreeSet<u8> = BTreeSet::new();
    while order.len() < motif.edges.len() {
        let next = (0..motif.edges.len())
            .find(|i| {
                !order.contains(i)
                    && (order.is_empty()
                        || bound_slots.contains(&motif.edges[*i].0)
                        || bound_slots.contains(&motif.edges[*i].1))
            })
            .expect("motif is connected");
        bound_slots.insert(motif.edges[next].0);
        bound_slots.insert(motif.edges[next].1);
        order.push(next);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut accepted: Vec<MotifInstance> = Vec::new();
    let mut seen_chains: BTreeSet<String> = BTreeSet::new();
    let mut fact_uses: BTreeMap<(EntityId, String, EntityId), usize> = BTreeMap::new();
    let mut bridge_uses: BTreeMap<EntityId, usize> = BTreeMap::new();
    let max_attempts = (budget * 200).max(2000);

    'attempts: for _ in 0..max_attempts {
        if accepted.len() >= budget {
            break;
        }
        let mut binding: Vec<Option<EntityId>> = vec![None; n_slots];
        let mut used_pages: BTreeSet<EntityId> = BTreeSet::new();
        let mut chosen: Vec<Option<FactEdge>> = vec![None; motif.edges.len()];

        for &edge_pos in &order {
            let (u, v) = motif.edges[edge_pos];
            let candidates: Vec<&FactEdge> = match (&binding[u as usize], &binding[v as usize]) {
                (Some(subject), _) => graph
                    .by_subject
                    .get(subject)
                    .into_iter()
                    .flatten()
                    .map(|&i| &graph.edges[i])
                    .collect(),
                (None, Some(object)) => graph
                    .by_object
                    .get(object)
                    .into_iter()
                    .flatten()
                    .map(|&i| &graph.edges[i])
                    .collect(),
                (None, None) => graph.edges.iter().collect(),
            };
            let viable: Vec<&FactEdge> = candidates
                .into_iter()
                .filter(|edge| {
                    if used_pages.contains(&edge.page) {
                        return false;
                    }
                    let subject_ok = match &binding[u as usize] {
                        Some(bound) => bound == &edge.subject,
                        None => !binding.iter().flatten().any(|b| b == &edge.subject),
                    };
                    let object_ok = match &binding[v as usize] {
                        Some(bound) => bound == &edge.object,
                        None => !binding.iter().flatten().any(|b| b == &edge.object),
                    };
                    // Distinctness also forbids the two endpoints binding to
                    // one entity.
                    subject_ok && object_ok && edge.subject != edge.object
                })
                .collect();
            if viable.is_empty() {
                continue 'attempts;
            }
            let pick = viable[rng.gen_range(0..viable.len())].clone();
            binding[u as usize] = Some(pick.subject.clone());
            binding[v as usize] = Some(pick.object.clone());
            used_pages.insert(pick.page.clone());
            chosen[edge_pos] = Some(pick);
        }

        let nodes: Vec<EntityId> =
            binding.into_iter().map(|b| b.expect("all slots bound")).collect();
        let edges: Vec<FactEdge> =
            chosen.into_iter().map(|c| c.expect("all edges chosen")).collect();

        // One reasoning chain per (root configuration, relation sequence).
        let chain_key = format!(
            "{}|{}",
            roots
                .iter()
                .map(|&r| nodes[r as usize].to_string())
                .collect::<Vec<_>>()
                .join(","),
            edges.iter().map(|e| e.relation.id.clone()).collect::<Vec<_>>().join(",")
        );
        if seen_chains.contains(&chain_key) {
            continue;
        }
        // Reuse caps over facts and bridge entities.
        if edges.iter().any(|e| fact_uses.get(&e.fact_key()).copied().unwrap_or(0) >= REUSE_CAP)
        {
            continue;
        }
        if bridges
            .iter()
            .any(|&b| bridge_uses.get(&nodes[b as usize]).copied().unwrap_or(0) >= REUSE_CAP)
        {
            continue;
        }

        seen_chains.insert(chain_key);
        for edge in &edges {
            *fact_uses.entry(edge.fact_key()).or_default() += 1;
        }
        for &b in &bridges {
            *bridge_uses.entry(nodes[b as usize].clone()).or_default() += 1;
        }
        accepted.push(MotifInstance { motif: motif.name.clone(), nodes, edges });
    }
    accepted
}

/// Remove every n-hop instance (n > 1) whose edge set is contained in some
/// higher-hop instance's edge set, across motif shapes. Containment is
/// tested on fact identity (page annotations excluded).
pub fn dedupe_submotifs(instances: Vec<MotifInstance>) -> (Vec<MotifInstance>, usize) {
    let keys: Vec<BTreeSet<(EntityId, String, EntityId)>> =
        instances.iter().map(|i| i.edge_keys()).collect();
    let mut keep = vec![true; instances.len()];
    for (i, key_set) in keys.iter().enumerate() {
        if instances[i].edges.len() <= 1 {
            continue;
        }
        let contained = keys.iter().enumerate().any(|(j, other)| {
            j != i && instances[j].edges.len() > instances[i].edges.len()
                && key_set.is_subset(other)
        });
        if contained {
            keep[i] = false;
        }
    }
    let removed = keep.iter().filter(|k| !**k).count();
    let kept = instances
        .into_iter()
        .zip(keep)
        .filter_map(|(instance, keep)| keep.then_some(instance))
        .collect();
    (kept, removed)
}

// ---------------------------------------------------------------------------
// Question composition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleHop {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubgraphEdge {
    pub subject: EntityId,
    pub relation: Relation,
    pub object: EntityId,
    pub page: EntityId,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaInstance {
    pub pair_id: String,
    pub motif: String,
    pub variant: Variant,
    pub question: String,
    pub answer: String,
    pub single_hops: Vec<SingleHop>,
    pub gold_page_ids: Vec<EntityId>,
    pub subgraph: Vec<SubgraphEdge>,
}

#[derive(Debug)]
enum ComposeOutcome {
    Composed { question: String, single_hops: Vec<SingleHop> },
    Discarded(DiscardReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DiscardReason {
    SingleHop,
    Composition,
}

fn hop_fact(edge: &FactEdge, universe: &Universe) -> HopFact {
    HopFact {
        subject: universe.label(&edge.subject).to_string(),
        relation: edge.relation.label.clone(),
        relation_def: universe
            .graph
            .relation_defs
            .get(&edge.relation.id)
            .cloned()
            .unwrap_or_default(),
        object: universe.label(&edge.object).to_string(),
        qualifier: edge.qualifier.clone(),
    }
}

/// A single-hop question must mention its subject and must not reveal its
/// answer.
fn single_hop_ok(question: &str, subject: &str, answer: &str) -> bool {
    text::contains_word(question, subject) && !text::contains_word(question, answer)
}

fn compose_instance(
    instance: &MotifInstance,
    motif: &Motif,
    universe: &Universe,
    qgen: &dyn QuestionGeneration,
    retry_cap: u32,
) -> Result<ComposeOutcome, PortError> {
    let hops: Vec<HopFact> = instance.edges.iter().map(|e| hop_fact(e, universe)).collect();
    let mut questions = qgen.single_hops(&hops)?;
    for (i, hop) in hops.iter().enumerate() {
        let mut retry = 0;
        while !single_hop_ok(&questions[i], &hop.subject, &hop.object) {
            if retry >= retry_cap {
                return Ok(ComposeOutcome::Discarded(DiscardReason::SingleHop));
            }
            retry += 1;
            questions[i] = qgen.single_hops(std::slice::from_ref(hop))?.remove(0);
        }
    }

    let bridge_slots: BTreeSet<u8> = motif.bridges().into_iter().collect();
    let bridge_labels: BTreeSet<String> = bridge_slots
        .iter()
        .map(|&b| universe.label(&instance.nodes[b as usize]).to_string())
        .collect();
    let root_labels: Vec<String> = motif
        .roots()
        .iter()
        .map(|&r| universe.label(&instance.nodes[r as usize]).to_string())
        .collect();
    let leaf_label = universe.label(&instance.nodes[motif.leaf() as usize]).to_string();

    let compose_request = ComposeRequest {
        hops: instance
            .edges
            .iter()
            .zip(&questions)
            .map(|(edge, question)| ComposedHop {
                question: question.clone(),
                answer: universe.label(&edge.object).to_string(),
                bridge: bridge_slots
                    .iter()
                    .any(|&b| instance.nodes[b as usize] == edge.object),
            })
            .collect(),
        root_labels: root_labels.clone(),
        relation_labels: instance.edges.iter().map(|e| e.relation.label.clone()).collect(),
        leaf_label: leaf_label.clone(),
    };

    let mut retry = 0;
    let composed = loop {
        match qgen.compose(&compose_request)? {
            Composition::NoComposition => {
                return Ok(ComposeOutcome::Discarded(DiscardReason::Composition))
            }
            Composition::Question(question) => {
                let roots_ok =
                    root_labels.iter().all(|root| text::contains_word(&question, root));
                let bridges_ok =
                    bridge_labels.iter().all(|b| !text::contains_word(&question, b));
                if roots_ok && bridges_ok {
                    break question;
                }
                if retry >= retry_cap {
                    return Ok(ComposeOutcome::Discarded(DiscardReason::Composition));
                }
                retry += 1;
            }
        }
    };

    let single_hops = instance
        .edges
        .iter()
        .zip(questions)
        .map(|(edge, question)| SingleHop {
            question,
            answer: universe.label(&edge.object).to_string(),
        })
        .collect();
    Ok(ComposeOutcome::Composed { question: composed, single_hops })
}

/// Substitute synthetic surface forms (labels and shifted dates) with their
/// real counterparts across the question, answer, and single hops.
pub fn remap_question(
    sm: &QaInstance,
    plan: &RenamePlan,
    real_universe: &Universe,
) -> Result<QaInstance, QaError> {
    let mut mapping: Vec<(String, String)> = Vec::new();
    let mut involved: BTreeSet<EntityId> = BTreeSet::new();
    for edge in &sm.subgraph {
        involved.insert(edge.subject.clone());
        involved.insert(edge.object.clone());
    }
    for id in &involved {
        if let Some(synth_label) = plan.mapping.get(id) {
            let real_label = real_universe.label(id);
            if real_label.is_empty() {
                return Err(QaError::Unmapped(id.clone()));
            }
            mapping.push((synth_label.clone(), real_label.to_string()));
        }
    }
    // Shifted dates are remapped together with labels.
    let remap_text = |text_in: &str| -> String {
        let mut out = text::replace_words(text_in, &mapping);
        out = unshift_dates(&out, plan.delta_years);
        out
    };
    Ok(QaInstance {
        pair_id: sm.pair_id.clone(),
        motif: sm.motif.clone(),
        variant: Variant::Rm,
        question: remap_text(&sm.question),
        answer: remap_text(&sm.answer),
        single_hops: sm
            .single_hops
            .iter()
            .map(|h| SingleHop {
                question: remap_text(&h.question),
                answer: remap_text(&h.answer),
            })
            .collect(),
        gold_page_ids: sm.gold_page_ids.clone(),
        subgraph: sm.subgraph.clone(),
    })
}

/// Shift every date-shaped token (`YYYY`, `YYYY-MM`, `YYYY-MM-DD`) back by
/// `delta` years.
fn unshift_dates(text_in: &str, delta: i64) -> String {
    if delta == 0 {
        return text_in.to_string();
    }
    let mut out = String::with_capacity(text_in.len());
    let chars: Vec<char> = text_in.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_ascii_digit()
            && (i == 0 || (!chars[i - 1].is_ascii_digit() && chars[i - 1] != '-'))
        {
            let start = i;
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '-') {
                j += 1;
            }
            let token: String = chars[start..j].iter().collect();
            let token = token.trim_end_matches('-');
            let j = start + token.chars().count();
            if looks_like_date(token) {
                if let Some(shifted) = shift_timestamp_value(token, -delta) {
                    out.push_str(&shifted);
                    i = j;
                    continue;
                }
            }
            out.push_str(token);
            i = j;
        } else {
            out.push(chars[i]);
            i += 1;
        }
    }
    out
}

fn looks_like_date(token: &str) -> bool {
    let parts: Vec<&str> = token.split('-').collect();
    match parts.len() {
        1 => parts[0].len() == 4 && parts[0].chars().all(|c| c.is_ascii_digit()),
        2 | 3 => {
            parts[0].len() == 4
                && parts.iter().all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()))
        }
        _ => false,
    }
}

// ---------------------------------------------------------------------------
// Dataset assembly
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QaConfig {
    pub budget_per_motif: usize,
    pub rng_seed: u64,
    pub retry_cap: u32,
}

impl Default for QaConfig {
    fn default() -> Self {
        QaConfig { budget_per_motif: 200, rng_seed: 0, retry_cap: 2 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct QaShortfall {
    pub per_motif: BTreeMap<String, MotifShortfall>,
}

/// Full QA construction over a built corpus: validate expressed facts,
/// build the fact graph, sample every catalog motif, dedupe sub-motifs,
/// compose SM questions, and remap RM twins.
#[allow(clippy::too_many_arguments)]
pub fn build_qa_dataset(
    corpus: &Corpus,
    real_universe: &Universe,
    synth_universe: &Universe,
    plan: &RenamePlan,
    catalog: &[Motif],
    extractor: &dyn FactExtraction,
    qgen: &dyn QuestionGeneration,
    config: &QaConfig,
) -> Result<(Vec<QaInstance>, Vec<QaInstance>, QaShortfall), QaError> {
    // Per-page fact validation on the synth-mapped pages.
    let mut validated: BTreeMap<EntityId, Vec<usize>> = BTreeMap::new();
    for id in corpus.retained_ids() {
        let page = corpus.page_view(&id, Variant::Sm).expect("retained page");
        let fact_indices = crate::corpus::select_fact_orientation(&id, synth_universe);
        if fact_indices.is_empty() {
            continue;
        }
        match extract_present_facts(page, &fact_indices, synth_universe, extractor) {
            Ok(indices) => {
                validated.insert(id, indices);
            }
            // Extraction failure excludes the page's facts from QA.
            Err(err) if err.is_transport() => continue,
            Err(err) => return Err(err.into()),
        }
    }
    let fact_graph = build_fact_graph(corpus, &validated, synth_universe);

    // Sample all motifs, then remove contained sub-motifs across shapes.
    let mut shortfall = QaShortfall::default();
    let mut sampled: Vec<MotifInstance> = Vec::new();
    for (i, motif) in catalog.iter().enumerate() {
        motif.validate()?;
        let instances = sample_motifs(
            &fact_graph,
            motif,
            config.budget_per_motif,
            config.rng_seed.wrapping_add(i as u64),
        );
        shortfall.per_motif.insert(
            motif.name.clone(),
            MotifShortfall {
                requested: config.budget_per_motif,
                sampled: instances.len(),
                ..Default::default()
            },
        );
        sampled.extend(instances);
    }
    let before = sampled.len();
    let (kept, _removed) = dedupe_submotifs(sampled);
    let removed_total = before - kept.len();
    // Attribute removals to their motif for the report.
    {
        let mut removed_by_motif: BTreeMap<&str, usize> = BTreeMap::new();
        let mut kept_by_motif: BTreeMap<&str, usize> = BTreeMap::new();
        for instance in &kept {
            *kept_by_motif.entry(instance.motif.as_str()).or_default() += 1;
        }
        for (name, stats) in shortfall.per_motif.iter_mut() {
            let kept_count = kept_by_motif.get(name.as_str()).copied().unwrap_or(0);
            let removed = stats.sampled - kept_count;
            stats.removed_as_submotif = removed;
            *removed_by_motif.entry("total").or_default() += removed;
        }
        debug_assert_eq!(
            removed_by_motif.get("total").copied().unwrap_or(0),
            removed_total
        );
    }

    let by_name: BTreeMap<&str, &Motif> =
        catalog.iter().map(|m| (m.name.as_str(), m)).collect();
    let mut sm_instances = Vec::new();
    let mut rm_instances = Vec::new();
    let mut serial = 0usize;
    for instance in &kept {
        let motif = by_name[instance.motif.as_str()];
        let outcome =
            compose_instance(instance, motif, synth_universe, qgen, config.retry_cap)?;
        let stats = shortfall.per_motif.get_mut(&instance.motif).expect("motif stats");
        match outcome {
            ComposeOutcome::Discarded(DiscardReason::SingleHop) => {
                stats.discarded_single_hop += 1;
            }
            ComposeOutcome::Discarded(DiscardReason::Composition) => {
                stats.discarded_composition += 1;
            }
            ComposeOutcome::Composed { question, single_hops } => {
                let pair_id = format!("qa-{serial:05}");
                serial += 1;
                let gold_page_ids: Vec<EntityId> =
                    instance.edges.iter().map(|e| e.page.clone()).collect();
                let subgraph: Vec<SubgraphEdge> = instance
                    .edges
                    .iter()
                    .map(|e| SubgraphEdge {
                        subject: e.subject.clone(),
                        relation: e.relation.clone(),
                        object: e.object.clone(),
                        page: e.page.clone(),
                    })
                    .collect();
                let leaf_label =
                    synth_universe.label(&instance.nodes[motif.leaf() as usize]).to_string();
                let sm = QaInstance {
                    pair_id,
                    motif: instance.motif.clone(),
                    variant: Variant::Sm,
                    question,
                    answer: leaf_label,
                    single_hops,
                    gold_page_ids,
                    subgraph,
                };
                let rm = remap_question(&sm, plan, real_universe)?;
                stats.emitted += 1;
                sm_instances.push(sm);
                rm_instances.push(rm);
            }
        }
    }
    Ok((rm_instances, sm_instances, shortfall))
}

// ---------------------------------------------------------------------------
// Independent dataset validation
// ---------------------------------------------------------------------------

/// Re-checks the emitted dataset against the construction constraints,
/// independent of the sampler's internal state.
pub fn validate_qa_datasets(
    rm: &[QaInstance],
    sm: &[QaInstance],
    catalog: &[Motif],
) -> Vec<String> {
    let mut violations = Vec::new();
    let by_name: BTreeMap<&str, &Motif> =
        catalog.iter().map(|m| (m.name.as_str(), m)).collect();

    for instance in sm {
        let mut entities: BTreeSet<&EntityId> = BTreeSet::new();
        let mut count = 0;
        for edge in &instance.subgraph {
            entities.insert(&edge.subject);
            entities.insert(&edge.object);
            count += 1;
        }
        // Each edge contributes a subject and an object; pairwise-distinct
        // entities over a connected pattern means |entities| = |slots|.
        if let Some(motif) = by_name.get(instance.motif.as_str()) {
            if entities.len() != motif.node_count() {
                violations
                    .push(format!("{}: entities are not pairwise distinct", instance.pair_id));
            }
            if count != motif.hop_count() {
                violations.push(format!("{}: wrong edge count", instance.pair_id));
            }
        } else {
            violations.push(format!("{}: unknown motif {}", instance.pair_id, instance.motif));
        }
        let pages: BTreeSet<&EntityId> = instance.subgraph.iter().map(|e| &e.page).collect();
        if pages.len() != instance.subgraph.len() {
            violations.push(format!("{}: edges share a page", instance.pair_id));
        }
    }

    // Unique reasoning chain per motif.
    let mut chains: BTreeSet<String> = BTreeSet::new();
    for instance in sm {
        let Some(motif) = by_name.get(instance.motif.as_str()) else { continue };
        let nodes = instance_nodes(instance, motif);
        let Some(nodes) = nodes else {
            violations.push(format!("{}: subgraph does not match motif shape", instance.pair_id));
            continue;
        };
        let key = format!(
            "{}|{}|{}",
            instance.motif,
            motif
                .roots()
                .iter()
                .map(|&r| nodes[r as usize].to_string())
                .collect::<Vec<_>>()
                .join(","),
            instance
                .subgraph
                .iter()
                .map(|e| e.relation.id.clone())
                .collect::<Vec<_>>()
                .join(",")
        );
        if !chains.insert(key) {
            violations.push(format!("{}: duplicate reasoning chain", instance.pair_id));
        }
    }

    // Sub-motif containment across hops.
    let edge_sets: Vec<BTreeSet<(EntityId, String, EntityId)>> = sm
        .iter()
        .map(|i| {
            i.subgraph
                .iter()
                .map(|e| (e.subject.clone(), e.relation.id.clone(), e.object.clone()))
                .collect()
        })
        .collect();
    for (i, set) in edge_sets.iter().enumerate() {
        if sm[i].subgraph.len() <= 1 {
            continue;
        }
        let contained = edge_sets.iter().enumerate().any(|(j, other)| {
            j != i && sm[j].subgraph.len() > sm[i].subgraph.len() && set.is_subset(other)
        });
        if contained {
            violations.push(format!("{}: contained in a higher-hop instance", sm[i].pair_id));
        }
    }

    // Reuse caps per motif.
    let mut fact_uses: BTreeMap<(String, EntityId, String, EntityId), usize> = BTreeMap::new();
    let mut bridge_uses: BTreeMap<(String, EntityId), usize> = BTreeMap::new();
    for instance in sm {
        for edge in &instance.subgraph {
            *fact_uses
                .entry((
                    instance.motif.clone(),
                    edge.subject.clone(),
                    edge.relation.id.clone(),
                    edge.object.clone(),
                ))
                .or_default() += 1;
        }
        if let Some(motif) = by_name.get(instance.motif.as_str()) {
            if let Some(nodes) = instance_nodes(instance, motif) {
                for &b in &motif.bridges() {
                    *bridge_uses
                        .entry((instance.motif.clone(), nodes[b as usize].clone()))
                        .or_default() += 1;
                }
            }
        }
    }
    for (key, count) in fact_uses {
        if count > REUSE_CAP {
            violations.push(format!("fact {key:?} reused {count} times"));
        }
    }
    for (key, count) in bridge_uses {
        if count > REUSE_CAP {
            violations.push(format!("bridge {key:?} reused {count} times"));
        }
    }

    // RM/SM pairing is a bijection with identical motif histograms.
    let rm_ids: BTreeSet<&String> = rm.iter().map(|i| &i.pair_id).collect();
    let sm_ids: BTreeSet<&String> = sm.iter().map(|i| &i.pair_id).collect();
    if rm_ids.len() != rm.len() || sm_ids.len() != sm.len() {
        violations.push("duplicate pair ids within a variant".to_string());
    }
    if rm_ids != sm_ids {
        violations.push("RM and SM pair ids are not a bijection".to_string());
    }
    fn histogram(instances: &[QaInstance]) -> BTreeMap<&str, usize> {
        let mut h: BTreeMap<&str, usize> = BTreeMap::new();
        for i in instances {
            *h.entry(i.motif.as_str()).or_default() += 1;
        }
        h
    }
    if histogram(rm) != histogram(sm) {
        violations.push("motif histograms differ between RM and SM".to_string());
    }
    // Subgraphs match between twins.
    let rm_by_id: BTreeMap<&String, &QaInstance> = rm.iter().map(|i| (&i.pair_id, i)).collect();
    for instance in sm {
        if let Some(twin) = rm_by_id.get(&instance.pair_id) {
            let key = |edges: &[SubgraphEdge]| -> Vec<(EntityId, String, EntityId, EntityId)> {
                edges
                    .iter()
                    .map(|e| {
                        (e.subject.clone(), e.relation.id.clone(), e.object.clone(), e.page.clone())
                    })
                    .collect()
            };
            if key(&instance.subgraph) != key(&twin.subgraph) {
                violations.push(format!("{}: RM/SM subgraphs differ", instance.pair_id));
            }
        }
    }
    violations
}

/// Recover the motif slot binding from an instance's subgraph.
fn instance_nodes(instance: &QaInstance, motif: &Motif) -> Option<Vec<EntityId>> {
    if instance.subgraph.len() != motif.hop_count() {
        return None;
    }
    let mut nodes: Vec<Option<EntityId>> = vec![None; motif.node_count()];
    for (edge, &(u, v)) in instance.subgraph.iter().zip(&motif.edges) {
        for (slot, value) in [(u, &edge.subject), (v, &edge.object)] {
            match &nodes[slot as usize] {
                None => nodes[slot as usize] = Some(value.clone()),
                Some(bound) if bound == value => {}
                Some(_) => return None,
            }
        }
    }
    nodes.into_iter().collect()
}

/// Scan for label leakage across variants: no synthetic label in RM text, no
/// real label of a renamed entity in SM text.
pub fn validate_label_separation(
    rm: &[QaInstance],
    sm: &[QaInstance],
    plan: &RenamePlan,
    real_universe: &Universe,
) -> Vec<String> {
    let mut violations = Vec::new();
    let synth_labels: Vec<&String> = plan.mapping.values().collect();
    let real_labels: Vec<String> = plan
        .mapping
        .keys()
        .map(|id| real_universe.label(id).to_string())
        .filter(|l| !l.is_empty())
        .collect();
    for instance in rm {
        for label in &synth_labels {
            if text::contains_word(&instance.question, label)
                || text::contains_word(&instance.answer, label)
            {
                violations
                    .push(format!("{}: synthetic label {label} in RM text", instance.pair_id));
            }
        }
    }
    for instance in sm {
        for label in &real_labels {
            if text::contains_word(&instance.question, label)
                || text::contains_word(&instance.answer, label)
            {
                violations.push(format!("{}: real label {label} in SM text", instance.pair_id));
            }
        }
    }
    violations
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{Entity, Fact, Literal, Qualifier};
    use crate::sampler::{Provenance, SamplerConfig};

    fn entity(id: &str, label: &str) -> Entity {
        Entity {
            id: EntityId::from(id),
            label: label.to_string(),
            type_ids: vec![],
            aliases: vec![],
            flags: Default::default(),
            is_named: crate::kg::is_named_entity(label, &[]),
        }
    }

    fn universe(entities: Vec<Entity>, facts: Vec<Fact>) -> Universe {
        let mut graph = crate::kg::KnowledgeGraph::default();
        let labeling = entities.iter().map(|e| (e.id.clone(), e.label.clone())).collect();
        for e in entities {
            graph.entities.insert(e.id.clone(), e);
        }
        graph.facts = facts;
        Universe {
            graph,
            labeling,
            type_annex: BTreeMap::new(),
            provenance: Provenance {
                config: SamplerConfig {
                    seeds: vec![EntityId::from("Q1")],
                    ..Default::default()
                },
                parent_fingerprint: "test".to_string(),
            },
        }
    }

    fn edge(s: &str, r: &str, o: &str, page: &str) -> FactEdge {
        FactEdge {
            subject: EntityId::from(s),
            relation: Relation::new(format!("P_{r}"), r),
            object: EntityId::from(o),
            page: EntityId::from(page),
            qualifier: None,
        }
    }

    fn chain_motif() -> Motif {
        Motif { name: "A".to_string(), edges: vec![(0, 1), (1, 2)] }
    }

    #[test]
    fn motif_roles_derive_correctly() {
        let catalog = default_motif_catalog();
        assert_eq!(catalog.len(), 6);
        let a = &catalog[0];
        assert_eq!(a.roots(), vec![0]);
        assert_eq!(a.leaf(), 2);
        assert_eq!(a.bridges(), vec![1]);
        let e = catalog.iter().find(|m| m.name == "E").unwrap();
        assert_eq!(e.hop_count(), 5);
        assert_eq!(e.roots(), vec![0, 2]);
        assert_eq!(e.leaf(), 5);
        assert_eq!(e.bridges(), vec![1, 3, 4]);
    }

    struct PassthroughExtractor;

    impl FactExtraction for PassthroughExtractor {
        fn extract(
            &self,
            req: &ExtractionRequest,
        ) -> Result<BTreeMap<String, Vec<Vec<String>>>, PortError> {
            let mock = crate::ports::mock::MockBackend::new(Default::default());
            let payload = serde_json::to_value(req).unwrap();
            let request = crate::ports::GenerationRequest::new("extract_facts")
                .var("payload", payload)
                .var("page_content", "")
                .var("relation_defs_block", "")
                .var("templates_json", "");
            use crate::ports::Backend as _;
            let out = mock.complete(crate::ports::PortKind::FactExtraction, &request)?;
            serde_json::from_str(&out).map_err(|e| PortError::Malformed { message: e.to_string() })
        }
    }

    #[test]
    fn extraction_validates_expressed_facts_and_misses() {
        let u = universe(
            vec![entity("Q1", "Cherenkov"), entity("Q2", "Nobel Prize"), entity("Q3", "Lenin Order")],
            vec![
                Fact {
                    subject: EntityId::from("Q1"),
                    relation: Relation::new("P166", "award received"),
                    object: FactObject::Entity(EntityId::from("Q2")),
                    qualifiers: vec![Qualifier {
                        relation: Relation::new("P585", "point in time"),
                        value: Literal::timestamp("1958"),
                    }],
                },
                Fact {
                    subject: EntityId::from("Q1"),
                    relation: Relation::new("P166b", "order received"),
                    object: FactObject::Entity(EntityId::from("Q3")),
                    qualifiers: vec![],
                },
            ],
        );
        // Render a page that expresses only the first fact.
        let req = crate::ports::PageRequest {
            title: "Cherenkov".to_string(),
            entity_type: "person".to_string(),
            facts: vec![crate::ports::PageFact {
                subject: "Cherenkov".to_string(),
                subject_is_page_entity: true,
                object_is_page_entity: false,
                relation: "award received".to_string(),
                object: "Nobel Prize".to_string(),
                qualifiers: vec![("point in time".to_string(), "1958".to_string())],
            }],
            relation_defs: BTreeMap::new(),
            related_types: BTreeMap::new(),
        };
        let page_text = crate::ports::mock::render_mock_page(&req);
        let page = SymbolicPage {
            entity: EntityId::from("Q1"),
            title: "Cherenkov".to_string(),
            text: page_text,
            refs: vec![],
        };
        let validated =
            extract_present_facts(&page, &[0, 1], &u, &PassthroughExtractor).unwrap();
        assert_eq!(validated, vec![0]);
    }

    #[test]
    fn qualified_extraction_requires_both_slots() {
        let u = universe(
            vec![entity("Q1", "Cherenkov"), entity("Q2", "Nobel Prize")],
            vec![Fact {
                subject: EntityId::from("Q1"),
                relation: Relation::new("P166", "award received"),
                object: FactObject::Entity(EntityId::from("Q2")),
                qualifiers: vec![Qualifier {
                    relation: Relation::new("P585", "point in time"),
                    value: Literal::timestamp("1958"),
                }],
            }],
        );
        // Page expresses the award with the wrong year.
        let req = crate::ports::PageRequest {
            title: "Cherenkov".to_string(),
            entity_type: "person".to_string(),
            facts: vec![crate::ports::PageFact {
                subject: "Cherenkov".to_string(),
                subject_is_page_entity: true,
                object_is_page_entity: false,
                relation: "award received".to_string(),
                object: "Nobel Prize".to_string(),
                qualifiers: vec![("point in time".to_string(), "1955".to_string())],
            }],
            relation_defs: BTreeMap::new(),
            related_types: BTreeMap::new(),
        };
        let page = SymbolicPage {
            entity: EntityId::from("Q1"),
            title: "Cherenkov".to_string(),
            text: crate::ports::mock::render_mock_page(&req),
            refs: vec![],
        };
        let validated =
            extract_present_facts(&page, &[0], &u, &PassthroughExtractor).unwrap();
        assert!(validated.is_empty());
    }

    #[test]
    fn fact_graph_counts_edges_per_page() {
        let u = universe(
            vec![entity("Q1", "Ay"), entity("Q2", "Bee"), entity("Q3", "Cee")],
            vec![
                Fact {
                    subject: EntityId::from("Q1"),
                    relation: Relation::new("P1", "r1"),
                    object: FactObject::Entity(EntityId::from("Q2")),
                    qualifiers: vec![],
                },
                Fact {
                    subject: EntityId::from("Q2"),
                    relation: Relation::new("P2", "r2"),
                    object: FactObject::Entity(EntityId::from("Q3")),
                    qualifiers: vec![],
                },
            ],
        );
        let mut corpus = crate::corpus::Corpus {
            pages: BTreeMap::new(),
            thresholds: Default::default(),
        };
        for id in ["Q1", "Q2"] {
            let page = SymbolicPage {
                entity: EntityId::from(id),
                title: id.to_string(),
                text: String::new(),
                refs: vec![],
            };
            corpus.pages.insert(
                EntityId::from(id),
                crate::corpus::PagePair {
                    entity: EntityId::from(id),
                    synth: Some(page.clone()),
                    real: Some(page),
                    draft_similarity: Some(1.0),
                    pair_similarity: Some(1.0),
                    pair_similarity_normalized: Some(1.0),
                    status: crate::corpus::PageStatus::Retained,
                },
            );
        }
        let validated = BTreeMap::from([
            (EntityId::from("Q1"), vec![0usize, 1]),
            (EntityId::from("Q2"), vec![1usize]),
        ]);
        let graph = build_fact_graph(&corpus, &validated, &u);
        // Same fact on two pages yields two annotated edges.
        assert_eq!(graph.edges.len(), 3);
        let pages: BTreeSet<&EntityId> = graph
            .edges
            .iter()
            .filter(|e| e.subject.as_str() == "Q2")
            .map(|e| &e.page)
            .collect();
        assert_eq!(pages.len(), 2);
    }

    fn chain_graph() -> FactGraph {
        // p0: A -r1-> B, p1: B -r2-> C, p2: B -r2-> D, p3: A -r3-> E,
        // p4: E -r2-> C.
        FactGraph::from_edges(vec![
            edge("A", "r1", "B", "p0"),
            edge("B", "r2", "C", "p1"),
            edge("B", "r2", "D", "p2"),
            edge("A", "r3", "E", "p3"),
            edge("E", "r2", "C", "p4"),
        ])
    }

    #[test]
    fn chain_uniqueness_keys_on_roots_and_relations() {
        let graph = chain_graph();
        let instances = sample_motifs(&graph, &chain_motif(), 10, 7);
        // (A, r1, r2) admits one instantiation even though B -r2-> C and
        // B -r2-> D both exist.
        let a_r1_r2: Vec<&MotifInstance> = instances
            .iter()
            .filter(|i| {
                i.nodes[0].as_str() == "A" && i.edges[0].relation.label == "r1"
                    && i.edges[1].relation.label == "r2"
            })
            .collect();
        assert_eq!(a_r1_r2.len(), 1);
    }

    #[test]
    fn same_page_edges_are_rejected() {
        let graph = FactGraph::from_edges(vec![
            edge("A", "r1", "B", "p0"),
            edge("B", "r2", "C", "p0"),
        ]);
        let instances = sample_motifs(&graph, &chain_motif(), 10, 7);
        assert!(instances.is_empty());
    }

    #[test]
    fn entity_distinctness_is_enforced() {
        // A -> B -> A would bind slot 2 to the root entity.
        let graph = FactGraph::from_edges(vec![
            edge("A", "r1", "B", "p0"),
            edge("B", "r2", "A", "p1"),
        ]);
        let instances = sample_motifs(&graph, &chain_motif(), 10, 7);
        assert!(instances.is_empty());
    }

    #[test]
    fn bridge_reuse_is_capped_at_five() {
        // One bridge B reachable from six roots, each leading to its own leaf.
        let mut edges = Vec::new();
        for i in 0..6 {
            edges.push(edge(&format!("R{i}"), &format!("in{i}"), "B", &format!("pin{i}")));
            edges.push(edge("B", &format!("out{i}"), &format!("L{i}"), &format!("pout{i}")));
        }
        let graph = FactGraph::from_edges(edges);
        let instances = sample_motifs(&graph, &chain_motif(), 100, 3);
        let bridge_uses = instances.iter().filter(|i| i.nodes[1].as_str() == "B").count();
        assert!(bridge_uses <= REUSE_CAP);
    }

    #[test]
    fn submotif_dedupe_removes_contained_chains() {
        let two_hop = MotifInstance {
            motif: "A".to_string(),
            nodes: vec![EntityId::from("A"), EntityId::from("B"), EntityId::from("C")],
            edges: vec![edge("A", "r1", "B", "p0"), edge("B", "r2", "C", "p1")],
        };
        let three_hop = MotifInstance {
            motif: "B".to_string(),
            nodes: vec![
                EntityId::from("A"),
                EntityId::from("B"),
                EntityId::from("C"),
                EntityId::from("D"),
            ],
            edges: vec![
                edge("A", "r1", "B", "p0"),
                edge("B", "r2", "C", "p1"),
                edge("C", "r3", "D", "p2"),
            ],
        };
        let disjoint = MotifInstance {
            motif: "A".to_string(),
            nodes: vec![EntityId::from("X"), EntityId::from("Y"), EntityId::from("Z")],
            edges: vec![edge("X", "r1", "Y", "p5"), edge("Y", "r2", "Z", "p6")],
        };
        let (kept, removed) = dedupe_submotifs(vec![two_hop, three_hop, disjoint]);
        assert_eq!(removed, 1);
        assert_eq!(kept.len(), 2);
        assert!(kept.iter().any(|i| i.nodes[0].as_str() == "X"));
        assert!(kept.iter().any(|i| i.edges.len() == 3));
    }

    struct MockQgen;

    impl QuestionGeneration for MockQgen {
        fn single_hops(&self, facts: &[HopFact]) -> Result<Vec<String>, PortError> {
            Ok(facts
                .iter()
                .map(|f| format!("What do the records give as the {} of {}?", f.relation, f.subject))
                .collect())
        }
        fn compose(&self, req: &ComposeRequest) -> Result<Composition, PortError> {
            Ok(Composition::Question(format!(
                "Starting from {} and following {}, what is the final value reached?",
                req.root_labels.join(" and "),
                req.relation_labels.join(", then ")
            )))
        }
    }

    fn chain_universe() -> Universe {
        universe(
            vec![
                entity("A", "Jorith Luque"),
                entity("B", "Artistic Exchange"),
                entity("C", "Merith Watts"),
            ],
            vec![],
        )
    }

    #[test]
    fn composed_question_passes_mention_rules() {
        let u = chain_universe();
        let instance = MotifInstance {
            motif: "A".to_string(),
            nodes: vec![EntityId::from("A"), EntityId::from("B"), EntityId::from("C")],
            edges: vec![edge("A", "educated at", "B", "p0"), edge("B", "founded by", "C", "p1")],
        };
        let outcome =
            compose_instance(&instance, &chain_motif(), &u, &MockQgen, 2).unwrap();
        match outcome {
            ComposeOutcome::Composed { question, single_hops } => {
                assert!(question.contains("Jorith Luque"));
                assert!(!question.contains("Artistic Exchange"));
                assert_eq!(single_hops.len(), 2);
                assert!(single_hops[0].question.contains("Jorith Luque"));
                assert!(!single_hops[0].question.contains("Artistic Exchange"));
                assert_eq!(single_hops[1].answer, "Merith Watts");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    struct LeakyQgen;

    impl QuestionGeneration for LeakyQgen {
        fn single_hops(&self, facts: &[HopFact]) -> Result<Vec<String>, PortError> {
            MockQgen.single_hops(facts)
        }
        fn compose(&self, req: &ComposeRequest) -> Result<Composition, PortError> {
            // Mentions a bridge answer verbatim.
            Ok(Composition::Question(format!(
                "About {} via {}: what comes last?",
                req.root_labels.join(" and "),
                req.hops[0].answer
            )))
        }
    }

    #[test]
    fn bridge_leak_discards_instance() {
        let u = chain_universe();
        let instance = MotifInstance {
            motif: "A".to_string(),
            nodes: vec![EntityId::from("A"), EntityId::from("B"), EntityId::from("C")],
            edges: vec![edge("A", "educated at", "B", "p0"), edge("B", "founded by", "C", "p1")],
        };
        let outcome = compose_instance(&instance, &chain_motif(), &u, &LeakyQgen, 1).unwrap();
        assert!(matches!(outcome, ComposeOutcome::Discarded(DiscardReason::Composition)));
    }

    struct NoCompositionQgen;

    impl QuestionGeneration for NoCompositionQgen {
        fn single_hops(&self, facts: &[HopFact]) -> Result<Vec<String>, PortError> {
            MockQgen.single_hops(facts)
        }
        fn compose(&self, _req: &ComposeRequest) -> Result<Composition, PortError> {
            Ok(Composition::NoComposition)
        }
    }

    #[test]
    fn no_composition_discards_instance() {
        let u = chain_universe();
        let instance = MotifInstance {
            motif: "A".to_string(),
            nodes: vec![EntityId::from("A"), EntityId::from("B"), EntityId::from("C")],
            edges: vec![edge("A", "educated at", "B", "p0"), edge("B", "founded by", "C", "p1")],
        };
        let outcome =
            compose_instance(&instance, &chain_motif(), &u, &NoCompositionQgen, 2).unwrap();
        assert!(matches!(outcome, ComposeOutcome::Discarded(DiscardReason::Composition)));
    }

    #[test]
    fn remap_swaps_labels_and_dates_consistently() {
        let real = universe(
            vec![entity("A", "Geoffrey Hinton"), entity("B", "University of Toronto")],
            vec![],
        );
        let plan = RenamePlan {
            order: vec![vec![EntityId::from("A"), EntityId::from("B")]],
            mapping: BTreeMap::from([
                (EntityId::from("A"), "Caleb Ardent".to_string()),
                (EntityId::from("B"), "Starlight Institute".to_string()),
            ]),
            delta_years: 39,
            retries: BTreeMap::new(),
        };
        let sm = QaInstance {
            pair_id: "qa-00000".to_string(),
            motif: "A".to_string(),
            variant: Variant::Sm,
            question: "As of 2017, where did Caleb Ardent work?".to_string(),
            answer: "Starlight Institute".to_string(),
            single_hops: vec![SingleHop {
                question: "Where did Caleb Ardent work?".to_string(),
                answer: "Starlight Institute".to_string(),
            }],
            gold_page_ids: vec![EntityId::from("A")],
            subgraph: vec![SubgraphEdge {
                subject: EntityId::from("A"),
                relation: Relation::new("P108", "employer"),
                object: EntityId::from("B"),
                page: EntityId::from("A"),
            }],
        };
        let rm = remap_question(&sm, &plan, &real).unwrap();
        assert_eq!(rm.question, "As of 1978, where did Geoffrey Hinton work?");
        assert_eq!(rm.answer, "University of Toronto");
        assert_eq!(rm.single_hops[0].answer, "University of Toronto");
        assert_eq!(rm.pair_id, sm.pair_id);
        assert_eq!(rm.subgraph.len(), sm.subgraph.len());
        // Structures are identical modulo labels.
        let strip = |i: &QaInstance| {
            serde_json::to_string(&(&i.pair_id, &i.motif, &i.gold_page_ids, &i.subgraph))
                .expect("serialize")
        };
        assert_eq!(strip(&rm), strip(&sm));
    }

    #[test]
    fn validator_flags_violations() {
        let catalog = vec![chain_motif()];
        let good = QaInstance {
            pair_id: "qa-00000".to_string(),
            motif: "A".to_string(),
            variant: Variant::Sm,
            question: "q".to_string(),
            answer: "a".to_string(),
            single_hops: vec![],
            gold_page_ids: vec![],
            subgraph: vec![
                SubgraphEdge {
                    subject: EntityId::from("A"),
                    relation: Relation::new("P1", "r1"),
                    object: EntityId::from("B"),
                    page: EntityId::from("p0"),
                },
                SubgraphEdge {
                    subject: EntityId::from("B"),
                    relation: Relation::new("P2", "r2"),
                    object: EntityId::from("C"),
                    page: EntityId::from("p1"),
                },
            ],
        };
        let mut rm = good.clone();
        rm.variant = Variant::Rm;
        assert!(validate_qa_datasets(&[rm.clone()], &[good.clone()], &catalog).is_empty());

        // Same-page edges are flagged; a broken chain (edge 1 not starting
        // at edge 0's object) no longer matches the motif shape.
        let mut bad = good.clone();
        bad.pair_id = "qa-00001".to_string();
        bad.subgraph[1].page = EntityId::from("p0");
        bad.subgraph[1].relation = Relation::new("P9", "r9");
        bad.subgraph[1].subject = EntityId::from("X");
        let mut bad_rm = bad.clone();
        bad_rm.variant = Variant::Rm;
        let violations = validate_qa_datasets(
            &[rm.clone(), bad_rm],
            &[good.clone(), bad.clone()],
            &catalog,
        );
        assert!(violations.iter().any(|v| v.contains("share a page")));
        // Subgraph must stay connected per shape.
        assert!(violations.iter().any(|v| v.contains("does not match motif shape")));

        // Bijection breakage is flagged.
        let violations = validate_qa_datasets(&[rm], &[good, bad], &catalog);
        assert!(violations.iter().any(|v| v.contains("bijection")));
    }
}
