//! Parallel corpus generation: synth-mapped documents first, symbolic
//! references, real-mapped realization, similarity and novelty gates, and
//! largest-connected-component pruning of the hyperlink graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::normalize_answer;
use crate::kg::{EntityId, FactObject, KgError, LiteralKind, TypeResolver};
use crate::perturb::RenamePlan;
use crate::ports::{EntityGuess, PageFact, PageRequest, PortError, RestoreRequest, TextGeneration};
use crate::sampler::Universe;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Rm,
    Sm,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Rm => f.write_str("rm"),
            Variant::Sm => f.write_str("sm"),
        }
    }
}

impl Default for Variant {
    fn default() -> Self {
        Variant::Sm
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rm" => Ok(Variant::Rm),
            "sm" => Ok(Variant::Sm),
            other => Err(format!("unknown variant {other}; expected rm or sm")),
        }
    }
}

/// An in-text symbolic reference: `[display](<ref:Qid>)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ref {
    pub entity: EntityId,
    pub display: String,
    /// Byte span of the whole link occurrence in the page text.
    pub span: (usize, usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolicPage {
    pub entity: EntityId,
    pub title: String,
    pub text: String,
    pub refs: Vec<Ref>,
}

impl SymbolicPage {
    pub fn ref_ids(&self) -> BTreeSet<EntityId> {
        self.refs.iter().map(|r| r.entity.clone()).collect()
    }

    /// Page text with link syntax removed (display text kept).
    pub fn plain_text(&self) -> String {
        strip_links(&self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DropReason {
    /// Link-stripped text drifted from the draft beyond the 0.95 gate.
    DraftDrift { similarity: f64 },
    /// A link points at an id outside the provided reference map.
    InventedReference { id: EntityId },
    /// Link display text is not the mapped label or a short form of it.
    BadDisplay { id: EntityId, display: String },
    /// Unparseable link syntax or generator misuse.
    MalformedLinks { message: String },
    /// RM and SM ref-id sets differ.
    StructureDrift,
    /// A synthetic label survived into the real-mapped page.
    Leakage { label: String },
    /// A shifted timestamp survived into the real-mapped page.
    ShiftedTimestamp { value: String },
    /// SM/RM similarity fell at or below the 0.85 gate.
    PairDrift { similarity: f64 },
    /// The novelty judge recovered the underlying entity.
    NoveltyGuessed { guess: String },
    /// Transport failures exhausted the quarantine retries.
    Transport { message: String },
    /// Outside the largest connected component of the hyperlink graph.
    OutsideLcc,
}

impl DropReason {
    pub fn key(&self) -> &'static str {
        match self {
            DropReason::DraftDrift { .. } => "draft_drift",
            DropReason::InventedReference { .. } => "invented_reference",
            DropReason::BadDisplay { .. } => "bad_display",
            DropReason::MalformedLinks { .. } => "malformed_links",
            DropReason::StructureDrift => "structure_drift",
            DropReason::Leakage { .. } => "leakage",
            DropReason::ShiftedTimestamp { .. } => "shifted_timestamp",
            DropReason::PairDrift { .. } => "pair_drift",
            DropReason::NoveltyGuessed { .. } => "novelty_guessed",
            DropReason::Transport { .. } => "transport",
            DropReason::OutsideLcc => "outside_lcc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum PageStatus {
    Retained,
    Dropped { reason: DropReason },
}

impl PageStatus {
    pub fn is_retained(&self) -> bool {
        matches!(self, PageStatus::Retained)
    }
}

/// A synth page and its real-mapped twin sharing one symbolic-reference set.
/// Pages dropped before both sides existed keep what was produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PagePair {
    pub entity: EntityId,
    pub synth: Option<SymbolicPage>,
    pub real: Option<SymbolicPage>,
    pub draft_similarity: Option<f64>,
    pub pair_similarity: Option<f64>,
    /// Pair similarity after substituting real labels and dates back to
    /// their synth forms; recorded alongside the raw value.
    pub pair_similarity_normalized: Option<f64>,
    pub status: PageStatus,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Thresholds {
    pub draft_similarity: f64,
    pub pair_similarity: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { draft_similarity: 0.95, pair_similarity: 0.85 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    pub pages: BTreeMap<EntityId, PagePair>,
    pub thresholds: Thresholds,
}

impl Corpus {
    pub fn retained(&self) -> impl Iterator<Item = &PagePair> {
        self.pages.values().filter(|p| p.status.is_retained())
    }

    pub fn retained_ids(&self) -> BTreeSet<EntityId> {
        self.retained().map(|p| p.entity.clone()).collect()
    }

    /// Directed hyperlink edges between retained pages, identical for the RM
    /// and SM views because refs are id-level.
    pub fn hyperlink_edges(&self) -> BTreeSet<(EntityId, EntityId)> {
        let retained = self.retained_ids();
        let mut edges = BTreeSet::new();
        for page in self.retained() {
            let synth = page.synth.as_ref().expect("retained page has synth side");
            for r in &synth.refs {
                if r.entity != page.entity && retained.contains(&r.entity) {
                    edges.insert((page.entity.clone(), r.entity.clone()));
                }
            }
        }
        edges
    }

    pub fn page_view(&self, id: &EntityId, variant: Variant) -> Option<&SymbolicPage> {
        let pair = self.pages.get(id)?;
        if !pair.status.is_retained() {
            return None;
        }
        match variant {
            Variant::Rm => pair.real.as_ref(),
            Variant::Sm => pair.synth.as_ref(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("entity {0} is not in the universe")]
    UnknownEntity(EntityId),
    #[error("page generation precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Kg(#[from] KgError),
}

/// Failure of one step of a page pipeline: a deterministic gate failure or a
/// retryable transport failure.
#[derive(Debug)]
pub enum PageFailure {
    Gate(DropReason),
    Transport(PortError),
}

impl From<PortError> for PageFailure {
    fn from(err: PortError) -> Self {
        if err.is_transport() {
            PageFailure::Transport(err)
        } else {
            PageFailure::Gate(DropReason::MalformedLinks { message: err.to_string() })
        }
    }
}

// ---------------------------------------------------------------------------
// Character-level similarity
// ---------------------------------------------------------------------------

/// Optimal-string-alignment distance over characters (edits plus adjacent
/// transposition, no substring re-editing).
pub fn osa_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (n, m) = (a.len(), b.len());
    if n == 0 {
        return m;
    }
    if m == 0 {
        return n;
    }
    let mut prev2: Vec<usize> = vec![0; m + 1];
    let mut prev: Vec<usize> = (0..=m).collect();
    let mut current: Vec<usize> = vec![0; m + 1];
    for i in 1..=n {
        current[0] = i;
        for j in 1..=m {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            let mut best = (prev[j] + 1).min(current[j - 1] + 1).min(prev[j - 1] + cost);
            if i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1] {
                best = best.min(prev2[j - 2] + 1);
            }
            current[j] = best;
        }
        std::mem::swap(&mut prev2, &mut prev);
        std::mem::swap(&mut prev, &mut current);
    }
    prev[m]
}

/// 1 - OSA(a, b) / max(|a|, |b|); 1 when both strings are empty.
pub fn dl_similarity(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - osa_distance(a, b) as f64 / max_len as f64
}

// ---------------------------------------------------------------------------
// Symbolic link syntax
// ---------------------------------------------------------------------------

const LINK_OPEN: &str = "](<ref:";
const LINK_CLOSE: &str = ">)";

/// Parse `[display](<ref:Qid>)` links out of page text.
pub fn parse_links(text: &str) -> Result<Vec<Ref>, String> {
    let mut refs = Vec::new();
    let mut cursor = 0;
    while let Some(rel) = text[cursor..].find(LINK_OPEN) {
        let mid = cursor + rel;
        let open = text[cursor..mid]
            .rfind('[')
            .map(|at| cursor + at)
            .ok_or_else(|| format!("unmatched link delimiter at byte {mid}"))?;
        let display = &text[open + 1..mid];
        let id_start = mid + LINK_OPEN.len();
        let close = text[id_start..]
            .find(LINK_CLOSE)
            .map(|at| id_start + at)
            .ok_or_else(|| format!("unterminated link at byte {mid}"))?;
        let id = &text[id_start..close];
        if id.is_empty() || display.is_empty() {
            return Err(format!("empty link component at byte {mid}"));
        }
        let end = close + LINK_CLOSE.len();
        refs.push(Ref {
            entity: EntityId::new(id),
            display: display.to_string(),
            span: (open, end),
        });
        cursor = end;
    }
    Ok(refs)
}

/// Remove link syntax, keeping the display text.
pub fn strip_links(text: &str) -> String {
    let Ok(refs) = parse_links(text) else {
        return text.to_string();
    };
    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for r in refs {
        out.push_str(&text[cursor..r.span.0]);
        out.push_str(&r.display);
        cursor = r.span.1;
    }
    out.push_str(&text[cursor..]);
    out
}

// ---------------------------------------------------------------------------
// Page construction
// ---------------------------------------------------------------------------

/// Incident entity facts of `entity`, reduced to the majority orientation
/// (outgoing on ties), plus the entity's literal-valued facts, which always
/// describe the entity itself. An entity with no entity-valued facts yields
/// an empty set and its page is skipped.
pub fn select_fact_orientation(entity: &EntityId, universe: &Universe) -> Vec<usize> {
    let mut outgoing = Vec::new();
    let mut incoming = Vec::new();
    let mut literals = Vec::new();
    for (idx, fact) in universe.graph.facts.iter().enumerate() {
        match (&fact.subject == entity, &fact.object) {
            (true, FactObject::Entity(object)) if object != entity => outgoing.push(idx),
            (true, FactObject::Literal(_)) => literals.push(idx),
            (false, FactObject::Entity(object)) if object == entity => incoming.push(idx),
            _ => {}
        }
    }
    if outgoing.is_empty() && incoming.is_empty() {
        return Vec::new();
    }
    let mut chosen = if outgoing.len() >= incoming.len() { outgoing } else { incoming };
    chosen.extend(literals);
    chosen.sort_unstable();
    chosen
}

fn page_request(
    entity: &EntityId,
    fact_indices: &[usize],
    universe: &Universe,
    resolver: &TypeResolver<'_>,
) -> PageRequest {
    let resolve = |id: &EntityId| match resolver.resolve(id) {
        Ok(label) => label,
        Err(KgError::UnresolvedType { partial, .. }) => partial,
        Err(_) => "entity".to_string(),
    };
    let mut facts = Vec::new();
    let mut related_types = BTreeMap::new();
    let mut relation_defs = BTreeMap::new();
    for &idx in fact_indices {
        let fact = &universe.graph.facts[idx];
        let (object_text, object_is_page_entity) = match &fact.object {
            FactObject::Entity(object) => {
                related_types.insert(universe.label(object).to_string(), resolve(object));
                (universe.label(object).to_string(), object == entity)
            }
            FactObject::Literal(literal) => (literal.value.clone(), false),
        };
        if &fact.subject != entity {
            related_types
                .insert(universe.label(&fact.subject).to_string(), resolve(&fact.subject));
        }
        if let Some(def) = universe.graph.relation_defs.get(&fact.relation.id) {
            relation_defs.insert(fact.relation.label.clone(), def.clone());
        }
        facts.push(PageFact {
            subject: universe.label(&fact.subject).to_string(),
            subject_is_page_entity: &fact.subject == entity,
            object_is_page_entity,
            relation: fact.relation.label.clone(),
            object: object_text,
            qualifiers: fact
                .qualifiers
                .iter()
                .map(|q| (q.relation.label.clone(), q.value.value.clone()))
                .collect(),
        });
    }
    PageRequest {
        title: universe.label(entity).to_string(),
        entity_type: resolve(entity),
        facts,
        relation_defs,
        related_types,
    }
}

/// Render the prose draft for a page. The fact set must be non-empty.
pub fn generate_page(
    entity: &EntityId,
    fact_indices: &[usize],
    universe: &Universe,
    resolver: &TypeResolver<'_>,
    text_gen: &dyn TextGeneration,
) -> Result<String, PageFailure> {
    if fact_indices.is_empty() {
        return Err(PageFailure::Gate(DropReason::MalformedLinks {
            message: format!("empty fact set for {entity}"),
        }));
    }
    let request = page_request(entity, fact_indices, universe, resolver);
    Ok(text_gen.render_page(&request)?)
}

/// Insert symbolic references into a draft and verify the insertion gates:
/// no invented ids, display text bound to the mapped label (or a whole-word
/// short form of it), and link-stripped similarity above the draft gate.
pub fn insert_symbolic_refs(
    draft: &str,
    id_to_label: &BTreeMap<EntityId, String>,
    text_gen: &dyn TextGeneration,
    thresholds: &Thresholds,
) -> Result<(String, Vec<Ref>, f64), PageFailure> {
    let annotated = text_gen.annotate_refs(draft, id_to_label)?;
    let refs = parse_links(&annotated)
        .map_err(|message| PageFailure::Gate(DropReason::MalformedLinks { message }))?;
    for r in &refs {
        let Some(label) = id_to_label.get(&r.entity) else {
            return Err(PageFailure::Gate(DropReason::InventedReference {
                id: r.entity.clone(),
            }));
        };
        if &r.display != label && !text::is_word_subsequence(&r.display, label) {
            return Err(PageFailure::Gate(DropReason::BadDisplay {
                id: r.entity.clone(),
                display: r.display.clone(),
            }));
        }
    }
    let similarity = dl_similarity(&strip_links(&annotated), draft);
    if similarity <= thresholds.draft_similarity {
        return Err(PageFailure::Gate(DropReason::DraftDrift { similarity }));
    }
    Ok((annotated, refs, similarity))
}

/// Timestamp restoration map for a page: shifted form -> original form, for
/// every timestamp literal among the page's facts.
fn page_date_map(
    fact_indices: &[usize],
    real: &Universe,
    synth: &Universe,
) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    for &idx in fact_indices {
        let real_fact = &real.graph.facts[idx];
        let synth_fact = &synth.graph.facts[idx];
        if let (FactObject::Literal(r), FactObject::Literal(s)) =
            (&real_fact.object, &synth_fact.object)
        {
            if r.kind == LiteralKind::Timestamp && s.value != r.value {
                map.insert(s.value.clone(), r.value.clone());
            }
        }
        for (rq, sq) in real_fact.qualifiers.iter().zip(&synth_fact.qualifiers) {
            if rq.value.kind == LiteralKind::Timestamp && sq.value.value != rq.value.value {
                map.insert(sq.value.value.clone(), rq.value.value.clone());
            }
        }
    }
    map
}

/// Realize the real-mapped twin of a synth page and verify the realization
/// gates: identical ref-id set, no synthetic label from the plan, no shifted
/// timestamp, and pair similarity above the 0.85 gate.
pub fn realize_real_mapped(
    synth_page: &SymbolicPage,
    plan: &RenamePlan,
    real_universe: &Universe,
    label_map: &BTreeMap<String, String>,
    date_map: &BTreeMap<String, String>,
    text_gen: &dyn TextGeneration,
    thresholds: &Thresholds,
) -> Result<(SymbolicPage, f64, f64), PageFailure> {
    let real_title = real_universe.label(&synth_page.entity).to_string();
    let request = RestoreRequest {
        text: synth_page.text.clone(),
        synth_title: synth_page.title.clone(),
        real_title: real_title.clone(),
        label_map: label_map.clone(),
        date_map: date_map.clone(),
    };
    let real_text = text_gen.restore_real(&request)?;
    let real_refs = parse_links(&real_text)
        .map_err(|message| PageFailure::Gate(DropReason::MalformedLinks { message }))?;

    let synth_ids = synth_page.ref_ids();
    let real_ids: BTreeSet<EntityId> = real_refs.iter().map(|r| r.entity.clone()).collect();
    if synth_ids != real_ids {
        return Err(PageFailure::Gate(DropReason::StructureDrift));
    }
    for label in plan.mapping.values() {
        if text::contains_word(&real_text, label) {
            return Err(PageFailure::Gate(DropReason::Leakage { label: label.clone() }));
        }
    }
    let originals: BTreeSet<&String> = date_map.values().collect();
    for shifted in date_map.keys() {
        // A shifted form that coincides with another fact's original value
        // is legitimately present in the real page.
        if !originals.contains(shifted) && text::contains_word(&real_text, shifted) {
            return Err(PageFailure::Gate(DropReason::ShiftedTimestamp {
                value: shifted.clone(),
            }));
        }
    }

    let pair_similarity = dl_similarity(&synth_page.text, &real_text);
    // Substitute labels and dates back before comparing, isolating pure
    // structural drift from surface-form churn.
    let inverse: Vec<(String, String)> = label_map
        .iter()
        .chain(date_map.iter())
        .map(|(synth, real)| (real.clone(), synth.clone()))
        .collect();
    let normalized_back = text::replace_words(&real_text, &inverse);
    let pair_similarity_normalized = dl_similarity(&synth_page.text, &normalized_back);
    if pair_similarity <= thresholds.pair_similarity {
        return Err(PageFailure::Gate(DropReason::PairDrift { similarity: pair_similarity }));
    }

    Ok((
        SymbolicPage {
            entity: synth_page.entity.clone(),
            title: real_title,
            text: real_text,
            refs: real_refs,
        },
        pair_similarity,
        pair_similarity_normalized,
    ))
}

/// Ask the judge to guess the underlying entity of a synth page; `false`
/// (drop) when the normalized guess matches the real label or any alias.
pub fn novelty_filter(
    synth_page: &SymbolicPage,
    judge: &dyn EntityGuess,
    real_label: &str,
    aliases: &[String],
) -> Result<bool, PageFailure> {
    let guess = judge.guess(&synth_page.plain_text())?;
    let guess_tokens = normalize_answer(&guess);
    if guess_tokens.is_empty() {
        return Ok(true);
    }
    let mut known = vec![normalize_answer(real_label)];
    known.extend(aliases.iter().map(|a| normalize_answer(a)));
    Ok(!known.iter().any(|k| !k.is_empty() && *k == guess_tokens))
}

/// Restrict retained pages to the largest weakly-connected component of the
/// hyperlink graph; everything else is dropped with `OutsideLcc`. RM and SM
/// views prune identically because edges are id-level.
pub fn prune_to_lcc(corpus: &mut Corpus) {
    let retained = corpus.retained_ids();
    if retained.is_empty() {
        return;
    }
    let edges = corpus.hyperlink_edges();
    let mut adj: BTreeMap<&EntityId, BTreeSet<&EntityId>> =
        retained.iter().map(|id| (id, BTreeSet::new())).collect();
    for (a, b) in &edges {
        adj.entry(a).or_default().insert(b);
        adj.entry(b).or_default().insert(a);
    }
    let mut seen: BTreeSet<&EntityId> = BTreeSet::new();
    let mut best: Option<BTreeSet<&EntityId>> = None;
    for start in &retained {
        if seen.contains(start) {
            continue;
        }
        let mut component = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        while let Some(id) = queue.pop_front() {
            if !component.insert(id) {
                continue;
            }
            seen.insert(id);
            for n in adj.get(id).into_iter().flatten() {
                if !component.contains(*n) {
                    queue.push_back(n);
                }
            }
        }
        let better = match &best {
            None => true,
            Some(current) => {
                component.len() > current.len()
                    || (component.len() == current.len() && component.first() < current.first())
            }
        };
        if better {
            best = Some(component);
        }
    }
    let keep: BTreeSet<EntityId> =
        best.map(|c| c.into_iter().cloned().collect()).unwrap_or_default();
    for pair in corpus.pages.values_mut() {
        if pair.status.is_retained() && !keep.contains(&pair.entity) {
            pair.status = PageStatus::Dropped { reason: DropReason::OutsideLcc };
        }
    }
}

// ---------------------------------------------------------------------------
// Full build
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub thresholds: Thresholds,
    /// Page pipelines hitting transport failures are retried this many times
    /// before the page is dropped with a transport reason.
    pub transport_retry_cap: u32,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { thresholds: Thresholds::default(), transport_retry_cap: 2 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PageReport {
    pub entity: EntityId,
    pub status: PageStatus,
    pub draft_similarity: Option<f64>,
    pub pair_similarity: Option<f64>,
    pub pair_similarity_normalized: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub thresholds: Thresholds,
    pub considered: usize,
    pub skipped_isolated: usize,
    pub retained: usize,
    pub dropped: BTreeMap<String, usize>,
    pub pages: Vec<PageReport>,
}

#[derive(Debug)]
struct PipelineOutput {
    synth: SymbolicPage,
    real: SymbolicPage,
    draft_similarity: f64,
    pair_similarity: f64,
    pair_similarity_normalized: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_page_pipeline(
    entity: &EntityId,
    fact_indices: &[usize],
    real_universe: &Universe,
    synth_universe: &Universe,
    plan: &RenamePlan,
    resolver: &TypeResolver<'_>,
    text_gen: &dyn TextGeneration,
    thresholds: &Thresholds,
) -> Result<PipelineOutput, PageFailure> {
    let draft = generate_page(entity, fact_indices, synth_universe, resolver, text_gen)?;

    // Linkable entities: named endpoints of the page's facts, excluding the
    // page entity itself, labeled with synth surface forms.
    let mut id_to_label: BTreeMap<EntityId, String> = BTreeMap::new();
    for &idx in fact_indices {
        let fact = &synth_universe.graph.facts[idx];
        for endpoint in [Some(&fact.subject), fact.object.as_entity()].into_iter().flatten() {
            if endpoint == entity {
                continue;
            }
            if let Ok(e) = synth_universe.graph.entity(endpoint) {
                if e.is_named {
                    id_to_label
                        .insert(endpoint.clone(), synth_universe.label(endpoint).to_string());
                }
            }
        }
    }

    let (annotated, refs, draft_similarity) =
        insert_symbolic_refs(&draft, &id_to_label, text_gen, thresholds)?;
    let synth_page = SymbolicPage {
        entity: entity.clone(),
        title: synth_universe.label(entity).to_string(),
        text: annotated,
        refs,
    };

    // Page-local restoration maps: the page entity plus every named fact
    // endpoint, and the page's shifted timestamps.
    let mut label_map: BTreeMap<String, String> = BTreeMap::new();
    {
        let mut add_label = |id: &EntityId| {
            if plan.mapping.contains_key(id) {
                label_map.insert(
                    synth_universe.label(id).to_string(),
                    real_universe.label(id).to_string(),
                );
            }
        };
        add_label(entity);
        for id in id_to_label.keys() {
            add_label(id);
        }
    }
    let date_map = page_date_map(fact_indices, real_universe, synth_universe);

    let (real_page, pair_similarity, pair_similarity_normalized) = realize_real_mapped(
        &synth_page,
        plan,
        real_universe,
        &label_map,
        &date_map,
        text_gen,
        thresholds,
    )?;

    Ok(PipelineOutput {
        synth: synth_page,
        real: real_page,
        draft_similarity,
        pair_similarity,
        pair_similarity_normalized,
    })
}

/// Build the full parallel corpus: per-page generation and gates in
/// entity-id order, LCC pruning, the novelty pass, and a final LCC pruning.
pub fn build_corpus(
    real_universe: &Universe,
    synth_universe: &Universe,
    plan: &RenamePlan,
    text_gen: &dyn TextGeneration,
    judge: &dyn EntityGuess,
    config: &CorpusConfig,
) -> (Corpus, CorpusManifest) {
    let resolver = synth_universe.type_resolver();
    let mut corpus = Corpus { pages: BTreeMap::new(), thresholds: config.thresholds };
    let mut skipped_isolated = 0usize;
    let considered = synth_universe.graph.entities.len();

    for entity in synth_universe.graph.entities.keys() {
        let fact_indices = select_fact_orientation(entity, synth_universe);
        if fact_indices.is_empty() {
            skipped_isolated += 1;
            continue;
        }
        let mut attempt = 0u32;
        let outcome = loop {
            match run_page_pipeline(
                entity,
                &fact_indices,
                real_universe,
                synth_universe,
                plan,
                &resolver,
                text_gen,
                &config.thresholds,
            ) {
                Ok(output) => break Ok(output),
                Err(PageFailure::Transport(_)) if attempt < config.transport_retry_cap => {
                    attempt += 1;
                }
                Err(PageFailure::Transport(err)) => {
                    break Err(DropReason::Transport { message: err.to_string() })
                }
                Err(PageFailure::Gate(reason)) => break Err(reason),
            }
        };
        let pair = match outcome {
            Ok(output) => PagePair {
                entity: entity.clone(),
                synth: Some(output.synth),
                real: Some(output.real),
                draft_similarity: Some(output.draft_similarity),
                pair_similarity: Some(output.pair_similarity),
                pair_similarity_normalized: Some(output.pair_similarity_normalized),
                status: PageStatus::Retained,
            },
            Err(reason) => PagePair {
                entity: entity.clone(),
                synth: None,
                real: None,
                draft_similarity: None,
                pair_similarity: None,
                pair_similarity_normalized: None,
                status: PageStatus::Dropped { reason },
            },
        };
        corpus.pages.insert(entity.clone(), pair);
    }

    prune_to_lcc(&mut corpus);

    // Novelty pass over the surviving pages.
    let survivors: Vec<EntityId> = corpus.retained_ids().into_iter().collect();
    for entity in survivors {
        let real_label = real_universe.label(&entity).to_string();
        let aliases = real_universe
            .graph
            .entities
            .get(&entity)
            .map(|e| e.aliases.clone())
            .unwrap_or_default();
        let synth_page = corpus.pages[&entity].synth.clone().expect("retained page");
        let mut attempt = 0u32;
        let verdict = loop {
            match novelty_filter(&synth_page, judge, &real_label, &aliases) {
                Ok(keep) => break Ok(keep),
                Err(PageFailure::Transport(_)) if attempt < config.transport_retry_cap => {
                    attempt += 1;
                }
                Err(PageFailure::Transport(err)) => {
                    break Err(DropReason::Transport { message: err.to_string() })
                }
                Err(PageFailure::Gate(reason)) => break Err(reason),
            }
        };
        match verdict {
            Ok(true) => {}
            Ok(false) => {
                corpus.pages.get_mut(&entity).expect("page present").status =
                    PageStatus::Dropped {
                        reason: DropReason::NoveltyGuessed { guess: real_label.clone() },
                    };
            }
            Err(reason) => {
                corpus.pages.get_mut(&entity).expect("page present").status =
                    PageStatus::Dropped { reason };
            }
        }
    }

    prune_to_lcc(&mut corpus);

    let mut dropped: BTreeMap<String, usize> = BTreeMap::new();
    let mut retained = 0usize;
    let mut pages = Vec::new();
    for pair in corpus.pages.values() {
        match &pair.status {
            PageStatus::Retained => retained += 1,
            PageStatus::Dropped { reason } => {
                *dropped.entry(reason.key().to_string()).or_default() += 1
            }
        }
        pages.push(PageReport {
            entity: pair.entity.clone(),
            status: pair.status.clone(),
            draft_similarity: pair.draft_similarity,
            pair_similarity: pair.pair_similarity,
            pair_similarity_normalized: pair.pair_similarity_normalized,
        });
    }
    let manifest = CorpusManifest {
        thresholds: config.thresholds,
        considered,
        skipped_isolated,
        retained,
        dropped,
        pages,
    };
    (corpus, manifest)
}
