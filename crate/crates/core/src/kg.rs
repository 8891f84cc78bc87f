//! Knowledge-graph ingestion, modelling, and filtering.
//!
//! The source graph arrives as two JSON-lines streams (entities and facts)
//! plus an optional relation-definitions map. After ingestion the graph is an
//! immutable value: every stage downstream reads it, none mutate it.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text;

/// Opaque entity identifier, e.g. `Q314553`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for EntityId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub label: String,
    /// Targets of the instance-of relation.
    pub type_ids: Vec<EntityId>,
    pub aliases: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub flags: BTreeSet<String>,
    pub is_named: bool,
}

/// Kind tag carried by every literal value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiteralKind {
    Timestamp,
    Quantity,
    String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub kind: LiteralKind,
    pub value: String,
}

impl Literal {
    pub fn timestamp(value: impl Into<String>) -> Self {
        Literal { kind: LiteralKind::Timestamp, value: value.into() }
    }

    pub fn quantity(value: impl Into<String>) -> Self {
        Literal { kind: LiteralKind::Quantity, value: value.into() }
    }

    pub fn string(value: impl Into<String>) -> Self {
        Literal { kind: LiteralKind::String, value: value.into() }
    }
}

/// Relation identifier plus its human-readable property name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub id: String,
    pub label: String,
}

impl Relation {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        Relation { id: id.into(), label: label.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactObject {
    Entity(EntityId),
    Literal(Literal),
}

impl FactObject {
    pub fn as_entity(&self) -> Option<&EntityId> {
        match self {
            FactObject::Entity(id) => Some(id),
            FactObject::Literal(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Qualifier {
    pub relation: Relation,
    pub value: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fact {
    pub subject: EntityId,
    pub relation: Relation,
    pub object: FactObject,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub qualifiers: Vec<Qualifier>,
}

impl Fact {
    /// First timestamp qualifier, if any.
    pub fn timestamp_qualifier(&self) -> Option<&Qualifier> {
        self.qualifiers.iter().find(|q| q.value.kind == LiteralKind::Timestamp)
    }
}

#[derive(Debug, Error)]
pub enum KgError {
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: entity {id} has an empty label and is not flagged droppable")]
    EmptyLabel { line: usize, id: EntityId },
    #[error("line {line}: duplicate entity id {id}")]
    DuplicateEntity { line: usize, id: EntityId },
    #[error("fact references missing entity {id}")]
    DanglingEndpoint { id: EntityId },
    #[error("unknown entity {id}")]
    UnknownEntity { id: EntityId },
    #[error("type resolution exceeded depth cap {cap} for {entity}; partial label: {partial}")]
    UnresolvedType { entity: EntityId, cap: usize, partial: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// The substrate graph: entities, deduplicated facts, relation definitions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub entities: BTreeMap<EntityId, Entity>,
    pub facts: Vec<Fact>,
    #[serde(default)]
    pub relation_defs: BTreeMap<String, String>,
}

/// Decides whether a surface label denotes a named entity.
///
/// The rule is the capitalization convention for proper nouns: the first
/// alphabetic character of the label is uppercase. `type_labels` is accepted
/// for callers that key the decision on richer signals, but the baseline rule
/// ignores it.
pub fn is_named_entity(label: &str, _type_labels: &[String]) -> bool {
    label
        .chars()
        .find(|c| c.is_alphabetic())
        .map_or(false, |c| c.is_uppercase())
}

#[derive(Debug, Deserialize)]
struct EntityRecord {
    id: String,
    label: String,
    #[serde(default)]
    aliases: Vec<String>,
    #[serde(default)]
    instance_of: Vec<String>,
    #[serde(default)]
    flags: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct FactRecord {
    subject: String,
    property: String,
    property_label: String,
    object: ObjectRecord,
    #[serde(default)]
    qualifiers: Vec<QualifierRecord>,
}

#[derive(Debug, Deserialize)]
enum ObjectRecord {
    #[serde(rename = "entity")]
    Entity(String),
    #[serde(rename = "literal")]
    Literal(LiteralRecord),
}

#[derive(Debug, Deserialize)]
struct LiteralRecord {
    kind: LiteralKind,
    value: String,
}

#[derive(Debug, Deserialize)]
struct QualifierRecord {
    property: String,
    #[serde(default)]
    property_label: String,
    literal: LiteralRecord,
}

/// Ingest the two JSON-lines streams into a validated graph.
///
/// Facts are deduplicated on the full (subject, relation, object, qualifiers)
/// tuple and stored sorted, so the resulting graph does not depend on input
/// order. A fact whose subject, entity object, or qualifier target is missing
/// from the entity stream is a referential error.
pub fn ingest_kg(
    entities: impl BufRead,
    facts: impl BufRead,
) -> Result<KnowledgeGraph, KgError> {
    let mut graph = KnowledgeGraph::default();

    for (lineno, line) in entities.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: EntityRecord = serde_json::from_str(&line)
            .map_err(|e| KgError::Parse { line: lineno, message: e.to_string() })?;
        if record.id.is_empty() {
            return Err(KgError::Parse { line: lineno, message: "empty entity id".into() });
        }
        let flags: BTreeSet<String> = record.flags.into_iter().collect();
        if record.label.is_empty() && !flags.contains("droppable") {
            return Err(KgError::EmptyLabel { line: lineno, id: EntityId::new(record.id) });
        }
        let id = EntityId::new(record.id);
        if graph.entities.contains_key(&id) {
            return Err(KgError::DuplicateEntity { line: lineno, id });
        }
        let is_named = is_named_entity(&record.label, &[]);
        graph.entities.insert(
            id.clone(),
            Entity {
                id,
                label: record.label,
                type_ids: record.instance_of.into_iter().map(EntityId::new).collect(),
                aliases: record.aliases,
                flags,
                is_named,
            },
        );
    }

    let mut parsed: BTreeSet<Fact> = BTreeSet::new();
    for (lineno, line) in facts.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: FactRecord = serde_json::from_str(&line)
            .map_err(|e| KgError::Parse { line: lineno, message: e.to_string() })?;
        let subject = EntityId::new(record.subject);
        if !graph.entities.contains_key(&subject) {
            return Err(KgError::DanglingEndpoint { id: subject });
        }
        let object = match record.object {
            ObjectRecord::Entity(id) => {
                let id = EntityId::new(id);
                if !graph.entities.contains_key(&id) {
                    return Err(KgError::DanglingEndpoint { id });
                }
                FactObject::Entity(id)
            }
            ObjectRecord::Literal(lit) => {
                FactObject::Literal(Literal { kind: lit.kind, value: lit.value })
            }
        };
        let qualifiers = record
            .qualifiers
            .into_iter()
            .map(|q| Qualifier {
                relation: Relation::new(q.property, q.property_label),
                value: Literal { kind: q.literal.kind, value: q.literal.value },
            })
            .collect();
        parsed.insert(Fact {
            subject,
            relation: Relation::new(record.property, record.property_label),
            object,
            qualifiers,
        });
    }
    graph.facts = parsed.into_iter().collect();
    Ok(graph)
}

impl KnowledgeGraph {
    pub fn entity(&self, id: &EntityId) -> Result<&Entity, KgError> {
        self.entities.get(id).ok_or_else(|| KgError::UnknownEntity { id: id.clone() })
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.entities.contains_key(id)
    }

    /// Canonical serialization: entities sorted by id, facts in their sorted
    /// dedup order, one JSON object per line. Equal graphs serialize to equal
    /// bytes regardless of ingestion order.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for entity in self.entities.values() {
            out.extend_from_slice(serde_json::to_string(entity).expect("serialize").as_bytes());
            out.push(b'\n');
        }
        for fact in &self.facts {
            out.extend_from_slice(serde_json::to_string(fact).expect("serialize").as_bytes());
            out.push(b'\n');
        }
        for (id, def) in &self.relation_defs {
            out.extend_from_slice(format!("{id}\t{def}\n").as_bytes());
        }
        out
    }

    pub fn fingerprint(&self) -> String {
        crate::fingerprint(&self.canonical_bytes())
    }

    /// Restrict the graph to `keep`, dropping facts that touch anything else.
    pub fn induced(&self, keep: &BTreeSet<EntityId>) -> KnowledgeGraph {
        let entities = self
            .entities
            .iter()
            .filter(|(id, _)| keep.contains(*id))
            .map(|(id, e)| (id.clone(), e.clone()))
            .collect();
        let facts = self
            .facts
            .iter()
            .filter(|f| {
                keep.contains(&f.subject)
                    && f.object.as_entity().map_or(true, |o| keep.contains(o))
            })
            .cloned()
            .collect();
        KnowledgeGraph { entities, facts, relation_defs: self.relation_defs.clone() }
    }

    /// Distinct-neighbor adjacency over entity-to-entity facts, undirected,
    /// self-loops ignored.
    pub fn undirected_neighbors(&self) -> BTreeMap<EntityId, BTreeSet<EntityId>> {
        let mut adj: BTreeMap<EntityId, BTreeSet<EntityId>> =
            self.entities.keys().map(|id| (id.clone(), BTreeSet::new())).collect();
        for fact in &self.facts {
            if let Some(object) = fact.object.as_entity() {
                if object != &fact.subject {
                    adj.entry(fact.subject.clone()).or_default().insert(object.clone());
                    adj.entry(object.clone()).or_default().insert(fact.subject.clone());
                }
            }
        }
        adj
    }
}

/// Configured denylists for the entity filter. The graph names the dropped
/// categories (time terms, bookkeeping pages) but not their membership, so
/// the membership ships as configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Type ids whose instances are calendar/time terms.
    pub calendar_types: Vec<EntityId>,
    /// Type ids marking site-bookkeeping entities.
    pub bookkeeping_types: Vec<EntityId>,
    /// How far to chase instance-of chains when testing the denylists.
    pub type_chain_depth: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            calendar_types: [
                "Q577",      // calendar year
                "Q3186692",  // calendar year (alt)
                "Q39911",    // decade
                "Q578",      // century
                "Q36507",    // millennium
                "Q47018901", // calendar month
                "Q14795564", // recurrent timeframe
            ]
            .into_iter()
            .map(EntityId::from)
            .collect(),
            bookkeeping_types: [
                "Q4167410",  // disambiguation page
                "Q4167836",  // category
                "Q11266439", // template
                "Q13406463", // list article
                "Q14204246", // project page
                "Q17633526", // internal item
            ]
            .into_iter()
            .map(EntityId::from)
            .collect(),
            type_chain_depth: 5,
        }
    }
}

fn type_chain_hits(
    kg: &KnowledgeGraph,
    entity: &Entity,
    denylist: &BTreeSet<&EntityId>,
    depth_cap: usize,
) -> bool {
    let mut queue: VecDeque<(&EntityId, usize)> =
        entity.type_ids.iter().map(|t| (t, 0usize)).collect();
    let mut seen: BTreeSet<&EntityId> = BTreeSet::new();
    while let Some((tid, depth)) = queue.pop_front() {
        if !seen.insert(tid) {
            continue;
        }
        if denylist.contains(tid) {
            return true;
        }
        if depth + 1 >= depth_cap {
            continue;
        }
        if let Some(type_entity) = kg.entities.get(tid) {
            for parent in &type_entity.type_ids {
                queue.push_back((parent, depth + 1));
            }
        }
    }
    false
}

/// Drop time terms, bookkeeping entities, unlabeled entities, and entities
/// whose labels contain digits, together with every fact touching them.
/// Idempotent: filtering a filtered graph is a no-op.
pub fn filter_entities(kg: &KnowledgeGraph, config: &FilterConfig) -> KnowledgeGraph {
    let calendar: BTreeSet<&EntityId> = config.calendar_types.iter().collect();
    let bookkeeping: BTreeSet<&EntityId> = config.bookkeeping_types.iter().collect();

    let keep: BTreeSet<EntityId> = kg
        .entities
        .values()
        .filter(|e| {
            !e.label.is_empty()
                && !e.label.chars().any(|c| c.is_ascii_digit())
                && !type_chain_hits(kg, e, &calendar, config.type_chain_depth)
                && !type_chain_hits(kg, e, &bookkeeping, config.type_chain_depth)
        })
        .map(|e| e.id.clone())
        .collect();
    kg.induced(&keep)
}

/// Depth cap for recursive type-label resolution.
pub const TYPE_RESOLUTION_DEPTH_CAP: usize = 5;

/// Resolves entity type descriptions, replacing named entities embedded in
/// instance-of labels with those entities' own resolved type labels until no
/// named entity remains ("city in British Columbia" becomes "city in province
/// of country").
pub struct TypeResolver<'a> {
    kg: &'a KnowledgeGraph,
    /// Entities outside the graph that type chains may reference.
    annex: Option<&'a BTreeMap<EntityId, Entity>>,
    /// Named-entity labels sorted longest-first for greedy matching; ties on
    /// label pick the smallest entity id.
    named_labels: Vec<(String, EntityId)>,
}

impl<'a> TypeResolver<'a> {
    pub fn new(kg: &'a KnowledgeGraph) -> Self {
        Self::build(kg, None)
    }

    pub fn with_annex(kg: &'a KnowledgeGraph, annex: &'a BTreeMap<EntityId, Entity>) -> Self {
        Self::build(kg, Some(annex))
    }

    fn build(kg: &'a KnowledgeGraph, annex: Option<&'a BTreeMap<EntityId, Entity>>) -> Self {
        let mut by_label: BTreeMap<&str, &EntityId> = BTreeMap::new();
        for e in kg.entities.values().chain(annex.into_iter().flat_map(|a| a.values())) {
            if e.is_named && !e.label.is_empty() {
                by_label.entry(e.label.as_str()).or_insert(&e.id);
            }
        }
        let mut named_labels: Vec<(String, EntityId)> =
            by_label.into_iter().map(|(l, id)| (l.to_string(), id.clone())).collect();
        named_labels.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(&b.0)));
        TypeResolver { kg, annex, named_labels }
    }

    fn lookup(&self, id: &EntityId) -> Option<&Entity> {
        self.kg.entities.get(id).or_else(|| self.annex.and_then(|a| a.get(id)))
    }

    /// Resolved type description for `entity`. Entities with no instance-of
    /// targets in the graph resolve to the generic description "entity".
    pub fn resolve(&self, entity: &EntityId) -> Result<String, KgError> {
        self.resolve_at(entity, 0)
    }

    fn resolve_at(&self, entity: &EntityId, depth: usize) -> Result<String, KgError> {
        let e = self
            .lookup(entity)
            .ok_or_else(|| KgError::UnknownEntity { id: entity.clone() })?;
        let mut parts = Vec::new();
        for tid in &e.type_ids {
            if let Some(type_entity) = self.lookup(tid) {
                if type_entity.label.is_empty() {
                    continue;
                }
                parts.push(self.resolve_label(&type_entity.label, entity, depth)?);
            }
        }
        if parts.is_empty() {
            return Ok("entity".to_string());
        }
        parts.sort();
        parts.dedup();
        Ok(parts.join(", "))
    }

    /// Replace each named-entity occurrence in a label string with that
    /// entity's resolved type description.
    fn resolve_label(
        &self,
        label: &str,
        origin: &EntityId,
        depth: usize,
    ) -> Result<String, KgError> {
        let mut replacements: Vec<(String, String)> = Vec::new();
        for (named, id) in &self.named_labels {
            if text::contains_word(label, named) {
                if depth + 1 > TYPE_RESOLUTION_DEPTH_CAP {
                    return Err(KgError::UnresolvedType {
                        entity: origin.clone(),
                        cap: TYPE_RESOLUTION_DEPTH_CAP,
                        partial: label.to_string(),
                    });
                }
                let resolved = self.resolve_at(id, depth + 1)?;
                replacements.push((named.clone(), resolved));
            }
        }
        if replacements.is_empty() {
            Ok(label.to_string())
        } else {
            Ok(text::replace_words(label, &replacements))
        }
    }
}

/// Convenience wrapper building a one-shot resolver.
pub fn resolve_type_label(entity: &EntityId, kg: &KnowledgeGraph) -> Result<String, KgError> {
    TypeResolver::new(kg).resolve(entity)
}

/// Parse a relation-definitions file: a JSON object mapping property id to
/// description text.
pub fn load_relation_defs(reader: impl BufRead) -> Result<BTreeMap<String, String>, KgError> {
    let mut content = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut content)?;
    serde_json::from_str(&content)
        .map_err(|e| KgError::Parse { line: 0, message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn entity_line(id: &str, label: &str, instance_of: &[&str]) -> String {
        serde_json::json!({
            "id": id, "label": label, "aliases": [], "instance_of": instance_of, "flags": []
        })
        .to_string()
    }

    fn fact_line(subject: &str, prop: &str, label: &str, object: &str) -> String {
        serde_json::json!({
            "subject": subject, "property": prop, "property_label": label,
            "object": {"entity": object}, "qualifiers": []
        })
        .to_string()
    }

    fn ingest(entities: &str, facts: &str) -> Result<KnowledgeGraph, KgError> {
        ingest_kg(Cursor::new(entities.as_bytes()), Cursor::new(facts.as_bytes()))
    }

    #[test]
    fn minimal_ingest() {
        let entities =
            format!("{}\n{}\n", entity_line("Q1", "Alpha", &[]), entity_line("Q2", "Beta", &[]));
        let facts = fact_line("Q1", "P1", "knows", "Q2");
        let kg = ingest(&entities, &facts).unwrap();
        assert_eq!(kg.entities.len(), 2);
        assert_eq!(kg.facts.len(), 1);
    }

    #[test]
    fn dangling_endpoint_is_named() {
        let entities = entity_line("Q1", "Alpha", &[]);
        let facts = fact_line("Q1", "P1", "knows", "Q999");
        let err = ingest(&entities, &facts).unwrap_err();
        match err {
            KgError::DanglingEndpoint { id } => assert_eq!(id.as_str(), "Q999"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn ingestion_is_order_independent() {
        let e1 = entity_line("Q1", "Alpha", &[]);
        let e2 = entity_line("Q2", "Beta", &[]);
        let f1 = fact_line("Q1", "P1", "knows", "Q2");
        let f2 = fact_line("Q2", "P2", "likes", "Q1");
        let a = ingest(&format!("{e1}\n{e2}\n"), &format!("{f1}\n{f2}\n")).unwrap();
        let b = ingest(&format!("{e2}\n{e1}\n"), &format!("{f2}\n{f1}\n")).unwrap();
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
    }

    #[test]
    fn duplicate_facts_collapse() {
        let entities =
            format!("{}\n{}\n", entity_line("Q1", "Alpha", &[]), entity_line("Q2", "Beta", &[]));
        let f = fact_line("Q1", "P1", "knows", "Q2");
        let kg = ingest(&entities, &format!("{f}\n{f}\n")).unwrap();
        assert_eq!(kg.facts.len(), 1);
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = ingest("not json\n", "").unwrap_err();
        match err {
            KgError::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn named_entity_rule() {
        assert!(is_named_entity("Geoffrey Hinton", &[]));
        assert!(!is_named_entity("dog", &[]));
        assert!(!is_named_entity("einsteinium", &[]));
        assert!(!is_named_entity("", &[]));
        assert!(is_named_entity("\u{00c9}cole Polytechnique", &[]));
    }

    #[test]
    fn filter_drops_time_terms_and_digits_and_unlabeled() {
        let entities = [
            entity_line("Q577", "calendar year", &[]),
            entity_line("Q10", "2019", &["Q577"]),
            entity_line("Q11", "Mumbai", &[]),
            entity_line("Q12", "Route 66", &[]),
            serde_json::json!({
                "id": "Q13", "label": "", "aliases": [], "instance_of": [],
                "flags": ["droppable"]
            })
            .to_string(),
        ]
        .join("\n");
        let facts = fact_line("Q11", "P1", "relates to", "Q10");
        let kg = ingest(&entities, &facts).unwrap();
        let filtered = filter_entities(&kg, &FilterConfig::default());
        assert!(filtered.contains(&EntityId::from("Q11")));
        assert!(!filtered.contains(&EntityId::from("Q10")));
        assert!(!filtered.contains(&EntityId::from("Q12")));
        assert!(!filtered.contains(&EntityId::from("Q13")));
        assert!(filtered.facts.is_empty());
    }

    #[test]
    fn filter_is_idempotent() {
        let entities = [
            entity_line("Q1", "Mumbai", &[]),
            entity_line("Q2", "2019", &[]),
            entity_line("Q3", "Asia", &[]),
        ]
        .join("\n");
        let facts = fact_line("Q1", "P1", "continent", "Q3");
        let kg = ingest(&entities, &facts).unwrap();
        let config = FilterConfig::default();
        let once = filter_entities(&kg, &config);
        let twice = filter_entities(&once, &config);
        assert_eq!(once.canonical_bytes(), twice.canonical_bytes());
    }

    #[test]
    fn filtered_graph_has_no_dangling_facts() {
        let entities = [
            entity_line("Q1", "Mumbai", &[]),
            entity_line("Q2", "1507", &[]),
            entity_line("Q3", "Asia", &[]),
        ]
        .join("\n");
        let facts =
            format!("{}\n{}\n", fact_line("Q1", "P1", "o", "Q2"), fact_line("Q1", "P2", "c", "Q3"));
        let kg = ingest(&entities, &facts).unwrap();
        let filtered = filter_entities(&kg, &FilterConfig::default());
        for fact in &filtered.facts {
            assert!(filtered.contains(&fact.subject));
            if let Some(obj) = fact.object.as_entity() {
                assert!(filtered.contains(obj));
            }
        }
    }

    #[test]
    fn type_label_resolution_recurses() {
        // Vancouver-style chain: city in <province> -> province of <country>.
        let entities = [
            entity_line("Q1", "Vancouver", &["T1"]),
            entity_line("T1", "city in British Columbia", &[]),
            entity_line("Q2", "British Columbia", &["T2"]),
            entity_line("T2", "province of Canada", &[]),
            entity_line("Q3", "Canada", &["T3"]),
            entity_line("T3", "country", &[]),
        ]
        .join("\n");
        let kg = ingest(&entities, "").unwrap();
        let resolved = resolve_type_label(&EntityId::from("Q1"), &kg).unwrap();
        assert_eq!(resolved, "city in province of country");
    }

    #[test]
    fn type_label_without_named_entities_is_identity() {
        let entities =
            format!("{}\n{}\n", entity_line("Q1", "dog", &["T1"]), entity_line("T1", "domestic animal", &[]));
        let kg = ingest(&entities, "").unwrap();
        let resolved = resolve_type_label(&EntityId::from("Q1"), &kg).unwrap();
        assert_eq!(resolved, "domestic animal");
    }

    #[test]
    fn type_cycle_hits_depth_cap() {
        // Two named entities whose type labels reference each other.
        let entities = [
            entity_line("Q1", "Aldor", &["T1"]),
            entity_line("T1", "city of Beldor", &[]),
            entity_line("Q2", "Beldor", &["T2"]),
            entity_line("T2", "region of Aldor", &[]),
        ]
        .join("\n");
        let kg = ingest(&entities, "").unwrap();
        let err = resolve_type_label(&EntityId::from("Q1"), &kg).unwrap_err();
        match err {
            KgError::UnresolvedType { partial, .. } => assert!(!partial.is_empty()),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
