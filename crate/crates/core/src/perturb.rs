//! Surface-form perturbation: build the name-related dependency DAG, rename
//! named entities level by level through a pluggable name generator, and
//! shift timestamps by a fixed per-universe offset.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{EntityId, KgError, KnowledgeGraph, LiteralKind, Relation};
use crate::ports::{NameGeneration, NameParent, NameRequest, PortError};
use crate::sampler::Universe;
use crate::text;

#[derive(Debug, Error)]
pub enum PerturbError {
    #[error("could not find an acceptable name for {entity} after {attempts} attempts")]
    RenameFailure { entity: EntityId, attempts: u32 },
    #[error("name generation failed for {entity}: {source}")]
    Generator { entity: EntityId, source: PortError },
    #[error("non-parseable timestamp {value:?} on fact {fact}")]
    Timestamp { fact: String, value: String },
    #[error("rename plan is missing named entities: {missing:?}")]
    IncompletePlan { missing: Vec<EntityId> },
    #[error(transparent)]
    Kg(#[from] KgError),
}

/// Edge (from, relation, to) means `from` is name-related to `to`: both are
/// named entities, `to`'s label is a whole-word substring of `from`'s label,
/// and a fact connects the two in either direction. Renames therefore flow
/// from `to` (the shorter name) to `from` (the derived name).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DepEdge {
    pub from: EntityId,
    pub relation: Relation,
    pub to: EntityId,
    /// True when `to` is the subject of the connecting fact.
    pub to_is_subject: bool,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DependencyGraph {
    /// All named-entity ids of the universe.
    pub nodes: BTreeSet<EntityId>,
    pub edges: Vec<DepEdge>,
}

impl DependencyGraph {
    /// Dependency parents of `id`: entities whose labels are embedded in
    /// `id`'s label and must therefore be renamed first.
    pub fn parents_of(&self, id: &EntityId) -> Vec<&DepEdge> {
        self.edges.iter().filter(|e| &e.from == id).collect()
    }
}

/// Levels of the rename order plus the final mapping and timestamp offset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RenamePlan {
    /// Level d entities are renamed before any level d+1 entity.
    pub order: Vec<Vec<EntityId>>,
    pub mapping: BTreeMap<EntityId, String>,
    pub delta_years: i64,
    /// Re-request counts for entities whose first candidates collided.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub retries: BTreeMap<EntityId, u32>,
}

/// Whole-word, case-sensitive substring test between labels.
fn label_embedded(inner: &str, outer: &str) -> bool {
    inner != outer && !inner.is_empty() && text::contains_word(outer, inner)
}

/// Build the name-related dependency DAG of a real-labeled universe.
///
/// Mutual relationships (equal labels satisfy the substring test both ways)
/// are broken by dropping the edge whose source id is lexicographically
/// larger, which keeps the graph acyclic: any other cycle would need strict
/// containment in both directions.
pub fn build_dependency_graph(universe: &Universe) -> DependencyGraph {
    let named = universe.named_ids();
    let mut edges: BTreeMap<(EntityId, EntityId), DepEdge> = BTreeMap::new();
    for fact in &universe.graph.facts {
        let Some(object) = fact.object.as_entity() else { continue };
        let subject = &fact.subject;
        if subject == object || !named.contains(subject) || !named.contains(object) {
            continue;
        }
        let s_label = universe.label(subject);
        let o_label = universe.label(object);
        let mut push = |from: &EntityId, to: &EntityId, to_is_subject: bool| {
            edges.entry((from.clone(), to.clone())).or_insert_with(|| DepEdge {
                from: from.clone(),
                relation: fact.relation.clone(),
                to: to.clone(),
                to_is_subject,
            });
        };
        if s_label == o_label {
            // Equal labels: keep only the edge out of the smaller id.
            let (from, to) = if subject < object { (subject, object) } else { (object, subject) };
            let to_is_subject = to == subject;
            push(from, to, to_is_subject);
        } else {
            if label_embedded(o_label, s_label) {
                push(subject, object, false);
            }
            if label_embedded(s_label, o_label) {
                push(object, subject, true);
            }
        }
    }
    DependencyGraph { nodes: named, edges: edges.into_values().collect() }
}

/// Rename depth per node: 0 for nodes without dependencies, otherwise one
/// past the deepest dependency.
fn levels(dep: &DependencyGraph) -> Vec<Vec<EntityId>> {
    let mut depth: BTreeMap<&EntityId, usize> = BTreeMap::new();
    fn depth_of<'a>(
        id: &'a EntityId,
        dep: &'a DependencyGraph,
        depth: &mut BTreeMap<&'a EntityId, usize>,
    ) -> usize {
        if let Some(&d) = depth.get(id) {
            return d;
        }
        // Mark before recursing; the builder guarantees acyclicity, this
        // bound is just breakage containment for hand-built graphs.
        depth.insert(id, 0);
        let d = dep
            .edges
            .iter()
            .filter(|e| &e.from == id)
            .map(|e| depth_of(&e.to, dep, depth) + 1)
            .max()
            .unwrap_or(0);
        depth.insert(id, d);
        d
    }
    let mut by_level: BTreeMap<usize, Vec<EntityId>> = BTreeMap::new();
    for id in &dep.nodes {
        let d = depth_of(id, dep, &mut depth);
        by_level.entry(d).or_default().push(id.clone());
    }
    by_level.into_values().collect()
}

#[derive(Debug, Clone)]
pub struct RenameOptions {
    pub retry_cap: u32,
    pub candidates_per_call: u32,
    pub delta_years: i64,
}

impl Default for RenameOptions {
    fn default() -> Self {
        RenameOptions { retry_cap: 5, candidates_per_call: 4, delta_years: 39 }
    }
}

/// Plan renames over the dependency levels.
///
/// Every depth-d entity is renamed before any depth d+1 entity, and each
/// generator call carries the entity's resolved type label plus the already
/// renamed labels and relations of its dependency parents. Candidates that
/// collide with any existing real or synthetic label in the universe (or
/// that embed the real label of a renamed entity, which would leak it into
/// the synth-mapped corpus) are rejected and re-requested up to the retry
/// cap.
pub fn plan_renames(
    dep: &DependencyGraph,
    universe: &Universe,
    name_gen: &dyn NameGeneration,
    options: &RenameOptions,
) -> Result<RenamePlan, PerturbError> {
    let resolver = universe.type_resolver();
    let resolve = |id: &EntityId| match resolver.resolve(id) {
        Ok(label) => label,
        // A broken chain still carries its partial description.
        Err(KgError::UnresolvedType { partial, .. }) => partial,
        Err(_) => "entity".to_string(),
    };

    let real_labels: BTreeSet<String> =
        universe.labeling.values().cloned().collect();
    let renamed_real_labels: Vec<String> = dep
        .nodes
        .iter()
        .map(|id| universe.label(id).to_string())
        .filter(|l| !l.is_empty())
        .collect();

    let order = levels(dep);
    let mut mapping: BTreeMap<EntityId, String> = BTreeMap::new();
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let mut retries: BTreeMap<EntityId, u32> = BTreeMap::new();
    // Name requests carry no entity identity, so entities sharing a type and
    // parent set see the same candidate stream. Track how many names each
    // request signature has already consumed and ask for that many more.
    let mut consumed_by_signature: BTreeMap<String, u32> = BTreeMap::new();

    for level in &order {
        for id in level {
            let parents: Vec<NameParent> = dep
                .parents_of(id)
                .into_iter()
                .map(|edge| NameParent {
                    new_label: mapping
                        .get(&edge.to)
                        .cloned()
                        .expect("dependency parent renamed in an earlier level"),
                    type_label: resolve(&edge.to),
                    relation: edge.relation.label.clone(),
                    parent_is_subject: edge.to_is_subject,
                })
                .collect();
            let type_label = resolve(id);
            let signature = format!(
                "{type_label}\u{1f}{}",
                serde_json::to_string(&parents).expect("serialize parents")
            );
            let consumed = consumed_by_signature.entry(signature).or_insert(0);

            let mut attempts = 0u32;
            let mut n_candidates = options.candidates_per_call + *consumed;
            let chosen = loop {
                let request = NameRequest {
                    entity_type_label: type_label.clone(),
                    parents: parents.clone(),
                    n_candidates,
                };
                let candidates = name_gen
                    .propose(&request)
                    .map_err(|source| PerturbError::Generator { entity: id.clone(), source })?;
                let accepted = candidates.into_iter().find(|candidate| {
                    let candidate = candidate.trim();
                    !candidate.is_empty()
                        && !real_labels.contains(candidate)
                        && !taken.contains(candidate)
                        && !renamed_real_labels
                            .iter()
                            .any(|real| text::contains_word(candidate, real))
                });
                if let Some(name) = accepted {
                    break name.trim().to_string();
                }
                attempts += 1;
                if attempts >= options.retry_cap {
                    return Err(PerturbError::RenameFailure { entity: id.clone(), attempts });
                }
                retries.insert(id.clone(), attempts);
                n_candidates += options.candidates_per_call;
            };
            *consumed += 1;
            taken.insert(chosen.clone());
            mapping.insert(id.clone(), chosen);
        }
    }

    Ok(RenamePlan { order, mapping, delta_years: options.delta_years, retries })
}

/// Shift the year component of a timestamp string, preserving everything
/// else. Accepts `YYYY`, `YYYY-MM`, `YYYY-MM-DD`, an optional leading `+`,
/// and an optional trailing time part.
pub fn shift_timestamp_value(value: &str, delta_years: i64) -> Option<String> {
    let (sign, rest) = match value.strip_prefix('+') {
        Some(rest) => ("+", rest),
        None => ("", value),
    };
    let digits_len = rest.chars().take_while(|c| c.is_ascii_digit()).count();
    if digits_len == 0 {
        return None;
    }
    let (year_str, tail) = rest.split_at(digits_len);
    if !tail.is_empty() && !tail.starts_with('-') {
        return None;
    }
    let year: i64 = year_str.parse().ok()?;
    let shifted = year + delta_years;
    if shifted < 0 {
        return None;
    }
    Some(format!("{sign}{:0width$}{tail}", shifted, width = year_str.len()))
}

fn shift_graph_timestamps(
    graph: &KnowledgeGraph,
    delta_years: i64,
) -> Result<KnowledgeGraph, PerturbError> {
    let mut graph = graph.clone();
    for fact in &mut graph.facts {
        let context = format!("{} -{}->", fact.subject, fact.relation.label);
        if let crate::kg::FactObject::Literal(literal) = &mut fact.object {
            if literal.kind == LiteralKind::Timestamp {
                literal.value = shift_timestamp_value(&literal.value, delta_years).ok_or_else(
                    || PerturbError::Timestamp {
                        fact: context.clone(),
                        value: literal.value.clone(),
                    },
                )?;
            }
        }
        for qualifier in &mut fact.qualifiers {
            if qualifier.value.kind == LiteralKind::Timestamp {
                qualifier.value.value =
                    shift_timestamp_value(&qualifier.value.value, delta_years).ok_or_else(
                        || PerturbError::Timestamp {
                            fact: context.clone(),
                            value: qualifier.value.value.clone(),
                        },
                    )?;
            }
        }
    }
    Ok(graph)
}

/// Add `delta_years` to every timestamp literal of the universe.
pub fn shift_timestamps(universe: &Universe, delta_years: i64) -> Result<Universe, PerturbError> {
    let mut shifted = universe.clone();
    shifted.graph = shift_graph_timestamps(&universe.graph, delta_years)?;
    Ok(shifted)
}

/// Produce the synth-mapped universe: identical graph structure, new labels
/// for named entities, original labels elsewhere, shifted timestamps.
pub fn make_synth_universe(
    universe: &Universe,
    plan: &RenamePlan,
) -> Result<Universe, PerturbError> {
    let named = universe.named_ids();
    let missing: Vec<EntityId> =
        named.iter().filter(|id| !plan.mapping.contains_key(*id)).cloned().collect();
    if !missing.is_empty() {
        return Err(PerturbError::IncompletePlan { missing });
    }
    let mut synth = shift_timestamps(universe, plan.delta_years)?;
    for (id, label) in synth.labeling.iter_mut() {
        if let Some(new_label) = plan.mapping.get(id) {
            *label = new_label.clone();
        }
    }
    // Entity records keep their real labels; the labeling function is the
    // synth surface form. Page generation reads labels exclusively from it.
    Ok(synth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{Entity, Fact, FactObject, Literal, Qualifier};
    use crate::sampler::{Provenance, SamplerConfig};
    use proptest::prelude::*;
    use std::sync::Mutex;

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

    fn fact(subject: &str, relation: &str, object: &str) -> Fact {
        Fact {
            subject: EntityId::from(subject),
            relation: Relation::new("P1", relation),
            object: FactObject::Entity(EntityId::from(object)),
            qualifiers: vec![],
        }
    }

    fn universe(entities: Vec<Entity>, facts: Vec<Fact>) -> Universe {
        let mut graph = KnowledgeGraph::default();
        let labeling =
            entities.iter().map(|e| (e.id.clone(), e.label.clone())).collect();
        for e in entities {
            graph.entities.insert(e.id.clone(), e);
        }
        graph.facts = facts;
        Universe {
            graph,
            labeling,
            type_annex: BTreeMap::new(),
            provenance: Provenance {
                config: SamplerConfig { seeds: vec![EntityId::from("Q1")], ..Default::default() },
                parent_fingerprint: "test".to_string(),
            },
        }
    }

    struct ScriptedNames {
        responses: Mutex<Vec<Vec<String>>>,
    }

    impl ScriptedNames {
        fn new(responses: Vec<Vec<&str>>) -> Self {
            ScriptedNames {
                responses: Mutex::new(
                    responses
                        .into_iter()
                        .rev()
                        .map(|r| r.into_iter().map(String::from).collect())
                        .collect(),
                ),
            }
        }
    }

    impl NameGeneration for ScriptedNames {
        fn propose(&self, _req: &NameRequest) -> Result<Vec<String>, PortError> {
            self.responses
                .lock()
                .unwrap()
                .pop()
                .ok_or(PortError::Transport { message: "script exhausted".into() })
        }
    }

    /// Embeds parents and salts with the request so collisions are rare.
    struct HashNames;

    impl NameGeneration for HashNames {
        fn propose(&self, req: &NameRequest) -> Result<Vec<String>, PortError> {
            let parents: Vec<&str> = req.parents.iter().map(|p| p.new_label.as_str()).collect();
            let mut out = Vec::new();
            for i in 0..req.n_candidates {
                let h = crate::fingerprint(
                    format!("{}|{}|{}", req.entity_type_label, parents.join(" "), i).as_bytes(),
                );
                let word = format!("Zz{}", &h[..6]);
                out.push(if parents.is_empty() {
                    word
                } else {
                    format!("{} {}", parents.join(" "), word)
                });
            }
            Ok(out)
        }
    }

    #[test]
    fn dependency_edge_requires_fact_and_substring() {
        let u = universe(
            vec![
                entity("Q1", "Vancouver"),
                entity("Q2", "Vancouver Canucks"),
                entity("Q3", "Toronto"),
            ],
            vec![fact("Q2", "home venue city", "Q1")],
        );
        let dep = build_dependency_graph(&u);
        assert_eq!(dep.edges.len(), 1);
        assert_eq!(dep.edges[0].from.as_str(), "Q2");
        assert_eq!(dep.edges[0].to.as_str(), "Q1");
    }

    #[test]
    fn substring_without_fact_is_no_edge() {
        let u = universe(
            vec![entity("Q1", "Vancouver"), entity("Q2", "Vancouver Canucks")],
            vec![],
        );
        let dep = build_dependency_graph(&u);
        assert!(dep.edges.is_empty());
    }

    #[test]
    fn substring_is_word_bounded() {
        let u = universe(
            vec![entity("Q1", "Ann"), entity("Q2", "Manner House")],
            vec![fact("Q2", "named after", "Q1")],
        );
        let dep = build_dependency_graph(&u);
        assert!(dep.edges.is_empty());
    }

    #[test]
    fn chain_renames_in_topological_levels() {
        let u = universe(
            vec![
                entity("Q1", "Ann"),
                entity("Q2", "Ann Harbor"),
                entity("Q3", "Ann Harbor Institute"),
            ],
            vec![fact("Q2", "named after", "Q1"), fact("Q3", "located in", "Q2")],
        );
        let dep = build_dependency_graph(&u);
        let plan = plan_renames(&dep, &u, &HashNames, &RenameOptions::default()).unwrap();
        let position = |id: &str| {
            plan.order
                .iter()
                .position(|level| level.iter().any(|e| e.as_str() == id))
                .unwrap()
        };
        assert!(position("Q1") < position("Q2"));
        assert!(position("Q2") < position("Q3"));
        // Name-derivation consistency: derived names embed parent names.
        let ann = plan.mapping.get(&EntityId::from("Q1")).unwrap().clone();
        let harbor = plan.mapping.get(&EntityId::from("Q2")).unwrap().clone();
        assert!(harbor.contains(&ann));
        assert!(plan.mapping.get(&EntityId::from("Q3")).unwrap().contains(&harbor));
    }

    #[test]
    fn root_generator_call_has_no_parents() {
        let u = universe(vec![entity("Q1", "Mira")], vec![]);
        let dep = build_dependency_graph(&u);
        let plan = plan_renames(&dep, &u, &HashNames, &RenameOptions::default()).unwrap();
        assert_eq!(plan.order.len(), 1);
        assert!(plan.mapping.contains_key(&EntityId::from("Q1")));
    }

    #[test]
    fn colliding_candidates_are_retried_and_counted() {
        let u = universe(vec![entity("Q1", "Mira"), entity("Q2", "Toronto")], vec![]);
        let dep = build_dependency_graph(&u);
        // Q1 renamed first: one clean call. Q2's generator then returns an
        // existing label twice before a fresh one.
        let scripted = ScriptedNames::new(vec![
            vec!["Freshia"],
            vec!["Freshia"],
            vec!["Mira"],
            vec!["Newland"],
        ]);
        let plan = plan_renames(&dep, &u, &scripted, &RenameOptions::default()).unwrap();
        assert_eq!(plan.mapping.get(&EntityId::from("Q2")).unwrap(), "Newland");
        assert_eq!(plan.retries.get(&EntityId::from("Q2")), Some(&2));
    }

    #[test]
    fn retry_cap_exhaustion_names_the_entity() {
        let u = universe(vec![entity("Q1", "Mira")], vec![]);
        let dep = build_dependency_graph(&u);
        let scripted = ScriptedNames::new(vec![vec!["Mira"]; 10]);
        let err =
            plan_renames(&dep, &u, &scripted, &RenameOptions::default()).unwrap_err();
        match err {
            PerturbError::RenameFailure { entity, attempts } => {
                assert_eq!(entity.as_str(), "Q1");
                assert_eq!(attempts, 5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn timestamp_shift_paper_examples() {
        assert_eq!(shift_timestamp_value("1935-01-15", 39).unwrap(), "1974-01-15");
        assert_eq!(shift_timestamp_value("1970-01-20", 39).unwrap(), "2009-01-20");
        assert_eq!(shift_timestamp_value("1955", 39).unwrap(), "1994");
        assert_eq!(shift_timestamp_value("+2019", 39).unwrap(), "+2058");
        assert!(shift_timestamp_value("not a date", 39).is_none());
    }

    #[test]
    fn zero_delta_is_identity() {
        let mut u = universe(vec![entity("Q1", "Mira")], vec![]);
        u.graph.facts.push(Fact {
            subject: EntityId::from("Q1"),
            relation: Relation::new("P569", "date of birth"),
            object: FactObject::Literal(Literal::timestamp("1935-01-15")),
            qualifiers: vec![],
        });
        let shifted = shift_timestamps(&u, 0).unwrap();
        assert_eq!(shifted.graph.canonical_bytes(), u.graph.canonical_bytes());
    }

    #[test]
    fn synth_universe_keeps_structure_and_swaps_labels() {
        let mut u = universe(
            vec![entity("Q1", "Geoffrey Hinton"), entity("Q2", "oxygen")],
            vec![fact("Q1", "discovered", "Q2")],
        );
        u.graph.facts.push(Fact {
            subject: EntityId::from("Q1"),
            relation: Relation::new("P569", "date of birth"),
            object: FactObject::Literal(Literal::timestamp("1947-12-06")),
            qualifiers: vec![Qualifier {
                relation: Relation::new("P585", "point in time"),
                value: Literal::timestamp("1947"),
            }],
        });
        let dep = build_dependency_graph(&u);
        let plan = plan_renames(&dep, &u, &HashNames, &RenameOptions::default()).unwrap();
        let synth = make_synth_universe(&u, &plan).unwrap();
        // Identical fact structure over ids once labels are stripped.
        let strip = |g: &KnowledgeGraph| {
            g.facts
                .iter()
                .map(|f| {
                    (
                        f.subject.clone(),
                        f.relation.id.clone(),
                        f.object.as_entity().cloned(),
                        f.qualifiers.len(),
                    )
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&u.graph), strip(&synth.graph));
        assert_ne!(synth.label(&EntityId::from("Q1")), "Geoffrey Hinton");
        assert_eq!(synth.label(&EntityId::from("Q2")), "oxygen");
        // Timestamps shifted by delta.
        let shifted_literal = synth
            .graph
            .facts
            .iter()
            .find_map(|f| match &f.object {
                FactObject::Literal(l) if l.kind == LiteralKind::Timestamp => Some(l.value.clone()),
                _ => None,
            })
            .unwrap();
        assert_eq!(shifted_literal, "1986-12-06");
    }

    #[test]
    fn incomplete_plan_is_rejected() {
        let u = universe(vec![entity("Q1", "Mira"), entity("Q2", "Kel")], vec![]);
        let plan = RenamePlan {
            order: vec![vec![EntityId::from("Q1")]],
            mapping: BTreeMap::from([(EntityId::from("Q1"), "Zau".to_string())]),
            delta_years: 39,
            retries: BTreeMap::new(),
        };
        let err = make_synth_universe(&u, &plan).unwrap_err();
        assert!(matches!(err, PerturbError::IncompletePlan { .. }));
    }

    #[test]
    fn synth_labels_injective_and_disjoint_from_real() {
        let mut entities = vec![entity("Q0", "Hub City")];
        let mut facts = Vec::new();
        for i in 1..24 {
            entities.push(entity(&format!("Q{i}"), &format!("Settlement {}", letters(i))));
            facts.push(fact(&format!("Q{i}"), "twinned with", "Q0"));
        }
        let u = universe(entities, facts);
        let dep = build_dependency_graph(&u);
        let plan = plan_renames(&dep, &u, &HashNames, &RenameOptions::default()).unwrap();
        let reals: BTreeSet<&String> = u.labeling.values().collect();
        let mut seen = BTreeSet::new();
        for label in plan.mapping.values() {
            assert!(!reals.contains(label));
            assert!(seen.insert(label.clone()), "duplicate synthetic label {label}");
        }
    }

    fn letters(i: usize) -> String {
        let a = b'A' + (i % 26) as u8;
        let b = b'a' + (i / 26 % 26) as u8;
        format!("{}{}", a as char, b as char)
    }

    proptest! {
        #[test]
        fn timestamp_shift_preserves_order(
            y1 in 1000i64..2200, y2 in 1000i64..2200,
            m in 1u32..13, d in 1u32..29, delta in 0i64..200
        ) {
            let a = format!("{y1:04}-{m:02}-{d:02}");
            let b = format!("{y2:04}-{m:02}-{d:02}");
            let sa = shift_timestamp_value(&a, delta).unwrap();
            let sb = shift_timestamp_value(&b, delta).unwrap();
            prop_assert_eq!(a <= b, sa <= sb);
        }

        #[test]
        fn timestamp_shift_preserves_intervals(y1 in 1000i64..2200, y2 in 1000i64..2200, delta in 0i64..200) {
            let sa: i64 = shift_timestamp_value(&format!("{y1:04}"), delta).unwrap().parse().unwrap();
            let sb: i64 = shift_timestamp_value(&format!("{y2:04}"), delta).unwrap().parse().unwrap();
            prop_assert_eq!(sb - sa, y2 - y1);
        }
    }
}
