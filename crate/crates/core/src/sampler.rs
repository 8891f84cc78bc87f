//! Universe sampling: uniformity-weighted frontier expansion over the source
//! graph, followed by k-core extraction and largest-connected-component
//! selection.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::kg::{EntityId, KnowledgeGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Seed entity set Q0.
    pub seeds: Vec<EntityId>,
    /// Number of frontier expansion steps T.
    pub iterations: u32,
    /// Uniformity factor in [0, 1]; the sampling exponent is 1 - uniformity.
    pub uniformity: f64,
    /// Core order for the k-core extraction.
    pub k: u32,
    /// Maximum facts sampled per frontier node per iteration.
    pub per_node_cap: u32,
    pub rng_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seeds: Vec::new(),
            iterations: 11,
            uniformity: 0.6,
            k: 19,
            per_node_cap: 32,
            rng_seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SampleError> {
        if self.seeds.is_empty() {
            return Err(SampleError::InvalidConfig("at least one seed is required".into()));
        }
        if self.iterations < 1 {
            return Err(SampleError::InvalidConfig("iterations must be >= 1".into()));
        }
        if self.k < 1 {
            return Err(SampleError::InvalidConfig("k must be >= 1".into()));
        }
        if self.per_node_cap < 1 {
            return Err(SampleError::InvalidConfig("per_node_cap must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.uniformity) {
            return Err(SampleError::InvalidConfig("uniformity must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("seed entity {0} is not in the graph")]
    UnknownSeed(EntityId),
    #[error("sampling produced an empty universe; lower k (was {k}) or raise iterations (was {t})")]
    EmptyUniverse { k: u32, t: u32 },
}

/// A sampled subgraph plus its labeling function and provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Universe {
    pub graph: KnowledgeGraph,
    /// Surface label per entity id; real labels for a freshly sampled
    /// universe, synthetic labels after perturbation.
    pub labeling: BTreeMap<EntityId, String>,
    /// Entities referenced by type chains but outside the sampled graph,
    /// kept so type descriptions resolve without the parent graph.
    #[serde(default)]
    pub type_annex: BTreeMap<EntityId, crate::kg::Entity>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub config: SamplerConfig,
    pub parent_fingerprint: String,
}

impl Universe {
    pub fn label(&self, id: &EntityId) -> &str {
        self.labeling.get(id).map(String::as_str).unwrap_or("")
    }

    /// Entities subject to renaming: named entities of the universe.
    pub fn named_ids(&self) -> BTreeSet<EntityId> {
        self.graph
            .entities
            .values()
            .filter(|e| e.is_named)
            .map(|e| e.id.clone())
            .collect()
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = self.graph.canonical_bytes();
        for (id, label) in &self.labeling {
            out.extend_from_slice(format!("{id}\t{label}\n").as_bytes());
        }
        for entity in self.type_annex.values() {
            out.extend_from_slice(
                serde_json::to_string(entity).expect("serialize").as_bytes(),
            );
            out.push(b'\n');
        }
        out
    }

    /// Type resolver covering the universe graph plus the type annex.
    pub fn type_resolver(&self) -> crate::kg::TypeResolver<'_> {
        crate::kg::TypeResolver::with_annex(&self.graph, &self.type_annex)
    }
}

/// Entities needed to resolve type descriptions of the sampled graph but
/// absent from it: the transitive closure over instance-of targets and named
/// entities mentioned inside type labels.
fn collect_type_annex(
    parent: &KnowledgeGraph,
    universe_graph: &KnowledgeGraph,
) -> BTreeMap<EntityId, crate::kg::Entity> {
    // Named labels of the parent graph, longest first, for occurrence scans.
    let mut named_labels: Vec<(&str, &EntityId)> = parent
        .entities
        .values()
        .filter(|e| e.is_named && !e.label.is_empty())
        .map(|e| (e.label.as_str(), &e.id))
        .collect();
    named_labels.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(b.1)));

    let mut annex: BTreeMap<EntityId, crate::kg::Entity> = BTreeMap::new();
    let mut frontier: Vec<EntityId> = universe_graph.entities.keys().cloned().collect();
    for _ in 0..=crate::kg::TYPE_RESOLUTION_DEPTH_CAP {
        let mut next = Vec::new();
        for id in &frontier {
            let entity = universe_graph
                .entities
                .get(id)
                .or_else(|| annex.get(id))
                .or_else(|| parent.entities.get(id));
            let Some(entity) = entity else { continue };
            let mut wanted: Vec<EntityId> = entity.type_ids.clone();
            for tid in &entity.type_ids {
                if let Some(type_entity) = parent.entities.get(tid) {
                    for (label, named_id) in &named_labels {
                        if crate::text::contains_word(&type_entity.label, label) {
                            wanted.push((*named_id).clone());
                        }
                    }
                }
            }
            for target in wanted {
                if !universe_graph.contains(&target) && !annex.contains_key(&target) {
                    if let Some(found) = parent.entities.get(&target) {
                        annex.insert(target.clone(), found.clone());
                        next.push(target);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    annex
}

/// P(r) = |group(r)|^alpha / sum_k |group(k)|^alpha with alpha = 1 - uniformity.
///
/// Empty groups are ignored; returns `None` when every group is empty (the
/// caller skips the node). Probabilities are normalized to sum to 1.
pub fn relation_distribution(
    group_sizes: &BTreeMap<String, usize>,
    uniformity: f64,
) -> Option<BTreeMap<String, f64>> {
    let alpha = 1.0 - uniformity;
    let weights: Vec<(&String, f64)> = group_sizes
        .iter()
        .filter(|(_, &n)| n > 0)
        .map(|(r, &n)| (r, (n as f64).powf(alpha)))
        .collect();
    if weights.is_empty() {
        return None;
    }
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    Some(weights.into_iter().map(|(r, w)| (r.clone(), w / total)).collect())
}

/// Per-node RNG stream derived from (rng_seed, node id, iteration), so the
/// expansion order of nodes within an iteration cannot change the outcome.
fn node_rng(rng_seed: u64, node: &EntityId, iteration: u32) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(rng_seed.to_le_bytes());
    hasher.update(node.as_str().as_bytes());
    hasher.update(iteration.to_le_bytes());
    let digest = hasher.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(seed)
}

/// Draw a relation id from the distribution, then a fact uniformly within
/// that relation group, without replacement across the node's draws.
fn draw_fact(
    groups: &mut BTreeMap<String, Vec<usize>>,
    uniformity: f64,
    rng: &mut ChaCha8Rng,
) -> Option<usize> {
    let sizes: BTreeMap<String, usize> =
        groups.iter().map(|(r, v)| (r.clone(), v.len())).collect();
    let dist = relation_distribution(&sizes, uniformity)?;
    let roll: f64 = rng.gen();
    let mut cumulative = 0.0;
    let mut chosen: Option<&String> = None;
    for (relation, p) in &dist {
        cumulative += p;
        if roll < cumulative {
            chosen = Some(relation);
            break;
        }
    }
    // Floating-point slack can leave the roll past the last band.
    let relation = chosen.or_else(|| dist.keys().next_back())?.clone();
    let bucket = groups.get_mut(&relation)?;
    let at = rng.gen_range(0..bucket.len());
    let fact = bucket.swap_remove(at);
    if bucket.is_empty() {
        groups.remove(&relation);
    }
    Some(fact)
}

/// Run T iterations of frontier expansion from the seed set.
///
/// Each frontier node samples up to `per_node_cap` incident facts that are
/// not yet part of the subgraph (relation first, then a uniform fact within
/// the relation group, without replacement). Entities reached for the first
/// time form the next frontier; a node is expanded at most once.
pub fn expand_frontier(
    kg: &KnowledgeGraph,
    config: &SamplerConfig,
) -> Result<KnowledgeGraph, SampleError> {
    config.validate()?;
    for seed in &config.seeds {
        if !kg.contains(seed) {
            return Err(SampleError::UnknownSeed(seed.clone()));
        }
    }

    // Incident entity-to-entity facts per endpoint.
    let mut incident: BTreeMap<&EntityId, Vec<usize>> = BTreeMap::new();
    for (idx, fact) in kg.facts.iter().enumerate() {
        if let Some(object) = fact.object.as_entity() {
            if object == &fact.subject {
                continue;
            }
            incident.entry(&fact.subject).or_default().push(idx);
            incident.entry(object).or_default().push(idx);
        }
    }

    let mut visited: BTreeSet<EntityId> = config.seeds.iter().cloned().collect();
    let mut frontier: Vec<EntityId> = visited.iter().cloned().collect();
    let mut sampled: BTreeSet<usize> = BTreeSet::new();

    for iteration in 1..=config.iterations {
        let mut next_frontier: Vec<EntityId> = Vec::new();
        for node in &frontier {
            let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
            for &idx in incident.get(node).into_iter().flatten() {
                if !sampled.contains(&idx) {
                    groups.entry(kg.facts[idx].relation.id.clone()).or_default().push(idx);
                }
            }
            let mut rng = node_rng(config.rng_seed, node, iteration);
            for _ in 0..config.per_node_cap {
                let Some(idx) = draw_fact(&mut groups, config.uniformity, &mut rng) else {
                    break;
                };
                sampled.insert(idx);
                let fact = &kg.facts[idx];
                let other = if &fact.subject == node {
                    fact.object.as_entity().expect("entity fact")
                } else {
                    &fact.subject
                };
                if visited.insert(other.clone()) {
                    next_frontier.push(other.clone());
                }
            }
        }
        next_frontier.sort();
        frontier = next_frontier;
        if frontier.is_empty() {
            break;
        }
    }

    // Keep sampled facts plus literal facts attached to visited subjects.
    let entities = visited;
    let facts: Vec<_> = kg
        .facts
        .iter()
        .enumerate()
        .filter(|(idx, fact)| {
            sampled.contains(idx)
                || (fact.object.as_entity().is_none() && entities.contains(&fact.subject))
        })
        .map(|(_, f)| f.clone())
        .collect();
    let mut sub = kg.induced(&entities);
    sub.facts = facts;
    Ok(sub)
}

/// Iteratively peel nodes of degree < k (distinct undirected neighbors over
/// entity facts). Returns the unique maximal subgraph, possibly empty.
pub fn k_core(graph: &KnowledgeGraph, k: u32) -> KnowledgeGraph {
    let mut adj = graph.undirected_neighbors();
    let mut queue: VecDeque<EntityId> = adj
        .iter()
        .filter(|(_, n)| (n.len() as u32) < k)
        .map(|(id, _)| id.clone())
        .collect();
    let mut removed: BTreeSet<EntityId> = BTreeSet::new();
    while let Some(id) = queue.pop_front() {
        if !removed.insert(id.clone()) {
            continue;
        }
        let neighbors = adj.remove(&id).unwrap_or_default();
        for n in neighbors {
            if let Some(set) = adj.get_mut(&n) {
                set.remove(&id);
                if (set.len() as u32) < k {
                    queue.push_back(n);
                }
            }
        }
    }
    let keep: BTreeSet<EntityId> = adj.keys().cloned().collect();
    graph.induced(&keep)
}

/// Largest weakly-connected component by node count; ties broken by the
/// smallest lexicographic minimum entity id.
pub fn largest_connected_component(graph: &KnowledgeGraph) -> KnowledgeGraph {
    let adj = graph.undirected_neighbors();
    let mut seen: BTreeSet<EntityId> = BTreeSet::new();
    let mut best: Option<BTreeSet<EntityId>> = None;
    for start in graph.entities.keys() {
        if seen.contains(start) {
            continue;
        }
        let mut component: BTreeSet<EntityId> = BTreeSet::new();
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(id) = queue.pop_front() {
            if !component.insert(id.clone()) {
                continue;
            }
            seen.insert(id.clone());
            for n in adj.get(&id).into_iter().flatten() {
                if !component.contains(n) {
                    queue.push_back(n.clone());
                }
            }
        }
        let better = match &best {
            None => true,
            // BTreeSet iteration starts at the minimum id, so `first`
            // gives the lexicographic minimum directly.
            Some(current) => component.len() > current.len()
                || (component.len() == current.len() && component.first() < current.first()),
        };
        if better {
            best = Some(component);
        }
    }
    match best {
        Some(keep) => graph.induced(&keep),
        None => graph.induced(&BTreeSet::new()),
    }
}

/// Expansion, k-core, and LCC composed into a labeled universe.
pub fn sample_universe(
    kg: &KnowledgeGraph,
    config: &SamplerConfig,
) -> Result<Universe, SampleError> {
    let expanded = expand_frontier(kg, config)?;
    let cored = k_core(&expanded, config.k);
    let component = largest_connected_component(&cored);
    if component.entities.is_empty() {
        return Err(SampleError::EmptyUniverse { k: config.k, t: config.iterations });
    }
    let labeling = component
        .entities
        .values()
        .map(|e| (e.id.clone(), e.label.clone()))
        .collect();
    let type_annex = collect_type_annex(kg, &component);
    Ok(Universe {
        graph: component,
        labeling,
        type_annex,
        provenance: Provenance {
            config: config.clone(),
            parent_fingerprint: kg.fingerprint(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{Entity, Fact, FactObject, Relation};
    use proptest::prelude::*;

    fn entity(id: &str, label: &str) -> Entity {
        Entity {
            id: EntityId::from(id),
            label: label.to_string(),
            type_ids: vec![],
            aliases: vec![],
            flags: Default::default(),
            is_named: true,
        }
    }

    fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> KnowledgeGraph {
        let mut kg = KnowledgeGraph::default();
        for i in 0..n {
            let id = format!("Q{i:03}");
            kg.entities.insert(EntityId::new(id.clone()), entity(&id, &format!("Node {i}")));
        }
        let mut facts: BTreeSet<Fact> = BTreeSet::new();
        for &(a, b) in edges {
            facts.insert(Fact {
                subject: EntityId::new(format!("Q{a:03}")),
                relation: Relation::new("P1", "linked to"),
                object: FactObject::Entity(EntityId::new(format!("Q{b:03}"))),
                qualifiers: vec![],
            });
        }
        kg.facts = facts.into_iter().collect();
        kg
    }

    fn config(seeds: &[&str], t: u32, k: u32, cap: u32, seed: u64) -> SamplerConfig {
        SamplerConfig {
            seeds: seeds.iter().map(|s| EntityId::from(*s)).collect(),
            iterations: t,
            uniformity: 0.6,
            k,
            per_node_cap: cap,
            rng_seed: seed,
        }
    }

    #[test]
    fn uniform_limit() {
        let sizes = BTreeMap::from([("r1".to_string(), 4), ("r2".to_string(), 1)]);
        let dist = relation_distribution(&sizes, 1.0).unwrap();
        assert_eq!(dist["r1"], 0.5);
        assert_eq!(dist["r2"], 0.5);
    }

    #[test]
    fn frequency_proportional_limit() {
        let sizes = BTreeMap::from([("r1".to_string(), 4), ("r2".to_string(), 1)]);
        let dist = relation_distribution(&sizes, 0.0).unwrap();
        assert!((dist["r1"] - 0.8).abs() < 1e-15);
        assert!((dist["r2"] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn intermediate_uniformity() {
        // 4^0.4 / (4^0.4 + 1), frozen from a 60-digit evaluation.
        let sizes = BTreeMap::from([("r1".to_string(), 4), ("r2".to_string(), 1)]);
        let dist = relation_distribution(&sizes, 0.6).unwrap();
        assert!((dist["r1"] - 0.635_183_105_687_455_8).abs() < 1e-12);
        assert!((dist["r2"] - 0.364_816_894_312_544_2).abs() < 1e-12);
    }

    #[test]
    fn empty_groups_signal_empty_frontier() {
        let sizes = BTreeMap::from([("r1".to_string(), 0)]);
        assert!(relation_distribution(&sizes, 0.5).is_none());
        assert!(relation_distribution(&BTreeMap::new(), 0.5).is_none());
    }

    #[test]
    fn star_graph_full_expansion() {
        let edges: Vec<(usize, usize)> = (1..=6).map(|i| (0, i)).collect();
        let kg = graph_from_edges(7, &edges);
        let sub = expand_frontier(&kg, &config(&["Q000"], 1, 1, 100, 7)).unwrap();
        assert_eq!(sub.entities.len(), 7);
        assert_eq!(sub.facts.len(), 6);
    }

    #[test]
    fn expansion_is_deterministic() {
        let edges: Vec<(usize, usize)> =
            (0..30).flat_map(|i| [(i, (i + 1) % 30), (i, (i + 7) % 30)]).collect();
        let kg = graph_from_edges(30, &edges);
        let cfg = config(&["Q000"], 3, 1, 2, 42);
        let a = expand_frontier(&kg, &cfg).unwrap();
        let b = expand_frontier(&kg, &cfg).unwrap();
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
    }

    #[test]
    fn path_expansion_reaches_exactly_three_nodes() {
        // Path Q000-Q001-Q002-Q003-Q004, seed at one end, T=2, cap=1: each
        // step has exactly one unsampled incident fact, so the walk is forced.
        let kg = graph_from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let sub = expand_frontier(&kg, &config(&["Q000"], 2, 1, 1, 1)).unwrap();
        assert_eq!(sub.entities.len(), 3);
        assert!(sub.contains(&EntityId::from("Q000")));
        assert!(sub.contains(&EntityId::from("Q001")));
        assert!(sub.contains(&EntityId::from("Q002")));
    }

    #[test]
    fn unknown_seed_is_configuration_error() {
        let kg = graph_from_edges(2, &[(0, 1)]);
        let err = expand_frontier(&kg, &config(&["Q999"], 1, 1, 1, 1)).unwrap_err();
        match err {
            SampleError::UnknownSeed(id) => assert_eq!(id.as_str(), "Q999"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn k_core_peels_pendant() {
        // Triangle 0-1-2 plus pendant 3.
        let kg = graph_from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let core = k_core(&kg, 2);
        assert_eq!(core.entities.len(), 3);
        assert!(!core.contains(&EntityId::from("Q003")));
    }

    #[test]
    fn k_core_can_be_empty() {
        let kg = graph_from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        let core = k_core(&kg, 4);
        assert!(core.entities.is_empty());
    }

    #[test]
    fn petersen_graph_is_its_own_3_core() {
        let outer: Vec<(usize, usize)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let spokes: Vec<(usize, usize)> = (0..5).map(|i| (i, i + 5)).collect();
        let inner: Vec<(usize, usize)> = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5)).collect();
        let edges: Vec<_> = outer.into_iter().chain(spokes).chain(inner).collect();
        let kg = graph_from_edges(10, &edges);
        let core = k_core(&kg, 3);
        assert_eq!(core.entities.len(), 10);
    }

    #[test]
    fn lcc_prefers_larger_component() {
        let kg = graph_from_edges(8, &[(0, 1), (1, 2), (3, 4), (4, 5), (5, 6), (6, 7)]);
        let lcc = largest_connected_component(&kg);
        assert_eq!(lcc.entities.len(), 5);
        assert!(lcc.contains(&EntityId::from("Q003")));
    }

    #[test]
    fn lcc_tie_breaks_on_minimum_id() {
        let kg = graph_from_edges(6, &[(0, 2), (2, 4), (1, 3), (3, 5)]);
        let lcc = largest_connected_component(&kg);
        assert_eq!(lcc.entities.len(), 3);
        assert!(lcc.contains(&EntityId::from("Q000")));
    }

    #[test]
    fn one_core_of_connected_expansion_is_identity() {
        let kg = graph_from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        let cfg = config(&["Q000"], 4, 1, 10, 3);
        let expanded = expand_frontier(&kg, &cfg).unwrap();
        let universe = sample_universe(&kg, &cfg).unwrap();
        assert_eq!(universe.graph.entities.len(), expanded.entities.len());
    }

    #[test]
    fn paper_scale_configuration_is_valid() {
        let cfg = SamplerConfig {
            seeds: vec![EntityId::from("Q1")],
            iterations: 11,
            uniformity: 0.6,
            k: 19,
            per_node_cap: 32,
            rng_seed: 0,
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn dense_fixture_matches_peel_then_lcc_oracle() {
        // 30-node graph: two dense blobs joined by one bridge edge.
        let mut edges = Vec::new();
        for i in 0..15usize {
            for j in (i + 1)..15 {
                if (i * 7 + j * 3) % 4 != 0 {
                    edges.push((i, j));
                }
            }
        }
        for i in 15..30usize {
            for j in (i + 1)..30 {
                if (i + j) % 3 != 0 {
                    edges.push((i, j));
                }
            }
        }
        edges.push((0, 15));
        let kg = graph_from_edges(30, &edges);
        let cfg = config(&["Q000"], 6, 5, 32, 9);
        let universe = sample_universe(&kg, &cfg).unwrap();

        // Independent oracle: naive repeated scan-peel, then component scan.
        let expanded = expand_frontier(&kg, &cfg).unwrap();
        let oracle_core = naive_peel(&expanded, 5);
        let oracle = largest_connected_component(&oracle_core);
        assert_eq!(universe.graph.canonical_bytes(), oracle.canonical_bytes());
        // Connectivity and min-degree over the output.
        let adj = universe.graph.undirected_neighbors();
        assert!(adj.values().all(|n| n.len() >= 5));
    }

    fn naive_peel(graph: &KnowledgeGraph, k: u32) -> KnowledgeGraph {
        let mut keep: BTreeSet<EntityId> = graph.entities.keys().cloned().collect();
        loop {
            let sub = graph.induced(&keep);
            let adj = sub.undirected_neighbors();
            let victims: Vec<EntityId> = adj
                .iter()
                .filter(|(_, n)| (n.len() as u32) < k)
                .map(|(id, _)| id.clone())
                .collect();
            if victims.is_empty() {
                return sub;
            }
            for v in victims {
                keep.remove(&v);
            }
        }
    }

    proptest! {
        #[test]
        fn k_core_is_monotone(edges in proptest::collection::vec((0usize..18, 0usize..18), 1..60), k in 1u32..5) {
            let kg = graph_from_edges(18, &edges);
            let bigger = k_core(&kg, k + 1);
            let smaller = k_core(&kg, k);
            for id in bigger.entities.keys() {
                prop_assert!(smaller.contains(id));
            }
        }

        #[test]
        fn distribution_sums_to_one(sizes in proptest::collection::btree_map("[a-z]{2}", 1usize..50, 1..8), uniformity in 0.0f64..=1.0) {
            let dist = relation_distribution(&sizes, uniformity).unwrap();
            let total: f64 = dist.values().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
