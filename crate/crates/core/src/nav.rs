//! Navigation task construction: the hyperlink document graph, expected
//! random-walk hitting times, and difficulty-bucketed source/target pairs.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::kg::EntityId;

#[derive(Debug, Error)]
pub enum NavError {
    #[error("target {target} is unreachable from {from}")]
    Unreachable { from: EntityId, target: EntityId },
    #[error("source and target must differ")]
    DegeneratePair,
    #[error("unknown page {0}")]
    UnknownPage(EntityId),
    #[error("hitting-time solve did not converge for target {0}")]
    NoConvergence(EntityId),
}

/// Directed hyperlink graph over retained pages. The structure is identical
/// for the RM and SM views because edges are id-level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocGraph {
    pub nodes: Vec<EntityId>,
    #[serde(skip)]
    index: BTreeMap<EntityId, usize>,
    /// Out-neighbors, deduplicated, self-loops dropped.
    pub out: Vec<Vec<usize>>,
    /// Undirected adjacency for the random-walk view.
    pub undirected: Vec<Vec<usize>>,
}

impl DocGraph {
    pub fn from_edges(nodes: Vec<EntityId>, edges: &[(EntityId, EntityId)]) -> Self {
        let index: BTreeMap<EntityId, usize> =
            nodes.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
        let n = nodes.len();
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut undirected: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (a, b) in edges {
            let (Some(&i), Some(&j)) = (index.get(a), index.get(b)) else { continue };
            if i == j {
                continue;
            }
            out[i].push(j);
        }
        for list in &mut out {
            list.sort_unstable();
            list.dedup();
        }
        for i in 0..n {
            for &j in &out[i] {
                undirected[i].push(j);
                undirected[j].push(i);
            }
        }
        for list in &mut undirected {
            list.sort_unstable();
            list.dedup();
        }
        DocGraph { nodes, index, out, undirected }
    }

    pub fn node_index(&self, id: &EntityId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Rebuild the lookup index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.nodes.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
    }

    /// Directed BFS shortest path length, if any.
    pub fn shortest_path_len(&self, source: usize, target: usize) -> Option<usize> {
        if source == target {
            return Some(0);
        }
        let mut dist = vec![usize::MAX; self.len()];
        dist[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.out[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    if v == target {
                        return Some(dist[v]);
                    }
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Whether the undirected view is one connected component.
    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.undirected[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.len()
    }
}

/// One edge per distinct (source page, referenced page) pair over retained
/// pages; self-loops dropped.
pub fn build_doc_graph(corpus: &Corpus) -> DocGraph {
    let nodes: Vec<EntityId> = corpus.retained_ids().into_iter().collect();
    let edges: Vec<(EntityId, EntityId)> = corpus.hyperlink_edges().into_iter().collect();
    DocGraph::from_edges(nodes, &edges)
}

// ---------------------------------------------------------------------------
// Hitting times
// ---------------------------------------------------------------------------

/// Residual tolerance of the hitting-time linear solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Expected hitting times h(u -> target) for every node, on the undirected
/// view: h(target) = 0 and h(u) = 1 + mean over neighbors of h. Solved as
/// the grounded-Laplacian system L_t h = d with conjugate gradients (Jacobi
/// preconditioned). Nodes in other components get infinity.
pub fn hitting_times_to_target(graph: &DocGraph, target: usize) -> Result<Vec<f64>, NavError> {
    let n = graph.len();
    // Restrict to the target's undirected component.
    let mut in_component = vec![false; n];
    in_component[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(u) = queue.pop_front() {
        for &v in &graph.undirected[u] {
            if !in_component[v] {
                in_component[v] = true;
                queue.push_back(v);
            }
        }
    }
    let unknowns: Vec<usize> =
        (0..n).filter(|&u| u != target && in_component[u]).collect();
    let mut slot = vec![usize::MAX; n];
    for (k, &u) in unknowns.iter().enumerate() {
        slot[u] = k;
    }
    let m = unknowns.len();
    let mut result = vec![f64::INFINITY; n];
    result[target] = 0.0;
    if m == 0 {
        return Ok(result);
    }

    let degree: Vec<f64> = unknowns.iter().map(|&u| graph.undirected[u].len() as f64).collect();
    let b: Vec<f64> = degree.clone();

    // y = L_t * x restricted to the unknown block.
    let apply = |x: &[f64], y: &mut [f64]| {
        for (k, &u) in unknowns.iter().enumerate() {
            let mut acc = degree[k] * x[k];
            for &v in &graph.undirected[u] {
                if slot[v] != usize::MAX {
                    acc -= x[slot[v]];
                }
            }
            y[k] = acc;
        }
    };

    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0f64; m];
    let mut r = b.clone();
    let mut z: Vec<f64> = r.iter().zip(&degree).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0f64; m];
    let max_iterations = 40 * m + 200;
    let mut converged = false;
    for _ in 0..max_iterations {
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= SOLVE_TOLERANCE * b_norm.max(1.0) {
            converged = true;
            break;
        }
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for k in 0..m {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        for k in 0..m {
            z[k] = r[k] / degree[k];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..m {
            p[k] = z[k] + beta * p[k];
        }
    }
    if !converged {
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm > 1e-6 * b_norm.max(1.0) {
            return Err(NavError::NoConvergence(graph.nodes[target].clone()));
        }
    }
    for (k, &u) in unknowns.iter().enumerate() {
        result[u] = x[k];
    }
    Ok(result)
}

/// Expected number of random-walk steps from `source` to `target` on the
/// undirected view of the graph.
pub fn expected_hitting_time(
    graph: &DocGraph,
    source: &EntityId,
    target: &EntityId,
) -> Result<f64, NavError> {
    if source == target {
        return Err(NavError::DegeneratePair);
    }
    let s = graph.node_index(source).ok_or_else(|| NavError::UnknownPage(source.clone()))?;
    let t = graph.node_index(target).ok_or_else(|| NavError::UnknownPage(target.clone()))?;
    let times = hitting_times_to_target(graph, t)?;
    if times[s].is_infinite() {
        return Err(NavError::Unreachable { from: source.clone(), target: target.clone() });
    }
    Ok(times[s])
}

/// Expected hitting time on the directed walk (uniform over out-links),
/// reported as a diagnostic. `None` when the walk reaches the target with
/// probability below one or the iteration does not settle.
pub fn directed_hitting_time(graph: &DocGraph, source: usize, target: usize) -> Option<f64> {
    let n = graph.len();
    // D = nodes that can reach the target in the directed graph.
    let mut reaches = vec![false; n];
    reaches[target] = true;
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, outs) in graph.out.iter().enumerate() {
        for &v in outs {
            incoming[v].push(u);
        }
    }
    let mut queue = VecDeque::from([target]);
    while let Some(u) = queue.pop_front() {
        for &v in &incoming[u] {
            if !reaches[v] {
                reaches[v] = true;
                queue.push_back(v);
            }
        }
    }
    if !reaches[source] {
        return None;
    }
    // The walk from `source` hits the target almost surely only if every
    // node reachable from `source` can still reach the target.
    let mut seen = vec![false; n];
    seen[source] = true;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        if !reaches[u] {
            return None;
        }
        if u == target {
            continue;
        }
        if graph.out[u].is_empty() {
            return None;
        }
        for &v in &graph.out[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    // Gauss-Seidel on h(u) = 1 + mean over out-neighbors.
    let mut h = vec![0.0f64; n];
    let sweeps = 20_000;
    for _ in 0..sweeps {
        let mut delta: f64 = 0.0;
        for u in 0..n {
            if u == target || !seen[u] {
                continue;
            }
            let mean: f64 =
                graph.out[u].iter().map(|&v| h[v]).sum::<f64>() / graph.out[u].len() as f64;
            let next = 1.0 + mean;
            delta = delta.max((next - h[u]).abs());
            h[u] = next;
        }
        if delta < 1e-9 {
            return Some(h[source]);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Task sampling
// ---------------------------------------------------------------------------

/// Difficulty buckets over expected random-walk distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bucket {
    D50To1k,
    D1kTo10k,
    D10kTo100k,
    D100kTo1m,
    D1mTo10m,
}

impl Bucket {
    pub const ALL: [Bucket; 5] = [
        Bucket::D50To1k,
        Bucket::D1kTo10k,
        Bucket::D10kTo100k,
        Bucket::D100kTo1m,
        Bucket::D1mTo10m,
    ];

    pub fn range(&self) -> (f64, f64) {
        match self {
            Bucket::D50To1k => (50.0, 1e3),
            Bucket::D1kTo10k => (1e3, 1e4),
            Bucket::D10kTo100k => (1e4, 1e5),
            Bucket::D100kTo1m => (1e5, 1e6),
            Bucket::D1mTo10m => (1e6, 1e7),
        }
    }

    /// Bucket containing the distance, if any; distances below 50 or at or
    /// above 1e7 are rejected.
    pub fn from_distance(distance: f64) -> Option<Bucket> {
        Bucket::ALL
            .into_iter()
            .find(|b| {
                let (lo, hi) = b.range();
                distance >= lo && distance < hi
            })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Bucket::D50To1k => "50-1K",
            Bucket::D1kTo10k => "1K-10K",
            Bucket::D10kTo100k => "10K-100K",
            Bucket::D100kTo1m => "100K-1M",
            Bucket::D1mTo10m => "1M-10M",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavTask {
    pub pair_id: String,
    pub source: EntityId,
    pub target: EntityId,
    pub expected_rw_distance: f64,
    pub bucket: Bucket,
    pub shortest_path_len: usize,
    pub diagnostics: NavDiagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavDiagnostics {
    /// Expected hitting time on the directed walk, when finite and settled.
    pub directed_rw_distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavShortfall {
    pub per_bucket: usize,
    pub produced: BTreeMap<String, usize>,
    pub attempts: usize,
}

/// Step cap of the navigation environment; emitted tasks stay solvable
/// within it.
pub const STEP_CAP: usize = 30;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NavSampleConfig {
    pub per_bucket: usize,
    pub rng_seed: u64,
    /// Rejection-sampling attempt budget multiplier (per bucket).
    pub attempt_factor: usize,
}

impl Default for NavSampleConfig {
    fn default() -> Self {
        NavSampleConfig { per_bucket: 200, rng_seed: 0, attempt_factor: 200 }
    }
}

/// Rejection-sample navigation pairs into the difficulty buckets.
///
/// Targets are drawn in seeded random order; one linear solve per target
/// prices every source at once. A candidate pair is kept when its distance
/// lands in an unfilled bucket, the target is reachable in the directed
/// graph, and the shortest path fits inside the step cap.
pub fn sample_nav_pairs(
    graph: &DocGraph,
    config: &NavSampleConfig,
) -> Result<(Vec<NavTask>, NavShortfall), NavError> {
    let n = graph.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut tasks: Vec<NavTask> = Vec::new();
    let mut filled: BTreeMap<Bucket, usize> = Bucket::ALL.iter().map(|b| (*b, 0)).collect();
    let budget = config.attempt_factor * config.per_bucket * Bucket::ALL.len();
    let mut attempts = 0usize;

    let mut target_order: Vec<usize> = (0..n).collect();
    target_order.shuffle(&mut rng);

    'targets: for &target in &target_order {
        if filled.values().all(|&c| c >= config.per_bucket) {
            break;
        }
        let times = hitting_times_to_target(graph, target)?;
        let mut source_order: Vec<usize> = (0..n).filter(|&s| s != target).collect();
        source_order.shuffle(&mut rng);
        for source in source_order {
            if attempts >= budget {
                break 'targets;
            }
            attempts += 1;
            let distance = times[source];
            if !distance.is_finite() {
                continue;
            }
            let Some(bucket) = Bucket::from_distance(distance) else { continue };
            if filled[&bucket] >= config.per_bucket {
                continue;
            }
            let Some(path_len) = graph.shortest_path_len(source, target) else { continue };
            if path_len == 0 || path_len > STEP_CAP {
                continue;
            }
            let task = NavTask {
                pair_id: format!("nav-{:05}", tasks.len()),
                source: graph.nodes[source].clone(),
                target: graph.nodes[target].clone(),
                expected_rw_distance: distance,
                bucket,
                shortest_path_len: path_len,
                diagnostics: NavDiagnostics {
                    directed_rw_distance: directed_hitting_time(graph, source, target),
                },
            };
            tasks.push(task);
            *filled.get_mut(&bucket).expect("bucket") += 1;
            if filled.values().all(|&c| c >= config.per_bucket) {
                break 'targets;
            }
        }
    }

    let produced =
        filled.iter().map(|(b, c)| (b.label().to_string(), *c)).collect();
    Ok((tasks, NavShortfall { per_bucket: config.per_bucket, produced, attempts }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn graph(n: usize, edges: &[(usize, usize)], directed: bool) -> DocGraph {
        let nodes: Vec<EntityId> = (0..n).map(|i| EntityId::new(format!("Q{i:03}"))).collect();
        let mut pairs: Vec<(EntityId, EntityId)> = Vec::new();
        for &(a, b) in edges {
            pairs.push((nodes[a].clone(), nodes[b].clone()));
            if !directed {
                pairs.push((nodes[b].clone(), nodes[a].clone()));
            }
        }
        DocGraph::from_edges(nodes, &pairs)
    }

    #[test]
    fn single_edge_hits_in_one_step() {
        let g = graph(2, &[(0, 1)], false);
        let h = expected_hitting_time(&g, &EntityId::from("Q000"), &EntityId::from("Q001"))
            .unwrap();
        assert!((h - 1.0).abs() < 1e-8);
    }

    #[test]
    fn path_of_three_hits_in_four() {
        let g = graph(3, &[(0, 1), (1, 2)], false);
        let h = expected_hitting_time(&g, &EntityId::from("Q000"), &EntityId::from("Q002"))
            .unwrap();
        assert!((h - 4.0).abs() < 1e-8, "got {h}");
    }

    #[test]
    fn triangle_adjacent_hits_in_two() {
        let g = graph(3, &[(0, 1), (1, 2), (2, 0)], false);
        let h = expected_hitting_time(&g, &EntityId::from("Q000"), &EntityId::from("Q001"))
            .unwrap();
        assert!((h - 2.0).abs() < 1e-8, "got {h}");
    }

    #[test]
    fn unreachable_pair_signals_infinite_distance() {
        let g = graph(4, &[(0, 1), (2, 3)], false);
        let err = expected_hitting_time(&g, &EntityId::from("Q000"), &EntityId::from("Q003"))
            .unwrap_err();
        assert!(matches!(err, NavError::Unreachable { .. }));
    }

    /// Monte Carlo oracle: mean steps of simulated uniform walks.
    pub fn monte_carlo_hitting(
        graph: &DocGraph,
        source: usize,
        target: usize,
        walks: usize,
        seed: u64,
    ) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut total_steps = 0u64;
        for _ in 0..walks {
            let mut at = source;
            let mut steps = 0u64;
            while at != target {
                let neighbors = &graph.undirected[at];
                at = neighbors[rng.gen_range(0..neighbors.len())];
                steps += 1;
            }
            total_steps += steps;
        }
        total_steps as f64 / walks as f64
    }

    #[test]
    fn solver_matches_monte_carlo_on_random_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 12;
        let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (i, rng.gen_range(0..i))).collect();
        for _ in 0..8 {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b {
                edges.push((a, b));
            }
        }
        let g = graph(n, &edges, false);
        let exact = hitting_times_to_target(&g, 0).unwrap();
        let mc = monte_carlo_hitting(&g, 5, 0, 40_000, 11);
        let rel = (exact[5] - mc).abs() / exact[5];
        assert!(rel < 0.02, "exact {} vs mc {}", exact[5], mc);
    }

    #[test]
    fn directed_diagnostic_handles_sinks() {
        // 0 -> 1 -> 2, with 2 a sink; from 0 to 2 the walk is forced: h = 2.
        let g = graph(3, &[(0, 1), (1, 2)], true);
        let h = directed_hitting_time(&g, 0, 2).unwrap();
        assert!((h - 2.0).abs() < 1e-6);
        // Walking to 1 from 0 is one forced step.
        assert!((directed_hitting_time(&g, 0, 1).unwrap() - 1.0).abs() < 1e-6);
        // From 0 to a node with an escaping sink is not almost-sure.
        let g2 = graph(4, &[(0, 1), (0, 3), (1, 2)], true);
        assert!(directed_hitting_time(&g2, 0, 2).is_none());
    }

    #[test]
    fn bucket_ranges() {
        assert_eq!(Bucket::from_distance(512.0), Some(Bucket::D50To1k));
        assert_eq!(Bucket::from_distance(49.0), None);
        assert_eq!(Bucket::from_distance(50.0), Some(Bucket::D50To1k));
        assert_eq!(Bucket::from_distance(5e6), Some(Bucket::D1mTo10m));
        assert_eq!(Bucket::from_distance(1e7), None);
    }

    #[test]
    fn paper_scale_config_is_representable() {
        let config = NavSampleConfig { per_bucket: 200, rng_seed: 0, attempt_factor: 200 };
        assert_eq!(config.per_bucket * Bucket::ALL.len(), 1000);
    }

    #[test]
    fn sampled_tasks_revalidate() {
        // Two dense blobs joined by a single bridge: large hitting times
        // between the blobs, small within.
        let mut edges = Vec::new();
        for i in 0..10usize {
            for j in (i + 1)..10 {
                edges.push((i, j));
            }
        }
        for i in 10..20usize {
            for j in (i + 1)..20 {
                edges.push((i, j));
            }
        }
        edges.push((0, 10));
        let g = graph(20, &edges, false);
        let (tasks, shortfall) = sample_nav_pairs(
            &g,
            &NavSampleConfig { per_bucket: 3, rng_seed: 7, attempt_factor: 50 },
        )
        .unwrap();
        assert!(!tasks.is_empty());
        assert!(shortfall.attempts > 0);
        for task in &tasks {
            let recomputed =
                expected_hitting_time(&g, &task.source, &task.target).unwrap();
            assert!((recomputed - task.expected_rw_distance).abs() < 1e-6);
            assert_eq!(Bucket::from_distance(recomputed), Some(task.bucket));
            assert!(task.shortest_path_len >= 1 && task.shortest_path_len <= STEP_CAP);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let edges: Vec<(usize, usize)> = (0..15).map(|i| (i, (i + 1) % 15)).collect();
        let g = graph(15, &edges, false);
        let config = NavSampleConfig { per_bucket: 2, rng_seed: 3, attempt_factor: 20 };
        let (a, _) = sample_nav_pairs(&g, &config).unwrap();
        let (b, _) = sample_nav_pairs(&g, &config).unwrap();
        let ser =
            |tasks: &Vec<NavTask>| serde_json::to_string(tasks).expect("serialize tasks");
        assert_eq!(ser(&a), ser(&b));
    }
}
