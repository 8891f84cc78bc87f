//! Interactive page-navigation environment: an episode state machine with
//! click and backtrack tools, two observation modes, and a step cap.

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Variant};
use crate::kg::EntityId;
use crate::nav::{DocGraph, NavTask, STEP_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    LinksOnly,
    ContentLinks,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "links_only" => Ok(Mode::LinksOnly),
            "content_links" => Ok(Mode::ContentLinks),
            other => Err(format!("unknown mode {other}; expected links_only or content_links")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::LinksOnly => f.write_str("links_only"),
            Mode::ContentLinks => f.write_str("content_links"),
        }
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("unknown page {0}")]
    UnknownPage(EntityId),
    #[error("episode is already terminal")]
    EpisodeOver,
    #[error("source equals target")]
    DegenerateTask,
}

/// One corpus variant flattened for serving: titles, texts, and out-links.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct PageStore {
    pub variant: Variant,
    pub titles: BTreeMap<EntityId, String>,
    pub texts: BTreeMap<EntityId, String>,
    /// Outgoing links per page: (target page, display text), deduplicated by
    /// target, restricted to pages present in the store.
    pub links: BTreeMap<EntityId, Vec<(EntityId, String)>>,
}

impl PageStore {
    pub fn from_corpus(corpus: &Corpus, variant: Variant) -> Self {
        let retained = corpus.retained_ids();
        let mut store = PageStore { variant, ..Default::default() };
        for id in &retained {
            let page = corpus.page_view(id, variant).expect("retained page view");
            store.titles.insert(id.clone(), page.title.clone());
            store.texts.insert(id.clone(), page.text.clone());
            let mut seen = BTreeMap::new();
            for r in &page.refs {
                if r.entity != *id && retained.contains(&r.entity) {
                    seen.entry(r.entity.clone()).or_insert_with(|| r.display.clone());
                }
            }
            store.links.insert(id.clone(), seen.into_iter().collect());
        }
        store
    }

    pub fn doc_graph(&self) -> DocGraph {
        let nodes: Vec<EntityId> = self.titles.keys().cloned().collect();
        let edges: Vec<(EntityId, EntityId)> = self
            .links
            .iter()
            .flat_map(|(from, outs)| outs.iter().map(move |(to, _)| (from.clone(), to.clone())))
            .collect();
        DocGraph::from_edges(nodes, &edges)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observation {
    pub page: EntityId,
    pub title: String,
    pub links: Vec<(EntityId, String)>,
    /// Full page text, present only in content mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<String>,
    pub steps_remaining: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum EpisodeStatus {
    Ongoing,
    Success,
    Failure { reason: FailureReason },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    StepCap,
    AgentError,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Episode {
    pub task: NavTask,
    pub variant: Variant,
    pub mode: Mode,
    pub current: EntityId,
    /// Every page visited, in order, never truncated.
    pub history: Vec<EntityId>,
    pub steps_used: usize,
    pub status: EpisodeStatus,
}

/// Result of one tool call: the new observation, or an invalid-action notice
/// (which still consumes a step and leaves the position unchanged).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum ActionOutcome {
    Observation(Observation),
    Invalid { message: String, observation: Observation },
}

impl ActionOutcome {
    pub fn observation(&self) -> &Observation {
        match self {
            ActionOutcome::Observation(obs) => obs,
            ActionOutcome::Invalid { observation, .. } => observation,
        }
    }

    pub fn is_valid(&self) -> bool {
        matches!(self, ActionOutcome::Observation(_))
    }
}

pub struct Env<'a> {
    pub store: &'a PageStore,
    pub step_cap: usize,
}

impl<'a> Env<'a> {
    pub fn new(store: &'a PageStore) -> Self {
        Env { store, step_cap: STEP_CAP }
    }

    fn observe(&self, episode: &Episode) -> Observation {
        let page = episode.current.clone();
        let title = self.store.titles.get(&page).cloned().unwrap_or_default();
        let links = self.store.links.get(&page).cloned().unwrap_or_default();
        let content = match episode.mode {
            Mode::LinksOnly => None,
            Mode::ContentLinks => self.store.texts.get(&page).cloned(),
        };
        Observation {
            page,
            title,
            links,
            content,
            steps_remaining: self.step_cap.saturating_sub(episode.steps_used),
        }
    }

    pub fn start_episode(
        &self,
        task: &NavTask,
        mode: Mode,
    ) -> Result<(Episode, Observation), EnvError> {
        if task.source == task.target {
            return Err(EnvError::DegenerateTask);
        }
        for page in [&task.source, &task.target] {
            if !self.store.titles.contains_key(page) {
                return Err(EnvError::UnknownPage(page.clone()));
            }
        }
        let episode = Episode {
            task: task.clone(),
            variant: self.store.variant,
            mode,
            current: task.source.clone(),
            history: vec![task.source.clone()],
            steps_used: 0,
            status: EpisodeStatus::Ongoing,
        };
        let obs = self.observe(&episode);
        Ok((episode, obs))
    }

    /// Spend one step and settle the terminal state afterwards.
    fn charge_step(&self, episode: &mut Episode) {
        episode.steps_used += 1;
        if episode.current == episode.task.target {
            episode.status = EpisodeStatus::Success;
        } else if episode.steps_used >= self.step_cap {
            episode.status = EpisodeStatus::Failure { reason: FailureReason::StepCap };
        }
    }

    /// Follow an out-link of the current page. Invalid targets consume the
    /// step without moving.
    pub fn click_link(
        &self,
        episode: &mut Episode,
        page: &EntityId,
    ) -> Result<ActionOutcome, EnvError> {
        if episode.status != EpisodeStatus::Ongoing {
            return Err(EnvError::EpisodeOver);
        }
        let is_link = self
            .store
            .links
            .get(&episode.current)
            .map_or(false, |links| links.iter().any(|(id, _)| id == page));
        if !is_link {
            self.charge_step(episode);
            return Ok(ActionOutcome::Invalid {
                message: format!("{page} is not a link on the current page"),
                observation: self.observe(episode),
            });
        }
        episode.current = page.clone();
        episode.history.push(page.clone());
        self.charge_step(episode);
        Ok(ActionOutcome::Observation(self.observe(episode)))
    }

    /// Return to a previously visited page. Unvisited targets consume the
    /// step without moving.
    pub fn backtrack(
        &self,
        episode: &mut Episode,
        page: &EntityId,
    ) -> Result<ActionOutcome, EnvError> {
        if episode.status != EpisodeStatus::Ongoing {
            return Err(EnvError::EpisodeOver);
        }
        if !episode.history.contains(page) {
            self.charge_step(episode);
            return Ok(ActionOutcome::Invalid {
                message: format!("{page} is not in the navigation history"),
                observation: self.observe(episode),
            });
        }
        episode.current = page.clone();
        episode.history.push(page.clone());
        self.charge_step(episode);
        Ok(ActionOutcome::Observation(self.observe(episode)))
    }
}

// ---------------------------------------------------------------------------
// Agent harness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "tool", rename_all = "snake_case")]
pub enum AgentAction {
    ClickLink { page: EntityId },
    Backtrack { page: EntityId },
}

#[derive(Debug, Clone)]
pub struct AgentDecision {
    pub action: AgentAction,
    pub reasoning: String,
}

pub trait Agent {
    fn name(&self) -> &str;
    /// Reset per-episode scratch state.
    fn reset(&mut self, task: &NavTask);
    fn decide(&mut self, observation: &Observation) -> Result<AgentDecision, String>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservationDigest {
    pub page: EntityId,
    pub title: String,
    pub links: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscriptStep {
    pub step: usize,
    pub observation: ObservationDigest,
    pub action: AgentAction,
    pub valid: bool,
    pub agent_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TranscriptStatus {
    Success,
    StepCap,
    AgentError,
}

/// Environment policy header recorded with every transcript.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicyHeader {
    pub step_cap: usize,
    pub invalid_action_costs_step: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transcript {
    pub pair_id: String,
    pub variant: Variant,
    pub mode: Mode,
    pub agent: String,
    pub source: EntityId,
    pub target: EntityId,
    pub target_title: String,
    pub policy: PolicyHeader,
    pub steps: Vec<TranscriptStep>,
    pub status: TranscriptStatus,
    pub steps_used: usize,
}

/// Drive every task to a terminal state and emit one transcript each.
pub fn run_agent(
    store: &PageStore,
    tasks: &[NavTask],
    agent: &mut dyn Agent,
    mode: Mode,
) -> Result<Vec<Transcript>, EnvError> {
    let env = Env::new(store);
    let mut transcripts = Vec::new();
    for task in tasks {
        let (mut episode, mut observation) = env.start_episode(task, mode)?;
        agent.reset(task);
        let mut steps = Vec::new();
        let status;
        loop {
            match episode.status {
                EpisodeStatus::Success => {
                    status = TranscriptStatus::Success;
                    break;
                }
                EpisodeStatus::Failure { .. } => {
                    status = TranscriptStatus::StepCap;
                    break;
                }
                EpisodeStatus::Ongoing => {}
            }
            let digest = ObservationDigest {
                page: observation.page.clone(),
                title: observation.title.clone(),
                links: observation.links.len(),
            };
            match agent.decide(&observation) {
                Ok(decision) => {
                    let outcome = match &decision.action {
                        AgentAction::ClickLink { page } => env.click_link(&mut episode, page)?,
                        AgentAction::Backtrack { page } => env.backtrack(&mut episode, page)?,
                    };
                    steps.push(TranscriptStep {
                        step: episode.steps_used,
                        observation: digest,
                        action: decision.action,
                        valid: outcome.is_valid(),
                        agent_text: decision.reasoning,
                    });
                    observation = outcome.observation().clone();
                }
                Err(message) => {
                    episode.status =
                        EpisodeStatus::Failure { reason: FailureReason::AgentError };
                    steps.push(TranscriptStep {
                        step: episode.steps_used,
                        observation: digest,
                        action: AgentAction::ClickLink { page: episode.current.clone() },
                        valid: false,
                        agent_text: format!("agent failure: {message}"),
                    });
                    status = TranscriptStatus::AgentError;
                    break;
                }
            }
        }
        let status = if matches!(episode.status, EpisodeStatus::Failure { reason: FailureReason::AgentError })
        {
            TranscriptStatus::AgentError
        } else {
            status
        };
        transcripts.push(Transcript {
            pair_id: task.pair_id.clone(),
            variant: store.variant,
            mode,
            agent: agent.name().to_string(),
            source: task.source.clone(),
            target: task.target.clone(),
            target_title: store.titles.get(&task.target).cloned().unwrap_or_default(),
            policy: PolicyHeader { step_cap: env.step_cap, invalid_action_costs_step: true },
            steps,
            status,
            steps_used: episode.steps_used,
        });
    }
    Ok(transcripts)
}

// ---------------------------------------------------------------------------
// Reference agents
// ---------------------------------------------------------------------------

/// Follows a breadth-first shortest path on the directed hyperlink graph.
pub struct BfsOracleAgent {
    graph: DocGraph,
    plan: VecDeque<EntityId>,
    target: Option<EntityId>,
}

impl BfsOracleAgent {
    pub fn new(graph: DocGraph) -> Self {
        BfsOracleAgent { graph, plan: VecDeque::new(), target: None }
    }

    fn plan_from(&self, source: &EntityId, target: &EntityId) -> VecDeque<EntityId> {
        let Some(s) = self.graph.node_index(source) else { return VecDeque::new() };
        let Some(t) = self.graph.node_index(target) else { return VecDeque::new() };
        let mut parent: Vec<Option<usize>> = vec![None; self.graph.len()];
        let mut seen = vec![false; self.graph.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for &v in &self.graph.out[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        if !seen[t] {
            return VecDeque::new();
        }
        let mut path = VecDeque::new();
        let mut at = t;
        while at != s {
            path.push_front(self.graph.nodes[at].clone());
            at = parent[at].expect("path parent");
        }
        path
    }
}

impl Agent for BfsOracleAgent {
    fn name(&self) -> &str {
        "bfs_oracle"
    }

    fn reset(&mut self, task: &NavTask) {
        self.target = Some(task.target.clone());
        self.plan = self.plan_from(&task.source, &task.target);
    }

    fn decide(&mut self, observation: &Observation) -> Result<AgentDecision, String> {
        let target = self.target.clone().ok_or("no active task")?;
        if self.plan.front().is_none()
            || !observation.links.iter().any(|(id, _)| self.plan.front() == Some(id))
        {
            // Replan from wherever we are.
            self.plan = self.plan_from(&observation.page, &target);
        }
        let next = self.plan.pop_front().ok_or("no path to target")?;
        Ok(AgentDecision {
            reasoning: format!("following the shortest path via {next}"),
            action: AgentAction::ClickLink { page: next },
        })
    }
}

/// Clicks a uniformly random link; backtracks to the start when stuck.
pub struct RandomAgent {
    seed: u64,
    rng: ChaCha8Rng,
    start: Option<EntityId>,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        RandomAgent { seed, rng: ChaCha8Rng::seed_from_u64(seed), start: None }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn reset(&mut self, task: &NavTask) {
        // Per-episode stream derived from (seed, pair id) so that episode
        // order does not change behavior.
        let digest = crate::fingerprint(format!("{}|{}", self.seed, task.pair_id).as_bytes());
        let stream = u64::from_str_radix(&digest[..16], 16).expect("hex digest");
        self.rng = ChaCha8Rng::seed_from_u64(stream);
        self.start = Some(task.source.clone());
    }

    fn decide(&mut self, observation: &Observation) -> Result<AgentDecision, String> {
        if observation.links.is_empty() {
            let back = self.start.clone().ok_or("no active task")?;
            return Ok(AgentDecision {
                reasoning: format!("dead end; backtracking to {}", back),
                action: AgentAction::Backtrack { page: back },
            });
        }
        let at = self.rng.gen_range(0..observation.links.len());
        let (page, display) = observation.links[at].clone();
        Ok(AgentDecision {
            reasoning: format!("trying the link {display}"),
            action: AgentAction::ClickLink { page },
        })
    }
}

/// Replays a fixed action list; used to exercise environment edges.
pub struct ScriptedAgent {
    pub actions: VecDeque<AgentAction>,
}

impl Agent for ScriptedAgent {
    fn name(&self) -> &str {
        "scripted"
    }

    fn reset(&mut self, _task: &NavTask) {}

    fn decide(&mut self, _observation: &Observation) -> Result<AgentDecision, String> {
        let action = self.actions.pop_front().ok_or("script exhausted")?;
        Ok(AgentDecision { reasoning: "scripted".to_string(), action })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nav::{Bucket, NavDiagnostics};

    fn store(pages: &[(&str, &[&str])]) -> PageStore {
        let mut s = PageStore { variant: Variant::Sm, ..Default::default() };
        for (id, links) in pages {
            let id_e = EntityId::from(*id);
            s.titles.insert(id_e.clone(), format!("Title {id}"));
            s.texts.insert(id_e.clone(), format!("Text of {id}"));
            s.links.insert(
                id_e,
                links
                    .iter()
                    .map(|l| (EntityId::from(*l), format!("Title {l}")))
                    .collect(),
            );
        }
        s
    }

    fn task(source: &str, target: &str) -> NavTask {
        NavTask {
            pair_id: format!("nav-{source}-{target}"),
            source: EntityId::from(source),
            target: EntityId::from(target),
            expected_rw_distance: 100.0,
            bucket: Bucket::D50To1k,
            shortest_path_len: 1,
            diagnostics: NavDiagnostics { directed_rw_distance: None },
        }
    }

    #[test]
    fn start_shows_source_links_and_mode_content() {
        let s = store(&[("A", &["B"]), ("B", &[])]);
        let env = Env::new(&s);
        let (_, obs) = env.start_episode(&task("A", "B"), Mode::LinksOnly).unwrap();
        assert_eq!(obs.page.as_str(), "A");
        assert_eq!(obs.links.len(), 1);
        assert!(obs.content.is_none());
        let (_, obs) = env.start_episode(&task("A", "B"), Mode::ContentLinks).unwrap();
        assert_eq!(obs.content.as_deref(), Some("Text of A"));
    }

    #[test]
    fn one_step_win() {
        let s = store(&[("A", &["B"]), ("B", &[])]);
        let env = Env::new(&s);
        let (mut ep, _) = env.start_episode(&task("A", "B"), Mode::LinksOnly).unwrap();
        let outcome = env.click_link(&mut ep, &EntityId::from("B")).unwrap();
        assert!(outcome.is_valid());
        assert_eq!(ep.status, EpisodeStatus::Success);
        assert_eq!(ep.steps_used, 1);
    }

    #[test]
    fn invalid_click_consumes_step_without_moving() {
        let s = store(&[("A", &["B"]), ("B", &[]), ("C", &[])]);
        let env = Env::new(&s);
        let (mut ep, _) = env.start_episode(&task("A", "B"), Mode::LinksOnly).unwrap();
        let outcome = env.click_link(&mut ep, &EntityId::from("C")).unwrap();
        assert!(!outcome.is_valid());
        assert_eq!(ep.current.as_str(), "A");
        assert_eq!(ep.steps_used, 1);
        assert_eq!(ep.status, EpisodeStatus::Ongoing);
    }

    #[test]
    fn step_cap_fails_episode() {
        let s = store(&[("A", &["B"]), ("B", &["A"]), ("Z", &[])]);
        let env = Env::new(&s);
        let (mut ep, _) = env.start_episode(&task("A", "Z"), Mode::LinksOnly).unwrap();
        // Z is not reachable; browse in circles for 30 steps.
        for i in 0..STEP_CAP {
            let page = if i % 2 == 0 { "B" } else { "A" };
            env.click_link(&mut ep, &EntityId::from(page)).unwrap();
        }
        assert_eq!(ep.steps_used, STEP_CAP);
        assert_eq!(ep.status, EpisodeStatus::Failure { reason: FailureReason::StepCap });
        assert!(env.click_link(&mut ep, &EntityId::from("B")).is_err());
    }

    #[test]
    fn backtrack_rules() {
        let s = store(&[("A", &["B", "C"]), ("B", &[]), ("C", &["D"]), ("D", &[])]);
        let env = Env::new(&s);
        let (mut ep, _) = env.start_episode(&task("A", "D"), Mode::LinksOnly).unwrap();
        env.click_link(&mut ep, &EntityId::from("B")).unwrap();
        // Unvisited page is an invalid backtrack.
        let bad = env.backtrack(&mut ep, &EntityId::from("C")).unwrap();
        assert!(!bad.is_valid());
        assert_eq!(ep.current.as_str(), "B");
        // Backtrack to the start, then take the other branch; history keeps
        // the full trajectory.
        let good = env.backtrack(&mut ep, &EntityId::from("A")).unwrap();
        assert!(good.is_valid());
        assert_eq!(ep.current.as_str(), "A");
        env.click_link(&mut ep, &EntityId::from("C")).unwrap();
        env.click_link(&mut ep, &EntityId::from("D")).unwrap();
        assert_eq!(ep.status, EpisodeStatus::Success);
        let visited: Vec<&str> = ep.history.iter().map(|e| e.as_str()).collect();
        assert_eq!(visited, vec!["A", "B", "A", "C", "D"]);
        assert_eq!(ep.steps_used, 5);
    }

    #[test]
    fn bfs_oracle_wins_within_cap() {
        // Chain A -> B -> C -> D plus noise links.
        let s = store(&[
            ("A", &["B", "C"]),
            ("B", &["C", "A"]),
            ("C", &["D", "A"]),
            ("D", &[]),
        ]);
        let graph = s.doc_graph();
        let mut agent = BfsOracleAgent::new(graph);
        let tasks = vec![task("A", "D"), task("B", "D")];
        let transcripts = run_agent(&s, &tasks, &mut agent, Mode::LinksOnly).unwrap();
        for t in &transcripts {
            assert_eq!(t.status, TranscriptStatus::Success);
            assert!(t.steps_used <= STEP_CAP);
            // Steps are recorded in order; one record per consumed step.
            let recorded: Vec<usize> = t.steps.iter().map(|s| s.step).collect();
            let expected: Vec<usize> = (1..=t.steps_used).collect();
            assert_eq!(recorded, expected);
        }
    }

    #[test]
    fn scripted_agent_hits_step_cap() {
        let s = store(&[("A", &["B"]), ("B", &["A"]), ("Z", &[])]);
        let actions: VecDeque<AgentAction> = (0..STEP_CAP + 5)
            .map(|i| AgentAction::ClickLink {
                page: EntityId::from(if i % 2 == 0 { "B" } else { "A" }),
            })
            .collect();
        let mut agent = ScriptedAgent { actions };
        let transcripts =
            run_agent(&s, &[task("A", "Z")], &mut agent, Mode::LinksOnly).unwrap();
        assert_eq!(transcripts[0].status, TranscriptStatus::StepCap);
        assert_eq!(transcripts[0].steps_used, STEP_CAP);
    }

    #[test]
    fn agent_failure_is_recorded() {
        let s = store(&[("A", &["B"]), ("B", &[])]);
        let mut agent = ScriptedAgent { actions: VecDeque::new() };
        let transcripts =
            run_agent(&s, &[task("A", "B")], &mut agent, Mode::LinksOnly).unwrap();
        assert_eq!(transcripts[0].status, TranscriptStatus::AgentError);
    }

    #[test]
    fn transcripts_are_deterministic() {
        let s = store(&[
            ("A", &["B", "C"]),
            ("B", &["A", "C"]),
            ("C", &["A", "B"]),
            ("Z", &[]),
        ]);
        let run = || {
            let mut agent = RandomAgent::new(17);
            let transcripts =
                run_agent(&s, &[task("A", "Z"), task("B", "Z")], &mut agent, Mode::LinksOnly)
                    .unwrap();
            serde_json::to_string(&transcripts).expect("serialize transcripts")
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn success_paths_exist_edge_by_edge() {
        let s = store(&[("A", &["B"]), ("B", &["C"]), ("C", &[])]);
        let graph = s.doc_graph();
        let mut agent = BfsOracleAgent::new(graph.clone());
        let transcripts =
            run_agent(&s, &[task("A", "C")], &mut agent, Mode::LinksOnly).unwrap();
        let t = &transcripts[0];
        assert_eq!(t.status, TranscriptStatus::Success);
        let mut at = t.source.clone();
        for step in &t.steps {
            if let AgentAction::ClickLink { page } = &step.action {
                let from = graph.node_index(&at).unwrap();
                let to = graph.node_index(page).unwrap();
                assert!(graph.out[from].contains(&to));
                at = page.clone();
            }
        }
        assert_eq!(at, t.target);
    }
}
