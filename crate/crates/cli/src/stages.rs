//! Stage implementations behind the CLI subcommands. Every stage reads its
//! inputs (verifying upstream fingerprints), writes its outputs under one
//! stage directory, and finishes with a run manifest.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde_json::json;

use kgtwin_core::corpus::{self, Variant};
use kgtwin_core::env::{self, Agent, BfsOracleAgent, Mode, PageStore, RandomAgent};
use kgtwin_core::eval;
use kgtwin_core::fixture;
use kgtwin_core::kg::{self, EntityId};
use kgtwin_core::nav;
use kgtwin_core::perturb::{self, PerturbError, RenameOptions};
use kgtwin_core::ports::http::{HttpBackend, LiveConfig};
use kgtwin_core::ports::mock::MockBackend;
use kgtwin_core::ports::replay::ReplayBackend;
use kgtwin_core::ports::{Gateway, PortClient};
use kgtwin_core::qa::{self, Motif};
use kgtwin_core::sampler;

use crate::artifacts::{self, CORPUS_DIR, EVAL_DIR, FIXTURE_DIR, NAV_DIR, QA_DIR, SYNTH_DIR, TRANSCRIPTS_DIR, UNIVERSE_DIR};
use crate::config::{PipelineConfig, PortMode, PortsSection};
use crate::error::{CliError, CliResult};
use crate::manifest::{require_stage, StageRun};

pub fn gateway_from_config(ports: &PortsSection) -> CliResult<Gateway> {
    let backend: Box<dyn kgtwin_core::ports::Backend> = match ports.mode {
        PortMode::Mock => Box::new(MockBackend::new(ports.mock.clone())),
        PortMode::Live => {
            let live = LiveConfig::from_env().map_err(|e| CliError::config(e.to_string()))?;
            Box::new(HttpBackend::new(live))
        }
        PortMode::Replay => {
            let log = ports
                .replay_log
                .as_ref()
                .ok_or_else(|| CliError::config("replay mode requires ports.replay_log"))?;
            Box::new(
                ReplayBackend::from_log(log)
                    .map_err(|e| CliError::input(format!("cannot load replay log: {e}")))?,
            )
        }
    };
    Ok(Gateway::new(backend))
}

fn write_call_log(run: &mut StageRun, gateway: &Gateway) -> CliResult<()> {
    let mut log = String::new();
    for record in gateway.call_log() {
        log.push_str(
            &serde_json::to_string(&record).map_err(|e| CliError::input(e.to_string()))?,
        );
        log.push('\n');
    }
    run.write_output("calls.jsonl", log.as_bytes())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-fixture
// ---------------------------------------------------------------------------

pub fn stage_gen_fixture(out_root: &Path, seed: u64) -> CliResult<()> {
    let dir = out_root.join(FIXTURE_DIR);
    let mut run = StageRun::start("gen-fixture", &dir, json!({"seed": seed}))?;
    let fixture = fixture::generate(&fixture::FixtureOptions {
        seed,
        ..fixture::FixtureOptions::default()
    });
    run.write_output("entities.jsonl", fixture.entities_jsonl.as_bytes())?;
    run.write_output("facts.jsonl", fixture.facts_jsonl.as_bytes())?;
    run.write_output("relations.json", fixture.relations_json.as_bytes())?;

    // A ready-to-run configuration scaled to the fixture.
    let seeds: Vec<String> = fixture.suggested_seeds.iter().map(|s| s.to_string()).collect();
    let config = format!(
        r#"[input]
entities = "{dir}/entities.jsonl"
facts = "{dir}/facts.jsonl"
relations = "{dir}/relations.json"

[sampler]
seeds = [{seeds}]
iterations = 4
uniformity = 0.6
k = 4
per_node_cap = 10
rng_seed = 7

[perturb]
delta_years = 39

[qa]
budget_per_motif = 25
rng_seed = 11

[nav]
per_bucket = 4
rng_seed = 13
attempt_factor = 200

[ports]
mode = "mock"
"#,
        dir = dir.display(),
        seeds = seeds.iter().map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", "),
    );
    run.write_output("config.toml", config.as_bytes())?;
    run.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// sample-universe
// ---------------------------------------------------------------------------

pub fn stage_sample_universe(
    config: &PipelineConfig,
    entities: Option<&Path>,
    facts: Option<&Path>,
    relations: Option<&Path>,
    out_root: &Path,
) -> CliResult<()> {
    let entities = entities
        .map(Path::to_path_buf)
        .or_else(|| config.input.entities.clone())
        .ok_or_else(|| CliError::config("no entities file (flag --entities or [input])"))?;
    let facts = facts
        .map(Path::to_path_buf)
        .or_else(|| config.input.facts.clone())
        .ok_or_else(|| CliError::config("no facts file (flag --facts or [input])"))?;
    let relations = relations
        .map(Path::to_path_buf)
        .or_else(|| config.input.relations.clone());

    let dir = out_root.join(UNIVERSE_DIR);
    let snapshot = json!({"sampler": config.sampler, "filter": config.filter});
    let mut run = StageRun::start("sample-universe", &dir, snapshot)?;
    run.input(&entities)?;
    run.input(&facts)?;
    if let Some(relations) = &relations {
        run.input(relations)?;
    }

    let open = |path: &Path| -> CliResult<std::fs::File> {
        std::fs::File::open(path)
            .map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))
    };
    let mut graph = kg::ingest_kg(
        BufReader::new(open(&entities)?),
        BufReader::new(open(&facts)?),
    )
    .map_err(|e| CliError::input(e.to_string()))?;
    if let Some(relations) = &relations {
        graph.relation_defs = kg::load_relation_defs(BufReader::new(open(relations)?))
            .map_err(|e| CliError::input(e.to_string()))?;
    }

    let filtered = kg::filter_entities(&graph, &config.filter);
    let sampler_config = config.sampler.to_core();
    let universe = sampler::sample_universe(&filtered, &sampler_config).map_err(|e| match e {
        sampler::SampleError::EmptyUniverse { .. } => CliError::gate(e.to_string()),
        other => CliError::config(other.to_string()),
    })?;

    artifacts::save_universe(&mut run, &universe)?;
    run.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// perturb
// ---------------------------------------------------------------------------

fn universe_inputs(run: &mut StageRun, dir: &Path) -> CliResult<()> {
    for name in
        ["entities.jsonl", "facts.jsonl", "relations.json", "labeling.jsonl", "type_annex.jsonl", "provenance.json"]
    {
        run.input(&dir.join(name))?;
    }
    Ok(())
}

pub fn stage_perturb(config: &PipelineConfig, out_root: &Path) -> CliResult<()> {
    let universe_dir = out_root.join(UNIVERSE_DIR);
    require_stage(&universe_dir, "sample-universe")?;

    let dir = out_root.join(SYNTH_DIR);
    let snapshot = json!({"perturb": config.perturb, "ports": config.ports.mode});
    let mut run = StageRun::start("perturb", &dir, snapshot)?;
    universe_inputs(&mut run, &universe_dir)?;

    let universe = artifacts::load_universe(&universe_dir)?;
    let dep = perturb::build_dependency_graph(&universe);
    let gateway = gateway_from_config(&config.ports)?;
    let client = PortClient::new(&gateway);
    let options = RenameOptions {
        retry_cap: config.perturb.retry_cap,
        candidates_per_call: config.perturb.candidates_per_call,
        delta_years: config.perturb.delta_years,
    };
    let plan = perturb::plan_renames(&dep, &universe, &client, &options).map_err(|e| match e {
        PerturbError::Generator { .. } => CliError::transport(e.to_string()),
        other => CliError::gate(other.to_string()),
    })?;
    let synth = perturb::make_synth_universe(&universe, &plan)
        .map_err(|e| CliError::gate(e.to_string()))?;

    artifacts::save_universe(&mut run, &synth)?;
    artifacts::save_plan(&mut run, &plan, &universe)?;
    let dep_json =
        serde_json::to_string_pretty(&dep).map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("dependency_graph.json", dep_json.as_bytes())?;
    write_call_log(&mut run, &gateway)?;
    run.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// build-corpus
// ---------------------------------------------------------------------------

pub fn stage_build_corpus(config: &PipelineConfig, out_root: &Path) -> CliResult<()> {
    let universe_dir = out_root.join(UNIVERSE_DIR);
    let synth_dir = out_root.join(SYNTH_DIR);
    require_stage(&universe_dir, "sample-universe")?;
    require_stage(&synth_dir, "perturb")?;

    let dir = out_root.join(CORPUS_DIR);
    let snapshot = json!({"corpus": config.corpus, "ports": config.ports.mode});
    let mut run = StageRun::start("build-corpus", &dir, snapshot)?;
    universe_inputs(&mut run, &universe_dir)?;
    universe_inputs(&mut run, &synth_dir)?;
    run.input(&synth_dir.join("plan.json"))?;

    let real = artifacts::load_universe(&universe_dir)?;
    let synth = artifacts::load_universe(&synth_dir)?;
    let plan = artifacts::load_plan(&synth_dir)?;
    let gateway = gateway_from_config(&config.ports)?;
    let client = PortClient::new(&gateway);

    let (corpus, manifest) =
        corpus::build_corpus(&real, &synth, &plan, &client, &client, &config.corpus.to_core());
    if manifest.retained == 0 {
        return Err(CliError::gate("corpus gates dropped every page".to_string()));
    }
    artifacts::save_corpus(&mut run, &corpus, &manifest)?;
    write_call_log(&mut run, &gateway)?;
    run.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// build-qa
// ---------------------------------------------------------------------------

fn load_catalog(config: &PipelineConfig) -> CliResult<Vec<Motif>> {
    match &config.qa.motif_catalog {
        None => Ok(qa::default_motif_catalog()),
        Some(path) => {
            let content = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read motif catalog: {e}")))?;
            let catalog: Vec<Motif> = serde_json::from_str(&content)
                .map_err(|e| CliError::config(format!("bad motif catalog: {e}")))?;
            for motif in &catalog {
                motif.validate().map_err(|e| CliError::config(e.to_string()))?;
            }
            Ok(catalog)
        }
    }
}

pub fn stage_build_qa(config: &PipelineConfig, out_root: &Path) -> CliResult<()> {
    let universe_dir = out_root.join(UNIVERSE_DIR);
    let synth_dir = out_root.join(SYNTH_DIR);
    let corpus_dir = out_root.join(CORPUS_DIR);
    require_stage(&corpus_dir, "build-corpus")?;

    let dir = out_root.join(QA_DIR);
    let snapshot = json!({"qa": config.qa, "ports": config.ports.mode});
    let mut run = StageRun::start("build-qa", &dir, snapshot)?;
    run.input(&corpus_dir.join("corpus_manifest.json"))?;
    run.input(&synth_dir.join("plan.json"))?;

    let real = artifacts::load_universe(&universe_dir)?;
    let synth = artifacts::load_universe(&synth_dir)?;
    let plan = artifacts::load_plan(&synth_dir)?;
    let corpus = artifacts::load_corpus(&corpus_dir, &real, &synth)?;
    let catalog = load_catalog(config)?;
    let gateway = gateway_from_config(&config.ports)?;
    let client = PortClient::new(&gateway);

    let qa_config = qa::QaConfig {
        budget_per_motif: config.qa.budget_per_motif,
        rng_seed: config.qa.rng_seed,
        retry_cap: config.qa.retry_cap,
    };
    let (rm, sm, shortfall) = qa::build_qa_dataset(
        &corpus, &real, &synth, &plan, &catalog, &client, &client, &qa_config,
    )
    .map_err(|e| match e {
        qa::QaError::Port(p) if p.is_transport() => CliError::transport(p.to_string()),
        other => CliError::gate(other.to_string()),
    })?;

    // Independent re-check of the emitted dataset.
    let violations = qa::validate_qa_datasets(&rm, &sm, &catalog);
    if !violations.is_empty() {
        return Err(CliError::gate(format!(
            "emitted QA dataset violates construction constraints: {}",
            violations.join("; ")
        )));
    }

    run.write_output("qa_rm.jsonl", artifacts::jsonl(&rm)?.as_bytes())?;
    run.write_output("qa_sm.jsonl", artifacts::jsonl(&sm)?.as_bytes())?;
    let shortfall_json =
        serde_json::to_string_pretty(&shortfall).map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("shortfall.json", shortfall_json.as_bytes())?;
    write_call_log(&mut run, &gateway)?;
    run.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// build-nav
// ---------------------------------------------------------------------------

pub fn stage_build_nav(config: &PipelineConfig, out_root: &Path) -> CliResult<()> {
    let universe_dir = out_root.join(UNIVERSE_DIR);
    let synth_dir = out_root.join(SYNTH_DIR);
    let corpus_dir = out_root.join(CORPUS_DIR);
    require_stage(&corpus_dir, "build-corpus")?;

    let dir = out_root.join(NAV_DIR);
    let snapshot = json!({"nav": config.nav});
    let mut run = StageRun::start("build-nav", &dir, snapshot)?;
    run.input(&corpus_dir.join("corpus_manifest.json"))?;

    let real = artifacts::load_universe(&universe_dir)?;
    let synth = artifacts::load_universe(&synth_dir)?;
    let corpus = artifacts::load_corpus(&corpus_dir, &real, &synth)?;
    let graph = nav::build_doc_graph(&corpus);
    if !graph.is_connected() {
        return Err(CliError::gate(
            "hyperlink graph is not connected; corpus pruning failed".to_string(),
        ));
    }
    let nav_config = nav::NavSampleConfig {
        per_bucket: config.nav.per_bucket,
        rng_seed: config.nav.rng_seed,
        attempt_factor: config.nav.attempt_factor,
    };
    let (tasks, shortfall) =
        nav::sample_nav_pairs(&graph, &nav_config).map_err(|e| CliError::gate(e.to_string()))?;
    if tasks.is_empty() {
        return Err(CliError::gate("no navigation pair fits any difficulty bucket".to_string()));
    }
    // Task ids and structure are identical across variants.
    let body = artifacts::jsonl(&tasks)?;
    run.write_output("nav_rm.jsonl", body.as_bytes())?;
    run.write_output("nav_sm.jsonl", body.as_bytes())?;
    let shortfall_json =
        serde_json::to_string_pretty(&shortfall).map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("shortfall.json", shortfall_json.as_bytes())?;
    run.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// run-nav
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    BfsOracle,
    Random,
}

impl std::str::FromStr for AgentKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bfs" | "bfs_oracle" => Ok(AgentKind::BfsOracle),
            "random" => Ok(AgentKind::Random),
            other => Err(format!("unknown agent {other}; expected bfs or random")),
        }
    }
}

pub fn stage_run_nav(
    _config: &PipelineConfig,
    out_root: &Path,
    variant: Variant,
    mode: Mode,
    agent_kind: AgentKind,
    agent_seed: u64,
) -> CliResult<()> {
    let universe_dir = out_root.join(UNIVERSE_DIR);
    let synth_dir = out_root.join(SYNTH_DIR);
    let corpus_dir = out_root.join(CORPUS_DIR);
    let nav_dir = out_root.join(NAV_DIR);
    require_stage(&nav_dir, "build-nav")?;

    let agent_name = match agent_kind {
        AgentKind::BfsOracle => "bfs_oracle",
        AgentKind::Random => "random",
    };
    let dir = out_root
        .join(TRANSCRIPTS_DIR)
        .join(format!("{variant}_{mode}_{agent_name}"));
    let snapshot = json!({
        "variant": variant, "mode": mode.to_string(), "agent": agent_name, "seed": agent_seed,
    });
    let mut run = StageRun::start("run-nav", &dir, snapshot)?;
    let tasks_path = nav_dir.join(format!("nav_{variant}.jsonl"));
    run.input(&tasks_path)?;
    run.input(&corpus_dir.join("corpus_manifest.json"))?;

    let real = artifacts::load_universe(&universe_dir)?;
    let synth = artifacts::load_universe(&synth_dir)?;
    let corpus = artifacts::load_corpus(&corpus_dir, &real, &synth)?;
    let tasks = artifacts::load_nav_tasks(&tasks_path)?;
    let store = PageStore::from_corpus(&corpus, variant);

    let mut agent: Box<dyn Agent> = match agent_kind {
        AgentKind::BfsOracle => Box::new(BfsOracleAgent::new(store.doc_graph())),
        AgentKind::Random => Box::new(RandomAgent::new(agent_seed)),
    };
    let transcripts = env::run_agent(&store, &tasks, agent.as_mut(), mode)
        .map_err(|e| CliError::input(e.to_string()))?;
    run.write_output(
        "transcripts.jsonl",
        artifacts::transcripts_to_jsonl(&transcripts)?.as_bytes(),
    )?;
    run.finish()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Debug, serde::Deserialize)]
struct QaPrediction {
    pair_id: String,
    prediction: String,
    #[serde(default)]
    retrieved: Vec<String>,
}

pub fn stage_evaluate_qa(
    out_root: &Path,
    gold_path: &Path,
    predictions_path: &Path,
    condition: &str,
    variant: Variant,
    recall_k: Option<usize>,
) -> CliResult<()> {
    let dir = out_root.join(EVAL_DIR).join(format!("qa_{condition}_{variant}"));
    let snapshot = json!({"condition": condition, "variant": variant});
    let mut run = StageRun::start("evaluate", &dir, snapshot)?;
    run.input(gold_path)?;
    run.input(predictions_path)?;

    let gold = artifacts::load_qa(gold_path)?;
    let predictions: Vec<QaPrediction> = artifacts::load_jsonl(predictions_path)?;
    let by_id: BTreeMap<&String, &QaPrediction> =
        predictions.iter().map(|p| (&p.pair_id, p)).collect();
    let gold_ids: BTreeSet<&String> = gold.iter().map(|g| &g.pair_id).collect();
    let pred_ids: BTreeSet<&String> = predictions.iter().map(|p| &p.pair_id).collect();
    if gold_ids != pred_ids {
        return Err(CliError::input(format!(
            "prediction pair ids are not aligned with the gold set ({} gold vs {} predicted)",
            gold_ids.len(),
            pred_ids.len()
        )));
    }

    let scores: Vec<eval::TaskScore> = gold
        .iter()
        .map(|instance| {
            let prediction = by_id[&instance.pair_id];
            eval::TaskScore {
                pair_id: instance.pair_id.clone(),
                score: eval::token_f1(&prediction.prediction, &instance.answer),
            }
        })
        .collect();
    let report = eval::EvalReport::new(condition, variant, scores);
    let report_json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("report.json", report_json.as_bytes())?;

    if let Some(k) = recall_k {
        let scores: Result<Vec<eval::TaskScore>, CliError> = gold
            .iter()
            .map(|instance| {
                let prediction = by_id[&instance.pair_id];
                let gold_pages: BTreeSet<String> =
                    instance.gold_page_ids.iter().map(|p| p.to_string()).collect();
                let recall = eval::recall_at_k(&prediction.retrieved, &gold_pages, k)
                    .map_err(|e| CliError::input(e.to_string()))?;
                Ok(eval::TaskScore { pair_id: instance.pair_id.clone(), score: recall })
            })
            .collect();
        let retrieval_report =
            eval::EvalReport::new(&format!("{condition}_recall@{k}"), variant, scores?);
        let retrieval_json = serde_json::to_string_pretty(&retrieval_report)
            .map_err(|e| CliError::input(e.to_string()))?;
        run.write_output("retrieval.json", retrieval_json.as_bytes())?;
    }
    run.finish()?;
    Ok(())
}

/// Labels visible on each page for the external-mention scan: the page
/// title, link display texts, and (in content mode) every corpus label that
/// occurs in the page text.
fn page_label_sets(
    store: &PageStore,
    corpus_labels: &BTreeSet<String>,
    mode: Mode,
) -> BTreeMap<EntityId, BTreeSet<String>> {
    let mut out = BTreeMap::new();
    for (id, title) in &store.titles {
        let mut labels: BTreeSet<String> = BTreeSet::new();
        labels.insert(title.clone());
        for (_, display) in store.links.get(id).into_iter().flatten() {
            labels.insert(display.clone());
        }
        if mode == Mode::ContentLinks {
            if let Some(text) = store.texts.get(id) {
                for label in corpus_labels {
                    if kgtwin_core::text::contains_word(text, label) {
                        labels.insert(label.clone());
                    }
                }
            }
        }
        out.insert(id.clone(), labels);
    }
    out
}

pub fn stage_evaluate_nav(
    out_root: &Path,
    transcripts_path: &Path,
    condition: &str,
) -> CliResult<()> {
    let universe_dir = out_root.join(UNIVERSE_DIR);
    let synth_dir = out_root.join(SYNTH_DIR);
    let corpus_dir = out_root.join(CORPUS_DIR);

    let transcripts = artifacts::load_transcripts(transcripts_path)?;
    if transcripts.is_empty() {
        return Err(CliError::input("no transcripts to evaluate".to_string()));
    }
    let variant = transcripts[0].variant;
    let mode = transcripts[0].mode;

    let dir = out_root.join(EVAL_DIR).join(format!("nav_{condition}_{variant}"));
    let snapshot = json!({"condition": condition, "variant": variant});
    let mut run = StageRun::start("evaluate", &dir, snapshot)?;
    run.input(transcripts_path)?;

    let scores: Vec<eval::TaskScore> = transcripts
        .iter()
        .map(|t| eval::TaskScore {
            pair_id: t.pair_id.clone(),
            score: if t.status == kgtwin_core::env::TranscriptStatus::Success {
                1.0
            } else {
                0.0
            },
        })
        .collect();
    let report = eval::EvalReport::new(condition, variant, scores);
    let report_json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("report.json", report_json.as_bytes())?;

    // External-entity-mention rate against the variant's label catalog.
    let real = artifacts::load_universe(&universe_dir)?;
    let synth = artifacts::load_universe(&synth_dir)?;
    let corpus = artifacts::load_corpus(&corpus_dir, &real, &synth)?;
    let store = PageStore::from_corpus(&corpus, variant);
    let labeling = match variant {
        Variant::Rm => &real,
        Variant::Sm => &synth,
    };
    let mut corpus_labels: BTreeSet<String> = corpus
        .retained_ids()
        .iter()
        .map(|id| labeling.label(id).to_string())
        .filter(|l| !l.is_empty())
        .collect();
    if variant == Variant::Rm {
        for id in corpus.retained_ids() {
            if let Some(entity) = real.graph.entities.get(&id) {
                corpus_labels.extend(entity.aliases.iter().cloned());
            }
        }
    }
    let page_labels = page_label_sets(&store, &corpus_labels, mode);
    let rate = eval::external_mention_rate(&transcripts, &corpus_labels, &page_labels);
    let rate_json = serde_json::to_string_pretty(&json!({
        "condition": condition,
        "variant": variant,
        "external_mention_rate": rate,
    }))
    .map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("external_mentions.json", rate_json.as_bytes())?;
    run.finish()?;
    Ok(())
}

pub fn stage_evaluate_ka(
    out_root: &Path,
    report_paths: &[PathBuf],
    base_condition: &str,
) -> CliResult<()> {
    let dir = out_root.join(EVAL_DIR).join("ka");
    let snapshot = json!({"base_condition": base_condition});
    let mut run = StageRun::start("evaluate", &dir, snapshot)?;

    let mut by_condition: BTreeMap<String, BTreeMap<Variant, eval::EvalReport>> = BTreeMap::new();
    for path in report_paths {
        run.input(path)?;
        let report: eval::EvalReport = serde_json::from_str(
            &std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?,
        )
        .map_err(|e| CliError::input(format!("bad report {}: {e}", path.display())))?;
        by_condition
            .entry(report.condition.clone())
            .or_default()
            .insert(report.variant, report);
    }

    let mut points = Vec::new();
    for (condition, reports) in &by_condition {
        let (Some(rm), Some(sm)) = (reports.get(&Variant::Rm), reports.get(&Variant::Sm)) else {
            return Err(CliError::input(format!(
                "condition {condition} lacks an RM/SM report pair"
            )));
        };
        points.push(
            eval::knowledge_advantage(rm, sm).map_err(|e| CliError::input(e.to_string()))?,
        );
    }
    let base = points
        .iter()
        .find(|p| p.condition == base_condition)
        .cloned()
        .ok_or_else(|| {
            CliError::input(format!("base condition {base_condition} has no report pair"))
        })?;
    let augmented: Vec<eval::KaPoint> =
        points.iter().filter(|p| p.condition != base_condition).cloned().collect();
    let summary = eval::summarize_ka(&base, &augmented);

    let summary_json =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("ka_summary.json", summary_json.as_bytes())?;
    let (csv, txt) = eval::render_table(&points);
    run.write_output("table.csv", csv.as_bytes())?;
    run.write_output("table.txt", txt.as_bytes())?;
    run.finish()?;
    Ok(())
}
