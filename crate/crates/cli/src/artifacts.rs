//! On-disk artifact formats shared between stages: universes, rename plans,
//! corpora, task datasets, transcripts, and reports.

use std::collections::BTreeMap;
use std::io::BufReader;
use std::path::Path;

use serde_json::json;

use kgtwin_core::corpus::{
    parse_links, Corpus, CorpusManifest, PagePair, PageStatus, SymbolicPage, Variant,
};
use kgtwin_core::env::Transcript;
use kgtwin_core::kg::{self, EntityId, Fact, FactObject, KnowledgeGraph};
use kgtwin_core::nav::NavTask;
use kgtwin_core::perturb::RenamePlan;
use kgtwin_core::qa::QaInstance;
use kgtwin_core::sampler::{Provenance, Universe};

use crate::error::{CliError, CliResult};
use crate::manifest::StageRun;

pub const UNIVERSE_DIR: &str = "universe";
pub const SYNTH_DIR: &str = "synth";
pub const CORPUS_DIR: &str = "corpus";
pub const QA_DIR: &str = "qa";
pub const NAV_DIR: &str = "nav";
pub const TRANSCRIPTS_DIR: &str = "transcripts";
pub const EVAL_DIR: &str = "eval";
pub const FIXTURE_DIR: &str = "fixture";

fn entity_record(entity: &kg::Entity) -> serde_json::Value {
    json!({
        "id": entity.id,
        "label": entity.label,
        "aliases": entity.aliases,
        "instance_of": entity.type_ids,
        "flags": entity.flags,
    })
}

fn fact_record(fact: &Fact) -> serde_json::Value {
    let object = match &fact.object {
        FactObject::Entity(id) => json!({"entity": id}),
        FactObject::Literal(literal) => {
            json!({"literal": {"kind": literal.kind, "value": literal.value}})
        }
    };
    json!({
        "subject": fact.subject,
        "property": fact.relation.id,
        "property_label": fact.relation.label,
        "object": object,
        "qualifiers": fact.qualifiers.iter().map(|q| json!({
            "property": q.relation.id,
            "property_label": q.relation.label,
            "literal": {"kind": q.value.kind, "value": q.value.value},
        })).collect::<Vec<_>>(),
    })
}

pub fn graph_to_jsonl(graph: &KnowledgeGraph) -> (String, String) {
    let mut entities = String::new();
    for entity in graph.entities.values() {
        entities.push_str(&entity_record(entity).to_string());
        entities.push('\n');
    }
    let mut facts = String::new();
    for fact in &graph.facts {
        facts.push_str(&fact_record(fact).to_string());
        facts.push('\n');
    }
    (entities, facts)
}

/// Write a universe as entities.jsonl + facts.jsonl + relations.json +
/// labeling.jsonl + provenance.json.
pub fn save_universe(run: &mut StageRun, universe: &Universe) -> CliResult<()> {
    let (entities, facts) = graph_to_jsonl(&universe.graph);
    run.write_output("entities.jsonl", entities.as_bytes())?;
    run.write_output("facts.jsonl", facts.as_bytes())?;
    let relations = serde_json::to_string_pretty(&universe.graph.relation_defs)
        .map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("relations.json", relations.as_bytes())?;
    let mut labeling = String::new();
    for (id, label) in &universe.labeling {
        labeling.push_str(&json!({"id": id, "label": label}).to_string());
        labeling.push('\n');
    }
    run.write_output("labeling.jsonl", labeling.as_bytes())?;
    let mut annex = String::new();
    for entity in universe.type_annex.values() {
        annex.push_str(&entity_record(entity).to_string());
        annex.push('\n');
    }
    run.write_output("type_annex.jsonl", annex.as_bytes())?;
    let provenance = serde_json::to_string_pretty(&universe.provenance)
        .map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("provenance.json", provenance.as_bytes())?;
    Ok(())
}

pub fn load_universe(dir: &Path) -> CliResult<Universe> {
    let open = |name: &str| -> CliResult<std::fs::File> {
        std::fs::File::open(dir.join(name)).map_err(|e| {
            CliError::input(format!("cannot open {}: {e}", dir.join(name).display()))
        })
    };
    let mut graph = kg::ingest_kg(
        BufReader::new(open("entities.jsonl")?),
        BufReader::new(open("facts.jsonl")?),
    )
    .map_err(|e| CliError::input(format!("bad universe under {}: {e}", dir.display())))?;
    graph.relation_defs = kg::load_relation_defs(BufReader::new(open("relations.json")?))
        .map_err(|e| CliError::input(e.to_string()))?;
    let labeling_text = std::fs::read_to_string(dir.join("labeling.jsonl"))
        .map_err(|e| CliError::input(e.to_string()))?;
    let mut labeling = BTreeMap::new();
    for line in labeling_text.lines().filter(|l| !l.trim().is_empty()) {
        let record: serde_json::Value =
            serde_json::from_str(line).map_err(|e| CliError::input(e.to_string()))?;
        labeling.insert(
            EntityId::new(record["id"].as_str().unwrap_or_default()),
            record["label"].as_str().unwrap_or_default().to_string(),
        );
    }
    let annex_path = dir.join("type_annex.jsonl");
    let mut type_annex = BTreeMap::new();
    if annex_path.exists() {
        // The annex file uses the entity-record format; ingest it with an
        // empty fact stream to reuse the record validation.
        let annex_graph = kg::ingest_kg(
            BufReader::new(std::fs::File::open(&annex_path).map_err(|e| {
                CliError::input(format!("cannot open {}: {e}", annex_path.display()))
            })?),
            BufReader::new(std::io::Cursor::new(Vec::new())),
        )
        .map_err(|e| CliError::input(e.to_string()))?;
        type_annex = annex_graph.entities;
    }
    let provenance: Provenance = serde_json::from_str(
        &std::fs::read_to_string(dir.join("provenance.json"))
            .map_err(|e| CliError::input(e.to_string()))?,
    )
    .map_err(|e| CliError::input(e.to_string()))?;
    Ok(Universe { graph, labeling, type_annex, provenance })
}

pub fn save_plan(run: &mut StageRun, plan: &RenamePlan, real: &Universe) -> CliResult<()> {
    let mut mapping = String::new();
    for (id, synth_label) in &plan.mapping {
        mapping.push_str(
            &json!({
                "id": id,
                "real_label": real.label(id),
                "synth_label": synth_label,
            })
            .to_string(),
        );
        mapping.push('\n');
    }
    run.write_output("mapping.jsonl", mapping.as_bytes())?;
    let plan_json =
        serde_json::to_string_pretty(plan).map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("plan.json", plan_json.as_bytes())?;
    Ok(())
}

pub fn load_plan(dir: &Path) -> CliResult<RenamePlan> {
    let content = std::fs::read_to_string(dir.join("plan.json"))
        .map_err(|e| CliError::input(format!("cannot read plan under {}: {e}", dir.display())))?;
    serde_json::from_str(&content).map_err(|e| CliError::input(e.to_string()))
}

/// Write retained pages as pages/<variant>/<EntityId>.md plus the corpus
/// manifest with thresholds, counts, and drop reasons.
pub fn save_corpus(
    run: &mut StageRun,
    corpus: &Corpus,
    manifest: &CorpusManifest,
) -> CliResult<()> {
    for pair in corpus.retained() {
        let synth = pair.synth.as_ref().expect("retained page");
        let real = pair.real.as_ref().expect("retained page");
        run.write_output(&format!("pages/sm/{}.md", pair.entity), synth.text.as_bytes())?;
        run.write_output(&format!("pages/rm/{}.md", pair.entity), real.text.as_bytes())?;
    }
    let manifest_json =
        serde_json::to_string_pretty(manifest).map_err(|e| CliError::input(e.to_string()))?;
    run.write_output("corpus_manifest.json", manifest_json.as_bytes())?;
    Ok(())
}

/// Rebuild the retained corpus from page files; titles come from the
/// universes' labeling functions.
pub fn load_corpus(dir: &Path, real: &Universe, synth: &Universe) -> CliResult<Corpus> {
    let manifest: CorpusManifest = serde_json::from_str(
        &std::fs::read_to_string(dir.join("corpus_manifest.json"))
            .map_err(|e| CliError::input(format!("missing corpus manifest: {e}")))?,
    )
    .map_err(|e| CliError::input(e.to_string()))?;
    let sims: BTreeMap<EntityId, (Option<f64>, Option<f64>, Option<f64>)> = manifest
        .pages
        .iter()
        .map(|p| {
            (
                p.entity.clone(),
                (p.draft_similarity, p.pair_similarity, p.pair_similarity_normalized),
            )
        })
        .collect();

    let sm_dir = dir.join("pages").join("sm");
    let mut pages = BTreeMap::new();
    let entries = std::fs::read_dir(&sm_dir)
        .map_err(|e| CliError::input(format!("cannot list {}: {e}", sm_dir.display())))?;
    let mut ids: Vec<EntityId> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| CliError::input(e.to_string()))?;
        let name = entry.file_name().to_string_lossy().to_string();
        if let Some(stem) = name.strip_suffix(".md") {
            ids.push(EntityId::new(stem));
        }
    }
    ids.sort();
    for id in ids {
        let load_page = |variant: Variant, title: String| -> CliResult<SymbolicPage> {
            let path = dir.join("pages").join(variant.to_string()).join(format!("{id}.md"));
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            let refs = parse_links(&text).map_err(CliError::input)?;
            Ok(SymbolicPage { entity: id.clone(), title, text, refs })
        };
        let synth_page = load_page(Variant::Sm, synth.label(&id).to_string())?;
        let real_page = load_page(Variant::Rm, real.label(&id).to_string())?;
        let (draft, pair_sim, pair_norm) =
            sims.get(&id).copied().unwrap_or((None, None, None));
        pages.insert(
            id.clone(),
            PagePair {
                entity: id.clone(),
                synth: Some(synth_page),
                real: Some(real_page),
                draft_similarity: draft,
                pair_similarity: pair_sim,
                pair_similarity_normalized: pair_norm,
                status: PageStatus::Retained,
            },
        );
    }
    Ok(Corpus { pages, thresholds: manifest.thresholds })
}

pub fn jsonl<T: serde::Serialize>(items: &[T]) -> CliResult<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).map_err(|e| CliError::input(e.to_string()))?);
        out.push('\n');
    }
    Ok(out)
}

pub fn load_jsonl<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut items = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(line).map_err(|e| {
            CliError::input(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?);
    }
    Ok(items)
}

pub fn load_qa(path: &Path) -> CliResult<Vec<QaInstance>> {
    load_jsonl(path)
}

pub fn load_nav_tasks(path: &Path) -> CliResult<Vec<NavTask>> {
    load_jsonl(path)
}

/// Transcript files are framed JSON-lines: a header record per episode,
/// one record per step, and a terminal record.
pub fn transcripts_to_jsonl(transcripts: &[Transcript]) -> CliResult<String> {
    let mut out = String::new();
    let mut push = |value: serde_json::Value| {
        out.push_str(&value.to_string());
        out.push('\n');
    };
    for t in transcripts {
        push(json!({
            "kind": "header",
            "pair_id": t.pair_id,
            "variant": t.variant,
            "mode": t.mode,
            "agent": t.agent,
            "source": t.source,
            "target": t.target,
            "target_title": t.target_title,
            "policy": t.policy,
        }));
        for step in &t.steps {
            push(json!({
                "kind": "step",
                "pair_id": t.pair_id,
                "step": step.step,
                "observation": step.observation,
                "action": step.action,
                "valid": step.valid,
                "agent_text": step.agent_text,
            }));
        }
        push(json!({
            "kind": "terminal",
            "pair_id": t.pair_id,
            "status": t.status,
            "steps": t.steps_used,
        }));
    }
    Ok(out)
}

pub fn load_transcripts(path: &Path) -> CliResult<Vec<Transcript>> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let mut transcripts: Vec<Transcript> = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| CliError::input(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        let mut parse = || -> Option<()> {
            match record["kind"].as_str()? {
                "header" => {
                    transcripts.push(Transcript {
                        pair_id: record["pair_id"].as_str()?.to_string(),
                        variant: serde_json::from_value(record["variant"].clone()).ok()?,
                        mode: serde_json::from_value(record["mode"].clone()).ok()?,
                        agent: record["agent"].as_str()?.to_string(),
                        source: EntityId::new(record["source"].as_str()?),
                        target: EntityId::new(record["target"].as_str()?),
                        target_title: record["target_title"].as_str()?.to_string(),
                        policy: serde_json::from_value(record["policy"].clone()).ok()?,
                        steps: Vec::new(),
                        status: kgtwin_core::env::TranscriptStatus::AgentError,
                        steps_used: 0,
                    });
                }
                "step" => {
                    let t = transcripts.last_mut()?;
                    t.steps.push(kgtwin_core::env::TranscriptStep {
                        step: record["step"].as_u64()? as usize,
                        observation: serde_json::from_value(record["observation"].clone())
                            .ok()?,
                        action: serde_json::from_value(record["action"].clone()).ok()?,
                        valid: record["valid"].as_bool()?,
                        agent_text: record["agent_text"].as_str()?.to_string(),
                    });
                }
                "terminal" => {
                    let t = transcripts.last_mut()?;
                    t.status = serde_json::from_value(record["status"].clone()).ok()?;
                    t.steps_used = record["steps"].as_u64()? as usize;
                }
                _ => return None,
            }
            Some(())
        };
        parse().ok_or_else(|| {
            CliError::input(format!("{}:{}: malformed transcript record", path.display(), lineno + 1))
        })?;
    }
    Ok(transcripts)
}
