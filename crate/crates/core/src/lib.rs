//! Core library for building parallel real-mapped (RM) and synth-mapped (SM)
//! corpora from a knowledge graph, deriving paired multi-hop QA and page
//! navigation tasks from them, and scoring the knowledge-advantage gap
//! between the two variants.
//!
//! The pipeline runs in stages, each backed by one module:
//!
//! 1. [`kg`] - ingest and filter the source knowledge graph.
//! 2. [`sampler`] - sample a connected, well-knit universe subgraph.
//! 3. [`perturb`] - rename named entities along the name-dependency DAG and
//!    shift timestamps, producing the synth-mapped universe.
//! 4. [`corpus`] - generate parallel documents with symbolic references and
//!    enforce the similarity/novelty gates.
//! 5. [`qa`] - validate expressed facts, sample reasoning motifs, and compose
//!    paired multi-hop questions.
//! 6. [`nav`] - build the hyperlink document graph and sample navigation
//!    pairs bucketed by expected random-walk distance.
//! 7. [`env`] - the interactive navigation environment and agent harness.
//! 8. [`eval`] - metrics (token F1, recall@k, success rate) and
//!    knowledge-advantage reports.
//!
//! All external text generation goes through [`ports`], which provides
//! deterministic mocks, a record/replay call log, and a live HTTP client
//! behind one uniform contract.

pub mod corpus;
pub mod env;
pub mod eval;
pub mod fixture;
pub mod kg;
pub mod nav;
pub mod perturb;
pub mod ports;
pub mod qa;
pub mod sampler;
pub mod text;

/// Hex-encoded SHA-256 of a byte slice; used for content fingerprints
/// throughout the pipeline (provenance, manifests, call hashes).
pub fn fingerprint(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write;
        let _ = write!(out, "{b:02x}");
    }
    out
}
