//! Pipeline configuration: one TOML file covering every stage, with flag
//! overrides for seeds and port mode.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use kgtwin_core::corpus::Thresholds;
use kgtwin_core::kg::{EntityId, FilterConfig};
use kgtwin_core::ports::mock::MockProfile;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub input: InputConfig,
    pub filter: FilterConfig,
    pub sampler: SamplerSection,
    pub perturb: PerturbSection,
    pub corpus: CorpusSection,
    pub qa: QaSection,
    pub nav: NavSection,
    pub ports: PortsSection,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct InputConfig {
    pub entities: Option<PathBuf>,
    pub facts: Option<PathBuf>,
    pub relations: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerSection {
    pub seeds: Vec<String>,
    pub iterations: u32,
    pub uniformity: f64,
    pub k: u32,
    pub per_node_cap: u32,
    pub rng_seed: u64,
}

impl Default for SamplerSection {
    fn default() -> Self {
        SamplerSection {
            seeds: Vec::new(),
            iterations: 11,
            uniformity: 0.6,
            k: 19,
            per_node_cap: 32,
            rng_seed: 0,
        }
    }
}

impl SamplerSection {
    pub fn to_core(&self) -> kgtwin_core::sampler::SamplerConfig {
        kgtwin_core::sampler::SamplerConfig {
            seeds: self.seeds.iter().map(|s| EntityId::new(s.clone())).collect(),
            iterations: self.iterations,
            uniformity: self.uniformity,
            k: self.k,
            per_node_cap: self.per_node_cap,
            rng_seed: self.rng_seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbSection {
    pub delta_years: i64,
    pub retry_cap: u32,
    pub candidates_per_call: u32,
}

impl Default for PerturbSection {
    fn default() -> Self {
        PerturbSection { delta_years: 39, retry_cap: 5, candidates_per_call: 4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CorpusSection {
    pub draft_threshold: f64,
    pub pair_threshold: f64,
    pub transport_retry_cap: u32,
}

impl Default for CorpusSection {
    fn default() -> Self {
        CorpusSection { draft_threshold: 0.95, pair_threshold: 0.85, transport_retry_cap: 2 }
    }
}

impl CorpusSection {
    pub fn to_core(&self) -> kgtwin_core::corpus::CorpusConfig {
        kgtwin_core::corpus::CorpusConfig {
            thresholds: Thresholds {
                draft_similarity: self.draft_threshold,
                pair_similarity: self.pair_threshold,
            },
            transport_retry_cap: self.transport_retry_cap,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct QaSection {
    pub budget_per_motif: usize,
    pub rng_seed: u64,
    pub retry_cap: u32,
    /// Optional path to a motif-catalog JSON; the built-in six shapes
    /// otherwise.
    pub motif_catalog: Option<PathBuf>,
}

impl Default for QaSection {
    fn default() -> Self {
        QaSection { budget_per_motif: 200, rng_seed: 0, retry_cap: 2, motif_catalog: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NavSection {
    pub per_bucket: usize,
    pub rng_seed: u64,
    pub attempt_factor: usize,
}

impl Default for NavSection {
    fn default() -> Self {
        NavSection { per_bucket: 200, rng_seed: 0, attempt_factor: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PortMode {
    Mock,
    Live,
    Replay,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct PortsSection {
    pub mode: PortMode,
    pub replay_log: Option<PathBuf>,
    pub in_flight: usize,
    pub mock: MockProfile,
}

impl Default for PortsSection {
    fn default() -> Self {
        PortsSection {
            mode: PortMode::Mock,
            replay_log: None,
            in_flight: 4,
            mock: MockProfile::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&content)
            .map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
    }

    /// Apply command-line overrides: a global seed reseeds every stage
    /// deterministically, and --mock forces the mock port mode.
    pub fn apply_overrides(
        &mut self,
        seed: Option<u64>,
        mock: bool,
        in_flight: Option<usize>,
        replay: Option<PathBuf>,
    ) {
        if let Some(seed) = seed {
            self.sampler.rng_seed = seed;
            self.qa.rng_seed = seed.wrapping_add(1);
            self.nav.rng_seed = seed.wrapping_add(2);
        }
        if mock {
            self.ports.mode = PortMode::Mock;
        }
        if let Some(n) = in_flight {
            self.ports.in_flight = n;
        }
        if let Some(log) = replay {
            self.ports.mode = PortMode::Replay;
            self.ports.replay_log = Some(log);
        }
    }
}
