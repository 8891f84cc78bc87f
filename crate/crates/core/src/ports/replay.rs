//! Cassette playback: answer calls from a previously recorded call log.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::path::Path;
use std::sync::Mutex;

use super::{Backend, CallRecord, GenerationRequest, PortError, PortKind};

pub const BACKEND_NAME: &str = "replay";

pub struct ReplayBackend {
    by_hash: Mutex<HashMap<String, VecDeque<String>>>,
}

impl ReplayBackend {
    pub fn from_records(records: Vec<CallRecord>) -> Self {
        let mut by_hash: HashMap<String, VecDeque<String>> = HashMap::new();
        for record in records {
            by_hash.entry(record.request_hash).or_default().push_back(record.response);
        }
        ReplayBackend { by_hash: Mutex::new(by_hash) }
    }

    pub fn from_log(path: &Path) -> std::io::Result<Self> {
        let content = std::fs::read_to_string(path)?;
        let mut records = Vec::new();
        for line in content.lines() {
            if line.trim().is_empty() {
                continue;
            }
            let record: CallRecord = serde_json::from_str(line).map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())
            })?;
            records.push(record);
        }
        Ok(ReplayBackend::from_records(records))
    }
}

impl Backend for ReplayBackend {
    fn name(&self) -> &'static str {
        BACKEND_NAME
    }

    fn complete(&self, _port: PortKind, req: &GenerationRequest) -> Result<String, PortError> {
        let hash = req.hash();
        let mut by_hash = self.by_hash.lock().expect("replay state");
        by_hash
            .get_mut(&hash)
            .and_then(|queue| queue.pop_front())
            .ok_or(PortError::ReplayMiss { hash })
    }
}
