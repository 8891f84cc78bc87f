//! Live client: renders the prompt template and speaks a minimal
//! chat-completion wire shape over HTTPS.

use serde::Deserialize;

use super::{templates, Backend, GenerationRequest, PortError, PortKind};

pub const BACKEND_NAME: &str = "http";

/// Endpoint configuration, conventionally read from the environment.
#[derive(Debug, Clone)]
pub struct LiveConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key: String,
    /// Upper bound for concurrent in-flight calls when a caller fans out.
    pub in_flight: usize,
}

impl LiveConfig {
    pub const ENDPOINT_VAR: &'static str = "KGTWIN_ENDPOINT";
    pub const MODEL_VAR: &'static str = "KGTWIN_MODEL";
    pub const API_KEY_VAR: &'static str = "KGTWIN_API_KEY";
    pub const IN_FLIGHT_VAR: &'static str = "KGTWIN_IN_FLIGHT";

    pub fn from_env() -> Result<Self, PortError> {
        let get = |var: &str| {
            std::env::var(var).map_err(|_| PortError::Request {
                message: format!("environment variable {var} is not set"),
            })
        };
        Ok(LiveConfig {
            endpoint: get(Self::ENDPOINT_VAR)?,
            model: get(Self::MODEL_VAR)?,
            api_key: get(Self::API_KEY_VAR)?,
            in_flight: std::env::var(Self::IN_FLIGHT_VAR)
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(4),
        })
    }
}

pub struct HttpBackend {
    config: LiveConfig,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(config: LiveConfig) -> Self {
        HttpBackend { config, client: reqwest::blocking::Client::new() }
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl Backend for HttpBackend {
    fn name(&self) -> &'static str {
        BACKEND_NAME
    }

    fn complete(&self, _port: PortKind, req: &GenerationRequest) -> Result<String, PortError> {
        let (system, user) = templates::render(&req.template, &req.vars)?;
        let mut messages = Vec::new();
        if let Some(system) = system {
            messages.push(serde_json::json!({"role": "system", "content": system}));
        }
        messages.push(serde_json::json!({"role": "user", "content": user}));
        let mut body = serde_json::json!({
            "model": self.config.model,
            "messages": messages,
        });
        if let Some(max_len) = req.max_len {
            body["max_tokens"] = serde_json::json!(max_len);
        }
        let response = self
            .client
            .post(format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/')))
            .bearer_auth(&self.config.api_key)
            .json(&body)
            .send()
            .map_err(|e| PortError::Transport { message: e.to_string() })?;
        if !response.status().is_success() {
            return Err(PortError::Transport {
                message: format!("status {}", response.status()),
            });
        }
        let parsed: ChatResponse = response
            .json()
            .map_err(|e| PortError::Malformed { message: e.to_string() })?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| PortError::Malformed { message: "empty choices".into() })
    }
}
