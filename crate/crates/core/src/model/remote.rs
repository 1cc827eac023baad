//! Generic remote decision-model adapter.
//!
//! Speaks a minimal JSON contract over HTTP: the prompt bundle goes out,
//! a structured rationale comes back. Vendor specifics (authentication
//! schemes beyond a bearer token, request shaping) live behind the
//! endpoint, not here.
//!
//! Request (`POST {base_url}/decide`):
//!
//! ```json
//! {
//!   "policy": "...",
//!   "fields": [["risk", "0.523410"], ...],
//!   "narrative": "...",
//!   "framing": "standard",
//!   "feedback": null,
//!   "sampling_control": 12345
//! }
//! ```
//!
//! Response: `{"decision": "DEFER", "rationale_text": "...",
//! "pro_arguments": [...], "con_arguments": [...]}`.

use super::{DecisionModel, DeclaredMode, FeedbackNote, FramingVariant, ModelError, PromptBundle};
use crate::primitives::StructuredRationale;
use serde::{Deserialize, Serialize};
use std::time::Duration;

/// Remote endpoint configuration.
#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub base_url: String,
    pub timeout: Duration,
    /// Transport retries per call (malformed responses are not retried).
    pub retry_budget: u32,
    pub auth_token: Option<String>,
    pub declared_mode: DeclaredMode,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            base_url: "http://127.0.0.1:8099".to_string(),
            timeout: Duration::from_secs(30),
            retry_budget: 2,
            auth_token: None,
            declared_mode: DeclaredMode::Structured,
        }
    }
}

#[derive(Debug, Serialize)]
struct DecideRequest<'a> {
    policy: &'a str,
    fields: &'a [(String, String)],
    narrative: &'a str,
    framing: FramingVariant,
    feedback: &'a Option<FeedbackNote>,
    sampling_control: u64,
}

#[derive(Debug, Deserialize)]
struct DecideResponse {
    decision: String,
    rationale_text: String,
    #[serde(default)]
    pro_arguments: Vec<String>,
    #[serde(default)]
    con_arguments: Vec<String>,
}

/// HTTP adapter implementing the decision-model contract.
pub struct RemoteEndpoint {
    config: RemoteConfig,
    client: reqwest::blocking::Client,
    name: String,
}

impl RemoteEndpoint {
    pub fn new(config: RemoteConfig) -> Result<RemoteEndpoint, ModelError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| ModelError::Transport { detail: format!("client build: {e}") })?;
        let name = format!("remote:{}", config.base_url);
        Ok(RemoteEndpoint { config, client, name })
    }

    fn call_once(&self, prompt: &PromptBundle, sampling_control: u64) -> Result<StructuredRationale, ModelError> {
        let request = DecideRequest {
            policy: &prompt.policy_text,
            fields: &prompt.fields,
            narrative: &prompt.narrative,
            framing: prompt.framing,
            feedback: &prompt.feedback,
            sampling_control,
        };
        let url = format!("{}/decide", self.config.base_url.trim_end_matches('/'));
        let mut builder = self.client.post(&url).json(&request);
        if let Some(token) = &self.config.auth_token {
            builder = builder.bearer_auth(token);
        }
        let response = builder
            .send()
            .map_err(|e| ModelError::Transport { detail: format!("{url}: {e}") })?;
        let status = response.status();
        if !status.is_success() {
            return Err(ModelError::Transport { detail: format!("{url}: status {status}") });
        }
        let body: DecideResponse = response
            .json()
            .map_err(|e| ModelError::Malformed { detail: format!("undecodable response: {e}") })?;
        let decision = crate::Decision::parse(&body.decision).ok_or_else(|| ModelError::Malformed {
            detail: format!("unknown decision class {:?}", body.decision),
        })?;
        Ok(StructuredRationale {
            decision,
            rationale_text: body.rationale_text,
            pro_arguments: body.pro_arguments,
            con_arguments: body.con_arguments,
        })
    }
}

impl DecisionModel for RemoteEndpoint {
    fn decide(&self, prompt: &PromptBundle, sampling_control: u64) -> Result<StructuredRationale, ModelError> {
        let mut last = None;
        for attempt in 0..=self.config.retry_budget {
            match self.call_once(prompt, sampling_control) {
                Ok(out) => return Ok(out),
                Err(ModelError::Transport { detail }) => {
                    log::warn!("remote transport failure (attempt {attempt}): {detail}");
                    last = Some(ModelError::Transport { detail });
                }
                Err(malformed) => return Err(malformed),
            }
        }
        Err(last.unwrap_or(ModelError::Transport { detail: "no attempts made".to_string() }))
    }

    fn declared_mode(&self) -> DeclaredMode {
        self.config.declared_mode
    }

    fn deterministic(&self) -> bool {
        // The contract asks endpoints to be deterministic per control word,
        // but this adapter cannot verify it.
        false
    }

    fn name(&self) -> &str {
        &self.name
    }
}
