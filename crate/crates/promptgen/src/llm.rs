//! LLM backends: the request/response types, a seeded template stub and an
//! OpenAI-compatible chat-completions adapter.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LlmError, PromptError};
use crate::prompts::{PromptPair, DEFAULT_QUESTION_COUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlmBackend {
    RemoteLlm,
    Stub,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmConfig {
    pub backend: LlmBackend,
    pub model: String,
    pub temperature: f64,
    pub presence_penalty: f64,
    pub max_questions: usize,
    /// Seed for the stub backend.
    pub seed: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            backend: LlmBackend::Stub,
            model: "gpt-4".into(),
            temperature: 0.7,
            presence_penalty: 0.1,
            max_questions: DEFAULT_QUESTION_COUNT,
            seed: 0,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), PromptError> {
        if !(self.temperature >= 0.0) {
            return Err(PromptError::InvalidConfig(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_questions < 1 {
            return Err(PromptError::InvalidConfig(
                "max_questions must be >= 1".into(),
            ));
        }
        Ok(())
    }

    pub fn request(&self, prompts: &PromptPair) -> LlmRequest {
        LlmRequest {
            model: self.model.clone(),
            system: prompts.system_prompt.clone(),
            chat: prompts.chat_prompt.clone(),
            temperature: self.temperature,
            presence_penalty: self.presence_penalty,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmRequest {
    pub model: String,
    pub system: String,
    pub chat: String,
    pub temperature: f64,
    pub presence_penalty: f64,
}

impl LlmRequest {
    /// Content hash used as the response-cache key.
    pub fn cache_key(&self, backend_id: &str) -> String {
        let mut h = Sha256::new();
        h.update(backend_id.as_bytes());
        h.update([0u8]);
        h.update(serde_json::to_vec(self).expect("request serializes"));
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<TokenUsage>,
}

pub trait LlmClient: Send + Sync {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError>;

    /// Identifier that participates in cache keys and request logs.
    fn id(&self) -> String;
}

impl<C: LlmClient + ?Sized> LlmClient for Box<C> {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        (**self).complete(request)
    }

    fn id(&self) -> String {
        (**self).id()
    }
}

/// Offline backend that answers with a numbered list drawn from a bank of
/// engaging and factoid templates, filled from the prompt's address and
/// captions. Output depends only on the seed and the request.
#[derive(Debug, Clone)]
pub struct StubLlm {
    pub seed: u64,
    /// Probability that an item is drawn from the engaging bank.
    pub engaging_rate: f64,
}

impl StubLlm {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            engaging_rate: 0.7,
        }
    }
}

const ENGAGING_TEMPLATES: &[&str] = &[
    "As we drive along {address}, can you guess what {caption} on our {dir} might be used for?",
    "Looking at {caption} to the {dir}, what do you imagine everyday life is like around here?",
    "Have you noticed {caption} on our {dir}? What would you most like to explore there?",
    "Can you spot anything surprising about {caption} on the {dir} side?",
    "Did you know that streets like {street} often hide local stories? What do you think happened here?",
    "What do you think makes {city} special compared to other places you have visited?",
    "If you could spend an afternoon near {caption}, what would you do and why?",
    "Considering {caption} on our {dir}, how do you think this neighborhood has changed over the years?",
];

const FACTOID_TEMPLATES: &[&str] = &[
    "In what year was the building at {address} constructed?",
    "What is the exact height of {caption}?",
    "How many lanes does the road on the {dir} have?",
    "Which company manufactured {caption}?",
    "What is the postal code of {street}?",
];

struct PromptSlots {
    address: String,
    captions: Vec<(String, String)>,
}

fn extract_slots(chat: &str) -> PromptSlots {
    let address = chat
        .split_once("driving on ")
        .and_then(|(_, rest)| rest.split_once(". On your"))
        .map(|(a, _)| a.to_string())
        .unwrap_or_else(|| "this street".to_string());
    let mut captions = Vec::new();
    for dir in ["North", "East", "South", "West"] {
        let marker = format!("On your {dir}, ");
        if let Some((_, rest)) = chat.split_once(&marker) {
            let end = [". On your ", ". Based on those descriptions"]
                .iter()
                .filter_map(|m| rest.find(m))
                .min()
                .unwrap_or(rest.len());
            captions.push((dir.to_lowercase(), rest[..end].to_string()));
        }
    }
    if captions.is_empty() {
        captions.push(("north".into(), "the street ahead".into()));
    }
    PromptSlots { address, captions }
}

fn requested_count(chat: &str) -> usize {
    chat.rsplit_once("please ask ")
        .and_then(|(_, rest)| rest.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .unwrap_or(DEFAULT_QUESTION_COUNT)
}

impl StubLlm {
    fn render(&self, template: &str, slots: &PromptSlots, rng: &mut ChaCha8Rng) -> String {
        let (dir, caption) = slots.captions.choose(rng).expect("at least one caption");
        let street = slots
            .address
            .split(',')
            .next()
            .unwrap_or(&slots.address)
            .trim()
            .to_string();
        let city = slots
            .address
            .split(',')
            .nth(1)
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .unwrap_or("this city");
        template
            .replace("{address}", &slots.address)
            .replace("{street}", &street)
            .replace("{city}", city)
            .replace("{dir}", dir)
            .replace("{caption}", caption)
    }
}

impl LlmClient for StubLlm {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(request.chat.as_bytes());
        let digest = h.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest);
        let mut rng = ChaCha8Rng::from_seed(seed);

        let slots = extract_slots(&request.chat);
        let n = requested_count(&request.chat);
        let mut lines = Vec::with_capacity(n);
        for i in 0..n {
            let bank = if rng.gen_bool(self.engaging_rate) {
                ENGAGING_TEMPLATES
            } else {
                FACTOID_TEMPLATES
            };
            let t = bank.choose(&mut rng).expect("non-empty bank");
            lines.push(format!("{}. {}", i + 1, self.render(t, &slots, &mut rng)));
        }
        let text = lines.join("\n");
        let prompt_tokens = (request.system.split_whitespace().count()
            + request.chat.split_whitespace().count()) as u64;
        let completion_tokens = text.split_whitespace().count() as u64;
        Ok(LlmResponse {
            text,
            usage: Some(TokenUsage {
                prompt_tokens,
                completion_tokens,
                total_tokens: prompt_tokens + completion_tokens,
            }),
        })
    }

    fn id(&self) -> String {
        format!("stub-llm-v1:seed={}", self.seed)
    }
}

/// Chat-completions client for OpenAI-compatible endpoints.
pub struct OpenAiClient {
    base_url: String,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl OpenAiClient {
    pub const KEY_VAR: &'static str = "OPENAI_API_KEY";

    /// Reads the API key from `OPENAI_API_KEY`; `OPENAI_BASE_URL` overrides
    /// the endpoint.
    pub fn from_env() -> Result<Self, LlmError> {
        let api_key = std::env::var(Self::KEY_VAR).map_err(|_| LlmError::MissingKey(Self::KEY_VAR))?;
        let base_url = std::env::var("OPENAI_BASE_URL")
            .unwrap_or_else(|_| "https://api.openai.com".to_string());
        Self::new(base_url, api_key)
    }

    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Result<Self, LlmError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(120))
            .build()
            .map_err(|e| LlmError::Http(e.to_string()))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            http,
        })
    }

    pub fn request_body(request: &LlmRequest) -> serde_json::Value {
        serde_json::json!({
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.chat},
            ],
            "temperature": request.temperature,
            "presence_penalty": request.presence_penalty,
        })
    }

    pub fn parse_body(body: &serde_json::Value) -> Result<LlmResponse, LlmError> {
        let text = body["choices"][0]["message"]["content"]
            .as_str()
            .ok_or_else(|| LlmError::Malformed("no choices[0].message.content".into()))?
            .to_string();
        let usage = body.get("usage").and_then(|u| {
            Some(TokenUsage {
                prompt_tokens: u["prompt_tokens"].as_u64()?,
                completion_tokens: u["completion_tokens"].as_u64()?,
                total_tokens: u["total_tokens"].as_u64()?,
            })
        });
        Ok(LlmResponse { text, usage })
    }
}

impl LlmClient for OpenAiClient {
    fn complete(&self, request: &LlmRequest) -> Result<LlmResponse, LlmError> {
        let resp = self
            .http
            .post(format!("{}/v1/chat/completions", self.base_url))
            .bearer_auth(&self.api_key)
            .json(&Self::request_body(request))
            .send()
            .map_err(|e| LlmError::Http(e.to_string()))?;
        let status = resp.status();
        let text = resp.text().map_err(|e| LlmError::Http(e.to_string()))?;
        if !status.is_success() {
            return Err(LlmError::Status {
                status: status.as_u16(),
                body: text,
            });
        }
        let body: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| LlmError::Malformed(e.to_string()))?;
        Self::parse_body(&body)
    }

    fn id(&self) -> String {
        format!("openai-chat:{}", self.base_url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_questions;

    fn request(chat: &str) -> LlmRequest {
        LlmConfig::default().request(&PromptPair {
            system_prompt: "sys".into(),
            chat_prompt: chat.into(),
        })
    }

    const CHAT: &str = "Here are some descriptions of your surroundings You are currently driving on 1250 Penn Ave, Pittsburgh, PA 15222, USA. On your North, a brick building. On your East, a parking lot. On your South, a bridge over a river. On your West, a row of houses. Based on those descriptions, please ask 10 engaging questions.";

    #[test]
    fn defaults_match_generation_settings() {
        let c = LlmConfig::default();
        assert_eq!(c.temperature, 0.7);
        assert_eq!(c.presence_penalty, 0.1);
        assert_eq!(c.max_questions, 10);
        assert!(c.validate().is_ok());
        let bad = LlmConfig {
            temperature: -1.0,
            ..c.clone()
        };
        assert!(bad.validate().is_err());
        let bad = LlmConfig {
            max_questions: 0,
            ..c
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn stub_is_deterministic_and_parseable() {
        let stub = StubLlm::new(7);
        let a = stub.complete(&request(CHAT)).unwrap();
        let b = stub.complete(&request(CHAT)).unwrap();
        assert_eq!(a, b);
        let qs = parse_questions(&a.text, 10, "t").unwrap();
        assert_eq!(qs.len(), 10);
        assert!(a.usage.is_some());
        let other = StubLlm::new(8).complete(&request(CHAT)).unwrap();
        assert_ne!(a.text, other.text);
    }

    #[test]
    fn stub_fills_slots_from_prompt() {
        let slots = extract_slots(CHAT);
        assert_eq!(slots.address, "1250 Penn Ave, Pittsburgh, PA 15222, USA");
        assert_eq!(slots.captions.len(), 4);
        assert_eq!(slots.captions[2], ("south".into(), "a bridge over a river".into()));
        assert_eq!(requested_count(CHAT), 10);
    }

    #[test]
    fn openai_body_round_trip() {
        let req = request(CHAT);
        let body = OpenAiClient::request_body(&req);
        assert_eq!(body["temperature"], 0.7);
        assert_eq!(body["presence_penalty"], 0.1);
        assert_eq!(body["messages"][1]["content"], CHAT);
        let resp = serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": "1. Hi?"}}],
            "usage": {"prompt_tokens": 5, "completion_tokens": 2, "total_tokens": 7}
        });
        let parsed = OpenAiClient::parse_body(&resp).unwrap();
        assert_eq!(parsed.text, "1. Hi?");
        assert_eq!(parsed.usage.unwrap().total_tokens, 7);
        assert!(OpenAiClient::parse_body(&serde_json::json!({})).is_err());
    }

    #[test]
    fn cache_key_depends_on_sampling_settings() {
        let a = request(CHAT);
        let mut b = a.clone();
        b.temperature = 0.8;
        assert_ne!(a.cache_key("x"), b.cache_key("x"));
        assert_ne!(a.cache_key("x"), a.cache_key("y"));
        assert_eq!(a.cache_key("x"), a.clone().cache_key("x"));
    }
}
