//! Prompt construction for location-aware question generation, LLM
//! backends (seeded stub and HTTP adapter), and numbered-list parsing.

pub mod error;
pub mod generate;
pub mod llm;
pub mod parse;
pub mod prompts;

pub use error::{LlmError, PromptError};
pub use generate::{generate_raw, Generation, LlmRunner, ResponseCache};
pub use llm::{LlmBackend, LlmClient, LlmConfig, LlmRequest, LlmResponse, OpenAiClient, StubLlm, TokenUsage};
pub use parse::parse_questions;
pub use prompts::{
    build_prompts, build_prompts_with_count, generation_input, location_description, sanitize_slot,
    PromptPair, GENERATION_PREFIX, SYSTEM_PROMPT,
};
