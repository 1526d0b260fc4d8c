use locavqg_core::{CaptionedTask, Direction};
use serde::{Deserialize, Serialize};

pub const SYSTEM_PROMPT: &str = "You are a tour guide and you are driving in a car with your tourists. You want to engage with them with any kind of information you have around you.";

const CHAT_PREAMBLE: &str = "Here are some descriptions of your surroundings";

/// Prefix prepended to seq2seq generator inputs.
pub const GENERATION_PREFIX: &str = "generate questions:";

pub const DEFAULT_QUESTION_COUNT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptPair {
    pub system_prompt: String,
    pub chat_prompt: String,
}

/// Replaces line breaks with single spaces so a slot value stays on one line.
pub fn sanitize_slot(s: &str) -> String {
    s.replace("\r\n", " ").replace(['\n', '\r'], " ")
}

fn address_sentence(ct: &CaptionedTask) -> String {
    format!("You are currently driving on {}.", sanitize_slot(&ct.address))
}

fn direction_clauses(ct: &CaptionedTask) -> Vec<String> {
    Direction::ALL
        .iter()
        .map(|&d| format!("On your {}, {}", d.title(), sanitize_slot(ct.caption(d))))
        .collect()
}

/// The location description shared by the chat prompt and the generator
/// input: optional address sentence, then the four captions in N, E, S, W
/// order. No terminal period after the last caption.
pub fn location_description(ct: &CaptionedTask, include_address: bool) -> String {
    let mut parts = Vec::with_capacity(2);
    if include_address {
        parts.push(address_sentence(ct));
    }
    parts.push(direction_clauses(ct).join(". "));
    parts.join(" ")
}

/// Seq2seq generator input: the prefix followed by the location description.
pub fn generation_input(ct: &CaptionedTask, include_address: bool) -> String {
    format!(
        "{GENERATION_PREFIX} {}",
        location_description(ct, include_address)
    )
}

pub fn build_prompts_with_count(
    ct: &CaptionedTask,
    include_address: bool,
    count: usize,
) -> PromptPair {
    let chat_prompt = format!(
        "{CHAT_PREAMBLE} {}. Based on those descriptions, please ask {count} engaging questions.",
        location_description(ct, include_address)
    );
    PromptPair {
        system_prompt: SYSTEM_PROMPT.to_string(),
        chat_prompt,
    }
}

/// System and chat prompts for one task, asking for ten questions. With
/// `include_address` off the address sentence is left out.
pub fn build_prompts(ct: &CaptionedTask, include_address: bool) -> PromptPair {
    build_prompts_with_count(ct, include_address, DEFAULT_QUESTION_COUNT)
}
