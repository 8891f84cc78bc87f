//! Prompt templates shipped as text assets, one file per external prompt.
//!
//! A template is plain text with `{{ name }}` placeholders and optional
//! `<<SYSTEM>>` / `<<USER>>` role markers consumed by the live client.

use std::collections::BTreeMap;

use super::PortError;

macro_rules! asset {
    ($name:literal) => {
        ($name, include_str!(concat!("../../assets/prompts/", $name, ".txt")))
    };
}

pub const TEMPLATES: &[(&str, &str)] = &[
    asset!("generate_names"),
    asset!("generate_name_dependent"),
    asset!("generate_page"),
    asset!("insert_symbolic_refs"),
    asset!("restore_real_mapped"),
    asset!("guess_entity"),
    asset!("extract_facts"),
    asset!("single_hop_questions"),
    asset!("compose_multihop"),
    asset!("nav_links_only"),
    asset!("nav_content_links"),
    asset!("qa_closed_book"),
    asset!("qa_reading_comprehension"),
    asset!("qa_one_step_rag"),
    asset!("qa_ircot"),
];

pub fn template_text(id: &str) -> Option<&'static str> {
    TEMPLATES.iter().find(|(name, _)| *name == id).map(|(_, text)| *text)
}

/// Placeholder names referenced by a template.
pub fn placeholders(text: &str) -> Vec<String> {
    let mut names = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("{{") {
        let Some(close) = rest[open..].find("}}") else { break };
        let name = rest[open + 2..open + close].trim().to_string();
        if !name.is_empty() && !names.contains(&name) {
            names.push(name);
        }
        rest = &rest[open + close + 2..];
    }
    names
}

/// Every placeholder in the template must be bound by the request.
pub fn validate_bindings(
    template: &str,
    vars: &BTreeMap<String, serde_json::Value>,
) -> Result<(), PortError> {
    let text = template_text(template)
        .ok_or_else(|| PortError::Request { message: format!("unknown template {template}") })?;
    for name in placeholders(text) {
        if !vars.contains_key(&name) {
            return Err(PortError::Request {
                message: format!("template {template} variable {name} is unbound"),
            });
        }
    }
    Ok(())
}

fn value_text(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Substitute placeholders, returning (system message, user message).
pub fn render(
    template: &str,
    vars: &BTreeMap<String, serde_json::Value>,
) -> Result<(Option<String>, String), PortError> {
    validate_bindings(template, vars)?;
    let text = template_text(template).expect("validated");
    let mut rendered = text.to_string();
    for (name, value) in vars {
        rendered = rendered.replace(&format!("{{{{ {name} }}}}"), &value_text(value));
    }
    let (system, user) = match rendered.split_once("<<USER>>") {
        Some((head, body)) => {
            let system = head.trim().strip_prefix("<<SYSTEM>>").map(|s| s.trim().to_string());
            (system, body.trim().to_string())
        }
        None => (None, rendered.trim().to_string()),
    };
    Ok((system, user))
}
