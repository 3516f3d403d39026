//! Chat prompt serialization and the deterministic template responder.
//! HTTP completion clients live in the engine crate and reuse
//! [`ChatPrompt`] for the request body.

mod prompt;
mod template;

pub use prompt::{build_prompt, parse_prompt, ChatPrompt, Role, Turn, DEFAULT_SYSTEM_PROMPT};
pub use template::{Responder, TemplateResponder, TemplateRule};
