use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::prompt::ChatPrompt;
use crate::error::{Error, Result};
use crate::linguistics::tokenize;

/// Produces the assistant's next turn.
pub trait Responder {
    fn respond(&self, prompt: &ChatPrompt) -> Result<String>;
}

/// Fires when the latest human turn contains any keyword as a whole word
/// (case-insensitive). Multi-word keywords match a contiguous word run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateRule {
    pub keywords: Vec<String>,
    pub reply: String,
}

/// Keyword-to-reply table. The first matching rule wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateResponder {
    pub rules: Vec<TemplateRule>,
    pub fallback: String,
}

fn rule(keywords: &[&str], reply: &str) -> TemplateRule {
    TemplateRule { keywords: keywords.iter().map(|k| String::from(*k)).collect(), reply: reply.into() }
}

impl Default for TemplateResponder {
    fn default() -> Self {
        TemplateResponder {
            rules: alloc::vec![
                rule(&["hello", "hi", "hey", "good morning", "good afternoon"], "Hello! It is lovely to talk with you. How are you feeling today?"),
                rule(&["bye", "goodbye", "good night"], "Goodbye for now. I enjoyed our chat."),
                rule(&["thank", "thanks"], "You are very welcome."),
                rule(&["tired", "sleepy"], "It sounds like you could use some rest. Did you sleep well last night?"),
                rule(&["sad", "lonely", "upset"], "I am sorry you feel that way. Would you like to tell me more about it?"),
                rule(&["garden", "flowers", "plants"], "Gardens are wonderful. What did you like to grow?"),
                rule(&["family", "daughter", "son", "grandchildren", "wife", "husband"], "Family is so important. Tell me about them."),
                rule(&["food", "lunch", "dinner", "breakfast", "cook", "soup"], "That sounds tasty. What is your favourite meal?"),
                rule(&["music", "song", "sing", "dance"], "I love music too. Which songs do you enjoy?"),
                rule(&["weather", "rain", "sunny", "snow"], "The weather can change our whole day. Do you like to go outside?"),
            ],
            fallback: "That is interesting. Can you tell me more?".into(),
        }
    }
}

impl TemplateResponder {
    pub fn validate(&self) -> Result<()> {
        if self.fallback.trim().is_empty() || self.rules.iter().any(|r| r.reply.trim().is_empty()) {
            return Err(Error::invalid("template replies must be non-empty"));
        }
        Ok(())
    }

    /// Reply for one human utterance.
    pub fn reply_to(&self, text: &str) -> &str {
        let words: Vec<String> = tokenize(text)
            .into_iter()
            .filter(|t| t.is_word())
            .map(|t| t.surface.to_lowercase())
            .collect();
        let matches = |kw: &str| {
            let kw: Vec<String> = kw.split_whitespace().map(str::to_lowercase).collect();
            !kw.is_empty() && words.windows(kw.len()).any(|w| w == kw.as_slice())
        };
        self.rules
            .iter()
            .find(|r| r.keywords.iter().any(|k| matches(k)))
            .map_or(self.fallback.as_str(), |r| r.reply.as_str())
    }
}

impl Responder for TemplateResponder {
    fn respond(&self, prompt: &ChatPrompt) -> Result<String> {
        Ok(String::from(self.reply_to(prompt.last_human().unwrap_or(""))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::Turn;

    fn ask(text: &str) -> String {
        let p = ChatPrompt::new("s", alloc::vec![Turn::human(text)]).unwrap();
        TemplateResponder::default().respond(&p).unwrap()
    }

    #[test]
    fn greeting_and_fallback() {
        assert!(ask("Hello there").starts_with("Hello!"));
        assert!(ask("HI").starts_with("Hello!"));
        assert_eq!(ask("Hello there"), ask("Hello there"));
        assert_eq!(ask("quantum chromodynamics"), TemplateResponder::default().fallback);
        // Whole words only: "this" does not contain the keyword "hi".
        assert_eq!(ask("this"), TemplateResponder::default().fallback);
        assert!(ask("good morning to you").starts_with("Hello!"));
    }

    #[test]
    fn replies_are_nonempty() {
        let t = TemplateResponder::default();
        t.validate().unwrap();
        let p = ChatPrompt::new("s", alloc::vec![]).unwrap();
        assert!(!t.respond(&p).unwrap().is_empty());
        let bad = TemplateResponder { rules: alloc::vec![], fallback: " ".into() };
        assert!(bad.validate().is_err());
    }
}
