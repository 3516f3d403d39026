use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SYSTEM: &str = "</System/>\n";
const HUMAN: &str = "</Human user/>\n";
const ASSISTANT: &str = "</AI assistant/>\n";
const END: &str = " </end/>\n";
const END_TAG: &str = "</end/>";

pub const DEFAULT_SYSTEM_PROMPT: &str =
    "You are a socially assistive robot designed to respond to people with\ndementia in a friendly manner.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Role {
    Human,
    Assistant,
}

impl Role {
    fn header(self) -> &'static str {
        match self {
            Role::Human => HUMAN,
            Role::Assistant => ASSISTANT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub role: Role,
    pub text: String,
}

impl Turn {
    pub fn human(text: impl Into<String>) -> Self {
        Turn { role: Role::Human, text: text.into() }
    }

    pub fn assistant(text: impl Into<String>) -> Self {
        Turn { role: Role::Assistant, text: text.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatPrompt {
    pub system_text: String,
    pub turns: Vec<Turn>,
}

fn check_text(text: &str) -> Result<()> {
    if text.contains(END_TAG) {
        return Err(Error::invalid("prompt text may not contain the end marker"));
    }
    Ok(())
}

impl ChatPrompt {
    pub fn new(system_text: impl Into<String>, turns: Vec<Turn>) -> Result<Self> {
        let p = ChatPrompt { system_text: system_text.into(), turns };
        p.validate()?;
        Ok(p)
    }

    /// Roles alternate, starting with the human.
    pub fn validate(&self) -> Result<()> {
        check_text(&self.system_text)?;
        let mut expect = Role::Human;
        for (i, t) in self.turns.iter().enumerate() {
            check_text(&t.text)?;
            if t.role != expect {
                return Err(Error::invalid(alloc::format!("turn {i} breaks role alternation")));
            }
            expect = if expect == Role::Human { Role::Assistant } else { Role::Human };
        }
        Ok(())
    }

    /// The latest human turn, the one a reply answers.
    pub fn last_human(&self) -> Option<&str> {
        self.turns.iter().rev().find(|t| t.role == Role::Human).map(|t| t.text.as_str())
    }

    /// Keeps the system text and at most the last `n` turns, still starting
    /// with a human turn.
    pub fn truncated(&self, n: usize) -> ChatPrompt {
        let mut start = self.turns.len().saturating_sub(n);
        while start < self.turns.len() && self.turns[start].role != Role::Human {
            start += 1;
        }
        ChatPrompt { system_text: self.system_text.clone(), turns: self.turns[start..].to_vec() }
    }

    pub fn serialize(&self) -> Result<String> {
        self.validate()?;
        let mut s = String::with_capacity(
            64 + self.system_text.len() + self.turns.iter().map(|t| t.text.len() + 32).sum::<usize>(),
        );
        s.push_str(SYSTEM);
        s.push_str(&self.system_text);
        s.push_str(END);
        for t in &self.turns {
            s.push_str(t.role.header());
            s.push_str(&t.text);
            s.push_str(END);
        }
        s.push_str(ASSISTANT);
        Ok(s)
    }
}

/// Serializes a prompt that ends with an open assistant header.
pub fn build_prompt(system_text: &str, turns: &[Turn]) -> Result<String> {
    ChatPrompt { system_text: system_text.into(), turns: turns.to_vec() }.serialize()
}

/// Inverse of [`build_prompt`].
pub fn parse_prompt(s: &str) -> Result<ChatPrompt> {
    fn block<'a>(s: &'a str, header: &str) -> Option<(&'a str, &'a str)> {
        let rest = s.strip_prefix(header)?;
        let end = rest.find(END_TAG)?;
        let text = rest[..end].strip_suffix(' ')?;
        let after = rest[end..].strip_prefix("</end/>\n")?;
        Some((text, after))
    }
    let bad = |what: &str| Error::parse(0, alloc::format!("malformed prompt: {what}"));
    let (system, mut rest) = block(s, SYSTEM).ok_or_else(|| bad("system block"))?;
    let mut turns = Vec::new();
    loop {
        if rest == ASSISTANT {
            break;
        }
        let (role, (text, after)) = if let Some(b) = block(rest, HUMAN) {
            (Role::Human, b)
        } else if let Some(b) = block(rest, ASSISTANT) {
            (Role::Assistant, b)
        } else {
            return Err(bad("turn block"));
        };
        turns.push(Turn { role, text: text.into() });
        rest = after;
    }
    ChatPrompt::new(system, turns)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generic_example() {
        let turns = [Turn::human("Hello. How are you?")];
        let s = build_prompt(DEFAULT_SYSTEM_PROMPT, &turns).unwrap();
        assert_eq!(
            s,
            "</System/>\nYou are a socially assistive robot designed to respond to people with\n\
             dementia in a friendly manner. </end/>\n</Human user/>\nHello. How are you? </end/>\n\
             </AI assistant/>\n"
        );
        let full = build_prompt(
            DEFAULT_SYSTEM_PROMPT,
            &[turns[0].clone(), Turn::assistant("Hello, I am fine, I am AI assistant, how can I help you?")],
        )
        .unwrap();
        assert!(full.ends_with("how can I help you? </end/>\n</AI assistant/>\n"));
    }

    #[test]
    fn empty_turns() {
        assert_eq!(build_prompt("Be kind.", &[]).unwrap(), "</System/>\nBe kind. </end/>\n</AI assistant/>\n");
    }

    #[test]
    fn rejects_bad_turns() {
        assert!(build_prompt("s", &[Turn::human("a"), Turn::human("b")]).is_err());
        assert!(build_prompt("s", &[Turn::assistant("a")]).is_err());
        assert!(build_prompt("s", &[Turn::human("x </end/> y")]).is_err());
        assert!(parse_prompt("nonsense").is_err());
        assert!(parse_prompt("</System/>\ns </end/>\n").is_err());
    }

    #[test]
    fn truncation_keeps_human_first() {
        let p = ChatPrompt::new(
            "s",
            alloc::vec![Turn::human("a"), Turn::assistant("b"), Turn::human("c"), Turn::assistant("d"), Turn::human("e")],
        )
        .unwrap();
        let t = p.truncated(4);
        assert_eq!(t.turns.first().unwrap().text, "c");
        t.validate().unwrap();
        assert_eq!(p.last_human(), Some("e"));
    }

    fn prompt_strategy() -> impl proptest::strategy::Strategy<Value = ChatPrompt> {
        use proptest::prelude::*;
        ("[ -~\n]{0,30}", proptest::collection::vec("[ -~\n]{0,20}", 0..6)).prop_map(|(sys, texts)| {
            let turns = texts
                .into_iter()
                .enumerate()
                .map(|(i, t)| Turn { role: if i % 2 == 0 { Role::Human } else { Role::Assistant }, text: t })
                .collect();
            ChatPrompt { system_text: sys, turns }
        })
    }

    proptest::proptest! {
        #[test]
        fn round_trip(p in prompt_strategy()) {
            proptest::prop_assume!(p.validate().is_ok());
            let s = p.serialize().unwrap();
            proptest::prop_assert_eq!(parse_prompt(&s).unwrap(), p);
        }

        #[test]
        fn injective(a in prompt_strategy(), b in prompt_strategy()) {
            proptest::prop_assume!(a.validate().is_ok() && b.validate().is_ok() && a != b);
            proptest::prop_assert_ne!(a.serialize().unwrap(), b.serialize().unwrap());
        }
    }
}
