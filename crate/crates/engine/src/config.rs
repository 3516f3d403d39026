//! Engine configuration: one TOML file plus `COGSPEECH_*` environment
//! overrides. Relative paths in the file resolve against its directory.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use cogspeech_core::dialogue::{TemplateResponder, DEFAULT_SYSTEM_PROMPT};
use cogspeech_core::dsp::FrameConfig;
use cogspeech_core::scoring::ScoringConfig;
use cogspeech_core::stats::TTestKind;
use cogspeech_core::CutoffTable;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub host: String,
    pub port: u16,
    pub log_dir: PathBuf,
    /// Store utterance text in session logs. Off by default.
    pub history: bool,
    /// Longest accepted audio chunk.
    pub max_chunk_ms: u64,
    /// Conversation turns kept in the prompt.
    pub dialogue_turns: usize,
    /// Detached sessions are closed after this long.
    pub idle_timeout_s: u64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            host: "127.0.0.1".into(),
            port: 8765,
            log_dir: PathBuf::from("sessions"),
            history: false,
            max_chunk_ms: 1000,
            dialogue_turns: 8,
            idle_timeout_s: 600,
        }
    }
}

/// Optional model and lexicon files; bundled defaults are used when unset.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelPaths {
    pub grammar: Option<PathBuf>,
    pub prosody: Option<PathBuf>,
    pub pronunciation: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub registry: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponderKind {
    #[default]
    Template,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DialogueConfig {
    pub responder: ResponderKind,
    pub system_prompt: String,
    pub deadline_ms: u64,
    pub max_tokens: u32,
    pub remote_url: Option<String>,
    /// Answer from the template table when the remote responder fails.
    pub fallback: bool,
    pub templates: TemplateResponder,
}

impl Default for DialogueConfig {
    fn default() -> Self {
        DialogueConfig {
            responder: ResponderKind::Template,
            system_prompt: DEFAULT_SYSTEM_PROMPT.trim_end().into(),
            deadline_ms: 1200,
            max_tokens: 128,
            remote_url: None,
            fallback: true,
            templates: TemplateResponder::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub alpha: f64,
    pub ttest: TTestKind,
    pub cutoffs: CutoffTable,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { alpha: cogspeech_core::analysis::DEFAULT_ALPHA, ttest: TTestKind::Welch, cutoffs: CutoffTable::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub server: ServerConfig,
    /// Scoring for live sessions.
    pub live: ScoringConfig,
    /// Scoring for corpus runs.
    pub batch: ScoringConfig,
    pub frames: FrameConfig,
    pub models: ModelPaths,
    pub dialogue: DialogueConfig,
    pub analysis: AnalysisConfig,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            server: ServerConfig::default(),
            live: ScoringConfig::live(),
            batch: ScoringConfig::batch(),
            frames: FrameConfig::default(),
            models: ModelPaths::default(),
            dialogue: DialogueConfig::default(),
            analysis: AnalysisConfig::default(),
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => bail!("{key}: expected a boolean, got {v:?}"),
    }
}

impl EngineConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: EngineConfig = toml::from_str(text)?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        EngineConfig::from_toml(&text, base).with_context(|| format!("config {}", path.display()))
    }

    /// Loads `path` when given, then applies the process environment.
    pub fn load_with_env(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => EngineConfig::load(p)?,
            None => EngineConfig::default(),
        };
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.server.log_dir);
        let m = &mut self.models;
        for p in [&mut m.grammar, &mut m.prosody, &mut m.pronunciation, &mut m.embeddings, &mut m.lexicon, &mut m.registry]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    /// Overrides from `COGSPEECH_HOST`, `_PORT`, `_HISTORY`, `_LOG_DIR`,
    /// `_RESPONDER`, `_REMOTE_URL` and `_{GRAMMAR,PROSODY,PRONUNCIATION}_MODEL`,
    /// `_EMBEDDINGS`.
    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<()> {
        let path = |k: &str| get(k).filter(|v| !v.is_empty()).map(PathBuf::from);
        if let Some(v) = get("COGSPEECH_HOST") {
            self.server.host = v;
        }
        if let Some(v) = get("COGSPEECH_PORT") {
            self.server.port = v.trim().parse().with_context(|| format!("COGSPEECH_PORT: bad port {v:?}"))?;
        }
        if let Some(v) = get("COGSPEECH_HISTORY") {
            self.server.history = parse_bool("COGSPEECH_HISTORY", &v)?;
        }
        if let Some(v) = path("COGSPEECH_LOG_DIR") {
            self.server.log_dir = v;
        }
        if let Some(v) = get("COGSPEECH_RESPONDER") {
            self.dialogue.responder = match v.trim().to_ascii_lowercase().as_str() {
                "template" => ResponderKind::Template,
                "remote" => ResponderKind::Remote,
                _ => bail!("COGSPEECH_RESPONDER: expected template or remote, got {v:?}"),
            };
        }
        if let Some(v) = get("COGSPEECH_REMOTE_URL") {
            self.dialogue.remote_url = Some(v);
        }
        if let Some(v) = path("COGSPEECH_GRAMMAR_MODEL") {
            self.models.grammar = Some(v);
        }
        if let Some(v) = path("COGSPEECH_PROSODY_MODEL") {
            self.models.prosody = Some(v);
        }
        if let Some(v) = path("COGSPEECH_PRONUNCIATION_MODEL") {
            self.models.pronunciation = Some(v);
        }
        if let Some(v) = path("COGSPEECH_EMBEDDINGS") {
            self.models.embeddings = Some(v);
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        self.live.validate().context("[live]")?;
        self.batch.validate().context("[batch]")?;
        self.frames.validate().context("[frames]")?;
        self.dialogue.templates.validate().context("[dialogue.templates]")?;
        CutoffTable::new(self.analysis.cutoffs.ranges().to_vec()).context("[analysis.cutoffs]")?;
        ensure!(self.analysis.alpha > 0.0 && self.analysis.alpha < 1.0, "[analysis] alpha must lie in (0, 1)");
        ensure!(self.dialogue.deadline_ms > 0, "[dialogue] deadline_ms must be positive");
        ensure!(self.dialogue.max_tokens > 0, "[dialogue] max_tokens must be positive");
        ensure!(self.server.max_chunk_ms > 0, "[server] max_chunk_ms must be positive");
        ensure!(self.server.dialogue_turns > 0, "[server] dialogue_turns must be positive");
        if self.dialogue.responder == ResponderKind::Remote {
            ensure!(self.dialogue.remote_url.is_some(), "[dialogue] remote responder needs remote_url");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}
