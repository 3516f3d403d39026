//! Response generation for live sessions: the template table, or a remote
//! completion endpoint speaking `POST {prompt, max_tokens}` -> `{text}`.

use std::time::Duration;

use cogspeech_core::dialogue::{ChatPrompt, TemplateResponder};
use serde::{Deserialize, Serialize};

use crate::config::{DialogueConfig, ResponderKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RespondError {
    #[error("response deadline of {0} ms exceeded")]
    Timeout(u64),
    #[error("malformed response: {0}")]
    Protocol(String),
    #[error("request failed: {0}")]
    Transport(String),
}

impl RespondError {
    pub fn code(&self) -> &'static str {
        match self {
            RespondError::Timeout(_) => "RESPONDER_TIMEOUT",
            RespondError::Protocol(_) => "RESPONDER_PROTOCOL",
            RespondError::Transport(_) => "RESPONDER_TRANSPORT",
        }
    }
}

/// A reply and, when it came from the fallback table, the remote failure
/// that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub text: String,
    pub fallback_from: Option<RespondError>,
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

#[derive(Debug, Clone)]
pub struct RemoteResponder {
    client: reqwest::Client,
    pub url: String,
    pub max_tokens: u32,
}

impl RemoteResponder {
    pub fn new(url: impl Into<String>, max_tokens: u32) -> Self {
        RemoteResponder { client: reqwest::Client::new(), url: url.into(), max_tokens }
    }

    async fn request(&self, prompt: &str) -> Result<String, RespondError> {
        let resp = self
            .client
            .post(&self.url)
            .json(&CompletionRequest { prompt, max_tokens: self.max_tokens })
            .send()
            .await
            .map_err(|e| RespondError::Transport(e.to_string()))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(RespondError::Protocol(format!("HTTP status {status}")));
        }
        let body = resp.bytes().await.map_err(|e| RespondError::Transport(e.to_string()))?;
        let parsed: CompletionResponse =
            serde_json::from_slice(&body).map_err(|e| RespondError::Protocol(e.to_string()))?;
        let text = parsed.text.trim();
        if text.is_empty() {
            return Err(RespondError::Protocol("empty text".into()));
        }
        Ok(text.to_string())
    }

    /// Serialized prompt to the endpoint, abandoned at the deadline.
    pub async fn respond(&self, prompt: &ChatPrompt, deadline: Duration) -> Result<String, RespondError> {
        let text = prompt.serialize().map_err(|e| RespondError::Protocol(e.to_string()))?;
        match tokio::time::timeout(deadline, self.request(&text)).await {
            Ok(r) => r,
            Err(_) => Err(RespondError::Timeout(deadline.as_millis() as u64)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum EngineResponder {
    Template(TemplateResponder),
    Remote { remote: RemoteResponder, fallback: Option<TemplateResponder> },
}

impl EngineResponder {
    pub fn from_config(cfg: &DialogueConfig) -> anyhow::Result<Self> {
        cfg.templates.validate()?;
        Ok(match cfg.responder {
            ResponderKind::Template => EngineResponder::Template(cfg.templates.clone()),
            ResponderKind::Remote => {
                let url = cfg
                    .remote_url
                    .clone()
                    .ok_or_else(|| anyhow::anyhow!("remote responder needs dialogue.remote_url"))?;
                EngineResponder::Remote {
                    remote: RemoteResponder::new(url, cfg.max_tokens),
                    fallback: cfg.fallback.then(|| cfg.templates.clone()),
                }
            }
        })
    }

    pub async fn respond(&self, prompt: &ChatPrompt, deadline: Duration) -> Result<Reply, RespondError> {
        let template = |t: &TemplateResponder| t.reply_to(prompt.last_human().unwrap_or("")).to_string();
        match self {
            EngineResponder::Template(t) => Ok(Reply { text: template(t), fallback_from: None }),
            EngineResponder::Remote { remote, fallback } => match remote.respond(prompt, deadline).await {
                Ok(text) => Ok(Reply { text, fallback_from: None }),
                Err(e) => match fallback {
                    Some(t) => Ok(Reply { text: template(t), fallback_from: Some(e) }),
                    None => Err(e),
                },
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use axum::routing::post;
    use axum::{Json, Router};
    use cogspeech_core::dialogue::Turn;
    use std::time::Instant;

    async fn serve(app: Router) -> String {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
        format!("http://{addr}/complete")
    }

    fn prompt(text: &str) -> ChatPrompt {
        ChatPrompt::new("system", vec![Turn::human(text)]).unwrap()
    }

    fn remote(url: String, fallback: bool) -> EngineResponder {
        EngineResponder::Remote {
            remote: RemoteResponder::new(url, 32),
            fallback: fallback.then(TemplateResponder::default),
        }
    }

    #[tokio::test]
    async fn remote_reply_carries_prompt() {
        let app = Router::new().route(
            "/complete",
            post(|Json(v): Json<serde_json::Value>| async move {
                let p = v["prompt"].as_str().unwrap().to_string();
                assert_eq!(v["max_tokens"], 32);
                Json(serde_json::json!({ "text": format!(" echo {} ", p.ends_with("</AI assistant/>\n")) }))
            }),
        );
        let url = serve(app).await;
        let r = remote(url, false).respond(&prompt("hi"), Duration::from_secs(2)).await.unwrap();
        assert_eq!(r, Reply { text: "echo true".into(), fallback_from: None });
    }

    #[tokio::test]
    async fn malformed_and_slow_endpoints() {
        let app = Router::new()
            .route("/complete", post(|| async { "not json" }))
            .route(
                "/slow",
                post(|| async {
                    tokio::time::sleep(Duration::from_secs(5)).await;
                    Json(serde_json::json!({"text": "late"}))
                }),
            );
        let url = serve(app).await;
        let err = remote(url.clone(), false).respond(&prompt("hi"), Duration::from_secs(2)).await.unwrap_err();
        assert!(matches!(err, RespondError::Protocol(_)), "{err:?}");

        let slow = url.replace("/complete", "/slow");
        let start = Instant::now();
        let err = remote(slow.clone(), false).respond(&prompt("hi"), Duration::from_millis(200)).await.unwrap_err();
        let took = start.elapsed();
        assert_eq!(err, RespondError::Timeout(200));
        assert!(took < Duration::from_millis(250), "{took:?}");

        let r = remote(slow, true).respond(&prompt("hello"), Duration::from_millis(100)).await.unwrap();
        assert!(r.text.starts_with("Hello!"));
        assert_eq!(r.fallback_from, Some(RespondError::Timeout(100)));
    }

    #[tokio::test]
    async fn unreachable_endpoint_falls_back() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/complete", listener.local_addr().unwrap());
        drop(listener);
        let r = remote(url.clone(), true).respond(&prompt("hello"), Duration::from_secs(1)).await.unwrap();
        assert!(matches!(r.fallback_from, Some(RespondError::Transport(_))));
        assert_eq!(r.text, TemplateResponder::default().reply_to("hello"));
        assert!(remote(url, false).respond(&prompt("hello"), Duration::from_secs(1)).await.is_err());
    }

    #[tokio::test]
    async fn template_is_deterministic() {
        let r = EngineResponder::from_config(&DialogueConfig::default()).unwrap();
        let a = r.respond(&prompt("I planted flowers"), Duration::from_millis(10)).await.unwrap();
        let b = r.respond(&prompt("I planted flowers"), Duration::from_millis(10)).await.unwrap();
        assert_eq!(a, b);
        assert!(a.text.starts_with("Gardens"));
        let mut cfg = DialogueConfig { responder: ResponderKind::Remote, ..DialogueConfig::default() };
        assert!(EngineResponder::from_config(&cfg).is_err());
        cfg.remote_url = Some("http://127.0.0.1:9/x".into());
        assert!(EngineResponder::from_config(&cfg).is_ok());
    }
}
