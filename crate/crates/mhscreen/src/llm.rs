//! Chat-completion client over JSON/HTTP.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use mhscreen_core::explain::{ChatBackend, ChatError};
use serde_json::{json, Value};

use crate::config::LlmConfig;

/// Never touches the network.
#[derive(Debug, Clone, Copy, Default)]
pub struct DisabledClient;

impl ChatBackend for DisabledClient {
    fn enabled(&self) -> bool {
        false
    }

    fn complete(&self, _prompt: &str) -> Result<String, ChatError> {
        Err(ChatError::Disabled)
    }
}

/// Counting semaphore for the in-flight cap.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// Blocking client; do not construct or call it on an async runtime thread.
pub struct HttpChatClient {
    http: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    api_key: Option<String>,
    reply_path: Vec<String>,
    gate: Gate,
}

impl std::fmt::Debug for HttpChatClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpChatClient")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .finish_non_exhaustive()
    }
}

impl HttpChatClient {
    pub fn new(cfg: &LlmConfig) -> Result<Self, ChatError> {
        let api_key = cfg.api_key_env.as_deref().and_then(|name| std::env::var(name).ok());
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .map_err(|e| ChatError::Transport(e.to_string()))?;
        Ok(HttpChatClient {
            http,
            endpoint: cfg.endpoint.clone(),
            model: cfg.model.clone(),
            api_key,
            reply_path: cfg.reply_path.split('.').map(String::from).collect(),
            gate: Gate {
                free: Mutex::new(cfg.max_in_flight.max(1)),
                cv: Condvar::new(),
            },
        })
    }
}

/// Follows a dotted path; numeric segments index arrays.
pub fn extract_reply<'a>(body: &'a Value, path: &[String]) -> Option<&'a str> {
    let mut cur = body;
    for seg in path {
        cur = match cur {
            Value::Array(items) => items.get(seg.parse::<usize>().ok()?)?,
            Value::Object(map) => map.get(seg)?,
            _ => return None,
        };
    }
    cur.as_str()
}

fn transport(e: reqwest::Error) -> ChatError {
    if e.is_timeout() {
        ChatError::Timeout
    } else {
        ChatError::Transport(e.to_string())
    }
}

impl ChatBackend for HttpChatClient {
    fn enabled(&self) -> bool {
        true
    }

    fn complete(&self, prompt: &str) -> Result<String, ChatError> {
        let _permit = self.gate.acquire();
        let body = json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut req = self.http.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(transport)?;
        let status = resp.status();
        if !status.is_success() {
            return Err(ChatError::Transport(format!("HTTP {status}")));
        }
        let v: Value = resp.json().map_err(|e| {
            if e.is_timeout() {
                ChatError::Timeout
            } else {
                ChatError::BadResponse(e.to_string())
            }
        })?;
        extract_reply(&v, &self.reply_path)
            .map(String::from)
            .ok_or_else(|| ChatError::BadResponse(format!("no string at {}", self.reply_path.join("."))))
    }
}

/// The configured backend: an HTTP client when enabled, otherwise one that
/// never connects.
pub fn backend_from_config(cfg: &LlmConfig) -> Result<Box<dyn ChatBackend + Send + Sync>, ChatError> {
    if cfg.enabled {
        Ok(Box::new(HttpChatClient::new(cfg)?))
    } else {
        Ok(Box::new(DisabledClient))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reply_path_walks_arrays_and_objects() {
        let v = json!({"choices": [{"message": {"content": "hi"}}]});
        let path: Vec<String> = "choices.0.message.content".split('.').map(String::from).collect();
        assert_eq!(extract_reply(&v, &path), Some("hi"));
        assert_eq!(extract_reply(&json!({"choices": []}), &path), None);
    }

    #[test]
    fn disabled_client_refuses() {
        assert!(!DisabledClient.enabled());
        assert_eq!(DisabledClient.complete("x"), Err(ChatError::Disabled));
    }
}
