//! Translation backends.
//!
//! Anything that can turn a source sentence into a target sentence sits
//! behind [`Backend`]. Three implementations ship:
//!
//! * [`MockDictionaryBackend`] — deterministic word-for-word lookup with
//!   configurable synthetic log-likelihoods, for tests and offline runs;
//! * [`HttpBackend`] — JSON-over-HTTP client for any NMT server exposing
//!   translation plus per-token scores;
//! * [`GlossaryWrappedBackend`] — decorates any backend with glossary term
//!   protection.
//!
//! Backends must tolerate concurrent requests (`Send + Sync`).

use crate::glossary::{unprotect_terms, Glossary};
use crate::router::perplexity;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub text: String,
    pub source_lang: String,
    pub target_lang: String,
    pub want_logprobs: bool,
}

impl BackendRequest {
    pub fn new(text: impl Into<String>, source_lang: &str, target_lang: &str) -> Self {
        BackendRequest {
            text: text.into(),
            source_lang: source_lang.into(),
            target_lang: target_lang.into(),
            want_logprobs: true,
        }
    }
}

/// A translated sentence with optional confidence information.
///
/// When `token_logprobs` is present, `perplexity` is
/// `exp(-mean(token_logprobs))` and is at least 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationResult {
    pub text: String,
    pub token_logprobs: Option<Vec<f64>>,
    pub perplexity: Option<f64>,
    pub backend_id: String,
}

impl TranslationResult {
    /// Build a result, deriving perplexity from the scores. Positive scores
    /// (not valid log-probabilities) are clamped to 0.
    pub fn new(
        text: impl Into<String>,
        token_logprobs: Option<Vec<f64>>,
        backend_id: impl Into<String>,
    ) -> Self {
        let token_logprobs = token_logprobs.map(|v| {
            v.into_iter()
                .map(|lp| if lp > 0.0 { 0.0 } else { lp })
                .collect::<Vec<f64>>()
        });
        let perplexity = token_logprobs
            .as_deref()
            .and_then(|lp| perplexity(lp).ok());
        TranslationResult {
            text: text.into(),
            token_logprobs,
            perplexity,
            backend_id: backend_id.into(),
        }
    }

    pub fn without_scores(text: impl Into<String>, backend_id: impl Into<String>) -> Self {
        TranslationResult {
            text: text.into(),
            token_logprobs: None,
            perplexity: None,
            backend_id: backend_id.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend timed out")]
    Timeout,
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
}

pub trait Backend: Send + Sync {
    fn id(&self) -> &str;
    fn translate(&self, req: &BackendRequest) -> Result<TranslationResult, BackendError>;
}

// ---------------------------------------------------------------------------
// Mock dictionary
// ---------------------------------------------------------------------------

/// Word-for-word dictionary translation. Unknown words (including `MATHnX`
/// and `TERMkX` tokens) pass through unchanged, the way an NMT system treats
/// out-of-vocabulary tokens. Punctuation glued to a word is preserved.
#[derive(Debug, Clone)]
pub struct MockDictionaryBackend {
    id: String,
    dict: HashMap<String, String>,
    /// Log-likelihood assigned to dictionary hits and protected tokens.
    pub known_logprob: f64,
    /// Log-likelihood assigned to words that pass through untranslated.
    pub unknown_logprob: f64,
    pub emit_logprobs: bool,
}

impl MockDictionaryBackend {
    pub fn new(
        id: impl Into<String>,
        dict: impl IntoIterator<Item = (impl Into<String>, impl Into<String>)>,
    ) -> Self {
        MockDictionaryBackend {
            id: id.into(),
            dict: dict
                .into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
            known_logprob: -0.05,
            unknown_logprob: -0.25,
            emit_logprobs: true,
        }
    }

    /// The identity translation: empty dictionary, every word passes through.
    pub fn identity(id: impl Into<String>) -> Self {
        MockDictionaryBackend::new(id, Vec::<(String, String)>::new())
    }

    /// Load `source<TAB>target` lines, same format as the glossary file.
    pub fn from_tsv(id: impl Into<String>, text: &str) -> Result<Self, BackendError> {
        let mut dict = HashMap::new();
        for line in text.lines() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let Some((s, t)) = line.split_once('\t') else {
                return Err(BackendError::MalformedResponse(format!(
                    "bad dictionary line: {line:?}"
                )));
            };
            dict.insert(s.trim().to_string(), t.trim().to_string());
        }
        Ok(MockDictionaryBackend::new(id, dict))
    }

    pub fn with_logprobs(mut self, known: f64, unknown: f64) -> Self {
        self.known_logprob = known;
        self.unknown_logprob = unknown;
        self
    }

    pub fn without_logprobs(mut self) -> Self {
        self.emit_logprobs = false;
        self
    }

    fn lookup(&self, word: &str) -> Option<String> {
        if let Some(hit) = self.dict.get(word) {
            return Some(hit.clone());
        }
        let hit = self.dict.get(&word.to_lowercase())?;
        // keep a leading capital (sentence starts)
        if word.chars().next().is_some_and(char::is_uppercase) {
            let mut chars = hit.chars();
            return Some(match chars.next() {
                Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
                None => String::new(),
            });
        }
        Some(hit.clone())
    }
}

impl Backend for MockDictionaryBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn translate(&self, req: &BackendRequest) -> Result<TranslationResult, BackendError> {
        let mut words = Vec::new();
        let mut logprobs = Vec::new();
        for word in req.text.split_whitespace() {
            let core_start = word
                .find(|c: char| c.is_alphanumeric())
                .unwrap_or(word.len());
            let core_end = word
                .rfind(|c: char| c.is_alphanumeric())
                .map_or(core_start, |i| i + word[i..].chars().next().unwrap().len_utf8());
            let core = &word[core_start..core_end];
            let protected = crate::assemble::MATH_TOKEN_RE.is_match(core)
                || core.starts_with("TERM") && core.ends_with('X');
            if protected {
                words.push(word.to_string());
                logprobs.push(self.known_logprob);
            } else if let Some(target) = self.lookup(core) {
                words.push(format!(
                    "{}{}{}",
                    &word[..core_start],
                    target,
                    &word[core_end..]
                ));
                logprobs.push(self.known_logprob);
            } else {
                words.push(word.to_string());
                logprobs.push(self.unknown_logprob);
            }
        }
        let text = words.join(" ");
        let scores = (self.emit_logprobs && req.want_logprobs && !logprobs.is_empty())
            .then_some(logprobs);
        Ok(TranslationResult::new(text, scores, &self.id))
    }
}

// ---------------------------------------------------------------------------
// HTTP client
// ---------------------------------------------------------------------------

/// Request body sent to an NMT server:
/// `{"src":"en","tgt":"fr","text":"...","logprobs":true}`.
#[derive(Debug, Serialize)]
struct WireRequest<'a> {
    src: &'a str,
    tgt: &'a str,
    text: &'a str,
    logprobs: bool,
}

/// Response body expected back: `{"text":"...","token_logprobs":[...]}` with
/// `token_logprobs` optional.
#[derive(Debug, Deserialize)]
struct WireResponse {
    text: String,
    #[serde(default)]
    token_logprobs: Option<Vec<f64>>,
}

/// JSON-over-HTTP client for a translation server.
pub struct HttpBackend {
    id: String,
    url: String,
    api_key: Option<String>,
    retries: u32,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Unreachable(e.to_string()))?;
        Ok(HttpBackend {
            id: "http".into(),
            url: url.into(),
            api_key: None,
            retries: 0,
            client,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    /// Sent as `Authorization: Bearer <key>` when set.
    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    /// Additional attempts after a timeout or connection failure.
    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }

    fn attempt(&self, req: &BackendRequest) -> Result<TranslationResult, BackendError> {
        let body = WireRequest {
            src: &req.source_lang,
            tgt: &req.target_lang,
            text: &req.text,
            logprobs: req.want_logprobs,
        };
        let mut http = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            http = http.bearer_auth(key);
        }
        let response = http.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Unreachable(e.to_string())
            }
        })?;
        let status = response.status();
        if !status.is_success() {
            return Err(BackendError::MalformedResponse(format!(
                "server returned {status}"
            )));
        }
        let wire: WireResponse = response
            .json()
            .map_err(|e| BackendError::MalformedResponse(e.to_string()))?;
        if wire.text.trim().is_empty() {
            return Err(BackendError::MalformedResponse("empty output".into()));
        }
        Ok(TranslationResult::new(
            wire.text,
            wire.token_logprobs.filter(|v| !v.is_empty()),
            &self.id,
        ))
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn translate(&self, req: &BackendRequest) -> Result<TranslationResult, BackendError> {
        let mut last = None;
        for _ in 0..=self.retries {
            match self.attempt(req) {
                Ok(result) => return Ok(result),
                Err(e @ BackendError::MalformedResponse(_)) => return Err(e),
                Err(e) => last = Some(e),
            }
        }
        Err(last.unwrap_or(BackendError::Timeout))
    }
}

// ---------------------------------------------------------------------------
// Glossary wrapper
// ---------------------------------------------------------------------------

/// Decorates a backend with glossary enforcement: matched source terms are
/// masked behind `TERMkX` placeholders before the call and replaced by the
/// glossary's target terms afterwards.
///
/// Inner token scores are dropped: after placeholder substitution they no
/// longer line up with the output tokens, and wrapped (fallback) results are
/// final rather than gated.
pub struct GlossaryWrappedBackend<B> {
    inner: B,
    glossary: Glossary,
    id: String,
}

impl<B: Backend> GlossaryWrappedBackend<B> {
    pub fn new(inner: B, glossary: Glossary) -> Self {
        let id = format!("{}+glossary", inner.id());
        GlossaryWrappedBackend {
            inner,
            glossary,
            id,
        }
    }
}

impl<B: Backend> Backend for GlossaryWrappedBackend<B> {
    fn id(&self) -> &str {
        &self.id
    }

    fn translate(&self, req: &BackendRequest) -> Result<TranslationResult, BackendError> {
        let (masked, map) = self.glossary.protect_terms(&req.text);
        let inner_req = BackendRequest {
            text: masked,
            ..req.clone()
        };
        let result = self.inner.translate(&inner_req)?;
        Ok(TranslationResult::without_scores(
            unprotect_terms(&result.text, &map),
            &self.id,
        ))
    }
}

impl<B: Backend + ?Sized> Backend for &B {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn translate(&self, req: &BackendRequest) -> Result<TranslationResult, BackendError> {
        (**self).translate(req)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn translate(&self, req: &BackendRequest) -> Result<TranslationResult, BackendError> {
        (**self).translate(req)
    }
}
