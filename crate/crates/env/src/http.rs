//! Online HTTP adapters.
//!
//! Any search or fetch backend is normalized to the same [`SearchResult`] and
//! [`Document`] shapes used offline, so tool code upstream never branches on
//! backend. Credentials are referenced by environment-variable name, never
//! stored in config files. Retryable failures (network, rate limit) retry
//! with exponential backoff up to the configured cap; every exchange is kept
//! in an in-memory log for audit.
//!
//! Wire contract (also implemented by the shipped stub server):
//!   `GET {endpoint}/search?q=<query>&k=<k>` →
//!       `{"results": [{"doc_id": "...", "snippet": "...", "score": 1.0}]}`
//!   `GET {endpoint}/fetch?url=<locator>` → one document object with
//!       id/title/body/source_tag/authority_score/timestamp fields.
//! Status 429 maps to `RateLimited`, 404 to `NotFound`, other non-2xx to
//! `NetworkFailure`, and an unparseable body to `ParseFailure`.

use crate::document::Document;
use crate::error::ToolError;
use crate::index::SearchResult;
use serde::{Deserialize, Serialize};
use std::sync::Mutex;
use std::time::Duration;

/// Endpoint configuration for one backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdapterConfig {
    /// Base URL, e.g. `http://127.0.0.1:8080`.
    pub endpoint: String,
    /// Name of the environment variable holding the bearer token, if any.
    pub credential_env: Option<String>,
    pub timeout_ms: u64,
    pub max_retries: u32,
}

impl AdapterConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            credential_env: None,
            timeout_ms: 5_000,
            max_retries: 2,
        }
    }
}

/// One logged request/response exchange.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Exchange {
    pub url: String,
    pub status: Option<u16>,
    pub outcome: String,
}

#[derive(Deserialize)]
struct WireResults {
    results: Vec<WireResult>,
}

#[derive(Deserialize)]
struct WireResult {
    doc_id: String,
    snippet: String,
    score: f64,
}

/// Blocking HTTP adapter for one backend. Safe for concurrent calls; retry
/// state is per call.
pub struct HttpAdapter {
    config: AdapterConfig,
    client: reqwest::blocking::Client,
    log: Mutex<Vec<Exchange>>,
}

impl HttpAdapter {
    pub fn new(config: AdapterConfig) -> Result<Self, ToolError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| ToolError::network(format!("client setup failed: {e}")))?;
        Ok(Self {
            config,
            client,
            log: Mutex::new(Vec::new()),
        })
    }

    /// Copy of the exchange log so far.
    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().expect("log lock").clone()
    }

    fn record(&self, url: &str, status: Option<u16>, outcome: &str) {
        self.log.lock().expect("log lock").push(Exchange {
            url: url.to_string(),
            status,
            outcome: outcome.to_string(),
        });
    }

    /// GET with mapped errors and backoff retry on retryable failures.
    fn get_text(&self, url: &str) -> Result<String, ToolError> {
        let mut attempt = 0;
        loop {
            match self.get_once(url) {
                Ok(body) => return Ok(body),
                Err(err) if err.retryable && attempt < self.config.max_retries => {
                    attempt += 1;
                    std::thread::sleep(Duration::from_millis(50 * (1u64 << attempt.min(6))));
                }
                Err(err) => return Err(err),
            }
        }
    }

    fn get_once(&self, url: &str) -> Result<String, ToolError> {
        let mut request = self.client.get(url);
        if let Some(var) = &self.config.credential_env {
            match std::env::var(var) {
                Ok(token) => request = request.bearer_auth(token),
                Err(_) => {
                    return Err(ToolError::network(format!(
                        "credential environment variable {var} is not set"
                    )))
                }
            }
        }
        let response = match request.send() {
            Ok(r) => r,
            Err(e) => {
                self.record(url, None, "network failure");
                return Err(ToolError::network(format!("request failed: {e}")));
            }
        };
        let status = response.status().as_u16();
        let body = response
            .text()
            .map_err(|e| ToolError::network(format!("body read failed: {e}")))?;
        match status {
            200..=299 => {
                self.record(url, Some(status), "ok");
                Ok(body)
            }
            429 => {
                self.record(url, Some(status), "rate limited");
                Err(ToolError::rate_limited(format!("status 429 from {url}")))
            }
            404 => {
                self.record(url, Some(status), "not found");
                Err(ToolError::not_found(format!("status 404 from {url}")))
            }
            _ => {
                self.record(url, Some(status), "unexpected status");
                Err(ToolError::network(format!("status {status} from {url}")))
            }
        }
    }

    /// Search the backend and normalize the response to ranked results.
    pub fn search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, ToolError> {
        let url = format!(
            "{}/search?q={}&k={}",
            self.config.endpoint.trim_end_matches('/'),
            urlencode(query),
            k
        );
        let body = self.get_text(&url)?;
        let wire: WireResults = serde_json::from_str(&body)
            .map_err(|e| ToolError::parse(format!("malformed search response: {e}")))?;
        Ok(wire
            .results
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, r)| SearchResult {
                doc_id: r.doc_id,
                snippet: r.snippet,
                score: r.score,
                rank: i as u32 + 1,
            })
            .collect())
    }

    /// Fetch one page and normalize it to a document.
    pub fn fetch(&self, locator: &str) -> Result<Document, ToolError> {
        let url = format!(
            "{}/fetch?url={}",
            self.config.endpoint.trim_end_matches('/'),
            urlencode(locator)
        );
        let body = self.get_text(&url)?;
        let doc: Document = serde_json::from_str(&body)
            .map_err(|e| ToolError::parse(format!("malformed page payload: {e}")))?;
        doc.check()?;
        Ok(doc)
    }
}

/// Online environment: the same tool surface as the offline index, backed by
/// HTTP adapters. The medical professional search may use a dedicated
/// vertical backend; without one it falls back to the general backend.
pub struct OnlineEnvironment {
    search: HttpAdapter,
    medical: Option<HttpAdapter>,
    fetch: HttpAdapter,
    summarizer: Box<dyn crate::tools::Summarizer>,
    top_k: usize,
}

impl OnlineEnvironment {
    pub fn new(search: HttpAdapter, fetch: HttpAdapter) -> Self {
        Self {
            search,
            medical: None,
            fetch,
            summarizer: Box::new(crate::tools::HeadTruncation::default()),
            top_k: 5,
        }
    }

    pub fn with_medical_backend(mut self, adapter: HttpAdapter) -> Self {
        self.medical = Some(adapter);
        self
    }

    pub fn with_summarizer(mut self, summarizer: Box<dyn crate::tools::Summarizer>) -> Self {
        self.summarizer = summarizer;
        self
    }

    pub fn with_top_k(mut self, k: usize) -> Self {
        self.top_k = k;
        self
    }
}

impl crate::tools::ToolEnvironment for OnlineEnvironment {
    fn execute(&self, action: &medsearch_core::ToolAction) -> Result<String, ToolError> {
        match action {
            medsearch_core::ToolAction::Search { queries } => {
                let mut blocks = Vec::new();
                for q in queries {
                    let results = self.search(q, self.top_k)?;
                    blocks.push(crate::tools::format_results(q, &results));
                }
                Ok(blocks.join("\n\n"))
            }
            medsearch_core::ToolAction::Visit { targets, goal } => {
                let mut blocks = Vec::new();
                for target in targets {
                    blocks.push(format!("[{target}]\n{}", self.visit(target, goal)?));
                }
                Ok(blocks.join("\n\n"))
            }
            medsearch_core::ToolAction::Answer { .. } => Err(ToolError::parse(
                "answer actions terminate the episode and are not executed as tools",
            )),
        }
    }

    fn search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, ToolError> {
        self.search.search(query, k)
    }

    fn medical_search(&self, query: &str, k: usize) -> Result<Vec<SearchResult>, ToolError> {
        match &self.medical {
            Some(adapter) => adapter.search(query, k),
            None => self.search.search(query, k),
        }
    }

    fn visit(&self, target: &str, goal: &str) -> Result<String, ToolError> {
        let doc = self.fetch.fetch(target)?;
        Ok(self.summarizer.summarize(&doc.body, goal))
    }
}

/// Percent-encode everything that is not an unreserved URI character.
fn urlencode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for byte in s.bytes() {
        match byte {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => {
                out.push(byte as char)
            }
            _ => out.push_str(&format!("%{byte:02X}")),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn urlencode_escapes_reserved_characters() {
        assert_eq!(urlencode("a b&c"), "a%20b%26c");
        assert_eq!(urlencode("plain-text_1.0~x"), "plain-text_1.0~x");
    }
}
