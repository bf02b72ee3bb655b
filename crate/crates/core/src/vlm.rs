//! Client for the external vision-language generation service, plus a
//! deterministic in-process stub for tests and offline pipelines.
//!
//! The wire protocol is a single HTTP POST carrying a versioned JSON
//! envelope with base64 images, compatible with common chat-completion
//! gateways. Request encoding is deterministic: identical requests produce
//! byte-identical payloads, with images carried in order and identified by
//! content hash.
//!
//! The client retries idempotently on transient failures (connect errors,
//! timeouts, 5xx) with exponential backoff; auth failures and other 4xx
//! responses surface immediately. A counting semaphore bounds in-flight
//! requests across concurrent callers.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use base64::Engine as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dhr::LevelAssignment;

/// Environment override for the endpoint URL.
pub const ENV_URL: &str = "FINOCR_VLM_URL";
/// Environment override for the bearer token.
pub const ENV_TOKEN: &str = "FINOCR_VLM_TOKEN";

pub const WIRE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum VlmError {
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("authentication failed with status {0}")]
    AuthFailure(u16),
    #[error("service error {status}: {body}")]
    ServiceError { status: u16, body: String },
    #[error("retries exhausted after {attempts} attempts; last error: {last}")]
    RetriesExhausted { attempts: usize, last: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecodeParams {
    pub max_tokens: u32,
    pub temperature: f64,
}

impl Default for DecodeParams {
    fn default() -> Self {
        // Zero temperature: hierarchy reconstruction wants determinism.
        DecodeParams {
            max_tokens: 4096,
            temperature: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageAttachment {
    pub bytes: Vec<u8>,
    pub media_type: String,
}

impl ImageAttachment {
    pub fn png(bytes: Vec<u8>) -> Self {
        ImageAttachment {
            bytes,
            media_type: "image/png".into(),
        }
    }
}

/// One generation call: instruction, prompt lines and page images in order.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRequest {
    pub instruction: String,
    pub text_lines: Vec<String>,
    pub images: Vec<ImageAttachment>,
    pub decode_params: DecodeParams,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
pub struct Usage {
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationResponse {
    pub text: String,
    pub usage: Usage,
    pub latency_ms: u64,
}

/// Anything that can answer a generation request. Shareable across threads;
/// calls own their connections.
pub trait VlmService: Send + Sync {
    fn generate(&self, req: &GenerationRequest) -> Result<GenerationResponse, VlmError>;
}

#[derive(Serialize)]
struct WireImage<'a> {
    id: String,
    media_type: &'a str,
    data_base64: String,
}

#[derive(Serialize)]
struct WireEnvelope<'a> {
    schema_version: u32,
    instruction: &'a str,
    text_lines: &'a [String],
    images: Vec<WireImage<'a>>,
    decode: DecodeParams,
}

/// Encode a request as its wire payload. Field order is fixed and images
/// keep their list order, each identified by the SHA-256 of its bytes, so
/// equal requests yield byte-identical payloads.
pub fn encode_request(req: &GenerationRequest) -> Vec<u8> {
    let images = req
        .images
        .iter()
        .map(|img| WireImage {
            id: format!("sha256:{:x}", Sha256::digest(&img.bytes)),
            media_type: &img.media_type,
            data_base64: base64::engine::general_purpose::STANDARD.encode(&img.bytes),
        })
        .collect();
    let envelope = WireEnvelope {
        schema_version: WIRE_SCHEMA_VERSION,
        instruction: &req.instruction,
        text_lines: &req.text_lines,
        images,
        decode: req.decode_params,
    };
    serde_json::to_vec(&envelope).expect("envelope serializes")
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
    #[serde(default)]
    usage: Usage,
}

/// Transport configuration. `retry_cap` counts retries after the first
/// attempt; `inflight_cap` bounds concurrent requests through this client.
#[derive(Debug, Clone)]
pub struct VlmConfig {
    pub endpoint: String,
    pub auth_token: Option<String>,
    pub timeout: Duration,
    pub retry_cap: usize,
    pub inflight_cap: usize,
    pub backoff_base: Duration,
}

impl Default for VlmConfig {
    fn default() -> Self {
        VlmConfig {
            endpoint: String::new(),
            auth_token: None,
            timeout: Duration::from_secs(60),
            retry_cap: 3,
            inflight_cap: 4,
            backoff_base: Duration::from_millis(200),
        }
    }
}

impl VlmConfig {
    /// Apply FINOCR_VLM_URL / FINOCR_VLM_TOKEN environment overrides.
    pub fn with_env_overrides(mut self) -> Self {
        if let Ok(url) = std::env::var(ENV_URL) {
            if !url.is_empty() {
                self.endpoint = url;
            }
        }
        if let Ok(token) = std::env::var(ENV_TOKEN) {
            if !token.is_empty() {
                self.auth_token = Some(token);
            }
        }
        self
    }
}

struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

impl Semaphore {
    fn new(permits: usize) -> Self {
        Semaphore {
            permits: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> SemaphoreGuard<'_> {
        let mut permits = self.permits.lock().expect("semaphore poisoned");
        while *permits == 0 {
            permits = self.cv.wait(permits).expect("semaphore poisoned");
        }
        *permits -= 1;
        SemaphoreGuard { sem: self }
    }
}

struct SemaphoreGuard<'a> {
    sem: &'a Semaphore,
}

impl Drop for SemaphoreGuard<'_> {
    fn drop(&mut self) {
        let mut permits = self.sem.permits.lock().expect("semaphore poisoned");
        *permits += 1;
        self.sem.cv.notify_one();
    }
}

enum AttemptError {
    Retryable(String, bool),
    Fatal(VlmError),
}

/// Blocking HTTP client for the generation service.
pub struct HttpVlmClient {
    config: VlmConfig,
    client: reqwest::blocking::Client,
    gate: Semaphore,
}

impl HttpVlmClient {
    pub fn new(config: VlmConfig) -> Result<Self, VlmError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| VlmError::ServiceError {
                status: 0,
                body: format!("client construction failed: {e}"),
            })?;
        let gate = Semaphore::new(config.inflight_cap);
        Ok(HttpVlmClient {
            config,
            client,
            gate,
        })
    }

    fn attempt(&self, body: &[u8]) -> Result<GenerationResponse, AttemptError> {
        let started = Instant::now();
        let mut builder = self
            .client
            .post(&self.config.endpoint)
            .header("content-type", "application/json")
            .body(body.to_vec());
        if let Some(token) = &self.config.auth_token {
            builder = builder.bearer_auth(token);
        }
        let response = builder.send().map_err(|e| {
            AttemptError::Retryable(e.to_string(), e.is_timeout())
        })?;
        let status = response.status().as_u16();
        let text = response.text().unwrap_or_default();
        match status {
            200..=299 => {
                let wire: WireResponse =
                    serde_json::from_str(&text).map_err(|e| {
                        AttemptError::Fatal(VlmError::ServiceError {
                            status,
                            body: format!("unparseable response: {e}"),
                        })
                    })?;
                Ok(GenerationResponse {
                    text: wire.text,
                    usage: wire.usage,
                    latency_ms: started.elapsed().as_millis() as u64,
                })
            }
            401 | 403 => Err(AttemptError::Fatal(VlmError::AuthFailure(status))),
            500..=599 => Err(AttemptError::Retryable(
                format!("status {status}: {}", excerpt(&text)),
                false,
            )),
            _ => Err(AttemptError::Fatal(VlmError::ServiceError {
                status,
                body: excerpt(&text),
            })),
        }
    }
}

fn excerpt(body: &str) -> String {
    const LIMIT: usize = 256;
    if body.len() <= LIMIT {
        body.to_string()
    } else {
        let mut end = LIMIT;
        while !body.is_char_boundary(end) {
            end -= 1;
        }
        format!("{}…", &body[..end])
    }
}

impl VlmService for HttpVlmClient {
    fn generate(&self, req: &GenerationRequest) -> Result<GenerationResponse, VlmError> {
        let _permit = self.gate.acquire();
        let body = encode_request(req);
        let attempts = self.config.retry_cap + 1;
        let mut last = String::new();
        let mut last_was_timeout = false;
        for attempt in 0..attempts {
            match self.attempt(&body) {
                Ok(resp) => return Ok(resp),
                Err(AttemptError::Fatal(e)) => return Err(e),
                Err(AttemptError::Retryable(reason, timed_out)) => {
                    last = reason;
                    last_was_timeout = timed_out;
                    if attempt + 1 < attempts {
                        let backoff = self.config.backoff_base * 2u32.pow(attempt as u32);
                        std::thread::sleep(backoff);
                    }
                }
            }
        }
        if attempts == 1 && last_was_timeout {
            return Err(VlmError::Timeout(self.config.timeout));
        }
        Err(VlmError::RetriesExhausted { attempts, last })
    }
}

/// Canned in-process service: returns a fixed response with zero latency, or
/// a permanent failure. Never touches the network.
pub struct StubVlm {
    response: Result<String, String>,
}

impl StubVlm {
    pub fn with_response(text: impl Into<String>) -> Self {
        StubVlm {
            response: Ok(text.into()),
        }
    }

    /// Oracle stub: replays a known level assignment as well-formed JSONL,
    /// so an end-to-end pipeline against matching gold scores TocEDS 1.0 by
    /// construction.
    pub fn from_gold(assignment: &LevelAssignment) -> Self {
        StubVlm {
            response: Ok(assignment.to_jsonl()),
        }
    }

    pub fn failing(reason: impl Into<String>) -> Self {
        StubVlm {
            response: Err(reason.into()),
        }
    }
}

impl VlmService for StubVlm {
    fn generate(&self, _req: &GenerationRequest) -> Result<GenerationResponse, VlmError> {
        match &self.response {
            Ok(text) => Ok(GenerationResponse {
                text: text.clone(),
                usage: Usage::default(),
                latency_ms: 0,
            }),
            Err(reason) => Err(VlmError::RetriesExhausted {
                attempts: 1,
                last: reason.clone(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    fn request() -> GenerationRequest {
        GenerationRequest {
            instruction: "do the thing".into(),
            text_lines: vec!["[1] Overview".into(), "[2] Details".into()],
            images: vec![ImageAttachment::png(vec![1, 2, 3, 4])],
            decode_params: DecodeParams::default(),
        }
    }

    /// Serve `responses` (status line + body) one per connection, returning
    /// the bound endpoint and a counter of connections handled.
    fn serve(responses: Vec<(u16, String)>) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let endpoint = format!("http://{}/generate", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let hits_clone = hits.clone();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = match listener.accept() {
                    Ok(s) => s,
                    Err(_) => return,
                };
                hits_clone.fetch_add(1, Ordering::SeqCst);
                // read request until end of body (content-length)
                let mut buf = Vec::new();
                let mut tmp = [0u8; 4096];
                loop {
                    match stream.read(&mut tmp) {
                        Ok(0) => break,
                        Ok(n) => {
                            buf.extend_from_slice(&tmp[..n]);
                            if let Some(pos) = find_header_end(&buf) {
                                let headers = String::from_utf8_lossy(&buf[..pos]);
                                let want = headers
                                    .lines()
                                    .find_map(|l| {
                                        l.to_ascii_lowercase()
                                            .strip_prefix("content-length:")
                                            .map(|v| v.trim().parse::<usize>().unwrap_or(0))
                                    })
                                    .unwrap_or(0);
                                if buf.len() >= pos + 4 + want {
                                    break;
                                }
                            }
                        }
                        Err(_) => break,
                    }
                }
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(reply.as_bytes());
            }
        });
        (endpoint, hits)
    }

    fn find_header_end(buf: &[u8]) -> Option<usize> {
        buf.windows(4).position(|w| w == b"\r\n\r\n")
    }

    fn test_config(endpoint: String, retry_cap: usize) -> VlmConfig {
        VlmConfig {
            endpoint,
            auth_token: Some("secret-token".into()),
            timeout: Duration::from_secs(5),
            retry_cap,
            inflight_cap: 2,
            backoff_base: Duration::from_millis(1),
        }
    }

    #[test]
    fn encoding_is_deterministic_and_ordered() {
        let req = request();
        assert_eq!(encode_request(&req), encode_request(&req.clone()));
        let value: serde_json::Value = serde_json::from_slice(&encode_request(&req)).unwrap();
        assert_eq!(value["schema_version"], 1);
        assert_eq!(value["text_lines"][0], "[1] Overview");
        let id = value["images"][0]["id"].as_str().unwrap();
        assert!(id.starts_with("sha256:"));
        // image order and content preserved
        let b64 = value["images"][0]["data_base64"].as_str().unwrap();
        assert_eq!(
            base64::engine::general_purpose::STANDARD
                .decode(b64)
                .unwrap(),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn generates_against_local_server() {
        let (endpoint, hits) = serve(vec![(
            200,
            "{\"text\":\"{\\\"label\\\": 1, \\\"level\\\": 1}\",\"usage\":{\"prompt_tokens\":10,\"completion_tokens\":5}}".into(),
        )]);
        let client = HttpVlmClient::new(test_config(endpoint, 0)).unwrap();
        let resp = client.generate(&request()).unwrap();
        assert_eq!(resp.text, "{\"label\": 1, \"level\": 1}");
        assert_eq!(resp.usage.prompt_tokens, 10);
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn retries_transient_500_then_succeeds() {
        let (endpoint, hits) = serve(vec![
            (500, "{\"error\":\"flaky\"}".into()),
            (200, "{\"text\":\"ok\"}".into()),
        ]);
        let client = HttpVlmClient::new(test_config(endpoint, 2)).unwrap();
        let resp = client.generate(&request()).unwrap();
        assert_eq!(resp.text, "ok");
        assert_eq!(hits.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn auth_failure_is_immediate() {
        let (endpoint, hits) = serve(vec![(401, "{}".into()), (401, "{}".into())]);
        let client = HttpVlmClient::new(test_config(endpoint, 3)).unwrap();
        match client.generate(&request()) {
            Err(VlmError::AuthFailure(401)) => {}
            other => panic!("expected auth failure, got {other:?}"),
        }
        assert_eq!(hits.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn client_4xx_surfaces_body_excerpt() {
        let (endpoint, _) = serve(vec![(422, "{\"error\":\"bad envelope\"}".into())]);
        let client = HttpVlmClient::new(test_config(endpoint, 3)).unwrap();
        match client.generate(&request()) {
            Err(VlmError::ServiceError { status: 422, body }) => {
                assert!(body.contains("bad envelope"));
            }
            other => panic!("expected service error, got {other:?}"),
        }
    }

    #[test]
    fn unreachable_endpoint_exhausts_retries() {
        // bind-then-drop gives a port with nothing listening
        let port = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        let client = HttpVlmClient::new(test_config(
            format!("http://127.0.0.1:{port}/generate"),
            2,
        ))
        .unwrap();
        match client.generate(&request()) {
            Err(VlmError::RetriesExhausted { attempts: 3, .. }) => {}
            other => panic!("expected exhausted retries, got {other:?}"),
        }
    }

    #[test]
    fn malformed_success_body_is_a_service_error() {
        let (endpoint, _) = serve(vec![(200, "not json".into())]);
        let client = HttpVlmClient::new(test_config(endpoint, 0)).unwrap();
        assert!(matches!(
            client.generate(&request()),
            Err(VlmError::ServiceError { status: 200, .. })
        ));
    }

    #[test]
    fn semaphore_bounds_concurrency() {
        let sem = Arc::new(Semaphore::new(2));
        let live = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (sem, live, peak) = (sem.clone(), live.clone(), peak.clone());
                std::thread::spawn(move || {
                    let _permit = sem.acquire();
                    let now = live.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                    live.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }

    #[test]
    fn stub_replays_gold_assignment() {
        let assignment = LevelAssignment::from_pairs([(1, 1), (2, 2)]);
        let stub = StubVlm::from_gold(&assignment);
        let resp = stub.generate(&request()).unwrap();
        assert_eq!(resp.text, assignment.to_jsonl());
        assert_eq!(resp.latency_ms, 0);
    }

    #[test]
    fn failing_stub_reports_exhaustion() {
        let stub = StubVlm::failing("endpoint down");
        assert!(matches!(
            stub.generate(&request()),
            Err(VlmError::RetriesExhausted { .. })
        ));
    }
}
