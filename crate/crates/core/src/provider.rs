//! Shared JSON-over-HTTP client for remote model backends.

use std::sync::{Condvar, Mutex, OnceLock};
use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine as _;
use serde_json::Value;
use thiserror::Error;

use crate::raster::RasterImage;

pub const DEFAULT_IN_FLIGHT: usize = 8;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ProviderError {
    #[error("provider unavailable: {0}")]
    Unavailable(String),
    #[error("provider timed out after {0:?}")]
    Timeout(Duration),
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
}

impl ProviderError {
    pub fn code(&self) -> &'static str {
        match self {
            ProviderError::Unavailable(_) => "ProviderUnavailable",
            ProviderError::Timeout(_) => "ProviderTimeout",
            ProviderError::MalformedResponse(_) => "ProviderMalformedResponse",
        }
    }
}

/// Counting semaphore bounding concurrent remote calls.
#[derive(Debug)]
pub struct InFlightLimiter {
    state: Mutex<(usize, usize)>,
    freed: Condvar,
}

impl InFlightLimiter {
    pub fn new(limit: usize) -> Self {
        InFlightLimiter {
            state: Mutex::new((0, limit.max(1))),
            freed: Condvar::new(),
        }
    }

    pub fn set_limit(&self, limit: usize) {
        self.state.lock().unwrap().1 = limit.max(1);
        self.freed.notify_all();
    }

    pub fn in_flight(&self) -> usize {
        self.state.lock().unwrap().0
    }

    pub fn acquire(&self) -> InFlightPermit<'_> {
        let mut state = self.state.lock().unwrap();
        while state.0 >= state.1 {
            state = self.freed.wait(state).unwrap();
        }
        state.0 += 1;
        InFlightPermit { limiter: self }
    }
}

pub struct InFlightPermit<'a> {
    limiter: &'a InFlightLimiter,
}

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        self.limiter.state.lock().unwrap().0 -= 1;
        self.limiter.freed.notify_one();
    }
}

/// Process-wide limiter shared by every remote port.
pub fn global_limiter() -> &'static InFlightLimiter {
    static LIMITER: OnceLock<InFlightLimiter> = OnceLock::new();
    LIMITER.get_or_init(|| InFlightLimiter::new(DEFAULT_IN_FLIGHT))
}

#[derive(Clone, Debug)]
pub struct HttpClient {
    pub base_url: String,
    pub timeout: Duration,
    pub max_retries: u32,
    pub api_key: Option<String>,
}

impl HttpClient {
    pub fn new(base_url: impl Into<String>, timeout: Duration, max_retries: u32) -> Self {
        HttpClient {
            base_url: base_url.into(),
            timeout,
            max_retries,
            api_key: None,
        }
    }

    fn url(&self, route: &str) -> String {
        if route.is_empty() {
            return self.base_url.clone();
        }
        format!("{}/{}", self.base_url.trim_end_matches('/'), route.trim_start_matches('/'))
    }

    /// POSTs `body` and returns the decoded JSON reply. Transport failures,
    /// timeouts and non-200 statuses are retried; each attempt is bounded by
    /// the timeout, so the whole call takes at most `(retries + 1) * timeout`.
    pub fn post_json(&self, route: &str, body: &Value) -> Result<Value, ProviderError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let url = self.url(route);
        let _permit = global_limiter().acquire();
        let mut last = ProviderError::Unavailable("no attempt made".into());
        for _ in 0..=self.max_retries {
            let mut req = agent.post(&url);
            if let Some(key) = &self.api_key {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
            match req.send_json(body) {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if status != 200 {
                        last = ProviderError::Unavailable(format!("{url} answered HTTP {status}"));
                        continue;
                    }
                    return match resp.body_mut().read_json::<Value>() {
                        Ok(v) => Ok(v),
                        Err(ureq::Error::Timeout(_)) => Err(ProviderError::Timeout(self.timeout)),
                        Err(e) => Err(ProviderError::MalformedResponse(e.to_string())),
                    };
                }
                Err(ureq::Error::Timeout(_)) => last = ProviderError::Timeout(self.timeout),
                Err(e) => last = ProviderError::Unavailable(format!("{url}: {e}")),
            }
        }
        Err(last)
    }
}

pub fn field<'a>(reply: &'a Value, name: &str) -> Result<&'a Value, ProviderError> {
    reply
        .get(name)
        .ok_or_else(|| ProviderError::MalformedResponse(format!("missing field \"{name}\"")))
}

pub fn str_field<'a>(reply: &'a Value, name: &str) -> Result<&'a str, ProviderError> {
    field(reply, name)?
        .as_str()
        .ok_or_else(|| ProviderError::MalformedResponse(format!("field \"{name}\" is not a string")))
}

pub fn encode_png_base64(image: &RasterImage) -> String {
    STANDARD.encode(image.to_png())
}

pub fn decode_png_base64(text: &str) -> Result<RasterImage, ProviderError> {
    let bytes = STANDARD
        .decode(text.trim())
        .map_err(|e| ProviderError::MalformedResponse(format!("base64: {e}")))?;
    RasterImage::decode(&bytes).map_err(|e| ProviderError::MalformedResponse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn limiter_bounds_concurrency() {
        let limiter = Arc::new(InFlightLimiter::new(2));
        let peak = Arc::new(Mutex::new(0usize));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let limiter = Arc::clone(&limiter);
                let peak = Arc::clone(&peak);
                std::thread::spawn(move || {
                    let _p = limiter.acquire();
                    let now = limiter.in_flight();
                    let mut pk = peak.lock().unwrap();
                    *pk = (*pk).max(now);
                    drop(pk);
                    std::thread::sleep(Duration::from_millis(5));
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(*peak.lock().unwrap() <= 2);
        assert_eq!(limiter.in_flight(), 0);
    }

    #[test]
    fn png_base64_round_trip() {
        let img = RasterImage::filled(3, 2, [9, 8, 7]);
        assert_eq!(decode_png_base64(&encode_png_base64(&img)).unwrap(), img);
        assert!(matches!(decode_png_base64("!!"), Err(ProviderError::MalformedResponse(_))));
    }

    #[test]
    fn unreachable_endpoint_is_unavailable() {
        // Port 9 on localhost is normally closed.
        let client = HttpClient::new("http://127.0.0.1:9", Duration::from_millis(200), 1);
        let err = client.post_json("", &serde_json::json!({})).unwrap_err();
        assert!(matches!(err, ProviderError::Unavailable(_) | ProviderError::Timeout(_)));
    }
}
