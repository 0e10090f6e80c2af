use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::wire::{
    decode_b64, encode_b64, ErrorBody, ImageBody, InpaintBody, LabelsBody, SegmentBody,
    INPAINT_PATH, SEGMENT_PATH,
};
use super::{check_dimensions, Backend, BackendError, InpaintRequest, SegmentRequest};
use crate::imgcore::{decode_rgb_png, encode_rgb_png, SdrImage};
use crate::masking::SemanticLabeling;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

/// Responses carry whole images as base64 PNG; cap what we buffer.
const BODY_LIMIT: u64 = 512 * 1024 * 1024;

/// Blocking client for the model service.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    base: String,
    agent: ureq::Agent,
    timeout: Duration,
    retries: u32,
}

impl HttpBackend {
    pub fn new(base_url: &str) -> Result<Self, BackendError> {
        Self::with_timeout(base_url, DEFAULT_TIMEOUT)
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> Result<Self, BackendError> {
        let base = base_url.trim_end_matches('/').to_string();
        if !(base.starts_with("http://") || base.starts_with("https://")) {
            return Err(BackendError::InvalidRequest(format!(
                "backend URL {base_url:?} must start with http:// or https://"
            )));
        }
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpBackend {
            base,
            agent,
            timeout,
            retries: 0,
        })
    }

    /// Extra attempts for retryable failures (timeouts, transport, 5xx).
    pub fn retries(mut self, n: u32) -> Self {
        self.retries = n;
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    /// Posts raw JSON and returns the status with the decoded body, without
    /// interpreting either. Used by the conformance suite.
    pub fn post_json(
        &self,
        path: &str,
        body: &serde_json::Value,
    ) -> Result<(u16, serde_json::Value), BackendError> {
        let (status, text) = self.send(path, body)?;
        let value = serde_json::from_str(&text).unwrap_or(serde_json::Value::String(text));
        Ok((status, value))
    }

    fn send(&self, path: &str, body: &impl Serialize) -> Result<(u16, String), BackendError> {
        let mut resp = self
            .agent
            .post(format!("{}{path}", self.base))
            .send_json(body)
            .map_err(|e| self.transport(e))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .with_config()
            .limit(BODY_LIMIT)
            .read_to_string()
            .map_err(|e| self.transport(e))?;
        Ok((status, text))
    }

    fn call<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, BackendError> {
        let mut attempt = 0;
        loop {
            match self.call_once(path, body) {
                Err(e) if e.is_retryable() && attempt < self.retries => {
                    attempt += 1;
                    log::warn!("{path}: {e}; retry {attempt}/{}", self.retries);
                }
                other => return other,
            }
        }
    }

    fn call_once<B: Serialize, R: DeserializeOwned>(
        &self,
        path: &str,
        body: &B,
    ) -> Result<R, BackendError> {
        let (status, text) = self.send(path, body)?;
        if status != 200 {
            let message = serde_json::from_str::<ErrorBody>(&text)
                .map(|b| b.error)
                .unwrap_or(text);
            return Err(BackendError::Server { status, message });
        }
        serde_json::from_str(&text).map_err(|e| BackendError::Malformed(format!("{path}: {e}")))
    }

    fn transport(&self, e: ureq::Error) -> BackendError {
        match e {
            ureq::Error::Timeout(_) => BackendError::Timeout(self.timeout),
            ureq::Error::Io(io) if io.kind() == std::io::ErrorKind::TimedOut => {
                BackendError::Timeout(self.timeout)
            }
            other => BackendError::Transport(other.to_string()),
        }
    }
}

impl Backend for HttpBackend {
    fn inpaint(&self, req: &InpaintRequest<'_>) -> Result<SdrImage, BackendError> {
        let body = InpaintBody {
            image_png_b64: encode_b64(&encode_rgb_png(req.image())?),
            mask_png_b64: encode_b64(&req.mask().to_png()?),
            prompt: req.prompt().to_string(),
            seed: req.seed(),
        };
        let resp: ImageBody = self.call(INPAINT_PATH, &body)?;
        let png = decode_b64("image_png_b64", &resp.image_png_b64)?;
        let img = decode_rgb_png(&png)?;
        check_dimensions(req.image().dimensions(), img.dimensions())?;
        Ok(img)
    }

    fn segment(&self, req: &SegmentRequest<'_>) -> Result<SemanticLabeling, BackendError> {
        let body = SegmentBody {
            image_png_b64: encode_b64(&encode_rgb_png(req.image())?),
        };
        let resp: LabelsBody = self.call(SEGMENT_PATH, &body)?;
        let png = decode_b64("labels_png_b64", &resp.labels_png_b64)?;
        let labels = SemanticLabeling::from_label_png(&png)
            .map_err(|e| BackendError::Malformed(format!("labels: {e}")))?;
        check_dimensions(req.image().dimensions(), labels.dimensions())?;
        Ok(labels)
    }

    fn name(&self) -> &str {
        "http"
    }
}
