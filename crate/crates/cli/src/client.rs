use std::time::Duration;

use serde_json::Value;

use crate::exit::{self, CliError};

pub struct Client {
    base: String,
    agent: ureq::Agent,
}

impl Client {
    pub fn new(bind_address: &str) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .into();
        Client {
            base: format!("http://{bind_address}"),
            agent,
        }
    }

    /// Posts JSON and turns an error body back into the matching exit code.
    pub fn post(&self, path: &str, token: Option<&str>, body: &Value) -> Result<Value, CliError> {
        let mut req = self
            .agent
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json");
        if let Some(t) = token {
            req = req.header("authorization", format!("Bearer {t}"));
        }
        let mut resp = req
            .send(body.to_string())
            .map_err(|e| CliError::transport(format!("cannot reach {}: {e}", self.base)))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| CliError::transport(e.to_string()))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|_| CliError::transport(format!("unexpected reply ({status}): {text}")))?;
        if status == 200 {
            return Ok(value);
        }
        let kind = value["error"].as_str().unwrap_or("Internal");
        let message = value["message"].as_str().unwrap_or("request failed").to_string();
        Err(CliError::new(exit::code_of(kind), message))
    }
}
