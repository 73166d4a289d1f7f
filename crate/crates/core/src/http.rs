use std::time::Duration;

use crate::error::LlmFailure;

pub(crate) fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

pub(crate) fn failure(err: ureq::Error, timeout: Duration) -> LlmFailure {
    match err {
        ureq::Error::Timeout(_) => LlmFailure::Timeout(timeout.as_secs()),
        other => LlmFailure::Transport(other.to_string()),
    }
}

/// Reads a non-2xx response into a transport failure, keeping a short body excerpt.
pub(crate) fn status_failure(resp: &mut ureq::http::Response<ureq::Body>) -> LlmFailure {
    let status = resp.status();
    let body = resp.body_mut().read_to_string().unwrap_or_default();
    let excerpt: String = body.chars().take(200).collect();
    LlmFailure::Transport(format!("HTTP {status}: {excerpt}"))
}
