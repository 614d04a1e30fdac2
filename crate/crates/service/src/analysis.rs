use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::http::StatusCode;
use ludeme::grammar::{parse, validate, Catalog};
use ludeme::metrics::{run_analysis, AnalysisJob, MetricsReport};
use serde::Serialize;

use crate::session::SessionHandle;
use crate::wire::{ApiError, MessageType};

/// A background analysis and its outcome, kept until shutdown.
pub struct Job {
    pub id: String,
    pub total: usize,
    done: AtomicUsize,
    result: Mutex<Option<Result<MetricsReport, String>>>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct JobStatus {
    pub job_id: String,
    /// `running`, `done` or `failed`.
    pub status: &'static str,
    pub done: usize,
    pub total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Job {
    pub fn status(&self) -> JobStatus {
        let result = self.result.lock().unwrap();
        let (status, report, error) = match &*result {
            None => ("running", None, None),
            Some(Ok(r)) => ("done", Some(r.clone()), None),
            Some(Err(e)) => ("failed", None, Some(e.clone())),
        };
        JobStatus {
            job_id: self.id.clone(),
            status,
            done: self.done.load(Ordering::Relaxed),
            total: self.total,
            report,
            error,
        }
    }
}

/// Checks a job posted over HTTP. Only inline rules are accepted.
pub fn check_job(body: &[u8]) -> Result<AnalysisJob, ApiError> {
    let job: AnalysisJob = serde_json::from_slice(body).map_err(ApiError::bad_json)?;
    if job.lud_path.is_some() {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            "invalid_config",
            "`ludPath` is not accepted over HTTP; send the rules inline as `lud`",
        ));
    }
    job.check()
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_config", e.to_string()))?;
    let text = job.lud.as_deref().unwrap_or_default();
    // Same checks as session creation, without needing a playable start.
    let tree = parse(text)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "parse_error", e.to_string()).with_details(&e.0))?;
    let report = validate(&tree, &Catalog::v1());
    if report.hole_count > 0 {
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "partial_game", "partial game; use /reconstruct"));
    }
    if !report.issues.is_empty() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid_rules", "the rules do not validate").with_details(&report));
    }
    Ok(job)
}

/// Starts the job on the blocking pool. Progress is pushed to `session`'s
/// event stream in 5% steps, then the result.
pub fn start(id: String, job: AnalysisJob, session: Option<Arc<SessionHandle>>) -> Arc<Job> {
    let handle = Arc::new(Job {
        id,
        total: job.games + job.depth_probe.games,
        done: AtomicUsize::new(0),
        result: Mutex::new(None),
    });
    let j = handle.clone();
    tokio::task::spawn_blocking(move || {
        let last_step = Mutex::new(0usize);
        let progress = |done: usize, total: usize| {
            j.done.fetch_max(done, Ordering::Relaxed);
            if let Some(s) = &session {
                let step = done * 20 / total.max(1);
                let mut last = last_step.lock().unwrap();
                if step > *last {
                    *last = step;
                    s.events.emit(
                        MessageType::AnalysisProgress,
                        serde_json::json!({ "jobId": j.id, "done": done, "total": total }),
                    );
                }
            }
        };
        let text = job.lud.clone().unwrap_or_default();
        let result = parse(&text)
            .map_err(|e| e.to_string())
            .and_then(|tree| run_analysis(&job, &tree, Some(&progress)).map_err(|e| e.to_string()));
        if let Err(e) = &result {
            log::warn!("analysis {} failed: {e}", j.id);
        }
        *j.result.lock().unwrap() = Some(result);
        if let Some(s) = &session {
            s.events.emit(MessageType::AnalysisDone, j.status());
        }
    });
    handle
}
