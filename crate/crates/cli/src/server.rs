//! The long-running process: site pages plus the JSON API used by the
//! `login`, `query` and `profile` subcommands.

use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use medagent::corpus::{site_router, SiteService};
use medagent::personalization::create_or_update_profile;
use medagent::security::{Credential, SessionStore};
use medagent::topology::SearchSystem;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::exit::{self, CliError};

pub struct App {
    pub system: SearchSystem,
    pub users_file: PathBuf,
}

/// `user_id ip` per line.
pub fn load_users(path: &Path, sessions: &SessionStore) -> Result<usize, CliError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(CliError::internal(format!("cannot read {}: {e}", path.display()))),
    };
    let mut n = 0;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let (user, ip) = line
            .split_once(char::is_whitespace)
            .ok_or_else(|| CliError::config(format!("{}: malformed line `{line}`", path.display())))?;
        let ip: IpAddr = ip
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("{}: bad address in `{line}`", path.display())))?;
        sessions.register_user(user, ip);
        n += 1;
    }
    Ok(n)
}

pub fn router(app: Arc<App>, sites: SiteService) -> Router {
    let api = Router::new()
        .route("/api/login", post(login))
        .route("/api/query", post(query))
        .route("/api/profile", post(profile))
        .with_state(app);
    api.merge(site_router(sites))
}

type Reply = (StatusCode, Json<Value>);

fn failure(e: CliError) -> Reply {
    let status = match e.code {
        exit::AUTH_FAILED | exit::AUTH_REQUIRED => StatusCode::UNAUTHORIZED,
        exit::EMPTY_QUERY | exit::INVALID_INPUT => StatusCode::BAD_REQUEST,
        exit::TRANSPORT => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    };
    (status, Json(json!({"error": e.kind(), "message": e.message})))
}

fn bearer(headers: &HeaderMap) -> String {
    headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .unwrap_or_default()
        .to_string()
}

async fn blocking<F>(f: F) -> Reply
where
    F: FnOnce() -> Result<Value, CliError> + Send + 'static,
{
    match tokio::task::spawn_blocking(f).await {
        Ok(Ok(v)) => (StatusCode::OK, Json(v)),
        Ok(Err(e)) => failure(e),
        Err(e) => failure(CliError::internal(e.to_string())),
    }
}

#[derive(Deserialize)]
struct LoginBody {
    user_id: String,
    ip: String,
}

async fn login(State(app): State<Arc<App>>, Json(body): Json<LoginBody>) -> Reply {
    blocking(move || {
        let sessions = &app.system.sessions;
        load_users(&app.users_file, sessions)?;
        let source_ip: IpAddr = body.ip.parse().map_err(|_| CliError::from(medagent::security::SecurityError::AuthFailed))?;
        let session = sessions.login(&Credential {
            user_id: body.user_id,
            source_ip,
        })?;
        Ok(json!({"token": session.token, "ttl_secs": sessions.ttl().as_secs()}))
    })
    .await
}

#[derive(Deserialize)]
struct QueryBody {
    text: String,
}

async fn query(State(app): State<Arc<App>>, headers: HeaderMap, Json(body): Json<QueryBody>) -> Reply {
    let token = bearer(&headers);
    blocking(move || {
        let resp = app.system.end_to_end_search(&token, &body.text)?;
        Ok(json!({
            "language": resp.annotated.language,
            "terms": resp.annotated.search_terms(),
            "removed_stopwords": resp.annotated.removed_stopwords,
            "categories": resp.annotated.target_categories,
            "messages_sent": resp.outcome.messages_sent,
            "collection_ms": resp.outcome.total_ms,
            "results": resp.results,
        }))
    })
    .await
}

#[derive(Deserialize)]
struct ProfileBody {
    fields: Vec<(String, String)>,
}

async fn profile(State(app): State<Arc<App>>, headers: HeaderMap, Json(body): Json<ProfileBody>) -> Reply {
    let token = bearer(&headers);
    blocking(move || {
        let sys = &app.system;
        let p = create_or_update_profile(&sys.profiles, &sys.sessions, &token, &body.fields)?;
        serde_json::to_value(&p).map_err(|e| CliError::internal(e.to_string()))
    })
    .await
}

/// Serves until interrupted.
pub fn run(app: Arc<App>, sites: SiteService, bind_address: &str, locations: usize) -> Result<(), CliError> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::internal(e.to_string()))?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(bind_address)
            .await
            .map_err(|e| CliError::config(format!("cannot bind {bind_address}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| CliError::internal(e.to_string()))?;
        println!("platform ready: {locations} locations");
        println!("listening on http://{addr}");
        use std::io::Write as _;
        let _ = std::io::stdout().flush();
        axum::serve(listener, router(app, sites))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError::transport(e.to_string()))
    })
}
